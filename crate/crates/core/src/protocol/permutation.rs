use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection on `0..n`.
///
/// `apply` moves the item at position `i` to position `mapping[i]`, so a
/// receiver holding `p.apply(xs)` recovers `xs` with `p.inverse().apply(..)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            mapping: (0..n).collect(),
        }
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::InvalidArgument(format!(
                    "{mapping:?} is not a permutation of 0..{n}"
                )));
            }
            seen[m] = true;
        }
        Ok(Permutation { mapping })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.shuffle(rng);
        Permutation { mapping }
    }

    /// Exchanges positions `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "({i} {j}) out of range for {n}"
            )));
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(i, j);
        Ok(Permutation { mapping })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn image(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> Self {
        let mut mapping = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            mapping[m] = i;
        }
        Permutation { mapping }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Permutation {
            mapping: other.mapping.iter().map(|&i| self.mapping[i]).collect(),
        })
    }

    pub fn apply<T: Clone>(&self, items: &[T]) -> Result<Vec<T>> {
        if items.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: items.len(),
                right: self.len(),
            });
        }
        let mut out: Vec<Option<T>> = vec![None; items.len()];
        for (item, &dest) in items.iter().zip(&self.mapping) {
            out[dest] = Some(item.clone());
        }
        Ok(out
            .into_iter()
            .map(|x| x.expect("bijection fills every slot"))
            .collect())
    }

    /// Cycles of length ≥ 2, each starting at its smallest element, in ascending order.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut visited = vec![false; self.len()];
        let mut cycles = Vec::new();
        for start in 0..self.len() {
            if visited[start] {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut next = self.mapping[start];
            while next != start {
                visited[next] = true;
                cycle.push(next);
                next = self.mapping[next];
            }
            if cycle.len() > 1 {
                cycles.push(cycle);
            }
        }
        cycles
    }

    /// Number of positions not fixed.
    pub fn displaced(&self) -> usize {
        self.mapping
            .iter()
            .enumerate()
            .filter(|(i, &m)| *i != m)
            .count()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(mapping: Vec<usize>) -> Result<Self> {
        Permutation::from_mapping(mapping)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.mapping
    }
}
