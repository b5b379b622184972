//! `qka`: run protocol campaigns and the built-in checks from the command line.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qka_core::adversary::AttackGoal;
use qka_core::harness::{run_campaign, selftest, verify_example, Campaign, Scenario};
use qka_core::logical::NoiseModel;
use qka_core::protocol::{
    default_decoy_count, BackendKind, ProtocolConfig, DEFAULT_ERROR_THRESHOLD,
};
use qka_core::symbolic::{BitString, DibitString};
use qka_core::DEFAULT_SEED;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "qka", version, about = "Quantum key agreement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and print its summary.
    Run(Box<RunArgs>),
    /// Replay the two-dibit worked example and check every value.
    VerifyExample,
    /// Check the building blocks against their exact laws.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn parse<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

/// Every field is optional so that flags can override a config file.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RunArgs {
    /// Scenario: honest | eve | perm-attack-original | perm-attack-improved.
    #[arg(long, value_parser = parse::<Scenario>)]
    #[serde(default, deserialize_with = "de_parse")]
    scenario: Option<Scenario>,
    /// Key dibits per party.
    #[arg(short, long)]
    n: Option<usize>,
    /// Decoys per transmission (default max(8, n)).
    #[arg(long)]
    decoys: Option<usize>,
    /// Largest tolerated decoy error rate.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Collective noise model: dp or r.
    #[arg(long, value_parser = parse::<NoiseModel>)]
    #[serde(default, deserialize_with = "de_parse")]
    noise: Option<NoiseModel>,
    /// symbolic or state-vector.
    #[arg(long, value_parser = parse::<BackendKind>)]
    #[serde(default, deserialize_with = "de_parse")]
    backend: Option<BackendKind>,
    /// Final key (4n bits) a cheating Alice aims for.
    #[arg(long)]
    target_key: Option<String>,
    /// Alice's key contribution (2n bits); random per trial when absent.
    #[arg(long)]
    ka: Option<String>,
    /// Bob's key contribution (2n bits); random per trial when absent.
    #[arg(long)]
    kb: Option<String>,
    /// Forces the shared measurement record (2n bits, symbolic backend only).
    #[arg(long)]
    force_m: Option<String>,
    /// Write one transcript per trial under the output directory.
    #[arg(long)]
    #[serde(default)]
    transcripts: bool,
    /// Directory for summary.json and transcripts.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// TOML file with any of these options; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn de_parse<'de, D, T>(d: D) -> std::result::Result<Option<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: FromStr,
    T::Err: std::fmt::Display,
{
    let s = String::deserialize(d)?;
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

impl RunArgs {
    fn overlay(self, file: RunArgs) -> RunArgs {
        RunArgs {
            scenario: self.scenario.or(file.scenario),
            n: self.n.or(file.n),
            decoys: self.decoys.or(file.decoys),
            threshold: self.threshold.or(file.threshold),
            trials: self.trials.or(file.trials),
            seed: self.seed.or(file.seed),
            noise: self.noise.or(file.noise),
            backend: self.backend.or(file.backend),
            target_key: self.target_key.or(file.target_key),
            ka: self.ka.or(file.ka),
            kb: self.kb.or(file.kb),
            force_m: self.force_m.or(file.force_m),
            transcripts: self.transcripts || file.transcripts,
            output: self.output.or(file.output),
            config: self.config,
        }
    }

    fn into_campaign(self) -> Result<Campaign> {
        let scenario = self.scenario.unwrap_or(Scenario::Honest);
        let n = self.n.unwrap_or(4);
        let mut config = ProtocolConfig::new(n, self.noise.unwrap_or(NoiseModel::Dephasing))
            .with_backend(self.backend.unwrap_or_default())
            .with_decoys(
                self.decoys.unwrap_or_else(|| default_decoy_count(n)),
                self.threshold.unwrap_or(DEFAULT_ERROR_THRESHOLD),
            )
            .with_seed(self.seed.unwrap_or(DEFAULT_SEED));
        if let Some(m) = &self.force_m {
            config = config.with_injected_m(dibits("force-m", m)?);
        }
        let mut campaign = Campaign::new(scenario, config, self.trials.unwrap_or(1));
        if let Some(key) = &self.target_key {
            let key: BitString = key.parse().context("target-key")?;
            campaign = campaign.with_goal(AttackGoal::FinalKey(key));
        }
        campaign.ka = self.ka.as_deref().map(|s| dibits("ka", s)).transpose()?;
        campaign.kb = self.kb.as_deref().map(|s| dibits("kb", s)).transpose()?;
        campaign.write_transcripts = self.transcripts;
        campaign.output_path = self.output;
        campaign.validate()?;
        Ok(campaign)
    }
}

fn dibits(name: &str, s: &str) -> Result<DibitString> {
    s.parse()
        .with_context(|| format!("{name}: expected an even number of '0'/'1' characters"))
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let args = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let file: RunArgs =
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            args.overlay(file)
        }
        None => args,
    };
    let campaign = args.into_campaign()?;
    let report = run_campaign(&campaign)?;
    print!("{}", report.table());
    if let Some(dir) = &campaign.output_path {
        println!("summary written to {}", dir.join("summary.json").display());
    }
    Ok(ExitCode::SUCCESS)
}

fn report_checks<'a>(checks: impl IntoIterator<Item = &'a qka_core::harness::Check>) -> ExitCode {
    let mut ok = true;
    for check in checks {
        println!("{check}");
        ok &= check.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(*args),
        Command::VerifyExample => Ok(report_checks(&verify_example()?.checks)),
        Command::Selftest { seed } => {
            let checks = selftest(seed)?;
            if checks.is_empty() {
                bail!("self-test produced no checks");
            }
            Ok(report_checks(&checks))
        }
    }
}
