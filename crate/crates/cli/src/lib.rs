//! Batch experiment driver for the `fdcim` simulator.
//!
//! Every run writes its artifacts to `<out>/<label>-<hash8>/` together with
//! a `manifest.toml` naming the configuration hash, seed, crate versions and
//! the SHA-256 of every artifact.

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::output::Artifact;

pub const OUT_DIR_ENV: &str = "FDCIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

/// Failures that map to dedicated exit codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Config(String),
    Invariant(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Exit status for an error: model validation errors count as configuration
/// errors since every model parameter comes from the configuration.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Config(_) => EXIT_CONFIG,
                Failure::Invariant(_) => EXIT_INVARIANT,
            };
        }
        if cause.downcast_ref::<fdcim::Error>().is_some() {
            return EXIT_CONFIG;
        }
    }
    EXIT_OTHER
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Transform,
    Crossbar,
    Adc,
    Asymsearch,
    Cost,
    DnlInl,
    All,
}

impl Experiment {
    pub const SINGLE: [Experiment; 6] = [
        Experiment::Transform,
        Experiment::Crossbar,
        Experiment::Adc,
        Experiment::Asymsearch,
        Experiment::Cost,
        Experiment::DnlInl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Transform => "transform",
            Experiment::Crossbar => "crossbar",
            Experiment::Adc => "adc",
            Experiment::Asymsearch => "asymsearch",
            Experiment::Cost => "cost",
            Experiment::DnlInl => "dnl-inl",
            Experiment::All => "all",
        }
    }

    /// Artifacts in a fixed order.
    pub fn artifacts(self, cfg: &Config) -> Result<Vec<Artifact>> {
        let out = match self {
            Experiment::Transform => experiments::transform(cfg),
            Experiment::Crossbar => experiments::crossbar(cfg),
            Experiment::Adc => experiments::adc(cfg),
            Experiment::Asymsearch => experiments::asymsearch(cfg),
            Experiment::Cost => experiments::cost(cfg),
            Experiment::DnlInl => experiments::dnl_inl_study(cfg),
            Experiment::All => {
                let mut all = Vec::new();
                for e in Self::SINGLE {
                    all.extend(e.artifacts(cfg)?);
                }
                return Ok(all);
            }
        };
        out.with_context(|| format!("{} experiment failed", self.name()))
    }
}

#[derive(Debug, Serialize)]
struct ManifestArtifact<'a> {
    name: &'a str,
    bytes: usize,
    sha256: String,
    config_hash: &'a str,
}

#[derive(Debug, Serialize)]
struct Versions {
    fdcim: &'static str,
    fdcim_cli: &'static str,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    label: &'a str,
    config_hash: &'a str,
    seed: u64,
    versions: Versions,
    artifacts: Vec<ManifestArtifact<'a>>,
    config: &'a Config,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub config_hash: String,
    pub artifacts: Vec<String>,
}

fn check_label(label: &str) -> Result<(), Failure> {
    let ok = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        && !label.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(Failure::Config(format!(
            "experiment label \"{label}\" must be non-empty and use only letters, digits, '-', '_' or '.'"
        )))
    }
}

/// Runs `experiment` and writes its artifacts plus `manifest.toml` under
/// `out_root`.
pub fn run(experiment: Experiment, cfg: &Config, out_root: &Path) -> Result<RunOutcome> {
    let label = cfg.experiment.clone().unwrap_or_else(|| experiment.name().to_string());
    check_label(&label)?;
    let hash = cfg.hash();
    let artifacts = experiment.artifacts(cfg)?;

    let dir = out_root.join(format!("{label}-{}", &hash[..8]));
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for a in &artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.bytes).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let manifest = Manifest {
        experiment: experiment.name(),
        label: &label,
        config_hash: &hash,
        seed: cfg.seed,
        versions: Versions {
            fdcim: fdcim::VERSION,
            fdcim_cli: env!("CARGO_PKG_VERSION"),
        },
        artifacts: artifacts
            .iter()
            .map(|a| ManifestArtifact {
                name: &a.name,
                bytes: a.bytes.len(),
                sha256: hex::encode(Sha256::digest(&a.bytes)),
                config_hash: &hash,
            })
            .collect(),
        config: cfg,
    };
    let text = toml::to_string(&manifest).context("cannot serialize manifest")?;
    std::fs::write(dir.join("manifest.toml"), text).context("cannot write manifest")?;

    Ok(RunOutcome {
        dir,
        config_hash: hash,
        artifacts: artifacts.into_iter().map(|a| a.name).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let c: anyhow::Error = Failure::Config("x".into()).into();
        let i: anyhow::Error = Failure::Invariant("x".into()).into();
        let m: anyhow::Error = anyhow::Error::from(fdcim::bwht_plan(0).unwrap_err()).context("wrapped");
        assert_eq!(exit_code(&c), EXIT_CONFIG);
        assert_eq!(exit_code(&i.context("outer")), EXIT_INVARIANT);
        assert_eq!(exit_code(&m), EXIT_CONFIG);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_OTHER);
    }

    #[test]
    fn labels_are_path_safe() {
        assert!(check_label("adc-sweep_1").is_ok());
        assert!(check_label("../x").is_err());
        assert!(check_label("").is_err());
    }
}
