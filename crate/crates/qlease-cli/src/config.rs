//! Run configuration: an optional JSON config file overridden by flags,
//! with `QLEASE_SEED` as the fallback seed. Every output artifact echoes
//! the resolved configuration.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qlease_core::circuits::{CircuitSampler, SamplerKind};
use qlease_core::field::FieldParams;
use qlease_core::harness::AgreementMode;
use qlease_core::oracles::OracleMode;

pub const SEED_ENV_VAR: &str = "QLEASE_SEED";

/// The JSON config file: every field optional, flags win.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub q: Option<u8>,
    pub lambda: Option<usize>,
    pub n: Option<usize>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub strategy: Option<Vec<String>>,
    pub sampler: Option<String>,
    pub beta: Option<f64>,
    pub experiment: Option<String>,
}

/// Flag-level overrides collected from the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub q: Option<u8>,
    pub lambda: Option<usize>,
    pub n: Option<usize>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub strategy: Option<Vec<String>>,
    pub sampler: Option<String>,
    pub beta: Option<f64>,
    pub experiment: Option<String>,
}

/// The fully-resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub q: u8,
    pub lambda: usize,
    pub n: usize,
    pub mode: String,
    pub seed: u64,
    pub trials: u64,
    pub strategy: Vec<String>,
    pub sampler: String,
    pub beta: f64,
    pub experiment: String,
}

impl RunConfig {
    /// Resolution order: flag > config file > QLEASE_SEED (seed only) >
    /// default.
    pub fn resolve(file: Option<&ConfigFile>, flags: &Overrides) -> Result<Self> {
        let file = file.cloned().unwrap_or_default();
        let env_seed = std::env::var(SEED_ENV_VAR)
            .ok()
            .map(|s| s.parse::<u64>().context("QLEASE_SEED must be a 64-bit integer"))
            .transpose()?;
        let cfg = RunConfig {
            q: flags.q.or(file.q).unwrap_or(2),
            lambda: flags.lambda.or(file.lambda).unwrap_or(6),
            n: flags.n.or(file.n).unwrap_or(6),
            mode: flags.mode.clone().or(file.mode).unwrap_or_else(|| "ideal".into()),
            seed: flags.seed.or(file.seed).or(env_seed).unwrap_or(0),
            trials: flags.trials.or(file.trials).unwrap_or(1000),
            strategy: flags
                .strategy
                .clone()
                .or(file.strategy)
                .unwrap_or_else(|| vec!["measure_reprepare_duplicate".into()]),
            sampler: flags.sampler.clone().or(file.sampler).unwrap_or_else(|| "point".into()),
            beta: flags.beta.or(file.beta).unwrap_or(0.9),
            experiment: flags
                .experiment
                .clone()
                .or(file.experiment)
                .unwrap_or_else(|| "finite".into()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.field_params()?;
        self.oracle_mode()?;
        if !matches!(self.experiment.as_str(), "finite" | "infinite" | "both") {
            bail!("experiment must be finite, infinite, or both (got {})", self.experiment);
        }
        Ok(())
    }

    pub fn field_params(&self) -> Result<FieldParams> {
        FieldParams::new(self.q, self.lambda).map_err(|e| anyhow::anyhow!("{}", e))
    }

    pub fn oracle_mode(&self) -> Result<OracleMode> {
        match self.mode.as_str() {
            "ideal" => Ok(OracleMode::Ideal),
            "toy" => Ok(OracleMode::Toy),
            other => bail!("mode must be ideal or toy (got {})", other),
        }
    }

    pub fn circuit_sampler(&self) -> Result<CircuitSampler> {
        let kind = match self.sampler.as_str() {
            "point" => SamplerKind::Point,
            "wildcard" => SamplerKind::Wildcard,
            "affine" => SamplerKind::Affine { q: 2 },
            "affine3" => SamplerKind::Affine { q: 3 },
            "plaintext_eq" => SamplerKind::PlaintextEq,
            "unpredictable" => SamplerKind::Unpredictable,
            other => bail!("unknown sampler {}", other),
        };
        Ok(CircuitSampler::new(kind, self.n))
    }

    /// Exhaustive agreement up to n = 8, sampled beyond.
    pub fn agreement_mode(&self) -> AgreementMode {
        if self.n <= 8 {
            AgreementMode::Exhaustive
        } else {
            AgreementMode::Sampled { inputs: 32, runs_per_input: 16 }
        }
    }
}

pub fn load_config_file(path: &std::path::Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed config file {}", path.display()))
}
