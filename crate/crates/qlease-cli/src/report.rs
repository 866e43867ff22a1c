//! Report envelopes and JSON/CSV writers. Reports embed the seed and the
//! full configuration; re-running with the same seed reproduces them byte
//! for byte (timestamps are opt-in for exactly that reason).

use serde::Serialize;

use qlease_core::harness::{ExperimentReport, RateEstimate};

use crate::config::RunConfig;
use crate::{SCHEMA_VERSION, TOOL_NAME, TOOL_VERSION};

#[derive(Debug, Serialize)]
pub struct ReportEnvelope<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    /// Present only when stamping was requested; omitted by default so
    /// reruns are byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub config: RunConfig,
    pub payload: T,
}

impl<T: Serialize> ReportEnvelope<T> {
    pub fn new(config: &RunConfig, payload: T, stamp: bool) -> Self {
        let timestamp_unix = stamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        ReportEnvelope {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            schema: SCHEMA_VERSION,
            timestamp_unix,
            config: config.clone(),
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization") + "\n"
    }
}

#[derive(Debug, Serialize)]
pub struct RateJson {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub stderr: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl From<&RateEstimate> for RateJson {
    fn from(r: &RateEstimate) -> Self {
        RateJson {
            successes: r.successes,
            trials: r.trials,
            rate: r.rate,
            stderr: r.stderr,
            wilson_low: r.wilson_low,
            wilson_high: r.wilson_high,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ExperimentReportJson {
    pub experiment: String,
    pub strategy: String,
    pub trials: u64,
    pub register1_pass: u64,
    pub copy2_projection_pass: u64,
    pub joint_success: u64,
    pub register1_rate: RateJson,
    pub copy2_projection_rate_given_r1: RateJson,
    pub joint_rate: RateJson,
    pub run_agreement_rate_copy2: f64,
    pub rejected_branch_copy2_success: u64,
    pub beta_threshold: f64,
    pub agreement: String,
    pub rng_algorithm: String,
    pub digest_algorithm: String,
}

impl From<&ExperimentReport> for ExperimentReportJson {
    fn from(r: &ExperimentReport) -> Self {
        ExperimentReportJson {
            experiment: r.experiment.to_string(),
            strategy: r.strategy.clone(),
            trials: r.trials,
            register1_pass: r.register1_pass,
            copy2_projection_pass: r.copy2_projection_pass,
            joint_success: r.joint_success,
            register1_rate: (&r.register1_rate).into(),
            copy2_projection_rate_given_r1: (&r.copy2_projection_rate_given_r1).into(),
            joint_rate: (&r.joint_rate).into(),
            run_agreement_rate_copy2: r.run_agreement_rate_copy2,
            rejected_branch_copy2_success: r.rejected_branch_copy2_success,
            beta_threshold: r.config.beta_threshold,
            agreement: r.config.agreement.clone(),
            rng_algorithm: r.config.rng_algorithm.clone(),
            digest_algorithm: r.config.digest_algorithm.clone(),
        }
    }
}

pub const CSV_HEADER: &str = "experiment,strategy,trials,register1_pass,copy2_projection_pass,joint_success,register1_rate,register1_stderr,joint_rate,joint_stderr,run_agreement_rate_copy2,rejected_branch_copy2_success,seed";

/// One CSV summary row per strategy.
pub fn csv_row(r: &ExperimentReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.experiment,
        r.strategy,
        r.trials,
        r.register1_pass,
        r.copy2_projection_pass,
        r.joint_success,
        r.register1_rate.rate,
        r.register1_rate.stderr,
        r.joint_rate.rate,
        r.joint_rate.stderr,
        r.run_agreement_rate_copy2,
        r.rejected_branch_copy2_success,
        r.config.seed,
    )
}
