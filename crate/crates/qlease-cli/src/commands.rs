//! Implementations of the CLI verbs: the lease lifecycle, the security
//! experiments, the de-quantumization attack demo, and the self-test.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use qlease_core::bits::Bits;
use qlease_core::dequant::{
    attack_extract, enable_family_leasing, family_check, family_lessor, family_run,
    DequantContext, DirectProgram, FamilyLeaseProgram, QuantumImplementation,
};
use qlease_core::harness::{
    finite_term_experiment, infinite_term_experiment, ExperimentConfig, ExperimentReport,
    PirateStrategy,
};
use qlease_core::rng::{root_stream, substream};
use qlease_core::scheme::SslScheme;
use qlease_core::sim::{trace_distance, DensityOperator};

use crate::config::RunConfig;
use crate::formats::{
    bits_from_binary, load_circuit, load_lease_bundle, load_lessor, write_lease_bundle, write_state,
};
use crate::report::{csv_row, ExperimentReportJson, ReportEnvelope, CSV_HEADER};
use crate::selftest::run_selftest;

/// `selftest`: the mathematical identity suites; exit 0 iff all pass.
pub fn cmd_selftest(seed: u64, tolerance: f64) -> Result<i32> {
    let outcome = run_selftest(seed, tolerance);
    for suite in &outcome.suites {
        println!(
            "{:<28} {:>4} cases  max error {:>12.3e}  tolerance {:>8.1e}  {}",
            suite.name,
            suite.cases,
            suite.max_error,
            outcome.tolerance,
            if suite.passed { "pass" } else { "FAIL" }
        );
    }
    Ok(if outcome.all_passed() { 0 } else { 1 })
}

/// `lease`: read a circuit file, lease it, and write the bundle.
pub fn cmd_lease(config: &RunConfig, circuit_path: &Path, out_dir: &Path) -> Result<i32> {
    let circuit = load_circuit(circuit_path)?;
    let params = config.field_params()?;
    let mode = config.oracle_mode()?;
    let mut rng = root_stream(config.seed);
    let mut scheme =
        SslScheme::setup(params, mode, &mut rng).map_err(|e| anyhow!("setup failed: {}", e))?;
    let sk = scheme.gen(&mut rng).map_err(|e| anyhow!("gen failed: {}", e))?;
    let lease = scheme
        .lessor(&sk, &circuit, &mut rng)
        .map_err(|e| anyhow!("lessor failed: {}", e))?;
    write_lease_bundle(out_dir, &scheme, &sk, &lease, config.seed)?;
    println!(
        "leased circuit {} under q={} lambda={} mode={} -> {}",
        circuit_path.display(),
        config.q,
        config.lambda,
        config.mode,
        out_dir.display()
    );
    Ok(0)
}

/// `run`: evaluate the leased program on an input; prints the output bits
/// or ⊥ and rewrites the post-measurement state.
pub fn cmd_run(lease_dir: &Path, input: &str, seed: u64) -> Result<i32> {
    let mut bundle = load_lease_bundle(lease_dir)?;
    let x = bits_from_binary(input)?;
    let expected = bundle.lease.classical.c_obf.n();
    if x.len() != expected {
        bail!("input has {} bits, the leased circuit takes {}", x.len(), expected);
    }
    let mut rng = substream(seed, 0x40);
    let outcome = bundle
        .scheme
        .run(&mut bundle.lease, &x, &mut rng)
        .map_err(|e| anyhow!("run failed: {}", e))?;
    write_state(&bundle.state_path, &bundle.lease.quantum)?;
    match outcome.output {
        Some(bits) => println!("{}", bits.to_binary_string()),
        None => println!("⊥"),
    }
    Ok(0)
}

/// `check`: the lessor's projective verification; prints 0/1 and rewrites
/// the post-measurement state.
pub fn cmd_check(lease_dir: &Path, seed: u64) -> Result<i32> {
    let mut bundle = load_lease_bundle(lease_dir)?;
    let (sk, canonical) = load_lessor(lease_dir)?;
    if !canonical {
        eprintln!("warning: lessor key basis was not in canonical form; re-canonicalized");
    }
    let mut rng = substream(seed, 0x41);
    let bit = bundle
        .scheme
        .check(&sk, &mut bundle.lease, &mut rng)
        .map_err(|e| anyhow!("check failed: {}", e))?;
    write_state(&bundle.state_path, &bundle.lease.quantum)?;
    println!("{}", bit);
    Ok(0)
}

fn parse_strategy(spec: &str) -> Result<PirateStrategy> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    Ok(match name {
        "honest_return" => PirateStrategy::HonestReturn,
        "measure_reprepare_duplicate" => PirateStrategy::MeasureReprepareDuplicate,
        "fourier_measure_duplicate" => PirateStrategy::FourierMeasureDuplicate,
        "classical_copy_fresh_subspace" => PirateStrategy::ClassicalCopyFreshSubspace,
        "budget_bruteforce_mauler" => {
            let budget = match arg {
                Some(a) => a.parse::<u64>().context("mauler budget must be an integer")?,
                None => 1 << 10,
            };
            PirateStrategy::BudgetBruteforceMauler { budget }
        }
        other => bail!(
            "unknown strategy {} (expected honest_return, measure_reprepare_duplicate, \
             fourier_measure_duplicate, classical_copy_fresh_subspace, or \
             budget_bruteforce_mauler[:budget])",
            other
        ),
    })
}

/// Build all experiment reports requested by the configuration.
pub fn collect_experiment_reports(config: &RunConfig) -> Result<Vec<ExperimentReport>> {
    let experiment_config = ExperimentConfig {
        params: config.field_params()?,
        mode: config.oracle_mode()?,
        sampler: config.circuit_sampler()?,
        trials: config.trials,
        seed: config.seed,
        beta_threshold: config.beta,
        agreement: config.agreement_mode(),
    };
    let mut reports = Vec::new();
    for spec in &config.strategy {
        let strategy = parse_strategy(spec)?;
        if matches!(config.experiment.as_str(), "finite" | "both") {
            reports.push(
                finite_term_experiment(strategy, &experiment_config)
                    .map_err(|e| anyhow!("finite-term experiment failed: {}", e))?,
            );
        }
        if matches!(config.experiment.as_str(), "infinite" | "both") {
            reports.push(
                infinite_term_experiment(strategy, &experiment_config)
                    .map_err(|e| anyhow!("infinite-term experiment failed: {}", e))?,
            );
        }
    }
    Ok(reports)
}

/// `experiment`: run the configured strategies and write the report
/// envelope (JSON, optionally with a CSV summary).
pub fn cmd_experiment(
    config: &RunConfig,
    out_dir: &Path,
    format: &str,
    stamp: bool,
) -> Result<i32> {
    let reports = collect_experiment_reports(config)?;
    std::fs::create_dir_all(out_dir)?;

    let payload: Vec<ExperimentReportJson> = reports.iter().map(Into::into).collect();
    let envelope = ReportEnvelope::new(config, payload, stamp);
    let json_path = out_dir.join("experiment.json");
    std::fs::write(&json_path, envelope.to_json())?;
    println!("wrote {}", json_path.display());

    if format == "csv" || format == "both" {
        let mut csv = String::from(CSV_HEADER);
        csv.push('\n');
        for report in &reports {
            csv.push_str(&csv_row(report));
            csv.push('\n');
        }
        let csv_path = out_dir.join("experiment.csv");
        std::fs::write(&csv_path, csv)?;
        println!("wrote {}", csv_path.display());
    }

    for report in &reports {
        println!(
            "{} {}: trials {}  register1 {}  copy2 {}  joint {}  beta-hat {:.4}",
            report.experiment,
            report.strategy,
            report.trials,
            report.register1_pass,
            report.copy2_projection_pass,
            report.joint_success,
            report.run_agreement_rate_copy2,
        );
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
pub struct AttackTrace {
    pub trial: u64,
    pub lambda_bits: usize,
    pub queries_direct: Vec<String>,
    pub homomorphic_evals: usize,
    /// Payloads redacted: only framing metadata of the two ciphertexts.
    pub ct1: CiphertextMeta,
    pub ct2_msg_len: usize,
    pub componentwise_equal: bool,
    pub functional_equal: bool,
    pub original_trace_distance: f64,
    pub original_check_pass: bool,
    pub fresh_runs_all_inputs: bool,
    pub fresh_check_pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CiphertextMeta {
    pub msg_len: usize,
    pub nonce: u64,
}

/// `attack`: the de-quantumization demo. Leases family circuits, runs the
/// pirate end to end, and emits a JSON trace with an equality verdict per
/// trial. Exit 1 if any verdict fails.
pub fn cmd_attack(config: &RunConfig, out_dir: &Path, stamp: bool) -> Result<i32> {
    let params = config.field_params()?;
    let mode = config.oracle_mode()?;
    if config.n > 16 {
        bail!("attack demo needs n ≤ 16 for the exhaustive equality scan");
    }

    let mut traces = Vec::new();
    let mut all_ok = true;
    for trial in 0..config.trials.max(1) {
        let mut rng = substream(config.seed, 0x1000 + trial);
        let mut scheme =
            SslScheme::setup(params, mode, &mut rng).map_err(|e| anyhow!("{}", e))?;
        enable_family_leasing(&mut scheme);
        let mut ctx = DequantContext::new();
        let circuit =
            ctx.sample_family(config.n, mode, &mut rng).map_err(|e| anyhow!("{}", e))?;
        let lessor_sk = scheme.gen(&mut rng).map_err(|e| anyhow!("{}", e))?;
        let mut lease = family_lessor(&mut scheme, &lessor_sk, &circuit, &mut rng)
            .map_err(|e| anyhow!("{}", e))?;
        let pre = DensityOperator::from_pure(&lease.quantum);

        // Extraction through the lease's Run interface.
        let (extraction, log) = {
            let program = FamilyLeaseProgram {
                scheme: &scheme,
                lease: &mut lease,
                rng: substream(config.seed, 0x2000 + trial),
            };
            let mut implementation =
                QuantumImplementation::new(program, substream(config.seed, 0x3000 + trial));
            let extraction = attack_extract(&mut implementation, &ctx, &mut rng)
                .map_err(|e| anyhow!("extraction failed: {}", e))?;
            (extraction, implementation.log().clone())
        };

        let componentwise_equal = extraction.circuit == circuit;
        let functional_equal = qlease_core::circuits::is_functionally_equal(
            |x: &Bits| circuit.eval(x).unwrap(),
            |x: &Bits| extraction.circuit.eval(x).unwrap(),
            config.n,
        )
        .map_err(|e| anyhow!("{}", e))?;

        let post = DensityOperator::from_pure(&lease.quantum);
        let original_trace_distance =
            trace_distance(&pre, &post).map_err(|e| anyhow!("{}", e))?;
        let original_check_pass =
            family_check(&scheme, &lessor_sk, &mut lease, &mut rng).map_err(|e| anyhow!("{}", e))? == 1;

        // The pirate's fresh copy.
        let fresh_sk = scheme.gen(&mut rng).map_err(|e| anyhow!("{}", e))?;
        let mut fresh = family_lessor(&mut scheme, &fresh_sk, &extraction.circuit, &mut rng)
            .map_err(|e| anyhow!("{}", e))?;
        let mut fresh_runs_all_inputs = true;
        for x in Bits::enumerate_all(config.n) {
            let out = family_run(&scheme, &mut fresh, &x, &mut rng).map_err(|e| anyhow!("{}", e))?;
            if out.output.as_ref() != Some(&circuit.eval(&x).map_err(|e| anyhow!("{}", e))?) {
                fresh_runs_all_inputs = false;
                break;
            }
        }
        let fresh_check_pass =
            family_check(&scheme, &fresh_sk, &mut fresh, &mut rng).map_err(|e| anyhow!("{}", e))? == 1;

        let ct1_bits = circuit.eval(&Bits::zeros(config.n)).map_err(|e| anyhow!("{}", e))?;
        let ct1_sealed = ct1_bits.slice(0, qlease_core::dequant::ToyCiphertext::bit_len(config.n));
        let trace = AttackTrace {
            trial,
            lambda_bits: config.n,
            queries_direct: log.direct_queries().iter().map(Bits::to_binary_string).collect(),
            homomorphic_evals: log.homomorphic_evals(),
            ct1: CiphertextMeta {
                msg_len: config.n,
                nonce: qlease_core::toycrypto::sealed_nonce(&ct1_sealed),
            },
            ct2_msg_len: circuit.m(),
            componentwise_equal,
            functional_equal,
            original_trace_distance,
            original_check_pass,
            fresh_runs_all_inputs,
            fresh_check_pass,
        };
        all_ok &= componentwise_equal
            && functional_equal
            && original_check_pass
            && fresh_runs_all_inputs
            && fresh_check_pass
            && original_trace_distance <= 1e-9
            && log.only_zero_direct_queries();
        traces.push(trace);
    }

    std::fs::create_dir_all(out_dir)?;
    let envelope = ReportEnvelope::new(config, traces, stamp);
    let path = out_dir.join("attack.json");
    std::fs::write(&path, envelope.to_json())?;
    println!("wrote {}", path.display());
    println!("attack verdict: {}", if all_ok { "all trials succeeded" } else { "FAILED" });
    Ok(if all_ok { 0 } else { 1 })
}

/// Pure-extraction variant used by tests: no protocol in the loop.
pub fn attack_direct_once(seed: u64, lambda_bits: usize) -> Result<bool> {
    let mut rng = root_stream(seed);
    let mut ctx = DequantContext::new();
    let circuit = ctx
        .sample_family(lambda_bits, qlease_core::oracles::OracleMode::Ideal, &mut rng)
        .map_err(|e| anyhow!("{}", e))?;
    let program = DirectProgram { circuit: &circuit };
    let mut implementation = QuantumImplementation::new(program, substream(seed, 1));
    let extraction =
        attack_extract(&mut implementation, &ctx, &mut rng).map_err(|e| anyhow!("{}", e))?;
    Ok(extraction.circuit == circuit)
}

/// Resolve the output directory, defaulting next to the current dir.
pub fn resolve_out_dir(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from(default_name))
}
