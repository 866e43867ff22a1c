//! The acceptance suite: one test per criterion, each printing a pass/fail
//! line and enforcing its stated tolerance and runtime budget. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use qlease_cli::commands::collect_experiment_reports;
use qlease_cli::config::{Overrides, RunConfig};
use qlease_core::bits::Bits;
use qlease_core::circuits::{is_functionally_equal, CircuitSampler, SamplerKind};
use qlease_core::dequant::{
    attack_extract, enable_family_leasing, family_check, family_lessor, family_run,
    oracle_learner_baseline, ssl_breaking_pirate, DequantContext, DirectProgram,
    QuantumImplementation,
};
use qlease_core::field::{FieldParams, Subspace};
use qlease_core::harness::{
    finite_term_experiment, AgreementMode, ExperimentConfig, PirateStrategy,
};
use qlease_core::oracles::OracleMode;
use qlease_core::rng::{substream, uniform_index};
use qlease_core::scheme::SslScheme;
use qlease_core::sim::{
    gentle_measurement_bound_check, projector_pipeline_unnormalized, qft, subspace_state,
    trace_distance, DensityOperator, PureState,
};

const TOL: f64 = 1e-9;
const SEED: u64 = 0xACCE97;

fn params(q: u8, lambda: usize) -> FieldParams {
    FieldParams::new(q, lambda).unwrap()
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "acceptance {}: {} ({})",
        criterion,
        if passed { "PASS" } else { "FAIL" },
        detail
    );
    assert!(passed, "acceptance {} failed: {}", criterion, detail);
}

#[test]
fn criterion_01_fourier_dual_identity() {
    let start = Instant::now();
    let mut max_error: f64 = 0.0;
    for (stream, (q, lambda)) in [(2u8, 4usize), (2, 8), (3, 4), (5, 3)].into_iter().enumerate() {
        let p = params(q, lambda);
        let mut rng = substream(SEED, stream as u64);
        for _ in 0..50 {
            let dim = uniform_index(&mut rng, lambda + 1);
            let a = Subspace::random(p, dim, &mut rng).unwrap();
            let lhs = qft(&subspace_state(&a).unwrap(), false);
            let rhs = subspace_state(&a.dual()).unwrap();
            max_error = max_error.max(lhs.l2_distance(&rhs).unwrap());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 1 (fourier dual)",
        max_error <= TOL && elapsed < 10.0,
        &format!("max ‖FT|A⟩−|A^⊥⟩‖₂ = {:.3e}, {:.2}s", max_error, elapsed),
    );
}

#[test]
fn criterion_02_projector_identity() {
    let mut max_error: f64 = 0.0;
    let mut cases = 0;
    for (stream, (q, lambda)) in [(2u8, 4usize), (2, 8), (3, 4), (5, 3)].into_iter().enumerate() {
        let p = params(q, lambda);
        let mut rng = substream(SEED, 10 + stream as u64);
        // 50 (A, ψ) pairs per parameter set.
        for _ in 0..50 {
            let dim = uniform_index(&mut rng, lambda + 1);
            let a = Subspace::random(p, dim, &mut rng).unwrap();
            let psi = PureState::random(p, &mut rng).unwrap();
            let target = subspace_state(&a).unwrap();
            let overlap = target.inner_product(&psi).unwrap();
            for (out, t) in projector_pipeline_unnormalized(&psi, &a)
                .iter()
                .zip(target.amplitudes())
            {
                max_error = max_error.max((out - overlap * t).norm());
            }
            cases += 1;
        }
    }
    report(
        "criterion 2 (projector identity)",
        max_error <= TOL,
        &format!("{} pairs, max componentwise error {:.3e}", cases, max_error),
    );
}

#[test]
fn criterion_03_protocol_correctness() {
    let start = Instant::now();
    let p = params(2, 6);
    let mut rng = substream(SEED, 20);
    let kinds =
        [SamplerKind::Point, SamplerKind::Wildcard, SamplerKind::Affine { q: 2 }];
    let mut all_ok = true;
    for i in 0..20 {
        let sampler = CircuitSampler::new(kinds[i % kinds.len()], 8);
        let sample = sampler.sample(&mut rng).unwrap();
        let mut scheme = SslScheme::setup(p, OracleMode::Ideal, &mut rng).unwrap();
        let sk = scheme.gen(&mut rng).unwrap();
        let mut lease = scheme.lessor(&sk, &sample.circuit, &mut rng).unwrap();
        for x in Bits::enumerate_all(8) {
            let out = scheme.run(&mut lease, &x, &mut rng).unwrap();
            if out.output.as_ref() != Some(&sample.circuit.eval(&x).unwrap()) {
                all_ok = false;
            }
        }
        if scheme.check(&sk, &mut lease, &mut rng).unwrap() != 1 {
            all_ok = false;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 3 (protocol correctness)",
        all_ok && elapsed < 60.0,
        &format!("20 circuits × 256 inputs, Check always 1, {:.2}s", elapsed),
    );
}

#[test]
fn criterion_04_reusability() {
    let p = params(2, 6);
    let mut rng = substream(SEED, 30);
    let mut scheme = SslScheme::setup(p, OracleMode::Ideal, &mut rng).unwrap();
    let sk = scheme.gen(&mut rng).unwrap();
    let circuit = CircuitSampler::new(SamplerKind::Point, 6).sample(&mut rng).unwrap().circuit;
    let mut lease = scheme.lessor(&sk, &circuit, &mut rng).unwrap();
    let target = DensityOperator::from_pure(&subspace_state(sk.subspace()).unwrap());

    let mut max_distance: f64 = 0.0;
    for i in 0..100u64 {
        let x = Bits::from_u64(i % 64, 6);
        let (out, _gentle) = scheme.run_reusable(&mut lease, &x, &mut rng).unwrap();
        assert!(out.output.is_some());
        let now = DensityOperator::from_pure(&lease.quantum);
        max_distance = max_distance.max(trace_distance(&now, &target).unwrap());
    }
    report(
        "criterion 4 (reusability)",
        max_distance <= TOL,
        &format!("100 sequential runs, max trace distance {:.3e}", max_distance),
    );
}

#[test]
fn criterion_05_gentle_measurement() {
    let p = params(2, 6);
    let mut rng = substream(SEED, 40);
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let s = PureState::random(p, &mut rng).unwrap();
        let t = PureState::random(p, &mut rng).unwrap();
        // The check itself errors if the bound is violated.
        let check = gentle_measurement_bound_check(&s, &t).unwrap();
        worst_excess = worst_excess.max(check.trace_distance - check.bound);
    }
    report(
        "criterion 5 (gentle measurement)",
        worst_excess <= TOL,
        &format!("100 states, worst (distance − √ε) = {:.3e}", worst_excess),
    );
}

#[test]
fn criterion_06_no_cloning_quantitation() {
    let start = Instant::now();
    let trials = 10_000u64;
    let config = ExperimentConfig {
        params: params(2, 6),
        mode: OracleMode::Ideal,
        sampler: CircuitSampler::new(SamplerKind::Point, 6),
        trials,
        seed: SEED,
        beta_threshold: 0.9,
        agreement: AgreementMode::Exhaustive,
    };
    let r = finite_term_experiment(PirateStrategy::MeasureReprepareDuplicate, &config).unwrap();

    let p = 0.125f64;
    let se_check = (p * (1.0 - p) / trials as f64).sqrt();
    let check_ok = (r.register1_rate.rate - p).abs() <= 3.0 * se_check;

    let denom = r.register1_pass.max(1) as f64;
    let se_copy2 = (p * (1.0 - p) / denom).sqrt();
    let copy2_ok = (r.copy2_projection_rate_given_r1.rate - p).abs() <= 3.0 * se_copy2;

    let joint = p * p;
    let se_joint = (joint * (1.0 - joint) / trials as f64).sqrt();
    let joint_ok = (r.joint_rate.rate - joint).abs() <= 3.0 * se_joint;

    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 6 (no-cloning quantitation)",
        check_ok && copy2_ok && joint_ok && elapsed < 120.0,
        &format!(
            "check {:.4} (±{:.4}), copy2 {:.4} (±{:.4}), joint {:.4} vs product {:.4}, {:.1}s",
            r.register1_rate.rate,
            3.0 * se_check,
            r.copy2_projection_rate_given_r1.rate,
            3.0 * se_copy2,
            r.joint_rate.rate,
            joint,
            elapsed
        ),
    );
}

#[test]
fn criterion_07_mauler_exclusion() {
    // Classical-copy pirate in ideal-NIZK mode: joint success 0 over 10³.
    let config = ExperimentConfig {
        params: params(2, 6),
        mode: OracleMode::Ideal,
        sampler: CircuitSampler::new(SamplerKind::Point, 6),
        trials: 1000,
        seed: SEED + 1,
        beta_threshold: 0.9,
        agreement: AgreementMode::Exhaustive,
    };
    let fresh = finite_term_experiment(PirateStrategy::ClassicalCopyFreshSubspace, &config).unwrap();

    // Budgeted mauler at B = 2^10 against n = 32: 0 successes in 100 trials.
    let low_budget = ExperimentConfig {
        sampler: CircuitSampler::new(SamplerKind::Point, 32),
        mode: OracleMode::Toy,
        trials: 100,
        agreement: AgreementMode::Sampled { inputs: 16, runs_per_input: 8 },
        ..config
    };
    let low = finite_term_experiment(
        PirateStrategy::BudgetBruteforceMauler { budget: 1 << 10 },
        &low_budget,
    )
    .unwrap();

    // B ≥ 2^n at n = 8: the reduction's contrapositive — every trial wins.
    let full_budget = ExperimentConfig {
        sampler: CircuitSampler::new(SamplerKind::Point, 8),
        mode: OracleMode::Toy,
        trials: 100,
        agreement: AgreementMode::Exhaustive,
        ..config
    };
    let full = finite_term_experiment(
        PirateStrategy::BudgetBruteforceMauler { budget: 1 << 8 },
        &full_budget,
    )
    .unwrap();

    report(
        "criterion 7 (mauler exclusion)",
        fresh.joint_success == 0 && low.joint_success == 0 && full.joint_success == full.trials,
        &format!(
            "fresh-subspace {}/1000, budget 2^10 vs n=32 {}/100, budget 2^8 vs n=8 {}/100",
            fresh.joint_success, low.joint_success, full.joint_success
        ),
    );
}

#[test]
fn criterion_08_dequantumization_attack() {
    let start = Instant::now();
    let mut rng = substream(SEED, 50);
    let mut extractions_ok = 0;
    let mut log_ok = true;
    for trial in 0..100u64 {
        let mut ctx = DequantContext::new();
        let circuit = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
        let program = DirectProgram { circuit: &circuit };
        let mut implementation = QuantumImplementation::new(program, substream(SEED, 60 + trial));
        let extraction = attack_extract(&mut implementation, &ctx, &mut rng).unwrap();

        let componentwise = extraction.circuit == circuit;
        let functional = is_functionally_equal(
            |x: &Bits| circuit.eval(x).unwrap(),
            |x: &Bits| extraction.circuit.eval(x).unwrap(),
            6,
        )
        .unwrap();
        if componentwise && functional {
            extractions_ok += 1;
        }
        let log = implementation.log();
        log_ok &= log.only_zero_direct_queries()
            && log.direct_queries().iter().all(|x| x != circuit.a());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "criterion 8 (de-quantumization attack)",
        extractions_ok == 100 && log_ok && elapsed < 60.0,
        &format!("{}/100 exact extractions, access log clean, {:.2}s", extractions_ok, elapsed),
    );
}

#[test]
fn criterion_09_ssl_breaking_pirate() {
    let p = params(2, 6);
    let mut rng = substream(SEED, 70);
    let mut scheme = SslScheme::setup(p, OracleMode::Ideal, &mut rng).unwrap();
    enable_family_leasing(&mut scheme);
    let mut ctx = DequantContext::new();

    let mut successes = 0;
    let mut max_disturbance: f64 = 0.0;
    for _ in 0..50 {
        let circuit = ctx.sample_family(6, OracleMode::Ideal, &mut rng).unwrap();
        let lessor_sk = scheme.gen(&mut rng).unwrap();
        let mut lease = family_lessor(&mut scheme, &lessor_sk, &circuit, &mut rng).unwrap();
        let pre = DensityOperator::from_pure(&lease.quantum);

        let broken = ssl_breaking_pirate(&mut scheme, &ctx, &mut lease, &mut rng).unwrap();

        let disturbance =
            trace_distance(&pre, &DensityOperator::from_pure(&lease.quantum)).unwrap();
        max_disturbance = max_disturbance.max(disturbance);
        let original_check =
            family_check(&scheme, &lessor_sk, &mut lease, &mut rng).unwrap() == 1;

        let mut fresh = broken.fresh_lease;
        let mut fresh_runs = true;
        for x in Bits::enumerate_all(6) {
            let out = family_run(&scheme, &mut fresh, &x, &mut rng).unwrap();
            if out.output.as_ref() != Some(&circuit.eval(&x).unwrap()) {
                fresh_runs = false;
            }
        }
        if original_check && fresh_runs && disturbance <= TOL {
            successes += 1;
        }
    }
    report(
        "criterion 9 (lease-breaking pirate)",
        successes == 50,
        &format!("{}/50 end-to-end breaks, max disturbance {:.3e}", successes, max_disturbance),
    );
}

#[test]
fn criterion_10_oracle_learner_baseline() {
    let mut rng = substream(SEED, 80);
    let mut ctx = DequantContext::new();
    let mut successes = 0;
    for _ in 0..100 {
        let circuit = ctx.sample_family(32, OracleMode::Ideal, &mut rng).unwrap();
        if oracle_learner_baseline(&circuit, 1 << 10, None, &mut rng).unwrap().is_some() {
            successes += 1;
        }
    }
    report(
        "criterion 10 (oracle-learner baseline)",
        successes == 0,
        &format!("{}/100 learner successes at B = 2^10, λ_bits = 32", successes),
    );
}

#[test]
fn criterion_11_report_determinism() {
    let flags = Overrides {
        trials: Some(200),
        seed: Some(777),
        strategy: Some(vec![
            "measure_reprepare_duplicate".into(),
            "classical_copy_fresh_subspace".into(),
        ]),
        experiment: Some("both".into()),
        ..Default::default()
    };
    let config = RunConfig::resolve(None, &flags).unwrap();

    let render = |cfg: &RunConfig| {
        let reports = collect_experiment_reports(cfg).unwrap();
        let payload: Vec<qlease_cli::report::ExperimentReportJson> =
            reports.iter().map(Into::into).collect();
        qlease_cli::report::ReportEnvelope::new(cfg, payload, false).to_json()
    };
    let first = render(&config);
    let second = render(&config);
    report(
        "criterion 11 (report determinism)",
        first == second && !first.is_empty(),
        &format!("two renders of {} bytes are byte-identical", first.len()),
    );
}
