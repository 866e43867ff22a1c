//! Pirate strategies and the two lessor-security experiments
//! (finite-term with returned-copy Check, infinite-term with dual Run
//! agreement), producing statistical reports.
//!
//! Trials are independent: each derives its randomness from
//! `(master seed, trial index)` and builds a fresh protocol instance, so
//! aggregation is associative and order-independent.

use alloc::string::String;
use core::fmt;

use rand_core::RngCore;

use crate::bits::Bits;
use crate::circuits::{CircuitSampler, CncCircuit};
use crate::field::Subspace;
use crate::oracles::{qiho_eval, sho_obf, OracleError, OracleMode, SubspaceObfHandle};
use crate::rng::{substream, ChaCha12Rng};
use crate::scheme::{ClassicalPart, LeasedState, SchemeError, SecretKey, SslScheme};
use crate::sim::{
    conditional_second_register, partial_trace_first, qft, sample_projective, subspace_state,
    BipartiteState, DensityOperator, PureState, SimError,
};

#[allow(unused_imports)]
use num_traits::Float;

/// z-score of the 95% two-sided normal interval.
const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Scheme(SchemeError),
    Sim(SimError),
    Circuit(crate::circuits::CircuitError),
    /// Exhaustive agreement requested beyond the input budget.
    ExhaustiveBudget { n: usize },
    /// The strategy needs a capability the configuration lacks
    /// (for example the brute-force mauler outside toy mode).
    StrategyUnsupported(&'static str),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Scheme(e) => write!(f, "{}", e),
            HarnessError::Sim(e) => write!(f, "{}", e),
            HarnessError::Circuit(e) => write!(f, "{}", e),
            HarnessError::ExhaustiveBudget { n } => {
                write!(f, "exhaustive agreement needs n ≤ 8, got {}", n)
            }
            HarnessError::StrategyUnsupported(why) => write!(f, "strategy unsupported: {}", why),
        }
    }
}

impl From<SchemeError> for HarnessError {
    fn from(e: SchemeError) -> Self {
        HarnessError::Scheme(e)
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        HarnessError::Sim(e)
    }
}

impl From<crate::circuits::CircuitError> for HarnessError {
    fn from(e: crate::circuits::CircuitError) -> Self {
        HarnessError::Circuit(e)
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        HarnessError::Scheme(SchemeError::Oracle(e))
    }
}

// ---------------------------------------------------------------------------
// Rates and intervals
// ---------------------------------------------------------------------------

/// A binomial rate with its normal-approximation standard error and the
/// Wilson 95% interval (which stays well-behaved near 0 and 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub stderr: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl RateEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return RateEstimate {
                successes,
                trials,
                rate: 0.0,
                stderr: 0.0,
                wilson_low: 0.0,
                wilson_high: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let stderr = (p * (1.0 - p) / n).sqrt();
        let z = WILSON_Z;
        let denom = 1.0 + z * z / n;
        let center = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        RateEstimate {
            successes,
            trials,
            rate: p,
            stderr,
            wilson_low: (center - half).max(0.0),
            wilson_high: (center + half).min(1.0),
        }
    }
}

// ---------------------------------------------------------------------------
// Pirate strategies
// ---------------------------------------------------------------------------

/// Hook for caller-supplied strategies.
pub type PirateFn =
    fn(&mut SslScheme, LeasedState, &mut ChaCha12Rng) -> Result<PirateOutput, HarnessError>;

/// The named pirates. Each is a pure function of the CRS, a single leased
/// copy, and its randomness, producing a bipartite state and two classical
/// parts.
#[derive(Clone, Copy)]
pub enum PirateStrategy {
    /// Return the original; keep nothing.
    HonestReturn,
    /// Measure the quantum part in the computational basis and reprepare
    /// the observed basis state in both registers.
    MeasureReprepareDuplicate,
    /// Measure in the Fourier basis instead; both registers carry the
    /// inverse-transformed outcome state.
    FourierMeasureDuplicate,
    /// Return the original untouched, and back the second copy with a
    /// self-sampled subspace plus fresh membership obfuscations. Without an
    /// accepting input the pirate cannot prove the lease relation, so the
    /// stale proof rides along.
    ClassicalCopyFreshSubspace,
    /// Preimage-search the input-hiding commitment with a query budget; on
    /// a hit, rebuild the circuit and lease it honestly under a fresh key.
    BudgetBruteforceMauler { budget: u64 },
    Custom { name: &'static str, pirate: PirateFn },
}

impl PirateStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            PirateStrategy::HonestReturn => "honest_return",
            PirateStrategy::MeasureReprepareDuplicate => "measure_reprepare_duplicate",
            PirateStrategy::FourierMeasureDuplicate => "fourier_measure_duplicate",
            PirateStrategy::ClassicalCopyFreshSubspace => "classical_copy_fresh_subspace",
            PirateStrategy::BudgetBruteforceMauler { .. } => "budget_bruteforce_mauler",
            PirateStrategy::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for PirateStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PirateStrategy({})", self.name())
    }
}

/// What a pirate emits: one bipartite quantum state and the classical
/// parts of both copies (`None` marks a register the pirate never dressed
/// up as a lease).
#[derive(Debug, Clone)]
pub struct PirateOutput {
    pub sigma: BipartiteState,
    pub classical1: Option<ClassicalPart>,
    pub classical2: Option<ClassicalPart>,
}

/// Run a strategy on a consumed lease.
pub fn execute_strategy(
    strategy: PirateStrategy,
    scheme: &mut SslScheme,
    lease: LeasedState,
    rng: &mut ChaCha12Rng,
) -> Result<PirateOutput, HarnessError> {
    match strategy {
        PirateStrategy::HonestReturn => {
            let zero = PureState::basis_state(&crate::field::FieldVector::zero(scheme.params()))?;
            Ok(PirateOutput {
                sigma: BipartiteState::product(&lease.quantum, &zero)?,
                classical1: Some(lease.classical),
                classical2: None,
            })
        }
        PirateStrategy::MeasureReprepareDuplicate => {
            let observed = lease.quantum.measure_basis(rng);
            let reprepared = PureState::basis_state(&observed)?;
            Ok(PirateOutput {
                sigma: BipartiteState::product(&reprepared, &reprepared)?,
                classical1: Some(lease.classical.clone()),
                classical2: Some(lease.classical),
            })
        }
        PirateStrategy::FourierMeasureDuplicate => {
            let transformed = qft(&lease.quantum, false);
            let observed = transformed.measure_basis(rng);
            let reprepared = qft(&PureState::basis_state(&observed)?, true);
            Ok(PirateOutput {
                sigma: BipartiteState::product(&reprepared, &reprepared)?,
                classical1: Some(lease.classical.clone()),
                classical2: Some(lease.classical),
            })
        }
        PirateStrategy::ClassicalCopyFreshSubspace => {
            let own = Subspace::random(scheme.params(), scheme.params().lambda() / 2, rng)
                .map_err(SchemeError::Field)?;
            let (g, _) = sho_obf(&own, scheme.mode(), rng)?;
            let (g_perp, _) = sho_obf(&own.dual(), scheme.mode(), rng)?;
            let own_state = subspace_state(&own)?;
            let classical2 = ClassicalPart {
                g,
                g_perp,
                c_obf: lease.classical.c_obf.clone(),
                // The ideal NIZK refuses to prove without an accepting
                // input, so the pirate can only replay the old proof.
                proof: lease.classical.proof.clone(),
            };
            Ok(PirateOutput {
                sigma: BipartiteState::product(&lease.quantum, &own_state)?,
                classical1: Some(lease.classical),
                classical2: Some(classical2),
            })
        }
        PirateStrategy::BudgetBruteforceMauler { budget } => {
            let mauled = bruteforce_mauler(scheme, &lease, budget, rng)?;
            let (second_state, classical2) = match mauled.fresh {
                Some((_, fresh)) => (fresh.quantum, Some(fresh.classical)),
                None => (
                    PureState::basis_state(&crate::field::FieldVector::zero(scheme.params()))?,
                    None,
                ),
            };
            Ok(PirateOutput {
                sigma: BipartiteState::product(&lease.quantum, &second_state)?,
                classical1: Some(lease.classical),
                classical2,
            })
        }
        PirateStrategy::Custom { pirate, .. } => pirate(scheme, lease, rng),
    }
}

/// Outcome of the brute-force mauler.
#[derive(Debug)]
pub struct MaulerOutcome {
    pub found_input: Option<Bits>,
    pub guesses_used: u64,
    /// A fully honest second lease under the pirate's own key, when the
    /// preimage search succeeded.
    pub fresh: Option<(SecretKey, LeasedState)>,
}

/// Attempt up to `budget` digest-preimage guesses against the lease's
/// input-hiding handle; on success, rebuild the circuit from the clear
/// inner circuit plus the recovered accepting input and lease it honestly
/// under a self-generated key. Requires the toy oracle mode (ideal-mode
/// handles carry no commitment to attack).
pub fn bruteforce_mauler(
    scheme: &mut SslScheme,
    lease: &LeasedState,
    budget: u64,
    rng: &mut ChaCha12Rng,
) -> Result<MaulerOutcome, HarnessError> {
    let handle = &lease.classical.c_obf;
    if handle.salt().is_none() {
        return Err(HarnessError::StrategyUnsupported(
            "brute-force mauler needs toy-mode commitments",
        ));
    }
    let n = handle.n();
    let one = Bits::from_bits(alloc::vec![1]);

    let mut found = None;
    let mut guesses_used = 0u64;
    if n <= 24 && budget >= (1u64 << n) {
        for x in Bits::enumerate_all(n) {
            guesses_used += 1;
            let hit = match handle.output_len() {
                1 => qiho_eval(handle, &x)? == one,
                _ => !qiho_eval(handle, &x)?.is_zero(),
            };
            if hit {
                found = Some(x);
                break;
            }
        }
    } else {
        for _ in 0..budget {
            guesses_used += 1;
            let x = Bits::random(n, rng);
            let hit = match handle.output_len() {
                1 => qiho_eval(handle, &x)? == one,
                _ => !qiho_eval(handle, &x)?.is_zero(),
            };
            if hit {
                found = Some(x);
                break;
            }
        }
    }

    let Some(x_star) = found else {
        return Ok(MaulerOutcome { found_input: None, guesses_used, fresh: None });
    };

    // Rebuild the circuit: the inner circuit is in the clear and the lock
    // is whatever it maps the found input to.
    let lock = handle.inner().eval(&x_star)?;
    let msg = match handle.output_len() {
        1 => None,
        _ => Some(qiho_eval(handle, &x_star)?),
    };
    let rebuilt = CncCircuit::new(
        handle.inner().clone(),
        lock,
        msg,
        Some(crate::circuits::SearchTag::Custom { accepting_input: x_star.clone() }),
    )?;
    let fresh_sk = scheme.gen(rng)?;
    let fresh = scheme.lessor(&fresh_sk, &rebuilt, rng)?;
    Ok(MaulerOutcome { found_input: Some(x_star), guesses_used, fresh: Some((fresh_sk, fresh)) })
}

// ---------------------------------------------------------------------------
// Agreement estimation
// ---------------------------------------------------------------------------

/// How the per-input agreement quantifier is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgreementMode {
    /// Every input (n ≤ 8).
    Exhaustive,
    /// A sampled set of inputs with repeated runs; the estimate is the
    /// minimum Wilson lower bound.
    Sampled { inputs: u32, runs_per_input: u32 },
}

impl AgreementMode {
    pub fn name(&self) -> &'static str {
        match self {
            AgreementMode::Exhaustive => "exhaustive",
            AgreementMode::Sampled { .. } => "sampled",
        }
    }
}

/// The per-input Run-agreement quantifier
/// `min_x Pr[Run(copy, x) = C(x)]` for a copy held as a density operator
/// with a classical part. Exhaustive mode computes the Born factor
/// analytically; sampled mode Monte-Carlos fresh copies and returns the
/// minimum lower-confidence bound.
pub fn estimate_run_agreement(
    scheme: &SslScheme,
    classical: &ClassicalPart,
    quantum: &DensityOperator,
    circuit: &CncCircuit,
    mode: AgreementMode,
    rng: &mut ChaCha12Rng,
) -> Result<f64, HarnessError> {
    if !scheme.nizk().verify(&classical.statement(), &classical.proof) {
        return Ok(0.0);
    }
    let projection_prob = run_projection_probability(classical, quantum)?;
    let n = circuit.n();
    match mode {
        AgreementMode::Exhaustive => {
            if n > 8 {
                return Err(HarnessError::ExhaustiveBudget { n });
            }
            let mut min_agreement = f64::INFINITY;
            for x in Bits::enumerate_all(n) {
                let agree = qiho_eval(&classical.c_obf, &x)? == circuit.eval(&x)?;
                min_agreement = min_agreement.min(if agree { projection_prob } else { 0.0 });
            }
            Ok(min_agreement)
        }
        AgreementMode::Sampled { inputs, runs_per_input } => {
            let mut min_bound = f64::INFINITY;
            for _ in 0..inputs {
                let x = Bits::random(n, rng);
                let expected = circuit.eval(&x)?;
                let agree_no_projection = qiho_eval(&classical.c_obf, &x)? == expected;
                let mut hits = 0u64;
                for _ in 0..runs_per_input {
                    if sample_projective(projection_prob, rng) && agree_no_projection {
                        hits += 1;
                    }
                }
                min_bound =
                    min_bound.min(RateEstimate::from_counts(hits, runs_per_input as u64).wilson_low);
            }
            Ok(min_bound)
        }
    }
}

/// Born probability that Run's projection accepts the copy. The handle
/// pair of every named strategy obfuscates a genuine subspace and its
/// dual, so the composed measurement is the rank-one projector onto the
/// handle subspace state.
fn run_projection_probability(
    classical: &ClassicalPart,
    quantum: &DensityOperator,
) -> Result<f64, HarnessError> {
    let target = subspace_state(classical.g.sealed_subspace())?;
    Ok(quantum.expectation(&target)?.clamp(0.0, 1.0))
}

fn handles_are_matched(g: &SubspaceObfHandle, g_perp: &SubspaceObfHandle) -> bool {
    g.sealed_subspace().dual() == *g_perp.sealed_subspace()
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Shared experiment configuration; echoed into every report.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub params: crate::field::FieldParams,
    pub mode: OracleMode,
    pub sampler: CircuitSampler,
    pub trials: u64,
    pub seed: u64,
    /// The β threshold of the security definitions.
    pub beta_threshold: f64,
    pub agreement: AgreementMode,
}

/// Configuration echo embedded in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEcho {
    pub q: u8,
    pub lambda: usize,
    pub n: usize,
    pub mode: String,
    pub sampler: String,
    pub seed: u64,
    pub trials: u64,
    pub beta_threshold: f64,
    pub agreement: String,
    pub rng_algorithm: String,
    pub digest_algorithm: String,
}

impl ExperimentConfig {
    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            q: self.params.q(),
            lambda: self.params.lambda(),
            n: self.sampler.n,
            mode: String::from(self.mode.name()),
            sampler: String::from(self.sampler.kind.name()),
            seed: self.seed,
            trials: self.trials,
            beta_threshold: self.beta_threshold,
            agreement: String::from(self.agreement.name()),
            rng_algorithm: String::from(crate::rng::RNG_ALGORITHM),
            digest_algorithm: String::from(crate::toycrypto::DIGEST_ALGORITHM),
        }
    }
}

/// Monte Carlo estimates from one experiment. The accounting invariant
/// `joint_success ≤ copy2_projection_pass ≤ register1_pass ≤ trials` holds
/// by construction.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// "finite_term" or "infinite_term".
    pub experiment: &'static str,
    pub strategy: String,
    pub trials: u64,
    /// Finite term: Check passes on register 1. Infinite term: copy 1
    /// runs correctly on the sampled input.
    pub register1_pass: u64,
    /// Trials whose copy-2 projection also accepted (after register 1).
    pub copy2_projection_pass: u64,
    /// Trials passing register 1, the copy-2 projection, and the full
    /// agreement scan at the β threshold.
    pub joint_success: u64,
    pub register1_rate: RateEstimate,
    /// Copy-2 projection acceptance conditioned on register 1 passing.
    pub copy2_projection_rate_given_r1: RateEstimate,
    pub joint_rate: RateEstimate,
    /// Mean over register-1-passing trials of the analytic
    /// `min_x Pr[Run(Π₂(σ*), x) = C(x)]` — the estimated β for register 2.
    pub run_agreement_rate_copy2: f64,
    /// Copy-2 successes on the rejected branch of register 1, reported
    /// separately (never part of `joint_success`).
    pub rejected_branch_copy2_success: u64,
    pub config: ConfigEcho,
}

impl ExperimentReport {
    fn finish(&mut self) {
        self.register1_rate = RateEstimate::from_counts(self.register1_pass, self.trials);
        self.copy2_projection_rate_given_r1 =
            RateEstimate::from_counts(self.copy2_projection_pass, self.register1_pass);
        self.joint_rate = RateEstimate::from_counts(self.joint_success, self.trials);
        debug_assert!(self.joint_success <= self.copy2_projection_pass);
        debug_assert!(self.copy2_projection_pass <= self.register1_pass);
        debug_assert!(self.register1_pass <= self.trials);
    }
}

fn empty_report(
    experiment: &'static str,
    strategy: PirateStrategy,
    config: &ExperimentConfig,
) -> ExperimentReport {
    ExperimentReport {
        experiment,
        strategy: String::from(strategy.name()),
        trials: config.trials,
        register1_pass: 0,
        copy2_projection_pass: 0,
        joint_success: 0,
        register1_rate: RateEstimate::from_counts(0, 0),
        copy2_projection_rate_given_r1: RateEstimate::from_counts(0, 0),
        joint_rate: RateEstimate::from_counts(0, 0),
        run_agreement_rate_copy2: 0.0,
        rejected_branch_copy2_success: 0,
        config: config.echo(),
    }
}

/// One sampled copy-2 evaluation: projection accept plus exhaustive (or
/// sampled) functional agreement of the collapsed copy.
struct Copy2Outcome {
    projection_pass: bool,
    full_agreement: bool,
}

fn evaluate_copy2(
    scheme: &SslScheme,
    classical2: &ClassicalPart,
    rho2: &DensityOperator,
    circuit: &CncCircuit,
    agreement: AgreementMode,
    rng: &mut ChaCha12Rng,
) -> Result<Copy2Outcome, HarnessError> {
    if !scheme.nizk().verify(&classical2.statement(), &classical2.proof) {
        return Ok(Copy2Outcome { projection_pass: false, full_agreement: false });
    }
    debug_assert!(handles_are_matched(&classical2.g, &classical2.g_perp));
    let p = run_projection_probability(classical2, rho2)?;
    if !sample_projective(p, rng) {
        return Ok(Copy2Outcome { projection_pass: false, full_agreement: false });
    }
    // The projection collapsed the copy onto the handle subspace state;
    // from here on Run is deterministic classical evaluation.
    let n = circuit.n();
    let full_agreement = match agreement {
        AgreementMode::Exhaustive => {
            if n > 8 {
                return Err(HarnessError::ExhaustiveBudget { n });
            }
            let mut all = true;
            for x in Bits::enumerate_all(n) {
                if qiho_eval(&classical2.c_obf, &x)? != circuit.eval(&x)? {
                    all = false;
                    break;
                }
            }
            all
        }
        AgreementMode::Sampled { inputs, .. } => {
            let mut all = true;
            for _ in 0..inputs {
                let x = Bits::random(n, rng);
                if qiho_eval(&classical2.c_obf, &x)? != circuit.eval(&x)? {
                    all = false;
                    break;
                }
            }
            all
        }
    };
    Ok(Copy2Outcome { projection_pass: true, full_agreement })
}

/// The finite-term lessor security experiment: per trial, lease a sampled
/// circuit, run the pirate, apply Check to register 1, and — conditioned
/// on it passing — score the kept register through Run.
pub fn finite_term_experiment(
    strategy: PirateStrategy,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    let mut report = empty_report("finite_term", strategy, config);
    let mut agreement_sum = 0.0;

    for trial in 0..config.trials {
        let mut rng = substream(config.seed, trial);
        let mut scheme = SslScheme::setup(config.params, config.mode, &mut rng)?;
        let sk = scheme.gen(&mut rng)?;
        let sample = config.sampler.sample(&mut rng)?;
        let lease = scheme.lessor(&sk, &sample.circuit, &mut rng)?;
        let pirate = execute_strategy(strategy, &mut scheme, lease, &mut rng)?;

        // Check on register 1 (the classical part plays no role in Check).
        let conditional = conditional_second_register(&pirate.sigma, sk.subspace(), &mut rng)?;
        if conditional.accepted {
            report.register1_pass += 1;
        }

        let Some(classical2) = pirate.classical2.as_ref() else {
            continue; // nothing on register 2: the trial cannot jointly succeed
        };

        if !conditional.accepted {
            // Rejected-branch continuation, reported separately.
            let out = evaluate_copy2(
                &scheme,
                classical2,
                &conditional.post,
                &sample.circuit,
                config.agreement,
                &mut rng,
            )?;
            if out.projection_pass && out.full_agreement {
                report.rejected_branch_copy2_success += 1;
            }
            continue;
        }

        agreement_sum += estimate_run_agreement(
            &scheme,
            classical2,
            &conditional.post,
            &sample.circuit,
            config.agreement,
            &mut rng,
        )?;

        let out = evaluate_copy2(
            &scheme,
            classical2,
            &conditional.post,
            &sample.circuit,
            config.agreement,
            &mut rng,
        )?;
        if out.projection_pass {
            report.copy2_projection_pass += 1;
            // After the collapse the per-input agreement is exact, so the
            // β quantifier reduces to the full-agreement scan.
            if out.full_agreement && config.beta_threshold <= 1.0 {
                report.joint_success += 1;
            }
        }
    }

    // Register-1 passes without a usable second register contribute zero
    // agreement, which the division below accounts for.
    if report.register1_pass > 0 {
        report.run_agreement_rate_copy2 = agreement_sum / report.register1_pass as f64;
    }
    report.finish();
    Ok(report)
}

/// The infinite-term experiment: run copy 1 on a sampled input, then test
/// Run agreement of the state left on register 2.
pub fn infinite_term_experiment(
    strategy: PirateStrategy,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    let mut report = empty_report("infinite_term", strategy, config);
    let mut agreement_sum = 0.0;

    for trial in 0..config.trials {
        let mut rng = substream(config.seed, trial);
        let mut scheme = SslScheme::setup(config.params, config.mode, &mut rng)?;
        let sk = scheme.gen(&mut rng)?;
        let sample = config.sampler.sample(&mut rng)?;
        let lease = scheme.lessor(&sk, &sample.circuit, &mut rng)?;
        let pirate = execute_strategy(strategy, &mut scheme, lease, &mut rng)?;

        let (Some(classical1), Some(classical2)) = (&pirate.classical1, &pirate.classical2) else {
            continue;
        };

        // Copy 1 runs on a sampled input: proof check, the projection on
        // register 1 (this is the channel the definition conditions on),
        // then the classical evaluation.
        let x = Bits::random(sample.circuit.n(), &mut rng);
        if !scheme.nizk().verify(&classical1.statement(), &classical1.proof) {
            continue;
        }
        let conditional =
            conditional_second_register(&pirate.sigma, classical1.g.sealed_subspace(), &mut rng)?;
        let copy1_correct = conditional.accepted
            && qiho_eval(&classical1.c_obf, &x)? == sample.circuit.eval(&x)?;
        if copy1_correct {
            report.register1_pass += 1;
        }

        if !copy1_correct {
            let out = evaluate_copy2(
                &scheme,
                classical2,
                &conditional.post,
                &sample.circuit,
                config.agreement,
                &mut rng,
            )?;
            if out.projection_pass && out.full_agreement {
                report.rejected_branch_copy2_success += 1;
            }
            continue;
        }

        agreement_sum += estimate_run_agreement(
            &scheme,
            classical2,
            &conditional.post,
            &sample.circuit,
            config.agreement,
            &mut rng,
        )?;

        let out = evaluate_copy2(
            &scheme,
            classical2,
            &conditional.post,
            &sample.circuit,
            config.agreement,
            &mut rng,
        )?;
        if out.projection_pass {
            report.copy2_projection_pass += 1;
            if out.full_agreement {
                report.joint_success += 1;
            }
        }
    }

    if report.register1_pass > 0 {
        report.run_agreement_rate_copy2 = agreement_sum / report.register1_pass as f64;
    }
    report.finish();
    Ok(report)
}

/// Direct two-register reference path for the conditional-state identity:
/// sample the register-1 projection on the full bipartite state, then
/// sample the register-2 projection on the post-measurement reduced state.
/// Returns (register-1 accepted, register-2 accepted).
pub fn direct_two_register_sample(
    sigma: &BipartiteState,
    a1: &Subspace,
    a2: &Subspace,
    rng: &mut impl RngCore,
) -> Result<(bool, bool), HarnessError> {
    let (p1, reg2_state) = crate::sim::project_first_register(sigma, a1)?;
    if !sample_projective(p1, rng) {
        return Ok((false, false));
    }
    let reg2 = reg2_state.expect("nonzero branch");
    let target = subspace_state(a2)?;
    let p2 = target.inner_product(&reg2)?.norm_sqr();
    Ok((true, sample_projective(p2, rng)))
}

/// The same statistic through the analytic conditional path.
pub fn conditional_two_register_sample(
    sigma: &BipartiteState,
    a1: &Subspace,
    a2: &Subspace,
    rng: &mut impl RngCore,
) -> Result<(bool, bool), HarnessError> {
    let conditional = conditional_second_register(sigma, a1, rng)?;
    if !conditional.accepted {
        return Ok((false, false));
    }
    let target = subspace_state(a2)?;
    let p2 = conditional.post.expectation(&target)?.clamp(0.0, 1.0);
    Ok((true, sample_projective(p2, rng)))
}

/// Reduced state on register 2 regardless of measurement (used by tests).
pub fn reduced_second_register(sigma: &BipartiteState) -> DensityOperator {
    partial_trace_first(sigma)
}
