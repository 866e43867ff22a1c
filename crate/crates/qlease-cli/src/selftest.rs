//! The mathematical identity suites behind `qlease selftest`: Fourier-dual,
//! projector identity, gentle-measurement bound, dual dimensions, and a
//! trace-distance cross-check. Each suite reports its worst observed error
//! against the requested tolerance.

use qlease_core::field::{FieldParams, Subspace};
use qlease_core::rng::substream;
use qlease_core::sim::{
    gentle_measurement_bound_check, projector_pipeline_unnormalized, qft, subspace_state,
    trace_distance, DensityOperator, PureState,
};

pub struct SuiteResult {
    pub name: &'static str,
    pub max_error: f64,
    pub cases: usize,
    pub passed: bool,
}

pub struct SelftestOutcome {
    pub suites: Vec<SuiteResult>,
    pub tolerance: f64,
}

impl SelftestOutcome {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

const PARAM_SETS: [(u8, usize, usize); 4] = [(2, 4, 2), (2, 8, 4), (3, 4, 2), (5, 3, 1)];

/// Run every suite at `tolerance` with deterministic randomness from `seed`.
pub fn run_selftest(seed: u64, tolerance: f64) -> SelftestOutcome {
    let mut suites = Vec::new();

    // Fourier-dual identity: ‖FT|A⟩ − |A^⊥⟩‖₂.
    {
        let mut max_error: f64 = 0.0;
        let mut cases = 0;
        for (i, &(q, lambda, dim)) in PARAM_SETS.iter().enumerate() {
            let params = FieldParams::new(q, lambda).unwrap();
            let mut rng = substream(seed, 10 + i as u64);
            for _ in 0..20 {
                let a = Subspace::random(params, dim, &mut rng).unwrap();
                let lhs = qft(&subspace_state(&a).unwrap(), false);
                let rhs = subspace_state(&a.dual()).unwrap();
                max_error = max_error.max(lhs.l2_distance(&rhs).unwrap());
                cases += 1;
            }
        }
        suites.push(SuiteResult {
            name: "fourier_dual",
            max_error,
            cases,
            passed: max_error <= tolerance,
        });
    }

    // Projector identity: FT† Π_{A^⊥} FT Π_A ψ = ⟨A|ψ⟩ |A⟩.
    {
        let mut max_error: f64 = 0.0;
        let mut cases = 0;
        for (i, &(q, lambda, dim)) in PARAM_SETS.iter().enumerate() {
            let params = FieldParams::new(q, lambda).unwrap();
            let mut rng = substream(seed, 20 + i as u64);
            for _ in 0..20 {
                let a = Subspace::random(params, dim, &mut rng).unwrap();
                let psi = PureState::random(params, &mut rng).unwrap();
                let target = subspace_state(&a).unwrap();
                let overlap = target.inner_product(&psi).unwrap();
                let pipeline = projector_pipeline_unnormalized(&psi, &a);
                for (out, t) in pipeline.iter().zip(target.amplitudes()) {
                    max_error = max_error.max((out - overlap * t).norm());
                }
                cases += 1;
            }
        }
        suites.push(SuiteResult {
            name: "projector_identity",
            max_error,
            cases,
            passed: max_error <= tolerance,
        });
    }

    // Gentle measurement: recovered-state distance against √ε.
    {
        let mut max_excess: f64 = 0.0;
        let mut cases = 0;
        let params = FieldParams::new(2, 6).unwrap();
        let mut rng = substream(seed, 30);
        for _ in 0..50 {
            let s = PureState::random(params, &mut rng).unwrap();
            let t = PureState::random(params, &mut rng).unwrap();
            match gentle_measurement_bound_check(&s, &t) {
                Ok(check) => {
                    max_excess = max_excess.max(check.trace_distance - check.bound);
                    cases += 1;
                }
                Err(_) => {
                    max_excess = f64::INFINITY;
                    cases += 1;
                }
            }
        }
        suites.push(SuiteResult {
            name: "gentle_measurement",
            max_error: max_excess.max(0.0),
            cases,
            passed: max_excess <= tolerance,
        });
    }

    // Dual dimensions: dim A + dim A^⊥ = λ and A^⊥⊥ = A.
    {
        let mut failures = 0usize;
        let mut cases = 0;
        for (i, &(q, lambda, dim)) in PARAM_SETS.iter().enumerate() {
            let params = FieldParams::new(q, lambda).unwrap();
            let mut rng = substream(seed, 40 + i as u64);
            for _ in 0..20 {
                let a = Subspace::random(params, dim, &mut rng).unwrap();
                let d = a.dual();
                if a.dim() + d.dim() != lambda || d.dual() != a {
                    failures += 1;
                }
                cases += 1;
            }
        }
        suites.push(SuiteResult {
            name: "dual_dimensions",
            max_error: failures as f64,
            cases,
            passed: failures == 0,
        });
    }

    // Trace distance against the pure-state closed form √(1 − |⟨u|w⟩|²).
    {
        let mut max_error: f64 = 0.0;
        let mut cases = 0;
        let params = FieldParams::new(2, 5).unwrap();
        let mut rng = substream(seed, 50);
        for _ in 0..25 {
            let u = PureState::random(params, &mut rng).unwrap();
            let w = PureState::random(params, &mut rng).unwrap();
            let c = u.inner_product(&w).unwrap().norm_sqr();
            let expected = (1.0 - c).max(0.0).sqrt();
            let got =
                trace_distance(&DensityOperator::from_pure(&u), &DensityOperator::from_pure(&w))
                    .unwrap();
            max_error = max_error.max((got - expected).abs());
            cases += 1;
        }
        suites.push(SuiteResult {
            name: "trace_distance_closed_form",
            max_error,
            cases,
            passed: max_error <= tolerance,
        });
    }

    SelftestOutcome { suites, tolerance }
}
