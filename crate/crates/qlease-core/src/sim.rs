//! Dense, exact state-vector simulation over the `q^λ`-dimensional Hilbert
//! space spanned by computational basis states `|x⟩`, `x ∈ Z_q^λ`.
//!
//! Amplitudes are indexed lexicographically (first coordinate most
//! significant), matching [`FieldVector::to_index`]. All equality claims are
//! absolute with tolerance [`crate::TOLERANCE`]; global phase is physically
//! irrelevant and quotiented out by [`PureState::approx_eq_up_to_phase`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
// Needed for f64 math in the no_std build; the test build links std and shadows it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::field::{FieldParams, FieldVector, Subspace};
use crate::rng::uniform_f64;
use crate::{BIPARTITE_CAP, SINGLE_REGISTER_CAP, TOLERANCE};

use rand_core::RngCore;

mod eigen;

pub use eigen::hermitian_eigenvalues;

/// Probabilities below this are treated as impossible branches.
pub const BRANCH_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// `q^λ` (or `q^{2λ}`) exceeds the configured dense-simulation cap.
    CapExceeded { requested: u128, cap: u64 },
    DimensionMismatch,
    NotNormalized { norm: f64 },
    /// A measurement was forced onto a branch of (near-)zero probability.
    ZeroProbabilityBranch { probability: f64 },
    /// The recovered state strayed farther than the gentle-measurement bound.
    GentleBoundViolated { trace_distance: f64, bound: f64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::CapExceeded { requested, cap } => {
                write!(f, "state dimension {} exceeds simulation cap {}", requested, cap)
            }
            SimError::DimensionMismatch => write!(f, "operands live in different spaces"),
            SimError::NotNormalized { norm } => write!(f, "state norm {} is not 1", norm),
            SimError::ZeroProbabilityBranch { probability } => {
                write!(f, "forced branch has probability {}", probability)
            }
            SimError::GentleBoundViolated { trace_distance, bound } => {
                write!(f, "recovered state at distance {} exceeds bound {}", trace_distance, bound)
            }
        }
    }
}

fn single_register_dim(params: FieldParams) -> Result<usize, SimError> {
    let d = (params.q() as u128).pow(params.lambda() as u32);
    if d > SINGLE_REGISTER_CAP as u128 {
        return Err(SimError::CapExceeded { requested: d, cap: SINGLE_REGISTER_CAP });
    }
    Ok(d as usize)
}

fn bipartite_dim(params: FieldParams) -> Result<usize, SimError> {
    let d = (params.q() as u128).pow(2 * params.lambda() as u32);
    if d > BIPARTITE_CAP as u128 {
        return Err(SimError::CapExceeded { requested: d, cap: BIPARTITE_CAP });
    }
    Ok(d as usize)
}

/// A normalized pure state over `Z_q^λ`.
#[derive(Clone)]
pub struct PureState {
    params: FieldParams,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn from_amplitudes(params: FieldParams, amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let d = single_register_dim(params)?;
        if amplitudes.len() != d {
            return Err(SimError::DimensionMismatch);
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(SimError::NotNormalized { norm });
        }
        Ok(PureState { params, amplitudes })
    }

    /// Normalize a raw amplitude vector; errors when it is numerically zero.
    pub fn from_unnormalized(params: FieldParams, mut amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let d = single_register_dim(params)?;
        if amplitudes.len() != d {
            return Err(SimError::DimensionMismatch);
        }
        let norm = l2_norm(&amplitudes);
        if norm * norm < BRANCH_EPSILON {
            return Err(SimError::ZeroProbabilityBranch { probability: norm * norm });
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(PureState { params, amplitudes })
    }

    /// Computational basis state `|v⟩`.
    pub fn basis_state(v: &FieldVector) -> Result<Self, SimError> {
        let d = single_register_dim(v.params())?;
        let mut amplitudes = vec![Complex64::ZERO; d];
        amplitudes[v.to_index() as usize] = Complex64::ONE;
        Ok(PureState { params: v.params(), amplitudes })
    }

    /// Uniform superposition over the coset `v + A`.
    pub fn coset_state(a: &Subspace, v: &FieldVector) -> Result<Self, SimError> {
        let d = single_register_dim(a.params())?;
        let mut amplitudes = vec![Complex64::ZERO; d];
        let weight = 1.0 / (a.size() as f64).sqrt();
        for e in a.enumerate() {
            amplitudes[e.add(v).to_index() as usize] = Complex64::new(weight, 0.0);
        }
        Ok(PureState { params: a.params(), amplitudes })
    }

    /// A Haar-ish random state: i.i.d. complex Gaussians, normalized.
    pub fn random(params: FieldParams, rng: &mut impl RngCore) -> Result<Self, SimError> {
        let d = single_register_dim(params)?;
        let mut amplitudes = Vec::with_capacity(d);
        for _ in 0..d {
            amplitudes.push(Complex64::new(gaussian(rng), gaussian(rng)));
        }
        normalize(&mut amplitudes);
        Ok(PureState { params, amplitudes })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude_of(&self, v: &FieldVector) -> Complex64 {
        self.amplitudes[v.to_index() as usize]
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &PureState) -> Result<Complex64, SimError> {
        if self.params != other.params {
            return Err(SimError::DimensionMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn l2_distance(&self, other: &PureState) -> Result<f64, SimError> {
        if self.params != other.params {
            return Err(SimError::DimensionMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Rotate the global phase so the largest-magnitude amplitude is
    /// positive real.
    pub fn phase_aligned(&self) -> PureState {
        let (idx, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .expect("nonempty state");
        let lead = self.amplitudes[idx];
        if lead.norm() < BRANCH_EPSILON {
            return self.clone();
        }
        let phase = lead / lead.norm();
        let amplitudes = self.amplitudes.iter().map(|a| a / phase).collect();
        PureState { params: self.params, amplitudes }
    }

    /// Equality up to global phase, within `tol` componentwise.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        if self.params != other.params {
            return false;
        }
        let a = self.phase_aligned();
        let b = other.phase_aligned();
        a.amplitudes
            .iter()
            .zip(&b.amplitudes)
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    /// Sample a computational-basis measurement of the full register.
    pub fn measure_basis(&self, rng: &mut impl RngCore) -> FieldVector {
        let u = uniform_f64(rng);
        let mut acc = 0.0;
        for (i, amp) in self.amplitudes.iter().enumerate() {
            acc += amp.norm_sqr();
            if u < acc {
                return FieldVector::from_index(self.params, i as u64);
            }
        }
        FieldVector::from_index(self.params, (self.dim() - 1) as u64)
    }
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PureState(q={}, lambda={}, dim={})", self.params.q(), self.params.lambda(), self.dim())
    }
}

fn l2_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(amps: &mut [Complex64]) {
    let n = l2_norm(amps);
    if n > 0.0 {
        for a in amps.iter_mut() {
            *a /= n;
        }
    }
}

/// Box–Muller standard normal.
fn gaussian(rng: &mut impl RngCore) -> f64 {
    let u1 = uniform_f64(rng).max(1e-300);
    let u2 = uniform_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

/// The subspace state `|A⟩ = 1/√|A| Σ_{a∈A} |a⟩`.
pub fn subspace_state(a: &Subspace) -> Result<PureState, SimError> {
    let d = single_register_dim(a.params())?;
    let mut amplitudes = vec![Complex64::ZERO; d];
    let weight = 1.0 / (a.size() as f64).sqrt();
    for e in a.enumerate() {
        amplitudes[e.to_index() as usize] = Complex64::new(weight, 0.0);
    }
    Ok(PureState { params: a.params(), amplitudes })
}

/// Fourier transform over `Z_q^λ`: forward maps `|x⟩` to
/// `q^{−λ/2} Σ_y ω^{⟨x,y⟩} |y⟩` with `ω = exp(2πi/q)`; `inverse` applies
/// the adjoint. The transform factorizes across coordinates, so it is
/// applied axis by axis.
pub fn qft(s: &PureState, inverse: bool) -> PureState {
    let q = s.params.q() as usize;
    let lambda = s.params.lambda();
    let d = s.dim();

    // omega^t for t in 0..q, conjugated for the inverse transform.
    let mut table = Vec::with_capacity(q);
    for t in 0..q {
        let angle = core::f64::consts::TAU * t as f64 / q as f64;
        let w = Complex64::new(angle.cos(), angle.sin());
        table.push(if inverse { w.conj() } else { w });
    }
    let scale = 1.0 / (q as f64).sqrt();

    let mut amps = s.amplitudes.clone();
    let mut scratch = vec![Complex64::ZERO; q];
    // Axis j has stride q^(λ-1-j).
    let mut stride = d / q;
    for _axis in 0..lambda {
        let block = stride * q;
        for base in (0..d).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (m, slot) in scratch.iter_mut().enumerate() {
                    let mut acc = Complex64::ZERO;
                    for k in 0..q {
                        acc += table[(m * k) % q] * amps[start + k * stride];
                    }
                    *slot = acc * scale;
                }
                for (k, &v) in scratch.iter().enumerate() {
                    amps[start + k * stride] = v;
                }
            }
        }
        stride /= q;
    }
    PureState { params: s.params, amplitudes: amps }
}

/// Outcome of a binary projective measurement. `probability` is the Born
/// probability of the sampled outcome; `post_state` is renormalized.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub outcome: u8,
    pub probability: f64,
    pub post_state: PureState,
}

/// Simulate the membership measurement: append an ancilla, apply
/// `|x⟩|y⟩ → |x⟩|y ⊕ pred(x)⟩`, and measure the ancilla. The outcome is 1
/// with probability `Σ_{x: pred(x)} |amp(x)|²` and the post state is the
/// renormalized restriction to the measured predicate class.
pub fn measure_membership<F>(
    s: &PureState,
    predicate: F,
    rng: &mut impl RngCore,
) -> MeasurementOutcome
where
    F: Fn(&FieldVector) -> bool,
{
    let p1 = membership_probability(s, &predicate);
    let outcome = sample_binary(p1, rng);
    let post = restrict(s, |v| predicate(v) == (outcome == 1));
    MeasurementOutcome {
        outcome,
        probability: if outcome == 1 { p1 } else { 1.0 - p1 },
        post_state: post,
    }
}

/// Force a specific outcome of the membership measurement; errors when the
/// branch has (near-)zero probability.
pub fn measure_membership_forced<F>(
    s: &PureState,
    predicate: F,
    outcome: u8,
) -> Result<MeasurementOutcome, SimError>
where
    F: Fn(&FieldVector) -> bool,
{
    let p1 = membership_probability(s, &predicate);
    let p = if outcome == 1 { p1 } else { 1.0 - p1 };
    if p < BRANCH_EPSILON {
        return Err(SimError::ZeroProbabilityBranch { probability: p });
    }
    let post = restrict(s, |v| predicate(v) == (outcome == 1));
    Ok(MeasurementOutcome { outcome, probability: p, post_state: post })
}

fn membership_probability<F>(s: &PureState, predicate: &F) -> f64
where
    F: Fn(&FieldVector) -> bool,
{
    s.amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| predicate(&FieldVector::from_index(s.params, *i as u64)))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

fn restrict<F>(s: &PureState, keep: F) -> PureState
where
    F: Fn(&FieldVector) -> bool,
{
    let mut amps: Vec<Complex64> = s
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if keep(&FieldVector::from_index(s.params, i as u64)) {
                a
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    normalize(&mut amps);
    PureState { params: s.params, amplitudes: amps }
}

fn sample_binary(p1: f64, rng: &mut impl RngCore) -> u8 {
    // Guard against renormalizing a numerically-empty branch.
    if p1 >= 1.0 - BRANCH_EPSILON {
        return 1;
    }
    if p1 <= BRANCH_EPSILON {
        return 0;
    }
    u8::from(uniform_f64(rng) < p1)
}

/// Sample a binary projective outcome with success probability `p`.
pub fn sample_projective(p: f64, rng: &mut impl RngCore) -> bool {
    sample_binary(p, rng) == 1
}

/// Outcome of the two-step subspace-state projection.
/// `success_probability` is the Born weight `|⟨A|s⟩|²` of the success
/// branch, independent of which branch was sampled.
#[derive(Debug, Clone)]
pub struct ProjectionOutcome {
    pub success: bool,
    pub success_probability: f64,
    pub post_state: PureState,
}

/// The two-step projection used by Run: membership of `A` in the
/// computational basis, then membership of `A^⊥` in the Fourier basis, then
/// the inverse transform. Joint success has probability `|⟨A|s⟩|²` and
/// leaves the register in `|A⟩` up to global phase.
pub fn project_onto_subspace_state(
    s: &PureState,
    a: &Subspace,
    rng: &mut impl RngCore,
) -> Result<ProjectionOutcome, SimError> {
    let target = subspace_state(a)?;
    let success_probability = s.inner_product(&target)?.norm_sqr();

    let first = measure_membership(s, |v| a.contains(v).expect("same space"), rng);
    let transformed = qft(&first.post_state, false);
    let dual = a.dual();
    let second = measure_membership(&transformed, |v| dual.contains(v).expect("same space"), rng);
    let post_state = qft(&second.post_state, true);

    Ok(ProjectionOutcome {
        success: first.outcome == 1 && second.outcome == 1,
        success_probability,
        post_state,
    })
}

/// The unnormalized composition `FT† Π_{A^⊥} FT Π_A` applied to `s`.
/// Equals `⟨A|s⟩ · |A⟩` componentwise.
pub fn projector_pipeline_unnormalized(s: &PureState, a: &Subspace) -> Vec<Complex64> {
    let masked: Vec<Complex64> = s
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, &amp)| {
            let v = FieldVector::from_index(s.params, i as u64);
            if a.contains(&v).expect("same space") {
                amp
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    // Run through the same unitaries without renormalizing.
    let tmp = PureState { params: s.params, amplitudes: masked };
    let ft = qft(&tmp, false);
    let dual = a.dual();
    let masked2: Vec<Complex64> = ft
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, &amp)| {
            let v = FieldVector::from_index(s.params, i as u64);
            if dual.contains(&v).expect("same space") {
                amp
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    let tmp2 = PureState { params: s.params, amplitudes: masked2 };
    qft(&tmp2, true).amplitudes
}

/// A density operator on the `q^λ`-dimensional register, stored row major.
#[derive(Clone)]
pub struct DensityOperator {
    params: FieldParams,
    dim: usize,
    matrix: Vec<Complex64>,
}

impl DensityOperator {
    pub fn from_pure(s: &PureState) -> Self {
        let d = s.dim();
        let mut matrix = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                matrix[i * d + j] = s.amplitudes[i] * s.amplitudes[j].conj();
            }
        }
        DensityOperator { params: s.params, dim: d, matrix }
    }

    /// Statistical mixture of pure states with the given weights.
    pub fn mixture(parts: &[(f64, PureState)]) -> Result<Self, SimError> {
        let first = parts.first().ok_or(SimError::DimensionMismatch)?;
        let params = first.1.params;
        let d = first.1.dim();
        let mut matrix = vec![Complex64::ZERO; d * d];
        for (w, s) in parts {
            if s.params != params {
                return Err(SimError::DimensionMismatch);
            }
            for i in 0..d {
                for j in 0..d {
                    matrix[i * d + j] += *w * s.amplitudes[i] * s.amplitudes[j].conj();
                }
            }
        }
        Ok(DensityOperator { params, dim: d, matrix })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `⟨φ|ρ|φ⟩` — the Born probability of projecting onto `|φ⟩`.
    pub fn expectation(&self, phi: &PureState) -> Result<f64, SimError> {
        if phi.params != self.params {
            return Err(SimError::DimensionMismatch);
        }
        let mut acc = Complex64::ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += phi.amplitudes[i].conj() * self.entry(i, j) * phi.amplitudes[j];
            }
        }
        Ok(acc.re)
    }

    /// Hermiticity, positive semidefiniteness, and unit trace, within the
    /// crate tolerances.
    pub fn check_invariants(&self) -> Result<(), SimError> {
        let d = self.dim;
        let mut herm_err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                herm_err = herm_err.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        if herm_err > TOLERANCE {
            return Err(SimError::NotNormalized { norm: herm_err });
        }
        if (self.trace().re - 1.0).abs() > TOLERANCE || self.trace().im.abs() > TOLERANCE {
            return Err(SimError::NotNormalized { norm: self.trace().re });
        }
        let eigs = hermitian_eigenvalues(&self.matrix, d);
        if eigs.iter().any(|&e| e < -1e-8) {
            return Err(SimError::NotNormalized { norm: *eigs.first().unwrap() });
        }
        Ok(())
    }
}

impl fmt::Debug for DensityOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityOperator(q={}, lambda={}, dim={})", self.params.q(), self.params.lambda(), self.dim)
    }
}

/// Trace distance `½·Σ singular values of (x − y)`. The difference of two
/// Hermitian operators is Hermitian, so the singular values are the
/// absolute eigenvalues.
pub fn trace_distance(x: &DensityOperator, y: &DensityOperator) -> Result<f64, SimError> {
    if x.params != y.params || x.dim != y.dim {
        return Err(SimError::DimensionMismatch);
    }
    let d = x.dim;
    let diff: Vec<Complex64> = x.matrix.iter().zip(&y.matrix).map(|(a, b)| a - b).collect();
    let eigs = hermitian_eigenvalues(&diff, d);
    Ok(eigs.iter().map(|e| e.abs()).sum::<f64>() / 2.0)
}

/// A normalized pure state on two `q^λ` registers; amplitude of `(x₁, x₂)`
/// sits at index `x₁·q^λ + x₂`.
#[derive(Clone)]
pub struct BipartiteState {
    params: FieldParams,
    register_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl BipartiteState {
    pub fn from_amplitudes(params: FieldParams, amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let total = bipartite_dim(params)?;
        if amplitudes.len() != total {
            return Err(SimError::DimensionMismatch);
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(SimError::NotNormalized { norm });
        }
        let register_dim = single_register_dim(params)?;
        Ok(BipartiteState { params, register_dim, amplitudes })
    }

    /// Product state `|u⟩ ⊗ |v⟩`.
    pub fn product(u: &PureState, v: &PureState) -> Result<Self, SimError> {
        if u.params != v.params {
            return Err(SimError::DimensionMismatch);
        }
        let _ = bipartite_dim(u.params)?;
        let d = u.dim();
        let mut amplitudes = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            if u.amplitudes[i] == Complex64::ZERO {
                continue;
            }
            for j in 0..d {
                amplitudes[i * d + j] = u.amplitudes[i] * v.amplitudes[j];
            }
        }
        Ok(BipartiteState { params: u.params, register_dim: d, amplitudes })
    }

    /// Normalized superposition `Σ wᵢ |uᵢ⟩⊗|vᵢ⟩`.
    pub fn superposition(terms: &[(Complex64, PureState, PureState)]) -> Result<Self, SimError> {
        let first = terms.first().ok_or(SimError::DimensionMismatch)?;
        let params = first.1.params;
        let _ = bipartite_dim(params)?;
        let d = first.1.dim();
        let mut amplitudes = vec![Complex64::ZERO; d * d];
        for (w, u, v) in terms {
            if u.params != params || v.params != params {
                return Err(SimError::DimensionMismatch);
            }
            for i in 0..d {
                if u.amplitudes[i] == Complex64::ZERO {
                    continue;
                }
                for j in 0..d {
                    amplitudes[i * d + j] += *w * u.amplitudes[i] * v.amplitudes[j];
                }
            }
        }
        normalize(&mut amplitudes);
        Ok(BipartiteState { params, register_dim: d, amplitudes })
    }

    pub fn random(params: FieldParams, rng: &mut impl RngCore) -> Result<Self, SimError> {
        let total = bipartite_dim(params)?;
        let register_dim = single_register_dim(params)?;
        let mut amplitudes = Vec::with_capacity(total);
        for _ in 0..total {
            amplitudes.push(Complex64::new(gaussian(rng), gaussian(rng)));
        }
        normalize(&mut amplitudes);
        Ok(BipartiteState { params, register_dim, amplitudes })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn register_dim(&self) -> usize {
        self.register_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

impl fmt::Debug for BipartiteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BipartiteState(q={}, lambda={}, dim={}²)", self.params.q(), self.params.lambda(), self.register_dim)
    }
}

/// Reduced operator on register 1: `ρ₁[i,j] = Σ_k ψ(i,k)·conj(ψ(j,k))`.
pub fn partial_trace_second(s: &BipartiteState) -> DensityOperator {
    let d = s.register_dim;
    let mut matrix = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = Complex64::ZERO;
            for k in 0..d {
                acc += s.amplitudes[i * d + k] * s.amplitudes[j * d + k].conj();
            }
            matrix[i * d + j] = acc;
            matrix[j * d + i] = acc.conj();
        }
    }
    DensityOperator { params: s.params, dim: d, matrix }
}

/// Reduced operator on register 2.
pub fn partial_trace_first(s: &BipartiteState) -> DensityOperator {
    let d = s.register_dim;
    let mut matrix = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut acc = Complex64::ZERO;
            for k in 0..d {
                acc += s.amplitudes[k * d + i] * s.amplitudes[k * d + j].conj();
            }
            matrix[i * d + j] = acc;
            matrix[j * d + i] = acc.conj();
        }
    }
    DensityOperator { params: s.params, dim: d, matrix }
}

/// Project register 1 onto `|A⟩⟨A| ⊗ I`. Returns the acceptance probability
/// and, when it is nonzero, the (pure) normalized state left on register 2.
pub fn project_first_register(
    s: &BipartiteState,
    a: &Subspace,
) -> Result<(f64, Option<PureState>), SimError> {
    if s.params != a.params() {
        return Err(SimError::DimensionMismatch);
    }
    let d = s.register_dim;
    let weight = 1.0 / (a.size() as f64).sqrt();
    let member_indices: Vec<usize> = a.enumerate().iter().map(|v| v.to_index() as usize).collect();

    // ⟨A| applied to register 1 leaves c(k) = Σ_{i∈A} ψ(i,k)/√|A| on register 2.
    let mut c = vec![Complex64::ZERO; d];
    for &i in &member_indices {
        for (k, slot) in c.iter_mut().enumerate() {
            *slot += s.amplitudes[i * d + k] * weight;
        }
    }
    let p: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    if p < BRANCH_EPSILON {
        return Ok((p, None));
    }
    normalize(&mut c);
    Ok((p, Some(PureState { params: s.params, amplitudes: c })))
}

/// Outcome of measuring register 1 with `{|A⟩⟨A|, I − |A⟩⟨A|}` and keeping
/// register 2.
#[derive(Debug, Clone)]
pub struct ConditionalOutcome {
    pub accepted: bool,
    pub accept_probability: f64,
    pub post: DensityOperator,
}

/// Apply the Run projection semantics to register 1 and, conditioned on the
/// sampled outcome, return the reduced post-measurement state on register 2.
pub fn conditional_second_register(
    s: &BipartiteState,
    a: &Subspace,
    rng: &mut impl RngCore,
) -> Result<ConditionalOutcome, SimError> {
    let (p, accept_state) = project_first_register(s, a)?;
    let accepted = sample_binary(p, rng) == 1;
    let post = if accepted {
        DensityOperator::from_pure(&accept_state.expect("probability above branch epsilon"))
    } else {
        rejected_second_register(s, a, p)?
    };
    Ok(ConditionalOutcome { accepted, accept_probability: p, post })
}

/// Force the accepting branch; errors when it has (near-)zero probability.
pub fn conditional_second_register_forced(
    s: &BipartiteState,
    a: &Subspace,
) -> Result<ConditionalOutcome, SimError> {
    let (p, accept_state) = project_first_register(s, a)?;
    match accept_state {
        Some(state) => Ok(ConditionalOutcome {
            accepted: true,
            accept_probability: p,
            post: DensityOperator::from_pure(&state),
        }),
        None => Err(SimError::ZeroProbabilityBranch { probability: p }),
    }
}

/// Reduced state on register 2 given that the register-1 projection was
/// rejected: partial-trace the normalized rejected component.
fn rejected_second_register(
    s: &BipartiteState,
    a: &Subspace,
    accept_probability: f64,
) -> Result<DensityOperator, SimError> {
    let reject_p = 1.0 - accept_probability;
    if reject_p < BRANCH_EPSILON {
        return Err(SimError::ZeroProbabilityBranch { probability: reject_p });
    }
    let d = s.register_dim;
    let target = subspace_state(a)?;
    // ψ_rej = ψ − |A⟩⊗|c_unnorm⟩ where c_unnorm(k) = Σ_{i∈A} ψ(i,k)/√|A|.
    let weight = 1.0 / (a.size() as f64).sqrt();
    let member_indices: Vec<usize> = a.enumerate().iter().map(|v| v.to_index() as usize).collect();
    let mut c = vec![Complex64::ZERO; d];
    for &i in &member_indices {
        for (k, slot) in c.iter_mut().enumerate() {
            *slot += s.amplitudes[i * d + k] * weight;
        }
    }
    let mut rej = s.amplitudes.clone();
    for i in 0..d {
        let ai = target.amplitudes[i];
        if ai == Complex64::ZERO {
            continue;
        }
        for k in 0..d {
            rej[i * d + k] -= ai * c[k];
        }
    }
    normalize(&mut rej);
    let rejected = BipartiteState { params: s.params, register_dim: d, amplitudes: rej };
    Ok(partial_trace_first(&rejected))
}

/// Result of checking the Almost-As-Good-As-New bound.
#[derive(Debug, Clone, Copy)]
pub struct GentleCheck {
    pub trace_distance: f64,
    pub bound: f64,
    pub epsilon: f64,
}

/// Check the gentle-measurement bound for a rank-one accept projector
/// `|t⟩⟨t|` with accept probability `1 − ε`: the recovered state after
/// measuring and uncomputing is the dephased mixture
/// `PρP + (I−P)ρ(I−P)`, and its trace distance from `ρ` must not exceed
/// `√ε` (within tolerance).
pub fn gentle_measurement_bound_check(
    s: &PureState,
    target: &PureState,
) -> Result<GentleCheck, SimError> {
    let c = target.inner_product(s)?;
    let epsilon = 1.0 - c.norm_sqr();
    gentle_check_from_components(s, &scale_state(target, c), epsilon)
}

/// Same bound for a computational-basis accept projector given by a
/// membership predicate.
pub fn gentle_measurement_bound_check_membership<F>(
    s: &PureState,
    predicate: F,
) -> Result<GentleCheck, SimError>
where
    F: Fn(&FieldVector) -> bool,
{
    let accepted: Vec<Complex64> = s
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if predicate(&FieldVector::from_index(s.params, i as u64)) {
                a
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    let p = accepted.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let epsilon = 1.0 - p;
    gentle_check_from_components(
        s,
        &PureState { params: s.params, amplitudes: accepted },
        epsilon,
    )
}

fn scale_state(s: &PureState, c: Complex64) -> PureState {
    PureState {
        params: s.params,
        amplitudes: s.amplitudes.iter().map(|a| a * c).collect(),
    }
}

/// `accepted_component` is the unnormalized projection `P|s⟩`; the recovered
/// state is `|Ps⟩⟨Ps| + |Qs⟩⟨Qs|` with `Q = I − P`.
fn gentle_check_from_components(
    s: &PureState,
    accepted_component: &PureState,
    epsilon: f64,
) -> Result<GentleCheck, SimError> {
    let d = s.dim();
    let rejected: Vec<Complex64> = s
        .amplitudes
        .iter()
        .zip(&accepted_component.amplitudes)
        .map(|(a, p)| a - p)
        .collect();

    let mut recovered = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            recovered[i * d + j] = accepted_component.amplitudes[i]
                * accepted_component.amplitudes[j].conj()
                + rejected[i] * rejected[j].conj();
        }
    }
    let recovered = DensityOperator { params: s.params, dim: d, matrix: recovered };
    let original = DensityOperator::from_pure(s);
    let trace_distance = trace_distance(&original, &recovered)?;
    let bound = epsilon.max(0.0).sqrt();
    if trace_distance > bound + TOLERANCE {
        return Err(SimError::GentleBoundViolated { trace_distance, bound });
    }
    Ok(GentleCheck { trace_distance, bound, epsilon })
}

#[cfg(test)]
mod tests;
