//! The leasing protocol: Setup, Gen, Lessor, Run, Check over the simulated
//! primitives, the NP relation behind the lease proof, and the reusable Run
//! variant.
//!
//! A lease couples the subspace state `|A⟩` with membership obfuscations of
//! `A` and `A^⊥`, an input-hiding obfuscation of the leased circuit, and a
//! proof that all three were derived honestly from a circuit with a known
//! accepting input.

use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::bits::Bits;
use crate::circuits::{search, CircuitError, CncCircuit};
use crate::codec::{get_block, put_block, Reader};
use crate::field::{FieldError, FieldParams, Subspace};
use crate::oracles::{
    qiho_eval, qiho_obf_seeded, sho_obf_seeded, statement_bytes, InputHidingObfHandle, NizkOracle,
    NizkProof, NizkTrapdoor, OracleError, OracleMode, SubspaceObfHandle,
};
use crate::sim::{
    gentle_measurement_bound_check, measure_membership, qft, sample_projective, subspace_state,
    GentleCheck, PureState, SimError,
};
use crate::SINGLE_REGISTER_CAP;

/// Relation id of the compute-and-compare lease language.
pub const LEASE_RELATION_ID: &str = "ssl-cnc-lease-v1";

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeError {
    /// Gen needs a λ/2-dimensional subspace, so λ must be even.
    OddLambda { lambda: usize },
    Field(FieldError),
    Sim(SimError),
    Oracle(OracleError),
    Circuit(CircuitError),
    /// The reusable Run bound was violated.
    ReusabilityBound { trace_distance: f64, bound: f64 },
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeError::OddLambda { lambda } => {
                write!(f, "security parameter λ = {} must be even", lambda)
            }
            SchemeError::Field(e) => write!(f, "{}", e),
            SchemeError::Sim(e) => write!(f, "{}", e),
            SchemeError::Oracle(e) => write!(f, "{}", e),
            SchemeError::Circuit(e) => write!(f, "{}", e),
            SchemeError::ReusabilityBound { trace_distance, bound } => {
                write!(f, "post-run state at distance {} exceeds bound {}", trace_distance, bound)
            }
        }
    }
}

impl From<FieldError> for SchemeError {
    fn from(e: FieldError) -> Self {
        SchemeError::Field(e)
    }
}

impl From<SimError> for SchemeError {
    fn from(e: SimError) -> Self {
        SchemeError::Sim(e)
    }
}

impl From<OracleError> for SchemeError {
    fn from(e: OracleError) -> Self {
        SchemeError::Oracle(e)
    }
}

impl From<CircuitError> for SchemeError {
    fn from(e: CircuitError) -> Self {
        SchemeError::Circuit(e)
    }
}

/// The lessor's private key: a λ/2-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    subspace: Subspace,
}

impl SecretKey {
    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// Reassemble a key from its subspace (file loading).
    pub fn from_subspace(subspace: Subspace) -> Self {
        SecretKey { subspace }
    }
}

/// The classical part of a lease: the two membership obfuscations, the
/// obfuscated circuit, and the proof.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPart {
    pub g: SubspaceObfHandle,
    pub g_perp: SubspaceObfHandle,
    pub c_obf: InputHidingObfHandle,
    pub proof: NizkProof,
}

impl ClassicalPart {
    /// The NIZK statement these handles form.
    pub fn statement(&self) -> Vec<u8> {
        statement_bytes(&[
            &self.g.encode_statement(),
            &self.g_perp.encode_statement(),
            &self.c_obf.encode_statement(),
        ])
    }
}

/// A leased copy. The quantum register is consumed and replaced by
/// measurement operations; a lease must not be used by two operations
/// concurrently.
#[derive(Debug, Clone)]
pub struct LeasedState {
    pub quantum: PureState,
    pub classical: ClassicalPart,
}

/// Output of Run: `None` is ⊥. The post-measurement state is retained in
/// the lease, so security experiments can continue the game with the
/// disturbed state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output: Option<Bits>,
    pub proof_ok: bool,
    /// The two membership bits (a, b) when the quantum part was measured.
    pub membership_bits: Option<(u8, u8)>,
}

/// The witness of the lease relation: the subspace, the three obfuscation
/// seeds, the circuit, and an accepting input.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaseWitness {
    pub mode: OracleMode,
    pub subspace: Subspace,
    pub r_circuit: u64,
    pub r_subspace: u64,
    pub r_dual: u64,
    pub circuit: CncCircuit,
    pub accepting_input: Bits,
}

impl LeaseWitness {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        put_block(&mut out, &self.subspace.encode_canonical());
        out.extend_from_slice(&self.r_circuit.to_le_bytes());
        out.extend_from_slice(&self.r_subspace.to_le_bytes());
        out.extend_from_slice(&self.r_dual.to_le_bytes());
        put_block(&mut out, &self.circuit.encode_canonical());
        out.extend_from_slice(&(self.accepting_input.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.accepting_input.to_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let mode = match r.u8()? {
            0 => OracleMode::Ideal,
            1 => OracleMode::Toy,
            _ => return None,
        };
        let subspace = Subspace::decode_canonical(&mut Reader::new(get_block(&mut r)?))?;
        let r_circuit = r.u64()?;
        let r_subspace = r.u64()?;
        let r_dual = r.u64()?;
        let circuit = CncCircuit::decode_canonical(&mut Reader::new(get_block(&mut r)?))?;
        let len = r.u32()? as usize;
        let accepting_input = Bits::from_bytes(r.bytes(len.div_ceil(8))?, len);
        Some(LeaseWitness {
            mode,
            subspace,
            r_circuit,
            r_subspace,
            r_dual,
            circuit,
            accepting_input,
        })
    }
}

/// The lease relation: the statement's three obfuscations re-derive
/// bit for bit from the witness randomness, and the witness input is
/// accepting.
pub fn lease_relation_check(statement: &[u8], witness: &[u8]) -> bool {
    let Some(w) = LeaseWitness::decode(witness) else {
        return false;
    };
    let Some(parts) = crate::oracles::statement_parts(statement) else {
        return false;
    };
    if parts.len() != 3 {
        return false;
    }
    let Ok(g) = sho_obf_seeded(&w.subspace, w.mode, w.r_subspace) else {
        return false;
    };
    let Ok(g_perp) = sho_obf_seeded(&w.subspace.dual(), w.mode, w.r_dual) else {
        return false;
    };
    let c_obf = qiho_obf_seeded(&w.circuit, w.mode, w.r_circuit);
    g.encode_statement() == parts[0]
        && g_perp.encode_statement() == parts[1]
        && c_obf.encode_statement() == parts[2]
        && w.circuit.accepts(&w.accepting_input).unwrap_or(false)
}

/// The protocol instance: field parameters, oracle mode, and the NIZK
/// functionality with the lease relation registered.
pub struct SslScheme {
    params: FieldParams,
    mode: OracleMode,
    nizk: NizkOracle,
}

impl SslScheme {
    /// Honest setup.
    pub fn setup(
        params: FieldParams,
        mode: OracleMode,
        rng: &mut impl RngCore,
    ) -> Result<Self, SchemeError> {
        Self::check_params(params)?;
        let nizk = NizkOracle::crsgen(LEASE_RELATION_ID, lease_relation_check, rng);
        Ok(SslScheme { params, mode, nizk })
    }

    /// Fake setup: identical CRS distribution plus the extraction trapdoor,
    /// for the simulation-extractability experiments.
    pub fn setup_extractable(
        params: FieldParams,
        mode: OracleMode,
        rng: &mut impl RngCore,
    ) -> Result<(Self, NizkTrapdoor), SchemeError> {
        Self::check_params(params)?;
        let (nizk, td) = NizkOracle::fkgen(LEASE_RELATION_ID, lease_relation_check, rng);
        Ok((SslScheme { params, mode, nizk }, td))
    }

    /// Reassemble a scheme from persisted parts (file loading); the NIZK
    /// oracle may be a verify-only import.
    pub fn from_parts(params: FieldParams, mode: OracleMode, nizk: NizkOracle) -> Result<Self, SchemeError> {
        Self::check_params(params)?;
        Ok(SslScheme { params, mode, nizk })
    }

    fn check_params(params: FieldParams) -> Result<(), SchemeError> {
        if !params.lambda().is_multiple_of(2) {
            return Err(SchemeError::OddLambda { lambda: params.lambda() });
        }
        let dim = (params.q() as u128).pow(params.lambda() as u32);
        if dim > SINGLE_REGISTER_CAP as u128 {
            return Err(SchemeError::Sim(SimError::CapExceeded {
                requested: dim,
                cap: SINGLE_REGISTER_CAP,
            }));
        }
        Ok(())
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn nizk(&self) -> &NizkOracle {
        &self.nizk
    }

    pub fn nizk_mut(&mut self) -> &mut NizkOracle {
        &mut self.nizk
    }

    /// Gen: a uniformly random λ/2-dimensional subspace.
    pub fn gen(&self, rng: &mut impl RngCore) -> Result<SecretKey, SchemeError> {
        let subspace = Subspace::random(self.params, self.params.lambda() / 2, rng)?;
        Ok(SecretKey { subspace })
    }

    /// Lessor: prepare `|A⟩`, obfuscate the circuit and both subspaces, and
    /// prove the lease relation with the searched accepting input.
    pub fn lessor(
        &mut self,
        sk: &SecretKey,
        circuit: &CncCircuit,
        rng: &mut impl RngCore,
    ) -> Result<LeasedState, SchemeError> {
        let quantum = subspace_state(sk.subspace())?;
        let r_circuit = rng.next_u64();
        let c_obf = qiho_obf_seeded(circuit, self.mode, r_circuit);
        let r_subspace = rng.next_u64();
        let g = sho_obf_seeded(sk.subspace(), self.mode, r_subspace)?;
        let r_dual = rng.next_u64();
        let g_perp = sho_obf_seeded(&sk.subspace().dual(), self.mode, r_dual)?;
        let accepting_input = search(circuit)?;

        let witness = LeaseWitness {
            mode: self.mode,
            subspace: sk.subspace().clone(),
            r_circuit,
            r_subspace,
            r_dual,
            circuit: circuit.clone(),
            accepting_input,
        };
        let statement = statement_bytes(&[
            &g.encode_statement(),
            &g_perp.encode_statement(),
            &c_obf.encode_statement(),
        ]);
        let proof = self.nizk.prove(LEASE_RELATION_ID, &statement, &witness.encode(), rng)?;

        Ok(LeasedState { quantum, classical: ClassicalPart { g, g_perp, c_obf, proof } })
    }

    /// Run: verify the proof, project the quantum part through the two
    /// membership measurements (computational basis, then Fourier basis,
    /// then the inverse transform), and evaluate the obfuscated circuit.
    ///
    /// The proof check is classical and commutes with the measurements, so
    /// it runs first and a bad proof leaves the state untouched.
    pub fn run(
        &self,
        lease: &mut LeasedState,
        x: &Bits,
        rng: &mut impl RngCore,
    ) -> Result<RunOutcome, SchemeError> {
        let statement = lease.classical.statement();
        if !self.nizk.verify(&statement, &lease.classical.proof) {
            return Ok(RunOutcome { output: None, proof_ok: false, membership_bits: None });
        }

        let bits =
            self.project_quantum_part(&lease.classical.g, &lease.classical.g_perp, &mut lease.quantum, rng);
        if bits != (1, 1) {
            return Ok(RunOutcome { output: None, proof_ok: true, membership_bits: Some(bits) });
        }
        let y = qiho_eval(&lease.classical.c_obf, x)?;
        Ok(RunOutcome { output: Some(y), proof_ok: true, membership_bits: Some(bits) })
    }

    /// Run's quantum step: membership of `g` in the computational basis,
    /// the Fourier transform, membership of `g_perp`, and the inverse
    /// transform. Returns the two sampled bits (a, b).
    pub fn project_quantum_part(
        &self,
        g: &SubspaceObfHandle,
        g_perp: &SubspaceObfHandle,
        state: &mut PureState,
        rng: &mut impl RngCore,
    ) -> (u8, u8) {
        let first = measure_membership(state, |v| g.eval(v), rng);
        let transformed = qft(&first.post_state, false);
        let second = measure_membership(&transformed, |v| g_perp.eval(v), rng);
        *state = qft(&second.post_state, true);
        (first.outcome, second.outcome)
    }

    /// Reusable Run: identical output distribution to [`SslScheme::run`],
    /// plus the recovered-state guarantee of the gentle-measurement lemma:
    /// the composed measurement is the rank-one projector onto the handle
    /// subspace state, and the dephased recovered state must stay within
    /// `√ε` of the pre-run state, where `1 − ε` is the acceptance
    /// probability. The carried post state is the sampled branch, which
    /// coincides with the recovered state on honest leases (ε = 0).
    pub fn run_reusable(
        &self,
        lease: &mut LeasedState,
        x: &Bits,
        rng: &mut impl RngCore,
    ) -> Result<(RunOutcome, GentleCheck), SchemeError> {
        let handle_space = lease.classical.g.sealed_subspace().clone();
        let target = subspace_state(&handle_space)?;
        let gentle = gentle_measurement_bound_check(&lease.quantum, &target).map_err(|e| match e {
            SimError::GentleBoundViolated { trace_distance, bound } => {
                SchemeError::ReusabilityBound { trace_distance, bound }
            }
            other => SchemeError::Sim(other),
        })?;
        let outcome = self.run(lease, x, rng)?;
        Ok((outcome, gentle))
    }

    /// Check: the projective measurement `{|A⟩⟨A|, I − |A⟩⟨A|}` on the
    /// quantum part. Returns 1 on the first outcome; the post-measurement
    /// state stays in the lease.
    pub fn check(
        &self,
        sk: &SecretKey,
        lease: &mut LeasedState,
        rng: &mut impl RngCore,
    ) -> Result<u8, SchemeError> {
        self.check_state(sk, &mut lease.quantum, rng)
    }

    /// Check applied to a bare quantum register (shared with the family
    /// leases of the impossibility machinery).
    pub fn check_state(
        &self,
        sk: &SecretKey,
        state: &mut PureState,
        rng: &mut impl RngCore,
    ) -> Result<u8, SchemeError> {
        let target = subspace_state(sk.subspace())?;
        let p = target.inner_product(state)?.norm_sqr();
        let accept = sample_projective(p, rng);
        *state = project_components(state, &target, accept)?;
        Ok(u8::from(accept))
    }

    /// The Born probability `|⟨A|ψ⟩|²` that Check accepts the lease.
    pub fn check_accept_probability(
        &self,
        sk: &SecretKey,
        lease: &LeasedState,
    ) -> Result<f64, SchemeError> {
        let target = subspace_state(sk.subspace())?;
        Ok(target.inner_product(&lease.quantum)?.norm_sqr())
    }

    /// The Born probability that Run's two-step projection accepts, which
    /// equals `|⟨A_g|ψ⟩|²` for a matched handle pair.
    pub fn run_accept_probability(&self, lease: &LeasedState) -> Result<f64, SchemeError> {
        let target = subspace_state(lease.classical.g.sealed_subspace())?;
        Ok(target.inner_product(&lease.quantum)?.norm_sqr())
    }
}

impl fmt::Debug for SslScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SslScheme(q={}, lambda={}, mode={})",
            self.params.q(),
            self.params.lambda(),
            self.mode.name()
        )
    }
}

/// Collapse onto (or away from) a rank-one target: the normalized
/// `P|ψ⟩` when `accept`, else the normalized `(I−P)|ψ⟩`.
fn project_components(
    state: &PureState,
    target: &PureState,
    accept: bool,
) -> Result<PureState, SchemeError> {
    let overlap = target.inner_product(state)?;
    let amps: Vec<num_complex::Complex64> = if accept {
        target.amplitudes().iter().map(|&t| t * overlap).collect()
    } else {
        state
            .amplitudes()
            .iter()
            .zip(target.amplitudes())
            .map(|(&s, &t)| s - t * overlap)
            .collect()
    };
    PureState::from_unnormalized(state.params(), amps).map_err(SchemeError::Sim)
}
