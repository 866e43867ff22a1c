//! The de-quantumization machinery: the circuit family whose members leak
//! their own description to any working implementation, a toy FHE ideal
//! functionality, the extraction algorithm, the lease-breaking pirate, and
//! an oracle-learner baseline.
//!
//! A family member `C_{a,b,r,pk,O}` answers three kinds of input: the
//! all-zero string returns `Enc(pk, a; r) | O-token | pk`, the point `a`
//! returns `b`, and everything else returns zeros. A lockable obfuscation
//! `O` of "decrypt, compare with b, release sk|r" turns any implementation
//! that can be evaluated homomorphically into a key-recovery device: query
//! at zero, evaluate the implementation under the encryption of `a`, feed
//! the resulting ciphertext of `b` to `O`, decrypt everything.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::bits::Bits;
use crate::circuits::{BooleanCircuit, CircuitBody, CircuitError};
use crate::codec::{get_block, put_block, Reader};
use crate::field::Subspace;
use crate::oracles::{
    lo_eval, lo_obf_seeded, sho_obf_seeded, statement_bytes, statement_parts, LockableObfHandle,
    NizkProof, OracleError, OracleMode, SubspaceObfHandle,
};
use crate::rng::ChaCha12Rng;
use crate::scheme::{RunOutcome, SchemeError, SecretKey, SslScheme};
use crate::sim::{subspace_state, PureState};
use crate::toycrypto::{self, digest, sealed_len_bits};

/// Relation id of the family-lease language.
pub const FAMILY_RELATION_ID: &str = "ssl-family-lease-v1";

/// Payload bits released by the family's lockable obfuscation: sk (128)
/// followed by the encryption nonce r (64).
const SK_BITS: usize = 128;
const NONCE_BITS: usize = 64;
const TOKEN_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum DequantError {
    /// No secret key registered for this public token.
    UnknownKey { pk: u64 },
    /// Ciphertext failed its integrity tag.
    TagFailure,
    /// The implementation's branch-1 output does not parse as a family
    /// member (wrong arity or unknown obfuscation token).
    NotFamilyShaped,
    /// The lockable obfuscation missed: the homomorphic evaluation did not
    /// produce an encryption of the lock (implementation too noisy).
    LockMiss,
    /// Input length out of step with the family descriptor.
    BadParameters,
    Scheme(SchemeError),
    Circuit(CircuitError),
    Oracle(OracleError),
}

impl fmt::Display for DequantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DequantError::UnknownKey { pk } => write!(f, "no secret key registered for pk {:#x}", pk),
            DequantError::TagFailure => write!(f, "ciphertext integrity tag failure"),
            DequantError::NotFamilyShaped => {
                write!(f, "implementation output does not parse as a family circuit")
            }
            DequantError::LockMiss => write!(f, "extraction failed: lockable obfuscation returned ⊥"),
            DequantError::BadParameters => write!(f, "family parameters out of range"),
            DequantError::Scheme(e) => write!(f, "{}", e),
            DequantError::Circuit(e) => write!(f, "{}", e),
            DequantError::Oracle(e) => write!(f, "{}", e),
        }
    }
}

impl From<SchemeError> for DequantError {
    fn from(e: SchemeError) -> Self {
        DequantError::Scheme(e)
    }
}

impl From<CircuitError> for DequantError {
    fn from(e: CircuitError) -> Self {
        DequantError::Circuit(e)
    }
}

impl From<OracleError> for DequantError {
    fn from(e: OracleError) -> Self {
        DequantError::Oracle(e)
    }
}

// ---------------------------------------------------------------------------
// Toy FHE ideal functionality
// ---------------------------------------------------------------------------

/// A toy FHE keypair. The public part is an opaque token; the secret is a
/// keystream seed held by the ideal functionality's registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyFheKeypair {
    pub pk: u64,
    pub sk: [u8; 16],
}

/// A classical ciphertext: sealed bits (length framing, nonce, payload,
/// tag) plus the public token it was produced under. The sealed bits alone
/// are the circuit-facing serialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyCiphertext {
    pub pk: u64,
    pub msg_len: usize,
    pub sealed: Bits,
}

impl ToyCiphertext {
    /// Bit length of a ciphertext for `msg_len`-bit messages.
    pub const fn bit_len(msg_len: usize) -> usize {
        sealed_len_bits(msg_len)
    }

    pub fn to_bits(&self) -> Bits {
        self.sealed.clone()
    }

    pub fn nonce(&self) -> u64 {
        toycrypto::sealed_nonce(&self.sealed)
    }
}

/// Encrypt with an explicit secret key and nonce (deterministic).
pub fn fhe_encrypt_with(sk: &[u8; 16], pk: u64, msg: &Bits, nonce: u64) -> ToyCiphertext {
    ToyCiphertext { pk, msg_len: msg.len(), sealed: toycrypto::seal(sk, nonce, msg) }
}

/// Decrypt with an explicit secret key; tag failures are errors.
pub fn fhe_decrypt(sk: &[u8; 16], ct: &ToyCiphertext) -> Result<Bits, DequantError> {
    toycrypto::open(sk, &ct.sealed, ct.msg_len).ok_or(DequantError::TagFailure)
}

/// The ideal functionality: a sealed decrypt–run–re-encrypt boundary. The
/// registry maps public tokens to secret keys; homomorphic evaluation
/// happens inside the boundary, so the evaluator sees plaintext without the
/// caller ever doing.
#[derive(Default)]
pub struct ToyFhe {
    keys: BTreeMap<u64, [u8; 16]>,
}

impl ToyFhe {
    pub fn new() -> Self {
        ToyFhe { keys: BTreeMap::new() }
    }

    pub fn keygen(&mut self, rng: &mut impl RngCore) -> ToyFheKeypair {
        let pk = rng.next_u64();
        let mut sk = [0u8; 16];
        rng.fill_bytes(&mut sk);
        self.keys.insert(pk, sk);
        ToyFheKeypair { pk, sk }
    }

    pub fn encrypt(
        &self,
        pk: u64,
        msg: &Bits,
        nonce: u64,
    ) -> Result<ToyCiphertext, DequantError> {
        let sk = self.keys.get(&pk).ok_or(DequantError::UnknownKey { pk })?;
        Ok(fhe_encrypt_with(sk, pk, msg, nonce))
    }

    /// Homomorphic evaluation: produce an encryption of
    /// `evaluator(plaintext)`. Classical plaintexts stay classical.
    pub fn eval(
        &self,
        evaluator: &mut dyn FnMut(&Bits) -> Result<Bits, DequantError>,
        ct: &ToyCiphertext,
        nonce: u64,
    ) -> Result<ToyCiphertext, DequantError> {
        let sk = *self.keys.get(&ct.pk).ok_or(DequantError::UnknownKey { pk: ct.pk })?;
        let plaintext = fhe_decrypt(&sk, ct)?;
        let out = evaluator(&plaintext)?;
        Ok(fhe_encrypt_with(&sk, ct.pk, &out, nonce))
    }
}

// ---------------------------------------------------------------------------
// The de-quantumizable circuit family
// ---------------------------------------------------------------------------

/// A family member `C_{a,b,r,pk,O}`. Outputs are padded to a common length
/// `m`, the length of the branch-1 string `Enc(pk, a; r) | O-token | pk`.
/// The obfuscation handle travels in that output by reference token, with
/// the full handle resolvable from the harness registry.
#[derive(Debug, Clone, PartialEq)]
pub struct DequantumizableCircuit {
    lambda_bits: usize,
    n: usize,
    m: usize,
    a: Bits,
    b: Bits,
    r: u64,
    pk: u64,
    lo: LockableObfHandle,
    branch1: Bits,
}

impl DequantumizableCircuit {
    pub fn lambda_bits(&self) -> usize {
        self.lambda_bits
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &Bits {
        &self.a
    }

    pub fn b(&self) -> &Bits {
        &self.b
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn pk(&self) -> u64 {
        self.pk
    }

    pub fn lo(&self) -> &LockableObfHandle {
        &self.lo
    }

    /// Output length `m` for input length `n`.
    pub const fn output_len_for(n: usize) -> usize {
        ToyCiphertext::bit_len(n) + TOKEN_BITS + TOKEN_BITS
    }

    /// The three-branch evaluation. Branch 1 wins on the all-zero input
    /// (the generator resamples `a ≠ 0`, so the branches never collide).
    pub fn eval(&self, x: &Bits) -> Result<Bits, DequantError> {
        if x.len() != self.n {
            return Err(DequantError::Circuit(CircuitError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            }));
        }
        Ok(if x.is_zero() {
            self.branch1.clone()
        } else if *x == self.a {
            self.b.padded_to(self.m)
        } else {
            Bits::zeros(self.m)
        })
    }

    /// Canonical descriptor bytes (digest input for family leases).
    pub fn encode_canonical(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.lambda_bits as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        put_block(&mut out, &self.a.to_bytes());
        put_block(&mut out, &self.b.to_bytes());
        out.extend_from_slice(&self.r.to_le_bytes());
        out.extend_from_slice(&self.pk.to_le_bytes());
        out.extend_from_slice(&self.lo.token().to_le_bytes());
        put_block(&mut out, &self.branch1.to_bytes());
        out
    }

    pub fn descriptor_digest(&self) -> [u8; 32] {
        digest(&[b"family-descriptor", &self.encode_canonical()])
    }
}

/// Registry resolving obfuscation reference tokens plus the FHE boundary —
/// the harness bookkeeping a real deployment would carry as ciphertext and
/// program bytes.
#[derive(Default)]
pub struct DequantContext {
    pub fhe: ToyFhe,
    lo_registry: BTreeMap<u64, LockableObfHandle>,
}

impl DequantContext {
    pub fn new() -> Self {
        DequantContext { fhe: ToyFhe::new(), lo_registry: BTreeMap::new() }
    }

    pub fn resolve_lo(&self, token: u64) -> Option<&LockableObfHandle> {
        self.lo_registry.get(&token)
    }

    /// Draw a family member: `a, b, r` uniform (with `a` resampled away
    /// from the branch-1 trigger), a fresh keypair, and the lockable
    /// obfuscation of "decrypt with sk, compare with the padded b, release
    /// sk|r".
    pub fn sample_family(
        &mut self,
        lambda_bits: usize,
        mode: OracleMode,
        rng: &mut impl RngCore,
    ) -> Result<DequantumizableCircuit, DequantError> {
        if lambda_bits == 0 || lambda_bits > 64 {
            return Err(DequantError::BadParameters);
        }
        let n = lambda_bits;
        let m = DequantumizableCircuit::output_len_for(n);

        let a = loop {
            let a = Bits::random(lambda_bits, rng);
            if !a.is_zero() {
                break a;
            }
        };
        let b = Bits::random(lambda_bits, rng);
        let r = rng.next_u64();
        let keypair = self.fhe.keygen(rng);

        let dec_inner = BooleanCircuit::new(
            sealed_len_bits(m),
            m,
            CircuitBody::FheDecrypt { key: keypair.sk, plaintext_len: m },
        )
        .expect("arity consistent by construction");
        let payload = sk_nonce_payload(&keypair.sk, r);
        let lo_seed = rng.next_u64();
        let lo = lo_obf_seeded(&dec_inner, &b.padded_to(m), &payload, mode, lo_seed)?;
        self.lo_registry.insert(lo.token(), lo.clone());

        let ct1 = fhe_encrypt_with(&keypair.sk, keypair.pk, &a.padded_to(n), r);
        let branch1 = ct1
            .to_bits()
            .concat(&Bits::from_u64(lo.token(), TOKEN_BITS))
            .concat(&Bits::from_u64(keypair.pk, TOKEN_BITS));
        debug_assert_eq!(branch1.len(), m);

        Ok(DequantumizableCircuit { lambda_bits, n, m, a, b, r, pk: keypair.pk, lo, branch1 })
    }

    /// Reassemble a family member from extracted parameters. The branch-1
    /// string is recomputed from `(sk, a, r, pk)`, so componentwise-equal
    /// parameters reproduce the descriptor bit for bit.
    #[allow(clippy::too_many_arguments)] // the parameter tuple is the point
    pub fn assemble(
        &self,
        lambda_bits: usize,
        a: Bits,
        b: Bits,
        r: u64,
        pk: u64,
        sk: &[u8; 16],
        lo: LockableObfHandle,
    ) -> DequantumizableCircuit {
        let n = lambda_bits;
        let m = DequantumizableCircuit::output_len_for(n);
        let ct1 = fhe_encrypt_with(sk, pk, &a.padded_to(n), r);
        let branch1 = ct1
            .to_bits()
            .concat(&Bits::from_u64(lo.token(), TOKEN_BITS))
            .concat(&Bits::from_u64(pk, TOKEN_BITS));
        DequantumizableCircuit { lambda_bits, n, m, a, b, r, pk, lo, branch1 }
    }
}

fn sk_nonce_payload(sk: &[u8; 16], r: u64) -> Bits {
    Bits::from_bytes(sk, SK_BITS).concat(&Bits::from_u64(r, NONCE_BITS))
}

fn split_sk_nonce(payload: &Bits) -> Option<([u8; 16], u64)> {
    if payload.len() != SK_BITS + NONCE_BITS {
        return None;
    }
    let sk: [u8; 16] = payload.slice(0, SK_BITS).to_bytes().try_into().ok()?;
    let r = payload.slice(SK_BITS, SK_BITS + NONCE_BITS).to_u64();
    Some((sk, r))
}

// ---------------------------------------------------------------------------
// Quantum implementations (the attacker's view of a working program)
// ---------------------------------------------------------------------------

/// Append-only record of how an implementation was exercised. Direct
/// queries log their input; homomorphic evaluations happen inside the FHE
/// boundary and only bump a counter — that separation is the whole point of
/// the non-black-box attack.
#[derive(Debug, Default, Clone)]
pub struct AccessLog {
    direct: Vec<Bits>,
    homomorphic_evals: usize,
}

impl AccessLog {
    pub fn direct_queries(&self) -> &[Bits] {
        &self.direct
    }

    pub fn homomorphic_evals(&self) -> usize {
        self.homomorphic_evals
    }

    /// True when every direct query was the all-zero string.
    pub fn only_zero_direct_queries(&self) -> bool {
        self.direct.iter().all(Bits::is_zero)
    }
}

/// A program the implementation wraps: either a bare family descriptor or
/// a leased copy driven through Run.
pub trait ClassicalProgram {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn eval(&mut self, x: &Bits) -> Result<Bits, DequantError>;
}

/// Descriptor-backed program (no protocol in the loop).
pub struct DirectProgram<'a> {
    pub circuit: &'a DequantumizableCircuit,
}

impl ClassicalProgram for DirectProgram<'_> {
    fn input_len(&self) -> usize {
        self.circuit.n()
    }

    fn output_len(&self) -> usize {
        self.circuit.m()
    }

    fn eval(&mut self, x: &Bits) -> Result<Bits, DequantError> {
        self.circuit.eval(x)
    }
}

/// A family lease driven through Run; each evaluation re-projects the
/// quantum part.
pub struct FamilyLeaseProgram<'a> {
    pub scheme: &'a SslScheme,
    pub lease: &'a mut FamilyLease,
    pub rng: ChaCha12Rng,
}

impl ClassicalProgram for FamilyLeaseProgram<'_> {
    fn input_len(&self) -> usize {
        self.lease.circuit.n()
    }

    fn output_len(&self) -> usize {
        self.lease.circuit.m()
    }

    fn eval(&mut self, x: &Bits) -> Result<Bits, DequantError> {
        let out = family_run(self.scheme, self.lease, x, &mut self.rng)?;
        out.output.ok_or(DequantError::NotFamilyShaped)
    }
}

/// A compute-and-compare lease driven through Run (used to show the attack
/// degrades gracefully on non-family programs).
pub struct CncLeaseProgram<'a> {
    pub scheme: &'a SslScheme,
    pub lease: &'a mut crate::scheme::LeasedState,
    pub rng: ChaCha12Rng,
}

impl ClassicalProgram for CncLeaseProgram<'_> {
    fn input_len(&self) -> usize {
        self.lease.classical.c_obf.n()
    }

    fn output_len(&self) -> usize {
        self.lease.classical.c_obf.output_len()
    }

    fn eval(&mut self, x: &Bits) -> Result<Bits, DequantError> {
        let out = self
            .scheme
            .run(self.lease, x, &mut self.rng)
            .map_err(DequantError::Scheme)?;
        out.output.ok_or(DequantError::NotFamilyShaped)
    }
}

/// An efficient implementation of a circuit: a program plus its access log
/// and an injectable error model for robustness tests. The error is
/// concentrated on a configured target input (the family's accepting
/// point), standing in for an implementation that computes the circuit
/// with probability `1 − ε`.
pub struct QuantumImplementation<P: ClassicalProgram> {
    program: P,
    error_rate: f64,
    error_target: Option<Bits>,
    noise_rng: ChaCha12Rng,
    log: AccessLog,
}

impl<P: ClassicalProgram> QuantumImplementation<P> {
    pub fn new(program: P, noise_rng: ChaCha12Rng) -> Self {
        QuantumImplementation { program, error_rate: 0.0, error_target: None, noise_rng, log: AccessLog::default() }
    }

    pub fn with_noise(program: P, error_rate: f64, target: Bits, noise_rng: ChaCha12Rng) -> Self {
        QuantumImplementation {
            program,
            error_rate,
            error_target: Some(target),
            noise_rng,
            log: AccessLog::default(),
        }
    }

    pub fn input_len(&self) -> usize {
        self.program.input_len()
    }

    pub fn output_len(&self) -> usize {
        self.program.output_len()
    }

    pub fn log(&self) -> &AccessLog {
        &self.log
    }

    fn eval_noisy(&mut self, x: &Bits) -> Result<Bits, DequantError> {
        let out = self.program.eval(x)?;
        if let Some(target) = &self.error_target {
            if x == target && crate::rng::uniform_f64(&mut self.noise_rng) < self.error_rate {
                return Ok(Bits::random(out.len(), &mut self.noise_rng));
            }
        }
        Ok(out)
    }

    /// A direct classical query; logged with its input.
    pub fn evaluate(&mut self, x: &Bits) -> Result<Bits, DequantError> {
        self.log.direct.push(x.clone());
        self.eval_noisy(x)
    }

    /// An evaluation inside the FHE boundary; only the count is observable.
    pub fn evaluate_homomorphic(&mut self, x: &Bits) -> Result<Bits, DequantError> {
        self.log.homomorphic_evals += 1;
        self.eval_noisy(x)
    }
}

// ---------------------------------------------------------------------------
// The extraction algorithm
// ---------------------------------------------------------------------------

/// Result of a successful extraction.
pub struct Extraction {
    pub circuit: DequantumizableCircuit,
    /// The implementation still answers branch 1 correctly after the
    /// attack (the reusability face of the extraction).
    pub recovered_state_ok: bool,
    /// Parameters as recovered, before reassembly.
    pub recovered_sk: [u8; 16],
}

/// Recover the full circuit description from any implementation computing
/// a family member:
/// query at zero → homomorphically evaluate the implementation on the
/// recovered ciphertext of `a` → feed the ciphertext of `b` to the
/// lockable obfuscation → decrypt everything → reassemble.
///
/// The circuit is never queried directly anywhere but the all-zero input;
/// the access log certifies it.
pub fn attack_extract<P: ClassicalProgram>(
    implementation: &mut QuantumImplementation<P>,
    ctx: &DequantContext,
    rng: &mut impl RngCore,
) -> Result<Extraction, DequantError> {
    let n = implementation.input_len();
    let m = implementation.output_len();
    if m != DequantumizableCircuit::output_len_for(n) {
        return Err(DequantError::NotFamilyShaped);
    }

    // Step 1: branch-1 query at 0…0 yields ct₁ | O-token | pk.
    let out0 = implementation.evaluate(&Bits::zeros(n))?;
    if out0.len() != m {
        return Err(DequantError::NotFamilyShaped);
    }
    let ct1_bits = out0.slice(0, ToyCiphertext::bit_len(n));
    let lo_token = out0.slice(ToyCiphertext::bit_len(n), ToyCiphertext::bit_len(n) + TOKEN_BITS).to_u64();
    let pk = out0.slice(m - TOKEN_BITS, m).to_u64();
    let lo = ctx.resolve_lo(lo_token).ok_or(DequantError::NotFamilyShaped)?.clone();
    let ct1 = ToyCiphertext { pk, msg_len: n, sealed: ct1_bits };

    // Step 2: homomorphically evaluate the implementation on ct₁.
    let nonce = rng.next_u64();
    let ct2 = ctx.fhe.eval(&mut |pt| implementation.evaluate_homomorphic(pt), &ct1, nonce)?;

    // Step 3: the lockable obfuscation opens on an encryption of b.
    let payload = lo_eval(&lo, &ct2.to_bits())?.ok_or(DequantError::LockMiss)?;
    let (sk, r) = split_sk_nonce(&payload).ok_or(DequantError::NotFamilyShaped)?;

    // Step 4: decrypt both ciphertexts.
    let a = fhe_decrypt(&sk, &ct1)?.truncated_to(n);
    let b = fhe_decrypt(&sk, &ct2)?.truncated_to(n);

    // Step 5: reassemble the circuit.
    let circuit = ctx.assemble(n, a, b, r, pk, &sk, lo);

    // Reusability face: branch 1 still answers after the attack.
    let recovered_state_ok = implementation.evaluate(&Bits::zeros(n))? == circuit.branch1;

    Ok(Extraction { circuit, recovered_state_ok, recovered_sk: sk })
}

// ---------------------------------------------------------------------------
// Family leases: the protocol applied to family circuits
// ---------------------------------------------------------------------------

/// A lease of a family circuit: the descriptor rides in the clear (the
/// scheme's security rests on the quantum part; the attack shows even that
/// fails for this family).
#[derive(Debug, Clone)]
pub struct FamilyLease {
    pub quantum: PureState,
    pub g: SubspaceObfHandle,
    pub g_perp: SubspaceObfHandle,
    pub circuit: DequantumizableCircuit,
    pub proof: NizkProof,
}

impl FamilyLease {
    pub fn statement(&self) -> Vec<u8> {
        statement_bytes(&[
            &self.g.encode_statement(),
            &self.g_perp.encode_statement(),
            &self.circuit.descriptor_digest(),
        ])
    }
}

/// Witness of the family-lease relation: the subspace and the two
/// obfuscation seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyWitness {
    pub mode: OracleMode,
    pub subspace: Subspace,
    pub r_subspace: u64,
    pub r_dual: u64,
}

impl FamilyWitness {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        put_block(&mut out, &self.subspace.encode_canonical());
        out.extend_from_slice(&self.r_subspace.to_le_bytes());
        out.extend_from_slice(&self.r_dual.to_le_bytes());
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
        let r_subspace = r.u64()?;
        let r_dual = r.u64()?;
        Some(FamilyWitness { mode, subspace, r_subspace, r_dual })
    }
}

/// Family-lease relation: both membership obfuscations re-derive bit for
/// bit from the witness.
pub fn family_relation_check(statement: &[u8], witness: &[u8]) -> bool {
    let Some(w) = FamilyWitness::decode(witness) else {
        return false;
    };
    let Some(parts) = statement_parts(statement) else {
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
    g.encode_statement() == parts[0] && g_perp.encode_statement() == parts[1]
}

/// Register the family-lease relation under the scheme's CRS. Idempotent.
pub fn enable_family_leasing(scheme: &mut SslScheme) {
    scheme.nizk_mut().register_relation(FAMILY_RELATION_ID, family_relation_check);
}

/// Lessor for family circuits.
pub fn family_lessor(
    scheme: &mut SslScheme,
    sk: &SecretKey,
    circuit: &DequantumizableCircuit,
    rng: &mut impl RngCore,
) -> Result<FamilyLease, DequantError> {
    let quantum = subspace_state(sk.subspace()).map_err(SchemeError::Sim)?;
    let r_subspace = rng.next_u64();
    let g = sho_obf_seeded(sk.subspace(), scheme.mode(), r_subspace)?;
    let r_dual = rng.next_u64();
    let g_perp = sho_obf_seeded(&sk.subspace().dual(), scheme.mode(), r_dual)?;
    let witness = FamilyWitness { mode: scheme.mode(), subspace: sk.subspace().clone(), r_subspace, r_dual };
    let statement = statement_bytes(&[
        &g.encode_statement(),
        &g_perp.encode_statement(),
        &circuit.descriptor_digest(),
    ]);
    let proof = scheme
        .nizk_mut()
        .prove(FAMILY_RELATION_ID, &statement, &witness.encode(), rng)?;
    Ok(FamilyLease { quantum, g, g_perp, circuit: circuit.clone(), proof })
}

/// Run for family leases: proof check, the two-step projection, then the
/// classical descriptor evaluation.
pub fn family_run(
    scheme: &SslScheme,
    lease: &mut FamilyLease,
    x: &Bits,
    rng: &mut impl RngCore,
) -> Result<RunOutcome, DequantError> {
    if !scheme.nizk().verify(&lease.statement(), &lease.proof) {
        return Ok(RunOutcome { output: None, proof_ok: false, membership_bits: None });
    }
    let bits = scheme.project_quantum_part(&lease.g, &lease.g_perp, &mut lease.quantum, rng);
    if bits != (1, 1) {
        return Ok(RunOutcome { output: None, proof_ok: true, membership_bits: Some(bits) });
    }
    let y = lease.circuit.eval(x)?;
    Ok(RunOutcome { output: Some(y), proof_ok: true, membership_bits: Some(bits) })
}

/// Check for family leases.
pub fn family_check(
    scheme: &SslScheme,
    sk: &SecretKey,
    lease: &mut FamilyLease,
    rng: &mut impl RngCore,
) -> Result<u8, DequantError> {
    Ok(scheme.check_state(sk, &mut lease.quantum, rng)?)
}

// ---------------------------------------------------------------------------
// The lease-breaking pirate and the oracle-learner baseline
// ---------------------------------------------------------------------------

/// What the pirate hands back: the (barely disturbed) original stays with
/// the caller; the fresh copy is leased under the pirate's own key.
pub struct PirateBreak {
    pub reconstructed: DequantumizableCircuit,
    pub fresh_sk: SecretKey,
    pub fresh_lease: FamilyLease,
    pub recovered_state_ok: bool,
}

/// The impossibility pirate: extract the circuit through the lease's Run
/// interface (zero query plus homomorphic evaluation only), generate a
/// fresh key, and lease the reconstruction. The original lease is left
/// essentially undisturbed and still passes the lessor's Check.
pub fn ssl_breaking_pirate(
    scheme: &mut SslScheme,
    ctx: &DequantContext,
    lease: &mut FamilyLease,
    rng: &mut ChaCha12Rng,
) -> Result<PirateBreak, DequantError> {
    let extraction = {
        let program = FamilyLeaseProgram {
            scheme: &*scheme,
            lease: &mut *lease,
            rng: crate::rng::substream(rng.next_u64(), 1),
        };
        let mut implementation =
            QuantumImplementation::new(program, crate::rng::substream(rng.next_u64(), 2));
        attack_extract(&mut implementation, ctx, rng)?
    };
    let fresh_sk = scheme.gen(rng)?;
    let fresh_lease = family_lessor(scheme, &fresh_sk, &extraction.circuit, rng)?;
    Ok(PirateBreak {
        reconstructed: extraction.circuit,
        fresh_sk,
        fresh_lease,
        recovered_state_ok: extraction.recovered_state_ok,
    })
}

/// A learner's guess at the family circuit, assembled purely from oracle
/// answers. It evaluates branch-for-branch; full functional equality holds
/// exactly when the accepting point was hit.
#[derive(Debug, Clone)]
pub struct LearnedCircuit {
    pub n: usize,
    pub m: usize,
    pub branch1: Bits,
    pub a: Bits,
    pub b_padded: Bits,
}

impl LearnedCircuit {
    pub fn eval(&self, x: &Bits) -> Bits {
        if x.is_zero() {
            self.branch1.clone()
        } else if *x == self.a {
            self.b_padded.clone()
        } else {
            Bits::zeros(self.m)
        }
    }
}

/// Classical-oracle learner baseline: `budget` queries (the zero query
/// first, then the planted query if any, then uniform guesses). Succeeds
/// only when a query hits the accepting point.
pub fn oracle_learner_baseline(
    circuit: &DequantumizableCircuit,
    budget: u64,
    planted: Option<Bits>,
    rng: &mut impl RngCore,
) -> Result<Option<LearnedCircuit>, DequantError> {
    if budget == 0 {
        return Ok(None);
    }
    let n = circuit.n();
    let m = circuit.m();
    let branch1 = circuit.eval(&Bits::zeros(n))?;
    let mut queries_left = budget - 1;
    let try_query = |x: &Bits| -> Result<Option<LearnedCircuit>, DequantError> {
        let out = circuit.eval(x)?;
        if !x.is_zero() && !out.is_zero() {
            return Ok(Some(LearnedCircuit {
                n,
                m,
                branch1: branch1.clone(),
                a: x.clone(),
                b_padded: out,
            }));
        }
        Ok(None)
    };
    if let Some(x) = planted {
        if queries_left > 0 {
            queries_left -= 1;
            if let Some(found) = try_query(&x)? {
                return Ok(Some(found));
            }
        }
    }
    for _ in 0..queries_left {
        let x = Bits::random(n, rng);
        if let Some(found) = try_query(&x)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests;
