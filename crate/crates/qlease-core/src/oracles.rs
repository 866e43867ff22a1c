//! Idealized and toy realizations of the four consumed primitives:
//! subspace-hiding obfuscation, input-hiding obfuscation, lockable
//! obfuscation, and a simulation-extractable NIZK.
//!
//! Two modes per primitive. `Ideal` enforces the functionality inside the
//! harness (handles carry sealed material the API never exposes); `Toy`
//! realizes commitments with a salted SHA-256 digest and keystream sealing,
//! which gives budget-limited adversaries a concrete surface to attack.
//! Neither mode carries a cryptographic hardness claim.

use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::bits::Bits;
use crate::circuits::{BooleanCircuit, CncCircuit};
use crate::codec::{get_block, put_block, Reader};
use crate::field::Subspace;
use crate::rng::substream;
use crate::toycrypto::{self, digest};

/// Stream id under which obfuscation seeds are expanded.
const OBF_STREAM: u64 = 0x0bf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Ideal,
    Toy,
}

impl OracleMode {
    pub fn name(&self) -> &'static str {
        match self {
            OracleMode::Ideal => "ideal",
            OracleMode::Toy => "toy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// Subspace dimension outside the d₀/d₁ regime (λ/2 or 3λ/4).
    DimensionRegime { dim: usize, lambda: usize },
    /// Operation requires the other oracle mode.
    ModeRequired(OracleMode),
    UnknownRelation,
    /// Prove called with a witness that does not satisfy the relation.
    ProveRefused,
    /// Extraction attempted on a rejecting proof.
    ExtractOnRejectingProof,
    /// Extraction attempted on a simulated proof.
    ExtractOnSimulatedProof,
    /// Trapdoor does not belong to this CRS.
    TrapdoorMismatch,
    MalformedWitness,
    /// The oracle was rebuilt from its public state and cannot prove.
    VerifyOnly,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::DimensionRegime { dim, lambda } => {
                write!(f, "subspace dim {} outside the λ/2, 3λ/4 regime for λ = {}", dim, lambda)
            }
            OracleError::ModeRequired(m) => write!(f, "operation requires {} oracle mode", m.name()),
            OracleError::UnknownRelation => write!(f, "relation not registered with the oracle"),
            OracleError::ProveRefused => write!(f, "witness does not satisfy the relation"),
            OracleError::ExtractOnRejectingProof => write!(f, "cannot extract from a rejecting proof"),
            OracleError::ExtractOnSimulatedProof => write!(f, "cannot extract from a simulated proof"),
            OracleError::TrapdoorMismatch => write!(f, "trapdoor does not match this CRS"),
            OracleError::MalformedWitness => write!(f, "sealed witness record is malformed"),
            OracleError::VerifyOnly => write!(f, "oracle was imported verify-only"),
        }
    }
}

fn seed_material(seed: u64) -> (u64, [u8; 16]) {
    let mut rng = substream(seed, OBF_STREAM);
    let token = rng.next_u64();
    let mut salt = [0u8; 16];
    rng.fill_bytes(&mut salt);
    (token, salt)
}

// ---------------------------------------------------------------------------
// Subspace-hiding obfuscation
// ---------------------------------------------------------------------------

/// A membership checker for a subspace. The basis is sealed harness
/// bookkeeping: the public API only answers membership queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceObfHandle {
    token: u64,
    mode: OracleMode,
    sealed_basis: Subspace,
}

impl SubspaceObfHandle {
    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn lambda(&self) -> usize {
        self.sealed_basis.params().lambda()
    }

    /// The membership function `1_A(x)`.
    pub fn eval(&self, v: &crate::field::FieldVector) -> bool {
        self.sealed_basis.contains(v).unwrap_or(false)
    }

    /// Harness-side access for forming the Run projector and for
    /// serializing the sealed registry. Ideal-functionality bookkeeping,
    /// not part of the obfuscation API.
    pub fn sealed_subspace(&self) -> &Subspace {
        &self.sealed_basis
    }

    /// Serialized form used inside NIZK statements: kind, mode, token.
    /// The handle embeds only its registry key, never the basis.
    pub fn encode_statement(&self) -> Vec<u8> {
        let mut out = alloc::vec![b's'];
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        out.extend_from_slice(&self.token.to_le_bytes());
        out
    }
}

impl SubspaceObfHandle {
    /// Registry record: token, mode, and the sealed basis.
    pub fn export_sealed(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.token.to_le_bytes());
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        put_block(&mut out, &self.sealed_basis.encode_canonical());
        out
    }

    pub fn import_sealed(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let token = r.u64()?;
        let mode = match r.u8()? {
            0 => OracleMode::Ideal,
            1 => OracleMode::Toy,
            _ => return None,
        };
        let sealed_basis = Subspace::decode_canonical(&mut Reader::new(get_block(&mut r)?))?;
        Some(SubspaceObfHandle { token, mode, sealed_basis })
    }
}

/// Deterministic obfuscation call: the same `(A, mode, seed)` reproduces the
/// handle bit for bit, which is what makes the NIZK re-derivation conjuncts
/// checkable.
pub fn sho_obf_seeded(
    a: &Subspace,
    mode: OracleMode,
    seed: u64,
) -> Result<SubspaceObfHandle, OracleError> {
    let lambda = a.params().lambda();
    let dim = a.dim();
    if 2 * dim != lambda && 4 * dim != 3 * lambda {
        return Err(OracleError::DimensionRegime { dim, lambda });
    }
    let (token, _salt) = seed_material(seed);
    Ok(SubspaceObfHandle { token, mode, sealed_basis: a.clone() })
}

/// Fresh obfuscation; returns the handle together with the seed that
/// reproduces it (recorded by the lessor as witness randomness).
pub fn sho_obf(
    a: &Subspace,
    mode: OracleMode,
    rng: &mut impl RngCore,
) -> Result<(SubspaceObfHandle, u64), OracleError> {
    let seed = rng.next_u64();
    Ok((sho_obf_seeded(a, mode, seed)?, seed))
}

/// One round of the subspace-hiding security game, exposed for
/// documentation tests only: the challenger flips a bit and obfuscates
/// either the adversary's d₀-dimensional `A` or a uniformly random
/// d₁-dimensional superspace of it. No hardness is claimed.
pub struct ShoChallenge {
    pub handle: SubspaceObfHandle,
    pub challenger_bit: u8,
}

pub fn sho_security_game(
    a: &Subspace,
    d1: usize,
    mode: OracleMode,
    rng: &mut impl RngCore,
) -> Result<ShoChallenge, OracleError> {
    let lambda = a.params().lambda();
    if d1 < a.dim() || d1 > lambda {
        return Err(OracleError::DimensionRegime { dim: d1, lambda });
    }
    let superspace = loop {
        let mut rows: Vec<Vec<u8>> = a.basis().rows().to_vec();
        for _ in 0..(d1 - a.dim()) {
            rows.push(crate::field::FieldVector::random(a.params(), rng).coords().to_vec());
        }
        let gen = crate::field::FieldMatrix::new(a.params(), rows).expect("ambient dims match");
        let s = Subspace::from_generators(&gen);
        if s.dim() == d1 {
            break s;
        }
    };
    let bit = (rng.next_u32() & 1) as u8;
    let seed = rng.next_u64();
    let chosen = if bit == 0 { a } else { &superspace };
    Ok(ShoChallenge { handle: sho_obf_seeded(chosen, mode, seed)?, challenger_bit: bit })
}

// ---------------------------------------------------------------------------
// Input-hiding obfuscation for compute-and-compare circuits
// ---------------------------------------------------------------------------

/// Obfuscation of `C[C, α]`: the inner circuit stays in the clear and the
/// lock is committed to behind a salted digest (toy) or sealed registry
/// material (ideal).
#[derive(Debug, Clone, PartialEq)]
pub struct InputHidingObfHandle {
    token: u64,
    mode: OracleMode,
    inner: BooleanCircuit,
    /// Salted digest commitment to the lock; present in toy mode.
    point_obf: Option<([u8; 16], [u8; 32])>,
    /// Multi-bit payload sealed under a lock-derived key (toy mode).
    sealed_msg: Option<Bits>,
    msg_len: Option<usize>,
    /// Ideal-functionality bookkeeping: the full circuit, never exposed.
    sealed_circuit: CncCircuit,
}

impl InputHidingObfHandle {
    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn inner(&self) -> &BooleanCircuit {
        &self.inner
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn m(&self) -> usize {
        self.inner.m()
    }

    pub fn output_len(&self) -> usize {
        self.msg_len.unwrap_or(1)
    }

    pub fn salt(&self) -> Option<&[u8; 16]> {
        self.point_obf.as_ref().map(|(s, _)| s)
    }

    pub fn lock_digest(&self) -> Option<&[u8; 32]> {
        self.point_obf.as_ref().map(|(_, d)| d)
    }

    /// Registry bookkeeping for the serialization layer.
    pub fn sealed_circuit(&self) -> &CncCircuit {
        &self.sealed_circuit
    }

    /// Statement serialization: kind, mode, token, inner circuit, and (toy
    /// mode) the commitment fields. Sealed material never appears.
    pub fn encode_statement(&self) -> Vec<u8> {
        let mut out = alloc::vec![b'c'];
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        out.extend_from_slice(&self.token.to_le_bytes());
        put_block(&mut out, &self.inner.encode_canonical());
        if let Some((salt, dig)) = &self.point_obf {
            out.push(1);
            out.extend_from_slice(salt);
            out.extend_from_slice(dig);
        } else {
            out.push(0);
        }
        if let Some(sealed) = &self.sealed_msg {
            out.push(1);
            out.extend_from_slice(&(sealed.len() as u32).to_le_bytes());
            out.extend_from_slice(&sealed.to_bytes());
        } else {
            out.push(0);
        }
        out
    }

    /// The serialized bytes that must not depend on the lock: everything
    /// except salt, digest, and sealed payload.
    pub fn encode_lock_independent(&self) -> Vec<u8> {
        let mut out = alloc::vec![b'c'];
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        out.extend_from_slice(&self.token.to_le_bytes());
        put_block(&mut out, &self.inner.encode_canonical());
        out.extend_from_slice(&(self.msg_len.unwrap_or(0) as u32).to_le_bytes());
        out
    }
}

impl InputHidingObfHandle {
    /// Registry record: everything needed to rebuild the handle, sealed
    /// circuit included.
    pub fn export_sealed(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.token.to_le_bytes());
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        match &self.point_obf {
            Some((salt, dig)) => {
                out.push(1);
                out.extend_from_slice(salt);
                out.extend_from_slice(dig);
            }
            None => out.push(0),
        }
        match &self.sealed_msg {
            Some(sealed) => {
                out.push(1);
                out.extend_from_slice(&(sealed.len() as u32).to_le_bytes());
                out.extend_from_slice(&sealed.to_bytes());
            }
            None => out.push(0),
        }
        put_block(&mut out, &self.sealed_circuit.encode_canonical());
        out
    }

    pub fn import_sealed(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let token = r.u64()?;
        let mode = match r.u8()? {
            0 => OracleMode::Ideal,
            1 => OracleMode::Toy,
            _ => return None,
        };
        let point_obf = match r.u8()? {
            0 => None,
            1 => {
                let salt: [u8; 16] = r.bytes(16)?.try_into().ok()?;
                let dig: [u8; 32] = r.bytes(32)?.try_into().ok()?;
                Some((salt, dig))
            }
            _ => return None,
        };
        let sealed_msg = match r.u8()? {
            0 => None,
            1 => {
                let len = r.u32()? as usize;
                Some(Bits::from_bytes(r.bytes(len.div_ceil(8))?, len))
            }
            _ => return None,
        };
        let sealed_circuit = CncCircuit::decode_canonical(&mut Reader::new(get_block(&mut r)?))?;
        Some(InputHidingObfHandle {
            token,
            mode,
            inner: sealed_circuit.inner().clone(),
            point_obf,
            sealed_msg,
            msg_len: sealed_circuit.msg().map(Bits::len),
            sealed_circuit,
        })
    }
}

fn qiho_msg_key(salt: &[u8; 16], lock: &Bits) -> [u8; 32] {
    digest(&[b"qiho-msg", salt, &(lock.len() as u64).to_le_bytes(), &lock.to_bytes()])
}

fn qiho_lock_digest(salt: &[u8; 16], lock: &Bits) -> [u8; 32] {
    digest(&[b"qiho-lock", salt, &(lock.len() as u64).to_le_bytes(), &lock.to_bytes()])
}

pub fn qiho_obf_seeded(c: &CncCircuit, mode: OracleMode, seed: u64) -> InputHidingObfHandle {
    let (token, salt) = seed_material(seed);
    let (point_obf, sealed_msg) = match mode {
        OracleMode::Ideal => (None, None),
        OracleMode::Toy => {
            let dig = qiho_lock_digest(&salt, c.lock());
            let sealed =
                c.msg().map(|msg| toycrypto::seal(&qiho_msg_key(&salt, c.lock())[..16], token, msg));
            (Some((salt, dig)), sealed)
        }
    };
    InputHidingObfHandle {
        token,
        mode,
        inner: c.inner().clone(),
        point_obf,
        sealed_msg,
        msg_len: c.msg().map(Bits::len),
        sealed_circuit: c.clone(),
    }
}

pub fn qiho_obf(
    c: &CncCircuit,
    mode: OracleMode,
    rng: &mut impl RngCore,
) -> (InputHidingObfHandle, u64) {
    let seed = rng.next_u64();
    (qiho_obf_seeded(c, mode, seed), seed)
}

/// Functional evaluation: agrees with `CncCircuit::eval` of the obfuscated
/// circuit on every input.
pub fn qiho_eval(h: &InputHidingObfHandle, x: &Bits) -> Result<Bits, crate::circuits::CircuitError> {
    let alpha_prime = h.inner.eval(x)?;
    let hit = match (h.mode, &h.point_obf) {
        (OracleMode::Toy, Some((salt, dig))) => qiho_lock_digest(salt, &alpha_prime) == *dig,
        _ => h.sealed_circuit.lock() == &alpha_prime,
    };
    Ok(match (h.msg_len, hit) {
        (None, hit) => Bits::from_bits(alloc::vec![u8::from(hit)]),
        (Some(len), false) => Bits::zeros(len),
        (Some(len), true) => match h.mode {
            OracleMode::Ideal => h.sealed_circuit.msg().expect("msg_len implies msg").clone(),
            OracleMode::Toy => {
                let salt = h.point_obf.as_ref().map(|(s, _)| s).expect("toy mode has commitment");
                let key = qiho_msg_key(salt, &alpha_prime);
                h.sealed_msg
                    .as_ref()
                    .and_then(|sealed| toycrypto::open(&key[..16], sealed, len))
                    .unwrap_or_else(|| Bits::zeros(len))
            }
        },
    })
}

// ---------------------------------------------------------------------------
// Lockable obfuscation
// ---------------------------------------------------------------------------

/// Obfuscation of "output β iff C(x) = α". The payload is sealed under a
/// lock-derived keystream with an integrity tag, so a wrong lock yields ⊥
/// and never a wrong β.
#[derive(Debug, Clone, PartialEq)]
pub struct LockableObfHandle {
    token: u64,
    mode: OracleMode,
    inner: BooleanCircuit,
    salt: [u8; 16],
    lock_digest: [u8; 32],
    sealed_payload: Bits,
    payload_len: usize,
    /// Ideal-functionality bookkeeping.
    sealed_lock: Bits,
    sealed_beta: Bits,
}

impl LockableObfHandle {
    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn inner(&self) -> &BooleanCircuit {
        &self.inner
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn salt(&self) -> &[u8; 16] {
        &self.salt
    }

    pub fn lock_digest_bytes(&self) -> &[u8; 32] {
        &self.lock_digest
    }

    pub fn encode_lock_independent(&self) -> Vec<u8> {
        let mut out = alloc::vec![b'l'];
        out.push(match self.mode {
            OracleMode::Ideal => 0,
            OracleMode::Toy => 1,
        });
        out.extend_from_slice(&self.token.to_le_bytes());
        put_block(&mut out, &self.inner.encode_canonical());
        out.extend_from_slice(&(self.payload_len as u32).to_le_bytes());
        out
    }
}

fn lo_lock_key(salt: &[u8; 16], alpha: &Bits) -> [u8; 32] {
    digest(&[b"lo-key", salt, &(alpha.len() as u64).to_le_bytes(), &alpha.to_bytes()])
}

fn lo_lock_digest(salt: &[u8; 16], alpha: &Bits) -> [u8; 32] {
    digest(&[b"lo-lock", salt, &(alpha.len() as u64).to_le_bytes(), &alpha.to_bytes()])
}

pub fn lo_obf_seeded(
    inner: &BooleanCircuit,
    alpha: &Bits,
    beta: &Bits,
    mode: OracleMode,
    seed: u64,
) -> Result<LockableObfHandle, crate::circuits::CircuitError> {
    if alpha.len() != inner.m() {
        return Err(crate::circuits::CircuitError::LengthMismatch {
            expected: inner.m(),
            got: alpha.len(),
        });
    }
    let (token, salt) = seed_material(seed);
    Ok(LockableObfHandle {
        token,
        mode,
        inner: inner.clone(),
        salt,
        lock_digest: lo_lock_digest(&salt, alpha),
        sealed_payload: toycrypto::seal(&lo_lock_key(&salt, alpha)[..16], token, beta),
        payload_len: beta.len(),
        sealed_lock: alpha.clone(),
        sealed_beta: beta.clone(),
    })
}

pub fn lo_obf(
    inner: &BooleanCircuit,
    alpha: &Bits,
    beta: &Bits,
    mode: OracleMode,
    rng: &mut impl RngCore,
) -> Result<(LockableObfHandle, u64), crate::circuits::CircuitError> {
    let seed = rng.next_u64();
    Ok((lo_obf_seeded(inner, alpha, beta, mode, seed)?, seed))
}

/// Returns β exactly on `{x : C(x) = α}`, `None` (⊥) elsewhere.
pub fn lo_eval(
    h: &LockableObfHandle,
    x: &Bits,
) -> Result<Option<Bits>, crate::circuits::CircuitError> {
    let a_prime = h.inner.eval(x)?;
    Ok(match h.mode {
        OracleMode::Ideal => {
            if a_prime == h.sealed_lock {
                Some(h.sealed_beta.clone())
            } else {
                None
            }
        }
        OracleMode::Toy => {
            if lo_lock_digest(&h.salt, &a_prime) != h.lock_digest {
                None
            } else {
                // Digest hit: unseal with the candidate-derived key; the
                // integrity tag still guards against collisions.
                toycrypto::open(&lo_lock_key(&h.salt, &a_prime)[..16], &h.sealed_payload, h.payload_len)
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Simulation-extractable NIZK (ideal functionality)
// ---------------------------------------------------------------------------

/// Relation checker over canonical statement/witness bytes.
pub type RelationCheck = fn(&[u8], &[u8]) -> bool;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NizkCrs {
    crs_id: u64,
    relation_ids: Vec<&'static str>,
}

impl NizkCrs {
    pub fn relation_ids(&self) -> &[&'static str] {
        &self.relation_ids
    }

    pub fn crs_id(&self) -> u64 {
        self.crs_id
    }
}

/// Extraction key, available only from the fake-setup path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NizkTrapdoor {
    crs_id: u64,
    key: [u8; 16],
}

/// A proof: statement digest, a per-proof token, and the witness sealed to
/// the trapdoor. `simulated` marks Sim₁ output.
#[derive(Debug, Clone, PartialEq)]
pub struct NizkProof {
    relation_id: alloc::string::String,
    statement_digest: [u8; 32],
    token: u64,
    sealed_witness: Bits,
    simulated: bool,
}

impl NizkProof {
    pub fn relation_id(&self) -> &str {
        &self.relation_id
    }

    pub fn statement_digest(&self) -> &[u8; 32] {
        &self.statement_digest
    }

    pub fn token(&self) -> u64 {
        self.token
    }

    pub fn is_simulated(&self) -> bool {
        self.simulated
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_block(&mut out, self.relation_id.as_bytes());
        out.extend_from_slice(&self.statement_digest);
        out.extend_from_slice(&self.token.to_le_bytes());
        out.push(u8::from(self.simulated));
        out.extend_from_slice(&(self.sealed_witness.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.sealed_witness.to_bytes());
        out
    }

    pub fn decode(r: &mut Reader<'_>) -> Option<Self> {
        let relation_id = alloc::string::String::from_utf8(get_block(r)?.to_vec()).ok()?;
        let statement_digest: [u8; 32] = r.bytes(32)?.try_into().ok()?;
        let token = r.u64()?;
        let simulated = r.u8()? == 1;
        let len = r.u32()? as usize;
        let sealed_witness = Bits::from_bytes(r.bytes(len.div_ceil(8))?, len);
        Some(NizkProof { relation_id, statement_digest, token, sealed_witness, simulated })
    }
}

/// The ideal NIZK functionality: verification accepts exactly the proofs
/// this oracle issued for their statements, and an accepting,
/// non-simulated proof always yields a satisfying witness under the
/// trapdoor. The issued-proof table is the single shared registry; all
/// mutation goes through `&mut self`.
pub struct NizkOracle {
    crs: NizkCrs,
    relations: alloc::collections::BTreeMap<&'static str, RelationCheck>,
    seal_key: [u8; 16],
    trapdoor_issued: bool,
    verify_only: bool,
    issued: alloc::collections::BTreeMap<([u8; 32], u64), NizkProof>,
}

impl NizkOracle {
    /// Honest setup: no trapdoor is ever handed out.
    pub fn crsgen(relation_id: &'static str, relation: RelationCheck, rng: &mut impl RngCore) -> Self {
        let mut seal_key = [0u8; 16];
        rng.fill_bytes(&mut seal_key);
        let mut relations = alloc::collections::BTreeMap::new();
        relations.insert(relation_id, relation);
        NizkOracle {
            crs: NizkCrs { crs_id: rng.next_u64(), relation_ids: alloc::vec![relation_id] },
            relations,
            seal_key,
            trapdoor_issued: false,
            verify_only: false,
            issued: alloc::collections::BTreeMap::new(),
        }
    }

    /// Fake setup: same CRS distribution plus the extraction trapdoor.
    pub fn fkgen(
        relation_id: &'static str,
        relation: RelationCheck,
        rng: &mut impl RngCore,
    ) -> (Self, NizkTrapdoor) {
        let mut oracle = Self::crsgen(relation_id, relation, rng);
        oracle.trapdoor_issued = true;
        let td = NizkTrapdoor { crs_id: oracle.crs.crs_id, key: oracle.seal_key };
        (oracle, td)
    }

    /// Register an additional relation under this CRS.
    pub fn register_relation(&mut self, relation_id: &'static str, relation: RelationCheck) {
        if self.relations.insert(relation_id, relation).is_none() {
            self.crs.relation_ids.push(relation_id);
        }
    }

    pub fn crs(&self) -> &NizkCrs {
        &self.crs
    }

    pub fn issued_count(&self) -> usize {
        self.issued.len()
    }

    fn statement_digest(&self, relation_id: &str, statement: &[u8]) -> [u8; 32] {
        digest(&[b"stmt", &self.crs.crs_id.to_le_bytes(), relation_id.as_bytes(), statement])
    }

    /// Prove knowledge of a satisfying witness. The ideal functionality
    /// refuses non-satisfying witnesses outright.
    pub fn prove(
        &mut self,
        relation_id: &'static str,
        statement: &[u8],
        witness: &[u8],
        rng: &mut impl RngCore,
    ) -> Result<NizkProof, OracleError> {
        if self.verify_only {
            return Err(OracleError::VerifyOnly);
        }
        let relation = self.relations.get(relation_id).ok_or(OracleError::UnknownRelation)?;
        if !relation(statement, witness) {
            return Err(OracleError::ProveRefused);
        }
        let token = rng.next_u64();
        let witness_bits = Bits::from_bytes(witness, witness.len() * 8);
        let proof = NizkProof {
            relation_id: alloc::string::String::from(relation_id),
            statement_digest: self.statement_digest(relation_id, statement),
            token,
            sealed_witness: toycrypto::seal(&self.seal_key, token, &witness_bits),
            simulated: false,
        };
        self.issued.insert((proof.statement_digest, token), proof.clone());
        Ok(proof)
    }

    /// Sim₁: prove without a witness. Only the fake setup can do this, and
    /// the proof is marked simulated (extraction on it is refused).
    pub fn prove_simulated(
        &mut self,
        relation_id: &'static str,
        statement: &[u8],
        rng: &mut impl RngCore,
    ) -> Result<NizkProof, OracleError> {
        if self.verify_only {
            return Err(OracleError::VerifyOnly);
        }
        if !self.trapdoor_issued {
            return Err(OracleError::ModeRequired(OracleMode::Ideal));
        }
        if !self.relations.contains_key(relation_id) {
            return Err(OracleError::UnknownRelation);
        }
        let token = rng.next_u64();
        let proof = NizkProof {
            relation_id: alloc::string::String::from(relation_id),
            statement_digest: self.statement_digest(relation_id, statement),
            token,
            sealed_witness: toycrypto::seal(&self.seal_key, token, &Bits::zeros(8)),
            simulated: true,
        };
        self.issued.insert((proof.statement_digest, token), proof.clone());
        Ok(proof)
    }

    /// Deterministic, stateless verification against the issued-proof table:
    /// accepts exactly the proofs produced by this oracle for `statement`.
    pub fn verify(&self, statement: &[u8], proof: &NizkProof) -> bool {
        let dig = self.statement_digest(&proof.relation_id, statement);
        if proof.statement_digest != dig {
            return false;
        }
        match self.issued.get(&(dig, proof.token)) {
            Some(issued) => issued == proof,
            None => false,
        }
    }

    /// Sim₂: recover the sealed witness from an accepting, non-simulated
    /// proof and re-check the relation before returning it.
    pub fn extract(
        &self,
        trapdoor: &NizkTrapdoor,
        statement: &[u8],
        proof: &NizkProof,
    ) -> Result<Vec<u8>, OracleError> {
        if trapdoor.crs_id != self.crs.crs_id {
            return Err(OracleError::TrapdoorMismatch);
        }
        if !self.verify(statement, proof) {
            return Err(OracleError::ExtractOnRejectingProof);
        }
        if proof.simulated {
            return Err(OracleError::ExtractOnSimulatedProof);
        }
        let relation = self
            .relations
            .get(proof.relation_id.as_str())
            .ok_or(OracleError::UnknownRelation)?;
        let msg_len = proof
            .sealed_witness
            .len()
            .checked_sub(toycrypto::sealed_len_bits(0))
            .ok_or(OracleError::MalformedWitness)?;
        let opened = toycrypto::open(&trapdoor.key, &proof.sealed_witness, msg_len)
            .ok_or(OracleError::MalformedWitness)?;
        let witness = opened.to_bytes();
        if !relation(statement, &witness) {
            return Err(OracleError::MalformedWitness);
        }
        Ok(witness)
    }
}

impl NizkOracle {
    /// Serialize the public verification state: CRS id and the issued-proof
    /// table. The sealing key never leaves the oracle.
    pub fn export_public(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.crs.crs_id.to_le_bytes());
        out.extend_from_slice(&(self.issued.len() as u32).to_le_bytes());
        for proof in self.issued.values() {
            put_block(&mut out, &proof.encode());
        }
        out
    }

    /// Rebuild a verify-only oracle from its public state; prove and
    /// simulate are refused on the result.
    pub fn import_public(
        relations: &[(&'static str, RelationCheck)],
        bytes: &[u8],
    ) -> Option<Self> {
        let mut r = Reader::new(bytes);
        let crs_id = r.u64()?;
        let count = r.u32()? as usize;
        let mut issued = alloc::collections::BTreeMap::new();
        for _ in 0..count {
            let proof = NizkProof::decode(&mut Reader::new(get_block(&mut r)?))?;
            issued.insert((proof.statement_digest, proof.token), proof);
        }
        let mut relation_map = alloc::collections::BTreeMap::new();
        let mut relation_ids = Vec::new();
        for (id, check) in relations {
            relation_map.insert(*id, *check);
            relation_ids.push(*id);
        }
        Some(NizkOracle {
            crs: NizkCrs { crs_id, relation_ids },
            relations: relation_map,
            seal_key: [0u8; 16],
            trapdoor_issued: false,
            verify_only: true,
            issued,
        })
    }
}

impl fmt::Debug for NizkOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "NizkOracle(relations={}, issued={}, trapdoor={})",
            self.relations.len(),
            self.issued.len(),
            self.trapdoor_issued
        )
    }
}

/// Compose a multi-part NIZK statement with unambiguous framing.
pub fn statement_bytes(parts: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in parts {
        put_block(&mut out, p);
    }
    out
}

/// Split a statement back into its parts.
pub fn statement_parts(statement: &[u8]) -> Option<Vec<Vec<u8>>> {
    let mut r = Reader::new(statement);
    let mut parts = Vec::new();
    while !r.is_exhausted() {
        parts.push(get_block(&mut r)?.to_vec());
    }
    Some(parts)
}
