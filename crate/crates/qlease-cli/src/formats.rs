//! File formats: circuit and subspace JSON, the binary state dump, and the
//! lease bundle (public CRS state with the oracle registry, the lease's
//! classical part, the lessor's private key).
//!
//! Serialized ideal-mode handles embed a registry key (their token); the
//! sealed records live in the CRS file's registry, which stands in for the
//! ideal functionality's bookkeeping across processes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use qlease_core::bits::Bits;
use qlease_core::circuits::{BooleanCircuit, CircuitBody, CncCircuit, SearchTag, ToyPermutation};
use qlease_core::codec::Reader;
use qlease_core::field::{FieldMatrix, FieldParams, Subspace};
use qlease_core::oracles::{InputHidingObfHandle, NizkProof, SubspaceObfHandle};
use qlease_core::rng::substream;
use qlease_core::scheme::{ClassicalPart, LeasedState};
use qlease_core::sim::PureState;

use crate::SCHEMA_VERSION;

pub const STATE_MAGIC: &[u8; 4] = b"QLSV";

// ---------------------------------------------------------------------------
// Bit/hex helpers
// ---------------------------------------------------------------------------

pub fn bits_to_hex(bits: &Bits) -> String {
    hex::encode(bits.to_bytes())
}

pub fn bits_from_hex(s: &str, len: usize) -> Result<Bits> {
    let bytes = hex::decode(s).context("invalid hex string")?;
    if bytes.len() != len.div_ceil(8) {
        bail!("hex payload holds {} bytes, expected {} for {} bits", bytes.len(), len.div_ceil(8), len);
    }
    Ok(Bits::from_bytes(&bytes, len))
}

/// Parse a binary literal like "0101" (preferred for --input).
pub fn bits_from_binary(s: &str) -> Result<Bits> {
    let mut out = Vec::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '0' => out.push(0),
            '1' => out.push(1),
            _ => bail!("input must be a binary string, got {:?}", c),
        }
    }
    Ok(Bits::from_bits(out))
}

// ---------------------------------------------------------------------------
// Subspace JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct SubspaceFile {
    pub q: u8,
    pub lambda: usize,
    pub basis: Vec<Vec<u8>>,
}

impl SubspaceFile {
    pub fn from_subspace(s: &Subspace) -> Self {
        SubspaceFile {
            q: s.params().q(),
            lambda: s.params().lambda(),
            basis: s.basis().rows().to_vec(),
        }
    }

    /// Returns the subspace and whether the stored basis was already the
    /// canonical RREF representative; callers warn when it was not.
    pub fn to_subspace(&self) -> Result<(Subspace, bool)> {
        let params = FieldParams::new(self.q, self.lambda).map_err(|e| anyhow!("{}", e))?;
        let gen = FieldMatrix::new(params, self.basis.clone()).map_err(|e| anyhow!("{}", e))?;
        let subspace = Subspace::from_generators(&gen);
        let canonical = subspace.basis().rows() == self.basis.as_slice();
        Ok((subspace, canonical))
    }
}

// ---------------------------------------------------------------------------
// Circuit JSON
// ---------------------------------------------------------------------------

/// On-disk circuit description: `{kind, n, m, lock (hex), …}` with
/// kind-specific payload fields. Truth tables are hex strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub kind: String,
    pub n: usize,
    pub m: usize,
    pub lock: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msg_len: Option<usize>,
    /// Wildcard index set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep: Option<Vec<usize>>,
    /// Affine tester: field modulus and matrix rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<u8>>>,
    /// Plaintext-equality checker: seed of the keyed permutation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perm_seed: Option<u64>,
    /// Explicit truth table, one hex string per input index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
}

/// Stream id under which permutation seeds are expanded.
const PERM_STREAM: u64 = 0x9e2;

impl CircuitFile {
    pub fn to_circuit(&self) -> Result<CncCircuit> {
        let lock = bits_from_hex(&self.lock, self.m)?;
        let msg = match (&self.msg, self.msg_len) {
            (Some(hex), Some(len)) => Some(bits_from_hex(hex, len)?),
            (None, None) => None,
            _ => bail!("msg and msg_len must be given together"),
        };
        let (body, tag) = match self.kind.as_str() {
            "point" => {
                if self.m != self.n {
                    bail!("point circuits need m == n");
                }
                (CircuitBody::Identity, SearchTag::Point)
            }
            "wildcard" => {
                let keep: std::collections::BTreeSet<usize> =
                    self.keep.clone().context("wildcard circuits need keep")?.into_iter().collect();
                (CircuitBody::Project { keep: keep.clone() }, SearchTag::Wildcard { keep })
            }
            "affine" => {
                let q = self.q.context("affine circuits need q")?;
                let rows = self.rows.clone().context("affine circuits need rows")?;
                let cols = rows.first().map(Vec::len).unwrap_or(0);
                let params = FieldParams::new(q, cols).map_err(|e| anyhow!("{}", e))?;
                let matrix = FieldMatrix::new(params, rows).map_err(|e| anyhow!("{}", e))?;
                let bps = bits_per_symbol(q);
                (CircuitBody::AffineMap { matrix, bits_per_symbol: bps }, SearchTag::Affine)
            }
            "plaintext_eq" => {
                let seed = self.perm_seed.context("plaintext_eq circuits need perm_seed")?;
                let mut rng = substream(seed, PERM_STREAM);
                let perm = ToyPermutation::generate(self.n, &mut rng).map_err(|e| anyhow!("{}", e))?;
                (CircuitBody::PermutationDecrypt { perm }, SearchTag::PlaintextEq)
            }
            "truth_table" => {
                let hexes = self.outputs.clone().context("truth_table circuits need outputs")?;
                if hexes.len() != 1usize << self.n {
                    bail!("truth table needs {} outputs, got {}", 1usize << self.n, hexes.len());
                }
                let outputs = hexes
                    .iter()
                    .map(|h| bits_from_hex(h, self.m))
                    .collect::<Result<Vec<_>>>()?;
                // No generic search algorithm for raw tables.
                let inner = BooleanCircuit::new(self.n, self.m, CircuitBody::TruthTable { outputs })
                    .map_err(|e| anyhow!("{}", e))?;
                return CncCircuit::new(inner, lock, msg, None).map_err(|e| anyhow!("{}", e));
            }
            other => bail!("unknown circuit kind {}", other),
        };
        let inner = BooleanCircuit::new(self.n, self.m, body).map_err(|e| anyhow!("{}", e))?;
        CncCircuit::new(inner, lock, msg, Some(tag)).map_err(|e| anyhow!("{}", e))
    }

    pub fn from_circuit(c: &CncCircuit, perm_seed: Option<u64>) -> Result<Self> {
        let mut file = CircuitFile {
            kind: String::new(),
            n: c.n(),
            m: c.inner().m(),
            lock: bits_to_hex(c.lock()),
            msg: c.msg().map(bits_to_hex),
            msg_len: c.msg().map(Bits::len),
            keep: None,
            q: None,
            rows: None,
            perm_seed: None,
            outputs: None,
        };
        match c.inner().body() {
            CircuitBody::Identity => file.kind = "point".into(),
            CircuitBody::Project { keep } => {
                file.kind = "wildcard".into();
                file.keep = Some(keep.iter().copied().collect());
            }
            CircuitBody::AffineMap { matrix, .. } => {
                file.kind = "affine".into();
                file.q = Some(matrix.params().q());
                file.rows = Some(matrix.rows().to_vec());
            }
            CircuitBody::PermutationDecrypt { .. } => {
                file.kind = "plaintext_eq".into();
                file.perm_seed =
                    Some(perm_seed.context("plaintext_eq serialization needs its seed")?);
            }
            CircuitBody::TruthTable { outputs } => {
                file.kind = "truth_table".into();
                file.outputs = Some(outputs.iter().map(bits_to_hex).collect());
            }
            CircuitBody::FheDecrypt { .. } => bail!("family circuits are not circuit-file material"),
        }
        Ok(file)
    }
}

fn bits_per_symbol(q: u8) -> usize {
    (8 - (q - 1).leading_zeros() as usize).max(1)
}

pub fn load_circuit(path: &Path) -> Result<CncCircuit> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read circuit file {}", path.display()))?;
    let file: CircuitFile = serde_json::from_str(&text)
        .with_context(|| format!("malformed circuit file {}", path.display()))?;
    file.to_circuit()
}

// ---------------------------------------------------------------------------
// Binary state dump
// ---------------------------------------------------------------------------

/// `QLSV` header (magic, q, lambda, reserved — 16 bytes), then little-endian
/// IEEE-754 (re, im) pairs in lexicographic index order.
pub fn write_state(path: &Path, state: &PureState) -> Result<()> {
    let mut f = fs::File::create(path)
        .with_context(|| format!("cannot create state dump {}", path.display()))?;
    f.write_all(STATE_MAGIC)?;
    f.write_all(&(state.params().q() as u32).to_le_bytes())?;
    f.write_all(&(state.params().lambda() as u32).to_le_bytes())?;
    f.write_all(&0u32.to_le_bytes())?;
    for amp in state.amplitudes() {
        f.write_all(&amp.re.to_le_bytes())?;
        f.write_all(&amp.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_state(path: &Path) -> Result<PureState> {
    let mut f =
        fs::File::open(path).with_context(|| format!("cannot open state dump {}", path.display()))?;
    let mut header = [0u8; 16];
    f.read_exact(&mut header).context("state dump too short for header")?;
    if &header[0..4] != STATE_MAGIC {
        bail!("bad state dump magic");
    }
    let q = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let lambda = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let params = FieldParams::new(q as u8, lambda as usize).map_err(|e| anyhow!("{}", e))?;
    let dim = (q as u64).checked_pow(lambda).context("state dimension overflow")? as usize;
    let mut body = Vec::new();
    f.read_to_end(&mut body)?;
    if body.len() != dim * 16 {
        bail!("state dump holds {} bytes of amplitudes, expected {}", body.len(), dim * 16);
    }
    let mut amps = Vec::with_capacity(dim);
    for chunk in body.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        amps.push(qlease_core::num_complex::Complex64::new(re, im));
    }
    PureState::from_amplitudes(params, amps).map_err(|e| anyhow!("state dump not normalized: {}", e))
}

// ---------------------------------------------------------------------------
// The lease bundle
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub kind: String,
    pub sealed: String, // base64 of the sealed record
}

/// Public CRS state: parameters, mode, the NIZK verification table, and the
/// oracle registry (sealed records keyed by token).
#[derive(Debug, Serialize, Deserialize)]
pub struct CrsFile {
    pub schema: u32,
    pub q: u8,
    pub lambda: usize,
    pub mode: String,
    pub nizk_public: String, // base64
    pub registry: BTreeMap<String, RegistryEntry>,
}

/// Handle descriptor inside a lease: the registry key plus whatever fields
/// are public in the chosen mode.
#[derive(Debug, Serialize, Deserialize)]
pub struct HandleRef {
    pub kind: String,
    pub token: String,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub salt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lock_digest: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LeaseFile {
    pub schema: u32,
    pub mode: String,
    pub g: HandleRef,
    pub g_perp: HandleRef,
    pub c_obf: HandleRef,
    pub proof: String, // base64
    pub state_file: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LessorFile {
    pub schema: u32,
    pub sk: SubspaceFile,
    pub seed: u64,
}

fn token_key(token: u64) -> String {
    format!("{:016x}", token)
}

fn handle_ref_sho(h: &SubspaceObfHandle) -> HandleRef {
    HandleRef {
        kind: "sho".into(),
        token: token_key(h.token()),
        mode: h.mode().name().into(),
        salt: None,
        lock_digest: None,
    }
}

fn handle_ref_qiho(h: &InputHidingObfHandle) -> HandleRef {
    HandleRef {
        kind: "qiho".into(),
        token: token_key(h.token()),
        mode: h.mode().name().into(),
        salt: h.salt().map(hex::encode),
        lock_digest: h.lock_digest().map(hex::encode),
    }
}

/// Write the full bundle produced by `lease`: crs.json, lease.json,
/// lessor.json, and the state dump.
pub fn write_lease_bundle(
    dir: &Path,
    scheme: &qlease_core::scheme::SslScheme,
    sk: &qlease_core::scheme::SecretKey,
    lease: &LeasedState,
    seed: u64,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut registry = BTreeMap::new();
    registry.insert(
        token_key(lease.classical.g.token()),
        RegistryEntry { kind: "sho".into(), sealed: B64.encode(lease.classical.g.export_sealed()) },
    );
    registry.insert(
        token_key(lease.classical.g_perp.token()),
        RegistryEntry {
            kind: "sho".into(),
            sealed: B64.encode(lease.classical.g_perp.export_sealed()),
        },
    );
    registry.insert(
        token_key(lease.classical.c_obf.token()),
        RegistryEntry {
            kind: "qiho".into(),
            sealed: B64.encode(lease.classical.c_obf.export_sealed()),
        },
    );

    let crs = CrsFile {
        schema: SCHEMA_VERSION,
        q: scheme.params().q(),
        lambda: scheme.params().lambda(),
        mode: scheme.mode().name().into(),
        nizk_public: B64.encode(scheme.nizk().export_public()),
        registry,
    };
    write_json(&dir.join("crs.json"), &crs)?;

    let lease_file = LeaseFile {
        schema: SCHEMA_VERSION,
        mode: scheme.mode().name().into(),
        g: handle_ref_sho(&lease.classical.g),
        g_perp: handle_ref_sho(&lease.classical.g_perp),
        c_obf: handle_ref_qiho(&lease.classical.c_obf),
        proof: B64.encode(lease.classical.proof.encode()),
        state_file: "lease.state".into(),
    };
    write_json(&dir.join("lease.json"), &lease_file)?;

    let lessor = LessorFile {
        schema: SCHEMA_VERSION,
        sk: SubspaceFile::from_subspace(sk.subspace()),
        seed,
    };
    write_json(&dir.join("lessor.json"), &lessor)?;

    write_state(&dir.join("lease.state"), &lease.quantum)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

/// Rebuild the protocol instance and lease from a bundle directory.
pub struct LoadedBundle {
    pub scheme: qlease_core::scheme::SslScheme,
    pub lease: LeasedState,
    pub state_path: std::path::PathBuf,
}

pub fn load_lease_bundle(dir: &Path) -> Result<LoadedBundle> {
    let crs: CrsFile = read_json(&dir.join("crs.json"))?;
    let lease_file: LeaseFile = read_json(&dir.join("lease.json"))?;

    let params = FieldParams::new(crs.q, crs.lambda).map_err(|e| anyhow!("{}", e))?;
    let mode = match crs.mode.as_str() {
        "ideal" => qlease_core::oracles::OracleMode::Ideal,
        "toy" => qlease_core::oracles::OracleMode::Toy,
        other => bail!("unknown mode {} in crs.json", other),
    };
    let nizk_bytes = B64.decode(&crs.nizk_public).context("bad base64 in crs.json")?;
    let nizk = qlease_core::oracles::NizkOracle::import_public(
        &[
            (qlease_core::scheme::LEASE_RELATION_ID, qlease_core::scheme::lease_relation_check),
            (qlease_core::dequant::FAMILY_RELATION_ID, qlease_core::dequant::family_relation_check),
        ],
        &nizk_bytes,
    )
    .context("malformed NIZK state in crs.json")?;
    let scheme = qlease_core::scheme::SslScheme::from_parts(params, mode, nizk)
        .map_err(|e| anyhow!("{}", e))?;

    let resolve = |r: &HandleRef| -> Result<Vec<u8>> {
        let entry = crs
            .registry
            .get(&r.token)
            .with_context(|| format!("registry has no entry for token {}", r.token))?;
        if entry.kind != r.kind {
            bail!("registry entry kind mismatch for token {}", r.token);
        }
        B64.decode(&entry.sealed).context("bad base64 in registry")
    };
    let g = SubspaceObfHandle::import_sealed(&resolve(&lease_file.g)?)
        .context("malformed sealed sho record")?;
    let g_perp = SubspaceObfHandle::import_sealed(&resolve(&lease_file.g_perp)?)
        .context("malformed sealed sho record")?;
    let c_obf = InputHidingObfHandle::import_sealed(&resolve(&lease_file.c_obf)?)
        .context("malformed sealed qiho record")?;
    let proof_bytes = B64.decode(&lease_file.proof).context("bad base64 proof")?;
    let proof =
        NizkProof::decode(&mut Reader::new(&proof_bytes)).context("malformed proof record")?;

    let state_path = dir.join(&lease_file.state_file);
    let quantum = read_state(&state_path)?;
    if quantum.params() != params {
        bail!("state dump parameters disagree with crs.json");
    }

    Ok(LoadedBundle {
        scheme,
        lease: LeasedState { quantum, classical: ClassicalPart { g, g_perp, c_obf, proof } },
        state_path,
    })
}

pub fn load_lessor(dir: &Path) -> Result<(qlease_core::scheme::SecretKey, bool)> {
    let lessor: LessorFile = read_json(&dir.join("lessor.json"))?;
    let (subspace, canonical) = lessor.sk.to_subspace()?;
    Ok((qlease_core::scheme::SecretKey::from_subspace(subspace), canonical))
}
