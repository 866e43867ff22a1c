//! Compute-and-compare circuits with lock values, the searchability
//! interface, and the sampling distributions.
//!
//! Circuit descriptions are data (truth tables or typed term structures),
//! never executable code: this keeps evaluation deterministic, supports
//! canonical serialization, and makes exhaustive equality checks possible.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::bits::Bits;
use crate::field::{solve_affine, FieldMatrix, FieldParams, FieldVector};
use crate::rng::uniform_index;
use crate::toycrypto;

/// Exhaustive-scan budget for functional-equality checks.
pub const EQUALITY_BUDGET_BITS: usize = 20;

/// Truth tables are only stored explicitly up to this input length.
pub const TRUTH_TABLE_BUDGET_BITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitError {
    LengthMismatch { expected: usize, got: usize },
    /// The search algorithm proved the instance has no accepting input.
    Unsatisfiable,
    /// No search tag, or the tag does not match the circuit structure.
    NotSearchable,
    BudgetExceeded { n: usize, budget: usize },
    MalformedDescription,
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::LengthMismatch { expected, got } => {
                write!(f, "input length {} does not match circuit arity {}", got, expected)
            }
            CircuitError::Unsatisfiable => write!(f, "instance has no accepting input"),
            CircuitError::NotSearchable => write!(f, "circuit carries no usable search tag"),
            CircuitError::BudgetExceeded { n, budget } => {
                write!(f, "exhaustive budget exceeded: n = {} > {}", n, budget)
            }
            CircuitError::MalformedDescription => write!(f, "malformed circuit description"),
        }
    }
}

/// A keyed pseudorandom permutation on `{0,1}^n`, realized as a seeded
/// shuffle. Backs the toy plaintext-equality checker.
#[derive(Clone, PartialEq, Eq)]
pub struct ToyPermutation {
    n: usize,
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl ToyPermutation {
    pub fn generate(n: usize, rng: &mut impl RngCore) -> Result<Self, CircuitError> {
        if n > TRUTH_TABLE_BUDGET_BITS {
            return Err(CircuitError::BudgetExceeded { n, budget: TRUTH_TABLE_BUDGET_BITS });
        }
        let size = 1usize << n;
        let mut forward: Vec<u32> = (0..size as u32).collect();
        // Fisher-Yates
        for i in (1..size).rev() {
            let j = uniform_index(rng, i + 1);
            forward.swap(i, j);
        }
        let mut inverse = alloc::vec![0u32; size];
        for (pt, &ct) in forward.iter().enumerate() {
            inverse[ct as usize] = pt as u32;
        }
        Ok(ToyPermutation { n, forward, inverse })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn encrypt(&self, pt: &Bits) -> Bits {
        Bits::from_u64(self.forward[pt.to_u64() as usize] as u64, self.n)
    }

    pub fn decrypt(&self, ct: &Bits) -> Bits {
        Bits::from_u64(self.inverse[ct.to_u64() as usize] as u64, self.n)
    }
}

impl fmt::Debug for ToyPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ToyPermutation(n={})", self.n)
    }
}

/// The deterministic body of a boolean circuit `{0,1}^n → {0,1}^m`.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitBody {
    /// Explicit truth table; `outputs[x]` is the output at input index `x`.
    TruthTable { outputs: Vec<Bits> },
    /// Output equals input (`m = n`).
    Identity,
    /// `y_i = x_i` for `i` in `keep`, zero elsewhere (`m = n`).
    Project { keep: BTreeSet<usize> },
    /// Interpret the input as symbols of `Z_q` (each `bits_per_symbol` bits,
    /// reduced mod q) and output the encoded matrix-vector product.
    AffineMap { matrix: FieldMatrix, bits_per_symbol: usize },
    /// Toy cipher decryption: output the plaintext of the input ciphertext
    /// index (`m = n`).
    PermutationDecrypt { perm: ToyPermutation },
    /// Toy-FHE decryption with a hardwired secret key; malformed or
    /// wrongly-keyed ciphertexts decrypt to the all-zero string so the
    /// evaluator stays total.
    FheDecrypt { key: [u8; 16], plaintext_len: usize },
}

/// A boolean circuit with explicit input/output arities and a data-only
/// evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanCircuit {
    n: usize,
    m: usize,
    body: CircuitBody,
}

impl BooleanCircuit {
    pub fn new(n: usize, m: usize, body: CircuitBody) -> Result<Self, CircuitError> {
        let ok = match &body {
            CircuitBody::TruthTable { outputs } => {
                n <= TRUTH_TABLE_BUDGET_BITS
                    && outputs.len() == 1usize << n
                    && outputs.iter().all(|o| o.len() == m)
            }
            CircuitBody::Identity => m == n,
            CircuitBody::Project { keep } => m == n && keep.iter().all(|&i| i < n),
            CircuitBody::AffineMap { matrix, bits_per_symbol } => {
                let q = matrix.params().q();
                *bits_per_symbol == bits_for_modulus(q)
                    && n == matrix.col_count() * bits_per_symbol
                    && m == matrix.row_count() * bits_per_symbol
            }
            CircuitBody::PermutationDecrypt { perm } => n == perm.n() && m == perm.n(),
            CircuitBody::FheDecrypt { plaintext_len, .. } => {
                n == toycrypto::sealed_len_bits(*plaintext_len) && m == *plaintext_len
            }
        };
        if !ok {
            return Err(CircuitError::MalformedDescription);
        }
        Ok(BooleanCircuit { n, m, body })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn body(&self) -> &CircuitBody {
        &self.body
    }

    pub fn eval(&self, x: &Bits) -> Result<Bits, CircuitError> {
        if x.len() != self.n {
            return Err(CircuitError::LengthMismatch { expected: self.n, got: x.len() });
        }
        Ok(match &self.body {
            CircuitBody::TruthTable { outputs } => outputs[x.to_u64() as usize].clone(),
            CircuitBody::Identity => x.clone(),
            CircuitBody::Project { keep } => {
                let bits = (0..self.n)
                    .map(|i| if keep.contains(&i) { x.get(i) } else { 0 })
                    .collect();
                Bits::from_bits(bits)
            }
            CircuitBody::AffineMap { matrix, bits_per_symbol } => {
                let v = decode_symbols(matrix.params(), x, *bits_per_symbol);
                encode_symbols(&matrix.mul_vector(&v), matrix.params().q(), *bits_per_symbol)
            }
            CircuitBody::PermutationDecrypt { perm } => perm.decrypt(x),
            CircuitBody::FheDecrypt { key, plaintext_len } => {
                toycrypto::open(key, x, *plaintext_len).unwrap_or_else(|| Bits::zeros(*plaintext_len))
            }
        })
    }

    /// Inverse of [`BooleanCircuit::encode_canonical`].
    pub fn decode_canonical(r: &mut crate::codec::Reader<'_>) -> Option<Self> {
        let n = r.u32()? as usize;
        let m = r.u32()? as usize;
        let body = match r.u8()? {
            0 => {
                if n > TRUTH_TABLE_BUDGET_BITS {
                    return None;
                }
                let mut outputs = Vec::with_capacity(1usize << n);
                for _ in 0..(1usize << n) {
                    outputs.push(Bits::from_bytes(r.bytes(m.div_ceil(8))?, m));
                }
                CircuitBody::TruthTable { outputs }
            }
            1 => CircuitBody::Identity,
            2 => {
                let count = r.u32()? as usize;
                let mut keep = BTreeSet::new();
                for _ in 0..count {
                    keep.insert(r.u32()? as usize);
                }
                CircuitBody::Project { keep }
            }
            3 => {
                let q = r.u8()?;
                let bps = r.u8()? as usize;
                let rows = r.u32()? as usize;
                let cols = r.u32()? as usize;
                let params = FieldParams::new(q, cols).ok()?;
                let mut data = Vec::with_capacity(rows);
                for _ in 0..rows {
                    data.push(r.bytes(cols)?.to_vec());
                }
                let matrix = FieldMatrix::new(params, data).ok()?;
                CircuitBody::AffineMap { matrix, bits_per_symbol: bps }
            }
            4 => {
                if n > TRUTH_TABLE_BUDGET_BITS {
                    return None;
                }
                let size = 1usize << n;
                let mut forward = Vec::with_capacity(size);
                for _ in 0..size {
                    forward.push(r.u32()?);
                }
                if forward.iter().any(|&v| v as usize >= size) {
                    return None;
                }
                let mut inverse = alloc::vec![u32::MAX; size];
                for (pt, &ct) in forward.iter().enumerate() {
                    inverse[ct as usize] = pt as u32;
                }
                if inverse.contains(&u32::MAX) {
                    return None;
                }
                CircuitBody::PermutationDecrypt { perm: ToyPermutation { n, forward, inverse } }
            }
            5 => {
                let key: [u8; 16] = r.bytes(16)?.try_into().ok()?;
                let plaintext_len = r.u32()? as usize;
                CircuitBody::FheDecrypt { key, plaintext_len }
            }
            _ => return None,
        };
        BooleanCircuit::new(n, m, body).ok()
    }

    /// Canonical byte encoding for digests and bit-for-bit comparisons.
    pub fn encode_canonical(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        match &self.body {
            CircuitBody::TruthTable { outputs } => {
                out.push(0);
                for o in outputs {
                    out.extend_from_slice(&o.to_bytes());
                }
            }
            CircuitBody::Identity => out.push(1),
            CircuitBody::Project { keep } => {
                out.push(2);
                out.extend_from_slice(&(keep.len() as u32).to_le_bytes());
                for &i in keep {
                    out.extend_from_slice(&(i as u32).to_le_bytes());
                }
            }
            CircuitBody::AffineMap { matrix, bits_per_symbol } => {
                out.push(3);
                out.push(matrix.params().q());
                out.push(*bits_per_symbol as u8);
                out.extend_from_slice(&(matrix.row_count() as u32).to_le_bytes());
                out.extend_from_slice(&(matrix.col_count() as u32).to_le_bytes());
                for row in matrix.rows() {
                    out.extend_from_slice(row);
                }
            }
            CircuitBody::PermutationDecrypt { perm } => {
                out.push(4);
                for &v in &perm.forward {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            CircuitBody::FheDecrypt { key, plaintext_len } => {
                out.push(5);
                out.extend_from_slice(key);
                out.extend_from_slice(&(*plaintext_len as u32).to_le_bytes());
            }
        }
        out
    }
}

pub(crate) fn bits_for_modulus(q: u8) -> usize {
    (8 - (q - 1).leading_zeros() as usize).max(1)
}

fn decode_symbols(params: FieldParams, x: &Bits, bps: usize) -> FieldVector {
    let coords = (0..params.lambda())
        .map(|i| (x.slice(i * bps, (i + 1) * bps).to_u64() % params.q() as u64) as u8)
        .collect();
    FieldVector::new(params, coords).expect("arity checked at construction")
}

fn encode_symbols(symbols: &[u8], q: u8, bps: usize) -> Bits {
    let _ = q;
    let mut out = Bits::zeros(symbols.len() * bps);
    for (i, &s) in symbols.iter().enumerate() {
        let enc = Bits::from_u64(s as u64, bps);
        for j in 0..bps {
            out.set(i * bps + j, enc.get(j));
        }
    }
    out
}

/// How to read an accepting input off the circuit description.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchTag {
    /// Lock is the accepting input itself (identity inner circuit).
    Point,
    /// Accepting inputs agree with the lock on `keep`; the lock must be
    /// zero elsewhere or the instance is unsatisfiable.
    Wildcard { keep: BTreeSet<usize> },
    /// Solve the affine system by Gaussian elimination.
    Affine,
    /// Encrypt the lock under the stored key.
    PlaintextEq,
    /// Research hook: a caller-supplied accepting input.
    Custom { accepting_input: Bits },
}

impl SearchTag {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SearchTag::Point => "point",
            SearchTag::Wildcard { .. } => "wildcard",
            SearchTag::Affine => "affine",
            SearchTag::PlaintextEq => "plaintext_eq",
            SearchTag::Custom { .. } => "custom",
        }
    }
}

/// A compute-and-compare circuit `C[C, α]` (or `C[C, α, msg]`): outputs 1
/// (or `msg`) exactly when the inner circuit hits the lock.
#[derive(Debug, Clone, PartialEq)]
pub struct CncCircuit {
    inner: BooleanCircuit,
    lock: Bits,
    msg: Option<Bits>,
    tag: Option<SearchTag>,
}

impl CncCircuit {
    pub fn new(
        inner: BooleanCircuit,
        lock: Bits,
        msg: Option<Bits>,
        tag: Option<SearchTag>,
    ) -> Result<Self, CircuitError> {
        if lock.len() != inner.m() {
            return Err(CircuitError::LengthMismatch { expected: inner.m(), got: lock.len() });
        }
        Ok(CncCircuit { inner, lock, msg, tag })
    }

    /// Point circuit: accepts exactly the lock.
    pub fn point(lock: Bits) -> Self {
        let n = lock.len();
        let inner = BooleanCircuit::new(n, n, CircuitBody::Identity).expect("identity arity");
        CncCircuit { inner, lock, msg: None, tag: Some(SearchTag::Point) }
    }

    /// Conjunction with wildcards: accepts inputs matching the lock on
    /// `keep`. The lock must be zero off `keep` to be satisfiable.
    pub fn wildcard(lock: Bits, keep: BTreeSet<usize>) -> Result<Self, CircuitError> {
        let n = lock.len();
        let inner = BooleanCircuit::new(n, n, CircuitBody::Project { keep: keep.clone() })?;
        Ok(CncCircuit { inner, lock, msg: None, tag: Some(SearchTag::Wildcard { keep }) })
    }

    /// Affine tester: accepts encodings of `x` with `M·x = target`.
    pub fn affine(matrix: FieldMatrix, target: &[u8]) -> Result<Self, CircuitError> {
        if target.len() != matrix.row_count() {
            return Err(CircuitError::LengthMismatch {
                expected: matrix.row_count(),
                got: target.len(),
            });
        }
        let q = matrix.params().q();
        let bps = bits_for_modulus(q);
        let n = matrix.col_count() * bps;
        let m = matrix.row_count() * bps;
        let lock = encode_symbols(target, q, bps);
        let inner = BooleanCircuit::new(n, m, CircuitBody::AffineMap { matrix, bits_per_symbol: bps })?;
        Ok(CncCircuit { inner, lock, msg: None, tag: Some(SearchTag::Affine) })
    }

    /// Plaintext-equality checker: accepts ciphertexts decrypting to the lock.
    pub fn plaintext_eq(perm: ToyPermutation, lock: Bits) -> Result<Self, CircuitError> {
        let n = perm.n();
        if lock.len() != n {
            return Err(CircuitError::LengthMismatch { expected: n, got: lock.len() });
        }
        let inner = BooleanCircuit::new(n, n, CircuitBody::PermutationDecrypt { perm })?;
        Ok(CncCircuit { inner, lock, msg: None, tag: Some(SearchTag::PlaintextEq) })
    }

    pub fn inner(&self) -> &BooleanCircuit {
        &self.inner
    }

    pub fn lock(&self) -> &Bits {
        &self.lock
    }

    pub fn msg(&self) -> Option<&Bits> {
        self.msg.as_ref()
    }

    pub fn tag(&self) -> Option<&SearchTag> {
        self.tag.as_ref()
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    /// Output length of [`CncCircuit::eval`]: 1 bit, or `|msg|`.
    pub fn output_len(&self) -> usize {
        self.msg.as_ref().map_or(1, Bits::len)
    }

    /// True exactly when the inner circuit hits the lock.
    pub fn accepts(&self, x: &Bits) -> Result<bool, CircuitError> {
        Ok(self.inner.eval(x)? == self.lock)
    }

    /// `1` (or `msg`) on a lock match, else `0` (or the zero string).
    pub fn eval(&self, x: &Bits) -> Result<Bits, CircuitError> {
        let hit = self.accepts(x)?;
        Ok(match (&self.msg, hit) {
            (Some(msg), true) => msg.clone(),
            (Some(msg), false) => Bits::zeros(msg.len()),
            (None, true) => Bits::from_bits(alloc::vec![1]),
            (None, false) => Bits::from_bits(alloc::vec![0]),
        })
    }

    pub fn encode_canonical(&self) -> Vec<u8> {
        let mut out = self.inner.encode_canonical();
        out.extend_from_slice(&(self.lock.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.lock.to_bytes());
        match &self.msg {
            Some(msg) => {
                out.push(1);
                out.extend_from_slice(&(msg.len() as u32).to_le_bytes());
                out.extend_from_slice(&msg.to_bytes());
            }
            None => out.push(0),
        }
        out
    }

    /// Inverse of [`CncCircuit::encode_canonical`]. Search tags are not part
    /// of the canonical form, so the result carries none.
    pub fn decode_canonical(r: &mut crate::codec::Reader<'_>) -> Option<Self> {
        let inner = BooleanCircuit::decode_canonical(r)?;
        let lock_len = r.u32()? as usize;
        let lock = Bits::from_bytes(r.bytes(lock_len.div_ceil(8))?, lock_len);
        let msg = match r.u8()? {
            0 => None,
            1 => {
                let msg_len = r.u32()? as usize;
                Some(Bits::from_bytes(r.bytes(msg_len.div_ceil(8))?, msg_len))
            }
            _ => return None,
        };
        CncCircuit::new(inner, lock, msg, None).ok()
    }
}

/// Read an accepting input off the circuit description. The result always
/// re-verifies under [`CncCircuit::accepts`]; provably empty instances
/// surface as [`CircuitError::Unsatisfiable`].
pub fn search(c: &CncCircuit) -> Result<Bits, CircuitError> {
    let tag = c.tag().ok_or(CircuitError::NotSearchable)?;
    let candidate = match (tag, c.inner.body()) {
        (SearchTag::Point, CircuitBody::Identity) => c.lock.clone(),
        (SearchTag::Wildcard { keep }, CircuitBody::Project { .. }) => {
            let off_keep_zero = (0..c.lock.len()).all(|i| keep.contains(&i) || c.lock.get(i) == 0);
            if !off_keep_zero {
                return Err(CircuitError::Unsatisfiable);
            }
            c.lock.clone()
        }
        (SearchTag::Affine, CircuitBody::AffineMap { matrix, bits_per_symbol }) => {
            let target = decode_symbols(
                FieldParams::new(matrix.params().q(), matrix.row_count())
                    .map_err(|_| CircuitError::MalformedDescription)?,
                &c.lock,
                *bits_per_symbol,
            );
            let x = solve_affine(matrix, target.coords()).ok_or(CircuitError::Unsatisfiable)?;
            encode_symbols(x.coords(), matrix.params().q(), *bits_per_symbol)
        }
        (SearchTag::PlaintextEq, CircuitBody::PermutationDecrypt { perm }) => perm.encrypt(&c.lock),
        (SearchTag::Custom { accepting_input }, _) => accepting_input.clone(),
        _ => return Err(CircuitError::NotSearchable),
    };
    if c.accepts(&candidate)? {
        Ok(candidate)
    } else {
        // Non-canonical lock encodings (or stale custom tags) can make the
        // instance empty even when the tag parses; never return a wrong answer.
        Err(CircuitError::Unsatisfiable)
    }
}

/// Exhaustive functional equality over all `2^n` inputs.
pub fn is_functionally_equal<F, G>(a: F, b: G, n: usize) -> Result<bool, CircuitError>
where
    F: Fn(&Bits) -> Bits,
    G: Fn(&Bits) -> Bits,
{
    if n > EQUALITY_BUDGET_BITS {
        return Err(CircuitError::BudgetExceeded { n, budget: EQUALITY_BUDGET_BITS });
    }
    Ok(Bits::enumerate_all(n).all(|x| a(&x) == b(&x)))
}

/// A sampled circuit together with opaque auxiliary information.
#[derive(Debug, Clone)]
pub struct CircuitSample {
    pub circuit: CncCircuit,
    pub aux: Vec<u8>,
    /// Declared lock entropy. For the uniform toy realization this is `m`;
    /// the pseudoentropy distribution is realized identically and the
    /// annotation preserves the distinction.
    pub declared_entropy_bits: f64,
}

/// Lock drawn uniformly, independent of the inner circuit and of `aux`.
/// The inner circuit is the identity (a point circuit) when `m == n`, and
/// a random affine map over `Z_2` otherwise.
pub fn sample_unpredictable(
    n: usize,
    m: usize,
    rng: &mut impl RngCore,
) -> Result<CircuitSample, CircuitError> {
    let mut aux = alloc::vec![0u8; 16];
    rng.fill_bytes(&mut aux);
    let circuit = if m == n {
        CncCircuit::point(Bits::random(m, rng))
    } else {
        let params = FieldParams::new(2, n).map_err(|_| CircuitError::MalformedDescription)?;
        let matrix_rows = (0..m)
            .map(|_| (0..n).map(|_| (rng.next_u32() & 1) as u8).collect())
            .collect();
        let matrix = FieldMatrix::new(params, matrix_rows).expect("arity by construction");
        let lock = Bits::random(m, rng);
        let inner = BooleanCircuit::new(n, m, CircuitBody::AffineMap { matrix, bits_per_symbol: 1 })?;
        CncCircuit::new(inner, lock, None, Some(SearchTag::Affine))?
    };
    Ok(CircuitSample { circuit, aux, declared_entropy_bits: m as f64 })
}

/// The pseudoentropy distribution: realized identically to
/// [`sample_unpredictable`] at desk scale, with the declared HILL-entropy
/// annotation carried through.
pub fn sample_pseudoentropy(
    n: usize,
    m: usize,
    entropy_bits: f64,
    rng: &mut impl RngCore,
) -> Result<CircuitSample, CircuitError> {
    let mut s = sample_unpredictable(n, m, rng)?;
    s.declared_entropy_bits = entropy_bits;
    Ok(s)
}

/// Samplers for the concrete searchable subclasses; these always produce
/// satisfiable instances and are what the protocol experiments lease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerKind {
    Point,
    Wildcard,
    Affine { q: u8 },
    PlaintextEq,
    /// The toy unpredictable distribution (uniform lock, point inner).
    Unpredictable,
}

impl SamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Point => "point",
            SamplerKind::Wildcard => "wildcard",
            SamplerKind::Affine { .. } => "affine",
            SamplerKind::PlaintextEq => "plaintext_eq",
            SamplerKind::Unpredictable => "unpredictable",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CircuitSampler {
    pub kind: SamplerKind,
    pub n: usize,
}

impl CircuitSampler {
    pub fn new(kind: SamplerKind, n: usize) -> Self {
        CircuitSampler { kind, n }
    }

    pub fn sample(&self, rng: &mut impl RngCore) -> Result<CircuitSample, CircuitError> {
        let n = self.n;
        let circuit = match self.kind {
            SamplerKind::Point => CncCircuit::point(Bits::random(n, rng)),
            SamplerKind::Wildcard => {
                let mut keep = BTreeSet::new();
                for i in 0..n {
                    if rng.next_u32() & 1 == 1 {
                        keep.insert(i);
                    }
                }
                if keep.is_empty() {
                    keep.insert(uniform_index(rng, n));
                }
                let mut lock = Bits::zeros(n);
                for &i in &keep {
                    lock.set(i, (rng.next_u32() & 1) as u8);
                }
                CncCircuit::wildcard(lock, keep)?
            }
            SamplerKind::Affine { q } => {
                let bps = bits_for_modulus(q);
                if !n.is_multiple_of(bps) || n / bps == 0 {
                    return Err(CircuitError::MalformedDescription);
                }
                let cols = n / bps;
                let rows = 1 + uniform_index(rng, cols);
                let params = FieldParams::new(q, cols).map_err(|_| CircuitError::MalformedDescription)?;
                let matrix = FieldMatrix::random(params, rows, rng);
                // Lock from a hidden solution, so the instance is consistent.
                let hidden = FieldVector::random(params, rng);
                let target = matrix.mul_vector(&hidden);
                CncCircuit::affine(matrix, &target)?
            }
            SamplerKind::PlaintextEq => {
                let perm = ToyPermutation::generate(n, rng)?;
                CncCircuit::plaintext_eq(perm, Bits::random(n, rng))?
            }
            SamplerKind::Unpredictable => {
                return sample_unpredictable(n, n, rng);
            }
        };
        let mut aux = alloc::vec![0u8; 16];
        rng.fill_bytes(&mut aux);
        Ok(CircuitSample { circuit, aux, declared_entropy_bits: self.n as f64 })
    }
}
