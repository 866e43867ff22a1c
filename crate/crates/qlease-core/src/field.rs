//! Exact arithmetic and linear algebra over the prime field `Z_q`.
//!
//! Subspaces are kept in reduced row echelon form, which is the unique
//! canonical representative of a row space and therefore supports direct
//! equality tests and uniform sampling by canonicalization.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::rng::uniform_residue;

/// Primes accepted as field moduli. Larger moduli would blow the dense
/// simulation cap long before arithmetic becomes the bottleneck.
pub const SUPPORTED_PRIMES: [u8; 4] = [2, 3, 5, 7];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    UnsupportedModulus(u8),
    ZeroDimension,
    DimensionMismatch { expected: usize, got: usize },
    DimensionOutOfRange { dim: usize, lambda: usize },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::UnsupportedModulus(q) => {
                write!(f, "modulus {} is not a supported prime (2, 3, 5, 7)", q)
            }
            FieldError::ZeroDimension => write!(f, "ambient dimension must be at least 1"),
            FieldError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}, got {}", expected, got)
            }
            FieldError::DimensionOutOfRange { dim, lambda } => {
                write!(f, "subspace dimension {} out of range for ambient {}", dim, lambda)
            }
        }
    }
}

/// Field modulus and ambient dimension: vectors live in `Z_q^lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    q: u8,
    lambda: usize,
}

impl FieldParams {
    pub fn new(q: u8, lambda: usize) -> Result<Self, FieldError> {
        if !SUPPORTED_PRIMES.contains(&q) {
            return Err(FieldError::UnsupportedModulus(q));
        }
        if lambda == 0 {
            return Err(FieldError::ZeroDimension);
        }
        Ok(FieldParams { q, lambda })
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// `q^lambda` as u64; callers must respect the simulation caps.
    pub fn space_size(&self) -> u64 {
        (self.q as u64).pow(self.lambda as u32)
    }

    fn inv(&self, a: u8) -> u8 {
        debug_assert!(!a.is_multiple_of(self.q));
        // Fermat inverse; q is tiny so the loop is fine.
        let mut x = 1u32;
        for _ in 0..(self.q - 2) {
            x = (x * a as u32) % self.q as u32;
        }
        x as u8
    }
}

/// A vector of `lambda` residues mod `q`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    params: FieldParams,
    coords: Vec<u8>,
}

impl FieldVector {
    pub fn new(params: FieldParams, coords: Vec<u8>) -> Result<Self, FieldError> {
        if coords.len() != params.lambda() {
            return Err(FieldError::DimensionMismatch {
                expected: params.lambda(),
                got: coords.len(),
            });
        }
        let coords = coords.into_iter().map(|c| c % params.q()).collect();
        Ok(FieldVector { params, coords })
    }

    pub fn zero(params: FieldParams) -> Self {
        FieldVector { params, coords: vec![0; params.lambda()] }
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn coords(&self) -> &[u8] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &FieldVector) -> FieldVector {
        debug_assert_eq!(self.params, other.params);
        let q = self.params.q();
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a + b) % q)
            .collect();
        FieldVector { params: self.params, coords }
    }

    pub fn scale(&self, c: u8) -> FieldVector {
        let q = self.params.q();
        let coords = self.coords.iter().map(|&a| (a * c) % q).collect();
        FieldVector { params: self.params, coords }
    }

    pub fn negate(&self) -> FieldVector {
        let q = self.params.q();
        let coords = self.coords.iter().map(|&a| (q - a) % q).collect();
        FieldVector { params: self.params, coords }
    }

    pub fn dot(&self, other: &FieldVector) -> u8 {
        debug_assert_eq!(self.params, other.params);
        let q = self.params.q() as u32;
        let mut acc = 0u32;
        for (&a, &b) in self.coords.iter().zip(&other.coords) {
            acc = (acc + a as u32 * b as u32) % q;
        }
        acc as u8
    }

    /// Position in the lexicographic enumeration of `Z_q^lambda` (first
    /// coordinate most significant). This is the state-vector index.
    pub fn to_index(&self) -> u64 {
        let q = self.params.q() as u64;
        self.coords.iter().fold(0u64, |acc, &c| acc * q + c as u64)
    }

    pub fn from_index(params: FieldParams, mut index: u64) -> Self {
        let q = params.q() as u64;
        let mut coords = vec![0u8; params.lambda()];
        for slot in coords.iter_mut().rev() {
            *slot = (index % q) as u8;
            index /= q;
        }
        debug_assert_eq!(index, 0);
        FieldVector { params, coords }
    }

    pub fn random(params: FieldParams, rng: &mut impl RngCore) -> Self {
        let coords = (0..params.lambda()).map(|_| uniform_residue(rng, params.q())).collect();
        FieldVector { params, coords }
    }
}

impl fmt::Debug for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} mod {})", self.coords, self.params.q())
    }
}

/// A dense matrix over `Z_q` with `params.lambda()` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    params: FieldParams,
    rows: Vec<Vec<u8>>,
}

impl FieldMatrix {
    pub fn new(params: FieldParams, rows: Vec<Vec<u8>>) -> Result<Self, FieldError> {
        for row in &rows {
            if row.len() != params.lambda() {
                return Err(FieldError::DimensionMismatch {
                    expected: params.lambda(),
                    got: row.len(),
                });
            }
        }
        let q = params.q();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|c| c % q).collect())
            .collect();
        Ok(FieldMatrix { params, rows })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.params.lambda()
    }

    pub fn row_vector(&self, i: usize) -> FieldVector {
        FieldVector { params: self.params, coords: self.rows[i].clone() }
    }

    pub fn mul_vector(&self, x: &FieldVector) -> Vec<u8> {
        debug_assert_eq!(x.coords.len(), self.col_count());
        let q = self.params.q() as u32;
        self.rows
            .iter()
            .map(|row| {
                let mut acc = 0u32;
                for (&a, &b) in row.iter().zip(x.coords()) {
                    acc = (acc + a as u32 * b as u32) % q;
                }
                acc as u8
            })
            .collect()
    }

    pub fn random(params: FieldParams, rows: usize, rng: &mut impl RngCore) -> Self {
        let rows = (0..rows)
            .map(|_| (0..params.lambda()).map(|_| uniform_residue(rng, params.q())).collect())
            .collect();
        FieldMatrix { params, rows }
    }
}

/// Reduce `matrix` to reduced row echelon form in place over `Z_q`.
/// Returns the rank. Zero rows end up at the bottom.
#[allow(clippy::needless_range_loop)] // elimination reads one row while writing another
fn rref_in_place(params: FieldParams, rows: &mut [Vec<u8>]) -> usize {
    let q = params.q() as u32;
    let ncols = params.lambda();
    let nrows = rows.len();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row == nrows {
            break;
        }
        let Some(src) = (pivot_row..nrows).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = params.inv(rows[pivot_row][col]) as u32;
        for c in col..ncols {
            rows[pivot_row][c] = ((rows[pivot_row][c] as u32 * inv) % q) as u8;
        }
        for r in 0..nrows {
            if r != pivot_row && rows[r][col] != 0 {
                let factor = rows[r][col] as u32;
                for c in col..ncols {
                    let sub = (factor * rows[pivot_row][c] as u32) % q;
                    rows[r][c] = (((rows[r][c] as u32) + q - sub) % q) as u8;
                }
            }
        }
        pivot_row += 1;
    }
    pivot_row
}

/// Reduced row echelon form of `matrix` with zero rows dropped, plus rank.
/// Two matrices with the same row space produce identical output.
pub fn rref(matrix: &FieldMatrix) -> (FieldMatrix, usize) {
    let mut rows = matrix.rows.clone();
    let rank = rref_in_place(matrix.params, &mut rows);
    rows.truncate(rank);
    (FieldMatrix { params: matrix.params, rows }, rank)
}

/// Solve `M·x = alpha` over `Z_q`; `None` means the system is inconsistent.
/// When the solution space has positive dimension, free variables are set
/// to zero, so the result is deterministic.
pub fn solve_affine(m: &FieldMatrix, alpha: &[u8]) -> Option<FieldVector> {
    assert_eq!(m.row_count(), alpha.len(), "target length must match row count");
    let q = m.params.q() as u32;
    let ncols = m.col_count();

    // Augment with the target column and eliminate. The augmented system
    // uses a widened params so rref_in_place sees ncols+1 columns.
    let aug_params = FieldParams { q: m.params.q(), lambda: ncols + 1 };
    let mut rows: Vec<Vec<u8>> = m
        .rows
        .iter()
        .zip(alpha)
        .map(|(row, &t)| {
            let mut r = row.clone();
            r.push(t % m.params.q());
            r
        })
        .collect();
    rref_in_place(aug_params, &mut rows);

    let mut x = vec![0u8; ncols];
    for row in &rows {
        let Some(lead) = row[..ncols].iter().position(|&c| c != 0) else {
            if row[ncols] != 0 {
                return None; // 0 = nonzero: inconsistent
            }
            continue;
        };
        // Leading entry is 1 and all free variables are set to zero, so the
        // pivot variable reads straight off the augmented column.
        x[lead] = (row[ncols] as u32 % q) as u8;
    }
    let solution = FieldVector { params: m.params, coords: x };
    debug_assert_eq!(m.mul_vector(&solution), alpha.iter().map(|&t| t % m.params.q()).collect::<Vec<_>>());
    Some(solution)
}

/// A linear subspace of `Z_q^lambda`, stored as its unique RREF basis.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    params: FieldParams,
    basis: FieldMatrix,
    dim: usize,
}

impl Subspace {
    /// Span of the rows of `generators` (canonicalized).
    pub fn from_generators(generators: &FieldMatrix) -> Self {
        let (basis, dim) = rref(generators);
        Subspace { params: generators.params, basis, dim }
    }

    pub fn zero(params: FieldParams) -> Self {
        Subspace { params, basis: FieldMatrix { params, rows: Vec::new() }, dim: 0 }
    }

    pub fn full(params: FieldParams) -> Self {
        let rows = (0..params.lambda())
            .map(|i| {
                let mut r = vec![0u8; params.lambda()];
                r[i] = 1;
                r
            })
            .collect();
        Subspace { params, basis: FieldMatrix { params, rows }, dim: params.lambda() }
    }

    /// Uniformly random subspace of the given dimension: resample random
    /// `dim × lambda` generator matrices until full rank, then canonicalize.
    /// Every subspace has the same number of ordered bases, so the induced
    /// distribution over RREF representatives is uniform.
    pub fn random(params: FieldParams, dim: usize, rng: &mut impl RngCore) -> Result<Self, FieldError> {
        if dim > params.lambda() {
            return Err(FieldError::DimensionOutOfRange { dim, lambda: params.lambda() });
        }
        if dim == 0 {
            return Ok(Subspace::zero(params));
        }
        loop {
            let gen = FieldMatrix::random(params, dim, rng);
            let (basis, rank) = rref(&gen);
            if rank == dim {
                return Ok(Subspace { params, basis, dim });
            }
        }
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn basis(&self) -> &FieldMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements `q^dim`.
    pub fn size(&self) -> u64 {
        (self.params.q() as u64).pow(self.dim as u32)
    }

    /// Membership test: reduce `v` against the RREF basis rows.
    pub fn contains(&self, v: &FieldVector) -> Result<bool, FieldError> {
        if v.params() != self.params {
            return Err(FieldError::DimensionMismatch {
                expected: self.params.lambda(),
                got: v.params().lambda(),
            });
        }
        let q = self.params.q();
        let mut rem = v.coords.clone();
        for row in self.basis.rows() {
            let lead = row.iter().position(|&c| c != 0).expect("no zero rows in RREF basis");
            if rem[lead] != 0 {
                let factor = rem[lead];
                for (r, &b) in rem.iter_mut().zip(row) {
                    *r = (*r + (q - (factor * b) % q) % q) % q;
                }
            }
        }
        Ok(rem.iter().all(|&c| c == 0))
    }

    /// The dual subspace `A^⊥ = {v : ⟨v, a⟩ = 0 for all a in A}`, i.e. the
    /// kernel of the basis matrix, in canonical form.
    pub fn dual(&self) -> Subspace {
        let params = self.params;
        let lambda = params.lambda();
        let q = params.q();
        if self.dim == 0 {
            return Subspace::full(params);
        }

        // Basis is already in RREF; read the kernel off the pivot structure.
        let mut pivots = Vec::with_capacity(self.dim);
        for row in self.basis.rows() {
            pivots.push(row.iter().position(|&c| c != 0).expect("RREF row"));
        }
        let free: Vec<usize> = (0..lambda).filter(|c| !pivots.contains(c)).collect();

        let mut rows = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0u8; lambda];
            v[f] = 1;
            for (r, &p) in pivots.iter().enumerate() {
                // pivot coordinate = -basis[r][f]
                v[p] = (q - self.basis.rows()[r][f] % q) % q;
            }
            rows.push(v);
        }
        let gen = FieldMatrix { params, rows };
        let out = Subspace::from_generators(&gen);
        debug_assert_eq!(out.dim, lambda - self.dim);
        out
    }

    /// All `q^dim` elements, by spanning the basis. Caller keeps dim small.
    pub fn enumerate(&self) -> Vec<FieldVector> {
        let q = self.params.q() as u64;
        let count = self.size();
        let mut out = Vec::with_capacity(count as usize);
        for mut code in 0..count {
            let mut acc = FieldVector::zero(self.params);
            for row in 0..self.dim {
                let c = (code % q) as u8;
                code /= q;
                if c != 0 {
                    acc = acc.add(&self.basis.row_vector(row).scale(c));
                }
            }
            out.push(acc);
        }
        out
    }

    /// Uniformly random element of the subspace.
    pub fn random_element(&self, rng: &mut impl RngCore) -> FieldVector {
        let mut acc = FieldVector::zero(self.params);
        for row in 0..self.dim {
            let c = uniform_residue(rng, self.params.q());
            if c != 0 {
                acc = acc.add(&self.basis.row_vector(row).scale(c));
            }
        }
        acc
    }

    /// Canonical byte encoding (q, λ, dim, RREF rows).
    pub fn encode_canonical(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(self.params.q());
        out.extend_from_slice(&(self.params.lambda() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for row in self.basis.rows() {
            out.extend_from_slice(row);
        }
        out
    }

    /// Inverse of [`Subspace::encode_canonical`]; re-canonicalizes, so a
    /// non-RREF payload cannot smuggle in a second representative.
    pub fn decode_canonical(r: &mut crate::codec::Reader<'_>) -> Option<Self> {
        let q = r.u8()?;
        let lambda = r.u32()? as usize;
        let dim = r.u32()? as usize;
        let params = FieldParams::new(q, lambda).ok()?;
        if dim > lambda {
            return None;
        }
        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            rows.push(r.bytes(lambda)?.to_vec());
        }
        let gen = FieldMatrix::new(params, rows).ok()?;
        let out = Subspace::from_generators(&gen);
        if out.dim != dim {
            return None;
        }
        Some(out)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(dim {} of Z_{}^{}, basis {:?})",
            self.dim,
            self.params.q(),
            self.params.lambda(),
            self.basis.rows
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::root_stream;

    fn params(q: u8, lambda: usize) -> FieldParams {
        FieldParams::new(q, lambda).unwrap()
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(matches!(FieldParams::new(4, 3), Err(FieldError::UnsupportedModulus(4))));
        assert!(matches!(FieldParams::new(6, 3), Err(FieldError::UnsupportedModulus(6))));
    }

    #[test]
    fn rref_identity_is_fixed_point() {
        let p = params(2, 2);
        let m = FieldMatrix::new(p, vec![vec![1, 0], vec![0, 1]]).unwrap();
        let (r, rank) = rref(&m);
        assert_eq!(rank, 2);
        assert_eq!(r, m);
    }

    #[test]
    fn rref_eliminates_duplicate_rows() {
        let p = params(2, 2);
        let m = FieldMatrix::new(p, vec![vec![1, 1], vec![1, 1]]).unwrap();
        let (r, rank) = rref(&m);
        assert_eq!(rank, 1);
        assert_eq!(r.rows(), &[vec![1, 1]]);
    }

    /// Independent rank oracle: count the span by brute-force enumeration
    /// of all row combinations, then compare `q^rank` against it.
    fn brute_force_span_size(m: &FieldMatrix) -> u64 {
        let q = m.params().q() as u64;
        let n = m.row_count();
        let mut seen = std::collections::BTreeSet::new();
        for mut code in 0..q.pow(n as u32) {
            let mut acc = FieldVector::zero(m.params());
            for row in 0..n {
                let c = (code % q) as u8;
                code /= q;
                if c != 0 {
                    acc = acc.add(&m.row_vector(row).scale(c));
                }
            }
            seen.insert(acc.coords().to_vec());
        }
        seen.len() as u64
    }

    #[test]
    fn rref_rank_matches_brute_force_span() {
        let p = params(3, 6);
        let mut rng = root_stream(11);
        for _ in 0..20 {
            let m = FieldMatrix::random(p, 4, &mut rng);
            let (_, rank) = rref(&m);
            assert_eq!((p.q() as u64).pow(rank as u32), brute_force_span_size(&m));
        }
    }

    #[test]
    fn rref_is_canonical_across_generating_sets() {
        let p = params(3, 5);
        let mut rng = root_stream(12);
        for _ in 0..20 {
            let m = FieldMatrix::random(p, 3, &mut rng);
            let (r1, rank) = rref(&m);
            // Shuffle rows and add a random linear combination; same row space.
            let mut rows = m.rows().to_vec();
            rows.reverse();
            let mut extra = vec![0u8; p.lambda()];
            for (i, row) in m.rows().iter().enumerate() {
                for (e, &c) in extra.iter_mut().zip(row) {
                    *e = (*e + c * ((i + 1) as u8)) % p.q();
                }
            }
            rows.push(extra);
            let m2 = FieldMatrix::new(p, rows).unwrap();
            let (r2, rank2) = rref(&m2);
            assert_eq!(rank, rank2);
            assert_eq!(r1, r2);
        }
    }

    #[test]
    fn dual_of_axis_is_other_axis() {
        let p = params(2, 2);
        let a = Subspace::from_generators(&FieldMatrix::new(p, vec![vec![1, 0]]).unwrap());
        let d = a.dual();
        assert_eq!(d.basis().rows(), &[vec![0, 1]]);
    }

    #[test]
    fn self_dual_subspace_over_z2() {
        // <(1,1),(1,1)> = 0 mod 2, so span{(1,1)} is its own dual.
        let p = params(2, 2);
        let a = Subspace::from_generators(&FieldMatrix::new(p, vec![vec![1, 1]]).unwrap());
        let v = a.basis().row_vector(0);
        assert_eq!(v.dot(&v), 0);
        assert_eq!(a.dual(), a);
    }

    #[test]
    fn double_dual_is_identity_and_dims_add_up() {
        let p = params(3, 6);
        let mut rng = root_stream(13);
        for _ in 0..10 {
            let a = Subspace::random(p, 3, &mut rng).unwrap();
            let d = a.dual();
            assert_eq!(a.dim() + d.dim(), p.lambda());
            assert_eq!(d.dual(), a);
            // Every pairing is orthogonal.
            for x in a.basis().rows() {
                for y in d.basis().rows() {
                    let xv = FieldVector::new(p, x.clone()).unwrap();
                    let yv = FieldVector::new(p, y.clone()).unwrap();
                    assert_eq!(xv.dot(&yv), 0);
                }
            }
        }
    }

    #[test]
    fn contains_agrees_with_enumeration() {
        let p = params(2, 6);
        let mut rng = root_stream(14);
        let a = Subspace::random(p, 3, &mut rng).unwrap();
        let members: std::collections::BTreeSet<Vec<u8>> =
            a.enumerate().into_iter().map(|v| v.coords().to_vec()).collect();
        assert_eq!(members.len(), 8);
        assert!(a.contains(&FieldVector::zero(p)).unwrap());
        for idx in 0..p.space_size() {
            let v = FieldVector::from_index(p, idx);
            assert_eq!(a.contains(&v).unwrap(), members.contains(v.coords()));
        }
    }

    #[test]
    fn contains_is_closed_under_addition_and_scaling() {
        let p = params(5, 4);
        let mut rng = root_stream(15);
        let a = Subspace::random(p, 2, &mut rng).unwrap();
        for _ in 0..50 {
            let v = a.random_element(&mut rng);
            let w = a.random_element(&mut rng);
            assert!(a.contains(&v.add(&w)).unwrap());
            for c in 0..p.q() {
                assert!(a.contains(&v.scale(c)).unwrap());
            }
        }
    }

    #[test]
    fn contains_rejects_dimension_mismatch() {
        let a = Subspace::full(params(2, 3));
        let v = FieldVector::zero(params(2, 4));
        assert!(a.contains(&v).is_err());
    }

    #[test]
    fn solve_affine_identity_and_inconsistent() {
        let p = params(3, 3);
        let id = FieldMatrix::new(p, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let x = solve_affine(&id, &[2, 1, 0]).unwrap();
        assert_eq!(x.coords(), &[2, 1, 0]);

        let dup = FieldMatrix::new(p, vec![vec![1, 2, 0], vec![1, 2, 0]]).unwrap();
        assert!(solve_affine(&dup, &[1, 2]).is_none());
    }

    #[test]
    fn solve_affine_random_consistent_systems_resubstitute() {
        let p = params(3, 6);
        let mut rng = root_stream(16);
        for _ in 0..30 {
            let m = FieldMatrix::random(p, 4, &mut rng);
            let hidden = FieldVector::random(p, &mut rng);
            let alpha = m.mul_vector(&hidden);
            let x = solve_affine(&m, &alpha).expect("consistent by construction");
            assert_eq!(m.mul_vector(&x), alpha);
        }
    }

    #[test]
    fn random_subspace_edge_dimensions() {
        let p = params(2, 4);
        let mut rng = root_stream(17);
        assert_eq!(Subspace::random(p, 0, &mut rng).unwrap(), Subspace::zero(p));
        assert_eq!(Subspace::random(p, 4, &mut rng).unwrap(), Subspace::full(p));
        assert!(Subspace::random(p, 5, &mut rng).is_err());
    }

    /// Enumerate all dim-2 subspaces of Z_2^4 through brute force; the count
    /// is the Gaussian binomial (4 choose 2)_2 = 35.
    fn all_dim2_subspaces_z2_4() -> std::collections::BTreeSet<Vec<Vec<u8>>> {
        let p = params(2, 4);
        let mut set = std::collections::BTreeSet::new();
        for i in 1..16u64 {
            for j in 1..16u64 {
                let a = FieldVector::from_index(p, i);
                let b = FieldVector::from_index(p, j);
                let m = FieldMatrix::new(p, vec![a.coords().to_vec(), b.coords().to_vec()]).unwrap();
                let (basis, rank) = rref(&m);
                if rank == 2 {
                    set.insert(basis.rows().to_vec());
                }
            }
        }
        set
    }

    #[test]
    fn random_subspace_is_uniform_chi_square() {
        let reps = all_dim2_subspaces_z2_4();
        assert_eq!(reps.len(), 35);
        let index: std::collections::BTreeMap<Vec<Vec<u8>>, usize> =
            reps.into_iter().enumerate().map(|(i, r)| (r, i)).collect();

        let p = params(2, 4);
        let mut rng = root_stream(18);
        let samples = 100_000usize;
        let mut counts = vec![0usize; 35];
        for _ in 0..samples {
            let a = Subspace::random(p, 2, &mut rng).unwrap();
            counts[index[&a.basis().rows().to_vec()]] += 1;
        }
        let expected = samples as f64 / 35.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // df = 34, significance 0.01.
        let crit = {
            use statrs::distribution::{ChiSquared, ContinuousCDF};
            ChiSquared::new(34.0).unwrap().inverse_cdf(0.99)
        };
        assert!(chi2 < crit, "chi2 {} >= critical {}", chi2, crit);
    }

    #[test]
    fn index_round_trip_is_lexicographic() {
        let p = params(3, 2);
        // (0,0) < (0,1) < (0,2) < (1,0) < ...
        assert_eq!(FieldVector::new(p, vec![1, 0]).unwrap().to_index(), 3);
        for idx in 0..p.space_size() {
            assert_eq!(FieldVector::from_index(p, idx).to_index(), idx);
        }
    }
}
