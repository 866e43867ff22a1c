//! Eigenvalues of complex Hermitian matrices by cyclic Jacobi rotations.
//!
//! This backs trace distance and PSD checks. The matrices here are small
//! (dimension at most a few hundred), so the O(n³)-per-sweep cost is fine
//! and the method is accurate to machine precision.

use alloc::vec::Vec;

use num_complex::Complex64;
// Needed for f64 math in the no_std build; the test build links std and shadows it.
#[allow(unused_imports)]
use num_traits::Float;

const MAX_SWEEPS: usize = 64;
const OFF_DIAGONAL_TARGET: f64 = 1e-28; // squared Frobenius norm of off-diagonal part

/// Eigenvalues (ascending) of the Hermitian `dim × dim` matrix `m`
/// (row major). The strictly lower triangle is taken as the conjugate of
/// the upper one.
pub fn hermitian_eigenvalues(m: &[Complex64], dim: usize) -> Vec<f64> {
    assert_eq!(m.len(), dim * dim, "matrix shape mismatch");
    if dim == 0 {
        return Vec::new();
    }
    let mut a = m.to_vec();

    // Scale-aware stopping threshold.
    let scale: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().max(1e-300);
    let target = OFF_DIAGONAL_TARGET * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[p * dim + q].norm_sqr();
            }
        }
        if 2.0 * off <= target {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                rotate(&mut a, dim, p, q);
            }
        }
    }

    let mut eigs: Vec<f64> = (0..dim).map(|i| a[i * dim + i].re).collect();
    eigs.sort_by(|x, y| x.total_cmp(y));
    eigs
}

/// One complex Jacobi rotation zeroing out `a[p,q]` (and `a[q,p]`).
fn rotate(a: &mut [Complex64], dim: usize, p: usize, q: usize) {
    let apq = a[p * dim + q];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r;
    let app = a[p * dim + p].re;
    let aqq = a[q * dim + q].re;

    // t solves t² + 2θt − 1 = 0 with θ = (aqq − app) / (2r); take the
    // smaller root for stability.
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let sigma = t * c;
    let s = phase * sigma; // complex sine

    // Rows/columns p and q; unitary U with U[p,p]=c, U[p,q]=s, U[q,p]=−s̄,
    // U[q,q]=c, applied as U† A U.
    for k in 0..dim {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * dim + p];
        let akq = a[k * dim + q];
        let new_kp = akp * c - akq * s.conj();
        let new_kq = akp * s + akq * c;
        a[k * dim + p] = new_kp;
        a[p * dim + k] = new_kp.conj();
        a[k * dim + q] = new_kq;
        a[q * dim + k] = new_kq.conj();
    }
    let cs_r = 2.0 * c * sigma * r;
    let new_pp = c * c * app - cs_r + sigma * sigma * aqq;
    let new_qq = sigma * sigma * app + cs_r + c * c * aqq;
    a[p * dim + p] = Complex64::new(new_pp, 0.0);
    a[q * dim + q] = Complex64::new(new_qq, 0.0);
    a[p * dim + q] = Complex64::ZERO;
    a[q * dim + p] = Complex64::ZERO;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{root_stream, uniform_f64};
    use alloc::vec;

    fn random_hermitian(dim: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = root_stream(seed);
        let mut m = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Complex64::new(uniform_f64(&mut rng) * 2.0 - 1.0, 0.0);
            for j in (i + 1)..dim {
                let z = Complex64::new(
                    uniform_f64(&mut rng) * 2.0 - 1.0,
                    uniform_f64(&mut rng) * 2.0 - 1.0,
                );
                m[i * dim + j] = z;
                m[j * dim + i] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_eigenvalues_are_the_diagonal() {
        let mut m = vec![Complex64::ZERO; 9];
        m[0] = Complex64::new(3.0, 0.0);
        m[4] = Complex64::new(-1.0, 0.0);
        m[8] = Complex64::new(0.5, 0.0);
        let eigs = hermitian_eigenvalues(&m, 3);
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 0.5).abs() < 1e-12);
        assert!((eigs[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_x_has_eigenvalues_plus_minus_one() {
        let m = vec![
            Complex64::ZERO,
            Complex64::ONE,
            Complex64::ONE,
            Complex64::ZERO,
        ];
        let eigs = hermitian_eigenvalues(&m, 2);
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_and_frobenius_norm_are_preserved() {
        for seed in 0..5u64 {
            let dim = 24;
            let m = random_hermitian(dim, seed);
            let eigs = hermitian_eigenvalues(&m, dim);
            let tr: f64 = (0..dim).map(|i| m[i * dim + i].re).sum();
            let fro: f64 = m.iter().map(|x| x.norm_sqr()).sum();
            assert!((eigs.iter().sum::<f64>() - tr).abs() < 1e-9);
            assert!((eigs.iter().map(|e| e * e).sum::<f64>() - fro).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_one_projector_spectrum() {
        // |v⟩⟨v| for normalized v has eigenvalues {1, 0, ..., 0}.
        let dim = 8;
        let mut rng = root_stream(99);
        let mut v = vec![Complex64::ZERO; dim];
        for x in v.iter_mut() {
            *x = Complex64::new(uniform_f64(&mut rng) - 0.5, uniform_f64(&mut rng) - 0.5);
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        let mut m = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                m[i * dim + j] = v[i] * v[j].conj();
            }
        }
        let eigs = hermitian_eigenvalues(&m, dim);
        assert!((eigs[dim - 1] - 1.0).abs() < 1e-10);
        for e in &eigs[..dim - 1] {
            assert!(e.abs() < 1e-10);
        }
    }
}
