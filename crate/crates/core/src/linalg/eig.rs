//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use crate::error::{Error, Result};
use crate::linalg::bipartite::HERMITIAN_TOL;
use crate::linalg::matrix::{ComplexMatrix, C64, ZERO};

pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 · max(1, ‖h‖_F)`. Eigenvalue ties keep the order in which the
/// rotations left them (stable sort), and each eigenvector is rephased so its
/// first non-negligible component is real and positive.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    h.ensure_hermitian(HERMITIAN_TOL)?;
    let n = h.rows();
    let mut a = h.as_slice().to_vec();
    let mut v = ComplexMatrix::identity(n).into_vec();
    for i in 0..n {
        a[i * n + i] = C64::new(a[i * n + i].re, 0.0);
    }

    let threshold = OFF_DIAGONAL_TOL * h.frobenius_norm().max(1.0);
    let skip_below = 1e-3 * threshold / n as f64;
    let mut converged = n == 1;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = a[p * n + q];
                let modulus = g.norm();
                if modulus < skip_below {
                    continue;
                }
                rotate(&mut a, &mut v, n, p, q, g, modulus);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) >= threshold {
        return Err(Error::NoConvergence {
            what: "Jacobi eigensolver",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let columns: Vec<Vec<C64>> = order
        .iter()
        .map(|&k| {
            let mut col: Vec<C64> = (0..n).map(|i| v[i * n + k]).collect();
            fix_phase(&mut col);
            col
        })
        .collect();
    Ok(HermitianEig {
        values,
        vectors: ComplexMatrix::from_columns(&columns)?,
    })
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One two-sided rotation zeroing a[p][q]: J = diag-phase · real Givens.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize, g: C64, modulus: f64) {
    let phase = g / modulus;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * modulus);
    let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let s_conj_phase = phase.conj() * s;
    let c_conj_phase = phase.conj() * c;

    for k in 0..n {
        let hp = a[k * n + p];
        let hq = a[k * n + q];
        a[k * n + p] = hp * c - hq * s_conj_phase;
        a[k * n + q] = hp * s + hq * c_conj_phase;
    }
    let s_phase = phase * s;
    let c_phase = phase * c;
    for k in 0..n {
        let hp = a[p * n + k];
        let hq = a[q * n + k];
        a[p * n + k] = hp * c - hq * s_phase;
        a[q * n + k] = hp * s + hq * c_phase;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(app - t * modulus, 0.0);
    a[q * n + q] = C64::new(aqq + t * modulus, 0.0);

    for k in 0..n {
        let vp = v[k * n + p];
        let vq = v[k * n + q];
        v[k * n + p] = vp * c - vq * s_conj_phase;
        v[k * n + q] = vp * s + vq * c_conj_phase;
    }
}

fn fix_phase(col: &mut [C64]) {
    let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = col.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let rot = first.conj() / first.norm();
        for z in col.iter_mut() {
            *z *= rot;
        }
    }
}
