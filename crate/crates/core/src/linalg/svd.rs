use serde::Serialize;

use crate::error::Result;
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{norm, vdot, ComplexMatrix, C64, ZERO};

/// Ψ = X · diag(σ) · Y†, singular values in decreasing order.
#[derive(Debug, Clone, Serialize)]
pub struct SvdResult {
    pub x: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub y: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let sy = ComplexMatrix::from_real_diag(&self.sigma)
            .matmul(&self.y.adjoint())
            .expect("square factors");
        self.x.matmul(&sy).expect("square factors")
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.sigma.iter().filter(|&&s| s > tol).count()
    }
}

/// Singular value decomposition of a square matrix through the Hermitian
/// eigenproblem of Ψ†Ψ.
///
/// Y holds the eigenvectors of Ψ†Ψ ordered by decreasing singular value,
/// ties broken by eigensolver order. Columns of X are Ψ y_k / σ_k where σ_k is
/// numerically nonzero; the remaining columns are filled by Gram–Schmidt over
/// the standard basis.
pub fn complex_svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let d = m.ensure_square()?;
    let gram = m.adjoint().matmul(m)?;
    // Ψ†Ψ is Hermitian up to roundoff; symmetrize before the strict check.
    let gram = gram.add(&gram.adjoint())?.scale_real(0.5);
    let eig = hermitian_eig(&gram)?;

    // σ_k = ‖Ψ y_k‖ is accurate to roundoff even where √λ_k is not.
    let candidates: Vec<(f64, Vec<C64>)> = (0..d)
        .map(|k| {
            let yk = eig.vector(k);
            (norm(&m.matvec(&yk).expect("square")), yk)
        })
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| candidates[j].0.total_cmp(&candidates[i].0).then(i.cmp(&j)));

    let sigma: Vec<f64> = order.iter().map(|&k| candidates[k].0).collect();
    let y_cols: Vec<Vec<C64>> = order.iter().map(|&k| candidates[k].1.clone()).collect();

    let cutoff = 1e-10 * sigma[0];
    let mut x_cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for (s, yk) in sigma.iter().zip(&y_cols) {
        if *s > cutoff {
            let mut col = m.matvec(yk)?;
            col.iter_mut().for_each(|z| *z /= *s);
            orthonormalize_against(&mut col, &x_cols);
            x_cols.push(col);
        }
    }
    let mut e = 0;
    while x_cols.len() < d {
        let mut cand = vec![ZERO; d];
        cand[e] = C64::new(1.0, 0.0);
        e += 1;
        if orthonormalize_against(&mut cand, &x_cols) > 1e-6 {
            x_cols.push(cand);
        }
    }

    Ok(SvdResult {
        x: ComplexMatrix::from_columns(&x_cols)?,
        sigma,
        y: ComplexMatrix::from_columns(&y_cols)?,
    })
}

/// Projects out `basis` (assumed orthonormal) twice, normalizes, and returns
/// the norm before normalization.
fn orthonormalize_against(v: &mut [C64], basis: &[Vec<C64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let overlap = vdot(b, v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
    }
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
    n
}
