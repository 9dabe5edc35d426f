//! Witness operators shared by the finite-dimensional and continuous-variable
//! constructions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::bipartite::HERMITIAN_TOL;
use crate::linalg::matrix::{kron, norm, ComplexMatrix, C64};
use crate::linalg::{hermitian_eig, BipartiteDensity};

/// Which construction produced a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Provenance {
    /// PT(|Ā⟩⟩⟨⟨Ā|) for the depolarized family in dimension `d`.
    Depolarized { d: usize },
    /// PT(|ψ⁻₀₁⟩⟨ψ⁻₀₁|) embedded in a two-mode Fock space with `n_max` per mode.
    TwinBeam { n_max: usize },
}

/// Hermitian operator with Tr[Wρ_sep] ≥ 0 on separable states.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessOperator {
    pub matrix: ComplexMatrix,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Hilbert–Schmidt norm of the vector whose projector generated W.
    pub normalization: f64,
    pub provenance: Provenance,
}

impl WitnessOperator {
    pub fn new(
        matrix: ComplexMatrix,
        dim_a: usize,
        dim_b: usize,
        normalization: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if matrix.rows() != dim_a * dim_b {
            return Err(Error::Shape(format!(
                "{}x{} witness for dims ({dim_a}, {dim_b})",
                matrix.rows(),
                matrix.cols()
            )));
        }
        matrix.ensure_hermitian(HERMITIAN_TOL)?;
        Ok(Self {
            matrix,
            dim_a,
            dim_b,
            normalization,
            provenance,
        })
    }

    /// Number of eigenvalues with |λ| > `tol`.
    pub fn rank(&self, tol: f64) -> Result<usize> {
        Ok(hermitian_eig(&self.matrix)?
            .values
            .iter()
            .filter(|v| v.abs() > tol)
            .count())
    }

    /// ⟨a⊗b|W|a⊗b⟩ for normalized local vectors.
    pub fn product_expectation(&self, a: &[C64], b: &[C64]) -> Result<f64> {
        if a.len() != self.dim_a || b.len() != self.dim_b {
            return Err(Error::Shape(
                "local vector lengths do not match witness dims".into(),
            ));
        }
        let ket: Vec<C64> = a
            .iter()
            .flat_map(|&ai| b.iter().map(move |&bj| ai * bj))
            .collect();
        let w_ket = self.matrix.matvec(&ket)?;
        Ok(ket
            .iter()
            .zip(&w_ket)
            .map(|(k, w)| k.conj() * w)
            .sum::<C64>()
            .re)
    }
}

/// Re Tr[W·ρ]; fails if the imaginary part exceeds 1e−10.
pub fn evaluate_witness(w: &WitnessOperator, rho: &BipartiteDensity) -> Result<f64> {
    if w.dim_a != rho.dim_a() || w.dim_b != rho.dim_b() {
        return Err(Error::Shape(format!(
            "witness dims ({}, {}) vs state dims ({}, {})",
            w.dim_a,
            w.dim_b,
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let value = trace_of_product(&w.matrix, rho.matrix());
    if value.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "Tr[Wρ] has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Tr[A·B] = Σ_ij A_ij B_ji, skipping zero entries of A.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for (k, &aij) in a.as_slice().iter().enumerate() {
        if aij.re != 0.0 || aij.im != 0.0 {
            acc += aij * b[(k % n, k / n)];
        }
    }
    acc
}

/// Haar-random pure state: normalized complex Gaussian vector.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// Minimum of ⟨ab|W|ab⟩ over `samples` Haar-random product states.
pub fn min_product_expectation<R: Rng + ?Sized>(
    w: &WitnessOperator,
    rng: &mut R,
    samples: usize,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let a = random_pure_state(rng, w.dim_a);
        let b = random_pure_state(rng, w.dim_b);
        worst = worst.min(w.product_expectation(&a, &b)?);
    }
    Ok(worst)
}

/// |a⟩⟨a| ⊗ |b⟩⟨b| as a bipartite density.
pub fn product_density(a: &[C64], b: &[C64]) -> Result<BipartiteDensity> {
    let m = kron(&ComplexMatrix::outer(a, a), &ComplexMatrix::outer(b, b));
    BipartiteDensity::new(a.len(), b.len(), m, 0.0)
}
