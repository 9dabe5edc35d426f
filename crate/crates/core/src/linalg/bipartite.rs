use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{ComplexMatrix, C64};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Density operator on H_A ⊗ H_B. Composite index of |i⟩⊗|j⟩ is i·dim_b + j.
///
/// `truncation_deficit` is the population known to be missing because the
/// state was cut off in a finite basis; it is zero for genuinely
/// finite-dimensional states. States are never renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensity {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix,
    truncation_deficit: f64,
}

impl BipartiteDensity {
    /// Checks shape, Hermiticity and trace. Positivity is checked separately
    /// by [`BipartiteDensity::check_positive`] since it costs a full
    /// eigendecomposition.
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        matrix: ComplexMatrix,
        truncation_deficit: f64,
    ) -> Result<Self> {
        check_dims(&matrix, dim_a, dim_b)?;
        matrix.ensure_hermitian(HERMITIAN_TOL)?;
        if !(0.0..1.0).contains(&truncation_deficit) {
            return Err(Error::InvalidParameter(format!(
                "truncation deficit {truncation_deficit}"
            )));
        }
        let tr = matrix.trace();
        let slack = 1e-9;
        if tr.im.abs() > slack || tr.re > 1.0 + slack || tr.re < 1.0 - truncation_deficit - slack {
            return Err(Error::InvalidParameter(format!(
                "trace {:.12} outside [{:.12}, 1]",
                tr.re,
                1.0 - truncation_deficit
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
            truncation_deficit,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// ⟨ij|ρ|kl⟩.
    pub fn element(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.matrix[(i * self.dim_b + j, k * self.dim_b + l)]
    }

    pub fn partial_transpose(&self, subsystem: Subsystem) -> ComplexMatrix {
        pt_unchecked(&self.matrix, self.dim_a, self.dim_b, subsystem)
    }

    pub fn reduced(&self, keep: Subsystem) -> ComplexMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        match keep {
            Subsystem::A => ComplexMatrix::from_fn(da, da, |i, k| {
                (0..db).map(|j| self.matrix[(i * db + j, k * db + j)]).sum()
            }),
            Subsystem::B => ComplexMatrix::from_fn(db, db, |j, l| {
                (0..da).map(|i| self.matrix[(i * db + j, i * db + l)]).sum()
            }),
        }
    }

    /// Returns the minimum eigenvalue, failing if it is below −1e−10.
    pub fn check_positive(&self) -> Result<f64> {
        let min = hermitian_eig(&self.matrix)?.values[0];
        if min < -PSD_TOL {
            return Err(Error::Numerical(format!(
                "density has eigenvalue {min:.3e}"
            )));
        }
        Ok(min)
    }
}

fn check_dims(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<()> {
    let n = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || m.rows() != n || m.cols() != n {
        return Err(Error::Shape(format!(
            "{}x{} matrix for subsystem dimensions ({dim_a}, {dim_b})",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Partial transpose of an operator on H_A ⊗ H_B: ⟨ij|·|kl⟩ → ⟨il|·|kj⟩ for
/// subsystem B, ⟨kj|·|il⟩ for subsystem A.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    check_dims(m, dim_a, dim_b)?;
    Ok(pt_unchecked(m, dim_a, dim_b, subsystem))
}

fn pt_unchecked(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    subsystem: Subsystem,
) -> ComplexMatrix {
    let n = dim_a * dim_b;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j, k, l) = (r / dim_b, r % dim_b, c / dim_b, c % dim_b);
        match subsystem {
            Subsystem::B => m[(i * dim_b + l, k * dim_b + j)],
            Subsystem::A => m[(k * dim_b + j, i * dim_b + l)],
        }
    })
}
