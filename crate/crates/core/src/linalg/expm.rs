use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig;
use crate::linalg::matrix::{ComplexMatrix, C64};

/// exp(G) for anti-Hermitian G, via the eigendecomposition of the Hermitian
/// matrix iG. The result is unitary to roundoff.
pub fn exp_anti_hermitian(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = g.ensure_square()?;
    let h = g.scale(C64::new(0.0, 1.0));
    if h.hermitian_deviation() > 1e-10 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian {
            deviation: h.hermitian_deviation(),
        });
    }
    let h = h.add(&h.adjoint())?.scale_real(0.5);
    let eig = hermitian_eig(&h)?;
    // G = −iH, so exp(G) = V e^{−iΛ} V†.
    let phases: Vec<C64> = eig
        .values
        .iter()
        .map(|l| C64::from_polar(1.0, -l))
        .collect();
    let v = &eig.vectors;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj())
            .sum()
    }))
}
