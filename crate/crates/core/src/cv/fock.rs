//! Twin-beam states on a truncated two-mode Fock space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::BipartiteDensity;
use crate::witness::{Provenance, WitnessOperator};

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Largest n_max accepted when sizing a truncation automatically.
pub const MAX_FOCK_LEVEL: usize = 4096;

/// Per-mode cutoff: Fock states |0⟩..|n_max⟩ are kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockTruncation {
    pub n_max: usize,
    /// Population x^(2(n_max+1)) discarded from a twin beam with parameter x.
    pub tail_bound: f64,
    pub tolerance: f64,
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance {tolerance} outside (0, 1)"
        )));
    }
    Ok(())
}

pub fn twb_tail(x: f64, n_max: usize) -> f64 {
    x.powi(2 * (n_max as i32 + 1))
}

impl FockTruncation {
    /// Smallest n_max ≥ 1 with x^(2(n_max+1)) < tolerance.
    pub fn for_twb(x: f64, tolerance: f64) -> Result<Self> {
        TwbParams::new(x)?;
        check_tolerance(tolerance)?;
        let mut n_max = 1;
        if x > 0.0 {
            let estimate = (tolerance.ln() / (2.0 * x.ln())).floor() as usize;
            n_max = estimate.saturating_sub(2).max(1);
            while twb_tail(x, n_max) >= tolerance {
                n_max += 1;
                if n_max > MAX_FOCK_LEVEL {
                    return Err(Error::Truncation(format!(
                        "x = {x} needs more than {MAX_FOCK_LEVEL} levels"
                    )));
                }
            }
        }
        Ok(Self {
            n_max,
            tail_bound: twb_tail(x, n_max),
            tolerance,
        })
    }

    /// Fixed cutoff; fails unless the twin-beam tail is below `tolerance`.
    pub fn with_n_max(x: f64, n_max: usize, tolerance: f64) -> Result<Self> {
        TwbParams::new(x)?;
        check_tolerance(tolerance)?;
        if n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be positive".into()));
        }
        let tail_bound = twb_tail(x, n_max);
        if tail_bound >= tolerance {
            return Err(Error::Truncation(format!(
                "n_max = {n_max} leaves tail {tail_bound:.3e} at x = {x}, tolerance {tolerance:.1e}"
            )));
        }
        Ok(Self {
            n_max,
            tail_bound,
            tolerance,
        })
    }

    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    /// Dimension of the two-mode space.
    pub fn dim(&self) -> usize {
        self.levels() * self.levels()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwbParams {
    pub x: f64,
    pub n_bar: f64,
}

impl TwbParams {
    pub fn new(x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "twin-beam parameter x = {x} outside [0, 1)"
            )));
        }
        Ok(Self {
            x,
            n_bar: 2.0 * x * x / (1.0 - x * x),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseNoiseParams {
    pub gamma_t: f64,
}

impl PhaseNoiseParams {
    pub fn new(gamma_t: f64) -> Result<Self> {
        if !(gamma_t >= 0.0 && gamma_t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma_t = {gamma_t} must be finite and non-negative"
            )));
        }
        Ok(Self { gamma_t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussNoiseParams {
    pub kappa: f64,
}

impl GaussNoiseParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {kappa} must be finite and non-negative"
            )));
        }
        Ok(Self { kappa })
    }
}

fn check_tail(x: f64, trunc: &FockTruncation) -> Result<f64> {
    let tail = twb_tail(x, trunc.n_max);
    if tail >= trunc.tolerance {
        return Err(Error::Truncation(format!(
            "n_max = {} leaves tail {tail:.3e} at x = {x}, tolerance {:.1e}",
            trunc.n_max, trunc.tolerance
        )));
    }
    Ok(tail)
}

/// Σ_pq (1−x²) x^(p+q) f(p, q) |pp⟩⟨qq|.
fn twin_diagonal_state(
    x: f64,
    trunc: &FockTruncation,
    f: impl Fn(usize, usize) -> f64,
) -> Result<BipartiteDensity> {
    TwbParams::new(x)?;
    let tail = check_tail(x, trunc)?;
    let l = trunc.levels();
    let c = 1.0 - x * x;
    let amp: Vec<f64> = (0..l).map(|n| x.powi(n as i32)).collect();
    let mut m = ComplexMatrix::zeros(l * l, l * l);
    for p in 0..l {
        for q in 0..l {
            m[(p * l + p, q * l + q)] = C64::new(c * amp[p] * amp[q] * f(p, q), 0.0);
        }
    }
    BipartiteDensity::new(l, l, m, tail)
}

/// (1−x²) Σ_pq x^(p+q) |pp⟩⟨qq|, not renormalized after truncation.
pub fn twb_state(x: f64, trunc: &FockTruncation) -> Result<BipartiteDensity> {
    twin_diagonal_state(x, trunc, |_, _| 1.0)
}

/// Twin beam after phase diffusion: coherences damped by e^(−γt(p−q)²).
pub fn phase_noisy_twb(x: f64, gamma_t: f64, trunc: &FockTruncation) -> Result<BipartiteDensity> {
    PhaseNoiseParams::new(gamma_t)?;
    twin_diagonal_state(x, trunc, |p, q| {
        let k = p.abs_diff(q) as f64;
        (-gamma_t * k * k).exp()
    })
}

/// λ_n = (1−x²)x^(2n), the eigenvalue on |nn⟩.
pub fn pt_diagonal_eigenvalue(x: f64, n: usize) -> f64 {
    (1.0 - x * x) * x.powi(2 * n as i32)
}

/// λ⁺_nm = (1−x²)x^(n+m)e^(−γt(n−m)²) for n ≠ m; the partner eigenvalue is −λ⁺_nm.
pub fn pt_pair_eigenvalue(
    x: f64,
    gamma_t: f64,
    n: usize,
    m: usize,
    trunc: &FockTruncation,
) -> Result<f64> {
    if n == m {
        return Err(Error::InvalidParameter(
            "pair eigenvalues need n ≠ m".into(),
        ));
    }
    if n > trunc.n_max || m > trunc.n_max {
        return Err(Error::InvalidParameter(format!(
            "index ({n}, {m}) beyond n_max = {}",
            trunc.n_max
        )));
    }
    let k = n.abs_diff(m) as f64;
    Ok((1.0 - x * x) * x.powi((n + m) as i32) * (-gamma_t * k * k).exp())
}

/// Full PT spectrum of the truncated phase-noisy twin beam, ascending.
pub fn pt_spectrum_phase(x: f64, gamma_t: f64, trunc: &FockTruncation) -> Result<Vec<f64>> {
    TwbParams::new(x)?;
    PhaseNoiseParams::new(gamma_t)?;
    let mut values = Vec::with_capacity(trunc.dim());
    for n in 0..trunc.levels() {
        values.push(pt_diagonal_eigenvalue(x, n));
        for m in n + 1..trunc.levels() {
            let l = pt_pair_eigenvalue(x, gamma_t, n, m, trunc)?;
            values.push(l);
            values.push(-l);
        }
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// −(1−x²)x·e^(−γt).
pub fn min_pt_eig(x: f64, gamma_t: f64) -> f64 {
    -(1.0 - x * x) * x * (-gamma_t).exp()
}

/// W = ½(|01⟩⟨01| + |10⟩⟨10| − |00⟩⟨11| − |11⟩⟨00|), the partial transpose of
/// the projector onto (|01⟩ − |10⟩)/√2, embedded in the truncated space.
pub fn cv_witness(trunc: &FockTruncation) -> Result<WitnessOperator> {
    if trunc.n_max < 1 {
        return Err(Error::InvalidParameter(
            "the witness needs n_max ≥ 1".into(),
        ));
    }
    let l = trunc.levels();
    let idx = |a: usize, b: usize| a * l + b;
    let mut m = ComplexMatrix::zeros(l * l, l * l);
    m[(idx(0, 1), idx(0, 1))] = C64::new(0.5, 0.0);
    m[(idx(1, 0), idx(1, 0))] = C64::new(0.5, 0.0);
    m[(idx(0, 0), idx(1, 1))] = C64::new(-0.5, 0.0);
    m[(idx(1, 1), idx(0, 0))] = C64::new(-0.5, 0.0);
    WitnessOperator::new(m, l, l, 1.0, Provenance::TwinBeam { n_max: trunc.n_max })
}

/// ½(ρ₀₁,₀₁ + ρ₁₀,₁₀) − Re ρ₀₀,₁₁, i.e. Tr[ρW] read off the four relevant
/// matrix elements.
pub fn witness_from_elements(r0101: f64, r1010: f64, r0011: C64) -> f64 {
    0.5 * (r0101 + r1010) - r0011.re
}

/// Tr[R(t)W] = −(1−x²)x·e^(−γt).
pub fn expect_witness_phase(x: f64, gamma_t: f64) -> Result<f64> {
    TwbParams::new(x)?;
    PhaseNoiseParams::new(gamma_t)?;
    Ok(min_pt_eig(x, gamma_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, Subsystem};
    use crate::witness::evaluate_witness;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn truncation_sizing() {
        let t = FockTruncation::for_twb(0.5, 1e-10).unwrap();
        assert!(t.tail_bound < 1e-10);
        assert!(twb_tail(0.5, t.n_max - 1) >= 1e-10);
        assert_eq!(FockTruncation::for_twb(0.0, 1e-10).unwrap().n_max, 1);
        assert!(matches!(
            FockTruncation::with_n_max(0.8, 5, 1e-10),
            Err(Error::Truncation(_))
        ));
        assert!(FockTruncation::for_twb(1.0, 1e-10).is_err());
        assert!(FockTruncation::for_twb(0.5, 0.0).is_err());
    }

    #[test]
    fn twb_elements() {
        let t = FockTruncation::for_twb(0.5, 1e-10).unwrap();
        let rho = twb_state(0.5, &t).unwrap();
        assert_close(rho.element(0, 0, 0, 0).re, 0.75, 1e-15);
        assert_close(rho.element(1, 1, 0, 0).re, 0.375, 1e-15);
        assert_close(rho.trace(), 1.0 - t.tail_bound, 1e-14);
        assert_close(TwbParams::new(0.5).unwrap().n_bar, 2.0 / 3.0, 1e-15);

        let vac = twb_state(0.0, &FockTruncation::for_twb(0.0, 1e-10).unwrap()).unwrap();
        assert_eq!(vac.element(0, 0, 0, 0).re, 1.0);
        assert_close(vac.trace(), 1.0, 0.0);
    }

    #[test]
    fn mean_photon_number_matches_n_bar() {
        let x = 0.6;
        let t = FockTruncation::for_twb(x, 1e-14).unwrap();
        let rho = twb_state(x, &t).unwrap();
        let l = t.levels();
        let total: f64 = (0..l)
            .map(|n| 2.0 * n as f64 * rho.element(n, n, n, n).re)
            .sum();
        assert_close(total, TwbParams::new(x).unwrap().n_bar, 1e-10);
    }

    #[test]
    fn phase_noise_elements_and_limits() {
        let t = FockTruncation::for_twb(0.5, 1e-10).unwrap();
        let r = phase_noisy_twb(0.5, 1.0, &t).unwrap();
        assert_close(r.element(1, 1, 0, 0).re, 0.375 * (-1.0f64).exp(), 1e-15);
        assert_eq!(
            phase_noisy_twb(0.5, 0.0, &t).unwrap(),
            twb_state(0.5, &t).unwrap()
        );

        let far = phase_noisy_twb(0.5, 800.0, &t).unwrap();
        let l = t.levels();
        for i in 0..l * l {
            for j in 0..l * l {
                if i != j {
                    assert_eq!(far.matrix()[(i, j)].norm(), 0.0);
                }
            }
        }
        for n in 0..l {
            assert_close(
                far.element(n, n, n, n).re,
                0.75 * 0.25f64.powi(n as i32),
                1e-16,
            );
        }
        assert!(phase_noisy_twb(0.5, -1.0, &t).is_err());
    }

    #[test]
    fn phase_noise_support_is_twin_diagonal() {
        let t = FockTruncation::for_twb(0.4, 1e-10).unwrap();
        let r = phase_noisy_twb(0.4, 0.3, &t).unwrap();
        let l = t.levels();
        for i in 0..l * l {
            for j in 0..l * l {
                let twin = i / l == i % l && j / l == j % l;
                if !twin {
                    assert_eq!(r.matrix()[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn pt_spectrum_matches_numeric() {
        let t = FockTruncation::with_n_max(0.5, 15, 1e-8).unwrap();
        for gt in [0.0, 1.0] {
            let r = phase_noisy_twb(0.5, gt, &t).unwrap();
            let numeric = hermitian_eig(&r.partial_transpose(Subsystem::B))
                .unwrap()
                .values;
            let analytic = pt_spectrum_phase(0.5, gt, &t).unwrap();
            assert_eq!(numeric.len(), analytic.len());
            for (a, b) in numeric.iter().zip(&analytic) {
                assert_close(*a, *b, 1e-12);
            }
            assert_close(numeric[0], min_pt_eig(0.5, gt), 1e-12);
        }
        assert_close(pt_diagonal_eigenvalue(0.5, 0), 0.75, 0.0);
        assert_close(min_pt_eig(0.5, 0.0), -0.375, 1e-16);
        assert!(pt_pair_eigenvalue(0.5, 0.0, 2, 2, &t).is_err());
        assert!(pt_pair_eigenvalue(0.5, 0.0, 2, 16, &t).is_err());
    }

    #[test]
    fn witness_structure() {
        let t = FockTruncation::for_twb(0.3, 1e-10).unwrap();
        let w = cv_witness(&t).unwrap();
        assert_close(w.matrix.trace().re, 1.0, 0.0);
        let eig = hermitian_eig(&w.matrix).unwrap().values;
        let nonzero: Vec<f64> = eig.into_iter().filter(|v| v.abs() > 1e-12).collect();
        assert_eq!(nonzero.len(), 4);
        for (v, e) in nonzero.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_close(*v, e, 1e-14);
        }
        let vac = twb_state(0.0, &t).unwrap();
        assert_eq!(evaluate_witness(&w, &vac).unwrap(), 0.0);
    }

    #[test]
    fn witness_on_phase_family() {
        let t = FockTruncation::with_n_max(0.7, 25, 1e-6).unwrap();
        let w = cv_witness(&t).unwrap();
        for (x, gt) in [(0.5, 1.0), (0.7, 0.0), (0.2, 4.0)] {
            let value = evaluate_witness(&w, &phase_noisy_twb(x, gt, &t).unwrap()).unwrap();
            assert_close(value, expect_witness_phase(x, gt).unwrap(), 1e-14);
            assert!(value < 0.0);
        }
        assert_close(
            expect_witness_phase(0.5, 1.0).unwrap(),
            -0.137_954_790_439,
            1e-11,
        );
        assert_eq!(expect_witness_phase(0.0, 1.0).unwrap(), 0.0);
    }
}
