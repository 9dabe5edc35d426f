//! Witnesses for the depolarized family R = p|Ψ⟩⟩⟨⟨Ψ| + (1−p)/d² I⊗I.
//!
//! With Ψ = XΣY†, the partial transpose of R has its smallest eigenvalue
//! −pσ₁σ₂ + (1−p)/d² on |Ā⟩⟩, Ā = X B̄ Yᵀ, where B̄ is antisymmetric on the two
//! leading singular directions. The witness W̄ = PT(|Ā⟩⟩⟨⟨Ā|) therefore gives
//! Tr[W̄R] = λ_min for every p. B̄ carries entries ±1/√2 so that Ā has unit
//! Hilbert–Schmidt norm.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::matrix::{paulis, ComplexMatrix, C64, ZERO};
use crate::linalg::{
    complex_svd, partial_transpose, vectorize, BipartiteDensity, Subsystem, SvdResult,
};
use crate::witness::{Provenance, WitnessOperator};

pub const NORMALIZATION_TOL: f64 = 1e-10;
/// σ₂ at or below this counts as Schmidt rank one.
pub const SCHMIDT_TOL: f64 = 1e-12;
/// |Tr[WR]| at or below this is reported as the inconclusive boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Ψ = I/√d.
pub fn maximally_entangled(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())
}

/// Diagonal Ψ with the given Schmidt coefficients, padded with zeros to `d`.
pub fn schmidt_operator(coefficients: &[f64], d: usize) -> Result<ComplexMatrix> {
    if coefficients.len() > d {
        return Err(Error::InvalidParameter(format!(
            "{} coefficients for d = {d}",
            coefficients.len()
        )));
    }
    if coefficients.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::InvalidParameter(
            "Schmidt coefficients must be finite and non-negative".into(),
        ));
    }
    let mut diag = coefficients.to_vec();
    diag.resize(d, 0.0);
    Ok(ComplexMatrix::from_real_diag(&diag))
}

/// Random Ψ with unit Hilbert–Schmidt norm (complex Gaussian entries).
pub fn random_psi<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = m.frobenius_norm();
    m.scale_real(1.0 / n)
}

fn check_psi(psi: &ComplexMatrix) -> Result<usize> {
    let d = psi.ensure_square()?;
    let norm_sq = psi.frobenius_norm().powi(2);
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidParameter(format!(
            "Tr[Ψ†Ψ] = {norm_sq:.12}, expected 1"
        )));
    }
    Ok(d)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// p|Ψ⟩⟩⟨⟨Ψ| + (1−p)/d² I⊗I.
pub fn make_depolarized(psi: &ComplexMatrix, p: f64) -> Result<BipartiteDensity> {
    let d = check_psi(psi)?;
    check_p(p)?;
    let v = vectorize(psi)?;
    let c = (1.0 - p) / (d * d) as f64;
    let mut m = ComplexMatrix::outer(&v, &v).scale_real(p);
    for i in 0..d * d {
        m[(i, i)] += c;
    }
    BipartiteDensity::new(d, d, m, 0.0)
}

/// −p·σ₁·σ₂ + (1−p)/d².
pub fn min_eig_from_sigma(sigma: &[f64], p: f64, d: usize) -> f64 {
    let s1 = sigma.first().copied().unwrap_or(0.0);
    let s2 = sigma.get(1).copied().unwrap_or(0.0);
    -p * s1 * s2 + (1.0 - p) / (d * d) as f64
}

/// p* = 1/(1 + d²σ₁σ₂), where the minimum PT eigenvalue crosses zero.
pub fn threshold_from_sigma(sigma: &[f64], d: usize) -> Result<f64> {
    if sigma.len() < 2 || sigma[1] <= SCHMIDT_TOL {
        return Err(Error::SchmidtRankTooLow);
    }
    Ok(1.0 / (1.0 + (d * d) as f64 * sigma[0] * sigma[1]))
}

/// A validated pure state Ψ with a mixing weight, plus its SVD.
#[derive(Debug, Clone)]
pub struct DepolarizedFamily {
    psi: ComplexMatrix,
    p: f64,
    d: usize,
    svd: SvdResult,
}

impl DepolarizedFamily {
    pub fn new(psi: ComplexMatrix, p: f64) -> Result<Self> {
        let d = check_psi(&psi)?;
        check_p(p)?;
        let svd = complex_svd(&psi)?;
        Ok(Self { psi, p, d, svd })
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self { p, ..self.clone() })
    }

    pub fn psi(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn svd(&self) -> &SvdResult {
        &self.svd
    }

    pub fn density(&self) -> Result<BipartiteDensity> {
        make_depolarized(&self.psi, self.p)
    }

    pub fn analytic_min_eig(&self) -> f64 {
        min_eig_from_sigma(&self.svd.sigma, self.p, self.d)
    }

    pub fn detection_threshold(&self) -> Result<f64> {
        threshold_from_sigma(&self.svd.sigma, self.d)
    }

    pub fn abar(&self) -> Result<ComplexMatrix> {
        abar_from_svd(&self.svd)
    }

    pub fn witness(&self) -> Result<WitnessOperator> {
        build_witness(&self.abar()?)
    }

    pub fn quorum(&self) -> Result<QuorumDecomposition> {
        quorum_from_svd(&self.svd)
    }
}

pub fn analytic_min_eig(family: &DepolarizedFamily) -> f64 {
    family.analytic_min_eig()
}

fn ensure_schmidt_rank_two(svd: &SvdResult) -> Result<()> {
    if svd.sigma.len() < 2 || svd.sigma[1] <= SCHMIDT_TOL {
        return Err(Error::SchmidtRankTooLow);
    }
    Ok(())
}

/// B̄: ±1/√2 on the (0, 1) / (1, 0) entries.
fn bbar(d: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = ComplexMatrix::zeros(d, d);
    b[(0, 1)] = C64::new(s, 0.0);
    b[(1, 0)] = C64::new(-s, 0.0);
    b
}

fn abar_from_svd(svd: &SvdResult) -> Result<ComplexMatrix> {
    ensure_schmidt_rank_two(svd)?;
    let d = svd.x.rows();
    svd.x.matmul(&bbar(d))?.matmul(&svd.y.transpose())
}

/// Ā = X B̄ Yᵀ, the operator form of the minimum-eigenvalue eigenvector of
/// PT(R). Unit Hilbert–Schmidt norm.
pub fn build_abar(psi: &ComplexMatrix) -> Result<ComplexMatrix> {
    psi.ensure_square()?;
    abar_from_svd(&complex_svd(psi)?)
}

/// W̄ = PT_B(|Ā⟩⟩⟨⟨Ā|).
pub fn build_witness(abar: &ComplexMatrix) -> Result<WitnessOperator> {
    let d = abar.ensure_square()?;
    let v = vectorize(abar)?;
    let normalization = abar.frobenius_norm();
    let projector = ComplexMatrix::outer(&v, &v);
    let matrix = partial_transpose(&projector, d, d, Subsystem::B)?;
    WitnessOperator::new(matrix, d, d, normalization, Provenance::Depolarized { d })
}

pub fn detection_threshold(psi: &ComplexMatrix) -> Result<f64> {
    let d = psi.ensure_square()?;
    threshold_from_sigma(&complex_svd(psi)?.sigma, d)
}

/// Sign classification of a witness value: (entangled, boundary).
pub fn classify(value: f64) -> (bool, bool) {
    if value.abs() <= BOUNDARY_TOL {
        (false, true)
    } else {
        (value < 0.0, false)
    }
}

/// Labels of the local Pauli settings on the two-level support of Ā.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliLabel {
    T,
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuorumTerm {
    pub label: PauliLabel,
    pub coeff: f64,
    pub local_a: ComplexMatrix,
    pub local_b: ComplexMatrix,
}

/// W̄ = ¼ σ̃_t ⊗ Q + Σ_{α=x,y,z} ¼ σ̃_α ⊗ s_α.
///
/// s_α = Y*(σ_α ⊕ 0)Yᵀ are the Pauli operators embedded on the support of Ā,
/// Q = s_t the projector onto that support, and σ̃_α = X′ s_y s_α s_y X′† with
/// X′ = XYᵀ. The coefficient ¼ reflects the unit-norm Ā; only the three
/// Pauli terms require a measurement setting beyond the projector term.
#[derive(Debug, Clone, Serialize)]
pub struct QuorumDecomposition {
    pub terms: Vec<QuorumTerm>,
}

impl QuorumDecomposition {
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let first = self
            .terms
            .first()
            .ok_or_else(|| Error::Shape("empty quorum".into()))?;
        let n = first.local_a.rows() * first.local_b.rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for t in &self.terms {
            acc = acc.add(&crate::linalg::kron(&t.local_a, &t.local_b).scale_real(t.coeff))?;
        }
        Ok(acc)
    }

    /// Terms with a non-identity local operator on B.
    pub fn measurement_terms(&self) -> impl Iterator<Item = &QuorumTerm> {
        self.terms.iter().filter(|t| t.label != PauliLabel::T)
    }
}

fn embed_2x2(block: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(
        d,
        d,
        |i, j| if i < 2 && j < 2 { block[(i, j)] } else { ZERO },
    )
}

fn quorum_from_svd(svd: &SvdResult) -> Result<QuorumDecomposition> {
    ensure_schmidt_rank_two(svd)?;
    let d = svd.x.rows();
    let y_conj = svd.y.conj();
    let y_t = svd.y.transpose();
    let embed = |block: &ComplexMatrix| -> Result<ComplexMatrix> {
        y_conj.matmul(&embed_2x2(block, d))?.matmul(&y_t)
    };

    let [sx, sy, sz] = paulis();
    let projector = embed(&ComplexMatrix::identity(2))?;
    let s = [embed(&sx)?, embed(&sy)?, embed(&sz)?];
    let x_prime = svd.x.matmul(&y_t)?;
    let x_prime_dag = x_prime.adjoint();
    let s_y = s[1].clone();
    let tilde = |op: &ComplexMatrix| -> Result<ComplexMatrix> {
        x_prime
            .matmul(&s_y)?
            .matmul(op)?
            .matmul(&s_y)?
            .matmul(&x_prime_dag)
    };

    let mut terms = vec![QuorumTerm {
        label: PauliLabel::T,
        coeff: 0.25,
        local_a: tilde(&projector)?,
        local_b: projector,
    }];
    for (label, op) in [PauliLabel::X, PauliLabel::Y, PauliLabel::Z]
        .into_iter()
        .zip(s)
    {
        terms.push(QuorumTerm {
            label,
            coeff: 0.25,
            local_a: tilde(&op)?,
            local_b: op,
        });
    }
    Ok(QuorumDecomposition { terms })
}

pub fn quorum_decompose(psi: &ComplexMatrix) -> Result<QuorumDecomposition> {
    psi.ensure_square()?;
    quorum_from_svd(&complex_svd(psi)?)
}
