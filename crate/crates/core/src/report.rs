//! Serializable result records.

use serde::Serialize;

use crate::cv::{
    cv_witness, expect_witness_gauss, expect_witness_phase, phase_noisy_twb, FockTruncation,
};
use crate::error::Result;
use crate::finite::{classify, DepolarizedFamily, QuorumDecomposition};
use crate::linalg::ComplexMatrix;
use crate::tomography::McEstimate;
use crate::witness::evaluate_witness;

#[derive(Debug, Clone, Serialize)]
pub struct QuorumTermReport {
    pub coeff: f64,
    pub local_a: ComplexMatrix,
    pub local_b: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuorumReport {
    pub terms: Vec<QuorumTermReport>,
}

impl From<&QuorumDecomposition> for QuorumReport {
    fn from(q: &QuorumDecomposition) -> Self {
        Self {
            terms: q
                .terms
                .iter()
                .map(|t| QuorumTermReport {
                    coeff: t.coeff,
                    local_a: t.local_a.clone(),
                    local_b: t.local_b.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub d: usize,
    pub p: f64,
    pub sigma: Vec<f64>,
    pub lambda_min: f64,
    pub trace_wr: f64,
    pub entangled: bool,
    pub boundary: bool,
    pub p_threshold: f64,
    pub quorum: QuorumReport,
}

/// Builds the witness for the family, evaluates it and decomposes it into
/// local terms.
pub fn witness_report(family: &DepolarizedFamily) -> Result<WitnessReport> {
    let w = family.witness()?;
    let trace_wr = evaluate_witness(&w, &family.density()?)?;
    let (entangled, boundary) = classify(trace_wr);
    Ok(WitnessReport {
        d: family.d(),
        p: family.p(),
        sigma: family.svd().sigma.clone(),
        lambda_min: family.analytic_min_eig(),
        trace_wr,
        entangled,
        boundary,
        p_threshold: family.detection_threshold()?,
        quorum: QuorumReport::from(&family.quorum()?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub n_max: usize,
    pub tail_bound: f64,
    pub trace_deficit: f64,
    pub expectation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_expectation: Option<f64>,
    pub entangled: bool,
}

/// Numeric Tr[R(t)W] on the truncated space next to the closed form.
pub fn phase_report(x: f64, gamma_t: f64, trunc: &FockTruncation) -> Result<CvReport> {
    let rho = phase_noisy_twb(x, gamma_t, trunc)?;
    let expectation = evaluate_witness(&cv_witness(trunc)?, &rho)?;
    Ok(CvReport {
        x,
        gamma_t: Some(gamma_t),
        kappa: None,
        n_max: trunc.n_max,
        tail_bound: trunc.tail_bound,
        trace_deficit: 1.0 - rho.trace(),
        expectation,
        analytic_expectation: Some(expect_witness_phase(x, gamma_t)?),
        entangled: classify(expectation).0,
    })
}

/// Tr[R_κW] for the Gaussian-noised twin beam. The witness elements are
/// computed from the input cutoff only, so the deficit is the input tail.
pub fn gauss_report(x: f64, kappa: f64, trunc: &FockTruncation) -> Result<CvReport> {
    let expectation = expect_witness_gauss(x, kappa, trunc)?;
    Ok(CvReport {
        x,
        gamma_t: None,
        kappa: Some(kappa),
        n_max: trunc.n_max,
        tail_bound: trunc.tail_bound,
        trace_deficit: trunc.tail_bound,
        expectation,
        analytic_expectation: None,
        entangled: classify(expectation).0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub n_samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub direct_value: f64,
    pub z_score: f64,
}

impl EstimateReport {
    pub fn new(estimate: &McEstimate, seed: u64, direct_value: f64) -> Self {
        Self {
            n_samples: estimate.n_samples,
            seed,
            mean: estimate.mean,
            std_error: estimate.std_error,
            direct_value,
            z_score: (estimate.mean - direct_value) / estimate.std_error,
        }
    }
}
