//! Gaussian displacement noise G_κ(ρ) = ∫ d²α e^(−|α|²/κ)/(πκ) D(α) ρ D†(α).
//!
//! In polar coordinates ⟨m|D(re^{iθ})|p⟩ = d_mp(r)e^{i(m−p)θ} with d real, so
//! the angular integral is exact and leaves
//! G(m,n;p,q) = δ_{m−n,p−q} ∫ (2r/κ)e^(−r²/κ) d_mp(r) d_nq(r) dr,
//! evaluated by composite Gauss–Legendre quadrature on [0, R].

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::cv::fock::{
    twb_state, witness_from_elements, FockTruncation, GaussNoiseParams, TwbParams,
};
use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, C64, ZERO};
use crate::linalg::{BipartiteDensity, Subsystem};

/// Neglected weight of the Gaussian beyond the radial cutoff R.
pub const WEIGHT_CUTOFF: f64 = 1e-14;
pub const PANEL_WIDTH: f64 = 0.1;
pub const MIN_PANELS: usize = 8;
pub const NODES_PER_PANEL: usize = 16;
/// Extra output levels per mode beyond the input cutoff.
pub const DEFAULT_PAD: usize = 8;
/// Upper limit on the padding search.
pub const MAX_PAD: usize = 512;
/// Bisection tolerance for the separability threshold.
pub const THRESHOLD_TOL: f64 = 1e-6;

/// Radial nodes with the weights (2r/κ)e^(−r²/κ) folded in.
#[derive(Debug, Clone)]
struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn radial_rule(kappa: f64) -> RadialRule {
    let r_max = (kappa * (1.0 / WEIGHT_CUTOFF).ln()).sqrt();
    let panels = ((r_max / PANEL_WIDTH).ceil() as usize).max(MIN_PANELS);
    let h = r_max / panels as f64;
    let rule = GaussLegendre::new(NODES_PER_PANEL.try_into().expect("nonzero"));
    let mut nodes = Vec::with_capacity(panels * NODES_PER_PANEL);
    let mut weights = Vec::with_capacity(panels * NODES_PER_PANEL);
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (t, w) in rule.iter() {
            let r = mid + 0.5 * h * t;
            nodes.push(r);
            weights.push(0.5 * h * w * 2.0 * r / kappa * (-r * r / kappa).exp());
        }
    }
    RadialRule { nodes, weights }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    (0..=n as u64).map(ln_factorial).collect()
}

/// Generalized Laguerre polynomial L_n^(k)(x) by the three-term recurrence.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * cur - (jf + k) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn displacement_radial_with(m: usize, p: usize, r: f64, ln_fact: &[f64]) -> f64 {
    let (lo, hi) = (m.min(p), m.max(p));
    let k = hi - lo;
    let power = if k == 0 { 0.0 } else { k as f64 * r.ln() };
    let magnitude = (0.5 * (ln_fact[lo] - ln_fact[hi]) + power - 0.5 * r * r).exp();
    let sign = if m < p && k % 2 == 1 { -1.0 } else { 1.0 };
    sign * magnitude * laguerre(lo, k, r * r)
}

/// d_mp(r), the real radial part of ⟨m|D(re^{iθ})|p⟩.
pub fn displacement_radial(m: usize, p: usize, r: f64) -> f64 {
    displacement_radial_with(m, p, r, &ln_factorials(m.max(p)))
}

/// ⟨m|D(α)|p⟩ with D(α) = exp(αa† − ᾱa).
pub fn displacement_element(m: usize, p: usize, alpha: C64) -> C64 {
    let (r, theta) = alpha.to_polar();
    C64::from_polar(1.0, (m as f64 - p as f64) * theta) * displacement_radial(m, p, r)
}

/// Single-mode superoperator elements ⟨m|G_κ(|p⟩⟨q|)|n⟩ for inputs below
/// `levels_in` and outputs below `levels_out`.
#[derive(Debug, Clone)]
pub struct GaussChannel {
    kappa: f64,
    levels_in: usize,
    levels_out: usize,
    /// Index (m·levels_out + n)·levels_in + p holds G(m, n; p, p + n − m).
    elements: Vec<f64>,
}

impl GaussChannel {
    pub fn new(kappa: f64, levels_in: usize, levels_out: usize) -> Result<Self> {
        GaussNoiseParams::new(kappa)?;
        if levels_in == 0 || levels_out == 0 {
            return Err(Error::InvalidParameter(
                "channel needs at least one level".into(),
            ));
        }
        let (li, lo) = (levels_in, levels_out);
        let mut elements = vec![0.0; lo * lo * li];
        if kappa == 0.0 {
            for m in 0..lo.min(li) {
                elements[(m * lo + m) * li + m] = 1.0;
            }
            return Ok(Self {
                kappa,
                levels_in,
                levels_out,
                elements,
            });
        }
        let rule = radial_rule(kappa);
        let ln_fact = ln_factorials(li.max(lo));
        // d tables per node: index node·lo·li + m·li + p.
        let tables: Vec<f64> = rule
            .nodes
            .par_iter()
            .flat_map_iter(|&r| {
                let ln_fact = &ln_fact;
                (0..lo).flat_map(move |m| {
                    (0..li).map(move |p| displacement_radial_with(m, p, r, ln_fact))
                })
            })
            .collect();
        let stride = lo * li;
        elements
            .par_chunks_mut(lo * li)
            .enumerate()
            .for_each(|(m, chunk)| {
                for (k, &w) in rule.weights.iter().enumerate() {
                    let d = &tables[k * stride..(k + 1) * stride];
                    for n in 0..lo {
                        for p in 0..li {
                            let Some(q) = (p + n).checked_sub(m).filter(|&q| q < li) else {
                                continue;
                            };
                            chunk[n * li + p] += w * d[m * li + p] * d[n * li + q];
                        }
                    }
                }
            });
        Ok(Self {
            kappa,
            levels_in,
            levels_out,
            elements,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn levels_in(&self) -> usize {
        self.levels_in
    }

    pub fn levels_out(&self) -> usize {
        self.levels_out
    }

    /// ⟨m|G_κ(|p⟩⟨q|)|n⟩.
    pub fn element(&self, m: usize, n: usize, p: usize, q: usize) -> f64 {
        if m >= self.levels_out
            || n >= self.levels_out
            || p >= self.levels_in
            || q >= self.levels_in
        {
            return 0.0;
        }
        if m as isize - n as isize != p as isize - q as isize {
            return 0.0;
        }
        self.elements[(m * self.levels_out + n) * self.levels_in + p]
    }

    /// Population of G_κ(|p⟩⟨p|) that stays below `levels_out`.
    pub fn retained(&self, p: usize) -> f64 {
        (0..self.levels_out).map(|m| self.element(m, m, p, p)).sum()
    }

    /// Applies the channel to one mode of a two-mode operator with per-mode
    /// dimensions (la, lb); returns the new operator and dimensions.
    fn apply_on(
        &self,
        rho: &ComplexMatrix,
        la: usize,
        lb: usize,
        mode: Subsystem,
    ) -> (ComplexMatrix, usize, usize) {
        let (li, lo) = (self.levels_in, self.levels_out);
        match mode {
            Subsystem::A => {
                debug_assert_eq!(la, li);
                let cols = lo * lb;
                let mut out = ComplexMatrix::zeros(lo * lb, cols);
                out.as_mut_slice()
                    .par_chunks_mut(lb * cols)
                    .enumerate()
                    .for_each(|(m, block)| {
                        for n in 0..lo {
                            for p in 0..li {
                                let Some(q) = (p + n).checked_sub(m).filter(|&q| q < li) else {
                                    continue;
                                };
                                let g = self.elements[(m * lo + n) * li + p];
                                if g == 0.0 {
                                    continue;
                                }
                                for j in 0..lb {
                                    let src = &rho.row(p * lb + j)[q * lb..(q + 1) * lb];
                                    let dst =
                                        &mut block[j * cols + n * lb..j * cols + (n + 1) * lb];
                                    for (o, s) in dst.iter_mut().zip(src) {
                                        *o += s * g;
                                    }
                                }
                            }
                        }
                    });
                (out, lo, lb)
            }
            Subsystem::B => {
                debug_assert_eq!(lb, li);
                let cols = la * lo;
                let mut out = ComplexMatrix::zeros(la * lo, cols);
                out.as_mut_slice()
                    .par_chunks_mut(lo * cols)
                    .enumerate()
                    .for_each(|(i, block)| {
                        for k in 0..la {
                            for m in 0..lo {
                                for n in 0..lo {
                                    let mut acc = ZERO;
                                    for p in 0..li {
                                        let Some(q) = (p + n).checked_sub(m).filter(|&q| q < li)
                                        else {
                                            continue;
                                        };
                                        acc += rho[(i * lb + p, k * lb + q)]
                                            * self.elements[(m * lo + n) * li + p];
                                    }
                                    block[m * cols + k * lo + n] = acc;
                                }
                            }
                        }
                    });
                (out, la, lo)
            }
        }
    }
}

/// Output levels per mode: at least `levels_in + DEFAULT_PAD`, grown until the
/// population pushed past the cutoff is below `tolerance`.
fn choose_output_levels(
    kappa: f64,
    levels_in: usize,
    marginals: &[Vec<f64>],
    tolerance: f64,
) -> Result<GaussChannel> {
    let mut pad = DEFAULT_PAD;
    loop {
        let ch = GaussChannel::new(kappa, levels_in, levels_in + pad)?;
        let leak: f64 = marginals
            .iter()
            .map(|pops| {
                pops.iter()
                    .enumerate()
                    .map(|(p, w)| w * (1.0 - ch.retained(p)).max(0.0))
                    .sum::<f64>()
            })
            .sum();
        if leak <= tolerance {
            return Ok(ch);
        }
        if pad >= MAX_PAD {
            return Err(Error::Truncation(format!(
                "Gaussian noise κ = {kappa} leaks {leak:.3e} past {} levels",
                levels_in + pad
            )));
        }
        pad *= 2;
    }
}

/// Applies G_κ ⊗ G_κ. The output cutoff grows so that the population lost
/// past it stays below `trunc.tolerance`; the loss is added to the truncation
/// deficit rather than renormalized away.
pub fn gauss_channel_apply(
    rho: &BipartiteDensity,
    kappa: f64,
    trunc: &FockTruncation,
) -> Result<BipartiteDensity> {
    GaussNoiseParams::new(kappa)?;
    let l = trunc.levels();
    if rho.dim_a() != l || rho.dim_b() != l {
        return Err(Error::Shape(format!(
            "state dims ({}, {}) vs {l} levels per mode",
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    if kappa == 0.0 {
        return Ok(rho.clone());
    }
    let diag = |m: &ComplexMatrix| m.diagonal().iter().map(|z| z.re).collect::<Vec<f64>>();
    let marginals = [
        diag(&rho.reduced(Subsystem::A)),
        diag(&rho.reduced(Subsystem::B)),
    ];
    let ch = choose_output_levels(kappa, l, &marginals, trunc.tolerance)?;
    let (half, la, lb) = ch.apply_on(rho.matrix(), l, l, Subsystem::A);
    let (out, la, lb) = ch.apply_on(&half, la, lb, Subsystem::B);

    let leakage = rho.trace() - out.trace().re;
    if leakage > trunc.tolerance {
        return Err(Error::Truncation(format!(
            "Gaussian noise leaked {leakage:.3e} past the cutoff"
        )));
    }
    let deficit = (rho.truncation_deficit() + leakage.max(0.0)).min(1.0 - f64::EPSILON);
    let out = out.add(&out.adjoint())?.scale_real(0.5);
    BipartiteDensity::new(la, lb, out, deficit)
}

/// Tr[W·(G_κ⊗G_κ)(TWB)] from the four witness-relevant output elements.
///
/// Only G(m,n;p,q) with m, n ∈ {0,1} are needed, so this scales to twin beams
/// with thousands of occupied levels.
pub fn expect_witness_gauss(x: f64, kappa: f64, trunc: &FockTruncation) -> Result<f64> {
    TwbParams::new(x)?;
    GaussNoiseParams::new(kappa)?;
    if x.powi(2 * (trunc.n_max as i32 + 1)) >= trunc.tolerance {
        return Err(Error::Truncation(format!(
            "n_max = {} too small for x = {x}",
            trunc.n_max
        )));
    }
    let l = trunc.levels();
    let c0 = (1.0 - x * x).sqrt();
    let amp: Vec<f64> = (0..l).map(|p| c0 * x.powi(p as i32)).collect();

    // g00[p] = G(0,0;p,p), g11[p] = G(1,1;p,p), g01[p] = G(0,1;p,p+1).
    let (g00, g11, g01) = if kappa == 0.0 {
        let mut g00 = vec![0.0; l];
        let mut g11 = vec![0.0; l];
        let mut g01 = vec![0.0; l];
        g00[0] = 1.0;
        g11[1] = 1.0;
        g01[0] = 1.0;
        (g00, g11, g01)
    } else {
        let rule = radial_rule(kappa);
        let ln_fact = ln_factorials(l + 1);
        let per_p: Vec<(f64, f64, f64)> = (0..l)
            .into_par_iter()
            .map(|p| {
                let mut acc = (0.0, 0.0, 0.0);
                for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let d0 = displacement_radial_with(0, p, r, &ln_fact);
                    let d1 = displacement_radial_with(1, p, r, &ln_fact);
                    let d1_next = displacement_radial_with(1, p + 1, r, &ln_fact);
                    acc.0 += w * d0 * d0;
                    acc.1 += w * d1 * d1;
                    acc.2 += w * d0 * d1_next;
                }
                acc
            })
            .collect();
        (
            per_p.iter().map(|t| t.0).collect(),
            per_p.iter().map(|t| t.1).collect(),
            per_p.iter().map(|t| t.2).collect(),
        )
    };

    let mut r0101 = 0.0;
    let mut r0011 = 0.0;
    for p in 0..l {
        r0101 += amp[p] * amp[p] * g00[p] * g11[p];
        if p + 1 < l {
            r0011 += amp[p] * amp[p + 1] * g01[p] * g01[p];
        }
    }
    Ok(witness_from_elements(r0101, r0101, C64::new(r0011, 0.0)))
}

/// Zero crossing of the noisy twin-beam witness in κ, with comparators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussThreshold {
    pub x: f64,
    /// Bisection root of `expect_witness_gauss` on [0, 2].
    pub kappa_numeric: f64,
    /// 1 − ½(1−x)/(1+x).
    pub kappa_reference: f64,
    /// x/(1+x), where the noisy twin beam becomes PPT.
    pub kappa_ppt: f64,
}

/// Reference crossing 1 − ½(1−x)/(1+x).
pub fn reference_threshold(x: f64) -> f64 {
    1.0 - 0.5 * (1.0 - x) / (1.0 + x)
}

/// κ = x/(1+x): noise at which the symmetric Gaussian state reaches the PPT
/// boundary (variance of the squeezed combination back at the vacuum level).
pub fn ppt_threshold(x: f64) -> f64 {
    x / (1.0 + x)
}

/// Large-n̄ form 1 − 1/(4n̄).
pub fn large_n_bar_threshold(n_bar: f64) -> f64 {
    1.0 - 0.25 / n_bar
}

pub fn gauss_separability_threshold(x: f64, tolerance: f64) -> Result<GaussThreshold> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold needs 0 < x < 1, got {x}"
        )));
    }
    let trunc = FockTruncation::for_twb(x, tolerance)?;
    let f = |k: f64| expect_witness_gauss(x, k, &trunc);
    let kappa_numeric = bisect_sign_change(f, 0.0, 2.0, THRESHOLD_TOL)?;
    Ok(GaussThreshold {
        x,
        kappa_numeric,
        kappa_reference: reference_threshold(x),
        kappa_ppt: ppt_threshold(x),
    })
}

/// Root of a function that is negative at `lo` and non-negative at `hi`.
pub fn bisect_sign_change(
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo < 0.0 && f_hi >= 0.0) {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo:.3e}, {f_hi:.3e}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Convenience: the noisy twin beam as a full density matrix.
pub fn gauss_noisy_twb(x: f64, kappa: f64, trunc: &FockTruncation) -> Result<BipartiteDensity> {
    gauss_channel_apply(&twb_state(x, trunc)?, kappa, trunc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::fock::cv_witness;
    use crate::linalg::exp_anti_hermitian;
    use crate::witness::evaluate_witness;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn annihilation(levels: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(levels, levels, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_close(laguerre(0, 3, x), 1.0, 0.0);
        assert_close(laguerre(1, 2, x), 3.0 - x, 1e-15);
        assert_close(laguerre(2, 1, x), 0.5 * (x * x - 6.0 * x + 6.0), 1e-15);
    }

    #[test]
    fn displacement_matches_matrix_exponential() {
        let levels = 90;
        let a = annihilation(levels);
        for alpha in [C64::new(0.7, 0.0), C64::new(-0.4, 0.9), C64::new(1.3, -0.2)] {
            let g = a
                .adjoint()
                .scale(alpha)
                .sub(&a.scale(alpha.conj()))
                .unwrap();
            let d = exp_anti_hermitian(&g).unwrap();
            for m in 0..12 {
                for p in 0..12 {
                    let want = d[(m, p)];
                    let got = displacement_element(m, p, alpha);
                    assert!((want - got).norm() < 1e-11, "({m},{p}) {want} vs {got}");
                }
            }
        }
    }

    #[test]
    fn vacuum_survival_closed_form() {
        for kappa in [0.05, 0.4, 1.0, 2.0] {
            let ch = GaussChannel::new(kappa, 12, 40).unwrap();
            for p in 0..12 {
                let want = kappa.powi(p as i32) / (1.0 + kappa).powi(p as i32 + 1);
                assert_close(ch.element(0, 0, p, p), want, 1e-13);
            }
        }
    }

    #[test]
    fn vacuum_survival_against_planar_quadrature() {
        let kappa = 0.7;
        // Brute-force Cartesian midpoint rule for ∫ e^{−|α|²} e^{−|α|²/κ}/(πκ) d²α.
        let (n, half) = (800, 7.0);
        let h = 2.0 * half / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h);
                let r2 = u * u + v * v;
                acc += (-r2).exp() * (-r2 / kappa).exp() / (std::f64::consts::PI * kappa) * h * h;
            }
        }
        let ch = GaussChannel::new(kappa, 2, 2).unwrap();
        assert_close(ch.element(0, 0, 0, 0), acc, 1e-10);
        assert_close(acc, 1.0 / (1.0 + kappa), 1e-10);
    }

    #[test]
    fn trace_preservation_and_photon_shift() {
        let kappa = 0.6;
        let ch = GaussChannel::new(kappa, 6, 80).unwrap();
        for p in 0..6 {
            assert_close(ch.retained(p), 1.0, 1e-12);
            let mean: f64 = (0..80).map(|m| m as f64 * ch.element(m, m, p, p)).sum();
            assert_close(mean, p as f64 + kappa, 1e-10);
        }
        assert_eq!(ch.element(0, 1, 0, 0), 0.0);
        assert_close(ch.element(1, 0, 2, 1), ch.element(0, 1, 1, 2), 1e-16);
    }

    #[test]
    fn identity_at_zero_noise() {
        let t = FockTruncation::for_twb(0.4, 1e-10).unwrap();
        let rho = twb_state(0.4, &t).unwrap();
        assert_eq!(gauss_channel_apply(&rho, 0.0, &t).unwrap(), rho);
        assert!(gauss_channel_apply(&rho, -0.1, &t).is_err());
    }

    #[test]
    fn noisy_twb_is_valid_state() {
        let x = 0.3;
        let t = FockTruncation::for_twb(x, 1e-10).unwrap();
        let out = gauss_noisy_twb(x, 0.2, &t).unwrap();
        assert!(out.truncation_deficit() <= 10.0 * t.tail_bound.max(t.tolerance));
        assert!(out.check_positive().unwrap() >= -1e-9);
        assert!(out.matrix().hermitian_deviation() == 0.0);
    }

    #[test]
    fn structured_expectation_matches_full_channel() {
        let x = 0.5;
        let t = FockTruncation::for_twb(x, 1e-10).unwrap();
        for kappa in [0.0, 0.1, 0.4, 0.9] {
            let out = gauss_noisy_twb(x, kappa, &t).unwrap();
            let w = cv_witness(&FockTruncation {
                n_max: out.dim_a() - 1,
                ..t
            })
            .unwrap();
            let full = evaluate_witness(&w, &out).unwrap();
            assert_close(expect_witness_gauss(x, kappa, &t).unwrap(), full, 1e-12);
        }
        assert_close(expect_witness_gauss(x, 0.0, &t).unwrap(), -0.375, 1e-15);
    }

    #[test]
    fn crossing_sits_at_ppt_boundary() {
        for x in [0.3, 0.5, 0.7] {
            let th = gauss_separability_threshold(x, 1e-10).unwrap();
            assert_close(th.kappa_numeric, x / (1.0 + x), 2e-6);
            assert_close(th.kappa_reference, 1.0 - 0.5 * (1.0 - x) / (1.0 + x), 0.0);
        }
        let t = FockTruncation::for_twb(0.5, 1e-10).unwrap();
        assert!(expect_witness_gauss(0.5, 0.3, &t).unwrap() < 0.0);
        assert!(expect_witness_gauss(0.5, 0.4, &t).unwrap() > 0.0);
    }

    #[test]
    fn threshold_small_x_and_monotone() {
        let th = gauss_separability_threshold(0.01, 1e-10).unwrap();
        assert_close(th.kappa_numeric, 0.01 / 1.01, 2e-6);
        let mut last = 0.0;
        for i in 1..10 {
            let k = gauss_separability_threshold(i as f64 / 10.0, 1e-10)
                .unwrap()
                .kappa_numeric;
            assert!(k > last);
            last = k;
        }
        assert!(gauss_separability_threshold(0.0, 1e-10).is_err());
    }

    #[test]
    fn bisection_requires_sign_change() {
        assert!(matches!(
            bisect_sign_change(|k| Ok(k + 1.0), 0.0, 2.0, 1e-6),
            Err(Error::Numerical(_))
        ));
        assert_close(
            bisect_sign_change(|k| Ok(k - 0.75), 0.0, 2.0, 1e-9).unwrap(),
            0.75,
            1e-9,
        );
    }
}
