//! Simulated two-mode homodyne detection and Monte Carlo witness estimation.
//!
//! Outcomes follow p(x₁,x₂|φ₁,φ₂) = ⟨x₁,x₂|U_φ ρ U_φ†|x₁,x₂⟩ with quadratures
//! X_φ = ½(a†e^{iφ} + ae^{−iφ}). In the number basis this is
//! Σ ρ_{nm,n′m′} ψ_n(x₁)ψ_{n′}(x₁)e^{−i(n−n′)φ₁} ψ_m(x₂)ψ_{m′}(x₂)e^{−i(m−m′)φ₂}.
//!
//! Sampling draws x₁ from its marginal and then x₂ from the conditional
//! density, both by inverting cell-integrated CDF tables.

use std::f64::consts::PI;
use std::io::Write;

use gauss_quad::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::matrix::C64;
use crate::linalg::{BipartiteDensity, Subsystem};
use crate::special::{oscillator_table_into, pattern_functions};

/// Samples per RNG stream. Fixed so results do not depend on the worker count.
pub const BLOCK_SIZE: usize = 4096;
/// CDF table cell width.
pub const CDF_STEP: f64 = 1e-3;
/// Population ignored when cropping the Fock basis for sampling.
pub const CROP_TOL: f64 = 1e-12;
pub const PDF_NEGATIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomodyneSample {
    pub phi1: f64,
    pub x1: f64,
    pub phi2: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomodyneBatch {
    pub samples: Vec<HomodyneSample>,
    pub seed: u64,
    pub state_descriptor: String,
}

impl HomodyneBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV with header `phi1,x1,phi2,x2` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "phi1,x1,phi2,x2")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.phi1, s.x1, s.phi2, s.x2
            )?;
        }
        Ok(())
    }
}

/// Half-width max(4, 3√(n̄+1)) where n̄ is the total mean photon number.
pub fn grid_half_width(rho: &BipartiteDensity) -> f64 {
    let mut n_bar = 0.0;
    for a in 0..rho.dim_a() {
        for b in 0..rho.dim_b() {
            n_bar += (a + b) as f64 * rho.element(a, b, a, b).re;
        }
    }
    (3.0 * (n_bar.max(0.0) + 1.0).sqrt()).max(4.0)
}

/// Joint outcome density on a square grid of `points` nodes per axis over
/// [−L, L].
#[derive(Debug, Clone, Serialize)]
pub struct JointPdf {
    pub xs: Vec<f64>,
    /// Row-major: values[i·n + j] = p(xs[i], xs[j]).
    pub values: Vec<f64>,
    pub step: f64,
}

impl JointPdf {
    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        let n = self.xs.len();
        let w = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += w(i) * w(j) * self.values[i * n + j];
            }
        }
        acc * self.step * self.step
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.xs.len() + j]
    }
}

fn phases(phi: f64, levels: usize) -> Vec<C64> {
    // e^{−ikφ} for k = −(levels−1)..=(levels−1), offset by levels−1.
    (0..2 * levels - 1)
        .map(|i| C64::from_polar(1.0, -((i as f64) - (levels as f64 - 1.0)) * phi))
        .collect()
}

/// Nonzero elements ρ_{nm,n′m′} as (n, m, n′, m′, value).
fn nonzeros(rho: &BipartiteDensity, levels: usize) -> Vec<(usize, usize, usize, usize, C64)> {
    let mut out = Vec::new();
    for n in 0..levels {
        for m in 0..levels {
            for n2 in 0..levels {
                for m2 in 0..levels {
                    let v = rho.element(n, m, n2, m2);
                    if v.norm() != 0.0 {
                        out.push((n, m, n2, m2, v));
                    }
                }
            }
        }
    }
    out
}

/// Conditional mode-B operator σ(x₁, φ₁) = Σ ρ_{nm,n′m′}ψ_nψ_{n′}e^{−i(n−n′)φ₁}|m⟩⟨m′|.
fn conditional_operator(
    entries: &[(usize, usize, usize, usize, C64)],
    psi: &[f64],
    ph: &[C64],
    levels: usize,
    out: &mut [C64],
) {
    out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    let off = levels - 1;
    for &(n, m, n2, m2, v) in entries {
        out[m * levels + m2] += v * (psi[n] * psi[n2]) * ph[n + off - n2];
    }
}

/// Re[σ_{mm′}e^{−i(m−m′)φ}], the real symmetric matrix whose quadratic form
/// in ψ(x) is the density at x.
fn phase_rotated_real(sigma: &[C64], ph: &[C64], levels: usize, out: &mut [f64]) {
    let off = levels - 1;
    for m in 0..levels {
        for m2 in 0..levels {
            out[m * levels + m2] = (sigma[m * levels + m2] * ph[m + off - m2]).re;
        }
    }
}

/// p(x₁,x₂|φ₁,φ₂) on a grid of `points` nodes per axis over [−L, L].
pub fn joint_quadrature_pdf(
    rho: &BipartiteDensity,
    phi1: f64,
    phi2: f64,
    half_width: f64,
    points: usize,
) -> Result<JointPdf> {
    if points < 2 || !(half_width > 0.0) {
        return Err(Error::InvalidParameter(
            "pdf grid needs ≥ 2 points and positive width".into(),
        ));
    }
    if rho.dim_a() != rho.dim_b() {
        return Err(Error::Shape("homodyne pdf expects equal cutoffs".into()));
    }
    let levels = rho.dim_a();
    let entries = nonzeros(rho, levels);
    let step = 2.0 * half_width / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| -half_width + i as f64 * step).collect();
    let psi: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let mut t = vec![0.0; levels];
            oscillator_table_into(x, &mut t);
            t
        })
        .collect();
    let (ph1, ph2) = (phases(phi1, levels), phases(phi2, levels));
    let mut values = vec![0.0; points * points];
    let mut sigma = vec![C64::new(0.0, 0.0); levels * levels];
    let mut s = vec![0.0; levels * levels];
    for i in 0..points {
        conditional_operator(&entries, &psi[i], &ph1, levels, &mut sigma);
        phase_rotated_real(&sigma, &ph2, levels, &mut s);
        for j in 0..points {
            values[i * points + j] = quadratic_form(&s, &psi[j], levels);
        }
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PDF_NEGATIVITY_TOL {
        return Err(Error::Numerical(format!(
            "homodyne density reaches {min:.3e}"
        )));
    }
    Ok(JointPdf { xs, values, step })
}

fn quadratic_form(s: &[f64], v: &[f64], levels: usize) -> f64 {
    let mut acc = 0.0;
    for m in 0..levels {
        let row = &s[m * levels..(m + 1) * levels];
        acc += v[m] * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
    acc
}

/// Smallest per-mode cutoff keeping all but `tol` of both marginal populations.
fn cropped_levels(rho: &BipartiteDensity, tol: f64) -> usize {
    let l = rho.dim_a();
    let pa = rho.reduced(Subsystem::A).diagonal();
    let pb = rho.reduced(Subsystem::B).diagonal();
    let mut tail = 0.0;
    let mut levels = l;
    while levels > 2 {
        let n = levels - 1;
        tail += pa[n].re.max(0.0) + pb[n].re.max(0.0);
        if tail > tol {
            break;
        }
        levels -= 1;
    }
    levels
}

/// Precomputed tables for drawing homodyne outcomes from one state.
pub struct HomodyneSampler {
    levels: usize,
    entries: Vec<(usize, usize, usize, usize, C64)>,
    /// Reduced state of mode A.
    rho_a: Vec<C64>,
    half_width: f64,
    cells: usize,
    /// cdf[j·levels² + m·levels + m′] = ∫_{−L}^{x_j} ψ_mψ_{m′} dx.
    cdf: Vec<f64>,
    descriptor: String,
}

impl HomodyneSampler {
    pub fn new(rho: &BipartiteDensity, descriptor: impl Into<String>) -> Result<Self> {
        if rho.dim_a() != rho.dim_b() {
            return Err(Error::Shape(
                "homodyne sampling expects equal cutoffs".into(),
            ));
        }
        let levels = cropped_levels(rho, CROP_TOL);
        let entries = nonzeros(rho, levels);
        let rho_a = {
            let r = rho.reduced(Subsystem::A);
            (0..levels)
                .flat_map(|n| (0..levels).map(move |k| (n, k)))
                .map(|(n, k)| r[(n, k)])
                .collect()
        };
        let half_width = grid_half_width(rho);
        let cells = (2.0 * half_width / CDF_STEP).ceil() as usize;
        let h = 2.0 * half_width / cells as f64;
        let l2 = levels * levels;
        let rule = GaussLegendre::new(4.try_into().expect("nonzero"));
        let nodes: Vec<(f64, f64)> = rule.iter().map(|(t, w)| (*t, *w)).collect();
        let mut cdf = vec![0.0; (cells + 1) * l2];
        let mut psi = vec![0.0; levels];
        for j in 0..cells {
            let mid = -half_width + (j as f64 + 0.5) * h;
            let (prev, next) = cdf.split_at_mut((j + 1) * l2);
            let prev = &prev[j * l2..];
            let next = &mut next[..l2];
            next.copy_from_slice(prev);
            for &(t, w) in &nodes {
                oscillator_table_into(mid + 0.5 * h * t, &mut psi);
                let wh = 0.5 * h * w;
                for m in 0..levels {
                    for m2 in 0..levels {
                        next[m * levels + m2] += wh * psi[m] * psi[m2];
                    }
                }
            }
        }
        Ok(Self {
            levels,
            entries,
            rho_a,
            half_width,
            cells,
            cdf,
            descriptor: descriptor.into(),
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn cdf_at(&self, s: &[f64], j: usize) -> f64 {
        let l2 = self.levels * self.levels;
        self.cdf[j * l2..(j + 1) * l2]
            .iter()
            .zip(s)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Inverts the CDF Σ s_{mm′}C_{mm′}(x) at fraction `u` of its total mass,
    /// interpolating linearly inside the bracketing cell.
    fn invert(&self, s: &[f64], u: f64) -> f64 {
        let total = self.cdf_at(s, self.cells);
        let target = u * total;
        let (mut lo, mut hi) = (0usize, self.cells);
        let (mut c_lo, mut c_hi) = (0.0, total);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let c = self.cdf_at(s, mid);
            if c <= target {
                lo = mid;
                c_lo = c;
            } else {
                hi = mid;
                c_hi = c;
            }
        }
        let h = 2.0 * self.half_width / self.cells as f64;
        let frac = if c_hi > c_lo {
            ((target - c_lo) / (c_hi - c_lo)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        -self.half_width + (lo as f64 + frac) * h
    }

    fn draw_block(&self, seed: u64, block: usize, count: usize) -> Vec<HomodyneSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block as u64);
        let l = self.levels;
        let mut psi = vec![0.0; l];
        let mut sigma = vec![C64::new(0.0, 0.0); l * l];
        let mut s = vec![0.0; l * l];
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let phi1 = PI * rng.random::<f64>();
            let phi2 = PI * rng.random::<f64>();
            let (u1, u2): (f64, f64) = (rng.random(), rng.random());
            let ph1 = phases(phi1, l);
            phase_rotated_real(&self.rho_a, &ph1, l, &mut s);
            let x1 = self.invert(&s, u1);
            oscillator_table_into(x1, &mut psi);
            conditional_operator(&self.entries, &psi, &ph1, l, &mut sigma);
            phase_rotated_real(&sigma, &phases(phi2, l), l, &mut s);
            let x2 = self.invert(&s, u2);
            out.push(HomodyneSample { phi1, x1, phi2, x2 });
        }
        out
    }

    /// `n` samples from fixed-size blocks, block b seeded by (seed, stream b).
    /// Blocks are merged in order, so the batch is identical for any
    /// `workers`.
    pub fn sample(&self, n: usize, seed: u64, workers: usize) -> Result<HomodyneBatch> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be positive".into(),
            ));
        }
        let blocks = n.div_ceil(BLOCK_SIZE);
        let run = || -> Vec<HomodyneSample> {
            (0..blocks)
                .into_par_iter()
                .map(|b| self.draw_block(seed, b, BLOCK_SIZE.min(n - b * BLOCK_SIZE)))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        };
        let samples = with_workers(workers, run)?;
        Ok(HomodyneBatch {
            samples,
            seed,
            state_descriptor: self.descriptor.clone(),
        })
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::InvalidParameter(
            "worker count must be positive".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Convenience wrapper building a sampler for a single batch.
pub fn sample_homodyne(rho: &BipartiteDensity, n: usize, seed: u64) -> Result<HomodyneBatch> {
    HomodyneSampler::new(rho, "")?.sample(n, seed, 1)
}

/// f₀₀(x₁)f₁₁(x₂) + f₁₁(x₁)f₀₀(x₂) − 2cos(φ₁+φ₂)f₀₁(x₁)f₀₁(x₂).
pub fn kernel_w(x1: f64, phi1: f64, x2: f64, phi2: f64) -> f64 {
    let (a00, a01, a11) = pattern_functions(x1);
    let (b00, b01, b11) = pattern_functions(x2);
    a00 * b11 + a11 * b00 - 2.0 * (phi1 + phi2).cos() * a01 * b01
}

/// Unbiased estimator of Tr[ρW] for the twin-beam witness:
/// ½[f₀₀(x₁)f₁₁(x₂) + f₁₁(x₁)f₀₀(x₂)] − (4/π)cos(φ₁+φ₂)f₀₁(x₁)f₀₁(x₂).
///
/// The diagonal products estimate ρ₀₁,₀₁ and ρ₁₀,₁₀ directly. The phase
/// average of cos(φ₁+φ₂)f₀₁f₀₁ yields (π/8)Re ρ₀₀,₁₁, which fixes the weight
/// of the coherence term.
pub fn witness_estimator(x1: f64, phi1: f64, x2: f64, phi2: f64) -> f64 {
    let (a00, a01, a11) = pattern_functions(x1);
    let (b00, b01, b11) = pattern_functions(x2);
    0.5 * (a00 * b11 + a11 * b00) - 4.0 / PI * (phi1 + phi2).cos() * a01 * b01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Sample mean and standard error of `kernel` over the batch. Kernel values
/// are computed in parallel and summed in sample order.
pub fn mc_estimate_with(
    batch: &HomodyneBatch,
    kernel: impl Fn(f64, f64, f64, f64) -> f64 + Sync,
) -> Result<McEstimate> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty homodyne batch".into()));
    }
    let values: Vec<f64> = batch
        .samples
        .par_iter()
        .map(|s| kernel(s.x1, s.phi1, s.x2, s.phi2))
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n_samples: n,
    })
}

/// Monte Carlo estimate of Tr[ρW] from homodyne data.
pub fn mc_estimate_witness(batch: &HomodyneBatch) -> Result<McEstimate> {
    mc_estimate_with(batch, witness_estimator)
}
