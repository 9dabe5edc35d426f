//! Beam splitter U = exp[θ(a†b − ab†)], cos²θ = T, and the single-mode
//! squeezing witness ΔX² − ¼ with X = ½(a + a†).
//!
//! In the Heisenberg picture U†bU = b cosθ − a sinθ, so at T = ½ output port B
//! carries (b − a)/√2. For the twin beam with x > 0 that combination is the
//! squeezed one.

use serde::Serialize;

use crate::cv::fock::FockTruncation;
use crate::cv::gauss::gauss_noisy_twb;
use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, C64, ZERO};
use crate::linalg::{exp_anti_hermitian, BipartiteDensity, Subsystem};
use crate::witness::evaluate_witness;

/// Annihilation operator on |0⟩..|levels−1⟩.
pub fn annihilation(levels: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(levels, levels, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

fn theta_of(transmissivity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::InvalidParameter(format!(
            "transmissivity {transmissivity} outside [0, 1]"
        )));
    }
    Ok(transmissivity.sqrt().acos())
}

/// Occupations n_a of the states |n_a, total − n_a⟩ inside the cutoff.
fn sector(total: usize, levels: usize) -> Vec<usize> {
    (0..levels)
        .filter(|&n| total >= n && total - n < levels)
        .collect()
}

/// exp[θ(a†b − ab†)] restricted to one total-number sector, in the order of
/// [`sector`].
fn sector_unitary(total: usize, levels: usize, theta: f64) -> Result<ComplexMatrix> {
    let ns = sector(total, levels);
    let size = ns.len();
    let mut g = ComplexMatrix::zeros(size, size);
    for (col, &n) in ns.iter().enumerate() {
        let k = total - n;
        // θ a†b |n, k⟩ = θ√((n+1)k) |n+1, k−1⟩, and its negative adjoint.
        if k > 0 && col + 1 < size {
            let amp = theta * (((n + 1) * k) as f64).sqrt();
            g[(col + 1, col)] += C64::new(amp, 0.0);
            g[(col, col + 1)] -= C64::new(amp, 0.0);
        }
    }
    exp_anti_hermitian(&g)
}

/// Beam-splitter unitary on a two-mode space with `levels` per mode.
///
/// The generator conserves a + b photon number, so each total-number sector of
/// the truncated space is exponentiated separately; the result is exactly
/// block diagonal and unitary to roundoff. Sectors with total ≥ `levels` are
/// incomplete in the truncated space.
pub fn beam_splitter_unitary(levels: usize, transmissivity: f64) -> Result<ComplexMatrix> {
    let theta = theta_of(transmissivity)?;
    let dim = levels * levels;
    let mut u = ComplexMatrix::zeros(dim, dim);
    for total in 0..=2 * (levels - 1) {
        let ns = sector(total, levels);
        let block = sector_unitary(total, levels, theta)?;
        for (r, &nr) in ns.iter().enumerate() {
            for (c, &nc) in ns.iter().enumerate() {
                u[(nr * levels + total - nr, nc * levels + total - nc)] = block[(r, c)];
            }
        }
    }
    Ok(u)
}

/// Per-mode cutoff for the beam splitter such that population in incomplete
/// sectors, weighted by photon number, is at most `tolerance`.
fn padded_levels(rho: &BipartiteDensity, tolerance: f64) -> usize {
    let l = rho.dim_a();
    let max_total = 2 * (l - 1);
    let mut pops = vec![0.0; max_total + 1];
    for a in 0..l {
        for b in 0..l {
            pops[a + b] += rho.element(a, b, a, b).re.max(0.0);
        }
    }
    let mut tail = 0.0;
    let mut levels = max_total + 1;
    // Shrink while everything from `levels − 1` upward stays under tolerance.
    while levels > l {
        let total = levels - 1;
        tail += pops[total] * (total + 1) as f64;
        if tail > tolerance {
            break;
        }
        levels -= 1;
    }
    levels
}

/// One output port of U ρ U†, computed sector by sector without forming the
/// two-mode output. The cutoff is padded so that sectors truncated by the
/// finite basis carry at most `tolerance` photon-weighted population.
pub fn beam_splitter_port(
    rho: &BipartiteDensity,
    transmissivity: f64,
    keep: Subsystem,
    tolerance: f64,
) -> Result<ComplexMatrix> {
    let theta = theta_of(transmissivity)?;
    let lin = rho.dim_a();
    if rho.dim_b() != lin {
        return Err(Error::Shape(
            "beam splitter needs equal cutoffs on both modes".into(),
        ));
    }
    let levels = padded_levels(rho, tolerance);
    let max_total = 2 * (lin - 1);

    // For each sector: input occupations, padded occupations, and the columns
    // of the sector unitary that correspond to input states.
    let mut inputs = Vec::with_capacity(max_total + 1);
    let mut padded = Vec::with_capacity(max_total + 1);
    let mut u_in = Vec::with_capacity(max_total + 1);
    for total in 0..=max_total {
        let ins = sector(total, lin);
        let pads = sector(total, levels);
        let u = sector_unitary(total, levels, theta)?;
        let cols: Vec<usize> = ins
            .iter()
            .map(|n| {
                pads.iter()
                    .position(|p| p == n)
                    .expect("input inside padding")
            })
            .collect();
        u_in.push(ComplexMatrix::from_fn(pads.len(), cols.len(), |r, c| {
            u[(r, cols[c])]
        }));
        inputs.push(ins);
        padded.push(pads);
    }

    let mut reduced = ComplexMatrix::zeros(levels, levels);
    for n_tot in 0..=max_total {
        for m_tot in 0..=max_total {
            let (ins_n, ins_m) = (&inputs[n_tot], &inputs[m_tot]);
            let block = ComplexMatrix::from_fn(ins_n.len(), ins_m.len(), |r, c| {
                rho.element(ins_n[r], n_tot - ins_n[r], ins_m[c], m_tot - ins_m[c])
            });
            if block.max_abs() == 0.0 {
                continue;
            }
            // T = ρ_NM U_M†, then only the output entries sharing the traced
            // occupation are formed.
            let t = block.matmul(&u_in[m_tot].adjoint())?;
            let u_n = &u_in[n_tot];
            for (r, &na) in padded[n_tot].iter().enumerate() {
                for (c, &ma) in padded[m_tot].iter().enumerate() {
                    let (traced_r, traced_c, out_r, out_c) = match keep {
                        Subsystem::B => (na, ma, n_tot - na, m_tot - ma),
                        Subsystem::A => (n_tot - na, m_tot - ma, na, ma),
                    };
                    if traced_r != traced_c {
                        continue;
                    }
                    let value: C64 = u_n
                        .row(r)
                        .iter()
                        .enumerate()
                        .map(|(k, u)| u * t[(k, c)])
                        .sum();
                    reduced[(out_r, out_c)] += value;
                }
            }
        }
    }
    Ok(reduced)
}

/// U ρ U†.
pub fn beam_splitter(rho: &BipartiteDensity, transmissivity: f64) -> Result<BipartiteDensity> {
    let l = rho.dim_a();
    if rho.dim_b() != l {
        return Err(Error::Shape(
            "beam splitter needs equal cutoffs on both modes".into(),
        ));
    }
    let u = beam_splitter_unitary(l, transmissivity)?;
    // ρ' = (U (Uρ)†)†, keeping the sparse U on the left of both products.
    let half = u.matmul(rho.matrix())?;
    let out = u.matmul(&half.adjoint())?.adjoint();
    let out = out.add(&out.adjoint())?.scale_real(0.5);
    BipartiteDensity::new(l, l, out, rho.truncation_deficit())
}

/// ⟨X²⟩ − ⟨X⟩² − ¼ for X = ½(a + a†); negative means sub-vacuum fluctuations.
///
/// ⟨X²⟩ uses ¼(2Re⟨a²⟩ + 2⟨a†a⟩ + Tr ρ) so that the commutator term is not
/// distorted by the last retained level. Fails if Tr ρ differs from one by
/// more than `trace_tol`.
pub fn squeezing_witness(rho: &ComplexMatrix, trace_tol: f64) -> Result<f64> {
    Ok(quadrature_variance(rho, trace_tol)? - 0.25)
}

pub fn quadrature_variance(rho: &ComplexMatrix, trace_tol: f64) -> Result<f64> {
    let l = rho.ensure_square()?;
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > trace_tol {
        return Err(Error::InvalidParameter(format!(
            "single-mode trace {tr:.12} differs from 1 by more than {trace_tol:.1e}"
        )));
    }
    let mut mean_a = ZERO;
    let mut mean_a2 = ZERO;
    let mut number = 0.0;
    for n in 0..l {
        number += n as f64 * rho[(n, n)].re;
        // Tr[ρa] = Σ √n ρ_{n,n−1}, Tr[ρa²] = Σ √(n(n−1)) ρ_{n,n−2}.
        if n >= 1 {
            mean_a += rho[(n, n - 1)] * (n as f64).sqrt();
        }
        if n >= 2 {
            mean_a2 += rho[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt();
        }
    }
    let x2 = 0.25 * (2.0 * mean_a2.re + 2.0 * number + tr);
    Ok(x2 - mean_a.re * mean_a.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsSqueezing {
    pub x: f64,
    pub kappa: f64,
    pub n_max: usize,
    /// Quadrature variance of output port B.
    pub variance: f64,
    pub squeezing_witness: f64,
    /// Tr[R_κ W] on the same noisy state before the beam splitter.
    pub witness_value: f64,
}

/// Noisy twin beam → 50/50 beam splitter → squeezing witness on port B.
pub fn bs_squeezing(x: f64, kappa: f64, trunc: &FockTruncation) -> Result<BsSqueezing> {
    let noisy = gauss_noisy_twb(x, kappa, trunc)?;
    let out_trunc = FockTruncation {
        n_max: noisy.dim_a() - 1,
        ..*trunc
    };
    let witness_value = evaluate_witness(&crate::cv::fock::cv_witness(&out_trunc)?, &noisy)?;
    let port = beam_splitter_port(&noisy, 0.5, Subsystem::B, trunc.tolerance)?;
    let tol = (10.0 * noisy.truncation_deficit()).max(1e-9);
    let variance = quadrature_variance(&port, tol)?;
    Ok(BsSqueezing {
        x,
        kappa,
        n_max: out_trunc.n_max,
        variance,
        squeezing_witness: variance - 0.25,
        witness_value,
    })
}
