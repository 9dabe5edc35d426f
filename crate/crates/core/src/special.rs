//! Confluent hypergeometric function, harmonic-oscillator wavefunctions and
//! the homodyne pattern functions built from them.
//!
//! Quadrature convention: X = ½(a† + a), so the vacuum quadrature variance is
//! ¼ and ψ₀(x)² = √(2/π)·e^(−2x²).

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Largest |z| accepted by [`chf`].
pub const CHF_MAX_ABS_Z: f64 = 1e4;
/// Largest Fock level accepted by [`oscillator_psi`].
pub const MAX_OSCILLATOR_LEVEL: usize = 2048;

const SERIES_MAX_TERMS: usize = 20_000;
const SERIES_EPS: f64 = 1e-17;
/// Below this |z| negative arguments use the plain series.
const DIRECT_NEGATIVE_LIMIT: f64 = 2.0;
/// Beyond this |z| negative arguments use the asymptotic expansion.
const ASYMPTOTIC_LIMIT: f64 = 60.0;

fn is_non_positive_integer(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}

/// Kummer's function M(a, b, z) = ₁F₁(a; b; z) for real arguments.
///
/// * z ≥ −2, or `a` a non-positive integer: Taylor series.
/// * −60 ≤ z < −2: Kummer transformation e^z·M(b−a, b, −z), whose series has
///   terms of one sign after the first few and so does not cancel.
/// * z < −60: large-argument asymptotic series truncated at its smallest
///   term; the exponentially small companion term is below 1e−20 relative.
pub fn chf(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "chf({a}, {b}, {z}): non-finite argument"
        )));
    }
    if is_non_positive_integer(b) {
        return Err(Error::InvalidParameter(format!(
            "chf: b = {b} is a non-positive integer"
        )));
    }
    if z.abs() > CHF_MAX_ABS_Z {
        return Err(Error::InvalidParameter(format!(
            "chf: |z| = {} exceeds {CHF_MAX_ABS_Z}",
            z.abs()
        )));
    }
    let value = if z >= -DIRECT_NEGATIVE_LIMIT || is_non_positive_integer(a) {
        series(a, b, z)?
    } else if z >= -ASYMPTOTIC_LIMIT || is_non_positive_integer(b - a) {
        z.exp() * series(b - a, b, -z)?
    } else {
        asymptotic_negative(a, b, z)?
    };
    if !value.is_finite() {
        return Err(Error::Numerical(format!("chf({a}, {b}, {z}) overflows")));
    }
    Ok(value)
}

fn series(a: f64, b: f64, z: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        if term == 0.0 || !sum.is_finite() {
            return Ok(sum);
        }
        // Past the peak of the terms, stop once they no longer matter.
        if kf > z.abs() && term.abs() <= SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "confluent hypergeometric series",
        iterations: SERIES_MAX_TERMS,
    })
}

fn asymptotic_negative(a: f64, b: f64, z: f64) -> Result<f64> {
    let y = -z;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for s in 0..SERIES_MAX_TERMS {
        let sf = s as f64;
        let next = term * (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * y);
        // Divergent series: stop at the smallest term.
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            break;
        }
    }
    Ok(gamma(b) / gamma(b - a) * y.powf(-a) * sum)
}

/// Normalized number eigenfunction ψ_n(x) in the quadrature representation
/// X = ½(a† + a).
pub fn oscillator_psi(n: usize, x: f64) -> Result<f64> {
    if n > MAX_OSCILLATOR_LEVEL {
        return Err(Error::InvalidParameter(format!(
            "oscillator level {n} exceeds {MAX_OSCILLATOR_LEVEL}"
        )));
    }
    let mut out = vec![0.0; n + 1];
    oscillator_table_into(x, &mut out);
    Ok(out[n])
}

/// ψ_0(x), …, ψ_{n_max}(x) via the three-term Hermite-function recurrence.
pub fn oscillator_table(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    oscillator_table_into(x, &mut out);
    out
}

/// Fills `out[n] = ψ_n(x)` for every n < out.len().
pub fn oscillator_table_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    // ψ_n(x) = 2^{1/4} φ_n(√2 x) with φ_n the unit-variance Hermite functions.
    let q = std::f64::consts::SQRT_2 * x;
    out[0] = 2f64.powf(0.25) * PI.powf(-0.25) * (-0.5 * q * q).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * q * out[0];
    }
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * q * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

fn chf_unchecked(a: f64, b: f64, z: f64) -> f64 {
    chf(a, b, z).expect("pattern-function arguments are always in range")
}

/// f₀₀(x) = 2 Φ(1, ½; −2x²).
pub fn f00(x: f64) -> f64 {
    2.0 * chf_unchecked(1.0, 0.5, -2.0 * x * x)
}

/// f₀₁(x) = 4√π x Φ(2, 3/2; −2x²).
pub fn f01(x: f64) -> f64 {
    4.0 * PI.sqrt() * x * chf_unchecked(2.0, 1.5, -2.0 * x * x)
}

/// f₁₁(x) = 2[Φ(1, ½; −2x²) − 2Φ(2, ½; −2x²)].
pub fn f11(x: f64) -> f64 {
    let z = -2.0 * x * x;
    2.0 * (chf_unchecked(1.0, 0.5, z) - 2.0 * chf_unchecked(2.0, 0.5, z))
}

/// All three pattern functions at one point, sharing the Φ(1, ½; ·)
/// evaluation. Returns (f₀₀, f₀₁, f₁₁).
pub fn pattern_functions(x: f64) -> (f64, f64, f64) {
    let z = -2.0 * x * x;
    let m1 = chf_unchecked(1.0, 0.5, z);
    (
        2.0 * m1,
        4.0 * PI.sqrt() * x * chf_unchecked(2.0, 1.5, z),
        2.0 * (m1 - 2.0 * chf_unchecked(2.0, 0.5, z)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(got: f64, want: f64, rel: f64, abs: f64) -> bool {
        (got - want).abs() <= rel * want.abs() + abs
    }

    /// (a, b, z, M(a, b, z)) from 40-digit arithmetic.
    const REFERENCE: &[(f64, f64, f64, f64)] = &[
        (1.0, 0.5, -0.5, 0.27522154099292366818),
        (1.0, 0.5, -0.98, -0.066765456375446279212),
        (1.0, 0.5, -5.0, -0.15705088940077441641),
        (1.0, 0.5, -29.9, -0.017641209312328978177),
        (1.0, 0.5, -30.1, -0.017517327956697900761),
        (1.0, 0.5, -59.5, -0.0086246793491833530925),
        (1.0, 0.5, -61.0, -0.0084070531061829545448),
        (1.0, 0.5, -200.0, -0.0025189885714712089441),
        (1.0, 0.5, -1800.0, -0.00027800958138802741217),
        (1.0, 0.5, -10000.0, -0.000050007501875656545475),
        (1.0, 0.5, 3.5, 109.91437845507365981),
        (1.0, 0.5, 40.0, 2638664706181959349.8),
        (1.0, 0.5, 300.0, 5.9632104254117973928e+131),
        (2.0, 1.5, -0.5, 0.5),
        (2.0, 1.5, -0.98, 0.23875131680601316104),
        (2.0, 1.5, -5.0, -0.020672900230348487384),
        (2.0, 1.5, -29.9, -0.00031189889268347716105),
        (2.0, 1.5, -61.0, -0.000070710761672694671785),
        (2.0, 1.5, -1800.0, -7.7289363265368944237e-8),
        (2.0, 1.5, 40.0, 1335824007504616920.8),
        (2.0, 0.5, -0.5, -0.22477845900707633182),
        (2.0, 0.5, -0.98, -0.53471803731523206638),
        (2.0, 0.5, -5.0, 0.049678112902710457432),
        (2.0, 0.5, -30.1, 0.0009955795615599866703),
        (2.0, 0.5, -59.5, 0.00023140225263447936226),
        (2.0, 0.5, -61.0, 0.00021965981788579541306),
        (2.0, 0.5, -10000.0, 7.5037519699320627434e-9),
        (2.0, 0.5, 300.0, 1.7979079432616569139e+134),
        (0.3, 2.7, -5.0, 0.70668128974116776237),
        (0.3, 2.7, -59.5, 0.36244439568148003627),
        (0.3, 2.7, -61.0, 0.35980962429727099397),
        (0.3, 2.7, -10000.0, 0.078458702127314247704),
        (0.3, 2.7, 40.0, 18157261475847.332607),
        (-1.5, 0.25, -0.98, 7.9572957894253544129),
        (-1.5, 0.25, -30.1, 675.75456522677423639),
        (-1.5, 0.25, -200.0, 11220.605957155003412),
        (-1.5, 0.25, 300.0, 1.3984261857449889472e+126),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(a, b, z, want) in REFERENCE {
            let got = chf(a, b, z).unwrap();
            assert!(
                rel_close(got, want, 1e-12, 1e-14),
                "M({a},{b},{z}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn trivial_identities() {
        for &(a, b) in &[(1.0, 0.5), (2.0, 1.5), (-3.0, 0.7)] {
            assert_eq!(chf(a, b, 0.0).unwrap(), 1.0);
        }
        for z in [-70.0f64, -12.0, -1.0, 0.3, 5.0, 50.0] {
            assert!(rel_close(chf(1.0, 1.0, z).unwrap(), z.exp(), 1e-12, 0.0));
        }
    }

    #[test]
    fn agrees_with_naive_200_term_series() {
        let z = -2.0 * 0.7f64 * 0.7;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..200 {
            term *= (1.0 + k as f64) / (0.5 + k as f64) * z / (k as f64 + 1.0);
            sum += term;
        }
        assert!(rel_close(chf(1.0, 0.5, z).unwrap(), sum, 1e-13, 0.0));
    }

    #[test]
    fn rejects_invalid_arguments() {
        assert!(chf(1.0, 0.0, 1.0).is_err());
        assert!(chf(1.0, -2.0, 1.0).is_err());
        assert!(chf(1.0, 0.5, -2e4).is_err());
        assert!(chf(1.0, 0.5, f64::NAN).is_err());
        assert!(matches!(chf(1.0, 0.5, 9000.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn branches_agree_across_asymptotic_switch() {
        for &(a, b) in &[(1.0, 0.5), (2.0, 1.5), (2.0, 0.5), (0.3, 2.7)] {
            for z in [-55.0f64, -60.0, -65.0, -80.0] {
                let transformed = z.exp() * series(b - a, b, -z).unwrap();
                let asym = asymptotic_negative(a, b, z).unwrap();
                assert!(
                    rel_close(asym, transformed, 1e-12, 0.0),
                    "({a},{b},{z}): {asym} vs {transformed}"
                );
            }
        }
    }

    #[test]
    fn kummer_transformation_on_grid() {
        for &(a, b) in &[(1.0, 0.5), (2.0, 1.5), (2.0, 0.5), (0.3, 2.7)] {
            for i in 0..=100 {
                let z = -50.0 + i as f64;
                let lhs = chf(a, b, z).unwrap();
                let rhs = z.exp() * chf(b - a, b, -z).unwrap();
                assert!(
                    rel_close(lhs, rhs, 1e-10, 1e-14),
                    "({a},{b},{z}): {lhs} vs {rhs}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn contiguous_recurrence_in_a(a in 0.5f64..3.0, b in 0.3f64..3.0, z in -100.0f64..30.0) {
            // (b − a) M(a−1) + (2a − b + z) M(a) − a M(a+1) = 0
            let m0 = chf(a - 1.0, b, z).unwrap();
            let m1 = chf(a, b, z).unwrap();
            let m2 = chf(a + 1.0, b, z).unwrap();
            let terms = [(b - a) * m0, (2.0 * a - b + z) * m1, -a * m2];
            let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
            prop_assert!(terms.iter().sum::<f64>().abs() <= 1e-8 * scale + 1e-300);
        }
    }

    fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for k in 1..n {
            s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn vacuum_quadrature_density() {
        let norm = integrate(|x| oscillator_psi(0, x).unwrap().powi(2), -8.0, 8.0, 4000);
        assert!((norm - 1.0).abs() < 1e-12);
        let x = 0.37f64;
        let want = (2.0 / PI).sqrt() * (-2.0 * x * x).exp();
        assert!((oscillator_psi(0, x).unwrap().powi(2) - want).abs() < 1e-15);
    }

    #[test]
    fn fock_quadrature_moments() {
        assert_eq!(oscillator_psi(1, 0.0).unwrap(), 0.0);
        let var1 = integrate(
            |x| x * x * oscillator_psi(1, x).unwrap().powi(2),
            -8.0,
            8.0,
            4000,
        );
        assert!((var1 - 0.75).abs() < 1e-12);
        for n in 0..6 {
            let var = integrate(
                |x| x * x * oscillator_psi(n, x).unwrap().powi(2),
                -10.0,
                10.0,
                8000,
            );
            assert!((var - (2 * n + 1) as f64 / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn oscillator_orthonormality() {
        let n_max = 30;
        let lo = -12.0;
        let steps = 12000;
        let h = 24.0 / steps as f64;
        let tables: Vec<Vec<f64>> = (0..=steps)
            .map(|k| oscillator_table(n_max, lo + k as f64 * h))
            .collect();
        for n in [0, 3, 17, 30] {
            for m in [0, 1, 17, 29, 30] {
                let mut s = 0.0;
                for (k, t) in tables.iter().enumerate() {
                    let w = if k == 0 || k == steps {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    s += w * t[n] * t[m];
                }
                s *= h / 3.0;
                assert!(
                    (s - if n == m { 1.0 } else { 0.0 }).abs() < 1e-9,
                    "<{n}|{m}> = {s}"
                );
            }
        }
        assert!(oscillator_psi(MAX_OSCILLATOR_LEVEL + 1, 0.0).is_err());
    }

    #[test]
    fn pattern_functions_at_origin() {
        assert_eq!(f00(0.0), 2.0);
        assert_eq!(f01(0.0), 0.0);
        assert_eq!(f11(0.0), -2.0);
        let (a, b, c) = pattern_functions(0.8);
        assert_eq!((a, b, c), (f00(0.8), f01(0.8), f11(0.8)));
    }

    #[test]
    fn pattern_functions_decay() {
        for k in 0..=2000 {
            let x = -10.0 + k as f64 * 0.01;
            for f in [f00(x), f01(x), f11(x)] {
                assert!(f.is_finite() && f.abs() < 10.0);
            }
        }
        for x in [-10.0, 10.0] {
            assert!(f00(x).abs() < 1.0 && f01(x).abs() < 1.0 && f11(x).abs() < 1.0);
        }
        assert!(f00(30.0).abs() < f00(10.0).abs());
    }

    #[test]
    fn pattern_functions_estimate_diagonal_elements() {
        // ∫ψ_n² f₀₀ = δ_n0 and ∫ψ_n² f₁₁ = δ_n1.
        for n in 0..4 {
            let e00 = integrate(
                |x| oscillator_psi(n, x).unwrap().powi(2) * f00(x),
                -10.0,
                10.0,
                8000,
            );
            let e11 = integrate(
                |x| oscillator_psi(n, x).unwrap().powi(2) * f11(x),
                -10.0,
                10.0,
                8000,
            );
            assert!((e00 - if n == 0 { 1.0 } else { 0.0 }).abs() < 1e-9);
            assert!((e11 - if n == 1 { 1.0 } else { 0.0 }).abs() < 1e-9);
        }
        // The printed f₀₁ carries ∫ψ₀ψ₁f₀₁ = √π/2 rather than 1.
        let e01 = integrate(
            |x| oscillator_psi(0, x).unwrap() * oscillator_psi(1, x).unwrap() * f01(x),
            -10.0,
            10.0,
            8000,
        );
        assert!((e01 - PI.sqrt() / 2.0).abs() < 1e-9);
    }
}
