use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use witnessforge::cv::{
    expect_witness_gauss, expect_witness_phase, gauss_noisy_twb, phase_noisy_twb, twb_state,
    FockTruncation,
};
use witnessforge::finite::{random_psi, DepolarizedFamily};
use witnessforge::linalg::{
    complex_svd, partial_transpose, BipartiteDensity, ComplexMatrix, Subsystem,
};
use witnessforge::tomography::kernel_w;
use witnessforge::witness::evaluate_witness;

fn family(seed: u64, d: usize, p: f64) -> DepolarizedFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DepolarizedFamily::new(random_psi(&mut rng, d), p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn witness_value_matches_min_eigenvalue(seed in any::<u64>(), d in 2usize..6, p in 0.0f64..=1.0) {
        let fam = family(seed, d, p);
        let value = evaluate_witness(&fam.witness().unwrap(), &fam.density().unwrap()).unwrap();
        prop_assert!((value - fam.analytic_min_eig()).abs() < 1e-12);
    }

    #[test]
    fn detection_threshold_is_the_zero(seed in any::<u64>(), d in 2usize..6) {
        let fam = family(seed, d, 0.0);
        let p_star = fam.detection_threshold().unwrap();
        prop_assert!(fam.with_p(p_star).unwrap().analytic_min_eig().abs() < 1e-14);
        // σ₁σ₂ ≤ ½, so no state is detected below 2/(d²+2).
        prop_assert!(p_star >= 2.0 / ((d * d) as f64 + 2.0) - 1e-12 && p_star <= 1.0);
    }

    #[test]
    fn quorum_reconstructs_witness(seed in any::<u64>(), d in 2usize..6) {
        let fam = family(seed, d, 0.5);
        let q = fam.quorum().unwrap();
        let err = q.reconstruct().unwrap().max_abs_diff(&fam.witness().unwrap().matrix).unwrap();
        prop_assert!(err < 1e-12);
        prop_assert_eq!(q.measurement_terms().count(), 3);
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_psi(&mut rng, da * db);
        for sys in [Subsystem::A, Subsystem::B] {
            let twice = partial_transpose(&partial_transpose(&m, da, db, sys).unwrap(), da, db, sys).unwrap();
            prop_assert_eq!(&twice, &m);
        }
        let pt = partial_transpose(&m, da, db, Subsystem::B).unwrap();
        prop_assert!((pt.trace() - m.trace()).norm() < 1e-15);
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_psi(&mut rng, d);
        let svd = complex_svd(&m).unwrap();
        prop_assert!(svd.reconstruct().max_abs_diff(&m).unwrap() < 1e-10);
        prop_assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn phase_noise_keeps_twin_beam_entangled(x in 0.02f64..0.9, gt in 0.0f64..30.0) {
        let v = expect_witness_phase(x, gt).unwrap();
        prop_assert!(v < 0.0);
        prop_assert!(expect_witness_phase(x, gt + 0.5).unwrap() >= v);
    }

    #[test]
    fn phase_noise_state_is_physical(x in 0.05f64..0.35, gt in 0.0f64..5.0) {
        let t = FockTruncation::for_twb(x, 1e-10).unwrap();
        let rho = phase_noisy_twb(x, gt, &t).unwrap();
        prop_assert!((rho.trace() + rho.truncation_deficit() - 1.0).abs() < 1e-12);
        prop_assert!(rho.check_positive().unwrap() > -1e-12);
    }

    #[test]
    fn gaussian_noise_sign_flips_at_ppt_boundary(x in 0.05f64..0.8, frac in 0.0f64..2.0) {
        let t = FockTruncation::for_twb(x, 1e-10).unwrap();
        let k_star = x / (1.0 + x);
        prop_assume!((frac - 1.0).abs() > 1e-4);
        let v = expect_witness_gauss(x, frac * k_star, &t).unwrap();
        prop_assert_eq!(v < 0.0, frac < 1.0, "κ = {}, value {}", frac * k_star, v);
    }

    #[test]
    fn kernel_depends_on_phase_sum(x1 in -4.0f64..4.0, x2 in -4.0f64..4.0, a in 0.0f64..3.0, b in 0.0f64..3.0, delta in -1.0f64..1.0) {
        let k0 = kernel_w(x1, a, x2, b);
        let k1 = kernel_w(x1, a + delta, x2, b - delta);
        prop_assert!((k0 - k1).abs() <= 1e-9 * (1.0 + k0.abs()));
    }
}

#[test]
fn gaussian_channel_preserves_trace_up_to_deficit() {
    for (x, k) in [(0.2, 0.1), (0.5, 0.4), (0.7, 1.0)] {
        let t = FockTruncation::for_twb(x, 1e-10).unwrap();
        let rho = gauss_noisy_twb(x, k, &t).unwrap();
        assert!(
            (rho.trace() + rho.truncation_deficit() - 1.0).abs() < 1e-10,
            "x={x} κ={k}"
        );
    }
    let t = FockTruncation::for_twb(0.1, 1e-8).unwrap();
    let rho = gauss_noisy_twb(0.1, 0.3, &t).unwrap();
    assert!(rho.check_positive().unwrap() > -1e-10);
}

#[test]
fn density_json_round_trip_is_exact() {
    let t = FockTruncation::for_twb(0.4, 1e-10).unwrap();
    let rho = twb_state(0.4, &t).unwrap();
    let json = serde_json::to_string(rho.matrix()).unwrap();
    let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, rho.matrix());
    let again =
        BipartiteDensity::new(rho.dim_a(), rho.dim_b(), back, rho.truncation_deficit()).unwrap();
    assert_eq!(again.trace().to_bits(), rho.trace().to_bits());
}
