use std::f64::consts::PI;

use bochner::analysis::{k_constant, moment_check_given, step_bound_check};
use bochner::bernstein::{cone_combine, direct_sum, BernsteinFunction};
use bochner::calculus::{apply_psi, apply_psi_spectral, subordinated};
use bochner::linalg::{c, eigenvalues, frobenius, CVector};
use bochner::semigroup::{holomorphy_defect_ray, make_commuting_random, SpectralBox};
use bochner::spectra::greedy_match;
use num_complex::Complex64;
use proptest::prelude::*;

fn catalog() -> Vec<BernsteinFunction> {
    vec![
        BernsteinFunction::fractional_power(0.3).unwrap(),
        BernsteinFunction::fractional_power(0.5).unwrap(),
        BernsteinFunction::fractional_power(0.7).unwrap(),
        BernsteinFunction::fractional_power(1.0).unwrap(),
        BernsteinFunction::poisson(1.0, 1.0).unwrap(),
        BernsteinFunction::log1m(),
        BernsteinFunction::tempered_stable(0.4, 1.5).unwrap(),
    ]
}

fn unit_vector(d: usize, seed: &[f64]) -> CVector {
    CVector::from_fn(d, |i, _| c(seed[2 * i], seed[2 * i + 1])).normalize()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn values_are_nonpositive_and_nondecreasing(k in 0usize..7, x in 0.0f64..20.0, dx in 0.0f64..5.0) {
        let psi = &catalog()[k];
        let lo = psi.eval_real(&[-x - dx]).unwrap();
        let hi = psi.eval_real(&[-x]).unwrap();
        prop_assert!(hi <= 1e-15);
        prop_assert!(lo <= hi + 1e-12);
    }

    #[test]
    fn closed_form_matches_levy_integral(k in 0usize..7, re in -10.0f64..0.0, im in -10.0f64..10.0) {
        let psi = &catalog()[k];
        let s = [c(re, im)];
        let exact = psi.eval(&s).unwrap();
        let levy = psi.eval_via_levy(&s).unwrap();
        prop_assert!((exact - levy).norm() <= 1e-6 * (1.0 + exact.norm()));
    }

    #[test]
    fn cone_combination_is_linear(a in 0.0f64..3.0, b in 0.0f64..3.0, re in -5.0f64..-0.01, im in -3.0f64..3.0) {
        let f = BernsteinFunction::fractional_power(0.5).unwrap();
        let g = BernsteinFunction::log1m();
        let h = cone_combine(&[(a, f.clone()), (b, g.clone())]).unwrap();
        let s = [c(re, im)];
        let expected = f.eval(&s).unwrap() * a + g.eval(&s).unwrap() * b;
        prop_assert!((h.eval(&s).unwrap() - expected).norm() < 1e-12 * (1.0 + expected.norm()));
    }

    #[test]
    fn direct_sum_splits_arguments(x in -5.0f64..0.0, y in -5.0f64..0.0) {
        let f = BernsteinFunction::poisson(1.0, 1.0).unwrap();
        let g = BernsteinFunction::fractional_power(0.3).unwrap();
        let h = direct_sum(&f, &g);
        let v = h.eval_real(&[x, y]).unwrap();
        prop_assert!((v - f.eval_real(&[x]).unwrap() - g.eval_real(&[y]).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn k_constant_exceeds_one_and_increases(m in 1.0f64..100.0, dm in 0.0f64..10.0) {
        let k = k_constant(m).unwrap();
        prop_assert!(k > 1.0);
        prop_assert!(k_constant(m + dm).unwrap() >= k);
    }

    #[test]
    fn ray_defect_in_range_and_monotone(t in 0.0f64..1.0) {
        let theta = PI / 2.0 + t * PI / 2.0;
        let b = holomorphy_defect_ray(theta, 2000).unwrap();
        let b2 = holomorphy_defect_ray((theta + 0.05).min(PI), 2000).unwrap();
        prop_assert!((1.0..=2.0).contains(&b));
        prop_assert!(b2 <= b + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn moment_inequality_holds(
        k in 0usize..7,
        n in 1usize..=3,
        d in 1usize..=6,
        seed in any::<u64>(),
        v in prop::collection::vec(-1.0f64..1.0, 12),
    ) {
        let a = make_commuting_random(n, d, seed, SpectralBox::default()).unwrap();
        let w: Vec<f64> = (0..n).map(|j| 1.0 / (j + 1) as f64).collect();
        let psi = bochner::bernstein::diagonal_lift(&catalog()[k], w).unwrap();
        prop_assume!(v[..2 * d].iter().any(|x| x.abs() > 1e-3));
        let x = unit_vector(d, &v);
        let psi_a = apply_psi_spectral(&psi, &a).unwrap();
        let r = moment_check_given(&psi, &a, &psi_a, &x).unwrap();
        prop_assert!(r.holds(), "slack {} scale {}", r.slack, r.scale);
        prop_assert!(r.tightness <= 1.0 + 1e-9);
    }

    #[test]
    fn step_inequality_holds(
        n in 1usize..=3,
        d in 1usize..=6,
        seed in any::<u64>(),
        v in prop::collection::vec(-1.0f64..1.0, 12),
        u in prop::collection::vec(0.0f64..5.0, 3),
    ) {
        prop_assume!(v[..2 * d].iter().any(|x| x.abs() > 1e-3));
        let a = make_commuting_random(n, d, seed, SpectralBox::default()).unwrap();
        let x = unit_vector(d, &v);
        let r = step_bound_check(&a, &x, &u[..n]).unwrap();
        prop_assert!(r.residual >= -1e-12, "{r:?}");
    }

    #[test]
    fn spectral_mapping_of_eigenvalues(k in 0usize..7, seed in any::<u64>(), d in 1usize..=5) {
        let a = make_commuting_random(1, d, seed, SpectralBox::default()).unwrap();
        let psi = &catalog()[k];
        let psi_a = apply_psi(psi, &a).unwrap();
        let image: Vec<Complex64> = eigenvalues(a.generator(0)).iter().map(|&l| psi.eval(&[l]).unwrap()).collect();
        prop_assert!(greedy_match(&eigenvalues(&psi_a), &image) < 1e-6);
    }

    #[test]
    fn subordination_is_a_semigroup(seed in any::<u64>(), s in 0.05f64..2.0, t in 0.05f64..2.0) {
        let a = make_commuting_random(1, 3, seed, SpectralBox::default()).unwrap();
        for psi in [BernsteinFunction::fractional_power(0.5).unwrap(), BernsteinFunction::log1m()] {
            let gs = subordinated(&psi, &a, s).unwrap();
            let gt = subordinated(&psi, &a, t).unwrap();
            let gst = subordinated(&psi, &a, s + t).unwrap();
            prop_assert!(frobenius(&(&gs * &gt - &gst)) < 1e-8 * (1.0 + frobenius(&gst)));
        }
    }
}
