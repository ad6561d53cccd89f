//! Library results against values computed independently in test code.

use bochner::bernstein::{diagonal_lift, direct_sum, BernsteinFunction};
use bochner::calculus::{apply_psi, apply_psi_spectral, subordinated, SubordinatorFamily};
use bochner::linalg::{c, frobenius, identity, CMatrix};
use bochner::semigroup::{jordan_polynomial_tuple, make_commuting_random, OperatorTuple, SpectralBox};
use bochner::spectra::{joint_point_spectrum, Verdict};
use num_complex::Complex64;
use statrs::function::gamma::gamma;

/// Composite Simpson rule for `∫ f(v) dv` over `[a, b]`.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// `∫₀^∞ (e^{−xu} − 1) ρ(u) du` with the substitution `u = e^v`.
fn levy_oracle<R: Fn(f64) -> f64>(x: f64, density: R) -> f64 {
    let f = |v: f64| {
        let u = v.exp();
        (-x * u).exp_m1() * density(u) * u
    };
    simpson(f, -120.0, 80.0, 100_000)
}

#[test]
fn fractional_power_against_direct_integral() {
    for &alpha in &[0.3, 0.5, 0.7] {
        let psi = BernsteinFunction::fractional_power(alpha).unwrap();
        let coef = alpha / gamma(1.0 - alpha);
        for &x in &[0.1, 1.0, 3.0] {
            let oracle = levy_oracle(x, |u| coef * u.powf(-1.0 - alpha));
            let value = psi.eval_real(&[-x]).unwrap();
            let levy = psi.eval_via_levy(&[c(-x, 0.0)]).unwrap();
            assert!((value + x.powf(alpha)).abs() < 1e-12);
            assert!((oracle - value).abs() < 1e-8, "α={alpha} x={x}: {oracle} vs {value}");
            assert!((levy.re - value).abs() < 1e-8 && levy.im.abs() < 1e-8);
        }
    }
}

#[test]
fn log1m_is_frullani() {
    let psi = BernsteinFunction::log1m();
    for &x in &[0.2, 1.0, 5.0] {
        let oracle = levy_oracle(x, |u| (-u).exp() / u);
        assert!((oracle + (1.0 + x).ln()).abs() < 1e-9);
        let levy = psi.eval_via_levy(&[c(-x, 0.0)]).unwrap();
        assert!((levy.re + (1.0 + x).ln()).abs() < 1e-9);
    }
}

#[test]
fn composite_functions_evaluate_termwise() {
    let half = BernsteinFunction::fractional_power(0.5).unwrap();
    let log = BernsteinFunction::log1m();
    let sum = direct_sum(&half, &log);
    let s = [c(-0.7, 0.3), c(-2.0, -1.0)];
    let expected = half.eval(&s[..1]).unwrap() + log.eval(&s[1..]).unwrap();
    assert!((sum.eval(&s).unwrap() - expected).norm() < 1e-14);
    assert!((sum.eval_via_levy(&s).unwrap() - expected).norm() < 1e-8);

    let lift = diagonal_lift(&half, vec![1.0, 2.0]).unwrap();
    let z = s[0] + s[1] * 2.0;
    assert!((lift.eval(&s).unwrap() + (-z).sqrt()).norm() < 1e-14);
    assert!((lift.eval_via_levy(&s).unwrap() + (-z).sqrt()).norm() < 1e-8);
}

#[test]
fn poisson_gives_unit_shift_minus_identity() {
    let psi = BernsteinFunction::poisson(1.0, 1.0).unwrap();
    for seed in 0..5 {
        let a = make_commuting_random(1, 6, seed, SpectralBox::default()).unwrap();
        let t = a.generator(0).clone().exp();
        let expected = t - identity(6);
        let got = apply_psi(&psi, &a).unwrap();
        assert!(frobenius(&(got - &expected)) <= 1e-10 * frobenius(&expected));
    }
}

/// `P·diag(f(λ))·P⁻¹` from an eigen-decomposition computed here.
fn eigen_function<F: Fn(Complex64) -> Complex64>(m: &CMatrix, f: F) -> CMatrix {
    let d = m.nrows();
    let schur = m.clone().schur();
    let eig = schur.eigenvalues().unwrap();
    let mut p = CMatrix::zeros(d, d);
    for (k, &l) in eig.iter().enumerate() {
        // null vector of (m − λI) via its SVD
        let svd = (m - identity(d) * l).svd(false, true);
        let v_t = svd.v_t.unwrap();
        let idx = (0..d).min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b])).unwrap();
        for i in 0..d {
            p[(i, k)] = v_t[(idx, i)].conj();
        }
    }
    let values: Vec<Complex64> = eig.iter().map(|&l| f(l)).collect();
    &p * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values)) * p.clone().try_inverse().unwrap()
}

#[test]
fn gamma_subordination_against_resolvent_power() {
    let psi = BernsteinFunction::log1m();
    let a = make_commuting_random(1, 4, 21, SpectralBox::default()).unwrap();
    for &t in &[0.1, 1.0, 5.0] {
        let expected = eigen_function(a.generator(0), |l| (1.0 - l).powf(-t));
        let got = subordinated(&psi, &a, t).unwrap();
        assert!(frobenius(&(got - &expected)) < 1e-8 * frobenius(&expected), "t = {t}");
    }
}

#[test]
fn half_stable_subordination_against_eigen_oracle() {
    let psi = BernsteinFunction::fractional_power(0.5).unwrap();
    let a = make_commuting_random(1, 4, 5, SpectralBox::default()).unwrap();
    for &t in &[0.1, 1.0, 5.0] {
        let expected = eigen_function(a.generator(0), |l| (-(-l).sqrt() * t).exp());
        let got = subordinated(&psi, &a, t).unwrap();
        assert!(frobenius(&(got - &expected)) < 1e-7 * frobenius(&expected), "t = {t}");
    }
}

#[test]
fn laplace_transforms_of_families() {
    let cases = [
        BernsteinFunction::fractional_power(0.5).unwrap(),
        BernsteinFunction::poisson(1.0, 1.0).unwrap(),
        BernsteinFunction::log1m(),
        BernsteinFunction::poisson(2.5, 0.3).unwrap(),
    ];
    for psi in &cases {
        let family = SubordinatorFamily::for_function(psi).unwrap();
        for &t in &[0.1, 1.0, 5.0] {
            for &s in &[c(-0.5, 0.0), c(-2.0, 1.0), c(0.0, 3.0)] {
                let expected = (psi.eval(&[s]).unwrap() * t).exp();
                let got = family.laplace(&[s], t).unwrap();
                assert!((got - expected).norm() < 1e-9, "{psi} t={t} s={s}");
            }
        }
    }
}

#[test]
fn spectral_path_matches_eigen_oracle() {
    let psi = BernsteinFunction::diagonal_stable(0.5, vec![1.0, 0.5]).unwrap();
    let a = make_commuting_random(2, 5, 8, SpectralBox::default()).unwrap();
    let sd = a.spectral().unwrap();
    let values: Vec<Complex64> = (0..5)
        .map(|i| {
            let z = sd.diagonals[0][i] + sd.diagonals[1][i] * 0.5;
            -(-z).sqrt()
        })
        .collect();
    let expected = &sd.basis * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(values)) * &sd.inverse;
    let spectral = apply_psi_spectral(&psi, &a).unwrap();
    let quadrature = apply_psi(&psi, &a).unwrap();
    assert!(frobenius(&(&spectral - &expected)) < 1e-12 * frobenius(&expected));
    assert!(frobenius(&(&quadrature - &expected)) < 1e-6 * frobenius(&expected));
}

#[test]
fn jordan_tuple_point_spectrum() {
    for seed in 0..5 {
        let (a, points) = jordan_polynomial_tuple(2, 5, seed).unwrap();
        let spectrum = joint_point_spectrum(&a).unwrap();
        assert_eq!(spectrum.points.len(), points.len(), "seed {seed}");
        for p in &points {
            let k = spectrum.find(p, 1e-6).expect("missing joint eigenvalue");
            assert_eq!(spectrum.points[k].verdict, Verdict::Pass);
        }
    }
}

#[test]
fn semigroup_order_is_irrelevant() {
    let a = make_commuting_random(3, 4, 2, SpectralBox::default()).unwrap();
    let u = [0.3, 1.1, 2.0];
    let forward = a.semigroup_apply_ordered(&u, &[0, 1, 2]).unwrap();
    let backward = a.semigroup_apply_ordered(&u, &[2, 1, 0]).unwrap();
    let single = OperatorTuple::new(vec![a.combination(&u)]).unwrap();
    let joint = single.generator(0).clone().exp();
    assert!(frobenius(&(&forward - &backward)) < 1e-12);
    assert!(frobenius(&(&forward - &joint)) < 1e-10 * frobenius(&joint));
}
