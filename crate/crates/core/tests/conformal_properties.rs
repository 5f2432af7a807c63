mod common;

use common::{c, circle, cubic, ellipse, joukowski, quadratic};
use liouville::conformal::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn evaluation_examples() {
    let id = PowerSeriesMap::identity();
    assert_eq!(id.eval(c(0.5, 0.1)).unwrap(), c(0.5, 0.1));
    assert!((quadratic(0.1).eval(c(1.0, 0.0)).unwrap() - c(1.1, 0.0)).norm() < 1e-15);
    assert!((joukowski().eval(c(2.0, 0.0)).unwrap() - c(2.25, 0.0)).norm() < 1e-15);
    assert!(id.eval(c(3.0, 0.0)).is_ok());
    let bounded = PowerSeriesMap::new(vec![c(0.0, 0.0), c(1.0, 0.0)], 1.5).unwrap();
    assert!(bounded.eval(c(3.0, 0.0)).is_err());
    assert!(joukowski().eval(c(0.5, 0.0)).is_err());
}

#[test]
fn nonlinearity_of_quadratic_matches_symbolic_form() {
    let a = 0.2;
    let f = quadratic(a);
    for z in [c(0.0, 0.0), c(0.3, -0.4), c(-0.7, 0.1)] {
        let expected = 2.0 * a / (1.0 + 2.0 * a * z);
        assert!((nonlinearity(&f, z).unwrap() - expected).norm() < 1e-14);
    }
    assert_eq!(nonlinearity(&PowerSeriesMap::identity(), c(0.3, 0.3)).unwrap(), c(0.0, 0.0));
    let shifted = f.translated(c(2.0, -1.0));
    let z = c(0.25, 0.5);
    assert!((nonlinearity(&shifted, z).unwrap() - nonlinearity(&f, z).unwrap()).norm() < 1e-15);
}

#[test]
fn schwarzian_examples() {
    let a = 0.05;
    assert!((schwarzian(&quadratic(a), c(0.0, 0.0)).unwrap() - c(-6.0 * a * a, 0.0)).norm() < 1e-15);
    let m = MobiusTransform::new(c(1.0, 0.5), c(0.2, 0.0), c(0.3, -0.1), c(2.0, 0.0)).unwrap();
    for k in 0..16 {
        let z = C::from_polar(0.3 + 0.04 * k as f64, 0.7 * k as f64);
        assert!(schwarzian(&m, z).unwrap().norm() < 1e-12);
    }
    // f' = 1 + z vanishes at −1.
    assert!(matches!(schwarzian(&quadratic(0.5), c(-1.0, 0.0)), Err(ConformalError::SingularDerivative(_))));
}

#[test]
fn exterior_map_examples() {
    let g = circle().g;
    assert!((g.leading() - c(1.0, 0.0)).norm() < 1e-10);
    assert!(g.constant().norm() < 1e-10);
    assert!(g.negative_coefficients().iter().all(|b| b.norm() < 1e-10));

    let g = ellipse().g;
    assert!((g.leading() - c(1.1, 0.0)).norm() < 1e-10);
    assert!((g.negative_coefficients()[0] - c(0.1, 0.0)).norm() < 1e-10);
    assert!(g.negative_coefficients()[1..].iter().all(|b| b.norm() < 1e-10));

    let cubic = cubic();
    let (_, report) = exterior_map_with(&cubic.curve, &MapperConfig::default()).unwrap();
    assert!(report.residual < 1e-8, "{report:?}");
}

#[test]
fn exterior_residual_at_order_sixty_four() {
    let config = MapperConfig { order: 64, max_order: 64, ..MapperConfig::default() };
    for fx in [ellipse(), cubic()] {
        let (_, report) = exterior_map_with(&fx.curve, &config).unwrap();
        assert!(report.residual < 1e-6, "{report:?}");
        let (_, report) = interior_map_with(&fx.curve, &config).unwrap();
        assert!(report.residual < 1e-6, "{report:?}");
    }
}

#[test]
fn equipotential_examples() {
    assert_eq!(equipotential(&PowerSeriesMap::identity(), 7).unwrap(), PowerSeriesMap::identity());
    let a = 0.3;
    let f2 = equipotential(&quadratic(a), 2).unwrap();
    assert!((f2.coefficients()[2] - c(a / 2.0, 0.0)).norm() < 1e-15);
    assert_eq!(f2.radius_hint(), 2.0 * quadratic(a).radius_hint());
    let f = ellipse().f;
    let z = c(0.4, -0.3);
    let errors: Vec<f64> = [4, 16, 64, 256]
        .iter()
        .map(|&n| (equipotential(&f, n).unwrap().eval(z).unwrap() - f.eval(z).unwrap()).norm())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[3] < 1e-2);
}

#[test]
fn welding_examples() {
    let id = PowerSeriesMap::identity();
    let gid = LaurentMap::identity();
    for k in 0..8 {
        let t = 0.7 * k as f64;
        let w = welding(&id, &gid, t).unwrap();
        let diff = (w - t.rem_euclid(2.0 * PI)).abs();
        assert!(diff.min(2.0 * PI - diff) < 1e-12);
    }
    let fx = ellipse();
    for theta in [0.0, PI / 2.0, PI, 1.5 * PI] {
        let w = welding(&fx.f, &fx.g, theta).unwrap();
        let diff = (w - theta).abs();
        assert!(diff.min(2.0 * PI - diff) < 1e-8, "welding({theta}) = {w}");
    }
    for fx in [ellipse(), cubic()] {
        let s = welding_samples(&fx.f, &fx.g, 256).unwrap();
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(s[255] - s[0] < 2.0 * PI);
    }
}

#[test]
fn osculating_mobius_examples() {
    let m = MobiusTransform::new(c(1.0, 0.2), c(0.1, 0.0), c(-0.2, 0.1), c(1.5, 0.0)).unwrap();
    let osc = osculating_mobius(&m, c(0.1, 0.2)).unwrap();
    for z in [c(0.0, 0.0), c(0.5, 0.5), c(-0.3, 0.2)] {
        assert!((osc.apply_finite(z).unwrap() - m.apply_finite(z).unwrap()).norm() < 1e-12);
    }
    // For z + a z² at 0: M(ζ) = αζ/(βζ + 1/α) with α² = 1 and 2αβ = −2a.
    let a = 0.3;
    let osc = osculating_mobius(&quadratic(a), c(0.0, 0.0)).unwrap();
    let expected = MobiusTransform::new(c(1.0, 0.0), c(0.0, 0.0), c(-a, 0.0), c(1.0, 0.0)).unwrap();
    for z in [c(0.2, 0.0), c(-0.1, 0.4)] {
        assert!((osc.apply_finite(z).unwrap() - expected.apply_finite(z).unwrap()).norm() < 1e-14);
    }
}

#[test]
fn mobius_on_h3_examples() {
    let p = H3Point::new(c(0.3, -0.2), 0.7).unwrap();
    assert_eq!(mobius_on_h3(&MobiusTransform::identity(), &p), p);
    let q = mobius_on_h3(&MobiusTransform::translation(c(1.0, 2.0)), &p);
    assert!((q.z - c(1.3, 1.8)).norm() < 1e-15 && (q.height - 0.7).abs() < 1e-15);
    let d = mobius_on_h3(&MobiusTransform::dilation(c(2.0, 0.0)).unwrap(), &H3Point::j());
    assert!(d.z.norm() < 1e-15 && (d.height - 2.0).abs() < 1e-15);
}

fn complex_in(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(x, y)| C::new(x, y))
}

fn mobius() -> impl Strategy<Value = MobiusTransform> {
    (complex_in(2.0), complex_in(2.0), complex_in(2.0), complex_in(2.0)).prop_filter_map(
        "degenerate",
        |(a, b, cc, d)| {
            if (a * d - b * cc).norm() < 0.1 {
                return None;
            }
            MobiusTransform::new(a, b, cc, d).ok()
        },
    )
}

fn small_polynomial() -> impl Strategy<Value = PowerSeriesMap> {
    prop::collection::vec(complex_in(0.08), 3..6).prop_map(|tail| {
        // Σ k|a_k| ≤ 1/2 keeps f' away from zero on the closed disk, so f is univalent.
        let weight: f64 = tail.iter().enumerate().map(|(k, a)| (k + 2) as f64 * a.norm()).sum();
        let scale = if weight > 0.5 { 0.5 / weight } else { 1.0 };
        let mut coeffs = vec![c(0.0, 0.0), c(1.0, 0.0)];
        coeffs.extend(tail.into_iter().map(|a| a * scale));
        PowerSeriesMap::from_coefficients(coeffs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn schwarzian_is_invariant_under_postcomposition(m in mobius(), f in small_polynomial(), z in complex_in(0.6)) {
        let jet = f.jet(z).unwrap();
        prop_assume!((m.jet(jet.value).map(|j| j.d1.norm()).unwrap_or(0.0)) > 1e-3);
        prop_assume!(m.jet(jet.value).map(|j| j.d1.norm() < 1e6).unwrap_or(false));
        let composed = m.compose_jet(&jet).unwrap();
        let s0 = jet.schwarzian().unwrap();
        let s1 = composed.schwarzian().unwrap();
        prop_assert!((s1 - s0).norm() < 1e-9 * (1.0 + s0.norm()), "{s0} vs {s1}");
    }

    #[test]
    fn mobius_preserves_hyperbolic_distance(
        m in mobius(),
        z1 in complex_in(2.0), h1 in 0.05f64..3.0,
        z2 in complex_in(2.0), h2 in 0.05f64..3.0,
    ) {
        let p = H3Point::new(z1, h1).unwrap();
        let q = H3Point::new(z2, h2).unwrap();
        let (mp, mq) = (mobius_on_h3(&m, &p), mobius_on_h3(&m, &q));
        prop_assert!((mp.distance(&mq) - p.distance(&q)).abs() < 1e-9 * (1.0 + p.distance(&q)));
        prop_assert!((p.distance(&q) - q.distance(&p)).abs() == 0.0);
    }

    #[test]
    fn osculating_mobius_matches_two_jet(f in small_polynomial(), z0 in complex_in(0.5)) {
        let jet = f.jet(z0).unwrap();
        let osc = osculating_mobius(&f, z0).unwrap().jet(z0).unwrap();
        prop_assert!((osc.value - jet.value).norm() < 1e-9);
        prop_assert!((osc.d1 - jet.d1).norm() < 1e-9);
        prop_assert!((osc.d2 - jet.d2).norm() < 1e-9);
    }

    #[test]
    fn equipotential_coefficients_decay_geometrically(f in small_polynomial(), n in 2u32..40) {
        let fnn = equipotential(&f, n).unwrap();
        let q = (n as f64 - 1.0) / n as f64;
        let scale = n as f64 / (n as f64 - 1.0);
        for (k, (a, b)) in f.coefficients().iter().zip(fnn.coefficients()).enumerate() {
            prop_assert!((b - a * scale * q.powi(k as i32)).norm() <= 1e-15 * a.norm());
        }
    }
}

#[test]
fn welding_is_monotone_for_random_perturbations() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(8));
    runner
        .run(&small_polynomial(), |f| {
            let curve = CurveSpec::from_series(f.clone()).unwrap();
            let g = exterior_map(&curve).unwrap();
            let f = interior_map(&curve).unwrap();
            let s = welding_samples(&f, &g, 128).unwrap();
            prop_assert!(s.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(s[127] - s[0] < 2.0 * PI);
            Ok(())
        })
        .unwrap();
}
