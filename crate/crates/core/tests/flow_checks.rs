mod common;

use common::{c, circle, cubic, ellipse, relative_error};
use liouville::action::{first_variation_action, liouville_action, QuadratureGrid};
use liouville::conformal::*;
use liouville::flow::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::PI;

const NEHARI: f64 = 6.0 + 1e-9;

fn action_of(curve: &CurveSpec) -> f64 {
    let f = interior_map(curve).unwrap();
    let g = exterior_map(curve).unwrap();
    liouville_action(&f, &g, &QuadratureGrid::disk()).unwrap().total
}

fn max_coefficient_change(a: &CurveSpec, b: &CurveSpec) -> f64 {
    let (fa, fb) = (interior_map(a).unwrap(), interior_map(b).unwrap());
    let (ca, cb) = (fa.coefficients(), fb.coefficients());
    (0..ca.len().max(cb.len()))
        .map(|k| (ca.get(k).copied().unwrap_or_default() - cb.get(k).copied().unwrap_or_default()).norm())
        .fold(0.0, f64::max)
}

#[test]
fn gradient_field_examples() {
    let field = gradient_field(&circle().g).unwrap();
    assert!(field.wp_norm_sq() < 1e-20 && field.sup_norm() < 1e-9, "{}", field.sup_norm());
    assert_eq!(gradient_field(&LaurentMap::identity()).unwrap().modes().len(), 0);

    for fx in [ellipse(), cubic()] {
        let field = gradient_field(&fx.g).unwrap();
        assert!(field.wp_norm_sq() > 0.0);
        assert!(field.sup_norm() > 0.0 && field.sup_norm() <= NEHARI);
        for k in 0..64 {
            let w = C::from_polar(1.0 + 0.05 * (k % 8) as f64, 2.0 * PI * k as f64 / 64.0);
            assert!(field.eval(w).norm() <= field.sup_norm() * (1.0 + 1e-6) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nehari_bound_holds_for_random_curves(tail in prop::collection::vec((-0.04f64..0.04, -0.04f64..0.04), 1..4)) {
        let mut coeffs = vec![c(0.0, 0.0), c(1.0, 0.0)];
        coeffs.extend(tail.into_iter().map(|(x, y)| c(x, y)));
        let curve = CurveSpec::from_series(PowerSeriesMap::from_coefficients(coeffs).unwrap()).unwrap();
        let field = gradient_field(&exterior_map(&curve).unwrap()).unwrap();
        prop_assert!(field.sup_norm() <= NEHARI, "{}", field.sup_norm());
    }
}

#[test]
fn wp_norm_matches_the_self_pairing() {
    for fx in [ellipse(), cubic()] {
        let field = gradient_field(&fx.g).unwrap();
        // ⟨ν, S(g)⟩ with ν = −4 conj(S)/ρ is −‖ν‖².
        let pairing = first_variation_action(&fx.g, &field, &QuadratureGrid::disk()).unwrap();
        assert!(relative_error(-pairing, field.wp_norm_sq()) < 0.01, "{pairing} vs {}", field.wp_norm_sq());
    }
}

#[test]
fn step_examples() {
    let fx = ellipse();
    let field = gradient_field(&fx.g).unwrap();
    // Unchanged up to the rounding of re-deriving the interior map.
    let still = beltrami_step(&fx.curve, &BeltramiField::zero(fx.g.clone()), 1e-2).unwrap();
    assert!(max_coefficient_change(&still, &fx.curve) < 1e-14);
    let still = beltrami_step(&fx.curve, &field, 0.0).unwrap();
    assert!(max_coefficient_change(&still, &fx.curve) < 1e-14);

    assert!(matches!(beltrami_step(&fx.curve, &field, -1e-3), Err(FlowError::InvalidParameter(_))));
    let too_far = FIRST_ORDER_LIMIT / field.sup_norm();
    assert!(matches!(beltrami_step(&fx.curve, &field, too_far), Err(FlowError::StepTooLarge { .. })));

    let moved = beltrami_step(&fx.curve, &field, 1e-2).unwrap();
    assert!(max_coefficient_change(&moved, &fx.curve) > 0.0);
}

#[test]
fn small_step_decreases_the_action_at_the_predicted_rate() {
    let fx = ellipse();
    let field = gradient_field(&fx.g).unwrap();
    let s0 = action_of(&fx.curve);
    let t = 1e-3;
    let ds = action_of(&beltrami_step(&fx.curve, &field, t).unwrap()) - s0;
    let predicted = -t * field.wp_norm_sq();
    assert!(ds < 0.0);
    assert!(relative_error(ds, predicted) < 0.1, "{ds} vs {predicted}");
}

#[test]
fn forward_difference_is_first_order() {
    let fx = ellipse();
    let field = gradient_field(&fx.g).unwrap();
    let s0 = action_of(&fx.curve);
    let target = -field.wp_norm_sq();
    let ts = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
    let errors: Vec<f64> = ts
        .iter()
        .map(|&t| ((action_of(&beltrami_step(&fx.curve, &field, t).unwrap()) - s0) / t - target).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    let slope = (errors[0] / errors[3]).ln() / (ts[0] / ts[3]).ln();
    assert!((0.8..=1.2).contains(&slope), "slope {slope}, errors {errors:?}");
}

#[test]
fn ellipse_flow_converges() {
    let fx = ellipse();
    let states = run_flow(&fx.curve, 50, &StepRule::default()).unwrap();
    assert_eq!(states.len(), 51);
    let actions: Vec<f64> = states.iter().map(|s| s.action).collect();
    assert!(actions.windows(2).all(|w| w[1] <= w[0]), "{actions:?}");
    assert!(actions[50] < 0.1 * actions[0], "{} -> {}", actions[0], actions[50]);
    assert!(states.iter().all(|s| s.gradient_sup <= NEHARI && s.step_size > 0.0));

    // Σ t_k ‖ν_k‖² against the realized decrease.
    let predicted: f64 = states.windows(2).map(|w| w[1].step_size * w[0].gradient_norm_sq).sum();
    let realized = actions[0] - actions[50];
    assert!(relative_error(predicted, realized) < 0.15, "{predicted} vs {realized}");
    assert!(states[50].roundness < states[0].roundness);
}

#[test]
fn circle_is_stationary() {
    let fx = circle();
    let states = run_flow(&fx.curve, 10, &StepRule::default()).unwrap();
    assert_eq!(states.len(), 1);
    assert!(states[0].action.abs() < 1e-9);

    // A sampled circle carries fitting noise in its field but still does not move.
    let points: Vec<C> = (0..64).map(|j| C::from_polar(1.0, 2.0 * PI * j as f64 / 64.0)).collect();
    let sampled = CurveSpec::from_points(points).unwrap();
    let field = gradient_field(&exterior_map(&sampled).unwrap()).unwrap();
    let moved = beltrami_step(&sampled, &field, StepRule::default().initial).unwrap();
    assert!(max_coefficient_change(&moved, &sampled) < 1e-9);
}

#[test]
fn perturbed_circle_rounds_off() {
    let f = PowerSeriesMap::from_coefficients(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.08, 0.0)]).unwrap();
    let curve = CurveSpec::from_series(f).unwrap();
    let states = run_flow(&curve, 15, &StepRule::default()).unwrap();
    let roundness: Vec<f64> = states.iter().map(|s| s.roundness).collect();
    assert!(roundness[3..].windows(2).all(|w| w[1] < w[0]), "{roundness:?}");
}

#[test]
fn distance_bound_examples() {
    let p = DistanceBoundParams::new(0.5, 2.0).unwrap();
    assert_eq!(distance_bound(0.0, &p), p.k() * p.c());
    assert_eq!(distance_bound(1.0, &p), 3.0);
    let values: Vec<f64> = (0..10).map(|k| distance_bound(0.3 * k as f64, &p)).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    assert!(DistanceBoundParams::new(0.0, 1.0).is_err());
    assert!(DistanceBoundParams::from_delta(1.5, 0.1).is_err());
}

#[test]
fn invalid_step_rule_is_rejected() {
    let rule = StepRule { initial: 0.0, ..StepRule::default() };
    assert!(matches!(run_flow(&ellipse().curve, 3, &rule), Err(FlowError::InvalidParameter(_))));
}
