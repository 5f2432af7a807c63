//! Weil–Petersson gradient descent of the Liouville action.
//!
//! Tangent vectors are harmonic Beltrami differentials on the exterior disk,
//! `ν = conj(φ)(|w|² − 1)²/4` with `φ = Σ_{m≥4} φ_m w^{−m}`. In this basis
//! the WP norm, the first-variation pairing and the induced holomorphic
//! motion of the curve are all diagonal sums over the modes `φ_m`.

use crate::action::{liouville_action, ActionError, QuadratureGrid};
use crate::conformal::{
    exterior_map_with, interior_map, ConformalError, ConformalMap, CurveSpec, LaurentMap, MapperConfig, PowerSeriesMap,
    SERIES_NOISE_FLOOR,
};
use crate::numeric::{fourier_coefficients, pairwise_sum, pairwise_sum_complex, C};
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("deformed curve is not simple: {0}")]
    Deformation(String),
    #[error("refit of the deformed curve leaves residual {residual:e}")]
    Refit { residual: f64 },
    #[error("step {t:e} with field sup-norm {sup:e} leaves the first-order regime")]
    StepTooLarge { t: f64, sup: f64 },
    #[error("no decreasing step above {t_min:e} at step {step}")]
    Stalled { step: usize, t_min: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Trailing Schwarzian modes below this fraction of the largest are at the
/// rounding floor of the sampled Laurent map and are dropped.
const MODE_CUTOFF: f64 = 1e-13;
/// Contour radius for the motion kernel. It must clear the unit circle,
/// where boundary points put the kernel's pole, while keeping `R^m` growth
/// of the residual rounding noise in high modes small.
const KERNEL_RADIUS: f64 = 1.1;
const KERNEL_NODES: usize = 1024;
/// Largest accepted `t · sup|ν|` for a first-order step.
pub const FIRST_ORDER_LIMIT: f64 = 0.1;

fn mode_weight(m: usize) -> f64 {
    let m = m as f64;
    (m - 1.0) * (m - 2.0) * (m - 3.0)
}

/// Harmonic Beltrami differential on the exterior disk, with the exterior
/// map `g` whose curve it deforms.
#[derive(Clone, Debug, PartialEq)]
pub struct BeltramiField {
    chart: LaurentMap,
    /// `modes[i]` is `φ_{i+4}`.
    modes: Vec<C>,
    sup_norm: f64,
    wp_norm_sq: f64,
}

impl BeltramiField {
    pub fn zero(chart: LaurentMap) -> Self {
        Self { chart, modes: Vec::new(), sup_norm: 0.0, wp_norm_sq: 0.0 }
    }

    /// Field with `φ(w) = Σ_i modes[i] w^{−(i+4)}`.
    pub fn harmonic(chart: LaurentMap, modes: Vec<C>) -> Self {
        let wp_norm_sq = pairwise_sum(
            &modes.iter().enumerate().map(|(i, p)| 0.5 * PI * p.norm_sqr() / mode_weight(i + 4)).collect::<Vec<_>>(),
        );
        let mut field = Self { chart, modes, sup_norm: 0.0, wp_norm_sq };
        field.sup_norm = field.estimate_sup();
        field
    }

    /// Field with `φ = scale · S(g)`.
    pub fn from_schwarzian(g: &LaurentMap, scale: f64) -> Result<Self, ConformalError> {
        let modes = schwarzian_modes(g)?.into_iter().map(|s| s * scale).collect();
        Ok(Self::harmonic(g.clone(), modes))
    }

    pub fn chart(&self) -> &LaurentMap {
        &self.chart
    }

    pub fn modes(&self) -> &[C] {
        &self.modes
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `∫_𝔻* |ν|² ρ d²w` with `ρ = 4/(|w|² − 1)²`.
    pub fn wp_norm_sq(&self) -> f64 {
        self.wp_norm_sq
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::harmonic(self.chart.clone(), self.modes.iter().map(|p| p * k).collect())
    }

    /// `φ(w)`.
    pub fn quadratic_differential(&self, w: C) -> C {
        let u = w.inv();
        let u4 = (u * u) * (u * u);
        self.modes.iter().rev().fold(C::new(0.0, 0.0), |acc, &p| acc * u + p) * u4
    }

    /// `ν(w)`, zero inside the closed unit disk.
    pub fn eval(&self, w: C) -> C {
        let r2 = w.norm_sqr();
        if r2 <= 1.0 {
            return C::new(0.0, 0.0);
        }
        self.quadratic_differential(w).conj() * (r2 - 1.0) * (r2 - 1.0) * 0.25
    }

    /// Max of `|ν|` over rings `|u| = s` with `u = 1/w`.
    fn estimate_sup(&self) -> f64 {
        if self.modes.iter().all(|p| p.norm() == 0.0) {
            return 0.0;
        }
        let radii = 96;
        let angles = 256;
        (1..radii)
            .into_par_iter()
            .map(|i| {
                let s = i as f64 / radii as f64;
                (0..angles)
                    .map(|j| self.eval(C::from_polar(1.0 / s, 2.0 * PI * j as f64 / angles as f64)).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `4 Re ∫_𝔻* ν S(g) d²w` evaluated mode by mode.
    pub fn pairing_with_schwarzian(&self, g: &LaurentMap) -> Result<f64, ConformalError> {
        let s = schwarzian_modes(g)?;
        let terms: Vec<f64> = self
            .modes
            .iter()
            .zip(&s)
            .enumerate()
            .map(|(i, (p, sm))| 2.0 * PI * (p.conj() * sm).re / mode_weight(i + 4))
            .collect();
        Ok(pairwise_sum(&terms))
    }
}

/// Laurent coefficients `s_m`, `m ≥ 4`, of `S(g)(w) = Σ s_m w^{−m}` from
/// samples on the unit circle.
pub fn schwarzian_modes(g: &LaurentMap) -> Result<Vec<C>, ConformalError> {
    let n = (8 * g.order()).next_power_of_two().max(512);
    let values = (0..n)
        .map(|j| g.jet(C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))?.schwarzian())
        .collect::<Result<Vec<C>, _>>()?;
    let coeffs = fourier_coefficients(&values);
    let top = n / 2 - 1;
    let mut modes: Vec<C> = (4..=top).map(|m| coeffs[n - m]).collect();
    let scale = modes.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while modes.last().is_some_and(|c| c.norm() <= MODE_CUTOFF * scale) {
        modes.pop();
    }
    Ok(modes)
}

/// `V = −4 conj(S(g))/ρ`, the negative WP gradient of the action.
pub fn gradient_field(g: &LaurentMap) -> Result<BeltramiField, ConformalError> {
    BeltramiField::from_schwarzian(g, -4.0)
}

/// First-order motion `Ḟ` of points inside the curve, as values at `points`.
///
/// `Ḟ(z) = −(1/π) ∫_𝔻* ν(w) g'(w)² / (g(w) − z) d²w`; only the `w^{−m}`
/// Laurent modes of the kernel survive the angular integral, which reduces
/// to a contour integral at radius `KERNEL_RADIUS`.
pub fn motion(nu: &BeltramiField, points: &[C]) -> Result<Vec<C>, ConformalError> {
    let g = nu.chart();
    let scale = nu.modes.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let weights: Vec<(usize, C)> = nu
        .modes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.norm() > MODE_CUTOFF * scale)
        .map(|(i, p)| (i + 4, -0.5 * p.conj() / mode_weight(i + 4)))
        .collect();
    if weights.is_empty() {
        return Ok(vec![C::new(0.0, 0.0); points.len()]);
    }
    let nodes = (0..KERNEL_NODES)
        .map(|k| {
            let u = C::from_polar(KERNEL_RADIUS, 2.0 * PI * k as f64 / KERNEL_NODES as f64);
            let jet = g.jet(u)?;
            let density: C = weights.iter().map(|&(m, c)| c * u.powi(m as i32)).sum();
            Ok((jet.value, jet.d1 * jet.d1 * density))
        })
        .collect::<Result<Vec<(C, C)>, ConformalError>>()?;
    Ok(points
        .par_iter()
        .map(|&z| {
            let terms: Vec<C> = nodes.iter().map(|&(gv, num)| num / (gv - z)).collect();
            pairwise_sum_complex(&terms) / KERNEL_NODES as f64
        })
        .collect())
}

/// Largest relative Taylor coefficient of the wrong type accepted in a refit.
const REFIT_TOLERANCE: f64 = 1e-8;

/// Moves the curve by `z ↦ z + t Ḟ(z)` and refits the interior series.
pub fn beltrami_step(curve: &CurveSpec, nu: &BeltramiField, t: f64) -> Result<CurveSpec, FlowError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(FlowError::InvalidParameter(format!("step size {t}")));
    }
    if t * nu.sup_norm() >= FIRST_ORDER_LIMIT {
        return Err(FlowError::StepTooLarge { t, sup: nu.sup_norm() });
    }
    let f = interior_map(curve)?;
    if t == 0.0 || nu.modes.iter().all(|p| p.norm() == 0.0) {
        return Ok(CurveSpec::InteriorSeries(f));
    }
    let n = (4 * f.order()).next_power_of_two().max(512);
    let boundary =
        (0..n).map(|j| f.eval(C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))).collect::<Result<Vec<C>, _>>()?;
    let velocity = motion(nu, &boundary)?;
    let moved: Vec<C> = boundary.iter().zip(&velocity).map(|(p, v)| p + t * v).collect();
    let coeffs = fourier_coefficients(&moved);
    let a1 = coeffs[1].norm();
    let leakage = coeffs[n / 2 + 1..].iter().map(|c| c.norm() / a1).fold(0.0, f64::max);
    if leakage > REFIT_TOLERANCE {
        return Err(FlowError::Refit { residual: leakage });
    }
    let mut taylor = coeffs[..n / 2].to_vec();
    taylor[0] = f.coefficients()[0];
    let series = PowerSeriesMap::from_coefficients(taylor)?.trimmed(SERIES_NOISE_FLOOR);
    CurveSpec::from_series(series).map_err(|e| FlowError::Deformation(e.to_string()))
}

/// Backtracking controls for [`run_flow`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepRule {
    pub initial: f64,
    pub t_min: f64,
    /// Flow stops once the action falls below this.
    pub threshold: f64,
    pub grid: QuadratureGrid,
    pub mapper: MapperConfig,
}

impl Default for StepRule {
    fn default() -> Self {
        Self {
            initial: 0.025,
            t_min: 1e-6,
            threshold: 1e-10,
            grid: QuadratureGrid::disk(),
            mapper: MapperConfig::default(),
        }
    }
}

/// One point of a flow trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub step: usize,
    pub curve: CurveSpec,
    pub action: f64,
    /// `‖V‖²_WP` of the gradient field at this curve.
    pub gradient_norm_sq: f64,
    pub gradient_sup: f64,
    /// Step size that produced this state; the initial state records the rule's initial size.
    pub step_size: f64,
    pub roundness: f64,
}

struct Evaluated {
    curve: CurveSpec,
    action: f64,
    field: BeltramiField,
}

fn evaluate(curve: CurveSpec, rule: &StepRule) -> Result<Evaluated, FlowError> {
    let f = interior_map(&curve)?;
    let (g, _) = exterior_map_with(&curve, &rule.mapper)?;
    let action = liouville_action(&f, &g, &rule.grid)?.total;
    let field = gradient_field(&g)?;
    Ok(Evaluated { curve: CurveSpec::InteriorSeries(f), action, field })
}

fn state(step: usize, e: &Evaluated, t: f64) -> FlowState {
    FlowState {
        step,
        curve: e.curve.clone(),
        action: e.action,
        gradient_norm_sq: e.field.wp_norm_sq(),
        gradient_sup: e.field.sup_norm(),
        step_size: t,
        roundness: e.curve.roundness(),
    }
}

/// Gradient descent with step halving until the action decreases.
pub fn run_flow(curve: &CurveSpec, max_steps: usize, rule: &StepRule) -> Result<Vec<FlowState>, FlowError> {
    if !(rule.initial > 0.0) || !(rule.t_min > 0.0) {
        return Err(FlowError::InvalidParameter("step sizes must be positive".into()));
    }
    let mut current = evaluate(curve.clone(), rule)?;
    let mut states = vec![state(0, &current, rule.initial)];
    let mut t = rule.initial;
    for step in 1..=max_steps {
        if current.action < rule.threshold || current.field.wp_norm_sq() == 0.0 {
            break;
        }
        let sup = current.field.sup_norm();
        if t * sup >= FIRST_ORDER_LIMIT {
            t = 0.99 * FIRST_ORDER_LIMIT / sup;
        }
        let accepted = loop {
            if t < rule.t_min {
                return Err(FlowError::Stalled { step, t_min: rule.t_min });
            }
            let trial = beltrami_step(&current.curve, &current.field, t).and_then(|c| evaluate(c, rule));
            match trial {
                Ok(next) if next.action <= current.action => break next,
                Ok(_) | Err(FlowError::Deformation(_)) | Err(FlowError::Refit { .. }) => t *= 0.5,
                Err(e) => return Err(e),
            }
        };
        states.push(state(step, &accepted, t));
        current = accepted;
    }
    Ok(states)
}

/// Constants of the distance bound `c (dist − K c) ≤ S̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceBoundParams {
    c: f64,
    k: f64,
}

impl DistanceBoundParams {
    pub fn new(c: f64, k: f64) -> Result<Self, FlowError> {
        if !(c > 0.0 && c.is_finite() && k > 0.0 && k.is_finite()) {
            return Err(FlowError::InvalidParameter(format!("c = {c}, K = {k} must be positive")));
        }
        Ok(Self { c, k })
    }

    /// `K = √2/(1 − δ)²`, admissible when `c < 2δ√(4π/3)`.
    pub fn from_delta(delta: f64, c: f64) -> Result<Self, FlowError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(FlowError::InvalidParameter(format!("δ = {delta} outside (0, 1)")));
        }
        let c_max = 2.0 * delta * (4.0 * PI / 3.0).sqrt();
        if !(c < c_max) {
            return Err(FlowError::InvalidParameter(format!("c = {c} must be below {c_max}")));
        }
        Self::new(c, 2f64.sqrt() / ((1.0 - delta) * (1.0 - delta)))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// `S̃/c + K c`.
pub fn distance_bound(action: f64, params: &DistanceBoundParams) -> f64 {
    action / params.c + params.k * params.c
}
