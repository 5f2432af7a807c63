//! Shared numerical kernels: Gauss–Legendre rules, deterministic summation,
//! and FFT helpers for periodic samples.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

pub type C = Complex64;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`, appended to `out`.
pub fn push_gauss_panel(a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>), out: &mut Vec<(f64, f64)>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (x, w) in rule.0.iter().zip(&rule.1) {
        out.push((mid + half * x, half * w));
    }
}

/// Pairwise sum with a fixed split order, so results do not depend on threading.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[C]) -> C {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// Fourier coefficients `c_k = (1/n) Σ_j x_j e^{-2πi jk/n}`, indexed `0..n`
/// with negative frequencies wrapped to the upper half.
pub fn fourier_coefficients(samples: &[C]) -> Vec<C> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`fourier_coefficients`]: samples `x_j = Σ_k c_k e^{2πi jk/n}`.
pub fn synthesize(coeffs: &[C]) -> Vec<C> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Signed frequency of FFT index `k` for length `n`.
pub fn frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Periodic conjugate function: multiplier `-i sign(k)`, zero mean output.
/// The Nyquist mode is dropped.
pub fn conjugate_function(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let data: Vec<C> = samples.iter().map(|&x| C::new(x, 0.0)).collect();
    let mut coeffs = fourier_coefficients(&data);
    for (k, c) in coeffs.iter_mut().enumerate() {
        let freq = frequency(k, n);
        *c = if freq == 0 || (n % 2 == 0 && k == n / 2) {
            C::new(0.0, 0.0)
        } else {
            *c * C::new(0.0, -(freq.signum() as f64))
        };
    }
    synthesize(&coeffs).iter().map(|c| c.re).collect()
}

/// Spectral derivative of periodic samples on `[0, 2π)`.
pub fn periodic_derivative(samples: &[C]) -> Vec<C> {
    let n = samples.len();
    let mut coeffs = fourier_coefficients(samples);
    for (k, c) in coeffs.iter_mut().enumerate() {
        let freq = frequency(k, n);
        *c = if n % 2 == 0 && k == n / 2 { C::new(0.0, 0.0) } else { *c * C::new(0.0, freq as f64) };
    }
    synthesize(&coeffs)
}

/// Evaluate the trigonometric interpolant of `coeffs` (from
/// [`fourier_coefficients`]) at angle `t`, returning value and derivative.
pub fn trig_eval(coeffs: &[C], t: f64) -> (C, C) {
    let n = coeffs.len();
    let mut value = C::new(0.0, 0.0);
    let mut deriv = C::new(0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate() {
        let f = frequency(k, n) as f64;
        if n % 2 == 0 && k == n / 2 {
            // Nyquist mode split symmetrically: real data stays real
            value += *c * (f * t).cos();
            deriv -= *c * (f * (f * t).sin());
        } else {
            let e = C::new(0.0, f * t).exp();
            value += *c * e;
            deriv += *c * e * C::new(0.0, f);
        }
    }
    (value, deriv)
}

/// Signed area enclosed by a smooth closed curve given by equispaced samples,
/// computed from its Fourier coefficients: `A = π Σ k |c_k|²`.
pub fn spectral_area(samples: &[C]) -> f64 {
    let n = samples.len();
    let coeffs = fourier_coefficients(samples);
    let terms: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .filter(|(k, _)| !(n % 2 == 0 && *k == n / 2))
        .map(|(k, c)| frequency(k, n) as f64 * c.norm_sqr())
        .collect();
    PI * pairwise_sum(&terms)
}

/// Shoelace area of a closed polygon (positive when counterclockwise).
pub fn shoelace_area(points: &[C]) -> f64 {
    let n = points.len();
    let terms: Vec<f64> = (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.re * b.im - b.re * a.im
        })
        .collect();
    0.5 * pairwise_sum(&terms)
}
