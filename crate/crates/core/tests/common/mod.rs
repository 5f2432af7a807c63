//! Fixture curves and maps shared by the integration tests.
#![allow(dead_code)]

use liouville::conformal::{exterior_map, interior_map, CurveSpec, LaurentMap, PowerSeriesMap};
use num_complex::Complex64 as C;
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> CurveSpec {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    CurveSpec::from_json(&text).expect("fixture parses")
}

/// A curve with both of its maps.
pub struct Fixture {
    pub curve: CurveSpec,
    pub f: PowerSeriesMap,
    pub g: LaurentMap,
}

pub fn load(name: &str) -> Fixture {
    let curve = fixture(name);
    let f = interior_map(&curve).expect("interior map");
    let g = exterior_map(&curve).expect("exterior map");
    Fixture { curve, f, g }
}

pub fn ellipse() -> Fixture {
    load("ellipse.json")
}

pub fn cubic() -> Fixture {
    load("cubic.json")
}

pub fn circle() -> Fixture {
    load("circle.json")
}

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Exact exterior map of the ellipse with semi-axes 1.2 and 1.
pub fn joukowski() -> LaurentMap {
    LaurentMap::new(c(1.1, 0.0), c(0.0, 0.0), vec![c(0.1, 0.0)]).unwrap()
}

pub fn quadratic(a: f64) -> PowerSeriesMap {
    PowerSeriesMap::from_coefficients(vec![c(0.0, 0.0), c(1.0, 0.0), c(a, 0.0)]).unwrap()
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}
