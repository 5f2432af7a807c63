//! Universal Liouville action of Jordan curves, Epstein–Poincaré surfaces in
//! hyperbolic 3-space, and the renormalized volume between them.

pub mod action;
pub mod cli;
pub mod conformal;
pub mod epstein;
pub mod flow;
pub mod numeric;
pub mod volume;
