//! Cube-local Rayleigh quotients, discrete 2-capacity and the checks that
//! tie asymmetry of a domain to its first eigenvalue.

mod asym;
mod mazya;
mod partition;
mod solve;

use serde::Serialize;

pub use asym::{
    asym_alpha, complement_areas, mask_inradius, verify_alpha_inradius_bound,
    verify_planar_area_bound, AlphaEstimate, AlphaInradiusCheck, PlanarAreaCheck,
};
pub use mazya::{check_isocapacity, check_mazya_poincare, Isocapacity, MazyaCheck};
pub use partition::{local_rayleigh_min, CubePartition, LocalRayleigh};
pub use solve::{
    capacity, concentric_ball_capacity, solve_capacity, CapacityProblem, ConcentricCapacity,
    CAPACITY_RTOL,
};

/// One JSON result row of a capacity-type experiment.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityRow {
    pub experiment: String,
    pub n: usize,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub inrad: f64,
    pub lambda1: f64,
    pub fitted_constant: f64,
}
