//! Random n-lifts of regular graphs and their spectra.
//!
//! The crate builds uniform random lifts of small `d`-regular base graphs,
//! computes the largest nontrivial eigenvalue of each lift (dense or by
//! Lanczos), runs seeded Monte Carlo campaigns over many lifts, and checks
//! the expansion inequalities that bound that eigenvalue on concrete inputs.

pub mod decompose;
pub mod error;
pub mod graphs;
pub mod lanczos;
pub mod lift;
pub mod mc;
pub mod rng;
pub mod spectra;
pub mod verify;

pub use decompose::{
    expected_bilinear, fiber_dyadic_profile, heavy_light_split, lattice_round, light_variance_quantity, solve_zlogz,
    vector_dyadic_profile, w_star, HeavyLightSplit, Side,
};
pub use error::{Error, Result};
pub use graphs::{
    base_spectrum, catalog, lambda_of, parse_edge_list, serialize_edge_list, universal_cover_radius, validate,
    BaseGraph, CatalogGraph, Spectrum, ValidationReport,
};
pub use lift::{identity_lift, random_lift, LiftedGraph};
pub use mc::{ks_distance, quantiles, ramanujan_probability, run_trials, Ecdf, TrialBatch};
pub use spectra::{
    dense_lift_spectrum, is_ramanujan, lambda_new, lambda_new_with, ramanujan_threshold, LambdaReport, Method,
    SolverConfig,
};
pub use verify::{
    check_cheeger_sandwich, check_cut_bound, check_mixing, check_small_cut, check_theorem1, cheeger_bruteforce,
    InequalityReport,
};
