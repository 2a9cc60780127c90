//! Eigenvalues of lifts: dense at desk scale, Lanczos beyond it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{dense_symmetric_spectrum, Spectrum, DENSE_CAP};
use crate::lanczos::{self, LanczosExtremes, LanczosOptions, SymmetricOperator};
use crate::lift::LiftedGraph;

/// Added to `2√(d−1)` (times `d`) before classifying a lift as Ramanujan.
pub const RAMANUJAN_TOL_FACTOR: f64 = 1e-9;

impl SymmetricOperator for LiftedGraph {
    fn order(&self) -> usize {
        LiftedGraph::order(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.adjacency_apply_into(x, y).expect("Lanczos passes vectors of the operator order");
    }

    fn norm_bound(&self) -> f64 {
        self.degree() as f64
    }
}

/// Which solver produced a [`LambdaReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

/// Solver selection and Lanczos parameters for [`lambda_new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Lifts of order at most this use the dense solver. Must not exceed
    /// [`DENSE_CAP`].
    pub dense_cap: usize,
    /// Extremes tracked at each end by Lanczos.
    pub lanczos_k: usize,
    pub lanczos_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dense_cap: 256, lanczos_k: 4, lanczos_tol: 1e-8 }
    }
}

impl SolverConfig {
    /// Configuration used when a trial is retried: Lanczos `k` (and with it
    /// the iteration cap) and tolerance doubled.
    pub fn doubled(&self) -> Self {
        Self { dense_cap: self.dense_cap, lanczos_k: self.lanczos_k * 2, lanczos_tol: self.lanczos_tol * 2.0 }
    }
}

/// Second eigenvalue summary of a lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub lambda_1: f64,
    /// λ(H): largest absolute eigenvalue after removing one copy of `lambda_1`.
    pub lambda_new_max_abs: f64,
    pub method: Method,
    pub residual: f64,
}

/// JSON export of a [`LambdaReport`] with its Ramanujan classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaExport {
    pub lambda1: f64,
    pub lambda_new: f64,
    pub method: Method,
    pub residual: f64,
    pub ramanujan: bool,
    pub threshold: f64,
}

impl LambdaReport {
    pub fn export(&self, d: usize) -> LambdaExport {
        LambdaExport {
            lambda1: self.lambda_1,
            lambda_new: self.lambda_new_max_abs,
            method: self.method,
            residual: self.residual,
            ramanujan: is_ramanujan(self, d),
            threshold: ramanujan_threshold(d),
        }
    }
}

/// Full spectrum of `A_H` by dense eigendecomposition.
pub fn dense_lift_spectrum(h: &LiftedGraph) -> Result<Spectrum> {
    let order = h.order();
    if order > DENSE_CAP {
        return Err(Error::OverCap { order, cap: DENSE_CAP });
    }
    dense_symmetric_spectrum(h.dense_adjacency(), h.degree())
}

/// Approximations to the `k` largest and `k` smallest eigenvalues of `A_H`.
pub fn lanczos_extremes(h: &LiftedGraph, k: usize, tol: f64, seed: u64) -> Result<LanczosExtremes> {
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k}; need k ≥ 2")));
    }
    lanczos::lanczos_extremes(h, &LanczosOptions::new(k, tol, seed))
}

/// λ(H) with the default solver configuration.
pub fn lambda_new(h: &LiftedGraph) -> Result<LambdaReport> {
    lambda_new_with(h, &SolverConfig::default())
}

/// λ(H): the largest absolute eigenvalue once one copy of the top eigenvalue
/// is removed. A disconnected lift reports the second copy of `d`.
///
/// The Lanczos path runs on the orthogonal complement of the all-ones
/// vector, which is an exact eigenvector for eigenvalue `d` of every regular
/// lift; removing it removes exactly one copy of the top eigenvalue.
pub fn lambda_new_with(h: &LiftedGraph, config: &SolverConfig) -> Result<LambdaReport> {
    let order = h.order();
    if config.dense_cap > DENSE_CAP {
        return Err(Error::Precondition(format!(
            "dense cap {} exceeds the solver limit {DENSE_CAP}",
            config.dense_cap
        )));
    }
    if order <= config.dense_cap || order <= 2 {
        let s = dense_lift_spectrum(h)?;
        return Ok(LambdaReport {
            lambda_1: s.largest(),
            lambda_new_max_abs: s.nontrivial_max_abs(),
            method: Method::Dense,
            residual: s.max_residual,
        });
    }

    let unit = 1.0 / (order as f64).sqrt();
    let mut opts = LanczosOptions::new(config.lanczos_k, config.lanczos_tol, h.seed().unwrap_or(0) ^ order as u64);
    opts.deflate = vec![vec![unit; order]];
    // λ(H) needs only the outermost Ritz value at each end.
    opts.converge = Some(1);
    let ext = lanczos::lanczos_extremes(h, &opts)?;
    let top = &ext.largest[0];
    let bottom = &ext.smallest[0];
    let (value, residual) = if top.value.abs() >= bottom.value.abs() {
        (top.value.abs(), top.residual)
    } else {
        (bottom.value.abs(), bottom.residual)
    };
    Ok(LambdaReport { lambda_1: h.degree() as f64, lambda_new_max_abs: value, method: Method::Lanczos, residual })
}

/// `2√(d−1)`.
pub fn ramanujan_threshold(d: usize) -> f64 {
    2.0 * (d.saturating_sub(1) as f64).sqrt()
}

pub fn is_ramanujan(report: &LambdaReport, d: usize) -> bool {
    report.lambda_new_max_abs <= ramanujan_threshold(d) + RAMANUJAN_TOL_FACTOR * d as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{base_spectrum, catalog, lambda_of};
    use crate::lift::{identity_lift, random_lift};

    #[test]
    fn dense_spectrum_of_trivial_lifts() {
        let p = catalog("petersen").unwrap();
        let base = base_spectrum(&p).unwrap();
        let s = dense_lift_spectrum(&random_lift(&p, 1, 99).unwrap()).unwrap();
        for (a, b) in s.values.iter().zip(&base.values) {
            assert!((a - b).abs() < 1e-10);
        }

        let k4 = catalog("k4").unwrap();
        let s = dense_lift_spectrum(&random_lift(&k4, 50, 4).unwrap()).unwrap();
        assert_eq!(s.len(), 200);
        assert!((s.largest() - 3.0).abs() < 1e-10);
        assert!(s.max_residual <= 3e-8);
    }

    #[test]
    fn dense_spectrum_rejects_large_orders() {
        let h = random_lift(&catalog("bouquet(2)").unwrap(), 5000, 1).unwrap();
        assert!(matches!(dense_lift_spectrum(&h), Err(Error::OverCap { .. })));
    }

    #[test]
    fn lanczos_on_disconnected_copies_finds_repeated_top() {
        let h = identity_lift(&catalog("k4").unwrap(), 10).unwrap();
        let r = lanczos_extremes(&h, 2, 1e-10, 1).unwrap();
        assert!((r.largest[0].value - 3.0).abs() < 1e-9);
        assert!((r.largest[1].value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lanczos_bounds_on_petersen_lift() {
        let h = random_lift(&catalog("petersen").unwrap(), 100, 5).unwrap();
        let r = lanczos_extremes(&h, 3, 1e-8, 2).unwrap();
        assert!((r.largest[0].value - 3.0).abs() < 1e-8);
        assert!(r.smallest[0].value >= -3.0 - 1e-9);
        assert!(r.max_residual() <= 3e-8);
    }

    #[test]
    fn lanczos_matches_dense_extremes() {
        let h = random_lift(&catalog("petersen").unwrap(), 50, 8).unwrap();
        let dense = dense_lift_spectrum(&h).unwrap();
        let r = lanczos_extremes(&h, 4, 1e-8, 3).unwrap();
        let n = dense.len();
        for i in 0..4 {
            assert!((r.largest[i].value - dense.values[i]).abs() <= 1e-7, "top {i}");
            assert!((r.smallest[i].value - dense.values[n - 1 - i]).abs() <= 1e-7, "bottom {i}");
        }
    }

    #[test]
    fn lanczos_rejects_small_k() {
        let h = random_lift(&catalog("k4").unwrap(), 10, 1).unwrap();
        assert!(lanczos_extremes(&h, 1, 1e-8, 1).is_err());
    }

    #[test]
    fn lambda_new_examples() {
        let p = catalog("petersen").unwrap();
        let r = lambda_new(&random_lift(&p, 1, 3).unwrap()).unwrap();
        assert!((r.lambda_new_max_abs - lambda_of(&p).unwrap()).abs() < 1e-10);
        assert!(is_ramanujan(&r, 3));

        let r = lambda_new(&identity_lift(&p, 2).unwrap()).unwrap();
        assert!((r.lambda_new_max_abs - 3.0).abs() < 1e-10);
        assert!(!is_ramanujan(&r, 3));

        let c4 = catalog("cycle(4)").unwrap();
        let r = lambda_new(&identity_lift(&c4, 1).unwrap()).unwrap();
        assert!((r.lambda_new_max_abs - 2.0).abs() < 1e-12);
        assert!(is_ramanujan(&r, 2));
    }

    #[test]
    fn lambda_new_dense_and_lanczos_agree() {
        let p = catalog("petersen").unwrap();
        for seed in 0..3 {
            let h = random_lift(&p, 60, seed).unwrap();
            let dense = lambda_new_with(&h, &SolverConfig { dense_cap: 4096, ..Default::default() }).unwrap();
            let lz = lambda_new_with(&h, &SolverConfig { dense_cap: 0, ..Default::default() }).unwrap();
            assert_eq!(dense.method, Method::Dense);
            assert_eq!(lz.method, Method::Lanczos);
            assert!((dense.lambda_new_max_abs - lz.lambda_new_max_abs).abs() <= 1e-7 * 3.0);
        }
    }

    #[test]
    fn lambda_new_lanczos_on_disconnected_lift() {
        let h = identity_lift(&catalog("petersen").unwrap(), 40).unwrap();
        let r = lambda_new_with(&h, &SolverConfig { dense_cap: 0, ..Default::default() }).unwrap();
        assert!((r.lambda_new_max_abs - 3.0).abs() < 1e-8);
    }

    #[test]
    fn lambda_new_near_ramanujan_threshold_at_n200() {
        let h = random_lift(&catalog("petersen").unwrap(), 200, 2024).unwrap();
        let r = lambda_new(&h).unwrap();
        assert!((r.lambda_new_max_abs - 2.0 * 2f64.sqrt()).abs() < 0.25);
        assert!(r.lambda_new_max_abs >= 2.0 - 1e-7);
        assert!(r.lambda_new_max_abs <= 3.0 + 1e-9);
    }

    #[test]
    fn export_contains_threshold() {
        let r = LambdaReport { lambda_1: 3.0, lambda_new_max_abs: 2.9, method: Method::Lanczos, residual: 0.0 };
        let e = r.export(3);
        assert!(!e.ramanujan);
        assert_eq!(e.threshold, 2.0 * 2f64.sqrt());
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["method"], "lanczos");
    }

    #[test]
    fn oversized_dense_cap_is_rejected() {
        let h = random_lift(&catalog("k4").unwrap(), 3, 1).unwrap();
        let cfg = SolverConfig { dense_cap: DENSE_CAP + 1, ..Default::default() };
        assert!(lambda_new_with(&h, &cfg).is_err());
    }
}
