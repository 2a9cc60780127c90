//! Shared fixtures for the kernel benchmarks.

use lift_spectra::{catalog, random_lift, LiftedGraph};

/// A random lift of a catalog graph; panics on an unknown name.
pub fn fixture(base: &str, n: usize, seed: u64) -> LiftedGraph {
    let g = catalog(base).expect("catalog graph");
    random_lift(&g, n, seed).expect("valid lift")
}

/// Lifts of total size 2000 used throughout the benchmarks.
pub fn size_2000() -> Vec<(&'static str, LiftedGraph)> {
    vec![
        ("k4_n500", fixture("k4", 500, 1)),
        ("petersen_n200", fixture("petersen", 200, 1)),
        ("dodecahedral_n100", fixture("dodecahedral", 100, 1)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_order_2000() {
        for (label, h) in size_2000() {
            assert_eq!(h.order(), 2000, "{label}");
            assert!(h.verify_cover(), "{label}");
        }
    }
}
