//! n-lifts of a base graph, stored as one permutation of `[0, n)` per base
//! edge.
//!
//! The lift of edge `(u, v)` with permutation `π` joins `(i, u)` to
//! `(π(i), v)` for every `i`. A loop at `v` is lifted the same way, joining
//! `(i, v)` to `(π(i), v)`; a fixed point of `π` becomes a loop of `H`.
//! Lift vertex `(i, j)` has index `j·n + i`, so fibers are contiguous.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{parse_edge_list, serialize_edge_list, BaseGraph};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedGraph {
    base: BaseGraph,
    n: usize,
    perms: Vec<Vec<u32>>,
    seed: Option<u64>,
}

/// Uniform random `n`-lift; edge `e` draws its permutation by Fisher–Yates
/// from the stream keyed by `(seed, e)`.
pub fn random_lift(g: &BaseGraph, n: usize, seed: u64) -> Result<LiftedGraph> {
    check_cover_number(n)?;
    let perms = (0..g.edges().len())
        .map(|e| {
            let mut rng = rng::stream(seed, rng::domain::LIFT_EDGE, e as u64);
            let mut p: Vec<u32> = (0..n as u32).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    Ok(LiftedGraph { base: g.clone(), n, perms, seed: Some(seed) })
}

/// `n` disjoint copies of a loop-free base graph.
pub fn identity_lift(g: &BaseGraph, n: usize) -> Result<LiftedGraph> {
    check_cover_number(n)?;
    if g.has_loops() {
        return Err(Error::Precondition("identity lift is only defined for loop-free base graphs".into()));
    }
    let id: Vec<u32> = (0..n as u32).collect();
    Ok(LiftedGraph { base: g.clone(), n, perms: vec![id; g.edges().len()], seed: None })
}

fn check_cover_number(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("covering number must be at least 1".into()));
    }
    if n > u32::MAX as usize {
        return Err(Error::Precondition(format!("covering number {n} too large")));
    }
    Ok(())
}

impl LiftedGraph {
    /// Assembles a lift from explicit permutations, rejecting anything that
    /// is not a valid cover.
    pub fn from_parts(base: BaseGraph, n: usize, perms: Vec<Vec<u32>>, seed: Option<u64>) -> Result<Self> {
        check_cover_number(n)?;
        let h = Self { base, n, perms, seed };
        if !h.verify_cover() {
            return Err(Error::InvalidGraph("permutations do not define a covering map".into()));
        }
        Ok(h)
    }

    /// Assembles a lift without checking it; [`verify_cover`](Self::verify_cover)
    /// reports whether the result is a cover. Entries `≥ n` are tolerated here
    /// but make `verify_cover` false and must not reach the adjacency routines.
    pub fn from_parts_unchecked(base: BaseGraph, n: usize, perms: Vec<Vec<u32>>, seed: Option<u64>) -> Self {
        Self { base, n, perms, seed }
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn cover_number(&self) -> usize {
        self.n
    }

    pub fn perms(&self) -> &[Vec<u32>] {
        &self.perms
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn degree(&self) -> usize {
        self.base.degree()
    }

    /// Number of lift vertices, `m·n`.
    pub fn order(&self) -> usize {
        self.base.vertex_count() * self.n
    }

    #[inline]
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// `(i, j)` for a lift vertex index.
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.base.edges().len()
    }

    /// Lift edges `((i,u), (π(i),v))` as vertex-index pairs, ordered by base
    /// edge and then by `i`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.base
            .edges()
            .iter()
            .zip(&self.perms)
            .flat_map(move |(&(u, v), p)| p.iter().enumerate().map(move |(i, &pi)| (u * n + i, v * n + pi as usize)))
    }

    /// True iff every permutation is a bijection of `[0, n)` and the fiber
    /// projection restricted to each vertex's incident edges is a bijection
    /// onto the incident edges of its image.
    pub fn verify_cover(&self) -> bool {
        let n = self.n;
        if self.perms.len() != self.base.edges().len() {
            return false;
        }
        // Each base edge e has two incidences (e, 0) at u and (e, 1) at v. Every
        // lift vertex over u must carry (e, 0) once and every lift vertex over v
        // must carry (e, 1) once.
        let mut hits = vec![0u32; n];
        for p in &self.perms {
            if p.len() != n {
                return false;
            }
            hits.iter_mut().for_each(|h| *h = 0);
            for &pi in p {
                match hits.get_mut(pi as usize) {
                    Some(h) => *h += 1,
                    None => return false,
                }
            }
            if hits.iter().any(|&h| h != 1) {
                return false;
            }
        }
        let d = self.degree();
        self.degrees().iter().all(|&deg| deg == d)
    }

    /// Degree of each lift vertex; a loop counts twice.
    pub fn degrees(&self) -> Vec<usize> {
        let order = self.order();
        let mut deg = vec![0usize; order];
        for (a, b) in self.edges() {
            if a < order {
                deg[a] += 1;
            }
            if b < order {
                deg[b] += 1;
            }
        }
        deg
    }

    /// Neighbor lists with multiplicity, in CSR form `(offsets, targets)`.
    pub fn neighbor_table(&self) -> (Vec<usize>, Vec<usize>) {
        let order = self.order();
        let deg = self.degrees();
        let mut offsets = Vec::with_capacity(order + 1);
        offsets.push(0);
        for dv in &deg {
            offsets.push(offsets.last().copied().unwrap_or(0) + dv);
        }
        let mut fill = offsets[..order].to_vec();
        let mut targets = vec![0; offsets[order]];
        for (a, b) in self.edges() {
            targets[fill[a]] = b;
            fill[a] += 1;
            targets[fill[b]] = a;
            fill[b] += 1;
        }
        (offsets, targets)
    }

    /// `A_H x` without materializing `A_H`.
    pub fn adjacency_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.order()];
        self.adjacency_apply_into(x, &mut y)?;
        Ok(y)
    }

    /// `y ← A_H x`. Accumulation order is fixed: base edges in order, then
    /// `i` ascending.
    pub fn adjacency_apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let order = self.order();
        if x.len() != order {
            return Err(Error::LengthMismatch { expected: order, got: x.len() });
        }
        if y.len() != order {
            return Err(Error::LengthMismatch { expected: order, got: y.len() });
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        let n = self.n;
        for (&(u, v), p) in self.base.edges().iter().zip(&self.perms) {
            let (xu, xv) = (u * n, v * n);
            for (i, &pi) in p.iter().enumerate() {
                let a = xu + i;
                let b = xv + pi as usize;
                y[a] += x[b];
                y[b] += x[a];
            }
        }
        Ok(())
    }

    /// Dense adjacency matrix; intended for small orders and as a test oracle.
    pub fn dense_adjacency(&self) -> DMatrix<f64> {
        let order = self.order();
        let mut a = DMatrix::zeros(order, order);
        for (p, q) in self.edges() {
            a[(p, q)] += 1.0;
            a[(q, p)] += 1.0;
        }
        a
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&LiftFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LiftFile = serde_json::from_str(text)?;
        let base = parse_edge_list(&file.base)?;
        Self::from_parts(base, file.n, file.perms, file.seed)
    }
}

/// JSON form of a lift: `{base, n, seed, perms}` with the base graph in
/// edge-list text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftFile {
    pub base: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub perms: Vec<Vec<u32>>,
}

impl From<&LiftedGraph> for LiftFile {
    fn from(h: &LiftedGraph) -> Self {
        Self { base: serialize_edge_list(&h.base), n: h.n, seed: h.seed, perms: h.perms.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{base_spectrum, catalog};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_lift_is_the_base() {
        let g = catalog("petersen").unwrap();
        let h = random_lift(&g, 1, 12345).unwrap();
        assert_eq!(h.dense_adjacency(), g.adjacency_matrix());
    }

    #[test]
    fn random_lift_is_deterministic() {
        let g = catalog("k4").unwrap();
        let a = random_lift(&g, 100, 7).unwrap();
        let b = random_lift(&g, 100, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.perms(), random_lift(&g, 100, 8).unwrap().perms());
    }

    #[test]
    fn identity_lift_is_disjoint_copies() {
        let g = catalog("k4").unwrap();
        let h = identity_lift(&g, 3).unwrap();
        assert_eq!(h.order(), 12);
        assert_eq!(h.edge_count(), 18);
        assert!(h.verify_cover());

        let c4 = catalog("cycle(4)").unwrap();
        assert_eq!(identity_lift(&c4, 1).unwrap().dense_adjacency(), c4.adjacency_matrix());

        let p = catalog("petersen").unwrap();
        let s = crate::spectra::dense_lift_spectrum(&identity_lift(&p, 2).unwrap()).unwrap();
        let base = base_spectrum(&p).unwrap();
        let doubled: Vec<f64> = base.values.iter().flat_map(|&v| [v, v]).collect();
        for (a, b) in s.values.iter().zip(&doubled) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_lift_rejects_loops() {
        let b = catalog("bouquet(2)").unwrap();
        assert!(identity_lift(&b, 2).is_err());
        assert!(random_lift(&b, 0, 1).is_err());
    }

    #[test]
    fn corrupted_permutation_fails_cover_check() {
        let g = catalog("k4").unwrap();
        let mut perms = identity_lift(&g, 5).unwrap().perms().to_vec();
        perms[2][3] = perms[2][4];
        let h = LiftedGraph::from_parts_unchecked(g.clone(), 5, perms.clone(), None);
        assert!(!h.verify_cover());
        assert!(h.degrees().contains(&2));
        assert!(LiftedGraph::from_parts(g, 5, perms, None).is_err());
    }

    #[test]
    fn out_of_range_permutation_entry_fails_cover_check() {
        let g = catalog("k4").unwrap();
        let mut perms = identity_lift(&g, 3).unwrap().perms().to_vec();
        perms[0][0] = 9;
        assert!(!LiftedGraph::from_parts_unchecked(g, 3, perms, None).verify_cover());
    }

    #[test]
    fn random_lifts_are_covers_including_loops() {
        for name in ["k4", "petersen", "bouquet(2)", "cycle(5)"] {
            let g = catalog(name).unwrap();
            for seed in 0..5 {
                let h = random_lift(&g, 17, seed).unwrap();
                assert!(h.verify_cover(), "{name} seed {seed}");
                assert!(h.degrees().iter().all(|&d| d == g.degree()));
                assert_eq!(h.edge_count(), 17 * g.edges().len());
            }
        }
    }

    #[test]
    fn apply_all_ones_and_indicator() {
        let g = catalog("petersen").unwrap();
        let h = random_lift(&g, 30, 3).unwrap();
        let y = h.adjacency_apply(&vec![1.0; h.order()]).unwrap();
        assert!(y.iter().all(|&v| v == 3.0));

        let v = h.vertex(4, 2);
        let mut e = vec![0.0; h.order()];
        e[v] = 1.0;
        let y = h.adjacency_apply(&e).unwrap();
        let (off, tgt) = h.neighbor_table();
        let mut expected = vec![0.0; h.order()];
        for &w in &tgt[off[v]..off[v + 1]] {
            expected[w] += 1.0;
        }
        assert_eq!(y, expected);
        assert_eq!(y.iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn apply_on_identity_lift_is_blockwise() {
        let g = catalog("k4").unwrap();
        let h = identity_lift(&g, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = h.adjacency_apply(&x).unwrap();
        let a = g.adjacency_matrix();
        for copy in 0..2 {
            let xc = DVector::from_iterator(4, (0..4).map(|j| x[h.vertex(copy, j)]));
            let yc = &a * xc;
            for j in 0..4 {
                assert!((yc[j] - y[h.vertex(copy, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn apply_length_mismatch() {
        let h = random_lift(&catalog("k4").unwrap(), 3, 1).unwrap();
        assert!(matches!(h.adjacency_apply(&[1.0; 5]), Err(Error::LengthMismatch { expected: 12, got: 5 })));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let h = random_lift(&catalog("bouquet(2)").unwrap(), 9, u64::MAX - 3).unwrap();
        let text = h.to_json().unwrap();
        let back = LiftedGraph::from_json(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.to_json().unwrap(), text);

        let id = identity_lift(&catalog("k4").unwrap(), 2).unwrap();
        assert_eq!(LiftedGraph::from_json(&id.to_json().unwrap()).unwrap(), id);
    }
}
