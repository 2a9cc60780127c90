//! Exact evaluation of the quantities that bound the bilinear form
//! `xᵀ A_H y`: the split into heavy and light coordinate pairs, dyadic
//! profiles of vectors and of vertex sets, rounding onto the ε-net lattice,
//! the expectation of the form over uniform lifts, and the `z·log₂ z`
//! equation that controls large cuts.
//!
//! Every sum over adjacent pairs runs over *ordered* pairs with adjacency
//! multiplicity, so that `xᵀ A_H x` is reproduced exactly. All logarithms are
//! base 2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::BaseGraph;
use crate::lift::LiftedGraph;

/// Slack allowed on unit-norm preconditions.
const NORM_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyLightSplit {
    /// Sum of `x_a y_b` over ordered adjacent pairs with `|x_a y_b| ≥ threshold`.
    pub r_heavy: f64,
    /// Sum over the remaining ordered adjacent pairs.
    pub r_light: f64,
    /// `λ / mn`
    pub threshold: f64,
    pub heavy_count: usize,
    pub light_count: usize,
}

impl HeavyLightSplit {
    pub fn total(&self) -> f64 {
        self.r_heavy + self.r_light
    }
}

fn check_len(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch { expected, got: v.len() });
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `xᵀ A_H y` by the matrix-free apply.
pub fn bilinear(h: &LiftedGraph, x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(h.order(), x)?;
    let ay = h.adjacency_apply(y)?;
    Ok(x.iter().zip(&ay).map(|(a, b)| a * b).sum())
}

/// Splits `xᵀ A_H y` into heavy and light ordered pairs at `lam / mn`.
/// Ties at the threshold are heavy.
pub fn heavy_light_split(h: &LiftedGraph, lam: f64, x: &[f64], y: &[f64]) -> Result<HeavyLightSplit> {
    let order = h.order();
    check_len(order, x)?;
    check_len(order, y)?;
    if lam.is_nan() || lam <= 0.0 {
        return Err(Error::Precondition(format!("λ = {lam} must be positive")));
    }
    let threshold = lam / order as f64;
    let mut split = HeavyLightSplit { r_heavy: 0.0, r_light: 0.0, threshold, heavy_count: 0, light_count: 0 };
    for (a, b) in h.edges() {
        for (p, q) in [(a, b), (b, a)] {
            let t = x[p] * y[q];
            if t.abs() >= threshold {
                split.r_heavy += t;
                split.heavy_count += 1;
            } else {
                split.r_light += t;
                split.light_count += 1;
            }
        }
    }
    Ok(split)
}

/// Which magnitude band convention a dyadic profile uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `2^ℓ ≤ |x_a|·√(mn/λ) < 2^{ℓ+1}`
    Heavy,
    /// `2^{−ℓ} ≤ |x_a|·√(mn/λ) < 2^{−ℓ+1}`
    Light,
}

/// Partition of the support of a vector into dyadic magnitude bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorDyadicProfile {
    pub side: Side,
    /// `λ / mn`
    pub scale: f64,
    pub levels: BTreeMap<i32, Vec<usize>>,
}

impl VectorDyadicProfile {
    /// `Σ_ℓ 4^{±ℓ} |D_ℓ| · λ/mn`, a lower bound on `‖x‖²`.
    pub fn energy_lower_bound(&self) -> f64 {
        let sign = match self.side {
            Side::Heavy => 1,
            Side::Light => -1,
        };
        self.levels.iter().map(|(&l, idx)| 2f64.powi(2 * sign * l) * idx.len() as f64 * self.scale).sum()
    }

    pub fn support_size(&self) -> usize {
        self.levels.values().map(Vec::len).sum()
    }

    pub fn level_of(&self, index: usize) -> Option<i32> {
        self.levels.iter().find(|(_, idx)| idx.binary_search(&index).is_ok()).map(|(&l, _)| l)
    }
}

/// Largest `ℓ` with `4^ℓ · scale ≤ v²`, for `v > 0`. Scaling by powers of two
/// is exact, so only the final square rounds.
fn heavy_level(v: f64, scale: f64) -> i32 {
    let fits = |l: i32| {
        let u = v * 2f64.powi(-l);
        u * u >= scale
    };
    let mut l = (v.log2() - 0.5 * scale.log2()).floor() as i32;
    while !fits(l) {
        l -= 1;
    }
    while fits(l + 1) {
        l += 1;
    }
    l
}

pub fn vector_dyadic_profile(x: &[f64], lam: f64, mn: usize, side: Side) -> Result<VectorDyadicProfile> {
    if lam.is_nan() || lam <= 0.0 || mn == 0 {
        return Err(Error::Precondition("λ and mn must be positive".into()));
    }
    let scale = lam / mn as f64;
    let mut levels: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &v) in x.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let l = heavy_level(v.abs(), scale);
        let key = match side {
            Side::Heavy => l,
            Side::Light => -l,
        };
        levels.entry(key).or_default().push(i);
    }
    Ok(VectorDyadicProfile { side, scale, levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberClass {
    /// Base vertices whose fiber holds a `(2^{−i−1}, 2^{−i}]` fraction of the set.
    pub fibers: Vec<usize>,
    /// `s_i = |S_i|`
    pub count: usize,
    /// `α_i = s_i · 2^{−i}`
    pub alpha: f64,
    /// `|A_i|`, the members of the set lying in those fibers.
    pub members: usize,
}

/// Dyadic classification of fibers by the fraction of each fiber a vertex
/// set occupies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberDyadicProfile {
    pub n: usize,
    /// `|A|`
    pub size: usize,
    pub classes: BTreeMap<u32, FiberClass>,
}

impl FiberDyadicProfile {
    /// `α = |A| / n`
    pub fn alpha(&self) -> f64 {
        self.size as f64 / self.n as f64
    }

    pub fn alpha_sum(&self) -> f64 {
        self.classes.values().map(|c| c.alpha).sum()
    }

    /// `½α_i n < |A_i| ≤ α_i n` for each class and `½Σα_i < α ≤ Σα_i`.
    pub fn sandwich_holds(&self) -> bool {
        let n = self.n as f64;
        let per_class = self.classes.values().all(|c| {
            let a = c.members as f64;
            0.5 * c.alpha * n < a && a <= c.alpha * n
        });
        let total = self.alpha_sum();
        let alpha = self.alpha();
        let global = self.size == 0 || (0.5 * total < alpha && alpha <= total);
        per_class && global
    }
}

/// Profiles a set of lift vertices (indices `j·n + i`); duplicates are ignored.
pub fn fiber_dyadic_profile(set: &[usize], n: usize) -> Result<FiberDyadicProfile> {
    if n == 0 {
        return Err(Error::Precondition("covering number must be positive".into()));
    }
    let mut members: Vec<usize> = set.to_vec();
    members.sort_unstable();
    members.dedup();
    let mut per_fiber: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in &members {
        *per_fiber.entry(v / n).or_default() += 1;
    }
    let mut classes: BTreeMap<u32, FiberClass> = BTreeMap::new();
    for (fiber, count) in per_fiber {
        // Largest i with count · 2^i ≤ n.
        let mut i = 0u32;
        while count << (i + 1) <= n {
            i += 1;
        }
        let class =
            classes.entry(i).or_insert_with(|| FiberClass { fibers: Vec::new(), count: 0, alpha: 0.0, members: 0 });
        class.fibers.push(fiber);
        class.count += 1;
        class.members += count;
    }
    for (&i, class) in classes.iter_mut() {
        class.alpha = class.count as f64 * 2f64.powi(-(i as i32));
    }
    Ok(FiberDyadicProfile { n, size: members.len(), classes })
}

/// A point of the lattice `(step · ℤ)^N`, `step = 1/(d√(mn))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
    pub step: f64,
}

impl LatticePoint {
    pub fn to_vec(&self) -> Vec<f64> {
        self.coords.iter().map(|&c| c as f64 * self.step).collect()
    }

    /// `‖x‖ ≤ 1`, decided in integers as `Σ c² ≤ d²·mn`.
    fn within_unit(coords: &[i64], d: usize, mn: usize) -> bool {
        let sq: i128 = coords.iter().map(|&c| (c as i128) * (c as i128)).sum();
        sq <= (d as i128) * (d as i128) * (mn as i128)
    }
}

/// Rounds `x` (with `‖x‖ ≤ 1`) to a lattice point of norm at most 1 within
/// one lattice step in every coordinate.
///
/// Coordinates are first rounded to the nearest multiple of the step. While
/// the result has norm above 1, the largest-magnitude coordinate that was
/// rounded away from zero is moved one step back toward zero; rounding
/// every coordinate toward zero has norm at most `‖x‖`, so this terminates
/// within the unit ball with every coordinate still within one step of `x`.
pub fn lattice_round(x: &[f64], d: usize, mn: usize) -> Result<LatticePoint> {
    check_len(mn, x)?;
    if d == 0 {
        return Err(Error::Precondition("degree must be positive".into()));
    }
    let nx = norm(x);
    if nx > 1.0 + NORM_SLACK {
        return Err(Error::Precondition(format!("‖x‖ = {nx} exceeds 1")));
    }
    let step = 1.0 / (d as f64 * (mn as f64).sqrt());
    let mut coords: Vec<i64> = x.iter().map(|&v| (v / step).round() as i64).collect();
    if !LatticePoint::within_unit(&coords, d, mn) {
        let mut away: Vec<usize> = (0..mn).filter(|&k| (coords[k] as f64 * step).abs() > x[k].abs()).collect();
        away.sort_by(|&a, &b| coords[b].abs().cmp(&coords[a].abs()).then(a.cmp(&b)));
        let mut it = away.into_iter();
        while !LatticePoint::within_unit(&coords, d, mn) {
            let k = match it.next() {
                Some(k) => k,
                // Only reachable when ‖x‖ sits inside the slack above 1.
                None => (0..mn).max_by_key(|&k| coords[k].abs()).unwrap_or(0),
            };
            coords[k] -= coords[k].signum();
        }
    }
    Ok(LatticePoint { coords, step })
}

/// `E[xᵀ A_H y]` over uniform random `n`-lifts of a loop-free base graph:
/// `(1/n) wᵀ A_G z` with `w_j = Σ_i x_ij`, `z_j = Σ_i y_ij`.
pub fn expected_bilinear(g: &BaseGraph, n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    if g.has_loops() {
        return Err(Error::Precondition("expected bilinear form is only defined for loop-free base graphs".into()));
    }
    let m = g.vertex_count();
    check_len(m * n, x)?;
    check_len(m * n, y)?;
    let fiber_sums = |v: &[f64]| -> Vec<f64> { v.chunks(n).map(|c| c.iter().sum()).collect() };
    let w = fiber_sums(x);
    let z = fiber_sums(y);
    let total: f64 = g.edges().iter().map(|&(u, v)| w[u] * z[v] + w[v] * z[u]).sum();
    Ok(total / n as f64)
}

/// Unique `z > 1` with `z · log₂ z = b`, for `b > 0`.
///
/// Newton's method on `f(z) = z log₂ z − b`, kept inside a shrinking
/// bracket and falling back to bisection whenever a step leaves it.
pub fn solve_zlogz(b: f64) -> Result<f64> {
    if b.is_nan() || b <= 0.0 || !b.is_finite() {
        return Err(Error::Precondition(format!("b = {b} must be positive and finite")));
    }
    let f = |z: f64| z * z.log2() - b;
    let tol = 1e-12 * b.max(1.0);
    let (mut lo, mut hi) = (1.0f64, (2.0 * b).max(2.0));
    // Initial guess from z ≈ b / log₂ b for large b.
    let mut z = if b > 2.0 { (b / b.log2()).clamp(lo, hi) } else { 1.0 + b / 2.0 };
    for _ in 0..200 {
        let fz = f(z);
        if fz.abs() <= tol {
            break;
        }
        if fz < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let slope = z.log2() + std::f64::consts::LOG2_E;
        let newton = z - fz / slope;
        z = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WStar {
    /// Right-hand side of `z log₂ z = b`.
    pub b: f64,
    pub z_star: f64,
    /// `9 e / 2^{i+j} · max(z*, 2)`
    pub w_star: f64,
}

/// Cut threshold for a pair of fiber classes `(i, j)` with `e_st` base edges
/// between them:
/// `b = 2^{i+j}/(9 e_st) · [(i+2)α_i + (j+2)β_j + n^{−1/4}]`,
/// `z* log₂ z* = b`, `w* = 9 e_st / 2^{i+j} · max(z*, 2)`.
pub fn w_star(e_st: u64, i: u32, j: u32, alpha_i: f64, beta_j: f64, n: usize) -> Result<WStar> {
    if e_st == 0 {
        return Err(Error::Precondition("e(S_i, T_j) = 0 leaves b undefined".into()));
    }
    if alpha_i < 0.0 || beta_j < 0.0 || n == 0 {
        return Err(Error::Precondition("α_i, β_j must be non-negative and n ≥ 1".into()));
    }
    let scale = 2f64.powi((i + j) as i32);
    let e9 = 9.0 * e_st as f64;
    let b = scale / e9 * ((i as f64 + 2.0) * alpha_i + (j as f64 + 2.0) * beta_j + (n as f64).powf(-0.25));
    let z_star = solve_zlogz(b)?;
    Ok(WStar { b, z_star, w_star: e9 / scale * z_star.max(2.0) })
}

/// `Σ_{i,i'} Σ_{j∼j'} x_ij² y_i'j'² 1{|x_ij y_i'j'| < λ/mn}` over ordered base
/// adjacencies with multiplicity (the graph `A_G ⊗ J_n`).
pub fn light_variance_quantity(g: &BaseGraph, n: usize, lam: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let order = g.vertex_count() * n;
    check_len(order, x)?;
    check_len(order, y)?;
    if lam.is_nan() || lam <= 0.0 {
        return Err(Error::Precondition(format!("λ = {lam} must be positive")));
    }
    for (name, v) in [("x", x), ("y", y)] {
        let nv = norm(v);
        if nv > 1.0 + NORM_SLACK {
            return Err(Error::Precondition(format!("‖{name}‖ = {nv} exceeds 1")));
        }
    }
    let threshold = lam / order as f64;
    let fiber_term = |j: usize, jp: usize| -> f64 {
        let xs = &x[j * n..(j + 1) * n];
        let ys = &y[jp * n..(jp + 1) * n];
        let mut acc = 0.0;
        for &a in xs {
            if a == 0.0 {
                continue;
            }
            for &b in ys {
                if (a * b).abs() < threshold {
                    acc += a * a * b * b;
                }
            }
        }
        acc
    };
    Ok(g.edges().iter().map(|&(u, v)| fiber_term(u, v) + fiber_term(v, u)).sum())
}

/// Splits `x` on each fiber into the lower and upper halves of `[0, n)`
/// (`x'` keeps `i < ⌈n/2⌉`), so each part has at most `⌈n/2⌉` nonzero entries
/// per fiber and `x = x' + x''`.
pub fn sparse_split(x: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let half = n.div_ceil(2);
    let mut lower = vec![0.0; x.len()];
    let mut upper = vec![0.0; x.len()];
    for (idx, &v) in x.iter().enumerate() {
        if idx % n < half {
            lower[idx] = v;
        } else {
            upper[idx] = v;
        }
    }
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::catalog;
    use crate::lift::random_lift;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nv = norm(&v);
        v.into_iter().map(|x| x / nv).collect()
    }

    #[test]
    fn uniform_vectors_are_all_light() {
        let h = random_lift(&catalog("petersen").unwrap(), 20, 1).unwrap();
        let mn = h.order();
        let x = vec![1.0 / (mn as f64).sqrt(); mn];
        let s = heavy_light_split(&h, 2.0, &x, &x).unwrap();
        assert_eq!(s.r_heavy, 0.0);
        assert_eq!(s.heavy_count, 0);
        assert!((s.r_light - 3.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_indicators_are_heavy() {
        let h = random_lift(&catalog("k4").unwrap(), 5, 2).unwrap();
        let (a, b) = h.edges().next().unwrap();
        let mut x = vec![0.0; h.order()];
        let mut y = vec![0.0; h.order()];
        x[a] = 1.0;
        y[b] = 1.0;
        let s = heavy_light_split(&h, h.order() as f64, &x, &y).unwrap();
        assert_eq!(s.r_heavy, 1.0);
        assert_eq!(s.r_light, 0.0);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let h = random_lift(&catalog("k4").unwrap(), 5, 2).unwrap();
        let x = vec![0.0; 20];
        assert!(heavy_light_split(&h, 0.0, &x, &x).is_err());
        assert!(heavy_light_split(&h, 1.0, &x[..3], &x).is_err());
    }

    #[test]
    fn raising_lambda_moves_pairs_to_light() {
        let h = random_lift(&catalog("petersen").unwrap(), 10, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = unit(&mut rng, h.order());
        let y = unit(&mut rng, h.order());
        let mut last = 0;
        for lam in [0.01, 0.1, 1.0, 2.0, 10.0, 100.0] {
            let s = heavy_light_split(&h, lam, &x, &y).unwrap();
            assert!(s.light_count >= last);
            last = s.light_count;
        }
    }

    #[test]
    fn dyadic_boundary_and_empty() {
        // λ/mn = 2/8 = 1/4, so x = 1/2 sits exactly on level 0.
        let mut x = vec![0.0; 8];
        x[3] = 0.5;
        let p = vector_dyadic_profile(&x, 2.0, 8, Side::Heavy).unwrap();
        assert_eq!(p.levels.len(), 1);
        assert_eq!(p.levels[&0], vec![3]);
        let p = vector_dyadic_profile(&x, 2.0, 8, Side::Light).unwrap();
        assert_eq!(p.levels[&0], vec![3]);
        let p = vector_dyadic_profile(&[0.0; 8], 2.0, 8, Side::Heavy).unwrap();
        assert!(p.levels.is_empty());
    }

    #[test]
    fn dyadic_levels_follow_conventions() {
        // scale 1/4: |x| = 0.3 → t = 0.6 ∈ [2^-1, 2^0): heavy −1, light 1.
        //            |x| = 1.7 → t = 3.4 ∈ [2, 4): heavy 1, light −1.
        let x = [0.3, -1.7, 0.0, 1e-200];
        let h = vector_dyadic_profile(&x, 2.0, 8, Side::Heavy).unwrap();
        assert_eq!(h.level_of(0), Some(-1));
        assert_eq!(h.level_of(1), Some(1));
        assert_eq!(h.level_of(2), None);
        assert_eq!(h.support_size(), 3);
        let l = vector_dyadic_profile(&x, 2.0, 8, Side::Light).unwrap();
        assert_eq!(l.level_of(0), Some(1));
        assert_eq!(l.level_of(1), Some(-1));
        let t: f64 = 1e-200 * 2.0;
        let expect = t.log2().floor() as i32;
        assert_eq!(h.level_of(3), Some(expect));
    }

    #[test]
    fn fiber_profile_examples() {
        let n = 8;
        let full: Vec<usize> = (16..24).collect();
        let p = fiber_dyadic_profile(&full, n).unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.classes[&0].fibers, vec![2]);
        assert_eq!(p.classes[&0].alpha, 1.0);

        let p = fiber_dyadic_profile(&[5], n).unwrap();
        assert_eq!(p.classes.keys().copied().collect::<Vec<_>>(), vec![3]);
        assert!(p.sandwich_holds());

        let p = fiber_dyadic_profile(&[], n).unwrap();
        assert!(p.classes.is_empty() && p.sandwich_holds());
    }

    #[test]
    fn lattice_round_examples() {
        let (d, mn) = (3, 8);
        let step = 1.0 / (3.0 * 8f64.sqrt());
        let mut x = vec![0.0; mn];
        x[0] = 1.4 * step;
        let r = lattice_round(&x, d, mn).unwrap();
        assert_eq!(r.coords[0], 1);
        assert!(r.coords[1..].iter().all(|&c| c == 0));

        let coords = vec![2i64, -1, 0, 3, 0, 0, -4, 1];
        let on_lattice: Vec<f64> = coords.iter().map(|&c| c as f64 * step).collect();
        assert_eq!(lattice_round(&on_lattice, d, mn).unwrap().coords, coords);

        let mut big = vec![0.0; mn];
        big[0] = 1.1;
        assert!(lattice_round(&big, d, mn).is_err());
    }

    #[test]
    fn lattice_round_repairs_norm() {
        // Every coordinate of this unit vector rounds up.
        let (d, mn) = (2, 2);
        let step = 1.0 / (2.0 * 2f64.sqrt());
        let x = vec![0.5f64.sqrt(), 0.5f64.sqrt()];
        let r = lattice_round(&x, d, mn).unwrap();
        let v = r.to_vec();
        assert!(norm(&v) <= 1.0);
        for (a, b) in v.iter().zip(&x) {
            assert!((a - b).abs() <= step * (1.0 + 1e-12));
        }
    }

    #[test]
    fn expectation_examples() {
        let g = catalog("petersen").unwrap();
        let n = 7;
        let mn = 70;
        let x = vec![1.0 / (mn as f64).sqrt(); mn];
        assert!((expected_bilinear(&g, n, &x, &x).unwrap() - 3.0).abs() < 1e-12);

        let mut z = vec![0.0; mn];
        z[14] = 0.5f64.sqrt();
        z[15] = -(0.5f64.sqrt());
        assert_eq!(expected_bilinear(&g, n, &z, &z).unwrap(), 0.0);

        assert!(expected_bilinear(&catalog("bouquet(2)").unwrap(), 3, &[0.0; 3], &[0.0; 3]).is_err());
        assert!(expected_bilinear(&g, n, &x[..5], &x).is_err());
    }

    #[test]
    fn zlogz_exact_hits() {
        for (b, z) in [(2.0, 2.0), (8.0, 4.0), (24.0, 8.0)] {
            let got = solve_zlogz(b).unwrap();
            assert!((got - z).abs() <= 1e-12 * z, "b={b}: {got}");
        }
        assert!(solve_zlogz(0.0).is_err());
        assert!(solve_zlogz(-1.0).is_err());
    }

    #[test]
    fn zlogz_small_b() {
        for b in [1e-9, 1e-3, 0.5, 1.0] {
            let z = solve_zlogz(b).unwrap();
            assert!(z > 1.0);
            assert!((z * z.log2() - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn w_star_examples() {
        // i = j = 0, e = 1, n = 1: b = (2·8.5 + 0 + 1)/9 = 2 → z* = 2.
        let w = w_star(1, 0, 0, 8.5, 0.0, 1).unwrap();
        assert!((w.b - 2.0).abs() < 1e-15);
        assert!((w.w_star - 18.0).abs() < 1e-9);

        // Small b: clamp branch.
        let w = w_star(50, 1, 1, 0.01, 0.01, 10_000).unwrap();
        assert!(w.z_star < 2.0);
        assert_eq!(w.w_star, 9.0 * 50.0 / 4.0 * 2.0);

        assert!(w_star(0, 0, 0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn light_variance_uniform_vectors() {
        let g = catalog("petersen").unwrap();
        let n = 6;
        let mn = 60;
        let x = vec![1.0 / (mn as f64).sqrt(); mn];
        let v = light_variance_quantity(&g, n, 2.0, &x, &x).unwrap();
        assert!((v - 3.0 / 10.0).abs() < 1e-12);
        assert_eq!(light_variance_quantity(&g, n, 2.0, &[0.0; 60], &x).unwrap(), 0.0);
        // On C_4 with n = 16, every product 1/64 sits exactly on the λ = 1
        // threshold, hence is heavy.
        let c4 = catalog("cycle(4)").unwrap();
        let e = vec![0.125; 64];
        assert_eq!(light_variance_quantity(&c4, 16, 1.0, &e, &e).unwrap(), 0.0);
        let mut big = x.clone();
        big[0] = 2.0;
        assert!(light_variance_quantity(&g, n, 2.0, &big, &x).is_err());
    }

    #[test]
    fn sparse_split_partitions_light_sum() {
        let h = random_lift(&catalog("petersen").unwrap(), 9, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = unit(&mut rng, h.order());
        let y = unit(&mut rng, h.order());
        let (lo, hi) = sparse_split(&x, 9);
        for fiber in 0..10 {
            let nz = |v: &[f64]| v[fiber * 9..(fiber + 1) * 9].iter().filter(|&&t| t != 0.0).count();
            assert!(nz(&lo) <= 5 && nz(&hi) <= 5);
        }
        let whole = heavy_light_split(&h, 2.0, &x, &y).unwrap().r_light;
        let parts =
            heavy_light_split(&h, 2.0, &lo, &y).unwrap().r_light + heavy_light_split(&h, 2.0, &hi, &y).unwrap().r_light;
        assert!((whole - parts).abs() < 1e-12);
    }
}
