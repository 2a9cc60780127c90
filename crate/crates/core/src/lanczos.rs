//! Symmetric Lanczos with full reorthogonalization on a matrix-free operator.
//!
//! Convergence of a Ritz value `θ` is judged by the standard bound
//! `‖A x − θ x‖ = β_j |s_j|`, where `s_j` is the last component of the
//! corresponding eigenvector of the tridiagonal `T_j`. Only that last row is
//! needed, so the tridiagonal eigenproblem is solved by implicit QL while
//! tracking a single row of the eigenvector matrix.
//!
//! When the Krylov space becomes invariant (`β ≈ 0`) the iteration restarts
//! from a fresh random vector orthogonal to everything found so far, which
//! lets repeated eigenvalues appear with their multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Symmetric linear operator of fixed order.
pub trait SymmetricOperator {
    fn order(&self) -> usize;
    /// `y ← A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Upper bound on the spectral radius; scales tolerances.
    fn norm_bound(&self) -> f64;
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Number of extremes wanted at each end of the spectrum.
    pub k: usize,
    /// Ritz pairs are accepted once `residual ≤ tol · norm_bound`.
    pub tol: f64,
    pub seed: u64,
    /// Iteration cap; defaults to `10 · k · ⌈log2 N⌉`, never more than `N`.
    pub max_iter: Option<usize>,
    /// Orthonormal vectors the Krylov space is kept orthogonal to. Each must
    /// span an invariant subspace of the operator.
    pub deflate: Vec<Vec<f64>>,
    /// Also form the Ritz vectors of the reported extremes.
    pub want_vectors: bool,
    /// How many extremes at each end must meet `tol` before stopping;
    /// defaults to `k`. The rest are reported with their own residuals.
    pub converge: Option<usize>,
}

impl LanczosOptions {
    pub fn new(k: usize, tol: f64, seed: u64) -> Self {
        Self { k, tol, seed, max_iter: None, deflate: Vec::new(), want_vectors: false, converge: None }
    }
}

/// Default iteration cap `10 · k · ⌈log2 order⌉`, clipped to the order.
pub fn default_iteration_cap(k: usize, order: usize) -> usize {
    let log = (usize::BITS - order.saturating_sub(1).leading_zeros()).max(1) as usize;
    (10 * k * log).min(order)
}

#[derive(Clone, Debug)]
pub struct RitzPair {
    pub value: f64,
    pub residual: f64,
    pub vector: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct LanczosExtremes {
    /// Largest Ritz values, descending.
    pub largest: Vec<RitzPair>,
    /// Smallest Ritz values, ascending.
    pub smallest: Vec<RitzPair>,
    pub iterations: usize,
    pub restarts: usize,
}

impl LanczosExtremes {
    pub fn max_residual(&self) -> f64 {
        self.largest.iter().chain(&self.smallest).fold(0.0, |acc, p| acc.max(p.residual))
    }
}

pub fn lanczos_extremes<A: SymmetricOperator>(op: &A, opts: &LanczosOptions) -> Result<LanczosExtremes> {
    let order = op.order();
    if opts.k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    for v in &opts.deflate {
        if v.len() != order {
            return Err(Error::LengthMismatch { expected: order, got: v.len() });
        }
    }
    let dim = order - opts.deflate.len().min(order);
    if dim == 0 {
        return Err(Error::Precondition("operator has no room after deflation".into()));
    }
    let cap = opts.max_iter.unwrap_or_else(|| default_iteration_cap(opts.k, order)).clamp(1, dim);
    let scale = op.norm_bound().max(f64::MIN_POSITIVE);
    let target = opts.tol * scale;
    let breakdown = 1e-12 * scale;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut alpha: Vec<f64> = Vec::with_capacity(cap);
    // beta[j] couples basis[j] and basis[j+1]; 0 marks a restart.
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut restarts = 0;
    let mut start_index = 0u64;

    let mut q = fresh_start(order, opts.seed, &mut start_index, &opts.deflate, &basis)?;
    let mut w = vec![0.0; order];
    let mut last_check = 0;

    loop {
        let j = basis.len();
        op.apply(&q, &mut w);
        let a = dot(&q, &w);
        alpha.push(a);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(std::mem::take(&mut q));
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            orthogonalize(&mut w, &opts.deflate);
            orthogonalize(&mut w, &basis);
        }
        let mut b = norm(&w);
        let steps = j + 1;

        let exhausted = steps == dim;
        let due = steps >= 2 * opts.k.min(dim) && (steps - last_check >= (steps / 10).max(5));
        if exhausted || steps == cap || due || b <= breakdown {
            last_check = steps;
            let (theta, last_row) = tridiagonal_eigen_last_row(&alpha, &beta)?;
            let coupling = if exhausted { 0.0 } else { b };
            let required = opts.converge.unwrap_or(opts.k).clamp(1, opts.k);
            let pick = select_extremes(&theta, &last_row, coupling, required);
            // A breakdown only proves the current Krylov block is invariant;
            // repeated eigenvalues outside it show up after the restart.
            let settled = b > breakdown || steps == cap;
            let converged = exhausted || (settled && pick.iter().all(|&(_, residual)| residual <= target));
            if converged {
                let residuals: Vec<f64> = last_row.iter().map(|z| (coupling * z).abs()).collect();
                return finish(op, opts, &basis, &alpha, &beta, &theta, &residuals, restarts);
            }
            if steps == cap {
                let residual = pick.iter().fold(0.0, |acc: f64, &(_, r)| acc.max(r));
                return Err(Error::NotConverged { iterations: steps, residual, target });
            }
        }

        if b <= breakdown {
            // Invariant subspace: restart orthogonally, decoupling T.
            restarts += 1;
            b = 0.0;
            q = fresh_start(order, opts.seed, &mut start_index, &opts.deflate, &basis)?;
        } else {
            q = w.iter().map(|x| x / b).collect();
        }
        beta.push(b);
    }
}

#[allow(clippy::too_many_arguments)]
fn finish<A: SymmetricOperator>(
    op: &A,
    opts: &LanczosOptions,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    theta: &[f64],
    residuals: &[f64],
    restarts: usize,
) -> Result<LanczosExtremes> {
    let steps = alpha.len();
    let k = opts.k.min(steps);
    let mut order_idx: Vec<usize> = (0..steps).collect();
    order_idx.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));

    let vectors = opts.want_vectors.then(|| {
        let mut t = DMatrix::zeros(steps, steps);
        for i in 0..steps {
            t[(i, i)] = alpha[i];
            if i + 1 < steps {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        SymmetricEigen::new(t)
    });

    let make = |i: usize| -> RitzPair {
        let Some(eig) = &vectors else {
            return RitzPair { value: theta[i], residual: residuals[i], vector: None };
        };
        let idx = nearest(eig.eigenvalues.as_slice(), theta[i]);
        let mut x = vec![0.0; op.order()];
        for (c, qv) in eig.eigenvectors.column(idx).iter().zip(basis) {
            axpy(*c, qv, &mut x);
        }
        let mut ax = vec![0.0; op.order()];
        op.apply(&x, &mut ax);
        let value = eig.eigenvalues[idx];
        let residual = ax.iter().zip(&x).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
        RitzPair { value, residual, vector: Some(x) }
    };

    let largest = order_idx[..k].iter().map(|&i| make(i)).collect();
    let smallest = order_idx.iter().rev().take(k).map(|&i| make(i)).collect();
    Ok(LanczosExtremes { largest, smallest, iterations: steps, restarts })
}

fn nearest(values: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if (v - target).abs() < (values[best] - target).abs() {
            best = i;
        }
    }
    best
}

/// `(value, residual)` of the `k` largest and `k` smallest Ritz values.
fn select_extremes(theta: &[f64], last_row: &[f64], coupling: f64, k: usize) -> Vec<(f64, f64)> {
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    idx.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
    let k = k.min(idx.len());
    idx[..k].iter().chain(idx[idx.len() - k..].iter()).map(|&i| (theta[i], (coupling * last_row[i]).abs())).collect()
}

fn fresh_start(order: usize, seed: u64, index: &mut u64, deflate: &[Vec<f64>], basis: &[Vec<f64>]) -> Result<Vec<f64>> {
    for _ in 0..8 {
        let mut r = rng::stream(seed, rng::domain::LANCZOS_START, *index);
        *index += 1;
        let mut v: Vec<f64> = (0..order).map(|_| r.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            orthogonalize(&mut v, deflate);
            orthogonalize(&mut v, basis);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Ok(v);
        }
    }
    Err(Error::Precondition("could not draw a start vector outside the current basis".into()))
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    if against.is_empty() {
        return;
    }
    let coeffs: Vec<f64> = against.iter().map(|v| dot(v, w)).collect();
    for (c, v) in coeffs.iter().zip(against) {
        axpy(-c, v, w);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() ≥ diag.len() − 1`), together with the last
/// component of each normalized eigenvector. Implicit QL with Wilkinson-type
/// shifts; values are returned in no particular order.
pub fn tridiagonal_eigen_last_row(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n];
    if n == 0 {
        return Ok((d, z));
    }
    z[n - 1] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NotConverged { iterations: iter, residual: e[l].abs(), target: f64::EPSILON });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Dense(DMatrix<f64>);

    impl SymmetricOperator for Dense {
        fn order(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = (0..x.len()).map(|j| self.0[(i, j)] * x[j]).sum();
            }
        }
        fn norm_bound(&self) -> f64 {
            self.0.iter().map(|v| v.abs()).sum::<f64>().max(1.0)
        }
    }

    #[test]
    fn tridiagonal_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 7, 40] {
            let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut t = DMatrix::zeros(n, n);
            for i in 0..n {
                t[(i, i)] = diag[i];
                if i + 1 < n {
                    t[(i, i + 1)] = off[i];
                    t[(i + 1, i)] = off[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (vals, last) = tridiagonal_eigen_last_row(&diag, &off).unwrap();
            for (v, z) in vals.iter().zip(&last) {
                let k = nearest(eig.eigenvalues.as_slice(), *v);
                assert!((eig.eigenvalues[k] - v).abs() < 1e-12);
                assert!((eig.eigenvectors[(n - 1, k)].abs() - z.abs()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tridiagonal_with_zero_coupling() {
        let (vals, last) = tridiagonal_eigen_last_row(&[1.0, 2.0, 3.0], &[0.0, 0.0]).unwrap();
        let mut v = vals.clone();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        let i3 = nearest(&vals, 3.0);
        assert_eq!(last[i3].abs(), 1.0);
    }

    #[test]
    fn iteration_cap_formula() {
        assert_eq!(default_iteration_cap(2, 2000), 220);
        assert_eq!(default_iteration_cap(3, 1024), 300);
        assert_eq!(default_iteration_cap(4, 8), 8);
    }

    #[test]
    fn recovers_diagonal_extremes_and_vectors() {
        let n = 60;
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { i as f64 / 10.0 } else { 0.0 });
        let mut opts = LanczosOptions::new(2, 1e-10, 3);
        opts.max_iter = Some(n);
        opts.want_vectors = true;
        let r = lanczos_extremes(&Dense(a), &opts).unwrap();
        assert!((r.largest[0].value - 5.9).abs() < 1e-9);
        assert!((r.largest[1].value - 5.8).abs() < 1e-9);
        assert!(r.smallest[0].value.abs() < 1e-9);
        let x = r.largest[0].vector.as_ref().unwrap();
        assert!((x[59].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn restart_exposes_multiplicity() {
        let n = 12;
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i < 4 {
                    5.0
                } else {
                    1.0
                }
            } else {
                0.0
            }
        });
        let mut opts = LanczosOptions::new(3, 1e-10, 9);
        opts.max_iter = Some(n);
        let r = lanczos_extremes(&Dense(a), &opts).unwrap();
        assert!(r.restarts > 0);
        for p in &r.largest {
            assert!((p.value - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let a = Dense(DMatrix::identity(4, 4));
        assert!(lanczos_extremes(&a, &LanczosOptions::new(0, 1e-8, 1)).is_err());
        assert!(lanczos_extremes(&a, &LanczosOptions::new(1, 0.0, 1)).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let n = 400;
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { (i as f64).sqrt() } else { 0.0 });
        let mut opts = LanczosOptions::new(2, 1e-14, 3);
        opts.max_iter = Some(12);
        assert!(matches!(lanczos_extremes(&Dense(a), &opts), Err(Error::NotConverged { iterations: 12, .. })));
    }
}
