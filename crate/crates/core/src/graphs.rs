//! Regular base graphs, a catalog of small Ramanujan graphs, and exact
//! spectral quantities of the quotient.
//!
//! A loop at `v` adds 2 to the degree of `v` and 2 to the diagonal entry
//! `A[v][v]`, so a single vertex carrying `k` loops is `2k`-regular.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest matrix order handed to the dense symmetric eigensolver.
pub const DENSE_CAP: usize = 4096;

/// Eigenpair residuals must satisfy `‖Av − λv‖ ≤ RESIDUAL_FACTOR · d`.
pub const RESIDUAL_FACTOR: f64 = 1e-8;

/// A `d`-regular multigraph on `m` labeled vertices; loops allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseGraph {
    m: usize,
    d: usize,
    edges: Vec<(usize, usize)>,
}

impl BaseGraph {
    /// Builds a graph and checks that it is `d`-regular on `m ≥ 1` vertices.
    pub fn new(m: usize, d: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if d == 0 {
            return Err(Error::InvalidGraph("degree must be positive".into()));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= m || v >= m) {
            return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has an endpoint outside [0, {m})")));
        }
        let degrees = degrees(m, &edges);
        if let Some((v, &deg)) = degrees.iter().enumerate().find(|&(_, &deg)| deg != d) {
            return Err(Error::InvalidGraph(format!("vertex {v} has degree {deg}, expected {d}")));
        }
        Ok(Self { m, d, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Edges in insertion order; a loop is `(v, v)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    pub fn has_loops(&self) -> bool {
        self.loop_count() > 0
    }

    /// Neighbor lists with multiplicity. A loop at `v` lists `v` twice.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::with_capacity(self.d); self.m];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.m, self.m);
        for &(u, v) in &self.edges {
            a[(u, v)] += 1.0;
            a[(v, u)] += 1.0;
        }
        a
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self.m, &self.edges)
    }
}

fn degrees(m: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut deg = vec![0; m];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

/// Exact structural facts about an edge multiset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub m: usize,
    pub edge_count: usize,
    /// The common degree when every vertex has the same degree.
    pub regular: Option<usize>,
    pub connected: bool,
    /// No loops and no repeated edges.
    pub simple: bool,
    pub bipartite: bool,
    pub loops: usize,
    pub out_of_range: usize,
}

/// Inspects an arbitrary edge multiset on `m` vertices. Never fails;
/// out-of-range endpoints are counted and ignored.
pub fn validate(m: usize, edges: &[(usize, usize)]) -> ValidationReport {
    let in_range: Vec<(usize, usize)> = edges.iter().copied().filter(|&(u, v)| u < m && v < m).collect();
    let deg = degrees(m, &in_range);
    let regular = match deg.first() {
        Some(&d0) if deg.iter().all(|&x| x == d0) => Some(d0),
        _ => None,
    };

    let loops = in_range.iter().filter(|(u, v)| u == v).count();
    let mut keys: Vec<(usize, usize)> = in_range.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    keys.sort_unstable();
    let repeated = keys.windows(2).any(|w| w[0] == w[1]);

    let mut adj = vec![Vec::new(); m];
    for &(u, v) in &in_range {
        adj[u].push(v);
        adj[v].push(u);
    }

    // BFS 2-coloring over every component; a loop is an odd cycle.
    let mut color: Vec<Option<bool>> = vec![None; m];
    let mut bipartite = loops == 0;
    let mut components = 0;
    for start in 0..m {
        if color[start].is_some() {
            continue;
        }
        components += 1;
        color[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap_or(false);
            for &w in &adj[u] {
                match color[w] {
                    None => {
                        color[w] = Some(!cu);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cu => bipartite = false,
                    Some(_) => {}
                }
            }
        }
    }

    ValidationReport {
        m,
        edge_count: in_range.len(),
        regular,
        connected: components == 1,
        simple: loops == 0 && !repeated,
        bipartite,
        loops,
        out_of_range: edges.len() - in_range.len(),
    }
}

/// Named graph families available without an edge-list file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatalogGraph {
    K4,
    Petersen,
    Dodecahedral,
    Complete(usize),
    Cycle(usize),
    Bouquet(usize),
}

impl CatalogGraph {
    /// Parses `k4`, `petersen`, `dodecahedral`, `complete(k)`, `cycle(m)`,
    /// `bouquet(loops)`; `name:k` is accepted in place of `name(k)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim().to_ascii_lowercase();
        let (name, arg) = match spec.split_once(['(', ':']) {
            Some((name, rest)) => (name.trim(), Some(rest.trim_end_matches(')').trim())),
            None => (spec.as_str(), None),
        };
        let numeric = |family: &str| -> Result<usize> {
            let raw = arg.ok_or_else(|| Error::InvalidParams {
                family: family.into(),
                reason: "missing size parameter".into(),
            })?;
            raw.parse().map_err(|_| Error::InvalidParams {
                family: family.into(),
                reason: format!("`{raw}` is not a non-negative integer"),
            })
        };
        match name {
            "k4" => Ok(Self::K4),
            "petersen" => Ok(Self::Petersen),
            "dodecahedral" | "dodecahedron" => Ok(Self::Dodecahedral),
            "complete" => Ok(Self::Complete(numeric("complete")?)),
            "cycle" => Ok(Self::Cycle(numeric("cycle")?)),
            "bouquet" => Ok(Self::Bouquet(numeric("bouquet")?)),
            _ => Err(Error::UnknownGraph(spec.clone())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::K4 => "k4".into(),
            Self::Petersen => "petersen".into(),
            Self::Dodecahedral => "dodecahedral".into(),
            Self::Complete(k) => format!("complete({k})"),
            Self::Cycle(m) => format!("cycle({m})"),
            Self::Bouquet(l) => format!("bouquet({l})"),
        }
    }

    pub fn build(&self) -> Result<BaseGraph> {
        let bad = |family: &str, reason: &str| Error::InvalidParams { family: family.into(), reason: reason.into() };
        match *self {
            Self::K4 => complete(4),
            Self::Complete(k) if k < 2 => Err(bad("complete", "needs at least 2 vertices")),
            Self::Complete(k) => complete(k),
            Self::Petersen => {
                let mut edges = Vec::with_capacity(15);
                for i in 0..5 {
                    edges.push((i, (i + 1) % 5));
                    edges.push((i, i + 5));
                    edges.push((5 + i, 5 + (i + 2) % 5));
                }
                BaseGraph::new(10, 3, edges)
            }
            Self::Dodecahedral => {
                // Outer pentagon 0..5, middle 10-cycle 5..15, inner pentagon 15..20.
                let mut edges = Vec::with_capacity(30);
                for i in 0..5 {
                    edges.push((i, (i + 1) % 5));
                    edges.push((i, 5 + 2 * i));
                    edges.push((5 + 2 * i + 1, 15 + i));
                    edges.push((15 + i, 15 + (i + 1) % 5));
                }
                for k in 0..10 {
                    edges.push((5 + k, 5 + (k + 1) % 10));
                }
                BaseGraph::new(20, 3, edges)
            }
            Self::Cycle(m) if m < 3 => Err(bad("cycle", "needs at least 3 vertices")),
            Self::Cycle(m) => BaseGraph::new(m, 2, (0..m).map(|i| (i, (i + 1) % m)).collect()),
            Self::Bouquet(0) => Err(bad("bouquet", "needs at least one loop")),
            Self::Bouquet(l) => BaseGraph::new(1, 2 * l, vec![(0, 0); l]),
        }
    }
}

fn complete(k: usize) -> Result<BaseGraph> {
    let edges = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
    BaseGraph::new(k, k - 1, edges)
}

/// Builds a catalog graph from its textual name.
pub fn catalog(spec: &str) -> Result<BaseGraph> {
    CatalogGraph::parse(spec)?.build()
}

/// Eigenvalues of a symmetric adjacency operator, sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub declared_degree: usize,
    /// Largest `‖Av − λv‖` over all computed eigenpairs.
    pub max_residual: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    /// `max |λ|` after removing one copy of the largest eigenvalue.
    pub fn nontrivial_max_abs(&self) -> f64 {
        self.values[1..].iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Distance from `value` to the nearest eigenvalue.
    pub fn distance_to(&self, value: f64) -> f64 {
        self.values.iter().fold(f64::INFINITY, |acc, v| acc.min((v - value).abs()))
    }

    /// CSV with header `index,eigenvalue`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{i},{v}");
        }
        out
    }
}

/// Full eigendecomposition of a dense symmetric matrix, with a residual
/// check on every eigenpair.
pub(crate) fn dense_symmetric_spectrum(a: DMatrix<f64>, d: usize) -> Result<Spectrum> {
    let order = a.nrows();
    if order > DENSE_CAP {
        return Err(Error::OverCap { order, cap: DENSE_CAP });
    }
    let eig = SymmetricEigen::new(a.clone());
    let av = &a * &eig.eigenvectors;
    let mut max_residual: f64 = 0.0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let r = (av.column(k) - eig.eigenvectors.column(k) * *lambda).norm();
        max_residual = max_residual.max(r);
    }
    let bound = RESIDUAL_FACTOR * d as f64;
    if max_residual > bound {
        return Err(Error::Residual { residual: max_residual, bound });
    }
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum { values, declared_degree: d, max_residual })
}

/// Spectrum of the base graph's adjacency matrix.
pub fn base_spectrum(g: &BaseGraph) -> Result<Spectrum> {
    dense_symmetric_spectrum(g.adjacency_matrix(), g.degree())
}

/// The (m, d, λ) parameter: largest nontrivial eigenvalue in absolute value.
pub fn lambda_of(g: &BaseGraph) -> Result<f64> {
    if !g.validate().connected {
        return Err(Error::Disconnected);
    }
    Ok(base_spectrum(g)?.nontrivial_max_abs())
}

/// Spectral radius `2√(d−1)` of the infinite `d`-regular tree.
pub fn universal_cover_radius(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Precondition(format!("degree {d} < 2")));
    }
    Ok(2.0 * ((d - 1) as f64).sqrt())
}

/// Parses the edge-list text format:
///
/// ```text
/// # comment
/// m=4 d=3
/// 0 1
/// 0 2
/// ```
///
/// `#` starts a comment anywhere on a line; blank lines are ignored.
pub fn parse_edge_list(text: &str) -> Result<BaseGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut deg: Vec<usize> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |reason: String| Error::Parse { line: line_no, reason };
        match header {
            None => {
                let mut m = None;
                let mut d = None;
                for tok in line.split_whitespace() {
                    let (key, val) =
                        tok.split_once('=').ok_or_else(|| perr(format!("expected `m=<int> d=<int>`, got `{tok}`")))?;
                    let val: usize = val.parse().map_err(|_| perr(format!("`{val}` is not a non-negative integer")))?;
                    match key {
                        "m" if m.is_none() => m = Some(val),
                        "d" if d.is_none() => d = Some(val),
                        _ => return Err(perr(format!("unexpected header key `{key}`"))),
                    }
                }
                let (m, d) = m.zip(d).ok_or_else(|| perr("header must define both m and d".into()))?;
                header = Some((m, d));
                deg = vec![0; m];
            }
            Some((m, _)) => {
                let mut it = line.split_whitespace();
                let mut endpoint = || -> Result<usize> {
                    let tok = it.next().ok_or_else(|| perr("expected `u v`".into()))?;
                    let v: usize = tok.parse().map_err(|_| perr(format!("`{tok}` is not a vertex index")))?;
                    if v >= m {
                        return Err(perr(format!("vertex {v} out of range for m={m}")));
                    }
                    Ok(v)
                };
                let u = endpoint()?;
                let v = endpoint()?;
                if it.next().is_some() {
                    return Err(perr("trailing tokens after `u v`".into()));
                }
                deg[u] += 1;
                deg[v] += 1;
                edges.push((u, v));
            }
        }
    }

    let (m, d) = header.ok_or(Error::Parse { line: last_line, reason: "missing `m=<int> d=<int>` header".into() })?;
    if let Some((v, &dv)) = deg.iter().enumerate().find(|&(_, &dv)| dv != d) {
        return Err(Error::Parse {
            line: last_line,
            reason: format!("vertex {v} has degree {dv}, header declares d={d}"),
        });
    }
    BaseGraph::new(m, d, edges)
}

pub fn serialize_edge_list(g: &BaseGraph) -> String {
    let mut out = format!("m={} d={}\n", g.m, g.d);
    for &(u, v) in &g.edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
