//! Seeded Monte Carlo campaigns over random lifts.
//!
//! Trial `t` of a batch lifts the base graph with seed
//! `mix_seed(master_seed, t)`, so every trial is reproducible on its own and
//! the batch does not depend on how trials are scheduled across threads.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graphs::BaseGraph;
use crate::lift::random_lift;
use crate::rng::mix_seed;
use crate::spectra::{is_ramanujan, lambda_new_with, ramanujan_threshold, LambdaReport, Method, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Quantile rule recorded alongside every quantile table.
pub const QUANTILE_METHOD: &str = "inclusive-linear";

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub lambda_new: f64,
    pub lambda_1: f64,
    pub ramanujan: bool,
    pub method: Method,
    pub residual: f64,
    /// Solved only on the retry with doubled Lanczos parameters.
    pub retried: bool,
}

impl TrialRecord {
    pub fn report(&self) -> LambdaReport {
        LambdaReport {
            lambda_1: self.lambda_1,
            lambda_new_max_abs: self.lambda_new,
            method: self.method,
            residual: self.residual,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WallTime {
    pub total_secs: f64,
    pub mean_trial_secs: f64,
    pub max_trial_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub base: String,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub trial_count: usize,
    pub master_seed: u64,
    pub solver: SolverConfig,
    /// λ(H) of every trial, ascending.
    pub samples: Vec<f64>,
    /// One record per trial, by trial index.
    pub records: Vec<TrialRecord>,
    /// Not reproducible; excluded from every CSV export.
    pub timing: WallTime,
}

impl TrialBatch {
    pub fn seeds(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.seed).collect()
    }

    /// `(seed, report)` per trial, by trial index.
    pub fn reports(&self) -> Vec<(u64, LambdaReport)> {
        self.records.iter().map(|r| (r.seed, r.report())).collect()
    }

    pub fn ecdf(&self) -> Result<Ecdf> {
        Ecdf::new(&self.samples)
    }

    pub fn quantiles(&self, qs: &[f64]) -> Result<Quantiles> {
        quantiles(&self.samples, qs)
    }

    /// `trial,seed,lambda_new,ramanujan`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,lambda_new,ramanujan\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.trial, r.seed, r.lambda_new, r.ramanujan);
        }
        out
    }

    pub fn summary(&self) -> Result<BatchSummary> {
        Ok(BatchSummary {
            base: self.base.clone(),
            n: self.n,
            mn: self.m * self.n,
            trials: self.trial_count,
            master_seed: self.master_seed,
            threshold: ramanujan_threshold(self.d),
            ramanujan: ramanujan_probability(self)?,
            quantiles: self.quantiles(&[0.0, 0.25, 0.5, 0.75, 1.0])?,
            mean: self.samples.iter().sum::<f64>() / self.samples.len() as f64,
            retried: self.records.iter().filter(|r| r.retried).count(),
        })
    }
}

/// Deterministic digest of a batch for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub base: String,
    pub n: usize,
    pub mn: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub threshold: f64,
    pub ramanujan: RamanujanEstimate,
    pub quantiles: Quantiles,
    pub mean: f64,
    pub retried: usize,
}

fn run_one(base: &BaseGraph, n: usize, trial: usize, seed: u64, solver: &SolverConfig) -> Result<(TrialRecord, f64)> {
    let start = Instant::now();
    let h = random_lift(base, n, seed)?;
    let (report, retried) = match lambda_new_with(&h, solver) {
        Ok(r) => (r, false),
        Err(e) if e.is_solver() => match lambda_new_with(&h, &solver.doubled()) {
            Ok(r) => (r, true),
            Err(e) => {
                return Err(Error::TrialFailed { trial, seed, source: Box::new(e) });
            }
        },
        Err(e) => return Err(e),
    };
    let d = base.degree();
    let record = TrialRecord {
        trial,
        seed,
        lambda_new: report.lambda_new_max_abs,
        lambda_1: report.lambda_1,
        ramanujan: is_ramanujan(&report, d),
        method: report.method,
        residual: report.residual,
        retried,
    };
    Ok((record, start.elapsed().as_secs_f64()))
}

/// Runs `trials` lifts with the default solver on `parallelism` threads.
pub fn run_trials(
    base: &BaseGraph,
    name: &str,
    n: usize,
    trials: usize,
    master_seed: u64,
    parallelism: usize,
) -> Result<TrialBatch> {
    run_trials_with(base, name, n, trials, master_seed, parallelism, &SolverConfig::default())
}

pub fn run_trials_with(
    base: &BaseGraph,
    name: &str,
    n: usize,
    trials: usize,
    master_seed: u64,
    parallelism: usize,
    solver: &SolverConfig,
) -> Result<TrialBatch> {
    if trials == 0 {
        return Err(Error::Precondition("a batch needs at least one trial".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("covering number must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let start = Instant::now();
    // Collected in trial order whatever the schedule.
    let outcomes: Vec<Result<(TrialRecord, f64)>> = pool.install(|| {
        (0..trials).into_par_iter().map(|t| run_one(base, n, t, mix_seed(master_seed, t as u64), solver)).collect()
    });
    let mut records = Vec::with_capacity(trials);
    let mut times = Vec::with_capacity(trials);
    for outcome in outcomes {
        let (record, secs) = outcome?;
        records.push(record);
        times.push(secs);
    }
    let mut samples: Vec<f64> = records.iter().map(|r| r.lambda_new).collect();
    samples.sort_by(f64::total_cmp);
    Ok(TrialBatch {
        base: name.to_string(),
        m: base.vertex_count(),
        d: base.degree(),
        n,
        trial_count: trials,
        master_seed,
        solver: solver.clone(),
        samples,
        records,
        timing: WallTime {
            total_secs: start.elapsed().as_secs_f64(),
            mean_trial_secs: times.iter().sum::<f64>() / trials as f64,
            max_trial_secs: times.iter().copied().fold(0.0, f64::max),
        },
    })
}

/// Empirical c.d.f. as a right-continuous step function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    /// Distinct sample values, ascending.
    pub points: Vec<f64>,
    /// `values[k]` is the c.d.f. on `[points[k], points[k+1])`.
    pub values: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Precondition("empty sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Precondition("sample contains NaN".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.len() as f64;
        let mut points: Vec<f64> = Vec::new();
        let mut values = Vec::new();
        for (i, &x) in sorted.iter().enumerate() {
            if points.last() == Some(&x) {
                *values.last_mut().expect("paired with points") = (i + 1) as f64 / total;
            } else {
                points.push(x);
                values.push((i + 1) as f64 / total);
            }
        }
        Ok(Self { points, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// `lambda,cdf` rows, one per breakpoint.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,cdf\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            let _ = writeln!(out, "{p},{v}");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub method: String,
    pub qs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Linear interpolation between order statistics at position `(N−1)q`.
pub fn quantiles(samples: &[f64], qs: &[f64]) -> Result<Quantiles> {
    if samples.is_empty() {
        return Err(Error::Precondition("empty sample".into()));
    }
    if let Some(q) = qs.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::Precondition(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = sorted.len() - 1;
    let values = qs
        .iter()
        .map(|&q| {
            let h = last as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(last);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect();
    Ok(Quantiles { method: QUANTILE_METHOD.to_string(), qs: qs.to_vec(), values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanujanEstimate {
    pub successes: usize,
    pub trials: usize,
    pub fraction: f64,
    /// Wilson score interval at 95%.
    pub lower: f64,
    pub upper: f64,
}

impl RamanujanEstimate {
    pub fn overlaps(&self, other: &RamanujanEstimate) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

pub fn wilson_interval(successes: usize, trials: usize) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Precondition("no trials".into()));
    }
    if successes > trials {
        return Err(Error::Precondition("more successes than trials".into()));
    }
    let nt = trials as f64;
    let p = successes as f64 / nt;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nt;
    let center = (p + z2 / (2.0 * nt)) / denom;
    let half = Z95 * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    let lower = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let upper = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((lower, upper))
}

pub fn ramanujan_probability(batch: &TrialBatch) -> Result<RamanujanEstimate> {
    let trials = batch.records.len();
    let successes = batch.records.iter().filter(|r| r.ramanujan).count();
    let (lower, upper) = wilson_interval(successes, trials)?;
    Ok(RamanujanEstimate { successes, trials, fraction: successes as f64 / trials as f64, lower, upper })
}

/// `sup_x |F₁(x) − F₂(x)|`, attained at a breakpoint of one of the steps.
pub fn ks_distance(a: &Ecdf, b: &Ecdf) -> f64 {
    a.points.iter().chain(&b.points).map(|&x| (a.eval(x) - b.eval(x)).abs()).fold(0.0, f64::max)
}

/// Pairwise KS distances.
pub fn ks_matrix(ecdfs: &[Ecdf]) -> Vec<Vec<f64>> {
    ecdfs.iter().map(|a| ecdfs.iter().map(|b| ks_distance(a, b)).collect()).collect()
}

pub fn ks_matrix_csv(labels: &[String], matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("label");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(matrix) {
        out.push_str(l);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema_version: u32,
    checksum: String,
    batch: TrialBatch,
}

fn checksum(batch: &TrialBatch) -> Result<String> {
    let body = serde_json::to_string(batch)?;
    Ok(hex::encode(Sha256::digest(body.as_bytes())))
}

pub fn batch_checksum(batch: &TrialBatch) -> Result<String> {
    checksum(batch)
}

/// Writes the batch with its schema version and SHA-256 checksum. The file
/// appears only once fully written.
pub fn persist(batch: &TrialBatch, path: &Path) -> Result<()> {
    let envelope = Envelope { schema_version: SCHEMA_VERSION, checksum: checksum(batch)?, batch: batch.clone() };
    let text = serde_json::to_string_pretty(&envelope)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TrialBatch> {
    let corrupt = |reason: String| Error::Corrupt { path: path.to_path_buf(), reason };
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("missing schema_version".into()))?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersion { found, expected: SCHEMA_VERSION });
    }
    let envelope: Envelope = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    let actual = checksum(&envelope.batch)?;
    if actual != envelope.checksum {
        return Err(corrupt(format!("checksum {actual} does not match {}", envelope.checksum)));
    }
    let b = &envelope.batch;
    if b.records.len() != b.trial_count || b.samples.len() != b.trial_count {
        return Err(corrupt("sample count differs from trial count".into()));
    }
    Ok(envelope.batch)
}

/// Box-plot rows `n,q25,median,q75,min,max` for a family of batches.
pub fn box_csv(batches: &[TrialBatch]) -> Result<String> {
    let mut out = String::from("n,q25,median,q75,min,max\n");
    for b in batches {
        let q = b.quantiles(&[0.25, 0.5, 0.75, 0.0, 1.0])?;
        let v = &q.values;
        let _ = writeln!(out, "{},{},{},{},{},{}", b.n, v[0], v[1], v[2], v[3], v[4]);
    }
    Ok(out)
}

/// Gnuplot script drawing interquartile boxes per covering number with the
/// Ramanujan threshold as a dashed line.
pub fn box_gnuplot(csv_name: &str, threshold: f64, output: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{output}'\n\
         set xlabel 'covering number n'\n\
         set ylabel 'largest nontrivial |eigenvalue|'\n\
         set style fill empty\n\
         set boxwidth 0.4 relative\n\
         set key off\n\
         threshold = {threshold}\n\
         plot '{csv_name}' using 0:2:5:6:3:xticlabels(1) with candlesticks whiskerbars lw 1.5, \\\n\
         \x20    '' using 0:4:4:4:4 with candlesticks lt -1 lw 2, \\\n\
         \x20    threshold with lines dashtype 2 lc rgb 'black'\n"
    )
}

/// Gnuplot script overlaying empirical c.d.f. step plots.
pub fn ecdf_gnuplot(series: &[(String, String)], threshold: f64, output: &str) -> String {
    let mut script = format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{output}'\n\
         set xlabel 'largest nontrivial |eigenvalue|'\n\
         set ylabel 'empirical c.d.f.'\n\
         set key bottom right\n\
         set yrange [0:1]\n\
         set arrow from {threshold},0 to {threshold},1 nohead dashtype 2\n\
         plot "
    );
    let plots: Vec<String> =
        series.iter().map(|(label, file)| format!("'{file}' using 1:2 skip 1 with steps title '{label}'")).collect();
    script.push_str(&plots.join(", \\\n     "));
    script.push('\n');
    script
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::catalog;

    fn batch_from(samples: &[f64], ramanujan: &[bool]) -> TrialBatch {
        let records: Vec<TrialRecord> = samples
            .iter()
            .zip(ramanujan)
            .enumerate()
            .map(|(t, (&x, &r))| TrialRecord {
                trial: t,
                seed: t as u64,
                lambda_new: x,
                lambda_1: 3.0,
                ramanujan: r,
                method: Method::Dense,
                residual: 0.0,
                retried: false,
            })
            .collect();
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        TrialBatch {
            base: "test".into(),
            m: 10,
            d: 3,
            n: 1,
            trial_count: samples.len(),
            master_seed: 0,
            solver: SolverConfig::default(),
            samples: sorted,
            records,
            timing: WallTime::default(),
        }
    }

    #[test]
    fn constant_samples() {
        let e = Ecdf::new(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.points, vec![2.0]);
        assert_eq!(e.eval(1.999), 0.0);
        assert_eq!(e.eval(2.0), 1.0);
        let q = quantiles(&[2.0, 2.0, 2.0], &[0.0, 0.3, 1.0]).unwrap();
        assert_eq!(q.values, vec![2.0, 2.0, 2.0]);
        assert_eq!(q.method, QUANTILE_METHOD);
    }

    #[test]
    fn quantile_interpolation() {
        let q = quantiles(&[3.0, 1.0, 2.0], &[0.5, 0.25, 0.75]).unwrap();
        assert_eq!(q.values, vec![2.0, 1.5, 2.5]);
        assert!(quantiles(&[], &[0.5]).is_err());
        assert!(quantiles(&[1.0], &[1.5]).is_err());
    }

    #[test]
    fn ks_examples() {
        let a = Ecdf::new(&[1.0, 2.0, 3.0]).unwrap();
        let b = Ecdf::new(&[1.0, 2.0, 3.0]).unwrap();
        let c = Ecdf::new(&[5.0, 6.0]).unwrap();
        assert_eq!(ks_distance(&a, &b), 0.0);
        assert_eq!(ks_distance(&a, &c), 1.0);
        let d = Ecdf::new(&[1.5, 2.5, 3.5]).unwrap();
        assert!((ks_distance(&a, &d) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn wilson_boundaries() {
        let (lo, hi) = wilson_interval(10, 10).unwrap();
        assert_eq!(hi, 1.0);
        assert!(lo > 0.6 && lo < 0.75);
        let (lo, _) = wilson_interval(0, 10).unwrap();
        assert_eq!(lo, 0.0);
        // p = 0.5, n = 100: 0.5 ± 0.0961
        let (lo, hi) = wilson_interval(50, 100).unwrap();
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
        let b = batch_from(&[2.0, 2.1], &[true, true]);
        let est = ramanujan_probability(&b).unwrap();
        assert_eq!((est.fraction, est.upper), (1.0, 1.0));
    }

    #[test]
    fn base_graph_batch() {
        let g = catalog("petersen").unwrap();
        let b = run_trials(&g, "petersen", 1, 10, 5, 2).unwrap();
        assert_eq!(b.samples.len(), 10);
        for s in &b.samples {
            assert!((s - 2.0).abs() < 1e-9);
        }
        assert!(run_trials(&g, "petersen", 1, 0, 5, 2).is_err());
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let g = catalog("k4").unwrap();
        let a = run_trials(&g, "k4", 30, 12, 77, 1).unwrap();
        let b = run_trials(&g, "k4", 30, 12, 77, 4).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn persist_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let g = catalog("k4").unwrap();
        let b = run_trials(&g, "k4", 10, 5, 1, 1).unwrap();
        let path = dir.path().join("batch.json");
        persist(&b, &path).unwrap();
        assert_eq!(load(&path).unwrap(), b);

        let text = fs::read_to_string(&path).unwrap();
        let cut = dir.path().join("cut.json");
        fs::write(&cut, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load(&cut), Err(Error::Corrupt { .. })));

        let tampered = dir.path().join("tampered.json");
        fs::write(&tampered, text.replacen("\"master_seed\": 1", "\"master_seed\": 2", 1)).unwrap();
        assert!(matches!(load(&tampered), Err(Error::Corrupt { .. })));

        let old = dir.path().join("old.json");
        fs::write(&old, text.replacen("\"schema_version\": 1", "\"schema_version\": 0", 1)).unwrap();
        assert!(matches!(load(&old), Err(Error::SchemaVersion { found: 0, .. })));

        let other = run_trials(&g, "k4", 10, 5, 2, 1).unwrap();
        assert_ne!(batch_checksum(&b).unwrap(), batch_checksum(&other).unwrap());
    }

    #[test]
    fn csv_shapes() {
        let b = batch_from(&[2.5, 2.9], &[true, false]);
        assert_eq!(b.to_csv(), "trial,seed,lambda_new,ramanujan\n0,0,2.5,true\n1,1,2.9,false\n");
        let csv = box_csv(std::slice::from_ref(&b)).unwrap();
        assert!(csv.starts_with("n,q25,median,q75,min,max\n1,"));
        assert!(csv.trim_end().ends_with(",2.5,2.9"));
        let m = ks_matrix(&[b.ecdf().unwrap(), b.ecdf().unwrap()]);
        assert_eq!(m, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let script = ecdf_gnuplot(&[("a".into(), "a.csv".into())], 2.8, "out.png");
        assert!(script.contains("'a.csv'"));
    }
}
