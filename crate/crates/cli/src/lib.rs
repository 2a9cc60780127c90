//! Command implementations behind the `lift-spectra` binary.
//!
//! Every command writes its results plus a `manifest.json` into the output
//! directory. Replaying a manifest re-runs the recorded command; all CSV and
//! summary outputs are reproduced byte for byte at any thread count.

pub mod args;
pub mod error;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use lift_spectra::graphs::CatalogGraph;
use lift_spectra::mc::{self, BatchSummary, TrialBatch};
use lift_spectra::rng::mix_seed;
use lift_spectra::spectra::{ramanujan_threshold, LambdaExport};
use lift_spectra::verify::{self, InequalityReport, SuiteSize};
use lift_spectra::{
    base_spectrum, catalog, dense_lift_spectrum, lambda_new_with, lambda_of, parse_edge_list, random_lift, BaseGraph,
    SolverConfig,
};

pub use args::{Cli, Command, Common, Format, RunConfig, SuiteKind};
pub use error::{CliError, Result};

/// Covering numbers of the concentration figure.
pub const FIG1_COVERS: [usize; 3] = [50, 100, 200];

/// Base graphs and covering numbers of the alignment figure (`mn = 2000`).
pub const FIG2_RUNS: [(&str, usize); 3] = [("k4", 500), ("petersen", 200), ("dodecahedral", 100)];

/// Result of a command that completed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Inequality checks that found a counterexample.
    pub violations: usize,
}

/// Writes files into one directory, refusing names that would leave it.
struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        let plain = Path::new(name).file_name().and_then(|f| f.to_str()) == Some(name);
        if !plain {
            return Err(CliError::Usage(format!("refusing to write {name:?} outside the output directory")));
        }
        Ok(self.dir.join(name))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name)?;
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(lift_spectra::Error::from)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn batch(&mut self, name: &str, batch: &TrialBatch) -> Result<()> {
        let path = self.path(name)?;
        mc::persist(batch, &path)?;
        self.files.push(path);
        Ok(())
    }
}

/// Resolves `--base`: an existing file is read as an edge list, anything
/// else is looked up in the catalog.
pub fn resolve_base(spec: &str) -> Result<(String, BaseGraph)> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph").to_string();
        return Ok((name, parse_edge_list(&text)?));
    }
    let entry = CatalogGraph::parse(spec)?;
    Ok((entry.name(), entry.build()?))
}

fn solver(common: &Common) -> SolverConfig {
    SolverConfig { dense_cap: common.dense_cap, lanczos_k: common.lanczos_k, lanczos_tol: common.lanczos_tol }
}

fn check_common(common: &Common) -> Result<()> {
    if common.lanczos_k < 1 {
        return Err(CliError::Usage("--lanczos-k must be at least 1".into()));
    }
    if common.lanczos_tol.is_nan() || common.lanczos_tol <= 0.0 {
        return Err(CliError::Usage("--lanczos-tol must be positive".into()));
    }
    if let Some(q) = common.quantiles.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(CliError::Usage(format!("quantile level {q} outside [0, 1]")));
    }
    if common.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Replay { manifest } => replay(&manifest, cli.common.jobs, &cli.common.out),
        command => {
            let mut common = cli.common;
            common.seed = Some(common.resolved_seed());
            execute(RunConfig { tool_version: env!("CARGO_PKG_VERSION").to_string(), command, common })
        }
    }
}

/// Re-runs a manifest into `out`, optionally with a different thread count.
pub fn replay(manifest: &Path, jobs: Option<usize>, out: &Path) -> Result<Outcome> {
    let bad = |reason: String| CliError::Manifest { path: manifest.to_path_buf(), reason };
    let text = fs::read_to_string(manifest).map_err(|source| CliError::Io { path: manifest.to_path_buf(), source })?;
    let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if matches!(config.command, Command::Replay { .. }) {
        return Err(bad("a manifest cannot record a replay".into()));
    }
    config.common.out = out.to_path_buf();
    if jobs.is_some() {
        config.common.jobs = jobs;
    }
    execute(config)
}

/// Runs a fully resolved configuration and writes its manifest.
pub fn execute(config: RunConfig) -> Result<Outcome> {
    check_common(&config.common)?;
    let mut out = Output::new(&config.common.out)?;
    let common = &config.common;
    let violations = match &config.command {
        Command::Catalog => cmd_catalog(&mut out, common)?,
        Command::Spectrum { base, n } => cmd_spectrum(&mut out, common, base, *n)?,
        Command::Lift { base, n } => cmd_lift(&mut out, common, base, *n)?,
        Command::Ecdf { base, n, trials } => cmd_ecdf(&mut out, common, base, *n, *trials)?,
        Command::Verify { base, n, suite } => cmd_verify(&mut out, common, base, *n, *suite)?,
        Command::Cheeger { base } => cmd_cheeger(&mut out, base)?,
        Command::ReproduceFig1 { trials } => cmd_fig1(&mut out, common, *trials)?,
        Command::ReproduceFig2 { trials } => cmd_fig2(&mut out, common, *trials)?,
        Command::Replay { .. } => return Err(CliError::Usage("replay cannot be nested".into())),
    };
    // Thread count does not affect results, so the manifest leaves it out.
    let mut recorded = config.clone();
    recorded.common.jobs = None;
    out.json("manifest.json", &recorded)?;
    Ok(Outcome { files: out.files, violations })
}

#[derive(Serialize)]
struct CatalogEntry {
    name: String,
    m: usize,
    d: usize,
    lambda: Option<f64>,
    bipartite: bool,
    simple: bool,
    loops: usize,
    ramanujan: Option<bool>,
}

fn cmd_catalog(out: &mut Output, common: &Common) -> Result<usize> {
    let names = ["k4", "petersen", "dodecahedral", "complete(5)", "cycle(6)", "bouquet(2)"];
    let mut entries = Vec::new();
    for spec in names {
        let (name, g) = resolve_base(spec)?;
        let report = g.validate();
        let lambda = lambda_of(&g).ok();
        entries.push(CatalogEntry {
            name,
            m: g.vertex_count(),
            d: g.degree(),
            lambda,
            bipartite: report.bipartite,
            simple: report.simple,
            loops: report.loops,
            ramanujan: lambda.map(|l| l <= ramanujan_threshold(g.degree())),
        });
    }
    match common.format {
        Format::Json => out.json("catalog.json", &entries)?,
        Format::Csv => {
            let mut csv = String::from("name,m,d,lambda,bipartite,simple,loops\n");
            for e in &entries {
                let lambda = e.lambda.map(|l| l.to_string()).unwrap_or_default();
                csv.push_str(&format!(
                    "\"{}\",{},{},{},{},{},{}\n",
                    e.name, e.m, e.d, lambda, e.bipartite, e.simple, e.loops
                ));
            }
            out.write("catalog.csv", &csv)?;
        }
    }
    for e in &entries {
        let lambda = e.lambda.map_or("-".to_string(), |l| format!("{l:.6}"));
        println!("{:<14} m={:<3} d={:<2} lambda={lambda}", e.name, e.m, e.d);
    }
    Ok(0)
}

#[derive(Serialize)]
struct SpectrumOutput {
    base: String,
    n: usize,
    seed: u64,
    #[serde(flatten)]
    lambda: LambdaExport,
    eigenvalues: Option<Vec<f64>>,
}

fn cmd_spectrum(out: &mut Output, common: &Common, base: &str, n: usize) -> Result<usize> {
    let (name, g) = resolve_base(base)?;
    let seed = common.resolved_seed();
    let h = random_lift(&g, n, seed)?;
    let report = lambda_new_with(&h, &solver(common))?;
    let spectrum = if n == 1 {
        Some(base_spectrum(&g)?)
    } else if h.order() <= common.dense_cap {
        Some(dense_lift_spectrum(&h)?)
    } else {
        None
    };
    let result = SpectrumOutput {
        base: name,
        n,
        seed,
        lambda: report.export(g.degree()),
        eigenvalues: spectrum.as_ref().map(|s| s.values.clone()),
    };
    match (common.format, &spectrum) {
        (Format::Csv, Some(s)) => {
            out.write("spectrum.csv", &s.to_csv())?;
            out.json("lambda.json", &SpectrumOutput { eigenvalues: None, ..result })?;
        }
        _ => out.json("spectrum.json", &result)?,
    }
    println!("lambda_new = {}", report.lambda_new_max_abs);
    Ok(0)
}

fn cmd_lift(out: &mut Output, common: &Common, base: &str, n: usize) -> Result<usize> {
    let (_, g) = resolve_base(base)?;
    let h = random_lift(&g, n, common.resolved_seed())?;
    let mut text = h.to_json()?;
    text.push('\n');
    out.write("lift.json", &text)?;
    println!("lift of order {} with {} edges", h.order(), h.edge_count());
    Ok(0)
}

fn run_batch(common: &Common, name: &str, g: &BaseGraph, n: usize, trials: usize, seed: u64) -> Result<TrialBatch> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(mc::run_trials_with(g, name, n, trials, seed, common.resolved_jobs(), &solver(common))?)
}

#[derive(Serialize)]
struct BatchReport {
    #[serde(flatten)]
    summary: BatchSummary,
    requested_quantiles: mc::Quantiles,
}

fn batch_report(common: &Common, batch: &TrialBatch) -> Result<BatchReport> {
    Ok(BatchReport { summary: batch.summary()?, requested_quantiles: batch.quantiles(&common.quantiles)? })
}

fn print_batch(batch: &TrialBatch) -> Result<()> {
    let s = batch.summary()?;
    let q = &s.quantiles.values;
    println!(
        "{} n={}: median {:.4}, IQR [{:.4}, {:.4}], Ramanujan {:.3} [{:.3}, {:.3}]",
        s.base, s.n, q[2], q[1], q[3], s.ramanujan.fraction, s.ramanujan.lower, s.ramanujan.upper
    );
    Ok(())
}

fn cmd_ecdf(out: &mut Output, common: &Common, base: &str, n: usize, trials: usize) -> Result<usize> {
    let (name, g) = resolve_base(base)?;
    let batch = run_batch(common, &name, &g, n, trials, common.resolved_seed())?;
    match common.format {
        Format::Csv => out.write("samples.csv", &batch.to_csv())?,
        Format::Json => out.json("samples.json", &batch.records)?,
    }
    out.write("ecdf.csv", &batch.ecdf()?.to_csv())?;
    out.json("summary.json", &batch_report(common, &batch)?)?;
    out.batch("batch.json", &batch)?;
    print_batch(&batch)?;
    Ok(0)
}

fn cmd_verify(out: &mut Output, common: &Common, base: &str, n: usize, suite: SuiteKind) -> Result<usize> {
    let (_, g) = resolve_base(base)?;
    let size = match suite {
        SuiteKind::Quick => SuiteSize::quick(),
        SuiteKind::Full => SuiteSize::full(),
    };
    let reports = verify::run_suite(&g, n, &size, common.resolved_seed())?;
    out.write("reports.jsonl", &verify::reports_to_jsonl(&reports)?)?;
    print_reports(&reports);
    Ok(reports.iter().filter(|r| !r.holds()).count())
}

fn print_reports(reports: &[InequalityReport]) {
    for r in reports {
        println!(
            "{:<9} {:<20} worst margin {:>14.6e} over {} samples",
            format!("{:?}", r.status()).to_lowercase(),
            r.name,
            r.margin,
            r.samples_examined
        );
    }
}

fn cmd_cheeger(out: &mut Output, base: &str) -> Result<usize> {
    let (_, g) = resolve_base(base)?;
    let sandwich = verify::check_cheeger_sandwich(&g)?;
    out.json("cheeger.json", &sandwich)?;
    println!(
        "h = {} (|boundary| = {}, smaller side {}), bipartite degenerate: {}",
        sandwich.h.value, sandwich.h.boundary, sandwich.h.smaller_side, sandwich.bipartite_degenerate
    );
    print_reports(&sandwich.reports());
    Ok(usize::from(!sandwich.holds()))
}

fn cmd_fig1(out: &mut Output, common: &Common, trials: usize) -> Result<usize> {
    let g = catalog("petersen")?;
    let seed = common.resolved_seed();
    let mut batches = Vec::new();
    for (k, &n) in FIG1_COVERS.iter().enumerate() {
        let batch = run_batch(common, "petersen", &g, n, trials, mix_seed(seed, k as u64))?;
        out.write(&format!("samples_petersen_n{n}.csv"), &batch.to_csv())?;
        out.batch(&format!("batch_petersen_n{n}.json"), &batch)?;
        print_batch(&batch)?;
        batches.push(batch);
    }
    out.write("fig1_boxes.csv", &mc::box_csv(&batches)?)?;
    out.write("fig1.gp", &mc::box_gnuplot("fig1_boxes.csv", ramanujan_threshold(3), "fig1.png"))?;
    let reports = batches.iter().map(|b| batch_report(common, b)).collect::<Result<Vec<_>>>()?;
    out.json("summary.json", &reports)?;
    Ok(0)
}

#[derive(Serialize)]
struct Fig2Summary {
    batches: Vec<BatchReport>,
    labels: Vec<String>,
    ks: Vec<Vec<f64>>,
}

fn cmd_fig2(out: &mut Output, common: &Common, trials: usize) -> Result<usize> {
    let seed = common.resolved_seed();
    let mut series = Vec::new();
    let mut labels = Vec::new();
    let mut ecdfs = Vec::new();
    let mut reports = Vec::new();
    for (k, &(name, n)) in FIG2_RUNS.iter().enumerate() {
        let g = catalog(name)?;
        let batch = run_batch(common, name, &g, n, trials, mix_seed(seed, k as u64))?;
        let label = format!("{name}_n{n}");
        let ecdf = batch.ecdf()?;
        let file = format!("ecdf_{label}.csv");
        out.write(&file, &ecdf.to_csv())?;
        out.write(&format!("samples_{label}.csv"), &batch.to_csv())?;
        out.batch(&format!("batch_{label}.json"), &batch)?;
        print_batch(&batch)?;
        series.push((label.clone(), file));
        labels.push(label);
        ecdfs.push(ecdf);
        reports.push(batch_report(common, &batch)?);
    }
    let ks = mc::ks_matrix(&ecdfs);
    out.write("ks_matrix.csv", &mc::ks_matrix_csv(&labels, &ks))?;
    out.write("fig2.gp", &mc::ecdf_gnuplot(&series, ramanujan_threshold(3), "fig2.png"))?;
    for (i, row) in ks.iter().enumerate() {
        for (j, v) in row.iter().enumerate().skip(i + 1) {
            println!("KS({}, {}) = {v:.4}", labels[i], labels[j]);
        }
    }
    out.json("summary.json", &Fig2Summary { batches: reports, labels, ks })?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use clap::Parser;

    use super::*;

    #[test]
    fn output_rejects_names_outside_the_directory() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Output::new(&dir.path().join("o")).unwrap();
        for name in ["../x.csv", "a/b.csv", "/tmp/x.csv", "", ".."] {
            let err = out.write(name, "x").unwrap_err();
            assert_eq!(err.exit_code(), 2, "{name}");
        }
        out.write("ok.csv", "x").unwrap();
        assert_eq!(out.files, vec![dir.path().join("o").join("ok.csv")]);
    }

    #[test]
    fn base_resolution_prefers_files() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("square.txt");
        fs::write(&file, "m=4 d=2\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        let (name, g) = resolve_base(file.to_str().unwrap()).unwrap();
        assert_eq!((name.as_str(), g.vertex_count()), ("square", 4));
        let (name, g) = resolve_base("Cycle:6").unwrap();
        assert_eq!((name.as_str(), g.vertex_count()), ("cycle(6)", 6));
        assert_eq!(resolve_base("nonsense").unwrap_err().exit_code(), 3);
    }

    #[test]
    fn invalid_solver_settings_are_usage_errors() {
        let base = Cli::try_parse_from(["lift-spectra", "catalog"]).unwrap().common;
        assert!(check_common(&base).is_ok());
        let cases = [
            Common { lanczos_k: 0, ..base.clone() },
            Common { lanczos_tol: 0.0, ..base.clone() },
            Common { lanczos_tol: f64::NAN, ..base.clone() },
            Common { quantiles: vec![0.5, 1.5], ..base.clone() },
            Common { jobs: Some(0), ..base.clone() },
        ];
        for c in cases {
            assert_eq!(check_common(&c).unwrap_err().exit_code(), 2);
        }
    }

    #[test]
    fn manifests_replay_to_identical_csv() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        let cli = Cli::try_parse_from([
            "lift-spectra",
            "--seed",
            "5",
            "--jobs",
            "1",
            "--format",
            "csv",
            "--out",
            a.to_str().unwrap(),
            "ecdf",
            "--base",
            "petersen",
            "--n",
            "6",
            "--trials",
            "12",
        ])
        .unwrap();
        run(cli).unwrap();
        let manifest: RunConfig = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.common.jobs, None);
        replay(&a.join("manifest.json"), Some(2), &b).unwrap();
        for name in ["samples.csv", "ecdf.csv", "summary.json"] {
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
        }
    }
}
