//! Config-driven studies, deterministic artifacts and run manifests.
//!
//! Every run writes its data files plus `manifest.json`; [`rerun`] replays a
//! manifest and compares digests of the data files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::{
    binomial, default_split, extract_two_color, sample_syk, EnsembleSpec, Model, SykInstance,
};
use crate::error::{Error, Result};
use crate::gaussian::{explicit_witness, gaussian_maximize, GaussianOptions};
use crate::ho::{sweep_system, theta_grid, HoSystem, HO_QUBIT_CAP};
use crate::lovasz::{
    full_degree_graph, scaling_points, sparsified_thetas, sqrt_scaling_fit, ScalingFit, ScalingPoint, SparsifiedTheta,
    ThetaOptions,
};
use crate::spectral::{
    auto_method, lambda_max, mean_std, universality_scan, CellSummary, SolverOptions, LANCZOS_QUBIT_CAP,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILED_ROWS_FILE: &str = "failed_rows.csv";
/// Largest commutation graph the scaling study will attempt.
pub const LOVASZ_VERTEX_CAP: usize = 1001;

fn default_universality_n() -> Vec<usize> {
    vec![4, 5, 6, 7]
}
fn default_universality_p() -> Vec<f64> {
    vec![0.1, 0.3, 1.0]
}
fn default_q() -> usize {
    4
}
fn default_twenty() -> usize {
    20
}
fn default_ssyk() -> Model {
    Model::Ssyk
}
fn default_gap_n() -> Vec<usize> {
    vec![5, 6]
}
fn default_gap_p() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_ten() -> usize {
    10
}
fn default_restarts() -> usize {
    8
}
fn default_theta_max() -> f64 {
    1.0
}
fn default_theta_step() -> f64 {
    0.01
}
fn default_witness_n() -> Vec<usize> {
    vec![6, 8, 10]
}
fn default_witness_p() -> Vec<f64> {
    vec![0.3, 1.0]
}
fn default_witness_trials() -> usize {
    200
}
fn default_lovasz_n() -> usize {
    5
}
fn default_lovasz_p() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}
fn default_lovasz_seed() -> u64 {
    9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalityConfig {
    #[serde(default = "default_ssyk")]
    pub model: Model,
    #[serde(default = "default_universality_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_universality_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_twenty")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    #[serde(default = "default_gap_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_gap_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_ten")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_theta_step")]
    pub theta_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    #[serde(default = "default_witness_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_witness_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_witness_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Zero every coupling before building the witness.
    #[serde(default)]
    pub zero_couplings: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LovaszScalingConfig {
    #[serde(default = "default_lovasz_n")]
    pub n: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_lovasz_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_ten")]
    pub trials: usize,
    #[serde(default = "default_lovasz_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Universality(UniversalityConfig),
    Gap(GapConfig),
    Witness(WitnessConfig),
    LovaszScaling(LovaszScalingConfig),
}

fn check_grid_p(p: &[f64], problems: &mut Vec<String>) {
    if p.is_empty() {
        problems.push("p grid is empty".into());
    }
    for &v in p {
        if !(v > 0.0 && v <= 1.0) {
            problems.push(format!("p = {v} outside (0, 1]"));
        }
    }
}

fn check_trials(trials: usize, problems: &mut Vec<String>) {
    if trials == 0 {
        problems.push("trials must be positive".into());
    }
}

fn check_tol(tol: Option<f64>, problems: &mut Vec<String>) {
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            problems.push(format!("tol = {t} must be positive and finite"));
        }
    }
}

/// Qubits of the extended two-color register used by the gap study at size `n`.
fn gap_register_qubits(n: usize) -> usize {
    let n1 = default_split(n);
    (n1 + 2 * (2 * n - n1)) / 2
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Universality(_) => "universality",
            Self::Gap(_) => "gap",
            Self::Witness(_) => "witness",
            Self::LovaszScaling(_) => "lovasz-scaling",
        }
    }

    pub fn output_dir(&self) -> Option<&Path> {
        match self {
            Self::Universality(c) => c.output_dir.as_deref(),
            Self::Gap(c) => c.output_dir.as_deref(),
            Self::Witness(c) => c.output_dir.as_deref(),
            Self::LovaszScaling(c) => c.output_dir.as_deref(),
        }
    }

    /// Every problem with the config, each with the offending value.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        match self {
            Self::Universality(c) => {
                let grid = c.ensemble_spec();
                problems.extend(grid.validate());
                for &n in &c.n {
                    if n > LANCZOS_QUBIT_CAP {
                        problems.push(format!("n = {n} exceeds the {LANCZOS_QUBIT_CAP}-qubit solver cap"));
                    }
                }
                check_tol(c.tol, &mut problems);
                if c.max_iters == Some(0) {
                    problems.push("max_iters must be positive".into());
                }
            }
            Self::Gap(c) => {
                if c.n.is_empty() {
                    problems.push("n grid is empty".into());
                }
                for &n in &c.n {
                    if n < 4 {
                        problems.push(format!("n = {n} too small for the two-color split (need n >= 4)"));
                    } else if gap_register_qubits(n) > HO_QUBIT_CAP {
                        problems.push(format!(
                            "n = {n} needs a {}-qubit extended register, above the cap {HO_QUBIT_CAP}",
                            gap_register_qubits(n)
                        ));
                    }
                }
                check_grid_p(&c.p, &mut problems);
                check_trials(c.trials, &mut problems);
                if c.restarts == 0 {
                    problems.push("restarts must be positive".into());
                }
                if let Err(e) = theta_grid(c.theta_max, c.theta_step) {
                    problems.push(e.to_string());
                }
                check_tol(c.tol, &mut problems);
            }
            Self::Witness(c) => {
                if c.n.is_empty() {
                    problems.push("n grid is empty".into());
                }
                for &n in &c.n {
                    if n < 2 || n % 2 != 0 {
                        problems.push(format!("witness needs even n >= 2, got n = {n}"));
                    }
                    if 2 * n > crate::algebra::MAX_MAJORANAS {
                        problems.push(format!("n = {n} exceeds the {}-Majorana limit", crate::algebra::MAX_MAJORANAS));
                    }
                }
                check_grid_p(&c.p, &mut problems);
                check_trials(c.trials, &mut problems);
            }
            Self::LovaszScaling(c) => {
                if c.q == 0 || c.q % 2 != 0 || c.q > 2 * c.n {
                    problems.push(format!("q = {} must be even, positive and at most 2n = {}", c.q, 2 * c.n));
                } else {
                    let v = binomial(2 * c.n, c.q);
                    if v > LOVASZ_VERTEX_CAP as f64 {
                        problems.push(format!("graph has {v} vertices, above the cap {LOVASZ_VERTEX_CAP}"));
                    }
                }
                check_grid_p(&c.p, &mut problems);
                check_trials(c.trials, &mut problems);
                check_tol(c.tol, &mut problems);
                if c.max_iters == Some(0) {
                    problems.push("max_iters must be positive".into());
                }
            }
        }
        problems
    }

    /// Seeds used by the run, one per trial.
    pub fn seeds(&self) -> Vec<u64> {
        let (seed, trials) = match self {
            Self::Universality(c) => (c.seed, c.trials),
            Self::Gap(c) => (c.seed, c.trials),
            Self::Witness(c) => (c.seed, c.trials),
            Self::LovaszScaling(c) => (c.seed, c.trials),
        };
        (0..trials).map(|t| seed.wrapping_add(t as u64)).collect()
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

impl UniversalityConfig {
    pub fn ensemble_spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            model: self.model,
            n: self.n.clone(),
            q: self.q,
            p: self.p.clone(),
            trials: self.trials,
            seed: self.seed,
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub experiment: String,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    /// Trial seeds in row order.
    pub seeds: Vec<u64>,
    pub files: Vec<FileDigest>,
    pub failed_rows: usize,
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// What a finished run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    /// 0 on full success, 3 when some rows failed, 4 when every row failed.
    pub fn exit_code(&self) -> i32 {
        if self.manifest.failed_rows == 0 {
            0
        } else if self.manifest.failed_rows >= self.manifest.seeds.len().max(1) * self.rows_per_seed() {
            4
        } else {
            3
        }
    }

    fn rows_per_seed(&self) -> usize {
        match &self.manifest.config {
            ExperimentConfig::Universality(c) => c.n.len() * c.p.len(),
            ExperimentConfig::Gap(c) => c.n.len() * c.p.len(),
            ExperimentConfig::Witness(c) => c.n.len() * c.p.len(),
            ExperimentConfig::LovaszScaling(c) => c.p.len(),
        }
    }
}

/// Process exit code for an error that aborted a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NotConverged { .. } | Error::Linalg(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Rayon pool sized by `SYKLAB_THREADS`, or the rayon default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SYKLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(vec![format!("SYKLAB_THREADS = {v:?} is not a positive integer")]))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(vec![e.to_string()]))
}

/// Collects written files and stage timings for the manifest.
struct Artifacts {
    dir: PathBuf,
    files: Vec<FileDigest>,
    timings: Vec<StageTiming>,
    failed_rows: usize,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            timings: Vec::new(),
            failed_rows: 0,
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(FileDigest {
            name: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Validates `cfg`, runs it inside the worker pool, writes data files and the manifest into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let pool = worker_pool()?;
    let mut art = Artifacts::new(out)?;
    info!("running {} into {}", cfg.name(), out.display());
    pool.install(|| match cfg {
        ExperimentConfig::Universality(c) => run_universality(c, &mut art),
        ExperimentConfig::Gap(c) => run_gap(c, &mut art),
        ExperimentConfig::Witness(c) => run_witness(c, &mut art),
        ExperimentConfig::LovaszScaling(c) => run_lovasz_scaling(c, &mut art, &default_theta_source),
    })?;
    finish(cfg, art)
}

/// [`run_experiment`] for the scaling study with an injected theta source.
pub fn run_lovasz_scaling_with(cfg: &LovaszScalingConfig, out: &Path, source: &ThetaSource) -> Result<RunOutcome> {
    let full = ExperimentConfig::LovaszScaling(cfg.clone());
    let problems = full.validate();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut art = Artifacts::new(out)?;
    run_lovasz_scaling(cfg, &mut art, source)?;
    finish(&full, art)
}

fn finish(cfg: &ExperimentConfig, art: Artifacts) -> Result<RunOutcome> {
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.name().to_string(),
        config_sha256: cfg.hash(),
        config: cfg.clone(),
        seeds: cfg.seeds(),
        files: art.files,
        failed_rows: art.failed_rows,
        timings: art.timings,
    };
    let mut s = serde_json::to_string_pretty(&manifest)?;
    s.push('\n');
    fs::write(art.dir.join(MANIFEST_FILE), s)?;
    Ok(RunOutcome { dir: art.dir, manifest })
}

#[derive(Clone, Debug)]
pub struct RerunReport {
    pub outcome: RunOutcome,
    /// Data files whose digest differs from (or is missing in) the original manifest.
    pub mismatched: Vec<String>,
}

impl RerunReport {
    pub fn identical(&self) -> bool {
        self.mismatched.is_empty()
    }
}

/// Replays the config embedded in a manifest into `out` and compares data-file digests.
pub fn rerun(manifest_path: &Path, out: &Path) -> Result<RerunReport> {
    let original = RunManifest::load(manifest_path)?;
    if original.config.hash() != original.config_sha256 {
        return Err(Error::Config(vec![format!(
            "manifest {} config hash mismatch: recorded {}, computed {}",
            manifest_path.display(),
            original.config_sha256,
            original.config.hash()
        )]));
    }
    let outcome = run_experiment(&original.config, out)?;
    let mut mismatched: Vec<String> = original
        .files
        .iter()
        .filter(|f| !outcome.manifest.files.contains(f))
        .map(|f| f.name.clone())
        .collect();
    for f in &outcome.manifest.files {
        if !original.files.iter().any(|o| o.name == f.name) {
            mismatched.push(f.name.clone());
        }
    }
    Ok(RerunReport { outcome, mismatched })
}

#[derive(Clone, Debug, Serialize)]
struct SpreadRecord {
    n: usize,
    spread: f64,
}

#[derive(Clone, Debug, Serialize)]
struct UniversalitySummary {
    cells: Vec<CellSummary>,
    spread: Vec<SpreadRecord>,
    failed_rows: usize,
}

fn run_universality(c: &UniversalityConfig, art: &mut Artifacts) -> Result<()> {
    let mut opts = SolverOptions::default();
    if let Some(t) = c.tol {
        opts.tol = t;
    }
    if let Some(m) = c.max_iters {
        opts.max_iters = m;
    }
    let grid = c.ensemble_spec();
    let table = art.time("scan", || universality_scan(&grid, &opts))?;
    art.failed_rows = table.failed.len();
    let summary = UniversalitySummary {
        cells: table.summaries(),
        spread: table
            .relative_spread()
            .into_iter()
            .map(|(n, spread)| SpreadRecord { n, spread })
            .collect(),
        failed_rows: table.failed.len(),
    };
    art.write("table.csv", &table.to_csv())?;
    art.write_json("summary.json", &summary)?;
    art.write(FAILED_ROWS_FILE, &table.failed_csv())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub lambda_max: f64,
    pub lambda_gauss: f64,
    /// Best two-color energy `E*` on the sweep grid and its angle.
    pub ho_theta: f64,
    pub ho_energy: f64,
    /// `C3 · E* + Tr(ρ* H_T̄)`.
    pub ho_energy_on_full: f64,
    pub gauss_ratio: f64,
    pub ho_ratio: f64,
}

impl GapRow {
    fn zeros(n: usize, p: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            seed,
            lambda_max: 0.0,
            lambda_gauss: 0.0,
            ho_theta: 0.0,
            ho_energy: 0.0,
            ho_energy_on_full: 0.0,
            gauss_ratio: 0.0,
            ho_ratio: 0.0,
        }
    }
}

/// One row of the gap study on a given instance.
pub fn gap_row(inst: &SykInstance, c: &GapConfig) -> Result<GapRow> {
    let (n, p, seed) = (inst.n, inst.p, inst.seed);
    if inst.terms.is_empty() {
        return Ok(GapRow::zeros(n, p, seed));
    }
    let h = inst.hamiltonian();
    let mut sopts = SolverOptions {
        start_seed: seed,
        ..SolverOptions::default()
    };
    if let Some(t) = c.tol {
        sopts.tol = t;
    }
    let lmax = lambda_max(&h, auto_method(inst.n_qubits()), &sopts)?.lambda_max;
    let gauss = gaussian_maximize(
        inst,
        &GaussianOptions {
            restarts: c.restarts,
            seed,
            ..GaussianOptions::default()
        },
    )?;
    let split = extract_two_color(inst, default_split(n))?;
    let m = split.two_color.register.n_majoranas();
    let sys = HoSystem::new(&split.two_color, HO_QUBIT_CAP)?;
    let sweep = sweep_system(&sys, &theta_grid(c.theta_max, c.theta_step)?)?;
    let rest = split.t_bar_hamiltonian(m)?.materialize(HO_QUBIT_CAP)?;
    let rest_energy = sys.rho_theta(sweep.best_theta).trace_product(&rest).re;
    let on_full = split.c3 * sweep.best_energy + rest_energy;
    let ratio = |v: f64| if lmax > 0.0 { v / lmax } else { 0.0 };
    Ok(GapRow {
        n,
        p,
        seed,
        lambda_max: lmax,
        lambda_gauss: gauss.energy,
        ho_theta: sweep.best_theta,
        ho_energy: sweep.best_energy,
        ho_energy_on_full: on_full,
        gauss_ratio: ratio(gauss.energy),
        ho_ratio: ratio(on_full),
    })
}

#[derive(Clone, Debug, Serialize)]
struct GapCell {
    n: usize,
    p: f64,
    rows: usize,
    mean_lambda_max: f64,
    mean_lambda_gauss: f64,
    mean_ho_energy_on_full: f64,
    mean_gauss_ratio: f64,
    mean_ho_ratio: f64,
}

fn run_gap(c: &GapConfig, art: &mut Artifacts) -> Result<()> {
    let mut jobs = Vec::new();
    for &n in &c.n {
        for &p in &c.p {
            for t in 0..c.trials {
                jobs.push((n, p, c.seed.wrapping_add(t as u64)));
            }
        }
    }
    let results: Vec<((usize, f64, u64), Result<GapRow>)> = art.time("rows", || {
        jobs.par_iter()
            .map(|&(n, p, seed)| ((n, p, seed), sample_syk(n, 4, p, seed).and_then(|i| gap_row(&i, c))))
            .collect()
    });
    let mut csv = String::from(
        "n,p,seed,lambda_max,lambda_gauss,ho_theta,ho_energy,ho_energy_on_full,gauss_ratio,ho_ratio\n",
    );
    let mut failed = String::from("n,p,seed,error\n");
    let mut rows = Vec::new();
    for ((n, p, seed), r) in results {
        match r {
            Ok(r) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.p,
                    r.seed,
                    r.lambda_max,
                    r.lambda_gauss,
                    r.ho_theta,
                    r.ho_energy,
                    r.ho_energy_on_full,
                    r.gauss_ratio,
                    r.ho_ratio
                );
                rows.push(r);
            }
            Err(e) => {
                warn!("gap row n = {n}, p = {p}, seed = {seed} failed: {e}");
                art.failed_rows += 1;
                let _ = writeln!(failed, "{n},{p},{seed},\"{}\"", e.to_string().replace('"', "'"));
            }
        }
    }
    let cells: Vec<GapCell> = rows
        .chunk_by(|a, b| a.n == b.n && a.p == b.p)
        .map(|ch| {
            let mean = |f: fn(&GapRow) -> f64| ch.iter().map(f).sum::<f64>() / ch.len() as f64;
            GapCell {
                n: ch[0].n,
                p: ch[0].p,
                rows: ch.len(),
                mean_lambda_max: mean(|r| r.lambda_max),
                mean_lambda_gauss: mean(|r| r.lambda_gauss),
                mean_ho_energy_on_full: mean(|r| r.ho_energy_on_full),
                mean_gauss_ratio: mean(|r| r.gauss_ratio),
                mean_ho_ratio: mean(|r| r.ho_ratio),
            }
        })
        .collect();
    art.write("gap.csv", &csv)?;
    art.write_json("summary.json", &cells)?;
    art.write(FAILED_ROWS_FILE, &failed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCell {
    pub n: usize,
    pub p: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub cells: Vec<WitnessCell>,
    /// Per `p`: largest over smallest cell mean across `n`.
    pub trend_ratio: Vec<(f64, f64)>,
}

fn witness_energy(n: usize, p: f64, seed: u64, zero: bool) -> Result<(f64, f64)> {
    let mut inst = sample_syk(n, 4, p, seed)?;
    if zero {
        for t in &mut inst.terms {
            t.coeff = 0.0;
            t.coupling = 0.0;
        }
    }
    let w = explicit_witness(&inst)?;
    Ok((w.energy, w.scale))
}

fn run_witness(c: &WitnessConfig, art: &mut Artifacts) -> Result<()> {
    let mut jobs = Vec::new();
    for &n in &c.n {
        for &p in &c.p {
            for t in 0..c.trials {
                jobs.push((n, p, c.seed.wrapping_add(t as u64)));
            }
        }
    }
    let results: Vec<_> = art.time("witness", || {
        jobs.par_iter()
            .map(|&(n, p, seed)| ((n, p, seed), witness_energy(n, p, seed, c.zero_couplings)))
            .collect::<Vec<_>>()
    });
    let mut csv = String::from("n,p,seed,energy,scale\n");
    let mut failed = String::from("n,p,seed,error\n");
    let mut ok: Vec<(usize, f64, f64)> = Vec::new();
    for ((n, p, seed), r) in results {
        match r {
            Ok((e, s)) => {
                let _ = writeln!(csv, "{n},{p},{seed},{e},{s}");
                ok.push((n, p, e));
            }
            Err(e) => {
                art.failed_rows += 1;
                let _ = writeln!(failed, "{n},{p},{seed},\"{}\"", e.to_string().replace('"', "'"));
            }
        }
    }
    let cells: Vec<WitnessCell> = ok
        .chunk_by(|a, b| a.0 == b.0 && a.1 == b.1)
        .map(|ch| {
            let vals: Vec<f64> = ch.iter().map(|r| r.2).collect();
            let (mean, std) = mean_std(&vals);
            WitnessCell {
                n: ch[0].0,
                p: ch[0].1,
                mean,
                std,
                trials: vals.len(),
            }
        })
        .collect();
    let trend_ratio = c
        .p
        .iter()
        .map(|&p| {
            let means: Vec<f64> = cells.iter().filter(|x| x.p == p).map(|x| x.mean).collect();
            let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
            (p, if lo > 0.0 { hi / lo } else { f64::NAN })
        })
        .collect();
    art.write("witness.csv", &csv)?;
    art.write_json("summary.json", &WitnessSummary { cells, trend_ratio })?;
    art.write(FAILED_ROWS_FILE, &failed)
}

/// Produces sparsified theta rows for a scaling config.
pub type ThetaSource = dyn Fn(&LovaszScalingConfig) -> Result<Vec<SparsifiedTheta>> + Sync;

pub fn theta_options(c: &LovaszScalingConfig) -> ThetaOptions {
    let mut o = ThetaOptions::sweep();
    if let Some(t) = c.tol {
        o.tol = t;
    }
    if let Some(m) = c.max_iters {
        o.max_iters = m;
    }
    o
}

fn default_theta_source(c: &LovaszScalingConfig) -> Result<Vec<SparsifiedTheta>> {
    let g = full_degree_graph(c.n, c.q)?;
    sparsified_thetas(&g, &c.p, c.trials, c.seed, &theta_options(c))
}

pub fn fig1_csv(rows: &[SparsifiedTheta]) -> String {
    let mut s = String::from("p,trial,vertices,theta,converged\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.p, r.trial, r.vertices, r.theta, r.converged);
    }
    s
}

pub fn parse_fig1_csv(text: &str) -> Result<Vec<SparsifiedTheta>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().unwrap_or_default();
    if header.trim() != "p,trial,vertices,theta,converged" {
        return Err(Error::InvalidParameter(format!("unexpected header {header:?}")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::InvalidParameter(format!("malformed row {}: {line:?}", i + 2));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(bad());
            }
            Ok(SparsifiedTheta {
                p: f[0].parse().map_err(|_| bad())?,
                trial: f[1].parse().map_err(|_| bad())?,
                vertices: f[2].parse().map_err(|_| bad())?,
                theta: f[3].parse().map_err(|_| bad())?,
                converged: f[4].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Scaling fit over converged rows only.
pub fn fit_converged(rows: &[SparsifiedTheta]) -> Result<ScalingFit> {
    let dropped = rows.iter().filter(|r| !r.converged).count();
    if dropped > 0 {
        warn!("excluding {dropped} non-converged theta solves from the fit");
    }
    let mut kept: Vec<SparsifiedTheta> = rows.iter().filter(|r| r.converged).cloned().collect();
    kept.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.trial.cmp(&b.trial)));
    sqrt_scaling_fit(&scaling_points(&kept))
}

/// Self-contained SVG: cell means with ±std error bars, both fitted curves.
pub fn scaling_svg(fit: &ScalingFit) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 70.0, 20.0, 30.0, 50.0);
    let pts: &[ScalingPoint] = &fit.points;
    let ymax = pts.iter().map(|p| p.mean + p.std).fold(0.0f64, f64::max) * 1.1;
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let x = |p: f64| left + p * (w - left - right);
    let y = |v: f64| h - bottom - v / ymax * (h - top - bottom);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}" stroke="black"/>"#,
        l = left,
        r = w - right,
        b = h - bottom,
        t = top
    );
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{p:.1}</text>"#,
            x(p),
            h - bottom + 18.0
        );
    }
    for k in 0..=5 {
        let v = ymax * k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            left - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">p</text><text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">theta</text>"#,
        (left + w - right) / 2.0,
        h - 10.0,
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0
    );
    let curve = |f: &dyn Fn(f64) -> f64| {
        (0..=100)
            .map(|k| {
                let p = k as f64 / 100.0;
                format!("{:.2},{:.2}", x(p), y(f(p)))
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        curve(&|p| fit.c1 * p.sqrt() + fit.c2)
    );
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="gray" stroke-dasharray="6 4" points="{}"/>"#,
        curve(&|p| fit.linear_c1 * p + fit.linear_c2)
    );
    for pt in pts {
        let (cx, cy) = (x(pt.p), y(pt.mean));
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/><circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="crimson"/>"#,
            y(pt.mean - pt.std),
            y(pt.mean + pt.std)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}">{:.4} sqrt(p) + {:.4} (SSE {:.4}); linear SSE {:.4}</text>"#,
        left + 10.0,
        top,
        fit.c1,
        fit.c2,
        fit.residual_sqrt,
        fit.residual_linear
    );
    s.push_str("</svg>\n");
    s
}

fn run_lovasz_scaling(c: &LovaszScalingConfig, art: &mut Artifacts, source: &ThetaSource) -> Result<()> {
    let mut rows = art.time("theta", || source(c))?;
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.trial.cmp(&b.trial)));
    art.write("fig1.csv", &fig1_csv(&rows))?;
    let fit = art.time("fit", || fit_converged(&rows))?;
    art.write_json("fit.json", &fit)?;
    art.write("plot.svg", &scaling_svg(&fit))
}
