//! `syklab` command-line front end.
//!
//! Exit codes: 0 success, 2 config/usage error, 3 partial failure, 4 solver failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ensembles::{sample_syk, sample_two_color, Model};
use crate::error::{Error, Result};
use crate::experiment::{
    exit_code_for, fig1_csv, fit_converged, parse_fig1_csv, rerun, run_experiment, scaling_svg, theta_options,
    worker_pool, ExperimentConfig, LovaszScalingConfig, UniversalityConfig,
};
use crate::gaussian::{explicit_witness, gaussian_maximize, GaussianOptions, GaussianReport};
use crate::ho::{single_commutator_value, theta_grid, theta_sweep, HoSystem, HO_QUBIT_CAP};
use crate::io::{load_instance, load_syk, load_two_color, save_instance, Instance, InstanceFile};
use crate::lovasz::{full_degree_graph, sparsified_thetas};
use crate::selfcheck::algebra_self_check;
use crate::spectral::{auto_method, lambda_max, universality_scan, Method, SolverOptions};

#[derive(Debug, Parser)]
#[command(name = "syklab", version, about = "Sparse SYK numerics: spectra, variational states, theta bounds")]
pub struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Majorana algebra diagnostics.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Sample an instance and write it as JSON.
    Sample(SampleArgs),
    /// Largest eigenvalue of an instance.
    Spectrum(SpectrumArgs),
    /// Ensemble scans.
    #[command(subcommand)]
    Scan(ScanCmd),
    /// Gaussian states.
    #[command(subcommand)]
    Gaussian(GaussianCmd),
    /// Two-color variational family.
    #[command(subcommand)]
    Ho(HoCmd),
    /// Commutation graphs and Lovász theta.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// Config-driven studies with manifests.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Debug, Subcommand)]
pub enum AlgebraCmd {
    /// Compare symbolic products and commutation against dense matrices.
    Check {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Syk,
    Ssyk,
    TwoColor,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
}

#[derive(Debug, Subcommand)]
pub enum ScanCmd {
    /// λ_max/√n over an (n, p, trial) grid.
    Universality {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum GaussianCmd {
    /// Maximize the Wick energy over pure covariance matrices.
    Opt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 400)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constant-energy explicit witness.
    Witness {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HoCmd {
    /// Energy on a θ grid.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single commutator (dense and closed form) and double-commutator norm.
    Commutators {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ThetaCmd {
    /// Theta of sparsified full-degree commutation graphs.
    Graph {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        q: usize,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "0.1:1.0:0.1")]
        p_grid: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 9)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit `c1 √p + c2` and `c1 p + c2` to a theta table; writes an SVG plot.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to the input path with an `.svg` extension.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a manifest and compare data-file digests.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// `a:b:step` (inclusive, rounded to 12 decimals) or `a,b,c`.
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(vec![format!("invalid p grid {s:?}; use start:stop:step or a,b,c")]);
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let (a, b, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=count)
            .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    if parts.len() != 1 {
        return Err(bad());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn cmd_sample(a: &SampleArgs) -> Result<i32> {
    let file = match a.model {
        ModelArg::TwoColor => {
            let (n1, n2) = match (a.n1, a.n2) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::Config(vec!["two-color sampling needs --n1 and --n2".into()])),
            };
            InstanceFile::from(&sample_two_color(n1, n2, a.p, a.seed)?)
        }
        ModelArg::Syk | ModelArg::Ssyk => {
            let n = a.n.ok_or_else(|| Error::Config(vec!["--n is required".into()]))?;
            if matches!(a.model, ModelArg::Syk) && a.p != 1.0 {
                return Err(Error::Config(vec![format!("dense syk has p = 1, got --p {}", a.p)]));
            }
            let mut h = sample_syk(n, a.q, a.p, a.seed)?;
            h.model = if matches!(a.model, ModelArg::Syk) { Model::Syk } else { Model::Ssyk };
            InstanceFile::from(&h)
        }
    };
    match &a.out {
        Some(p) => save_instance(&file, p)?,
        None => print!("{}", to_json(&file)?),
    }
    Ok(0)
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<i32> {
    let h = match load_instance(&a.input)? {
        Instance::Syk(i) => i.hamiltonian(),
        Instance::TwoColor(i) => i.hamiltonian(),
    };
    let method = match a.method {
        MethodArg::Auto => auto_method(h.n_qubits()),
        MethodArg::Dense => Method::Dense,
        MethodArg::Lanczos => Method::Lanczos,
    };
    let opts = SolverOptions {
        tol: a.tol,
        max_iters: a.max_iters,
        ..SolverOptions::default()
    };
    let r = lambda_max(&h, method, &opts)?;
    println!(
        "{}",
        serde_json::json!({
            "lambda_max": r.lambda_max,
            "residual": r.residual,
            "iterations": r.iterations,
            "method": r.method,
        })
    );
    Ok(0)
}

fn cmd_scan(config: &Path, out: &Path) -> Result<i32> {
    let cfg = ExperimentConfig::load(config).or_else(|_| -> Result<ExperimentConfig> {
        let c: UniversalityConfig =
            serde_json::from_str(&fs::read_to_string(config)?).map_err(|e| Error::Config(vec![e.to_string()]))?;
        Ok(ExperimentConfig::Universality(c))
    })?;
    let ExperimentConfig::Universality(c) = &cfg else {
        return Err(Error::Config(vec![format!("{} is not a universality config", config.display())]));
    };
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut opts = SolverOptions::default();
    if let Some(t) = c.tol {
        opts.tol = t;
    }
    if let Some(m) = c.max_iters {
        opts.max_iters = m;
    }
    let table = universality_scan(&c.ensemble_spec(), &opts)?;
    fs::write(out, table.to_csv())?;
    for (n, spread) in table.relative_spread() {
        println!("n = {n}: relative spread {spread:.4}");
    }
    if table.failed.is_empty() {
        return Ok(0);
    }
    let sidecar = out.with_extension("failed.csv");
    fs::write(&sidecar, table.failed_csv())?;
    eprintln!("{} rows failed; see {}", table.failed.len(), sidecar.display());
    Ok(if table.rows.is_empty() { 4 } else { 3 })
}

fn report(energy: f64, gamma: Vec<f64>, iterations: usize, method: &str) -> GaussianReport {
    GaussianReport {
        energy,
        gamma,
        iterations,
        method: method.to_string(),
    }
}

fn cmd_gaussian(c: &GaussianCmd) -> Result<i32> {
    match c {
        GaussianCmd::Opt {
            input,
            restarts,
            max_iters,
            seed,
            out,
        } => {
            let h = load_syk(input)?;
            let r = gaussian_maximize(
                &h,
                &GaussianOptions {
                    restarts: *restarts,
                    max_iters: *max_iters,
                    seed: *seed,
                    ..GaussianOptions::default()
                },
            )?;
            if r.stalled_runs > 0 {
                eprintln!("{} of {restarts} restarts hit the iteration cap", r.stalled_runs);
            }
            let rep = report(r.energy, r.gamma_star.to_row_major(), r.iterations, "riemannian-ascent");
            emit(out.as_deref(), &to_json(&rep)?)?;
        }
        GaussianCmd::Witness { input, out } => {
            let h = load_syk(input)?;
            let w = explicit_witness(&h)?;
            let rep = report(w.energy, w.sigma.to_row_major(), 0, "explicit-witness");
            emit(out.as_deref(), &to_json(&rep)?)?;
        }
    }
    Ok(0)
}

fn cmd_ho(c: &HoCmd) -> Result<i32> {
    match c {
        HoCmd::Sweep {
            input,
            theta_max,
            step,
            out,
        } => {
            let inst = load_two_color(input)?;
            let r = theta_sweep(&inst, &theta_grid(*theta_max, *step)?)?;
            emit(out.as_deref(), &r.to_csv())?;
            eprintln!(
                "best theta = {}, energy = {}, S = {}, D = {}, bound violations = {}",
                r.best_theta,
                r.best_energy,
                r.single_commutator,
                r.double_commutator_norm,
                r.bound_violations.len()
            );
        }
        HoCmd::Commutators { input } => {
            let inst = load_two_color(input)?;
            let s = single_commutator_value(&inst)?;
            let d = HoSystem::new(&inst, HO_QUBIT_CAP)?.double_commutator_norm()?;
            println!("S (dense trace)  = {}", s.dense);
            println!("S (closed form)  = {}", s.closed_form);
            println!("discrepancy      = {:e}", s.discrepancy());
            println!("D                = {d}");
            println!("D / sqrt(n1+n2)  = {}", d / ((inst.n1() + inst.n2()) as f64).sqrt());
        }
    }
    Ok(0)
}

fn cmd_theta(c: &ThetaCmd) -> Result<i32> {
    match c {
        ThetaCmd::Graph {
            n,
            q,
            p_grid,
            trials,
            seed,
            tol,
            max_iters,
            out,
        } => {
            let cfg = LovaszScalingConfig {
                n: *n,
                q: *q,
                p: parse_p_grid(p_grid)?,
                trials: *trials,
                seed: *seed,
                tol: *tol,
                max_iters: *max_iters,
                output_dir: None,
            };
            let problems = ExperimentConfig::LovaszScaling(cfg.clone()).validate();
            if !problems.is_empty() {
                return Err(Error::Config(problems));
            }
            let g = full_degree_graph(cfg.n, cfg.q)?;
            let rows = sparsified_thetas(&g, &cfg.p, cfg.trials, cfg.seed, &theta_options(&cfg))?;
            emit(out.as_deref(), &fig1_csv(&rows))?;
            let bad = rows.iter().filter(|r| !r.converged).count();
            if bad > 0 {
                eprintln!("{bad} of {} solves did not converge", rows.len());
            }
        }
        ThetaCmd::Fit { input, svg } => {
            let rows = parse_fig1_csv(&fs::read_to_string(input)?)?;
            let fit = fit_converged(&rows)?;
            println!("c1 = {}", fit.c1);
            println!("c2 = {}", fit.c2);
            println!("residual_sqrt = {}", fit.residual_sqrt);
            println!("residual_linear = {}", fit.residual_linear);
            let path = svg.clone().unwrap_or_else(|| input.with_extension("svg"));
            fs::write(&path, scaling_svg(&fit))?;
            eprintln!("plot written to {}", path.display());
        }
    }
    Ok(0)
}

fn cmd_experiment(c: &ExperimentCmd) -> Result<i32> {
    match c {
        ExperimentCmd::Run { config, out } => {
            let cfg = ExperimentConfig::load(config)?;
            let dir = out
                .clone()
                .or_else(|| cfg.output_dir().map(Path::to_path_buf))
                .ok_or_else(|| Error::Config(vec!["no output directory: pass --out or set output_dir".into()]))?;
            let outcome = run_experiment(&cfg, &dir)?;
            for f in &outcome.manifest.files {
                println!("{}", dir.join(&f.name).display());
            }
            if outcome.manifest.failed_rows > 0 {
                eprintln!("{} rows failed", outcome.manifest.failed_rows);
            }
            Ok(outcome.exit_code())
        }
        ExperimentCmd::Rerun { manifest, out } => {
            let rep = rerun(manifest, out)?;
            if rep.identical() {
                println!("all {} data files identical", rep.outcome.manifest.files.len());
                Ok(rep.outcome.exit_code())
            } else {
                for name in &rep.mismatched {
                    eprintln!("differs: {name}");
                }
                Ok(1)
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Algebra(AlgebraCmd::Check { n, trials, seed }) => {
            let rows = algebra_self_check(*n, *trials, *seed)?;
            println!("{:<28} {:>7} {:>9}  result", "check", "cases", "failures");
            for r in &rows {
                let verdict = if r.passed() { "PASS" } else { "FAIL" };
                println!("{:<28} {:>7} {:>9}  {verdict}", r.name, r.cases, r.failures);
            }
            Ok(if rows.iter().all(|r| r.passed()) { 0 } else { 4 })
        }
        Command::Sample(a) => cmd_sample(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Scan(ScanCmd::Universality { config, out }) => cmd_scan(config, out),
        Command::Gaussian(c) => cmd_gaussian(c),
        Command::Ho(c) => cmd_ho(c),
        Command::Theta(c) => cmd_theta(c),
        Command::Experiment(c) => cmd_experiment(c),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let result = worker_pool().and_then(|pool| pool.install(|| dispatch(&cli)));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_grid_forms() {
        let g = parse_p_grid("0.1:1.0:0.1").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[2], 0.3);
        assert_eq!(g[9], 1.0);
        assert_eq!(parse_p_grid("0.5, 1").unwrap(), vec![0.5, 1.0]);
        assert!(parse_p_grid("1:0:0.1").is_err());
        assert!(parse_p_grid("a:b").is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(["syklab", "frobnicate"]), 2);
        assert_eq!(run(["syklab", "sample", "--model", "ssyk"]), 2);
    }
}
