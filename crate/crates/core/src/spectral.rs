//! Extremal eigenvalues of sampled Hamiltonians, dense and matrix-free.

use faer::{Mat, Side};
use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::DEFAULT_DENSE_QUBIT_CAP;
use crate::ensembles::{sample_syk, EnsembleSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;
use crate::rng::{normals, Stream};

pub const LANCZOS_QUBIT_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Method::Dense),
            "lanczos" => Ok(Method::Lanczos),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Krylov vectors held before restarting from the current Ritz vector.
    pub max_basis: usize,
    pub start_seed: u64,
    pub dense_cap: usize,
    pub lanczos_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 500,
            max_basis: 120,
            start_seed: 0,
            dense_cap: DEFAULT_DENSE_QUBIT_CAP,
            lanczos_cap: LANCZOS_QUBIT_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda_max: f64,
    /// `‖Hv − λv‖₂` for the returned unit vector.
    pub residual: f64,
    pub iterations: usize,
    pub method: Method,
    /// Top Ritz value after each Lanczos step (empty for dense).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ritz_history: Vec<f64>,
}

pub fn lambda_max(h: &SparseHamiltonian, method: Method, opts: &SolverOptions) -> Result<SpectralResult> {
    if h.is_empty() {
        return Ok(SpectralResult {
            lambda_max: 0.0,
            residual: 0.0,
            iterations: 0,
            method,
            ritz_history: Vec::new(),
        });
    }
    match method {
        Method::Dense => dense_lambda_max(h, opts.dense_cap),
        Method::Lanczos => lanczos_lambda_max(h, opts),
    }
}

pub fn dense_lambda_max(h: &SparseHamiltonian, cap: usize) -> Result<SpectralResult> {
    let op = h.materialize(cap)?;
    let eig = op
        .mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let dim = op.dim();
    let top = dim - 1;
    let lambda = eig.S()[top].re;
    let v: Vec<Complex64> = (0..dim).map(|i| eig.U()[(i, top)]).collect();
    let mut hv = vec![Complex64::new(0.0, 0.0); dim];
    h.apply(&v, &mut hv);
    Ok(SpectralResult {
        lambda_max: lambda,
        residual: residual_norm(&hv, &v, lambda),
        iterations: 1,
        method: Method::Dense,
        ritz_history: Vec::new(),
    })
}

fn residual_norm(hv: &[Complex64], v: &[Complex64], lambda: f64) -> f64 {
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Seeded, normalized complex start vector; never a constant vector.
pub fn start_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let raw = normals(seed, Stream::LanczosStart, dim as u64, 2 * dim);
    let mut v: Vec<Complex64> = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let s = norm(&v).recip();
    v.iter_mut().for_each(|x| *x *= s);
    v
}

/// Top eigenpair of the symmetric tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = alpha.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let y = (0..k).map(|i| eig.U()[(i, k - 1)]).collect();
    Ok((eig.S()[k - 1], y))
}

/// Restarted Lanczos with full (twice-applied) Gram–Schmidt reorthogonalization.
///
/// The Krylov basis is rebuilt from the current top Ritz vector whenever it reaches
/// `max_basis` vectors, so the top Ritz value never decreases across restarts.
pub fn lanczos_lambda_max(h: &SparseHamiltonian, opts: &SolverOptions) -> Result<SpectralResult> {
    if h.n_qubits() > opts.lanczos_cap {
        return Err(Error::SizeCap {
            qubits: h.n_qubits(),
            cap: opts.lanczos_cap,
        });
    }
    let dim = h.dim();
    let max_basis = opts.max_basis.clamp(2, dim.max(2));
    let mut v0 = start_vector(dim, opts.start_seed);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    let zero = Complex64::new(0.0, 0.0);
    let mut w = vec![zero; dim];

    loop {
        let mut basis: Vec<Vec<Complex64>> = vec![v0.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut invariant = false;
        let mut ritz = (0.0, Vec::new());
        while basis.len() <= max_basis {
            let j = basis.len() - 1;
            h.apply(&basis[j], &mut w);
            iterations += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            ritz = tridiagonal_top(&alpha, &beta)?;
            history.push(ritz.0);
            let estimate = b * ritz.1[j].abs();
            let scale = ritz.0.abs().max(1.0);
            if b <= 1e-13 * scale {
                invariant = true;
                break;
            }
            if estimate <= 0.5 * opts.tol || iterations >= opts.max_iters || basis.len() == max_basis {
                break;
            }
            beta.push(b);
            let inv = b.recip();
            basis.push(w.iter().map(|x| x * inv).collect());
        }

        let (theta, y) = ritz;
        let mut v = vec![zero; dim];
        for (c, b) in y.iter().zip(&basis) {
            v.iter_mut().zip(b).for_each(|(x, z)| *x += z * *c);
        }
        let s = norm(&v).recip();
        v.iter_mut().for_each(|x| *x *= s);
        h.apply(&v, &mut w);
        let res = residual_norm(&w, &v, theta);
        debug!("lanczos: {iterations} matvecs, ritz {theta}, residual {res:e}");
        if theta > best.0 || res < best.1 {
            best = (theta, res);
        }
        if res <= opts.tol || invariant {
            if invariant && res > opts.tol {
                warn!("lanczos: invariant subspace with residual {res:e}");
            }
            return Ok(SpectralResult {
                lambda_max: theta,
                residual: res,
                iterations,
                method: Method::Lanczos,
                ritz_history: history,
            });
        }
        if iterations >= opts.max_iters {
            return Err(Error::NotConverged {
                method: "lanczos",
                iterations,
                estimate: theta,
                residual: res,
            });
        }
        v0 = v;
    }
}

/// `λ_max ≤ c·√n`; logged by callers, never enforced.
pub fn op_norm_sanity(lambda_max: f64, n: usize, c_threshold: f64) -> bool {
    lambda_max <= c_threshold * (n as f64).sqrt()
}

/// Picks dense below the cap where it is cheaper, Lanczos above.
pub fn auto_method(n_qubits: usize) -> Method {
    if n_qubits <= 8 {
        Method::Dense
    } else {
        Method::Lanczos
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniversalityRow {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub lambda_max: f64,
    pub lambda_over_sqrt_n: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedRow {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub p: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UniversalityTable {
    pub rows: Vec<UniversalityRow>,
    pub failed: Vec<FailedRow>,
}

impl UniversalityTable {
    /// Mean and sample standard deviation of `λ_max/√n` per `(n, p)` cell.
    pub fn summaries(&self) -> Vec<CellSummary> {
        let mut out: Vec<CellSummary> = Vec::new();
        for chunk in self.rows.chunk_by(|a, b| a.n == b.n && a.p == b.p) {
            let vals: Vec<f64> = chunk.iter().map(|r| r.lambda_over_sqrt_n).collect();
            let (mean, std) = mean_std(&vals);
            out.push(CellSummary {
                n: chunk[0].n,
                p: chunk[0].p,
                mean,
                std,
                trials: vals.len(),
            });
        }
        out
    }

    /// Per-`n` spread `(max − min)/mean(p = 1)` of the cell means across `p`.
    pub fn relative_spread(&self) -> Vec<(usize, f64)> {
        let s = self.summaries();
        let mut out = Vec::new();
        for cells in s.chunk_by(|a, b| a.n == b.n) {
            let reference = cells.iter().find(|c| c.p == 1.0);
            let max = cells.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
            let min = cells.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
            if let Some(r) = reference {
                out.push((cells[0].n, (max - min) / r.mean));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,p,seed,lambda_max,lambda_over_sqrt_n,residual,iterations\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{:e},{}\n",
                r.n, r.p, r.seed, r.lambda_max, r.lambda_over_sqrt_n, r.residual, r.iterations
            ));
        }
        s
    }

    pub fn failed_csv(&self) -> String {
        let mut s = String::from("n,p,seed,error\n");
        for r in &self.failed {
            s.push_str(&format!("{},{},{},\"{}\"\n", r.n, r.p, r.seed, r.error.replace('"', "'")));
        }
        s
    }
}

pub fn mean_std(vals: &[f64]) -> (f64, f64) {
    let m = vals.len() as f64;
    if vals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = vals.iter().sum::<f64>() / m;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs every `(n, p, trial)` cell of `grid`; solver failures become failed rows.
pub fn universality_scan(grid: &EnsembleSpec, opts: &SolverOptions) -> Result<UniversalityTable> {
    let problems = grid.validate();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut jobs = Vec::new();
    for &n in &grid.n {
        for &p in &grid.p {
            for t in 0..grid.trials {
                jobs.push((n, p, grid.trial_seed(t)));
            }
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(n, p, seed)| {
            let run = || -> Result<SpectralResult> {
                let inst = sample_syk(n, grid.q, p, seed)?;
                let h = inst.hamiltonian();
                let o = SolverOptions {
                    start_seed: seed,
                    ..opts.clone()
                };
                let r = lambda_max(&h, auto_method(n), &o)?;
                if !op_norm_sanity(r.lambda_max, n, 5.0) {
                    warn!("lambda_max = {} exceeds 5 sqrt(n) at n = {n}, p = {p}, seed = {seed}", r.lambda_max);
                }
                Ok(r)
            };
            ((n, p, seed), run())
        })
        .collect();
    let mut table = UniversalityTable::default();
    for ((n, p, seed), r) in results {
        match r {
            Ok(r) => table.rows.push(UniversalityRow {
                n,
                p,
                seed,
                lambda_max: r.lambda_max,
                lambda_over_sqrt_n: r.lambda_max / (n as f64).sqrt(),
                residual: r.residual,
                iterations: r.iterations,
            }),
            Err(e) => table.failed.push(FailedRow {
                n,
                p,
                seed,
                error: e.to_string(),
            }),
        }
    }
    let key = |n: usize, p: f64, seed: u64| (n, p.to_bits(), seed);
    table.rows.sort_by_key(|r| key(r.n, r.p, r.seed));
    table.failed.sort_by_key(|r| key(r.n, r.p, r.seed));
    Ok(table)
}
