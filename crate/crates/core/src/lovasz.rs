//! Anticommutation graphs of monomial sets and the Lovász theta function.

use std::collections::HashSet;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use itertools::Itertools;
use log::debug;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{anticommute_bits, MajoranaMonomial, StateVector};
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::rng::{normals, stream_rng, uniform, Stream};

/// Simple undirected graph with bitset adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b}) for {n} vertices")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b);
        self.rows[a * self.words + b / 64] |= 1 << (b % 64);
        self.rows[b * self.words + a / 64] |= 1 << (a % 64);
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (a + 1..self.n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.has_edge(a, b))
            .collect()
    }

    pub fn degree(&self, a: usize) -> usize {
        self.rows[a * self.words..(a + 1) * self.words]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> Self {
        let mut g = Self::empty(self.n);
        for a in 0..self.n {
            for b in a + 1..self.n {
                if !self.has_edge(a, b) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// Subgraph induced on `keep` (in that order).
    pub fn induced(&self, keep: &[usize]) -> Self {
        let mut g = Self::empty(keep.len());
        for (i, &a) in keep.iter().enumerate() {
            for (j, &b) in keep.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub parent: String,
    pub p: f64,
    pub seed: u64,
    /// Parent vertex index of each kept vertex.
    pub kept: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CommutationGraph {
    pub labels: Vec<MajoranaMonomial>,
    pub graph: Graph,
    pub lineage: Option<Lineage>,
    pub description: String,
}

impl CommutationGraph {
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }
}

/// Anticommutation graph; vertex order follows the input.
pub fn build_graph(monomials: &[MajoranaMonomial]) -> Result<CommutationGraph> {
    let mut seen = HashSet::new();
    for m in monomials {
        if m.n_majoranas() != monomials[0].n_majoranas() {
            return Err(Error::ModeMismatch {
                left: monomials[0].n_majoranas(),
                right: m.n_majoranas(),
            });
        }
        if !seen.insert(m.support_bits()) {
            return Err(Error::InvalidParameter(format!("duplicate monomial {m:?}")));
        }
    }
    let mut graph = Graph::empty(monomials.len());
    for (i, a) in monomials.iter().enumerate() {
        for (j, b) in monomials.iter().enumerate().skip(i + 1) {
            if anticommute_bits(a.support_bits(), b.support_bits()) {
                graph.add_edge(i, j);
            }
        }
    }
    Ok(CommutationGraph {
        labels: monomials.to_vec(),
        graph,
        lineage: None,
        description: format!("{} monomials", monomials.len()),
    })
}

/// All Hermitian-canonical degree-`q` monomials on `2n` Majoranas, lexicographic.
pub fn full_degree_set(n: usize, q: usize) -> Result<Vec<MajoranaMonomial>> {
    (1..=2 * n)
        .combinations(q)
        .map(|idx| MajoranaMonomial::hermitian(2 * n, &idx))
        .collect()
}

pub fn full_degree_graph(n: usize, q: usize) -> Result<CommutationGraph> {
    let mut g = build_graph(&full_degree_set(n, q)?)?;
    g.description = format!("all degree-{q} monomials on {} Majoranas", 2 * n);
    Ok(g)
}

/// Keeps vertex `v` iff its seeded uniform is below `p`; nested in `p` for a fixed seed.
pub fn sparsify_vertices(g: &CommutationGraph, p: f64, seed: u64) -> Result<CommutationGraph> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidSparsity(p));
    }
    let kept: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| uniform(seed, Stream::Sparsify, 0, v as u64) < p)
        .collect();
    Ok(CommutationGraph {
        labels: kept.iter().map(|&v| g.labels[v]).collect(),
        graph: g.graph.induced(&kept),
        lineage: Some(Lineage {
            parent: g.description.clone(),
            p,
            seed,
            kept,
        }),
        description: format!("{} sparsified p={p} seed={seed}", g.description),
    })
}

#[derive(Clone, Debug)]
pub struct ThetaOptions {
    /// Relative primal-dual gap at which the solve stops.
    pub tol: f64,
    pub max_iters: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Iterations between bound evaluations.
    pub check_every: usize,
    /// Anderson history length; 0 runs plain ADMM.
    pub anderson_memory: usize,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 20_000,
            relaxation: 1.6,
            check_every: 10,
            anderson_memory: 5,
        }
    }
}

impl ThetaOptions {
    /// Settings for many-graph sweeps: 1e-3 relative gap, 2000 iterations.
    pub fn sweep() -> Self {
        Self {
            tol: 1e-3,
            max_iters: 2000,
            ..Self::default()
        }
    }
}

/// ADMM iterate kept for warm starts.
#[derive(Clone, Debug)]
pub struct WarmStart {
    z: Mat<f64>,
    u: Mat<f64>,
    rho: f64,
}

impl WarmStart {
    /// Restriction to the kept vertices of a sparsification.
    pub fn restrict(&self, kept: &[usize]) -> Self {
        let k = kept.len();
        Self {
            z: Mat::from_fn(k, k, |i, j| self.z[(kept[i], kept[j])]),
            u: Mat::from_fn(k, k, |i, j| self.u[(kept[i], kept[j])]),
            rho: self.rho,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThetaResult {
    /// Objective of a strictly feasible matrix: a certified lower bound.
    pub theta: f64,
    /// `λ_max(𝕁 + M)` for an edge-supported `M`: a certified upper bound.
    pub upper: f64,
    /// Trace of the rounded feasible matrix; its edge entries are exactly zero.
    pub trace: f64,
    pub max_edge_violation: f64,
    pub min_eigenvalue: f64,
    pub primal_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warm: Option<WarmStart>,
}

impl ThetaResult {
    fn analytic(theta: f64) -> Self {
        Self {
            theta,
            upper: theta,
            trace: 1.0,
            max_edge_violation: 0.0,
            min_eigenvalue: 0.0,
            primal_residual: 0.0,
            iterations: 0,
            converged: true,
            warm: None,
        }
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.theta
    }
}

fn sym_eig(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    Ok(((0..m.nrows()).map(|i| e.S()[i]).collect(), e.U().to_owned()))
}

fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))
}

fn psd_projection(m: &Mat<f64>) -> Result<Mat<f64>> {
    let (vals, vecs) = sym_eig(m)?;
    let n = m.nrows();
    let pos: Vec<usize> = (0..n).filter(|&k| vals[k] > 1e-10).collect();
    if pos.is_empty() {
        return Ok(Mat::zeros(n, n));
    }
    let scaled = Mat::<f64>::from_fn(n, pos.len(), |i, c| vecs[(i, pos[c])] * vals[pos[c]].sqrt());
    Ok(&scaled * scaled.transpose())
}

fn edge_mask(g: &Graph) -> Vec<bool> {
    let n = g.vertex_count();
    (0..n * n).map(|k| k / n != k % n && g.has_edge(k / n, k % n)).collect()
}

/// Frobenius projection onto `{Tr X = 1, X_e = 0 on edges}`.
fn project_affine(y: &mut Mat<f64>, mask: &[bool]) {
    let n = y.nrows();
    for j in 0..n {
        for i in 0..n {
            if mask[i * n + j] {
                y[(i, j)] = 0.0;
            }
        }
    }
    let shift = (1.0 - (0..n).map(|i| y[(i, i)]).sum::<f64>()) / n as f64;
    for i in 0..n {
        y[(i, i)] += shift;
    }
}

fn total_sum(m: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)];
        }
    }
    s
}

/// Type-II Anderson mixing over the flattened `(Z, U)` iterate.
struct Anderson {
    memory: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    d_out: Vec<Vec<f64>>,
    d_res: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(memory: usize) -> Self {
        Self {
            memory,
            prev: None,
            d_out: Vec::new(),
            d_res: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.prev = None;
        self.d_out.clear();
        self.d_res.clear();
    }

    /// Given `T(w)` and `g = T(w) − w`, returns the mixed next iterate.
    fn step(&mut self, out: Vec<f64>, res: Vec<f64>) -> Vec<f64> {
        if let Some((po, pr)) = self.prev.take() {
            self.d_out.push(out.iter().zip(&po).map(|(a, b)| a - b).collect());
            self.d_res.push(res.iter().zip(&pr).map(|(a, b)| a - b).collect());
            if self.d_out.len() > self.memory {
                self.d_out.remove(0);
                self.d_res.remove(0);
            }
        }
        let k = self.d_res.len();
        let mixed = if k == 0 {
            out.clone()
        } else {
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let mut gram = Mat::<f64>::from_fn(k, k, |i, j| dot(&self.d_res[i], &self.d_res[j]));
            let reg = 1e-10 * (0..k).map(|i| gram[(i, i)]).fold(0.0, f64::max);
            for i in 0..k {
                gram[(i, i)] += reg;
            }
            let rhs = Mat::<f64>::from_fn(k, 1, |i, _| dot(&self.d_res[i], &res));
            let gamma = gram.partial_piv_lu().solve(&rhs);
            if (0..k).all(|i| gamma[(i, 0)].is_finite()) {
                let mut w = out.clone();
                for i in 0..k {
                    let c = gamma[(i, 0)];
                    w.iter_mut().zip(&self.d_out[i]).for_each(|(x, d)| *x -= c * d);
                }
                w
            } else {
                out.clone()
            }
        };
        self.prev = Some((out, res));
        mixed
    }
}

fn flatten(z: &Mat<f64>, u: &Mat<f64>) -> Vec<f64> {
    let n = z.nrows();
    let mut v = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            v.push(z[(i, j)]);
        }
    }
    for j in 0..n {
        for i in 0..n {
            v.push(u[(i, j)]);
        }
    }
    v
}

fn unflatten(v: &[f64], n: usize) -> (Mat<f64>, Mat<f64>) {
    let nn = n * n;
    (
        Mat::from_fn(n, n, |i, j| v[j * n + i]),
        Mat::from_fn(n, n, |i, j| v[nn + j * n + i]),
    )
}

/// `max ⟨𝕁, X⟩` over unit-trace PSD `X` vanishing on edges.
///
/// Over-relaxed ADMM between the affine constraint set and the PSD cone, with
/// Anderson-accelerated iterates and residual-balanced penalty. Every
/// `check_every` steps a feasible matrix (the affine iterate shifted by a
/// multiple of `𝕀`) and a dual eigenvalue bound bracket the optimum; the solve
/// stops once the bracket is within `tol` relative.
pub fn lovasz_theta(g: &Graph, opts: &ThetaOptions, warm: Option<&WarmStart>) -> Result<ThetaResult> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidParameter("theta of the empty vertex set".into()));
    }
    if n == 1 {
        return Ok(ThetaResult::analytic(1.0));
    }
    if g.edge_count() == 0 {
        return Ok(ThetaResult::analytic(n as f64));
    }
    let mask = edge_mask(g);
    let nf = n as f64;
    let (mut z, mut u, mut rho) = match warm {
        Some(w) if w.z.nrows() == n => (w.z.clone(), w.u.clone(), w.rho),
        _ => (Mat::from_fn(n, n, |i, j| if i == j { 1.0 / nf } else { 0.0 }), Mat::zeros(n, n), nf),
    };
    let ones = Mat::<f64>::from_fn(n, n, |_, _| 1.0);
    let alpha = opts.relaxation;
    let mut anderson = Anderson::new(opts.anderson_memory);
    let mut best_lower = (f64::NEG_INFINITY, 0.0, 0.0, 1.0);
    let mut best_upper = f64::INFINITY;
    let mut r_primal = f64::INFINITY;
    let mut last_res = f64::INFINITY;
    let mut fallback: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let v = &z - &u + &ones * (1.0 / rho);
        let mut x = v.clone();
        project_affine(&mut x, &mask);
        let check = iterations % opts.check_every == 0 || iterations == opts.max_iters;
        if check {
            let lam_min = sym_eigenvalues(&x)?[0];
            let mu = (-lam_min).max(0.0);
            let lower = (total_sum(&x) + mu * nf) / (1.0 + mu * nf);
            if lower > best_lower.0 {
                let trace = (0..n).map(|i| x[(i, i)]).sum::<f64>();
                best_lower = (lower, mu, lam_min, (trace + mu * nf) / (1.0 + mu * nf));
            }
            let w = &v - &x;
            let dual = Mat::<f64>::from_fn(n, n, |i, j| {
                if mask[i * n + j] {
                    1.0 - rho * w[(i, j)]
                } else {
                    1.0
                }
            });
            let upper = *sym_eigenvalues(&dual)?.last().expect("non-empty");
            best_upper = best_upper.min(upper);
        }
        let xr = &x * alpha + &z * (1.0 - alpha);
        let z_next = psd_projection(&(&xr + &u))?;
        let u_next = &u + &xr - &z_next;
        r_primal = (&x - &z_next).norm_l2();
        let r_dual = rho * (&z_next - &z).norm_l2();

        let w_in = flatten(&z, &u);
        let w_out = flatten(&z_next, &u_next);
        let res: Vec<f64> = w_out.iter().zip(&w_in).map(|(a, b)| a - b).collect();
        let res_norm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
        if check {
            let gap = best_upper - best_lower.0;
            debug!("theta iter {iterations}: [{}, {best_upper}] rp {r_primal:e} rd {r_dual:e} rho {rho}", best_lower.0);
            if gap <= opts.tol * best_lower.0.max(1.0) && r_primal <= 1e-4 {
                converged = true;
                z = z_next;
                u = u_next;
                break;
            }
            let scale = if r_primal > 10.0 * r_dual / nf {
                2.0
            } else if r_dual / nf > 10.0 * r_primal {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                z = z_next;
                u = &u_next * (1.0 / scale);
                anderson.reset();
                fallback = None;
                last_res = f64::INFINITY;
                continue;
            }
        }
        if opts.anderson_memory == 0 {
            z = z_next;
            u = u_next;
            continue;
        }
        // safeguard: an extrapolated point must not grow the fixed-point residual
        if res_norm > 2.0 * last_res {
            if let Some(fb) = fallback.take() {
                anderson.reset();
                last_res = f64::INFINITY;
                (z, u) = unflatten(&fb, n);
                continue;
            }
        }
        last_res = res_norm;
        fallback = Some(w_out.clone());
        let mixed = anderson.step(w_out, res);
        (z, u) = unflatten(&mixed, n);
    }
    let (theta, mu, lam_min, trace) = best_lower;
    Ok(ThetaResult {
        theta,
        upper: best_upper,
        trace,
        max_edge_violation: 0.0,
        min_eigenvalue: (lam_min + mu) / (1.0 + mu * nf),
        primal_residual: r_primal,
        iterations,
        converged,
        warm: Some(WarmStart { z, u, rho }),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifiedTheta {
    pub p: f64,
    pub trial: usize,
    pub vertices: usize,
    pub theta: f64,
    pub converged: bool,
}

/// Theta of seeded vertex sparsifications of `g` for every `(p, trial)`.
///
/// Trial `t` uses seed `seed + t`. Within a trial the grid is walked from the
/// largest `p` down, warm-starting each solve from the previous (nesting) parent.
pub fn sparsified_thetas(
    g: &CommutationGraph,
    p_grid: &[f64],
    trials: usize,
    seed: u64,
    opts: &ThetaOptions,
) -> Result<Vec<SparsifiedTheta>> {
    use rayon::prelude::*;
    let mut order: Vec<f64> = p_grid.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));
    let per_trial: Vec<Vec<SparsifiedTheta>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = seed.wrapping_add(trial as u64);
            let mut warm: Option<(Vec<usize>, WarmStart)> = None;
            let mut rows = Vec::new();
            for &p in &order {
                let child = sparsify_vertices(g, p, s)?;
                let kept = child.lineage.as_ref().expect("sparsified").kept.clone();
                let start = warm.as_ref().map(|(parent_kept, w)| {
                    let pos: Vec<usize> = kept
                        .iter()
                        .map(|v| parent_kept.binary_search(v).expect("nested sparsification"))
                        .collect();
                    w.restrict(&pos)
                });
                let r = if child.vertex_count() == 0 {
                    ThetaResult::analytic(0.0)
                } else {
                    lovasz_theta(&child.graph, opts, start.as_ref())?
                };
                rows.push(SparsifiedTheta {
                    p,
                    trial,
                    vertices: child.vertex_count(),
                    theta: r.theta,
                    converged: r.converged,
                });
                if let Some(w) = r.warm {
                    warm = Some((kept, w));
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SparsifiedTheta> = per_trial.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.trial.cmp(&b.trial)));
    Ok(rows)
}

pub fn scaling_points(rows: &[SparsifiedTheta]) -> Vec<ScalingPoint> {
    rows.chunk_by(|a, b| a.p == b.p)
        .map(|chunk| {
            let vals: Vec<f64> = chunk.iter().map(|r| r.theta).collect();
            let (mean, std) = crate::spectral::mean_std(&vals);
            ScalingPoint {
                p: chunk[0].p,
                mean,
                std,
                trials: vals.len(),
            }
        })
        .collect()
}

/// Fraction-of-terms bounds on the commutation index `Δ(S)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationBounds {
    /// Best sampled `(1/|S|) Σ ⟨A⟩²`.
    pub lower: f64,
    /// `ϑ / |S|`.
    pub upper: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct StateSampling {
    pub basis_states: usize,
    pub random_states: usize,
    pub gaussian_states: usize,
    pub seed: u64,
    pub qubit_cap: usize,
}

impl Default for StateSampling {
    fn default() -> Self {
        Self {
            basis_states: 16,
            random_states: 16,
            gaussian_states: 32,
            seed: 0,
            qubit_cap: crate::algebra::DEFAULT_DENSE_QUBIT_CAP,
        }
    }
}

pub fn commutation_index_bounds(g: &CommutationGraph, theta: f64, sampling: &StateSampling) -> Result<CommutationBounds> {
    let m = g.vertex_count();
    if m == 0 {
        return Err(Error::InvalidParameter("empty monomial set".into()));
    }
    let n_majoranas = g.labels[0].n_majoranas();
    let n_qubits = n_majoranas / 2;
    if n_qubits > sampling.qubit_cap {
        return Err(Error::SizeCap {
            qubits: n_qubits,
            cap: sampling.qubit_cap,
        });
    }
    let paulis: Vec<_> = g.labels.iter().map(|l| l.pauli()).collect();
    let score = |v: &[Complex64]| paulis.iter().map(|p| p.expectation(v).re.powi(2)).sum::<f64>() / m as f64;
    let dim = 1usize << n_qubits;
    let mut best = 0.0f64;
    let mut rng = stream_rng(sampling.seed, Stream::RandomState, 0, 0);
    for _ in 0..sampling.basis_states {
        let b = rand::Rng::random_range(&mut rng, 0..dim);
        best = best.max(score(StateVector::basis(dim, b).as_slice()));
    }
    for k in 0..sampling.random_states {
        let raw = normals(sampling.seed, Stream::RandomState, 1 + k as u64, 2 * dim);
        let mut v = StateVector::from_vec(raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
        v.normalize();
        best = best.max(score(v.as_slice()));
    }
    for k in 0..sampling.gaussian_states {
        let gamma = CovarianceMatrix::random_pure(n_majoranas, sampling.seed.wrapping_add(k as u64))?;
        let s = g
            .labels
            .iter()
            .map(|l| gamma.expectation(l).map(|e| e.re.powi(2)))
            .sum::<Result<f64>>()?;
        best = best.max(s / m as f64);
    }
    Ok(CommutationBounds {
        lower: best,
        upper: theta / m as f64,
    })
}

/// Exponent `kept·t² / (2ϑ)` of the energy-tail estimate.
pub fn variance_tail_bound(theta: f64, kept_terms: usize, t: f64) -> Result<f64> {
    if !(theta > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("need theta > 0 and t >= 0 (got {theta}, {t})")));
    }
    Ok(kept_terms as f64 * t * t / (2.0 * theta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub p: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    /// `c₁√p + c₂`.
    pub c1: f64,
    pub c2: f64,
    /// `a₁p + a₂`.
    pub linear_c1: f64,
    pub linear_c2: f64,
    /// Sums of squared residuals over the same points.
    pub residual_sqrt: f64,
    pub residual_linear: f64,
}

fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = m * sxx - sx * sx;
    if det.abs() <= 1e-12 * m * sxx.max(1.0) {
        return Err(Error::InvalidParameter("degenerate design matrix".into()));
    }
    let slope = (m * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / m;
    let res = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok((slope, intercept, res))
}

pub fn sqrt_scaling_fit(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let distinct: HashSet<u64> = points.iter().map(|p| p.p.to_bits()).collect();
    if distinct.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 3 distinct p values, got {}",
            distinct.len()
        )));
    }
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let sq: Vec<f64> = points.iter().map(|p| p.p.sqrt()).collect();
    let lin: Vec<f64> = points.iter().map(|p| p.p).collect();
    let (c1, c2, residual_sqrt) = least_squares_line(&sq, &ys)?;
    let (linear_c1, linear_c2, residual_linear) = least_squares_line(&lin, &ys)?;
    Ok(ScalingFit {
        points: points.to_vec(),
        c1,
        c2,
        linear_c1,
        linear_c2,
        residual_sqrt,
        residual_linear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::anticommutes;

    fn independence_number(g: &Graph) -> usize {
        let n = g.vertex_count();
        (0u32..1 << n)
            .filter(|s| {
                (0..n).all(|a| s >> a & 1 == 0 || (a + 1..n).all(|b| s >> b & 1 == 0 || !g.has_edge(a, b)))
            })
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap()
    }

    /// Greedy clique cover of `g` (cliques of `g` cover vertices; ϑ(g) ≤ cover size).
    fn clique_cover(g: &Graph) -> usize {
        let n = g.vertex_count();
        let mut assigned = vec![false; n];
        let mut count = 0;
        for a in 0..n {
            if assigned[a] {
                continue;
            }
            count += 1;
            assigned[a] = true;
            let mut clique = vec![a];
            for b in a + 1..n {
                if !assigned[b] && clique.iter().all(|&c| g.has_edge(b, c)) {
                    assigned[b] = true;
                    clique.push(b);
                }
            }
        }
        count
    }

    fn theta(g: &Graph) -> ThetaResult {
        lovasz_theta(g, &ThetaOptions::default(), None).unwrap()
    }

    #[test]
    fn classical_values() {
        let k5 = theta(&Graph::complete(5));
        assert!((k5.theta - 1.0).abs() < 1e-4 && k5.converged);
        assert!((theta(&Graph::empty(7)).theta - 7.0).abs() < 1e-4);
        let c5 = theta(&Graph::cycle(5));
        assert!((c5.theta - 5f64.sqrt()).abs() < 1e-3, "{c5:?}");
        assert!(c5.upper >= 5f64.sqrt() - 1e-9 && c5.theta <= 5f64.sqrt() + 1e-9);
        assert!(c5.min_eigenvalue >= -1e-6);
        assert_eq!(theta(&Graph::empty(1)).theta, 1.0);
        assert!(lovasz_theta(&Graph::empty(0), &ThetaOptions::default(), None).is_err());
    }

    #[test]
    fn sandwich_on_random_graphs() {
        for seed in 0..50u64 {
            let n = 4 + (seed as usize % 9);
            let mut g = Graph::empty(n);
            for a in 0..n {
                for b in a + 1..n {
                    if uniform(seed, Stream::Sparsify, 7, (a * n + b) as u64) < 0.4 {
                        g.add_edge(a, b);
                    }
                }
            }
            let t = theta(&g).theta;
            let alpha = independence_number(&g) as f64;
            let cover = clique_cover(&g) as f64;
            assert!(alpha <= t + 1e-4 && t <= cover + 1e-4, "seed {seed}: {alpha} {t} {cover}");
        }
    }

    #[test]
    fn q4_graph_on_eight_majoranas() {
        let g = full_degree_graph(4, 4).unwrap();
        assert_eq!(g.vertex_count(), 70);
        let mut oracle_edges = 0;
        for (i, a) in g.labels.iter().enumerate() {
            for b in &g.labels[i + 1..] {
                let (ma, mb) = (a.materialize().unwrap(), b.materialize().unwrap());
                let anti = ma.matmul(&mb).add(&mb.matmul(&ma));
                if anti.mat().norm_max() < 1e-12 {
                    oracle_edges += 1;
                }
            }
        }
        assert_eq!(g.graph.edge_count(), oracle_edges);
    }

    #[test]
    fn disjoint_quartics_commute_and_duplicates_fail() {
        let a = MajoranaMonomial::hermitian(8, &[1, 2, 3, 4]).unwrap();
        let b = MajoranaMonomial::hermitian(8, &[5, 6, 7, 8]).unwrap();
        let g = build_graph(&[a, b]).unwrap();
        assert_eq!(g.graph.edge_count(), 0);
        assert!(!anticommutes(&a, &b).unwrap());
        assert!(build_graph(&[a, a]).is_err());
    }

    #[test]
    fn sparsification_replays_and_nests() {
        let g = full_degree_graph(4, 4).unwrap();
        assert_eq!(sparsify_vertices(&g, 1.0, 3).unwrap().vertex_count(), 70);
        let s = sparsify_vertices(&g, 0.4, 3).unwrap();
        let replay = (0..70).filter(|&v| uniform(3, Stream::Sparsify, 0, v) < 0.4).count();
        assert_eq!(s.vertex_count(), replay);
        let big = sparsify_vertices(&g, 0.7, 3).unwrap();
        let big_set: HashSet<usize> = big.lineage.as_ref().unwrap().kept.iter().copied().collect();
        assert!(s.lineage.as_ref().unwrap().kept.iter().all(|v| big_set.contains(v)));
        assert!(sparsify_vertices(&g, 0.0, 3).is_err());
    }

    #[test]
    fn deletion_never_increases_theta() {
        let g = full_degree_graph(3, 4).unwrap();
        let parent = theta(&g.graph);
        for seed in 0..30 {
            let child = sparsify_vertices(&g, 0.8, seed).unwrap();
            let t = theta(&child.graph).theta;
            assert!(t <= parent.theta + 1e-4);
        }
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let g = full_degree_graph(4, 4).unwrap();
        let parent = theta(&g.graph);
        let child = sparsify_vertices(&g, 0.6, 1).unwrap();
        let warm = parent.warm.unwrap().restrict(&child.lineage.as_ref().unwrap().kept);
        let a = lovasz_theta(&child.graph, &ThetaOptions::default(), Some(&warm)).unwrap();
        let b = theta(&child.graph);
        assert!((a.theta - b.theta).abs() < 1e-4);
    }

    #[test]
    fn singleton_commutation_index_is_one() {
        let a = MajoranaMonomial::hermitian(8, &[1, 2, 3, 4]).unwrap();
        let g = build_graph(&[a]).unwrap();
        let t = theta(&g.graph).theta;
        let b = commutation_index_bounds(&g, t, &StateSampling::default()).unwrap();
        assert_eq!(b.upper, 1.0);
        assert!((b.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_lower_bound_below_theta() {
        let g = full_degree_graph(3, 4).unwrap();
        let t = theta(&g.graph);
        let b = commutation_index_bounds(&g, t.theta, &StateSampling::default()).unwrap();
        assert!(b.lower <= b.upper + 1e-8);
        assert!(b.lower > 0.0);
    }

    #[test]
    fn tail_exponent_arithmetic() {
        assert_eq!(variance_tail_bound(3.0, 10, 0.0).unwrap(), 0.0);
        let one = variance_tail_bound(3.0, 10, 0.5).unwrap();
        assert!((variance_tail_bound(3.0, 20, 0.5).unwrap() - 2.0 * one).abs() < 1e-15);
        assert!((one - 10.0 * 0.25 / 6.0).abs() < 1e-15);
        assert!(variance_tail_bound(0.0, 10, 0.5).is_err());
    }

    fn points(f: impl Fn(f64) -> f64) -> Vec<ScalingPoint> {
        (1..=10)
            .map(|k| {
                let p = k as f64 / 10.0;
                ScalingPoint {
                    p,
                    mean: f(p),
                    std: 0.0,
                    trials: 1,
                }
            })
            .collect()
    }

    #[test]
    fn fits_separate_models() {
        let f = sqrt_scaling_fit(&points(|p| 2.0 * p.sqrt() + 3.0)).unwrap();
        assert!((f.c1 - 2.0).abs() < 1e-12 && (f.c2 - 3.0).abs() < 1e-12);
        assert!(f.residual_sqrt < 1e-20 && f.residual_linear > 1e-4);
        let f = sqrt_scaling_fit(&points(|p| 4.0 * p + 1.0)).unwrap();
        assert!(f.residual_linear < 1e-20 && f.residual_sqrt > 1e-4);
        assert!(sqrt_scaling_fit(&points(|p| p)[..2]).is_err());
    }
}
