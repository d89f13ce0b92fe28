//! Fermionic Gaussian states as covariance matrices, Wick energies and the
//! mean-field optimizer.
//!
//! Indices are 0-based here; `Γ_ij = (i/2) Tr(ρ [γ_{i+1}, γ_{j+1}])`.

use faer::{Mat, Side};
use log::{debug, warn};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{i_pow, DenseOperator, MajoranaMonomial, PauliString};
use crate::ensembles::SykInstance;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

const ANTISYMMETRY_TOL: f64 = 1e-12;
const VALIDITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    gamma: Mat<f64>,
}

impl CovarianceMatrix {
    pub fn new(gamma: Mat<f64>) -> Result<Self> {
        let m = gamma.nrows();
        if m != gamma.ncols() || m == 0 || m % 2 != 0 {
            return Err(Error::InvalidCovariance(format!(
                "shape {}x{} is not square of even size",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        let c = Self { gamma };
        let asym = c.antisymmetry_error();
        if asym > ANTISYMMETRY_TOL {
            return Err(Error::InvalidCovariance(format!("‖Γ + Γᵀ‖_max = {asym:e}")));
        }
        let top = c.max_singular_value()?;
        if top > 1.0 + VALIDITY_TOL {
            return Err(Error::InvalidCovariance(format!("largest singular value {top} exceeds 1")));
        }
        Ok(c)
    }

    pub fn from_row_major(n_majoranas: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n_majoranas * n_majoranas {
            return Err(Error::DimensionMismatch {
                expected: n_majoranas * n_majoranas,
                actual: data.len(),
            });
        }
        Self::new(Mat::from_fn(n_majoranas, n_majoranas, |i, j| data[i * n_majoranas + j]))
    }

    pub fn zeros(n_majoranas: usize) -> Result<Self> {
        Self::new(Mat::zeros(n_majoranas, n_majoranas))
    }

    /// `Γ_{2j,2j+1} = 1` for every pair: the computational state `|1…1⟩`.
    pub fn standard(n_majoranas: usize) -> Result<Self> {
        Self::new(paired(n_majoranas, n_majoranas / 2))
    }

    /// `R Γ₀ Rᵀ` with `R` the orthogonal factor of a seeded Gaussian matrix.
    pub fn random_pure(n_majoranas: usize, seed: u64) -> Result<Self> {
        let r = random_orthogonal(n_majoranas, &mut stream_rng(seed, Stream::GaussianStart, 1 << 32, 0));
        Self::new(conjugate(&r, &paired(n_majoranas, n_majoranas / 2)))
    }

    pub fn n_majoranas(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.n_majoranas() / 2
    }

    pub fn mat(&self) -> &Mat<f64> {
        &self.gamma
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gamma[(i, j)]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let m = self.n_majoranas();
        (0..m * m).map(|k| self.gamma[(k / m, k % m)]).collect()
    }

    pub fn antisymmetry_error(&self) -> f64 {
        let m = self.n_majoranas();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                worst = worst.max((self.gamma[(i, j)] + self.gamma[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_singular_value(&self) -> Result<f64> {
        let s = self
            .gamma
            .singular_values()
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        Ok(s.first().copied().unwrap_or(0.0))
    }

    /// `‖Γ Γᵀ − 𝕀‖_max`.
    pub fn purity_error(&self) -> f64 {
        let m = self.n_majoranas();
        let p = &self.gamma * self.gamma.transpose();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub fn is_pure(&self) -> bool {
        self.purity_error() <= 1e-10
    }

    /// Expectation of a monomial in this state (zero for odd degree).
    pub fn expectation(&self, m: &MajoranaMonomial) -> Result<Complex64> {
        if m.n_majoranas() != self.n_majoranas() {
            return Err(Error::ModeMismatch {
                left: self.n_majoranas(),
                right: m.n_majoranas(),
            });
        }
        let idx: Vec<usize> = m.indices().iter().map(|i| i - 1).collect();
        let q = idx.len();
        if q % 2 == 1 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let sub: Vec<f64> = idx
            .iter()
            .flat_map(|&a| idx.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.gamma[(a, b)])
            .collect();
        // ⟨γ_I⟩ = (−i)^{q/2} Pf(Γ[I])
        let scalar = i_pow(m.phase_quarter()) * i_pow((3 * (q / 2) % 4) as u8);
        Ok(scalar * pfaffian(&sub, q))
    }
}

/// `Γ` with the first `pairs` blocks set to `[[0, 1], [−1, 0]]`.
fn paired(n_majoranas: usize, pairs: usize) -> Mat<f64> {
    Mat::from_fn(n_majoranas, n_majoranas, |i, j| {
        if i / 2 != j / 2 || i / 2 >= pairs || i == j {
            0.0
        } else if i < j {
            1.0
        } else {
            -1.0
        }
    })
}

fn conjugate(r: &Mat<f64>, g: &Mat<f64>) -> Mat<f64> {
    r * g * r.transpose()
}

fn random_orthogonal(m: usize, rng: &mut ChaCha8Rng) -> Mat<f64> {
    let a = Mat::<f64>::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    a.qr().compute_Q()
}

/// Pfaffian of a `k×k` antisymmetric row-major matrix (Parlett–Reid with pivoting).
pub fn pfaffian(a: &[f64], k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    if k == 4 {
        return a[1] * a[11] - a[2] * a[7] + a[3] * a[6];
    }
    let mut m = a.to_vec();
    let at = |i: usize, j: usize| i * k + j;
    let mut pf = 1.0;
    let mut col = 0;
    while col + 1 < k {
        let (piv, big) = (col + 1..k)
            .map(|r| (r, m[at(r, col)].abs()))
            .fold((col + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if big == 0.0 {
            return 0.0;
        }
        if piv != col + 1 {
            for c in 0..k {
                m.swap(at(piv, c), at(col + 1, c));
            }
            for r in 0..k {
                m.swap(at(r, piv), at(r, col + 1));
            }
            pf = -pf;
        }
        let pivot = m[at(col, col + 1)];
        pf *= pivot;
        for r in col + 2..k {
            let f = m[at(col, r)] / pivot;
            for c in 0..k {
                m[at(r, c)] -= f * m[at(col + 1, c)];
            }
            for c in 0..k {
                m[at(c, r)] -= f * m[at(c, col + 1)];
            }
        }
        col += 2;
    }
    pf
}

fn require_quartic(h: &SykInstance) -> Result<()> {
    if h.q != 4 {
        return Err(Error::InvalidDegree {
            q: h.q,
            reason: "Gaussian energies are implemented for q = 4".into(),
        });
    }
    Ok(())
}

fn quad(m: &MajoranaMonomial) -> [usize; 4] {
    let idx = m.indices();
    [idx[0] - 1, idx[1] - 1, idx[2] - 1, idx[3] - 1]
}

fn energy_unchecked(g: &Mat<f64>, h: &SykInstance) -> f64 {
    h.terms
        .iter()
        .map(|t| {
            let [a, b, c, d] = quad(&t.monomial);
            t.coeff * (g[(a, b)] * g[(c, d)] - g[(a, c)] * g[(b, d)] + g[(a, d)] * g[(b, c)])
        })
        .sum()
}

/// `Tr(ρ_Γ H) = Σ coeff · Pf(Γ[I])`.
pub fn energy_wick(g: &CovarianceMatrix, h: &SykInstance) -> Result<f64> {
    require_quartic(h)?;
    if g.n_majoranas() != h.n_majoranas() {
        return Err(Error::ModeMismatch {
            left: g.n_majoranas(),
            right: h.n_majoranas(),
        });
    }
    Ok(energy_unchecked(&g.gamma, h))
}

/// Antisymmetric `D` with `D_ab = ∂E/∂Γ_ab` for `a < b`.
pub fn energy_gradient(g: &CovarianceMatrix, h: &SykInstance) -> Result<Mat<f64>> {
    energy_wick(g, h)?;
    Ok(gradient_unchecked(&g.gamma, h))
}

fn gradient_unchecked(g: &Mat<f64>, h: &SykInstance) -> Mat<f64> {
    let m = g.nrows();
    let mut d = Mat::<f64>::zeros(m, m);
    for t in &h.terms {
        let [a, b, c, e] = quad(&t.monomial);
        let w = t.coeff;
        let parts = [
            (a, b, g[(c, e)]),
            (c, e, g[(a, b)]),
            (a, c, -g[(b, e)]),
            (b, e, -g[(a, c)]),
            (a, e, g[(b, c)]),
            (b, c, g[(a, e)]),
        ];
        for (i, j, v) in parts {
            d[(i, j)] += w * v;
            d[(j, i)] -= w * v;
        }
    }
    d
}

/// Dense density matrix `2^{-n} Π_j (𝕀 + i λ_j c_{2j−1} c_{2j})` of a pure state.
pub fn materialize_gaussian(g: &CovarianceMatrix, qubit_cap: usize) -> Result<DenseOperator> {
    if !g.is_pure() {
        return Err(Error::InvalidCovariance(format!(
            "state is not pure (‖ΓΓᵀ − 𝕀‖ = {:e})",
            g.purity_error()
        )));
    }
    let n = g.n_modes();
    if n > qubit_cap {
        return Err(Error::SizeCap { qubits: n, cap: qubit_cap });
    }
    let m = g.n_majoranas();
    let ig = Mat::<Complex64>::from_fn(m, m, |i, j| Complex64::new(0.0, g.gamma[(i, j)]));
    let eig = ig
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let wb: Vec<PauliString> = (1..=m).map(|i| PauliString::weyl_brauer(i, n)).collect();
    let mode_op = |col: &dyn Fn(usize) -> f64| {
        let mut op = DenseOperator::zeros(1 << n);
        for (i, p) in wb.iter().enumerate() {
            let c = col(i);
            if c != 0.0 {
                op.add_pauli(p, Complex64::new(c, 0.0));
            }
        }
        op
    };
    let dim = 1usize << n;
    let mut rho = DenseOperator::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
    // eigenvalues ascend: the last n columns carry λ = +1
    for k in m - n..m {
        let lambda = eig.S()[k].re;
        let u = eig.U();
        let s = std::f64::consts::SQRT_2;
        let c1 = mode_op(&|i| s * u[(i, k)].im);
        let c2 = mode_op(&|i| s * u[(i, k)].re);
        let factor = DenseOperator::identity(dim).add(&c1.matmul(&c2).scale(Complex64::new(0.0, lambda)));
        rho = rho.matmul(&factor);
    }
    Ok(rho)
}

/// `Γ_ij = i Tr(ρ γ_i γ_j)` for `i ≠ j`, recomputed from a density matrix.
pub fn covariance_of(rho: &DenseOperator) -> Result<CovarianceMatrix> {
    let n = rho.dim().trailing_zeros() as usize;
    let m = 2 * n;
    let wb: Vec<DenseOperator> = (1..=m)
        .map(|i| crate::algebra::weyl_brauer(i, n).and_then(|w| w.materialize()))
        .collect::<Result<_>>()?;
    let mut g = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let v = Complex64::new(0.0, 1.0) * rho.trace_product(&wb[i].matmul(&wb[j]));
                g[(i, j)] = v.re;
            }
        }
    }
    CovarianceMatrix::new(g)
}

#[derive(Clone, Debug)]
pub struct GaussianOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once `‖[Γ, D]‖_F` falls below this.
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for GaussianOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 400,
            grad_tol: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaussianOptResult {
    pub gamma_star: CovarianceMatrix,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_norm_final: f64,
    /// Runs that hit `max_iters` before the gradient tolerance.
    pub stalled_runs: usize,
}

struct Ascent {
    gamma: Mat<f64>,
    energy: f64,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    energies: Vec<f64>,
}

/// `e^{tG}` for antisymmetric `G`, through the eigendecomposition of `iG`.
struct RotationGenerator {
    vecs: Mat<Complex64>,
    freqs: Vec<f64>,
}

impl RotationGenerator {
    fn new(gen: &Mat<f64>) -> Result<Self> {
        let m = gen.nrows();
        let ig = Mat::<Complex64>::from_fn(m, m, |i, j| Complex64::new(0.0, gen[(i, j)]));
        let eig = ig
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        Ok(Self {
            vecs: eig.U().to_owned(),
            freqs: (0..m).map(|k| eig.S()[k].re).collect(),
        })
    }

    fn exp(&self, t: f64) -> Mat<f64> {
        let m = self.freqs.len();
        let scaled = Mat::<Complex64>::from_fn(m, m, |i, k| {
            self.vecs[(i, k)] * Complex64::from_polar(1.0, -t * self.freqs[k])
        });
        let full = &scaled * self.vecs.adjoint();
        Mat::from_fn(m, m, |i, j| full[(i, j)].re)
    }
}

fn commutator(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    a * b - b * a
}

fn frobenius(a: &Mat<f64>) -> f64 {
    a.norm_l2()
}

fn ascend(h: &SykInstance, start: Mat<f64>, opts: &GaussianOptions) -> Result<Ascent> {
    let mut gamma = start;
    let mut energy = energy_unchecked(&gamma, h);
    let mut energies = vec![energy];
    let mut step = 1.0;
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let d = gradient_unchecked(&gamma, h);
        let gen = commutator(&gamma, &d);
        grad_norm = frobenius(&gen);
        if grad_norm <= opts.grad_tol {
            converged = true;
            break;
        }
        let slope = 0.5 * grad_norm * grad_norm;
        let rot = RotationGenerator::new(&gen)?;
        let mut t = step * 2.0;
        let mut accepted = false;
        for _ in 0..60 {
            let q = rot.exp(t);
            let cand = conjugate(&q, &gamma);
            let e = energy_unchecked(&cand, h);
            if e >= energy + 1e-4 * t * slope {
                gamma = cand;
                energy = e;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            converged = true;
            break;
        }
        energies.push(energy);
    }
    Ok(Ascent {
        gamma,
        energy,
        iterations,
        grad_norm,
        converged,
        energies,
    })
}

/// Best pure-state Wick energy over seeded orthogonal starts, each tried in both orientation classes.
pub fn gaussian_maximize(h: &SykInstance, opts: &GaussianOptions) -> Result<GaussianOptResult> {
    require_quartic(h)?;
    let m = h.n_majoranas();
    let base = paired(m, m / 2);
    let mut flipped = base.clone();
    flipped[(0, 1)] = -1.0;
    flipped[(1, 0)] = 1.0;
    let starts: Vec<Mat<f64>> = (0..opts.restarts.max(1))
        .flat_map(|r| {
            let mut rng = stream_rng(opts.seed, Stream::GaussianStart, r as u64, 0);
            let q = random_orthogonal(m, &mut rng);
            [conjugate(&q, &base), conjugate(&q, &flipped)]
        })
        .collect();
    let runs: Vec<Ascent> = starts
        .into_par_iter()
        .map(|s| ascend(h, s, opts))
        .collect::<Result<_>>()?;
    let stalled_runs = runs.iter().filter(|r| !r.converged).count();
    if stalled_runs > 0 {
        debug!("gaussian_maximize: {stalled_runs} runs stopped at max_iters");
    }
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .into_iter()
        .max_by(|a, b| a.energy.total_cmp(&b.energy))
        .expect("at least one run");
    debug_assert!(best.energies.windows(2).all(|w| w[1] >= w[0]));
    let gamma_star = CovarianceMatrix::new(antisymmetrize(best.gamma))?;
    let energy = energy_unchecked(&gamma_star.gamma, h);
    Ok(GaussianOptResult {
        gamma_star,
        energy,
        iterations,
        gradient_norm_final: best.grad_norm,
        stalled_runs,
    })
}

/// Energy trace of a single ascent run, for monotonicity checks.
pub fn ascent_trace(h: &SykInstance, start: &CovarianceMatrix, opts: &GaussianOptions) -> Result<Vec<f64>> {
    require_quartic(h)?;
    Ok(ascend(h, start.gamma.clone(), opts)?.energies)
}

fn antisymmetrize(g: Mat<f64>) -> Mat<f64> {
    let m = g.nrows();
    Mat::from_fn(m, m, |i, j| 0.5 * (g[(i, j)] - g[(j, i)]))
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub sigma: CovarianceMatrix,
    pub energy: f64,
    /// Scale applied to the coupling block.
    pub scale: f64,
    pub coupling_norm: f64,
}

pub const WITNESS_C0: f64 = 1.0;
const WITNESS_EPS: f64 = 1e-9;

/// Constant-energy Gaussian witness: paired first half plus a scaled coupling block on the second half.
pub fn explicit_witness(h: &SykInstance) -> Result<Witness> {
    require_quartic(h)?;
    let n = h.n;
    if n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("witness needs even n, got {n}")));
    }
    let m = 2 * n;
    let g0 = paired(m, n / 2);
    let mut g1 = Mat::<f64>::zeros(m, m);
    for t in &h.terms {
        let [a, b, c, d] = quad(&t.monomial);
        // the paired half contributes only through g⁰_{2j,2j+1} = 1
        if b < n && c >= n && a % 2 == 0 && b == a + 1 {
            g1[(c, d)] += t.coupling;
            g1[(d, c)] -= t.coupling;
        }
    }
    let coupling_norm = g1
        .singular_values()
        .map_err(|e| Error::Linalg(format!("{e:?}")))?
        .first()
        .copied()
        .unwrap_or(0.0);
    let scale = (WITNESS_C0 / (n as f64 * h.p.sqrt())).min(1.0 / (coupling_norm + WITNESS_EPS));
    let sigma = CovarianceMatrix::new(Mat::from_fn(m, m, |i, j| g0[(i, j)] + scale * g1[(i, j)]))?;
    let energy = energy_unchecked(&sigma.gamma, h);
    Ok(Witness {
        sigma,
        energy,
        scale,
        coupling_norm,
    })
}

/// `λ_Gauss / λ_max`, clamped to `[0, 1 + 1e-6]`.
pub fn approx_factor(lambda_max: f64, lambda_gauss: f64) -> Result<f64> {
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda_max = {lambda_max} must be positive")));
    }
    let r = lambda_gauss / lambda_max;
    if !(0.0..=1.0 + 1e-6).contains(&r) {
        warn!("approximation factor {r} outside [0, 1]; clamping");
    }
    Ok(r.clamp(0.0, 1.0 + 1e-6))
}

/// Output record of `gaussian opt` / `gaussian witness`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussianReport {
    pub energy: f64,
    pub gamma: Vec<f64>,
    pub iterations: usize,
    pub method: String,
}
