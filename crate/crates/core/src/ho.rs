//! Exact small-register version of the ancilla-assisted variational state
//! `ρ_θ = e^{−θζ} ρ₀ e^{θζ}` for the two-color model.
//!
//! `ρ₀` pairs every `χ_j` with an ancilla `σ_j`; `ζ` couples each `τ_j` to its
//! ancilla. All quantities are dense matrices on the extended register, and the
//! energy sweep runs in the eigenbasis of the Hermitian generator `iζ`.

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{multiply, DenseOperator, MajoranaMonomial};
use crate::ensembles::{extract_two_color, SykInstance, TwoColorInstance, TwoColorRegister};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;

pub type ExtendedRegister = TwoColorRegister;

pub const HO_QUBIT_CAP: usize = 12;

fn check_cap(reg: &ExtendedRegister, cap: usize) -> Result<()> {
    if reg.n_qubits() > cap {
        return Err(Error::SizeCap {
            qubits: reg.n_qubits(),
            cap,
        });
    }
    Ok(())
}

/// `i σ_j χ_j` as a monomial on the extended register.
pub fn pair_monomial(reg: &ExtendedRegister, j: usize) -> MajoranaMonomial {
    let m = reg.n_majoranas();
    let sigma = MajoranaMonomial::new(m, &[reg.sigma(j)], 0).expect("sigma in range");
    let chi = MajoranaMonomial::new(m, &[reg.chi(j)], 0).expect("chi in range");
    multiply(&sigma, &chi).expect("same register").times_i_pow(1)
}

/// `ρ₀ = 2^{−N/2} Π_j (𝕀 + i σ_j χ_j)`, expanded over subsets of pairs.
pub fn build_rho0(reg: &ExtendedRegister, cap: usize) -> Result<DenseOperator> {
    check_cap(reg, cap)?;
    let pairs: Vec<MajoranaMonomial> = (1..=reg.n2).map(|j| pair_monomial(reg, j)).collect();
    let dim = 1usize << reg.n_qubits();
    let mut rho = DenseOperator::zeros(dim);
    let weight = Complex64::new(1.0 / dim as f64, 0.0);
    for subset in 0u64..(1 << reg.n2) {
        let mut m = MajoranaMonomial::identity(reg.n_majoranas())?;
        for (k, pair) in pairs.iter().enumerate() {
            if subset >> k & 1 == 1 {
                m = multiply(&m, pair)?;
            }
        }
        rho.add_monomial(&m, weight)?;
    }
    Ok(rho)
}

/// `H' = (i/√n2) Σ_j σ_j χ_j`, the ancilla coupling maximized by `ρ₀`.
pub fn ancilla_coupling(reg: &ExtendedRegister) -> SparseHamiltonian {
    let c = (reg.n2 as f64).sqrt().recip();
    SparseHamiltonian::new(
        reg.n_majoranas(),
        (1..=reg.n2).map(|j| (c, pair_monomial(reg, j))).collect(),
    )
    .expect("pairs live on the register")
}

/// Terms `(coeff, i φ_S σ_j)` of the generator `ζ = Σ_j σ_j τ_j`.
///
/// With this ordering `Tr(ρ₀ [ζ, H²])` equals the positive coefficient sum
/// `(2/√n2) Σ coeff²`; the reversed product `τ_j σ_j` is `−ζ`.
pub fn zeta_terms(inst: &TwoColorInstance) -> Vec<(f64, MajoranaMonomial)> {
    let reg = inst.register;
    let m = reg.n_majoranas();
    let mut out = Vec::with_capacity(inst.term_count());
    for (j0, tau) in inst.tau_terms.iter().enumerate() {
        let sigma = MajoranaMonomial::new(m, &[reg.sigma(j0 + 1)], 0).expect("sigma in range");
        for t in tau {
            out.push((t.coeff, multiply(&sigma, &t.phi).expect("same register")));
        }
    }
    out
}

/// Dense anti-Hermitian `ζ`.
pub fn build_zeta(inst: &TwoColorInstance, cap: usize) -> Result<DenseOperator> {
    check_cap(&inst.register, cap)?;
    let mut z = DenseOperator::zeros(1 << inst.register.n_qubits());
    for (c, m) in zeta_terms(inst) {
        z.add_monomial(&m, Complex64::new(c, 0.0))?;
    }
    Ok(z)
}

/// Closed form of `Tr(ρ₀ [ζ, H²])`: `(2/√n2) Σ_{j,S} coeff²`. No size cap.
pub fn single_commutator_closed_form(inst: &TwoColorInstance) -> f64 {
    let sum: f64 = inst.tau_terms.iter().flatten().map(|t| t.coeff * t.coeff).sum();
    2.0 * sum / (inst.n2() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleCommutator {
    /// `Tr(ρ₀ [ζ, H²])` from dense matrices.
    pub dense: f64,
    /// The coefficient sum.
    pub closed_form: f64,
}

impl SingleCommutator {
    pub fn discrepancy(&self) -> f64 {
        (self.dense - self.closed_form).abs()
    }
}

/// Dense `ρ₀`, `ζ`, `H²` plus the eigendecomposition of `iζ`.
pub struct HoSystem {
    pub register: ExtendedRegister,
    pub rho0: DenseOperator,
    pub zeta: DenseOperator,
    pub hamiltonian: DenseOperator,
    freqs: Vec<f64>,
    vecs: Mat<Complex64>,
    rho_eig: Mat<Complex64>,
    ham_eig: Mat<Complex64>,
}

impl HoSystem {
    pub fn new(inst: &TwoColorInstance, cap: usize) -> Result<Self> {
        let h = inst.hamiltonian().materialize(cap)?;
        Self::with_hamiltonian(inst, h, cap)
    }

    /// Same `ρ₀` and `ζ`, but energies measured against an arbitrary operator on the register.
    pub fn with_hamiltonian(inst: &TwoColorInstance, hamiltonian: DenseOperator, cap: usize) -> Result<Self> {
        let register = inst.register;
        let rho0 = build_rho0(&register, cap)?;
        let zeta = build_zeta(inst, cap)?;
        if hamiltonian.dim() != rho0.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho0.dim(),
                actual: hamiltonian.dim(),
            });
        }
        let k = zeta.scale(Complex64::new(0.0, 1.0));
        let eig = k
            .mat()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let vecs = eig.U().to_owned();
        let freqs = (0..rho0.dim()).map(|a| eig.S()[a].re).collect();
        let rho_eig = vecs.adjoint() * rho0.mat() * &vecs;
        let ham_eig = vecs.adjoint() * hamiltonian.mat() * &vecs;
        Ok(Self {
            register,
            rho0,
            zeta,
            hamiltonian,
            freqs,
            vecs,
            rho_eig,
            ham_eig,
        })
    }

    /// `e^{−θζ} = e^{iθ(iζ)}`.
    pub fn propagator(&self, theta: f64) -> DenseOperator {
        let d = self.freqs.len();
        let scaled = Mat::<Complex64>::from_fn(d, d, |i, k| {
            self.vecs[(i, k)] * Complex64::from_polar(1.0, theta * self.freqs[k])
        });
        DenseOperator::from_mat(&scaled * self.vecs.adjoint()).expect("power-of-two dimension")
    }

    pub fn rho_theta(&self, theta: f64) -> DenseOperator {
        let u = self.propagator(theta);
        u.matmul(&self.rho0).matmul(&u.adjoint())
    }

    /// `Tr(ρ_θ H)`.
    pub fn energy(&self, theta: f64) -> f64 {
        let d = self.freqs.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                let r = self.rho_eig[(a, b)];
                if r.norm_sqr() == 0.0 {
                    continue;
                }
                let phase = Complex64::from_polar(1.0, theta * (self.freqs[a] - self.freqs[b]));
                acc += phase * r * self.ham_eig[(b, a)];
            }
        }
        acc.re
    }

    /// `Tr(ρ₀ [ζ, H])` from the dense matrices.
    pub fn single_commutator(&self) -> f64 {
        self.rho0.trace_product(&self.zeta.commutator(&self.hamiltonian)).re
    }

    /// `‖[ζ, [ζ, H]]‖_op`.
    pub fn double_commutator_norm(&self) -> Result<f64> {
        let inner = self.zeta.commutator(&self.hamiltonian);
        self.zeta.commutator(&inner).operator_norm()
    }
}

pub fn rho_theta_energy(inst: &TwoColorInstance, theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("theta = {theta} is not finite")));
    }
    Ok(HoSystem::new(inst, HO_QUBIT_CAP)?.energy(theta))
}

pub fn single_commutator_value(inst: &TwoColorInstance) -> Result<SingleCommutator> {
    let sys = HoSystem::new(inst, HO_QUBIT_CAP)?;
    Ok(SingleCommutator {
        dense: sys.single_commutator(),
        closed_form: single_commutator_closed_form(inst),
    })
}

pub fn double_commutator_norm(inst: &TwoColorInstance) -> Result<f64> {
    HoSystem::new(inst, HO_QUBIT_CAP)?.double_commutator_norm()
}

/// `0, step, 2·step, …` up to `theta_max` inclusive.
pub fn theta_grid(theta_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(theta_max >= 0.0) || !theta_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta grid needs step > 0 and finite theta_max >= 0 (got {theta_max}, {step})"
        )));
    }
    let count = (theta_max / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| k as f64 * step).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoSweepResult {
    pub grid: Vec<f64>,
    pub energies: Vec<f64>,
    pub best_theta: f64,
    pub best_energy: f64,
    pub single_commutator: f64,
    pub double_commutator_norm: f64,
    /// Grid points where `E(θ) < θS − θ²D − 1e-8`.
    pub bound_violations: Vec<f64>,
}

impl HoSweepResult {
    pub fn lower_bound(&self, theta: f64) -> f64 {
        theta * self.single_commutator - theta * theta * self.double_commutator_norm
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,energy\n");
        for (t, e) in self.grid.iter().zip(&self.energies) {
            s.push_str(&format!("{t},{e}\n"));
        }
        s
    }
}

pub fn theta_sweep(inst: &TwoColorInstance, grid: &[f64]) -> Result<HoSweepResult> {
    let sys = HoSystem::new(inst, HO_QUBIT_CAP)?;
    sweep_system(&sys, grid)
}

pub fn sweep_system(sys: &HoSystem, grid: &[f64]) -> Result<HoSweepResult> {
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("theta grid must be non-empty and finite".into()));
    }
    let energies: Vec<f64> = grid.par_iter().map(|&t| sys.energy(t)).collect();
    let s = sys.single_commutator();
    let d = sys.double_commutator_norm()?;
    let (best_idx, _) = energies
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &e)| if e > acc.1 { (i, e) } else { acc });
    let bound_violations = grid
        .iter()
        .zip(&energies)
        .filter(|(&t, &e)| e < t * s - t * t * d - 1e-8)
        .map(|(&t, _)| t)
        .collect();
    Ok(HoSweepResult {
        grid: grid.to_vec(),
        best_theta: grid[best_idx],
        best_energy: energies[best_idx],
        energies,
        single_commutator: s,
        double_commutator_norm: d,
        bound_violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub total: f64,
    pub c3: f64,
    pub two_color_part: f64,
    pub remainder_part: f64,
}

impl ReductionCheck {
    pub fn error(&self) -> f64 {
        (self.total - self.c3 * self.two_color_part - self.remainder_part).abs()
    }
}

/// Evaluates `Tr(ρ H)`, `Tr(ρ H²)` and `Tr(ρ H_T̄)` separately on `ρ = ρ_θ` of the
/// two-color instance extracted from `h` with split `n1`.
pub fn reduction_consistency(h: &SykInstance, n1: usize, theta: f64) -> Result<ReductionCheck> {
    let split = extract_two_color(h, n1)?;
    let reg = split.two_color.register;
    let sys = HoSystem::new(&split.two_color, HO_QUBIT_CAP)?;
    let rho = sys.rho_theta(theta);
    let full = h.hamiltonian().embedded(reg.n_majoranas())?.materialize(HO_QUBIT_CAP)?;
    let rest = split.t_bar_hamiltonian(reg.n_majoranas())?.materialize(HO_QUBIT_CAP)?;
    Ok(ReductionCheck {
        total: rho.trace_product(&full).re,
        c3: split.c3,
        two_color_part: rho.trace_product(&sys.hamiltonian).re,
        remainder_part: rho.trace_product(&rest).re,
    })
}
