//! Majorana monomials with exact quarter-phase arithmetic.
//!
//! A monomial `i^k γ_{i_1} ⋯ γ_{i_q}` is stored as a 64-bit support mask plus
//! the integer `k mod 4`. Products, commutation tests and the Jordan–Wigner
//! (Weyl–Brauer) image as a Pauli string are all computed on the bitmasks, so
//! no complex scalar ever enters the symbolic layer.
//!
//! Majorana indices are 1-based throughout the public API. Qubit `k` of the
//! Weyl–Brauer representation is the `k`-th tensor factor from the left, which
//! is bit `n - k` of a computational basis index.

use std::fmt;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default limit on dense materialization (16384-dimensional operators).
pub const DEFAULT_DENSE_QUBIT_CAP: usize = 14;

/// Largest number of Majorana modes a monomial can address.
pub const MAX_MAJORANAS: usize = 64;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k` as a complex number.
pub fn i_pow(k: u8) -> Complex64 {
    I_POWERS[(k & 3) as usize]
}

/// Multiplies `z` by `i^k` without rounding.
#[inline]
fn rotate(z: Complex64, k: u8) -> Complex64 {
    match k & 3 {
        0 => z,
        1 => Complex64::new(-z.im, z.re),
        2 => Complex64::new(-z.re, -z.im),
        _ => Complex64::new(z.im, -z.re),
    }
}

fn check_mode_count(n_majoranas: usize) -> Result<()> {
    if n_majoranas == 0 || n_majoranas % 2 != 0 || n_majoranas > MAX_MAJORANAS {
        return Err(Error::InvalidModeCount(n_majoranas));
    }
    Ok(())
}

/// A signed product `i^phase · γ_I` of distinct Majorana operators.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MajoranaMonomial {
    n_majoranas: u8,
    support: u64,
    phase: u8,
}

impl MajoranaMonomial {
    /// The identity operator on `n_majoranas` modes.
    pub fn identity(n_majoranas: usize) -> Result<Self> {
        check_mode_count(n_majoranas)?;
        Ok(Self {
            n_majoranas: n_majoranas as u8,
            support: 0,
            phase: 0,
        })
    }

    /// Builds `i^phase_quarter · γ_{indices}`; indices must be strictly increasing.
    pub fn new(n_majoranas: usize, indices: &[usize], phase_quarter: u8) -> Result<Self> {
        check_mode_count(n_majoranas)?;
        let mut support = 0u64;
        let mut prev = 0usize;
        for &i in indices {
            if i == 0 || i > n_majoranas {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    max: n_majoranas,
                });
            }
            if i <= prev {
                return Err(Error::UnsortedSupport(indices.to_vec()));
            }
            prev = i;
            support |= 1u64 << (i - 1);
        }
        Ok(Self {
            n_majoranas: n_majoranas as u8,
            support,
            phase: phase_quarter & 3,
        })
    }

    /// `i^{⌊q/2⌋} γ_I`, the Hermitian normalization used for Hamiltonian terms.
    ///
    /// For even `q` this is the `i^{q/2}` prefactor of the SYK-q sum; for
    /// `q = 3` it is the `i` folded into each two-color `τ_j` term.
    pub fn hermitian(n_majoranas: usize, indices: &[usize]) -> Result<Self> {
        Self::new(n_majoranas, indices, ((indices.len() / 2) % 4) as u8)
    }

    pub fn n_majoranas(&self) -> usize {
        self.n_majoranas as usize
    }

    pub fn n_qubits(&self) -> usize {
        self.n_majoranas as usize / 2
    }

    pub fn support_bits(&self) -> u64 {
        self.support
    }

    pub fn phase_quarter(&self) -> u8 {
        self.phase
    }

    pub fn degree(&self) -> usize {
        self.support.count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support == 0 && self.phase == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= 1 && index <= self.n_majoranas() && self.support & (1u64 << (index - 1)) != 0
    }

    /// Support as a strictly increasing list of 1-based indices.
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree());
        let mut bits = self.support;
        while bits != 0 {
            out.push(bits.trailing_zeros() as usize + 1);
            bits &= bits - 1;
        }
        out
    }

    pub fn with_phase(self, phase_quarter: u8) -> Self {
        Self {
            phase: phase_quarter & 3,
            ..self
        }
    }

    /// Multiplies the global phase by `i^k`.
    pub fn times_i_pow(self, k: u8) -> Self {
        Self {
            phase: (self.phase + k) & 3,
            ..self
        }
    }

    /// Same support on a larger register (Weyl–Brauer images embed as `M ⊗ 𝕀`).
    pub fn embed(self, n_majoranas: usize) -> Result<Self> {
        check_mode_count(n_majoranas)?;
        if n_majoranas < self.n_majoranas() {
            return Err(Error::ModeMismatch {
                left: self.n_majoranas(),
                right: n_majoranas,
            });
        }
        Ok(Self {
            n_majoranas: n_majoranas as u8,
            ..self
        })
    }

    /// `γ_I† = (-1)^{q(q-1)/2} γ_I`, so `i^k γ_I` is Hermitian iff `k ≡ q(q-1)/2 (mod 2)`.
    pub fn is_hermitian(&self) -> bool {
        let q = self.degree();
        (self.phase as usize + q * q.saturating_sub(1) / 2) % 2 == 0
    }

    /// The operator as a phased Pauli string `i^c X^x Z^z`.
    pub fn pauli(&self) -> PauliString {
        let n = self.n_qubits();
        let mut acc = PauliString {
            n_qubits: n,
            x: 0,
            z: 0,
            phase: self.phase,
        };
        for i in self.indices() {
            acc = acc.compose(&PauliString::weyl_brauer(i, n));
        }
        acc
    }

    pub fn materialize(&self) -> Result<DenseOperator> {
        self.materialize_capped(DEFAULT_DENSE_QUBIT_CAP)
    }

    pub fn materialize_capped(&self, qubit_cap: usize) -> Result<DenseOperator> {
        let n = self.n_qubits();
        if n > qubit_cap {
            return Err(Error::SizeCap {
                qubits: n,
                cap: qubit_cap,
            });
        }
        let mut op = DenseOperator::zeros(1 << n);
        op.add_pauli(&self.pauli(), Complex64::new(1.0, 0.0));
        Ok(op)
    }
}

impl fmt::Debug for MajoranaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i^{}·γ{:?}/{}", self.phase, self.indices(), self.n_majoranas)
    }
}

/// The `i`-th Majorana operator on `n` fermionic modes (`2n` Majoranas).
pub fn weyl_brauer(i: usize, n: usize) -> Result<MajoranaMonomial> {
    MajoranaMonomial::new(2 * n, &[i], 0)
}

fn same_modes(a: &MajoranaMonomial, b: &MajoranaMonomial) -> Result<()> {
    if a.n_majoranas != b.n_majoranas {
        return Err(Error::ModeMismatch {
            left: a.n_majoranas(),
            right: b.n_majoranas(),
        });
    }
    Ok(())
}

/// Exact product `a · b`.
///
/// Bringing `γ_A γ_B` into sorted order moves every `b ∈ B` left past the
/// elements of `A` larger than it; each transposition contributes a sign and
/// coinciding pairs annihilate to `𝕀`.
pub fn multiply(a: &MajoranaMonomial, b: &MajoranaMonomial) -> Result<MajoranaMonomial> {
    same_modes(a, b)?;
    let mut swaps = 0u32;
    let mut bits = b.support;
    while bits != 0 {
        let pos = bits.trailing_zeros();
        let above = if pos == 63 { 0 } else { !0u64 << (pos + 1) };
        swaps += (a.support & above).count_ones();
        bits &= bits - 1;
    }
    let phase = a.phase + b.phase + 2 * (swaps & 1) as u8;
    Ok(MajoranaMonomial {
        n_majoranas: a.n_majoranas,
        support: a.support ^ b.support,
        phase: phase & 3,
    })
}

/// Whether `ab + ba = 0`: true iff `|A|·|B| − |A ∩ B|` is odd.
pub fn anticommutes(a: &MajoranaMonomial, b: &MajoranaMonomial) -> Result<bool> {
    same_modes(a, b)?;
    Ok(anticommute_bits(a.support, b.support))
}

#[inline]
pub(crate) fn anticommute_bits(a: u64, b: u64) -> bool {
    let parity = a.count_ones() * b.count_ones() + (a & b).count_ones();
    parity % 2 == 1
}

pub fn materialize(m: &MajoranaMonomial) -> Result<DenseOperator> {
    m.materialize()
}

/// `out += scale · m · v` without forming the matrix.
pub fn apply_monomial(
    m: &MajoranaMonomial,
    v: &StateVector,
    scale: f64,
    out: &mut StateVector,
) -> Result<()> {
    let dim = 1usize << m.n_qubits();
    for len in [v.dim(), out.dim()] {
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: len,
            });
        }
    }
    m.pauli()
        .apply_accumulate(Complex64::new(scale, 0.0), v.as_slice(), out.as_mut_slice());
    Ok(())
}

/// `i^phase · X^x · Z^z` on `n_qubits` qubits (X part applied last).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub n_qubits: usize,
    pub x: u64,
    pub z: u64,
    pub phase: u8,
}

impl PauliString {
    /// Weyl–Brauer image of `γ_i`: `Z ⊗ ⋯ ⊗ Z ⊗ (X or Y) ⊗ 𝕀 ⊗ ⋯`.
    pub fn weyl_brauer(i: usize, n_qubits: usize) -> Self {
        let k = (i + 1) / 2;
        let bit = 1u64 << (n_qubits - k);
        // Z on qubits 1..k-1, i.e. the bits above `bit`.
        // n_qubits <= 32, so none of these shifts overflow
        let all = (1u64 << n_qubits) - 1;
        let z_prefix = all & !((1u64 << (n_qubits - k + 1)) - 1);
        if i % 2 == 1 {
            Self {
                n_qubits,
                x: bit,
                z: z_prefix,
                phase: 0,
            }
        } else {
            // Y = i X Z
            Self {
                n_qubits,
                x: bit,
                z: z_prefix | bit,
                phase: 1,
            }
        }
    }

    /// `self · other`, using `Z^z X^x = (-1)^{z·x} X^x Z^z`.
    pub fn compose(&self, other: &Self) -> Self {
        let commute_sign = ((self.z & other.x).count_ones() & 1) as u8;
        Self {
            n_qubits: self.n_qubits,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * commute_sign) & 3,
        }
    }

    /// Image of basis state `b`: returns `(b ⊕ x, quarter phase)`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (usize, u8) {
        let sign = (((self.z & b as u64).count_ones() & 1) * 2) as u8;
        (b ^ self.x as usize, (self.phase + sign) & 3)
    }

    /// `out += coeff · P · v`.
    pub fn apply_accumulate(&self, coeff: Complex64, v: &[Complex64], out: &mut [Complex64]) {
        let x = self.x as usize;
        let z = self.z;
        let c = rotate(coeff, self.phase);
        let neg = -c;
        for (b, &amp) in v.iter().enumerate() {
            let w = if (z & b as u64).count_ones() & 1 == 0 { c } else { neg };
            out[b ^ x] += w * amp;
        }
    }

    /// `⟨v|P|v⟩`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let x = self.x as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &amp) in v.iter().enumerate() {
            let term = v[b ^ x].conj() * amp;
            if (self.z & b as u64).count_ones() & 1 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        rotate(acc, self.phase)
    }
}

/// Explicit `dim × dim` complex operator.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    mat: Mat<Complex64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim, dim),
        }
    }

    pub fn from_mat(mat: Mat<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || !mat.nrows().is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "dense operator must be square with power-of-two dimension, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<Complex64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<Complex64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// `self += coeff · P`.
    pub fn add_pauli(&mut self, p: &PauliString, coeff: Complex64) {
        for b in 0..self.dim() {
            let (row, k) = p.apply_to_basis(b);
            self.mat[(row, b)] += rotate(coeff, k);
        }
    }

    pub fn add_monomial(&mut self, m: &MajoranaMonomial, coeff: Complex64) -> Result<()> {
        let dim = 1usize << m.n_qubits();
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: dim,
            });
        }
        self.add_pauli(&m.pauli(), coeff);
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * s),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// `Tr(self · other)` in O(dim²).
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            for i in 0..d {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                worst = worst.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn matvec(&self, v: &StateVector) -> StateVector {
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for j in 0..d {
            let vj = v.as_slice()[j];
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.mat[(i, j)] * vj;
            }
        }
        StateVector::from_vec(out)
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.mat
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        let s = self
            .mat
            .singular_values()
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        Ok(s.first().copied().unwrap_or(0.0))
    }
}

/// Complex amplitude vector of dimension `2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_vec(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kron(a: &[[Complex64; 2]; 2], b: &Mat<Complex64>) -> Mat<Complex64> {
        let d = b.nrows();
        Mat::from_fn(2 * d, 2 * d, |i, j| a[i / d][j / d] * b[(i % d, j % d)])
    }

    /// Weyl–Brauer matrices built by explicit Kronecker products, independent of `PauliString`.
    fn wb_dense(i: usize, n: usize) -> Mat<Complex64> {
        let x = [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let y = [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]];
        let z = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]];
        let id = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
        let k = (i + 1) / 2;
        let mut acc = Mat::<Complex64>::identity(1, 1);
        // build from the rightmost factor inwards
        for qubit in (1..=n).rev() {
            let f = if qubit < k {
                &z
            } else if qubit == k {
                if i % 2 == 1 {
                    &x
                } else {
                    &y
                }
            } else {
                &id
            };
            acc = kron(f, &acc);
        }
        acc
    }

    fn dense_monomial(m: &MajoranaMonomial) -> Mat<Complex64> {
        let n = m.n_qubits();
        let mut acc = Mat::<Complex64>::identity(1 << n, 1 << n);
        for i in m.indices() {
            acc = &acc * &wb_dense(i, n);
        }
        let ph = i_pow(m.phase_quarter());
        Mat::from_fn(1 << n, 1 << n, |r, s| acc[(r, s)] * ph)
    }

    fn mat_eq(a: &Mat<Complex64>, b: &Mat<Complex64>) -> bool {
        a.nrows() == b.nrows()
            && (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| (a[(i, j)] - b[(i, j)]).norm() == 0.0))
    }

    #[test]
    fn weyl_brauer_small_cases() {
        let g1 = weyl_brauer(1, 2).unwrap().materialize().unwrap();
        assert!(mat_eq(g1.mat(), &wb_dense(1, 2)));
        // X ⊗ I: |00> -> |10>
        assert_eq!(g1.get(2, 0), c(1., 0.));
        let g4 = weyl_brauer(4, 2).unwrap().materialize().unwrap();
        assert!(mat_eq(g4.mat(), &wb_dense(4, 2)));
        // Z ⊗ Y: |00> -> i|01>
        assert_eq!(g4.get(1, 0), c(0., 1.));
        assert!(matches!(
            weyl_brauer(5, 2),
            Err(Error::IndexOutOfRange { index: 5, max: 4 })
        ));
        let x = weyl_brauer(1, 1).unwrap().materialize().unwrap();
        assert_eq!(x.get(0, 1), c(1., 0.));
        assert_eq!(x.get(1, 0), c(1., 0.));
        assert_eq!(x.get(0, 0), c(0., 0.));
    }

    #[test]
    fn every_weyl_brauer_matches_kronecker_oracle() {
        for n in 1..=5 {
            for i in 1..=2 * n {
                let m = weyl_brauer(i, n).unwrap().materialize().unwrap();
                assert!(mat_eq(m.mat(), &wb_dense(i, n)), "γ_{i} at n={n}");
            }
        }
    }

    #[test]
    fn products_from_oracle() {
        let a = MajoranaMonomial::new(4, &[1, 2], 0).unwrap();
        let b = MajoranaMonomial::new(4, &[2, 3], 0).unwrap();
        let p = multiply(&a, &b).unwrap();
        assert_eq!(p.indices(), vec![1, 3]);
        assert_eq!(p.phase_quarter(), 0);
        let dense = &dense_monomial(&a) * &dense_monomial(&b);
        assert!(mat_eq(&dense, &dense_monomial(&p)));

        let a = MajoranaMonomial::new(6, &[1, 2, 3, 4], 0).unwrap();
        let b = MajoranaMonomial::new(6, &[3, 4, 5, 6], 0).unwrap();
        let p = multiply(&a, &b).unwrap();
        assert_eq!(p.indices(), vec![1, 2, 5, 6]);
        let dense = &dense_monomial(&a) * &dense_monomial(&b);
        assert!(mat_eq(&dense, &dense_monomial(&p)));
        // γ3γ4γ3γ4 = -1 and the pair moves past an even block: sign -1
        assert_eq!(p.phase_quarter(), 2);

        let g1 = weyl_brauer(1, 2).unwrap();
        assert!(multiply(&g1, &g1).unwrap().is_identity());
    }

    #[test]
    fn anticommutation_examples() {
        let g1 = weyl_brauer(1, 2).unwrap();
        let g2 = weyl_brauer(2, 2).unwrap();
        assert!(anticommutes(&g1, &g2).unwrap());
        let a = MajoranaMonomial::new(6, &[1, 2, 3, 4], 0).unwrap();
        let b = MajoranaMonomial::new(6, &[1, 2, 5, 6], 0).unwrap();
        assert!(!anticommutes(&a, &b).unwrap());
        let a = MajoranaMonomial::new(8, &[1, 2, 3, 4], 0).unwrap();
        let b = MajoranaMonomial::new(8, &[4, 5, 6, 7], 0).unwrap();
        assert!(anticommutes(&a, &b).unwrap());
        let da = dense_monomial(&a);
        let db = dense_monomial(&b);
        let anti = &(&da * &db) + &(&db * &da);
        assert!(mat_eq(&anti, &Mat::zeros(16, 16)));
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let a = weyl_brauer(1, 2).unwrap();
        let b = weyl_brauer(1, 3).unwrap();
        assert!(matches!(multiply(&a, &b), Err(Error::ModeMismatch { .. })));
        assert!(matches!(anticommutes(&a, &b), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn hermitian_canonical_quartic_squares_to_identity() {
        let m = MajoranaMonomial::hermitian(4, &[1, 2, 3, 4]).unwrap();
        assert_eq!(m.phase_quarter(), 2);
        assert!(m.is_hermitian());
        let d = m.materialize().unwrap();
        assert!(d.is_hermitian(0.0));
        assert_eq!(d.matmul(&d).max_abs_diff(&DenseOperator::identity(4)), 0.0);
    }

    #[test]
    fn hermiticity_rule_matches_materialization() {
        for q in 0..=6usize {
            for phase in 0..4u8 {
                let idx: Vec<usize> = (1..=q).collect();
                let m = MajoranaMonomial::new(6, &idx, phase).unwrap();
                let d = m.materialize().unwrap();
                assert_eq!(m.is_hermitian(), d.is_hermitian(0.0), "q={q} phase={phase}");
            }
        }
    }

    #[test]
    fn identity_materializes_to_identity() {
        let id = MajoranaMonomial::identity(6).unwrap();
        assert_eq!(
            id.materialize().unwrap().max_abs_diff(&DenseOperator::identity(8)),
            0.0
        );
    }

    #[test]
    fn dense_cap_enforced() {
        let m = weyl_brauer(1, 15).unwrap();
        assert!(matches!(
            m.materialize(),
            Err(Error::SizeCap { qubits: 15, cap: 14 })
        ));
        assert!(m.materialize_capped(2).is_err());
    }

    #[test]
    fn apply_monomial_examples() {
        let id = MajoranaMonomial::identity(4).unwrap();
        let v = StateVector::from_vec(vec![c(1., 2.), c(-0.5, 0.), c(0., 3.), c(0.25, -1.)]);
        let mut out = StateVector::zeros(4);
        apply_monomial(&id, &v, 1.0, &mut out).unwrap();
        assert_eq!(out, v);

        let g1 = weyl_brauer(1, 2).unwrap();
        let mut out = StateVector::zeros(4);
        apply_monomial(&g1, &StateVector::basis(4, 0), 1.0, &mut out).unwrap();
        let col: Vec<Complex64> = (0..4).map(|r| wb_dense(1, 2)[(r, 0)]).collect();
        assert_eq!(out.as_slice(), &col[..]);

        let mut bad = StateVector::zeros(8);
        assert!(apply_monomial(&g1, &v, 1.0, &mut bad).is_err());
    }

    #[test]
    fn invalid_constructions() {
        assert!(MajoranaMonomial::new(4, &[2, 1], 0).is_err());
        assert!(MajoranaMonomial::new(4, &[1, 1], 0).is_err());
        assert!(MajoranaMonomial::new(4, &[0], 0).is_err());
        assert!(MajoranaMonomial::new(3, &[1], 0).is_err());
        assert!(MajoranaMonomial::new(66, &[1], 0).is_err());
    }

    #[test]
    fn embedding_is_tensor_with_identity() {
        let m = MajoranaMonomial::new(4, &[1, 4], 1).unwrap();
        let big = m.embed(6).unwrap().materialize().unwrap();
        let small = m.materialize().unwrap();
        // qubit 3 is the least significant bit
        for r in 0..8 {
            for s in 0..8 {
                let expect = if r % 2 == s % 2 { small.get(r / 2, s / 2) } else { c(0., 0.) };
                assert_eq!(big.get(r, s), expect);
            }
        }
    }
}
