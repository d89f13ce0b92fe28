use num_complex::Complex64;

use crate::algebra::{DenseOperator, MajoranaMonomial, PauliString, StateVector};
use crate::error::{Error, Result};

/// A real linear combination of Majorana monomials on a fixed register.
///
/// Terms are applied matrix-free through their Pauli images; the sum order is
/// the term order, so repeated matvecs are bit-identical.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    n_majoranas: usize,
    terms: Vec<(f64, MajoranaMonomial)>,
    paulis: Vec<PauliString>,
}

impl SparseHamiltonian {
    pub fn new(n_majoranas: usize, terms: Vec<(f64, MajoranaMonomial)>) -> Result<Self> {
        MajoranaMonomial::identity(n_majoranas)?;
        for (_, m) in &terms {
            if m.n_majoranas() != n_majoranas {
                return Err(Error::ModeMismatch {
                    left: n_majoranas,
                    right: m.n_majoranas(),
                });
            }
        }
        let paulis = terms.iter().map(|(_, m)| m.pauli()).collect();
        Ok(Self {
            n_majoranas,
            terms,
            paulis,
        })
    }

    pub fn empty(n_majoranas: usize) -> Result<Self> {
        Self::new(n_majoranas, Vec::new())
    }

    pub fn n_majoranas(&self) -> usize {
        self.n_majoranas
    }

    pub fn n_qubits(&self) -> usize {
        self.n_majoranas / 2
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn terms(&self) -> &[(f64, MajoranaMonomial)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(_, m)| m.is_hermitian())
    }

    pub fn negated(&self) -> Self {
        Self {
            n_majoranas: self.n_majoranas,
            terms: self.terms.iter().map(|&(c, m)| (-c, m)).collect(),
            paulis: self.paulis.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n_majoranas: self.n_majoranas,
            terms: self.terms.iter().map(|&(c, m)| (s * c, m)).collect(),
            paulis: self.paulis.clone(),
        }
    }

    /// Same operator on a larger register (acting as identity on the extra modes).
    pub fn embedded(&self, n_majoranas: usize) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|&(c, m)| m.embed(n_majoranas).map(|m| (c, m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_majoranas, terms)
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (&(c, _), p) in self.terms.iter().zip(&self.paulis) {
            p.apply_accumulate(Complex64::new(c, 0.0), v, out);
        }
    }

    pub fn apply_vector(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: v.dim(),
            });
        }
        let mut out = StateVector::zeros(self.dim());
        self.apply(v.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// `⟨v|H|v⟩` (real part; exact for Hermitian terms).
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .zip(&self.paulis)
            .map(|(&(c, _), p)| c * p.expectation(v).re)
            .sum()
    }

    pub fn materialize(&self, qubit_cap: usize) -> Result<DenseOperator> {
        if self.n_qubits() > qubit_cap {
            return Err(Error::SizeCap {
                qubits: self.n_qubits(),
                cap: qubit_cap,
            });
        }
        let mut op = DenseOperator::zeros(self.dim());
        for (&(c, _), p) in self.terms.iter().zip(&self.paulis) {
            op.add_pauli(p, Complex64::new(c, 0.0));
        }
        Ok(op)
    }
}
