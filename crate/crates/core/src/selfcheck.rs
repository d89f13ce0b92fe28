//! Symbolic-vs-dense comparisons behind `syklab algebra check`.
//!
//! The dense side is built from explicit 2×2 Kronecker products, never from
//! [`PauliString`](crate::algebra::PauliString), so both paths are independent.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{anticommutes, i_pow, multiply, MajoranaMonomial};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Largest register the check will materialize.
pub const CHECK_MODE_CAP: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn kron2(a: &[[Complex64; 2]; 2], b: &Mat<Complex64>) -> Mat<Complex64> {
    let d = b.nrows();
    Mat::from_fn(2 * d, 2 * d, |i, j| a[i / d][j / d] * b[(i % d, j % d)])
}

/// `γ_i` on `n` modes: `Z` on earlier qubits, `X` (odd `i`) or `Y` (even `i`) on qubit `⌈i/2⌉`.
pub fn generator_matrix(i: usize, n: usize) -> Mat<Complex64> {
    let c = Complex64::new;
    let x = [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
    let y = [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]];
    let z = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]];
    let id = [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
    let k = i.div_ceil(2);
    let mut acc = Mat::<Complex64>::identity(1, 1);
    for qubit in (1..=n).rev() {
        let f = match qubit.cmp(&k) {
            std::cmp::Ordering::Less => &z,
            std::cmp::Ordering::Equal if i % 2 == 1 => &x,
            std::cmp::Ordering::Equal => &y,
            std::cmp::Ordering::Greater => &id,
        };
        acc = kron2(f, &acc);
    }
    acc
}

/// Ordered product of generator matrices times `i^phase`.
pub fn monomial_matrix(m: &MajoranaMonomial) -> Mat<Complex64> {
    let n = m.n_qubits();
    let d = 1usize << n;
    let mut acc = Mat::<Complex64>::identity(d, d);
    for i in m.indices() {
        acc = &acc * &generator_matrix(i, n);
    }
    let ph = i_pow(m.phase_quarter());
    Mat::from_fn(d, d, |r, s| acc[(r, s)] * ph)
}

fn exactly_equal(a: &Mat<Complex64>, b: &Mat<Complex64>) -> bool {
    a.nrows() == b.nrows() && (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| a[(i, j)] == b[(i, j)]))
}

fn is_zero(a: &Mat<Complex64>) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| a[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Uniformly random monomial on `2n` Majoranas (support and phase).
pub fn random_monomial(n: usize, seed: u64, case: u64) -> MajoranaMonomial {
    let mut rng = stream_rng(seed, Stream::RandomState, 0xa1, case);
    let m = 2 * n;
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let bits: u64 = rng.random::<u64>() & mask;
    let phase: u8 = rng.random_range(0..4);
    let idx: Vec<usize> = (0..m).filter(|b| bits >> b & 1 == 1).map(|b| b + 1).collect();
    MajoranaMonomial::new(m, &idx, phase).expect("valid random monomial")
}

/// Runs every comparison on `n` modes with `trials` random pairs.
pub fn algebra_self_check(n: usize, trials: usize, seed: u64) -> Result<Vec<CheckRow>> {
    if n == 0 || n > CHECK_MODE_CAP {
        return Err(Error::InvalidParameter(format!("algebra check needs 1 <= n <= {CHECK_MODE_CAP}, got {n}")));
    }
    let d = 1usize << n;
    let two = Complex64::new(2.0, 0.0);
    let gens: Vec<Mat<Complex64>> = (1..=2 * n).map(|i| generator_matrix(i, n)).collect();

    let mut clifford = CheckRow {
        name: "clifford relations",
        cases: 0,
        failures: 0,
    };
    for i in 0..2 * n {
        for j in 0..2 * n {
            let ac = &(&gens[i] * &gens[j]) + &(&gens[j] * &gens[i]);
            let want = Mat::from_fn(d, d, |r, s| if i == j && r == s { two } else { Complex64::new(0.0, 0.0) });
            clifford.cases += 1;
            if !exactly_equal(&ac, &want) {
                clifford.failures += 1;
            }
        }
    }

    let mut generators = CheckRow {
        name: "generator images",
        cases: 0,
        failures: 0,
    };
    for i in 1..=2 * n {
        generators.cases += 1;
        let sym = MajoranaMonomial::new(2 * n, &[i], 0)?.materialize_capped(CHECK_MODE_CAP)?;
        if !exactly_equal(sym.mat(), &gens[i - 1]) {
            generators.failures += 1;
        }
    }

    let mut products = CheckRow {
        name: "random products",
        cases: trials,
        failures: 0,
    };
    let mut commutation = CheckRow {
        name: "random (anti)commutation",
        cases: trials,
        failures: 0,
    };
    let mut hermitian = CheckRow {
        name: "hermitian canonical phase",
        cases: trials,
        failures: 0,
    };
    for t in 0..trials as u64 {
        let a = random_monomial(n, seed, 2 * t);
        let b = random_monomial(n, seed, 2 * t + 1);
        let (ma, mb) = (monomial_matrix(&a), monomial_matrix(&b));
        let ab = &ma * &mb;
        if !exactly_equal(&monomial_matrix(&multiply(&a, &b)?), &ab) {
            products.failures += 1;
        }
        let ba = &mb * &ma;
        let ok = if anticommutes(&a, &b)? {
            is_zero(&(&ab + &ba))
        } else {
            is_zero(&(&ab - &ba))
        };
        if !ok {
            commutation.failures += 1;
        }
        let h = monomial_matrix(&MajoranaMonomial::hermitian(2 * n, &a.indices())?);
        if !exactly_equal(&h, &h.adjoint().to_owned()) {
            hermitian.failures += 1;
        }
    }
    Ok(vec![clifford, generators, products, commutation, hermitian])
}
