//! Seeded sampling of SYK-q, sparse SYK-q and sparse two-color SYK instances.
//!
//! Index sets are visited in lexicographic order. Each set owns a fixed slot in
//! a counter-based stream holding one uniform (the Bernoulli keep test `u < p`)
//! and one standard normal (the coupling). Two consequences follow directly:
//! couplings of a given set are identical for every `p`, and the kept set grows
//! monotonically with `p` for a fixed seed.

use itertools::Itertools;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::algebra::{multiply, MajoranaMonomial};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;
use crate::rng::{keep_and_coupling, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Syk,
    Ssyk,
    TwoColor,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Syk => "syk",
            Model::Ssyk => "ssyk",
            Model::TwoColor => "two-color",
        }
    }
}

/// `binom(n, k)` as a float (exact for every size used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

fn check_sparsity(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidSparsity(p));
    }
    Ok(())
}

/// Below `p_min = ε / n^{q-1}` most modes are isolated; we warn but still sample.
pub fn p_min(n: usize, q: usize, eps: f64) -> f64 {
    eps / (n as f64).powi(q as i32 - 1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SykTerm {
    /// `normalization · J_I`.
    pub coeff: f64,
    /// The standard-normal draw `J_I`.
    pub coupling: f64,
    /// Hermitian-canonical `i^{q/2} γ_I`.
    pub monomial: MajoranaMonomial,
}

#[derive(Clone, Debug)]
pub struct SykInstance {
    pub model: Model,
    pub n: usize,
    pub q: usize,
    pub p: f64,
    pub seed: u64,
    /// `binom(2n, q)^{-1/2} p^{-1/2}`.
    pub normalization: f64,
    pub terms: Vec<SykTerm>,
}

impl SykInstance {
    pub fn n_majoranas(&self) -> usize {
        2 * self.n
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn normalization_for(n: usize, q: usize, p: f64) -> f64 {
        (binomial(2 * n, q) * p).sqrt().recip()
    }

    /// An instance with hand-picked terms; `coupling` is recovered as `coeff / normalization`.
    pub fn from_terms(n: usize, q: usize, p: f64, seed: u64, terms: &[(Vec<usize>, f64)]) -> Result<Self> {
        check_degree(n, q)?;
        check_sparsity(p)?;
        let normalization = Self::normalization_for(n, q, p);
        let mut out = Vec::with_capacity(terms.len());
        for (indices, coeff) in terms {
            if indices.len() != q {
                return Err(Error::InvalidDegree {
                    q: indices.len(),
                    reason: format!("term {indices:?} does not have degree {q}"),
                });
            }
            out.push(SykTerm {
                coeff: *coeff,
                coupling: coeff / normalization,
                monomial: MajoranaMonomial::hermitian(2 * n, indices)?,
            });
        }
        let mut seen = std::collections::HashSet::new();
        for t in &out {
            if !seen.insert(t.monomial.support_bits()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate term {:?}",
                    t.monomial.indices()
                )));
            }
        }
        Ok(Self {
            model: if p < 1.0 { Model::Ssyk } else { Model::Syk },
            n,
            q,
            p,
            seed,
            normalization,
            terms: out,
        })
    }

    pub fn hamiltonian(&self) -> SparseHamiltonian {
        SparseHamiltonian::new(
            self.n_majoranas(),
            self.terms.iter().map(|t| (t.coeff, t.monomial)).collect(),
        )
        .expect("instance terms share the register")
    }

    /// The kept `J_I X_I` for an index set (zero when the term was dropped).
    pub fn coupling_of(&self, support_bits: u64) -> f64 {
        self.terms
            .iter()
            .find(|t| t.monomial.support_bits() == support_bits)
            .map_or(0.0, |t| t.coupling)
    }
}

fn check_degree(n: usize, q: usize) -> Result<()> {
    if 2 * n > crate::algebra::MAX_MAJORANAS || n == 0 {
        return Err(Error::InvalidModeCount(2 * n));
    }
    if q % 2 != 0 || q < 2 || q > 2 * n {
        return Err(Error::InvalidDegree {
            q,
            reason: format!("need even q with 2 <= q <= 2n = {}", 2 * n),
        });
    }
    Ok(())
}

/// Samples `H = binom(2n,q)^{-1/2} p^{-1/2} Σ_I J_I X_I i^{q/2} γ_I`.
pub fn sample_syk(n: usize, q: usize, p: f64, seed: u64) -> Result<SykInstance> {
    check_degree(n, q)?;
    if q < 4 {
        return Err(Error::InvalidDegree {
            q,
            reason: "sparse SYK needs q >= 4".into(),
        });
    }
    check_sparsity(p)?;
    if p < p_min(n, q, 0.1) {
        warn!("p = {p} is below p_min = {:e} for n = {n}, q = {q}", p_min(n, q, 0.1));
    }
    let normalization = SykInstance::normalization_for(n, q, p);
    let mut terms = Vec::new();
    for (rank, idx) in (1..=2 * n).combinations(q).enumerate() {
        let (u, j) = keep_and_coupling(seed, Stream::Syk, 0, rank as u64);
        if u < p {
            terms.push(SykTerm {
                coeff: normalization * j,
                coupling: j,
                monomial: MajoranaMonomial::hermitian(2 * n, &idx)?,
            });
        }
    }
    if terms.is_empty() {
        warn!("sample_syk(n={n}, q={q}, p={p}, seed={seed}) kept no terms; returning the zero Hamiltonian");
    }
    Ok(SykInstance {
        model: if p < 1.0 { Model::Ssyk } else { Model::Syk },
        n,
        q,
        p,
        seed,
        normalization,
        terms,
    })
}

/// Index layout of the extended two-color register: `φ_1..φ_{n1}`, then
/// `χ_1..χ_{n2}`, then the ancillas `σ_1..σ_{n2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoColorRegister {
    pub n1: usize,
    pub n2: usize,
}

impl TwoColorRegister {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 3 {
            return Err(Error::InvalidParameter(format!("n1 = {n1} must be at least 3")));
        }
        if n2 == 0 {
            return Err(Error::InvalidParameter("n2 must be positive".into()));
        }
        if (n1 + 2 * n2) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "register of n1 + 2 n2 = {} Majoranas is odd",
                n1 + 2 * n2
            )));
        }
        if n1 + 2 * n2 > crate::algebra::MAX_MAJORANAS {
            return Err(Error::InvalidModeCount(n1 + 2 * n2));
        }
        Ok(Self { n1, n2 })
    }

    pub fn n_majoranas(&self) -> usize {
        self.n1 + 2 * self.n2
    }

    pub fn n_qubits(&self) -> usize {
        self.n_majoranas() / 2
    }

    pub fn phi(&self, i: usize) -> usize {
        debug_assert!((1..=self.n1).contains(&i));
        i
    }

    pub fn chi(&self, j: usize) -> usize {
        debug_assert!((1..=self.n2).contains(&j));
        self.n1 + j
    }

    pub fn sigma(&self, j: usize) -> usize {
        debug_assert!((1..=self.n2).contains(&j));
        self.n1 + self.n2 + j
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauTerm {
    /// `binom(n1,3)^{-1/2} p^{-1/2} J_{S,j}`.
    pub coeff: f64,
    pub coupling: f64,
    /// `i φ_S` on the extended register.
    pub phi: MajoranaMonomial,
}

#[derive(Clone, Debug)]
pub struct TwoColorInstance {
    pub register: TwoColorRegister,
    pub p: f64,
    pub seed: u64,
    pub normalization: f64,
    /// `tau_terms[j-1]` holds the kept terms of `τ_j`.
    pub tau_terms: Vec<Vec<TauTerm>>,
}

impl TwoColorInstance {
    pub fn n1(&self) -> usize {
        self.register.n1
    }

    pub fn n2(&self) -> usize {
        self.register.n2
    }

    pub fn normalization_for(n1: usize, p: f64) -> f64 {
        (binomial(n1, 3) * p).sqrt().recip()
    }

    pub fn term_count(&self) -> usize {
        self.tau_terms.iter().map(Vec::len).sum()
    }

    /// `τ_j` as a Hermitian operator on the extended register.
    pub fn tau(&self, j: usize) -> SparseHamiltonian {
        SparseHamiltonian::new(
            self.register.n_majoranas(),
            self.tau_terms[j - 1].iter().map(|t| (t.coeff, t.phi)).collect(),
        )
        .expect("tau terms share the register")
    }

    /// `H² = (i/√n2) Σ_j τ_j χ_j`, expanded into Hermitian-canonical quartic terms.
    pub fn hamiltonian(&self) -> SparseHamiltonian {
        let reg = self.register;
        let scale = (reg.n2 as f64).sqrt().recip();
        let mut terms = Vec::with_capacity(self.term_count());
        for (j0, tau) in self.tau_terms.iter().enumerate() {
            let chi = MajoranaMonomial::new(reg.n_majoranas(), &[reg.chi(j0 + 1)], 0)
                .expect("chi index in range");
            for t in tau {
                let m = multiply(&t.phi, &chi).expect("same register").times_i_pow(1);
                terms.push((t.coeff * scale, m));
            }
        }
        SparseHamiltonian::new(reg.n_majoranas(), terms).expect("terms share the register")
    }

    /// The same couplings with every coefficient zeroed out.
    pub fn zeroed(&self) -> Self {
        let mut out = self.clone();
        for tau in &mut out.tau_terms {
            for t in tau.iter_mut() {
                t.coeff = 0.0;
                t.coupling = 0.0;
            }
        }
        out
    }
}

/// Samples `H² = (i/√n2) Σ_j τ_j χ_j` with `τ_j = i binom(n1,3)^{-1/2} p^{-1/2} Σ_S J_{S,j} X_{S,j} φ_S`.
pub fn sample_two_color(n1: usize, n2: usize, p: f64, seed: u64) -> Result<TwoColorInstance> {
    let register = TwoColorRegister::new(n1, n2)?;
    check_sparsity(p)?;
    let normalization = TwoColorInstance::normalization_for(n1, p);
    let mut tau_terms = Vec::with_capacity(n2);
    for j in 1..=n2 {
        let mut tau = Vec::new();
        for (rank, s) in (1..=n1).combinations(3).enumerate() {
            let (u, coupling) = keep_and_coupling(seed, Stream::TwoColor, j as u64, rank as u64);
            if u < p {
                tau.push(TauTerm {
                    coeff: normalization * coupling,
                    coupling,
                    phi: MajoranaMonomial::hermitian(register.n_majoranas(), &s)?,
                });
            }
        }
        tau_terms.push(tau);
    }
    Ok(TwoColorInstance {
        register,
        p,
        seed,
        normalization,
        tau_terms,
    })
}

/// Output of splitting a quartic sparse SYK instance along `A = [n1]`, `B = [2n] \ A`.
#[derive(Clone, Debug)]
pub struct TwoColorSplit {
    /// `H_T / C3` as a two-color instance (`χ_j = γ_{n1+j}`).
    pub two_color: TwoColorInstance,
    /// `C3 = 2 √(n2 binom(n1,3) / (2n binom(2n-1,3)))`.
    pub c3: f64,
    /// Terms with three indices in `A` and one in `B`.
    pub t_terms: Vec<SykTerm>,
    /// Everything else.
    pub t_bar_terms: Vec<SykTerm>,
}

impl TwoColorSplit {
    pub fn t_bar_hamiltonian(&self, n_majoranas: usize) -> Result<SparseHamiltonian> {
        let terms = self
            .t_bar_terms
            .iter()
            .map(|t| t.monomial.embed(n_majoranas).map(|m| (t.coeff, m)))
            .collect::<Result<Vec<_>>>()?;
        SparseHamiltonian::new(n_majoranas, terms)
    }
}

pub fn c3_constant(n: usize, n1: usize) -> f64 {
    let n2 = 2 * n - n1;
    2.0 * (n2 as f64 * binomial(n1, 3) / (2.0 * n as f64 * binomial(2 * n - 1, 3))).sqrt()
}

/// `A` of size `≈ 3/4 · 2n`, rounded to the even value required by the extended register.
pub fn default_split(n: usize) -> usize {
    let n1 = (1.5 * n as f64).round() as usize;
    if n1 % 2 == 1 {
        n1 - 1
    } else {
        n1
    }
}

pub fn extract_two_color(h: &SykInstance, n1: usize) -> Result<TwoColorSplit> {
    if h.q != 4 {
        return Err(Error::InvalidDegree {
            q: h.q,
            reason: "two-color reduction needs q = 4".into(),
        });
    }
    let two_n = 2 * h.n;
    let lo = 0.1 * h.n as f64;
    if n1 > two_n || (n1 as f64) < lo || ((two_n - n1) as f64) < lo || n1 == two_n {
        return Err(Error::InvalidParameter(format!(
            "partition sizes n1 = {n1}, n2 = {} violate 0.1 n <= n1, n2 <= 2n (n = {})",
            two_n.saturating_sub(n1),
            h.n
        )));
    }
    let n2 = two_n - n1;
    let register = TwoColorRegister::new(n1, n2)?;
    let a_mask = (1u64 << n1) - 1;
    let normalization = TwoColorInstance::normalization_for(n1, h.p);
    let mut tau_terms = vec![Vec::new(); n2];
    let mut t_terms = Vec::new();
    let mut t_bar_terms = Vec::new();
    for t in &h.terms {
        let bits = t.monomial.support_bits();
        if (bits & a_mask).count_ones() == 3 {
            let idx = t.monomial.indices();
            let j = idx[3] - n1;
            tau_terms[j - 1].push(TauTerm {
                coeff: normalization * t.coupling,
                coupling: t.coupling,
                phi: MajoranaMonomial::hermitian(register.n_majoranas(), &idx[..3])?,
            });
            t_terms.push(*t);
        } else {
            t_bar_terms.push(*t);
        }
    }
    // order each τ_j by its φ-support, matching `sample_two_color`
    for tau in &mut tau_terms {
        tau.sort_by_key(|t| t.phi.indices());
    }
    Ok(TwoColorSplit {
        two_color: TwoColorInstance {
            register,
            p: h.p,
            seed: h.seed,
            normalization,
            tau_terms,
        },
        c3: c3_constant(h.n, n1),
        t_terms,
        t_bar_terms,
    })
}

/// Grid description shared by scans and experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(default = "default_model")]
    pub model: Model,
    pub n: Vec<usize>,
    #[serde(default = "default_q")]
    pub q: usize,
    pub p: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_model() -> Model {
    Model::Ssyk
}

fn default_q() -> usize {
    4
}

impl EnsembleSpec {
    /// Seed of trial `t`: `base seed + t`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.n.is_empty() {
            problems.push("n grid is empty".to_string());
        }
        if self.p.is_empty() {
            problems.push("p grid is empty".to_string());
        }
        if self.trials == 0 {
            problems.push("trials must be positive".to_string());
        }
        for &p in &self.p {
            if !(p > 0.0 && p <= 1.0) {
                problems.push(format!("p = {p} outside (0, 1]"));
            }
        }
        for &n in &self.n {
            if let Err(e) = check_degree(n, self.q) {
                problems.push(e.to_string());
            }
            for &p in &self.p {
                if p > 0.0 && p < p_min(n, self.q, 0.1) {
                    warn!("p = {p} below p_min for n = {n}");
                }
            }
        }
        if self.model == Model::TwoColor {
            problems.push("two-color ensembles are sampled with sample_two_color, not EnsembleSpec".into());
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::anticommutes;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(10, 4), 210.0);
        assert_eq!(binomial(20, 4), 4845.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn dense_instance_keeps_everything() {
        let h = sample_syk(4, 4, 1.0, 7).unwrap();
        assert_eq!(h.terms.len(), 70);
        assert_eq!(h.model, Model::Syk);
        assert!((h.normalization - 70f64.powf(-0.5)).abs() < 1e-15);
        for t in &h.terms {
            assert_eq!(t.coeff, h.normalization * t.coupling);
            assert_eq!(t.monomial.phase_quarter(), 2);
            assert!(t.monomial.is_hermitian());
        }
    }

    #[test]
    fn half_sparsity_matches_rng_replay() {
        let h = sample_syk(4, 4, 0.5, 7).unwrap();
        let replay: Vec<Vec<usize>> = (1..=8)
            .combinations(4)
            .enumerate()
            .filter(|(r, _)| keep_and_coupling(7, Stream::Syk, 0, *r as u64).0 < 0.5)
            .map(|(_, idx)| idx)
            .collect();
        let got: Vec<Vec<usize>> = h.terms.iter().map(|t| t.monomial.indices()).collect();
        assert_eq!(got, replay);
        assert!(!got.is_empty() && got.len() < 70);
    }

    #[test]
    fn sparser_term_set_is_nested() {
        let a = sample_syk(4, 4, 0.5, 7).unwrap();
        let b = sample_syk(4, 4, 0.8, 7).unwrap();
        for t in &a.terms {
            let bits = t.monomial.support_bits();
            let other = b.terms.iter().find(|s| s.monomial.support_bits() == bits).unwrap();
            assert_eq!(other.coupling, t.coupling);
        }
    }

    #[test]
    fn invalid_sampling_requests() {
        assert!(matches!(sample_syk(4, 3, 1.0, 0), Err(Error::InvalidDegree { .. })));
        assert!(matches!(sample_syk(4, 2, 1.0, 0), Err(Error::InvalidDegree { .. })));
        assert!(matches!(sample_syk(2, 6, 1.0, 0), Err(Error::InvalidDegree { .. })));
        assert!(matches!(sample_syk(4, 4, 0.0, 0), Err(Error::InvalidSparsity(_))));
        assert!(matches!(sample_syk(4, 4, 1.5, 0), Err(Error::InvalidSparsity(_))));
    }

    #[test]
    fn tiny_p_gives_empty_but_valid_instance() {
        let h = sample_syk(3, 4, 1e-9, 1).unwrap();
        assert!(h.terms.is_empty());
        assert!(h.hamiltonian().is_empty());
    }

    #[test]
    fn two_color_counts() {
        let h = sample_two_color(6, 3, 1.0, 1).unwrap();
        assert_eq!(h.tau_terms.len(), 3);
        assert!(h.tau_terms.iter().all(|t| t.len() == 20));
        assert_eq!(h.register.n_majoranas(), 12);
        assert_eq!(h.register.n_qubits(), 6);

        let h = sample_two_color(6, 4, 0.5, 3).unwrap();
        for j in 1..=4 {
            let expected = (1..=6usize)
                .combinations(3)
                .enumerate()
                .filter(|(r, _)| keep_and_coupling(3, Stream::TwoColor, j as u64, *r as u64).0 < 0.5)
                .count();
            assert_eq!(h.tau_terms[j - 1].len(), expected);
        }
    }

    #[test]
    fn two_color_rejects_bad_shapes() {
        assert!(sample_two_color(2, 3, 1.0, 0).is_err());
        assert!(sample_two_color(5, 3, 1.0, 0).is_err());
        assert!(sample_two_color(6, 3, 0.0, 0).is_err());
    }

    #[test]
    fn two_color_terms_are_i_over_sqrt_n2_tau_chi() {
        let h = sample_two_color(6, 2, 1.0, 5).unwrap();
        let ham = h.hamiltonian();
        let reg = h.register;
        let mut k = 0;
        for j in 1..=2 {
            let chi = MajoranaMonomial::new(reg.n_majoranas(), &[reg.chi(j)], 0).unwrap();
            for t in &h.tau_terms[j - 1] {
                let (c, m) = ham.terms()[k];
                let expect = multiply(&t.phi, &chi).unwrap().times_i_pow(1);
                assert_eq!(m, expect);
                assert_eq!(m.phase_quarter(), 2);
                assert!((c - t.coeff / 2f64.sqrt()).abs() < 1e-15);
                // τ-terms anticommute with the disjoint σ Majoranas
                let sigma = MajoranaMonomial::new(reg.n_majoranas(), &[reg.sigma(j)], 0).unwrap();
                assert!(anticommutes(&t.phi, &sigma).unwrap());
                k += 1;
            }
        }
    }

    #[test]
    fn reduction_split_counts_and_constant() {
        let h = sample_syk(4, 4, 1.0, 3).unwrap();
        let split = extract_two_color(&h, 6).unwrap();
        assert_eq!(split.t_terms.len(), 40);
        assert_eq!(split.t_terms.len() + split.t_bar_terms.len(), 70);
        let expected = 2.0 * (2.0 * 20.0 / (8.0 * 35.0f64)).sqrt();
        assert!((split.c3 - expected).abs() < 1e-15);
        assert!((split.c3 - 0.7559).abs() < 1e-4);
        assert_eq!(split.two_color.term_count(), 40);
    }

    #[test]
    fn reduction_reproduces_h_t_exactly() {
        let h = sample_syk(4, 4, 0.6, 9).unwrap();
        let split = extract_two_color(&h, 6).unwrap();
        let reg = split.two_color.register;
        let h2 = split.two_color.hamiltonian();
        let mut from_split: Vec<(u64, f64)> =
            h2.terms().iter().map(|(c, m)| (m.support_bits(), split.c3 * c)).collect();
        let mut direct: Vec<(u64, f64)> = split
            .t_terms
            .iter()
            .map(|t| {
                let m = t.monomial.embed(reg.n_majoranas()).unwrap();
                (m.support_bits(), t.coeff)
            })
            .collect();
        from_split.sort_by_key(|x| x.0);
        direct.sort_by_key(|x| x.0);
        assert_eq!(from_split.len(), direct.len());
        for (a, b) in from_split.iter().zip(&direct) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() <= 1e-14 * b.1.abs().max(1.0));
        }
        for (_, m) in h2.terms() {
            assert_eq!(m.phase_quarter(), 2);
        }
    }

    #[test]
    fn reduction_preconditions() {
        let h = sample_syk(4, 4, 1.0, 3).unwrap();
        assert!(extract_two_color(&h, 8).is_err());
        assert!(extract_two_color(&h, 0).is_err());
        let h6 = sample_syk(4, 6, 1.0, 3).unwrap();
        assert!(extract_two_color(&h6, 6).is_err());
    }

    #[test]
    fn default_split_is_even_and_near_three_quarters() {
        assert_eq!(default_split(4), 6);
        assert_eq!(default_split(5), 8);
        assert_eq!(default_split(6), 8);
        for n in 3..20 {
            let n1 = default_split(n);
            assert_eq!(n1 % 2, 0);
            assert!((n1 as f64 - 1.5 * n as f64).abs() <= 1.5);
        }
    }

    #[test]
    fn spec_validation_lists_every_problem() {
        let grid = EnsembleSpec {
            model: Model::Ssyk,
            n: vec![1],
            q: 4,
            p: vec![0.0, 2.0],
            trials: 0,
            seed: 0,
        };
        assert_eq!(grid.validate().len(), 4);
    }
}
