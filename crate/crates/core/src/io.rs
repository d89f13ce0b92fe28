//! Instance files: `{model, n | n1, n2, q, p, seed, terms: [{indices, coeff, color?}]}`.
//!
//! Floats are written in shortest round-trip form, so save/load is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::MajoranaMonomial;
use crate::ensembles::{Model, SykInstance, TauTerm, TwoColorInstance, TwoColorRegister};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub indices: Vec<usize>,
    pub coeff: f64,
    /// Raw Gaussian draw; derived from `coeff` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Color `j` of a two-color term; `indices` are then the `φ` indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    pub q: usize,
    pub p: f64,
    pub seed: u64,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug)]
pub enum Instance {
    Syk(SykInstance),
    TwoColor(TwoColorInstance),
}

impl From<&SykInstance> for InstanceFile {
    fn from(h: &SykInstance) -> Self {
        Self {
            model: h.model,
            n: Some(h.n),
            n1: None,
            n2: None,
            q: h.q,
            p: h.p,
            seed: h.seed,
            terms: h
                .terms
                .iter()
                .map(|t| TermRecord {
                    indices: t.monomial.indices(),
                    coeff: t.coeff,
                    coupling: Some(t.coupling),
                    color: None,
                })
                .collect(),
        }
    }
}

impl From<&TwoColorInstance> for InstanceFile {
    fn from(h: &TwoColorInstance) -> Self {
        let terms = h
            .tau_terms
            .iter()
            .enumerate()
            .flat_map(|(j0, tau)| {
                tau.iter().map(move |t| TermRecord {
                    indices: t.phi.indices(),
                    coeff: t.coeff,
                    coupling: Some(t.coupling),
                    color: Some(j0 + 1),
                })
            })
            .collect();
        Self {
            model: Model::TwoColor,
            n: None,
            n1: Some(h.n1()),
            n2: Some(h.n2()),
            q: 3,
            p: h.p,
            seed: h.seed,
            terms,
        }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        match self.model {
            Model::Syk | Model::Ssyk => {
                let n = self
                    .n
                    .ok_or_else(|| Error::InvalidParameter("instance file is missing `n`".into()))?;
                let couplings: Vec<Option<f64>> = self.terms.iter().map(|t| t.coupling).collect();
                let terms: Vec<(Vec<usize>, f64)> = self.terms.into_iter().map(|t| (t.indices, t.coeff)).collect();
                let mut h = SykInstance::from_terms(n, self.q, self.p, self.seed, &terms)?;
                h.model = self.model;
                for (t, c) in h.terms.iter_mut().zip(couplings) {
                    if let Some(c) = c {
                        t.coupling = c;
                    }
                }
                Ok(Instance::Syk(h))
            }
            Model::TwoColor => {
                let (n1, n2) = match (self.n1, self.n2) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(Error::InvalidParameter("two-color file needs `n1` and `n2`".into())),
                };
                if !(self.p > 0.0 && self.p <= 1.0) {
                    return Err(Error::InvalidSparsity(self.p));
                }
                let register = TwoColorRegister::new(n1, n2)?;
                let normalization = TwoColorInstance::normalization_for(n1, self.p);
                let mut tau_terms = vec![Vec::new(); n2];
                for t in self.terms {
                    let j = t
                        .color
                        .filter(|j| (1..=n2).contains(j))
                        .ok_or_else(|| Error::InvalidParameter(format!("term {:?} has no valid color", t.indices)))?;
                    if t.indices.len() != 3 || t.indices.iter().any(|&i| i == 0 || i > n1) {
                        return Err(Error::InvalidParameter(format!(
                            "two-color term {:?} must be three φ indices in 1..={n1}",
                            t.indices
                        )));
                    }
                    tau_terms[j - 1].push(TauTerm {
                        coeff: t.coeff,
                        coupling: t.coupling.unwrap_or(t.coeff / normalization),
                        phi: MajoranaMonomial::hermitian(register.n_majoranas(), &t.indices)?,
                    });
                }
                Ok(Instance::TwoColor(TwoColorInstance {
                    register,
                    p: self.p,
                    seed: self.seed,
                    normalization,
                    tau_terms,
                }))
            }
        }
    }
}

pub fn save_instance(file: &InstanceFile, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(file)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_instance()
}

pub fn load_syk(path: &Path) -> Result<SykInstance> {
    match load_instance(path)? {
        Instance::Syk(h) => Ok(h),
        Instance::TwoColor(_) => Err(Error::InvalidParameter("expected a syk/ssyk instance".into())),
    }
}

pub fn load_two_color(path: &Path) -> Result<TwoColorInstance> {
    match load_instance(path)? {
        Instance::TwoColor(h) => Ok(h),
        Instance::Syk(_) => Err(Error::InvalidParameter("expected a two-color instance".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_syk, sample_two_color};

    #[test]
    fn syk_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let h = sample_syk(4, 4, 0.5, 7).unwrap();
        save_instance(&InstanceFile::from(&h), &path).unwrap();
        let back = load_syk(&path).unwrap();
        assert_eq!(back.model, Model::Ssyk);
        assert_eq!(back.terms.len(), h.terms.len());
        for (a, b) in back.terms.iter().zip(&h.terms) {
            assert_eq!(a.coeff.to_bits(), b.coeff.to_bits());
            assert_eq!(a.monomial, b.monomial);
        }
        assert!(load_two_color(&path).is_err());
    }

    #[test]
    fn two_color_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tc.json");
        let h = sample_two_color(6, 3, 0.5, 4).unwrap();
        save_instance(&InstanceFile::from(&h), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"model\": \"two-color\""));
        let back = load_two_color(&path).unwrap();
        assert_eq!(back.register, h.register);
        for (a, b) in back.tau_terms.iter().flatten().zip(h.tau_terms.iter().flatten()) {
            assert_eq!(a.coeff.to_bits(), b.coeff.to_bits());
            assert_eq!(a.phi, b.phi);
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let bad = r#"{"model":"ssyk","q":4,"p":0.5,"seed":1,"terms":[]}"#;
        let f: InstanceFile = serde_json::from_str(bad).unwrap();
        assert!(f.into_instance().is_err());
        let bad = r#"{"model":"two-color","n1":6,"n2":3,"q":3,"p":1.0,"seed":1,"terms":[{"indices":[1,2,3],"coeff":0.1}]}"#;
        let f: InstanceFile = serde_json::from_str(bad).unwrap();
        assert!(f.into_instance().is_err());
        let bad = r#"{"model":"ssyk","n":4,"q":4,"p":0.5,"seed":1,"terms":[{"indices":[1,2,3],"coeff":0.1}]}"#;
        let f: InstanceFile = serde_json::from_str(bad).unwrap();
        assert!(f.into_instance().is_err());
    }
}
