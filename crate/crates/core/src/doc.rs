//! Self-describing measurement documents: a single JSON format with fields
//! `kind`, `n`, `matrices`, `meta` in that order; complex entries always as
//! `[re, im]` pairs. Loading validates the type invariants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector, HermitianOperator};
use crate::opsys::{OperatorSystem, Povm};
use crate::verify::VerificationReport;

/// Row-major complex matrix as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixData(pub Vec<Vec<[f64; 2]>>);

impl MatrixData {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixData(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(Error::Document("empty matrix".into()));
        }
        let cols = self.0[0].len();
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Document("ragged matrix rows".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            C64::new(self.0[i][j][0], self.0[i][j][1])
        }))
    }
}

/// Complex vector as `[re, im]` pairs.
pub fn vector_to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_vector(p: &[[f64; 2]]) -> CVector {
    CVector::from_fn(p.len(), |i, _| C64::new(p[i][0], p[i][1]))
}

/// Reproducibility metadata attached to every document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Meta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

/// The measurement document: `kind` is `"povm"` or `"operator_system"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDocument {
    pub kind: String,
    pub n: usize,
    pub matrices: Vec<MatrixData>,
    pub meta: Meta,
}

impl SystemDocument {
    pub fn from_povm(p: &Povm, meta: Meta) -> Self {
        Self {
            kind: "povm".into(),
            n: p.dim(),
            matrices: p
                .effects()
                .iter()
                .map(|e| MatrixData::from_matrix(e.entries()))
                .collect(),
            meta,
        }
    }

    pub fn from_system(s: &OperatorSystem, meta: Meta) -> Self {
        Self {
            kind: "operator_system".into(),
            n: s.n(),
            matrices: s
                .basis()
                .iter()
                .map(|b| MatrixData::from_matrix(b.entries()))
                .collect(),
            meta,
        }
    }

    pub fn to_povm(&self) -> Result<Povm> {
        if self.kind != "povm" {
            return Err(Error::Document(format!(
                "expected a povm document, got kind '{}'",
                self.kind
            )));
        }
        let effects: Vec<HermitianOperator> = self
            .matrices
            .iter()
            .map(|m| HermitianOperator::new(m.to_matrix()?))
            .collect::<Result<_>>()?;
        Povm::new(effects)
    }

    pub fn to_system(&self) -> Result<OperatorSystem> {
        if self.kind != "operator_system" {
            return Err(Error::Document(format!(
                "expected an operator_system document, got kind '{}'",
                self.kind
            )));
        }
        let basis: Vec<HermitianOperator> = self
            .matrices
            .iter()
            .map(|m| HermitianOperator::new(m.to_matrix()?))
            .collect::<Result<_>>()?;
        OperatorSystem::from_orthonormal_basis(self.n, basis)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Outcome vector document produced by sampling a measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeDocument {
    pub kind: String,
    pub values: Vec<f64>,
    pub meta: Meta,
}

impl OutcomeDocument {
    pub fn new(values: Vec<f64>, meta: Meta) -> Self {
        Self {
            kind: "outcomes".into(),
            values,
            meta,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.kind != "outcomes" {
            return Err(Error::Document(format!(
                "expected an outcomes document, got kind '{}'",
                doc.kind
            )));
        }
        Ok(doc)
    }
}

/// Wrapper for serialized verification reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub kind: String,
    pub report: VerificationReport,
    pub meta: Meta,
}

impl ReportDocument {
    pub fn new(report: VerificationReport, meta: Meta) -> Self {
        Self {
            kind: "verification_report".into(),
            report,
            meta,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_inner, random_unit_traceless};
    use crate::opsys::system_to_povm;

    fn sample_system() -> OperatorSystem {
        let mut rng = crate::linalg::rng_from_seed(3);
        let ops: Vec<HermitianOperator> =
            (0..3).map(|_| random_unit_traceless(3, &mut rng)).collect();
        OperatorSystem::from_span(3, &ops).unwrap()
    }

    #[test]
    fn povm_roundtrip() {
        let p = system_to_povm(&sample_system()).unwrap();
        let doc = SystemDocument::from_povm(&p, Meta::default());
        let text = doc.to_json().unwrap();
        let back = SystemDocument::from_json(&text).unwrap().to_povm().unwrap();
        assert_eq!(back.outcome_count(), p.outcome_count());
        for (a, b) in p.effects().iter().zip(back.effects()) {
            assert!(a.sub(b).norm() < 1e-12);
        }
    }

    #[test]
    fn system_roundtrip() {
        let s = sample_system();
        let doc = SystemDocument::from_system(&s, Meta::default());
        let back = SystemDocument::from_json(&doc.to_json().unwrap())
            .unwrap()
            .to_system()
            .unwrap();
        assert_eq!(back.dimension(), s.dimension());
        for (a, b) in s.basis().iter().zip(back.basis()) {
            assert!(a.sub(b).norm() < 1e-10);
        }
    }

    #[test]
    fn canonical_field_order() {
        let s = sample_system();
        let text = SystemDocument::from_system(&s, Meta::default())
            .to_json()
            .unwrap();
        let ik = text.find("\"kind\"").unwrap();
        let in_ = text.find("\"n\"").unwrap();
        let im = text.find("\"matrices\"").unwrap();
        let ime = text.find("\"meta\"").unwrap();
        assert!(ik < in_ && in_ < im && im < ime, "field order broken");
    }

    #[test]
    fn corrupt_povm_rejected() {
        let p = Povm::trivial(2);
        let mut doc = SystemDocument::from_povm(&p, Meta::default());
        doc.matrices[0].0[0][0] = [0.5, 0.0]; // breaks the identity sum
        assert!(doc.to_povm().is_err());
    }

    #[test]
    fn hermitian_inner_consistency_after_load() {
        let s = sample_system();
        let doc = SystemDocument::from_system(&s, Meta::default());
        let back = doc.to_system().unwrap();
        for (i, a) in back.basis().iter().enumerate() {
            for (j, b) in back.basis().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(a, b).unwrap() - want).abs() < 1e-10);
            }
        }
    }
}
