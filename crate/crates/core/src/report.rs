//! Audit reports and the fixed catalog of discrepancy notes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};
use crate::linalg::{ToleranceModel, C64};

/// The claims the auditors know how to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Claim {
    /// Operator defect vanishes iff the shifted scalar defect does.
    #[serde(rename = "thm2.1")]
    DefectEquivalence,
    /// Kernel-stable components reduce the exponent to `(1,…,1)`.
    #[serde(rename = "thm2.2")]
    KernelStableReduction,
    /// Order ascent `m → m+1, m+2` under a reducing kernel.
    #[serde(rename = "thm2.3")]
    OrderAscent,
    /// Quasinormal tuples collapse to order one.
    #[serde(rename = "prop2.1")]
    QuasinormalCollapse,
    /// Next-order criterion through the shifted scalar sums.
    #[serde(rename = "prop2.4")]
    NextOrderIdentity,
    /// Approximate spectrum inside sphere ∪ zero variety.
    #[serde(rename = "thm3.1")]
    SpectrumLocation,
    /// Conjugate eigenvalues and orthogonal eigenvectors.
    #[serde(rename = "prop3.2")]
    EigenConjugation,
    /// Spectral map for a left m-inverse.
    #[serde(rename = "thm4.1")]
    LeftInverseSpectralMap,
    /// Spectral map for a right m-inverse.
    #[serde(rename = "thm4.2")]
    RightInverseSpectralMap,
    /// Power-sum expansion through the β polynomials.
    #[serde(rename = "prop4.1")]
    PowerSumExpansion,
}

impl Claim {
    pub const ALL: [Claim; 10] = [
        Claim::DefectEquivalence,
        Claim::KernelStableReduction,
        Claim::OrderAscent,
        Claim::QuasinormalCollapse,
        Claim::NextOrderIdentity,
        Claim::SpectrumLocation,
        Claim::EigenConjugation,
        Claim::LeftInverseSpectralMap,
        Claim::RightInverseSpectralMap,
        Claim::PowerSumExpansion,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Claim::DefectEquivalence => "thm2.1",
            Claim::KernelStableReduction => "thm2.2",
            Claim::OrderAscent => "thm2.3",
            Claim::QuasinormalCollapse => "prop2.1",
            Claim::NextOrderIdentity => "prop2.4",
            Claim::SpectrumLocation => "thm3.1",
            Claim::EigenConjugation => "prop3.2",
            Claim::LeftInverseSpectralMap => "thm4.1",
            Claim::RightInverseSpectralMap => "thm4.2",
            Claim::PowerSumExpansion => "prop4.1",
        }
    }

    /// Whether the audit needs a second (inverse) tuple.
    pub fn needs_inverse(self) -> bool {
        matches!(
            self,
            Claim::LeftInverseSpectralMap
                | Claim::RightInverseSpectralMap
                | Claim::PowerSumExpansion
        )
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Claim::ALL.into_iter().find(|c| c.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = Claim::ALL.iter().map(|c| c.id()).collect();
            invalid(format!(
                "unknown claim '{s}', expected one of {}",
                ids.join(", ")
            ))
        })
    }
}

/// One named boolean check. Non-binding checks are reported but do not
/// enter the aggregate verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    pub binding: bool,
}

/// A labelled point or vector, complex entries as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub claim_id: String,
    pub hypotheses_hold: bool,
    pub hypotheses: Vec<Verdict>,
    pub conclusion_holds: bool,
    pub sub_verdicts: Vec<Verdict>,
    pub witnesses: Vec<Witness>,
    pub norms: BTreeMap<String, f64>,
    pub tolerances: ToleranceModel,
    pub seed: u64,
    #[serde(rename = "paper_discrepancy_notes")]
    pub discrepancy_notes: Vec<String>,
}

impl AuditReport {
    pub fn new(claim: Claim, tol: &ToleranceModel, seed: u64) -> Self {
        AuditReport {
            claim_id: claim.id().to_string(),
            hypotheses_hold: true,
            hypotheses: Vec::new(),
            conclusion_holds: true,
            sub_verdicts: Vec::new(),
            witnesses: Vec::new(),
            norms: BTreeMap::new(),
            tolerances: *tol,
            seed,
            discrepancy_notes: Vec::new(),
        }
    }

    pub fn hypothesis(&mut self, name: impl Into<String>, holds: bool) -> &mut Self {
        self.push_hypothesis(name, holds, true)
    }

    /// A hypothesis that is recorded but not required.
    pub fn side_hypothesis(&mut self, name: impl Into<String>, holds: bool) -> &mut Self {
        self.push_hypothesis(name, holds, false)
    }

    fn push_hypothesis(
        &mut self,
        name: impl Into<String>,
        holds: bool,
        binding: bool,
    ) -> &mut Self {
        self.hypotheses.push(Verdict {
            name: name.into(),
            holds,
            binding,
        });
        if binding && !holds {
            self.hypotheses_hold = false;
        }
        self
    }

    pub fn conclusion(&mut self, name: impl Into<String>, holds: bool) -> &mut Self {
        self.push_verdict(name, holds, true)
    }

    pub fn informational(&mut self, name: impl Into<String>, holds: bool) -> &mut Self {
        self.push_verdict(name, holds, false)
    }

    fn push_verdict(&mut self, name: impl Into<String>, holds: bool, binding: bool) -> &mut Self {
        self.sub_verdicts.push(Verdict {
            name: name.into(),
            holds,
            binding,
        });
        if binding && !holds {
            self.conclusion_holds = false;
        }
        self
    }

    pub fn norm(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.norms.insert(name.into(), value);
        self
    }

    pub fn witness(&mut self, label: impl Into<String>, values: Vec<C64>) -> &mut Self {
        self.witnesses.push(Witness {
            label: label.into(),
            values,
        });
        self
    }

    pub fn note(&mut self, note: &str) -> &mut Self {
        if !self.discrepancy_notes.iter().any(|n| n == note) {
            self.discrepancy_notes.push(note.to_string());
        }
        self
    }

    /// Hypotheses satisfied yet the conclusion fails.
    pub fn is_counterexample(&self) -> bool {
        self.hypotheses_hold && !self.conclusion_holds
    }

    pub fn sub_verdict(&self, name: &str) -> Option<&Verdict> {
        self.sub_verdicts.iter().find(|v| v.name == name)
    }

    pub fn hypothesis_named(&self, name: &str) -> Option<&Verdict> {
        self.hypotheses.iter().find(|v| v.name == name)
    }

    /// Folds another report into this one as prefixed implications
    /// `hypotheses ⟹ conclusion`, used by composite audits.
    pub fn absorb(&mut self, prefix: &str, other: &AuditReport) {
        for h in &other.hypotheses {
            self.side_hypothesis(format!("{prefix}: {}", h.name), h.holds);
        }
        for v in &other.sub_verdicts {
            self.informational(format!("{prefix}: {}", v.name), v.holds);
        }
        self.conclusion(
            format!("{prefix}: hypotheses imply conclusion"),
            !other.hypotheses_hold || other.conclusion_holds,
        );
        for (k, v) in &other.norms {
            self.norm(format!("{prefix}: {k}"), *v);
        }
        for w in &other.witnesses {
            self.witness(format!("{prefix}: {}", w.label), w.values.clone());
        }
        for n in &other.discrepancy_notes {
            self.note(n);
        }
    }
}

/// Fixed catalog of discrepancy notes attached to reports.
pub mod notes {
    pub const SCALAR_SIGN: &str =
        "defect-equivalence: the stated scalar criterion carries (-1)^m while its derivation uses (-1)^k; evaluated with (-1)^k";
    pub const QUASINORMAL_VARIANT: &str =
        "quasinormal-collapse: the statement assumes joint quasinormality while the derivation uses matricial quasinormality; both variants are evaluated";
    pub const SPECTRAL_RADIUS_EXPONENT: &str =
        "spectral-radius: the printed norm carries exponent 2; the Euclidean norm (exponent 1/2) is used";
    pub const FINITE_SURROGATE: &str =
        "spectra: finite-dimensional surrogates are used (approximate point spectrum = point spectrum; Taylor spectrum = simultaneous-triangularization diagonal)";
    pub const RADIUS_DICHOTOMY: &str =
        "spectral-radius dichotomy: the sphere-or-closed-ball dichotomy cannot hold verbatim for finite spectra; only r(T) = 1 is tested";
    pub const INVERSE_EXAMPLE_AS_PRINTED: &str =
        "m-inverse example: the printed pair S = (S1, S1) gives beta_m(S, T) = I for every m; S = (S1/2, S1/2) satisfies the definition; S2 is never defined";
    pub const POCHHAMMER_COEFFICIENT: &str =
        "power-sum expansion: the printed coefficient n^(k) = C(n,k) k! fails; the binomial coefficient C(n,k) satisfies the identity";
    pub const POCHHAMMER_AT_ZERO: &str =
        "power-sum expansion: the convention 0^(0) = 0 contradicts the n = 0 case, whose left side is the identity";
    pub const ZERO_VARIETY_READING: &str =
        "inverse spectral map: '[0] is not contained in sigma_ap(T)' is vacuous for finite spectra; the stronger reading sigma_p(T) ∩ [0] = ∅ is reported separately";
    pub const INVERSE_MAP_CLAIM: &str =
        "inverse spectral map: lambda -> (1/(d lambda_1), ..., 1/(d lambda_d)) is audited as a claim; failures are recorded as counterexamples";
    pub const REDUCING_SHARPNESS: &str =
        "spectrum-location: without a reducing kernel N(T^q) the conclusion can fail; such instances are reported with hypotheses_hold = false";
}
