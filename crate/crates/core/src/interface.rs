//! Tuple files, audit dispatch and JSON emission.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::defects::{
    audit_defect_equivalence, audit_kernel_stable_reduction, audit_next_order_identity,
    audit_order_ascent, audit_quasinormal_collapse,
};
use crate::error::{invalid, Error, Result};
use crate::generators::WorkedExample;
use crate::linalg::{ComplexMatrix, ToleranceModel, C64};
use crate::minverse::{
    audit_left_inverse_spectral_map, audit_power_sum_expansion, audit_right_inverse_spectral_map,
};
use crate::multiindex::MultiIndex;
use crate::report::{AuditReport, Claim};
use crate::spectra::{audit_eigen_conjugation, audit_spectrum_location};
use crate::tuples::OperatorTuple;

type Pairs = Vec<Vec<Vec<[f64; 2]>>>;

/// On-disk form of a tuple. `inverse` holds a companion tuple of the same
/// shape for the m-inverse claims.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleFile {
    pub d: usize,
    pub dim: usize,
    pub matrices: Pairs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, Value>>,
}

#[derive(Clone, Debug)]
pub struct ParsedTuple {
    pub tuple: OperatorTuple,
    pub m: Option<usize>,
    pub q: Option<MultiIndex>,
    pub inverse: Option<OperatorTuple>,
    pub metadata: BTreeMap<String, Value>,
}

fn parse_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(format!("/{key}"), "missing required field"))
}

fn as_count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(path, "expected a nonnegative integer"))
}

fn as_array<'a>(v: &'a Value, path: &str, len: usize) -> Result<&'a Vec<Value>> {
    let a = v
        .as_array()
        .ok_or_else(|| parse_err(path, "expected an array"))?;
    if a.len() != len {
        return Err(parse_err(
            path,
            format!("expected {len} entries, found {}", a.len()),
        ));
    }
    Ok(a)
}

fn parse_matrices(v: &Value, base: &str, d: usize, dim: usize) -> Result<Vec<ComplexMatrix>> {
    let mats = as_array(v, base, d)?;
    let mut out = Vec::with_capacity(d);
    for (j, mat) in mats.iter().enumerate() {
        let mpath = format!("{base}/{j}");
        let rows = as_array(mat, &mpath, dim)?;
        let mut entries = Vec::with_capacity(dim * dim);
        for (r, row) in rows.iter().enumerate() {
            let rpath = format!("{mpath}/{r}");
            for (c, cell) in as_array(row, &rpath, dim)?.iter().enumerate() {
                let cpath = format!("{rpath}/{c}");
                let pair = as_array(cell, &cpath, 2)?;
                let mut parts = [0.0; 2];
                for (k, p) in pair.iter().enumerate() {
                    let x = p
                        .as_f64()
                        .ok_or_else(|| parse_err(format!("{cpath}/{k}"), "expected a number"))?;
                    if !x.is_finite() {
                        return Err(parse_err(format!("{cpath}/{k}"), "number is not finite"));
                    }
                    parts[k] = x;
                }
                entries.push(C64::new(parts[0], parts[1]));
            }
        }
        let m = nalgebra::DMatrix::from_row_slice(dim, dim, &entries);
        out.push(ComplexMatrix::new(m).map_err(|e| parse_err(&mpath, e.to_string()))?);
    }
    Ok(out)
}

pub fn parse_tuple_file(text: &str, tol: &ToleranceModel) -> Result<ParsedTuple> {
    let root: Value = serde_json::from_str(text).map_err(|e| parse_err("", e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| parse_err("", "expected a JSON object"))?;
    let d = as_count(field(obj, "d")?, "/d")?;
    let dim = as_count(field(obj, "dim")?, "/dim")?;
    if d == 0 {
        return Err(parse_err("/d", "tuple must have at least one component"));
    }
    if dim == 0 {
        return Err(parse_err("/dim", "dimension must be positive"));
    }
    let matrices = parse_matrices(field(obj, "matrices")?, "/matrices", d, dim)?;
    let tuple = OperatorTuple::new(matrices, tol)?;

    let m = match obj.get("m") {
        None | Some(Value::Null) => None,
        Some(v) => Some(as_count(v, "/m")?),
    };
    let q = match obj.get("q") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let entries = as_array(v, "/q", d)?
                .iter()
                .enumerate()
                .map(|(i, x)| as_count(x, &format!("/q/{i}")))
                .collect::<Result<Vec<_>>>()?;
            Some(MultiIndex::new(entries))
        }
    };
    let inverse = match obj.get("inverse") {
        None | Some(Value::Null) => None,
        Some(v) => Some(OperatorTuple::new(
            parse_matrices(v, "/inverse", d, dim)?,
            tol,
        )?),
    };
    let metadata = match obj.get("metadata") {
        None | Some(Value::Null) => BTreeMap::new(),
        Some(Value::Object(map)) => map.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        Some(_) => return Err(parse_err("/metadata", "expected an object")),
    };
    Ok(ParsedTuple {
        tuple,
        m,
        q,
        inverse,
        metadata,
    })
}

pub fn load_tuple_file(path: &Path, tol: &ToleranceModel) -> Result<ParsedTuple> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(path.display().to_string(), e.to_string()))?;
    parse_tuple_file(&text, tol).map_err(|e| match e {
        Error::Parse { path: p, message } => parse_err(format!("{}#{p}", path.display()), message),
        other => other,
    })
}

fn pairs(t: &OperatorTuple) -> Pairs {
    t.matrices().iter().map(ComplexMatrix::to_pairs).collect()
}

impl TupleFile {
    pub fn from_tuple(t: &OperatorTuple) -> Self {
        TupleFile {
            d: t.d(),
            dim: t.dim(),
            matrices: pairs(t),
            q: None,
            m: None,
            inverse: None,
            metadata: None,
        }
    }

    pub fn with_order(mut self, m: usize, q: &MultiIndex) -> Self {
        self.m = Some(m);
        self.q = Some(q.entries().to_vec());
        self
    }

    pub fn with_inverse(mut self, s: &OperatorTuple) -> Self {
        self.inverse = Some(pairs(s));
        self
    }

    pub fn with_metadata(mut self, key: &str, value: Value) -> Self {
        self.metadata
            .get_or_insert_with(BTreeMap::new)
            .insert(key.to_string(), value);
        self
    }

    pub fn from_example(ex: &WorkedExample) -> Self {
        let mut f = TupleFile::from_tuple(&ex.tuple)
            .with_order(ex.m, &ex.q)
            .with_metadata("example", Value::String(ex.id.clone()));
        if let Some(s) = &ex.inverse {
            f = f.with_inverse(s);
        }
        f
    }
}

pub fn serialize_tuple(t: &OperatorTuple) -> String {
    to_json(&TupleFile::from_tuple(t))
}

/// Pretty JSON with shortest round-trip float formatting.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

/// Everything an audit needs besides the claim.
#[derive(Clone, Debug)]
pub struct AuditInput {
    pub tuple: OperatorTuple,
    pub inverse: Option<OperatorTuple>,
    pub m: usize,
    pub q: MultiIndex,
}

impl AuditInput {
    /// Defaults: `m = 1`, `q = (1,…,1)`.
    pub fn from_parsed(p: ParsedTuple) -> Self {
        let d = p.tuple.d();
        AuditInput {
            m: p.m.unwrap_or(1),
            q: p.q.unwrap_or_else(|| MultiIndex::ones(d)),
            tuple: p.tuple,
            inverse: p.inverse,
        }
    }
}

pub fn run_audit(
    claim: Claim,
    input: &AuditInput,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let (t, m, q) = (&input.tuple, input.m, &input.q);
    if q.d() != t.d() {
        return Err(invalid(format!(
            "q has {} entries but the tuple has {} components",
            q.d(),
            t.d()
        )));
    }
    let inverse = || {
        input
            .inverse
            .as_ref()
            .ok_or_else(|| invalid(format!("claim {claim} needs an inverse tuple")))
    };
    let mut report = match claim {
        Claim::DefectEquivalence => audit_defect_equivalence(t, m, q, tol)?,
        Claim::KernelStableReduction => audit_kernel_stable_reduction(t, m, q, tol)?,
        Claim::OrderAscent => audit_order_ascent(t, m, q, tol)?,
        Claim::QuasinormalCollapse => audit_quasinormal_collapse(t, m, tol)?,
        Claim::NextOrderIdentity => audit_next_order_identity(t, m, q, tol)?,
        Claim::SpectrumLocation => audit_spectrum_location(t, m, q, tol, seed)?,
        Claim::EigenConjugation => audit_eigen_conjugation(t, m, q, tol, seed)?,
        Claim::LeftInverseSpectralMap => {
            audit_left_inverse_spectral_map(inverse()?, t, m, tol, seed)?
        }
        Claim::RightInverseSpectralMap => {
            audit_right_inverse_spectral_map(inverse()?, t, m, tol, seed)?
        }
        Claim::PowerSumExpansion => audit_power_sum_expansion(inverse()?, t, m, tol, seed)?,
    };
    report.seed = seed;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::worked_example;

    fn tol() -> ToleranceModel {
        ToleranceModel::default()
    }

    #[test]
    fn zero_single_operator() {
        let p = parse_tuple_file(
            r#"{"d":1,"dim":2,"matrices":[[[[0,0],[0,0]],[[0,0],[0,0]]]]}"#,
            &tol(),
        )
        .unwrap();
        assert_eq!(p.tuple.d(), 1);
        assert_eq!(p.tuple.get(0), &ComplexMatrix::zeros(2));
        assert!(p.m.is_none() && p.q.is_none() && p.inverse.is_none());
    }

    #[test]
    fn examples_round_trip_exactly() {
        for id in [
            "2.1(3)",
            "2.2",
            "3.golden(2)",
            "4.1-as-printed",
            "4.1-corrected",
        ] {
            let ex = worked_example(id).unwrap();
            let text = to_json(&TupleFile::from_example(&ex));
            let p = parse_tuple_file(&text, &tol()).unwrap();
            assert_eq!(p.tuple, ex.tuple);
            assert_eq!(p.m, Some(ex.m));
            assert_eq!(p.q.as_ref(), Some(&ex.q));
            assert_eq!(p.inverse, ex.inverse);
            assert_eq!(p.metadata["example"], Value::String(ex.id.clone()));
        }
    }

    fn path_of(text: &str) -> String {
        match parse_tuple_file(text, &tol()).unwrap_err() {
            Error::Parse { path, .. } => path,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn schema_errors_name_the_path() {
        let z = "[[0,0],[0,0]]";
        let zero = format!("[{z},{z}]");
        assert_eq!(
            path_of(&format!(
                r#"{{"d":2,"dim":2,"matrices":[{zero},{zero},{zero}]}}"#
            )),
            "/matrices"
        );
        assert_eq!(path_of(r#"{"dim":2,"matrices":[]}"#), "/d");
        assert_eq!(
            path_of(r#"{"d":1,"dim":2,"matrices":[[[[0,0],[0,0]],[[0,0],[0]]]]}"#),
            "/matrices/0/1/1"
        );
        assert_eq!(
            path_of(r#"{"d":1,"dim":1,"matrices":[[[[0,"x"]]]]}"#),
            "/matrices/0/0/0/1"
        );
        assert_eq!(
            path_of(&format!(
                r#"{{"d":1,"dim":2,"matrices":[{zero}],"q":[1,2]}}"#
            )),
            "/q"
        );
        assert_eq!(path_of("[1,2]"), "");
        assert_eq!(path_of("{"), "");
    }

    #[test]
    fn non_commuting_input_is_rejected() {
        let text = r#"{"d":2,"dim":2,"matrices":[[[[0,0],[1,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[1,0],[0,0]]]]}"#;
        assert!(matches!(
            parse_tuple_file(text, &tol()),
            Err(Error::NonCommuting { .. })
        ));
    }

    #[test]
    fn dispatch_sets_seed_and_requires_inverse() {
        let ex = worked_example("2.1(2)").unwrap();
        let input = AuditInput {
            tuple: ex.tuple,
            inverse: None,
            m: 1,
            q: ex.q,
        };
        let r = run_audit(Claim::DefectEquivalence, &input, &tol(), 42).unwrap();
        assert_eq!(r.seed, 42);
        assert_eq!(r.claim_id, "thm2.1");
        assert!(run_audit(Claim::PowerSumExpansion, &input, &tol(), 0).is_err());
    }

    #[test]
    fn negative_control_for_spectrum_location() {
        let ex = worked_example("2.1(2)").unwrap();
        let input = AuditInput {
            tuple: ex.tuple,
            inverse: None,
            m: 1,
            q: ex.q,
        };
        let r = run_audit(Claim::SpectrumLocation, &input, &tol(), 0).unwrap();
        assert!(!r.hypotheses_hold);
        let w = r
            .witnesses
            .iter()
            .find(|w| w.label.contains("off the sphere"))
            .unwrap();
        let norm = w.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 2f64.powf(-0.25)).abs() <= 1e-8);
    }
}
