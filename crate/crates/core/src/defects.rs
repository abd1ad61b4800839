//! Alternating multinomial defects, their scalar forms and the auditors
//! built on them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frob, null_columns, vec_norm, ComplexMatrix, ToleranceModel, C64, ONE, ZERO};
use crate::multiindex::{binomial, enumerate_multiindices, multinomial_weight, MultiIndex};
use crate::report::{notes, AuditReport, Claim};
use crate::tuples::{OperatorTuple, QuasinormalFlags};

/// Subspace comparisons (`N(T_j)` against `N(T_j²)`) accept this residual.
const SUBSPACE_TOL: f64 = 1e-8;

/// Sign attached to level `k` of an alternating sum of order `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `(−1)^k`
    Alternating,
    /// `(−1)^{m−k}`
    Reversed,
}

impl SignConvention {
    fn sign(self, m: usize, k: usize) -> f64 {
        let e = match self {
            SignConvention::Alternating => k,
            SignConvention::Reversed => m - k,
        };
        if e % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectResult {
    pub matrix: ComplexMatrix,
    pub norm: f64,
    /// Largest Frobenius norm among the summands.
    pub scale: f64,
    pub is_zero: bool,
}

/// Norm-level view of a [`DefectResult`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub norm: f64,
    pub scale: f64,
    pub is_zero: bool,
}

impl DefectResult {
    fn new(matrix: ComplexMatrix, scale: f64, tol: &ToleranceModel) -> Self {
        let norm = matrix.frobenius_norm();
        DefectResult {
            is_zero: tol.is_negligible(norm, scale),
            matrix,
            norm,
            scale,
        }
    }

    pub fn summary(&self) -> DefectSummary {
        DefectSummary {
            norm: self.norm,
            scale: self.scale,
            is_zero: self.is_zero,
        }
    }
}

/// `(k!/α!, T^α, T*^α)`
type Monomial = (f64, DMatrix<C64>, DMatrix<C64>);

/// Weighted monomials grouped by level `k = 0..=m`.
struct Monomials {
    levels: Vec<Vec<Monomial>>,
}

impl Monomials {
    fn new(t: &OperatorTuple, m: usize) -> Result<Self> {
        let adj = t.adjoint();
        let levels = (0..=m)
            .map(|k| {
                enumerate_multiindices(t.d(), k)?
                    .into_iter()
                    .map(|alpha| {
                        let w = multinomial_weight(&alpha)? as f64;
                        Ok((
                            w,
                            t.power(&alpha)?.into_inner(),
                            adj.power(&alpha)?.into_inner(),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Monomials { levels })
    }

    /// `L_k = ∑_{|α|=k} (k!/α!) T*^α T^α`.
    fn level_sum(&self, k: usize) -> DMatrix<C64> {
        let n = self.levels[0][0].1.nrows();
        self.levels[k]
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, (w, p, pa)| {
                acc + (pa * p) * C64::new(*w, 0.0)
            })
    }

    /// `∑_{|α|=k} (k!/α!) ‖T^α y‖²`.
    fn level_norms(&self, k: usize, y: &DVector<C64>) -> f64 {
        self.levels[k]
            .iter()
            .map(|(w, p, _)| w * vec_norm(&(p * y)).powi(2))
            .sum()
    }
}

fn binom_f(m: usize, k: usize) -> Result<f64> {
    Ok(binomial(m, k)? as f64)
}

/// Level sums `L_k = ∑_{|α|=k} (k!/α!) T*^α T^α` for `k = 0..=m`.
pub fn level_sums(t: &OperatorTuple, m: usize) -> Result<Vec<ComplexMatrix>> {
    let mono = Monomials::new(t, m)?;
    Ok((0..=m)
        .map(|k| ComplexMatrix::wrap(mono.level_sum(k)))
        .collect())
}

/// `prefix · ∑_k sign(k) C(m,k) L_k`, with the largest summand norm as scale.
fn alternating_defect(
    t: &OperatorTuple,
    m: usize,
    prefix: Option<&DMatrix<C64>>,
    sign: SignConvention,
    tol: &ToleranceModel,
) -> Result<DefectResult> {
    let mono = Monomials::new(t, m)?;
    let n = t.dim();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    let mut scale: f64 = 0.0;
    for k in 0..=m {
        let level = mono.level_sum(k);
        let term = match prefix {
            Some(p) => p * level,
            None => level,
        } * C64::new(sign.sign(m, k) * binom_f(m, k)?, 0.0);
        scale = scale.max(frob(&term));
        acc += term;
    }
    Ok(DefectResult::new(ComplexMatrix::wrap(acc), scale, tol))
}

/// `∑_k (−1)^{m−k} C(m,k) ∑_{|α|=k} (k!/α!) T*^α T^α`.
pub fn isometry_defect(t: &OperatorTuple, m: usize, tol: &ToleranceModel) -> Result<DefectResult> {
    isometry_defect_with(t, m, SignConvention::Reversed, tol)
}

pub fn isometry_defect_with(
    t: &OperatorTuple,
    m: usize,
    sign: SignConvention,
    tol: &ToleranceModel,
) -> Result<DefectResult> {
    alternating_defect(t, m, None, sign, tol)
}

/// `Δ_{m,q}(T) = T^q ∑_k (−1)^k C(m,k) ∑_{|α|=k} (k!/α!) T*^α T^α`.
pub fn partial_isometry_defect(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<DefectResult> {
    let tq = t.power(q)?;
    alternating_defect(t, m, Some(tq.inner()), SignConvention::Alternating, tol)
}

fn check_vector(t: &OperatorTuple, x: &DVector<C64>) -> Result<()> {
    if x.len() != t.dim() {
        return Err(crate::error::invalid(format!(
            "vector has length {} but the tuple acts on dimension {}",
            x.len(),
            t.dim()
        )));
    }
    Ok(())
}

/// Value of a scalar form together with its largest summand magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ScalarValue {
    value: f64,
    scale: f64,
}

fn scalar_from(mono: &Monomials, m: usize, y: &DVector<C64>) -> Result<ScalarValue> {
    let mut value = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..=m {
        let term = SignConvention::Alternating.sign(m, k) * binom_f(m, k)? * mono.level_norms(k, y);
        scale = scale.max(term.abs());
        value += term;
    }
    Ok(ScalarValue { value, scale })
}

/// `∑_k (−1)^k C(m,k) ∑_{|α|=k} (k!/α!) ‖T^α T*^q x‖²`.
///
/// The norm sum is cross-checked against the quadratic form
/// `⟨T^q L T*^q x, x⟩`, whose imaginary part must be negligible.
pub fn scalar_defect(t: &OperatorTuple, m: usize, q: &MultiIndex, x: &DVector<C64>) -> Result<f64> {
    check_vector(t, x)?;
    let mono = Monomials::new(t, m)?;
    let y = t.adjoint().power(q)?.inner() * x;
    let s = scalar_from(&mono, m, &y)?;

    let mut inner = DMatrix::<C64>::zeros(t.dim(), t.dim());
    for k in 0..=m {
        inner += mono.level_sum(k)
            * C64::new(SignConvention::Alternating.sign(m, k) * binom_f(m, k)?, 0.0);
    }
    let form = y.dotc(&(inner * &y));
    let bound = 1e-8 * s.scale.max(f64::MIN_POSITIVE);
    if form.im.abs() > bound.max(1e-12) {
        return Err(Error::NumericalFailure(format!(
            "quadratic form has imaginary part {:.3e} (scale {:.3e})",
            form.im, s.scale
        )));
    }
    if (form.re - s.value).abs() > 1e-8 * s.scale.max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "norm sum {:.6e} disagrees with quadratic form {:.6e}",
            s.value, form.re
        )));
    }
    Ok(s.value)
}

/// `∑_j ∑_k (−1)^k C(m,k) ∑_{|α|=k} (k!/α!) ‖T^α T_j T*^q x‖²`.
pub fn shifted_scalar_defect(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    x: &DVector<C64>,
) -> Result<f64> {
    check_vector(t, x)?;
    let mono = Monomials::new(t, m)?;
    let y = t.adjoint().power(q)?.inner() * x;
    Ok(shifted_from(&mono, t, m, &y)?.value)
}

fn shifted_from(
    mono: &Monomials,
    t: &OperatorTuple,
    m: usize,
    y: &DVector<C64>,
) -> Result<ScalarValue> {
    let mut total = ScalarValue {
        value: 0.0,
        scale: 0.0,
    };
    for tj in t.matrices() {
        let s = scalar_from(mono, m, &(tj.inner() * y))?;
        total.value += s.value;
        total.scale = total.scale.max(s.scale);
    }
    Ok(total)
}

/// Probe vectors `e_i`; with polarization also `(e_i + e_j)/√2` and
/// `(e_i + i e_j)/√2` for `i < j`, which determine a Hermitian matrix
/// from its quadratic form.
pub fn probe_states(dim: usize, polarization: bool) -> Vec<DVector<C64>> {
    let unit = |i: usize| {
        let mut v = DVector::from_element(dim, ZERO);
        v[i] = ONE;
        v
    };
    let mut out: Vec<DVector<C64>> = (0..dim).map(unit).collect();
    if polarization {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                for c in [ONE, C64::new(0.0, 1.0)] {
                    let mut v = unit(i);
                    v[j] = c;
                    out.push(v * C64::new(h, 0.0));
                }
            }
        }
    }
    out
}

/// Per-component `(m; q_j)` verdict of a single matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentVerdict {
    pub index: usize,
    pub q: usize,
    pub defect: DefectSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub d: usize,
    pub dim: usize,
    pub m: usize,
    pub q: MultiIndex,
    pub partial_isometry: DefectSummary,
    /// Norms of the isometry defect under `(−1)^k` and `(−1)^{m−k}`; they
    /// coincide up to rounding.
    pub isometry_norm_alternating: f64,
    pub isometry_norm_reversed: f64,
    pub is_m_isometry: bool,
    pub components: Vec<ComponentVerdict>,
    pub quasinormal: QuasinormalFlags,
    pub doubly_commuting: bool,
    pub null_space_dim: usize,
    pub null_space_reducing: bool,
    pub entrywise_invertible: Vec<bool>,
    pub max_commutator: f64,
    pub tolerances: ToleranceModel,
}

pub fn classify(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<ClassificationReport> {
    let partial = partial_isometry_defect(t, m, q, tol)?;
    let iso_alt = isometry_defect_with(t, m, SignConvention::Alternating, tol)?;
    let iso_rev = isometry_defect_with(t, m, SignConvention::Reversed, tol)?;
    let components = t
        .matrices()
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let single = OperatorTuple::derived(vec![a.clone()]);
            let qj = q.entries()[index];
            Ok(ComponentVerdict {
                index,
                q: qj,
                defect: partial_isometry_defect(&single, m, &MultiIndex::new(vec![qj]), tol)?
                    .summary(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reducing = t.null_reducing_check(q, tol)?;
    Ok(ClassificationReport {
        d: t.d(),
        dim: t.dim(),
        m,
        q: q.clone(),
        partial_isometry: partial.summary(),
        isometry_norm_alternating: iso_alt.norm,
        isometry_norm_reversed: iso_rev.norm,
        is_m_isometry: iso_rev.is_zero,
        components,
        quasinormal: t.quasinormal_class(tol),
        doubly_commuting: t.is_doubly_commuting(tol),
        null_space_dim: reducing.basis.rank(),
        null_space_reducing: reducing.is_reducing,
        entrywise_invertible: t.entrywise_invertible(tol)?,
        max_commutator: t.max_commutator(),
        tolerances: *tol,
    })
}

/// Compression of the tuple to the orthogonal complement of `N(T^q)`,
/// or `None` when that complement is trivial.
fn restrict_to_complement(
    t: &OperatorTuple,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<Option<OperatorTuple>> {
    let check = t.null_reducing_check(q, tol)?;
    let n = t.dim();
    let w = if check.basis.is_empty() {
        DMatrix::identity(n, n)
    } else {
        null_columns(&check.basis.vectors().adjoint(), 0.5)?
    };
    if w.ncols() == 0 {
        return Ok(None);
    }
    let mats = t
        .matrices()
        .iter()
        .map(|a| ComplexMatrix::wrap(w.adjoint() * a.inner() * &w))
        .collect();
    Ok(Some(OperatorTuple::derived(mats)))
}

/// Operator defect versus the `T*^q`-shifted scalar form on probe states.
pub fn audit_defect_equivalence(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::DefectEquivalence, tol, 0);
    let reducing = t.null_reducing_check(q, tol)?;
    r.hypothesis("N(T^q) reduces every T_j", reducing.is_reducing);
    r.norm("reducing residual", reducing.max_residual);

    let defect = partial_isometry_defect(t, m, q, tol)?;
    let mono = Monomials::new(t, m)?;
    let tq_adj = t.adjoint().power(q)?;
    let mut scalar_zero = true;
    let mut worst = (0.0_f64, None);
    for x in probe_states(t.dim(), true) {
        let s = scalar_from(&mono, m, &(tq_adj.inner() * &x))?;
        if !tol.is_negligible(s.value.abs(), s.scale) {
            scalar_zero = false;
        }
        if s.value.abs() >= worst.0 {
            worst = (s.value.abs(), Some(x));
        }
    }
    r.conclusion(
        "operator defect vanishes iff scalar form vanishes",
        defect.is_zero == scalar_zero,
    );
    r.informational(
        "operator defect vanishes implies scalar form vanishes",
        !defect.is_zero || scalar_zero,
    );
    r.informational(
        "scalar form vanishes implies operator defect vanishes",
        !scalar_zero || defect.is_zero,
    );
    if reducing.is_reducing {
        if let Some(restricted) = restrict_to_complement(t, q, tol)? {
            let iso = isometry_defect(&restricted, m, tol)?;
            r.informational(
                "restriction to the complement of N(T^q) is m-isometric iff defect vanishes",
                iso.is_zero == defect.is_zero,
            );
            r.norm("restricted isometry defect", iso.norm);
        }
    }
    r.norm("partial isometry defect", defect.norm)
        .norm("partial isometry scale", defect.scale)
        .norm("max scalar form", worst.0);
    if let (true, Some(x)) = (worst.0 > 0.0, worst.1) {
        r.witness(
            "probe with largest scalar form",
            x.iter().copied().collect(),
        );
    }
    r.note(notes::SCALAR_SIGN);
    Ok(r)
}

/// `Δ_{m,q} = 0` with a reducing `N(T^q)` gives `Δ_{m+1,q} = Δ_{m+2,q} = 0`.
pub fn audit_order_ascent(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::OrderAscent, tol, 0);
    let base = partial_isometry_defect(t, m, q, tol)?;
    let reducing = t.null_reducing_check(q, tol)?;
    r.hypothesis("defect of order m vanishes", base.is_zero)
        .hypothesis("N(T^q) reduces every T_j", reducing.is_reducing);
    r.norm("defect m", base.norm).norm("scale m", base.scale);
    for step in 1..=2 {
        let next = partial_isometry_defect(t, m + step, q, tol)?;
        r.conclusion(format!("defect of order m+{step} vanishes"), next.is_zero);
        r.norm(format!("defect m+{step}"), next.norm)
            .norm(format!("scale m+{step}"), next.scale);
    }
    Ok(r)
}

/// Kernel-stable components (`N(T_j) = N(T_j²)`) reduce `q` to `(1,…,1)`.
pub fn audit_kernel_stable_reduction(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::KernelStableReduction, tol, 0);
    let base = partial_isometry_defect(t, m, q, tol)?;
    let stable = t
        .matrices()
        .iter()
        .map(|a| {
            let n1 = crate::linalg::null_space_basis(a, tol)?;
            let n2 = crate::linalg::null_space_basis(&a.pow(2), tol)?;
            Ok(n1.same_span(&n2, SUBSPACE_TOL))
        })
        .collect::<Result<Vec<bool>>>()?;
    r.hypothesis("defect of order m vanishes", base.is_zero)
        .hypothesis("N(T_j) = N(T_j^2) for every j", stable.iter().all(|&s| s));
    let ones = MultiIndex::ones(t.d());
    let reduced = partial_isometry_defect(t, m, &ones, tol)?;
    r.conclusion("defect with q = (1,...,1) vanishes", reduced.is_zero);
    if q.dominates(&ones) {
        r.informational(
            "q = (1,...,1) defect vanishing implies q defect vanishing",
            !reduced.is_zero || base.is_zero,
        );
    }
    r.norm("defect q", base.norm)
        .norm("defect ones", reduced.norm);
    Ok(r)
}

/// Given `Δ_{m,q} = 0`: `Δ_{m+1,q} = 0` iff the `T_j`-shifted scalar sums vanish.
pub fn audit_next_order_identity(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::NextOrderIdentity, tol, 0);
    let base = partial_isometry_defect(t, m, q, tol)?;
    let next = partial_isometry_defect(t, m + 1, q, tol)?;
    let reducing = t.null_reducing_check(q, tol)?;
    r.hypothesis("defect of order m vanishes", base.is_zero)
        .side_hypothesis("N(T^q) reduces every T_j", reducing.is_reducing);

    let mono = Monomials::new(t, m + 1)?;
    let tq_adj = t.adjoint().power(q)?;
    let mut shifted_zero = true;
    let mut identity_holds = true;
    let mut max_shifted: f64 = 0.0;
    for x in probe_states(t.dim(), true) {
        let y = tq_adj.inner() * &x;
        let shifted = shifted_from(&mono, t, m, &y)?;
        let lower = scalar_from(&mono, m, &y)?;
        let upper = scalar_from(&mono, m + 1, &y)?;
        if !tol.is_negligible(shifted.value.abs(), shifted.scale) {
            shifted_zero = false;
        }
        let gap = upper.value - (lower.value - shifted.value);
        let scale = upper.scale.max(lower.scale).max(shifted.scale);
        if !tol.is_negligible(gap.abs(), scale) {
            identity_holds = false;
        }
        max_shifted = max_shifted.max(shifted.value.abs());
    }
    r.conclusion(
        "order m+1 defect vanishes iff shifted sums vanish",
        next.is_zero == shifted_zero,
    );
    r.informational(
        "scalar form of order m+1 equals order m minus shifted sums",
        identity_holds,
    );
    r.norm("defect m", base.norm)
        .norm("defect m+1", next.norm)
        .norm("max shifted sum", max_shifted);
    r.note(notes::SCALAR_SIGN);
    Ok(r)
}

/// Quasinormal tuples with vanishing order-`m` defect at `q = (1,…,1)`
/// already have vanishing order-one defect.
pub fn audit_quasinormal_collapse(
    t: &OperatorTuple,
    m: usize,
    tol: &ToleranceModel,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::QuasinormalCollapse, tol, 0);
    let ones = MultiIndex::ones(t.d());
    let flags = t.quasinormal_class(tol);
    let base = partial_isometry_defect(t, m, &ones, tol)?;
    let first = partial_isometry_defect(t, 1, &ones, tol)?;
    r.hypothesis("jointly quasinormal", flags.joint)
        .hypothesis(
            "defect of order m with q = (1,...,1) vanishes",
            base.is_zero,
        )
        .side_hypothesis("matricially quasinormal", flags.matricial);
    r.conclusion(
        "defect of order 1 with q = (1,...,1) vanishes",
        first.is_zero,
    );
    r.informational(
        "matricial variant: hypotheses imply conclusion",
        !(flags.matricial && base.is_zero) || first.is_zero,
    );
    r.norm("defect m", base.norm).norm("defect 1", first.norm);
    r.note(notes::QUASINORMAL_VARIANT);
    Ok(r)
}

/// All order-ascent style checks on one instance, each folded in as an
/// implication.
pub fn audit_ascent_family(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::OrderAscent, tol, 0);
    r.absorb("ascent", &audit_order_ascent(t, m, q, tol)?);
    r.absorb(
        "kernel-stable reduction",
        &audit_kernel_stable_reduction(t, m, q, tol)?,
    );
    r.absorb(
        "next-order identity",
        &audit_next_order_identity(t, m, q, tol)?,
    );
    r.absorb(
        "quasinormal collapse",
        &audit_quasinormal_collapse(t, m, tol)?,
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn tol() -> ToleranceModel {
        ToleranceModel::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn example_21() -> ComplexMatrix {
        let h = FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[h, h, 0.0]]).unwrap()
    }

    fn cycle_i() -> ComplexMatrix {
        let z = c(0.0, 0.0);
        let i = c(0.0, 1.0);
        ComplexMatrix::from_rows(&[vec![z, z, i], vec![i, z, z], vec![z, i, z]]).unwrap()
    }

    fn golden() -> ComplexMatrix {
        let a = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
        ComplexMatrix::from_real_rows(&[&[a, 0.0], &[1.0, 0.0]]).unwrap()
    }

    fn tuple(ms: Vec<ComplexMatrix>) -> OperatorTuple {
        OperatorTuple::new(ms, &tol()).unwrap()
    }

    #[test]
    fn scaled_identity_is_isometric() {
        for d in 1..=3 {
            let s = 1.0 / (d as f64).sqrt();
            let t = tuple(vec![ComplexMatrix::identity(3).scaled(c(s, 0.0)); d]);
            let r = isometry_defect(&t, 1, &tol()).unwrap();
            assert!(r.norm < 1e-14 && r.is_zero);
        }
    }

    #[test]
    fn doubled_identity_defect() {
        let t = tuple(vec![ComplexMatrix::identity(4).scaled(c(2.0, 0.0))]);
        let r = isometry_defect(&t, 1, &tol()).unwrap();
        assert!((r.norm - 3.0 * 2.0).abs() < 1e-12);
        assert!(!r.is_zero);
        assert!((r.matrix[(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn unitary_scaled_any_order() {
        let u = cycle_i();
        for d in 1..=3 {
            let s = 1.0 / (d as f64).sqrt();
            let t = tuple(vec![u.scaled(c(s, 0.0)); d]);
            for m in 1..=4 {
                assert!(
                    isometry_defect(&t, m, &tol()).unwrap().is_zero,
                    "d={d} m={m}"
                );
            }
        }
    }

    #[test]
    fn single_matrix_example_is_partial_isometry() {
        let t = tuple(vec![example_21()]);
        let r = partial_isometry_defect(&t, 1, &MultiIndex::new(vec![1]), &tol()).unwrap();
        assert!(r.norm <= 1e-12);
        for x in probe_states(3, false) {
            let s = scalar_defect(&t, 1, &MultiIndex::new(vec![1]), &x).unwrap();
            assert!(s.abs() <= 1e-12);
        }
    }

    #[test]
    fn cycle_pair_defect_is_the_cycle() {
        let t1 = cycle_i();
        let t = tuple(vec![t1.clone(), ComplexMatrix::identity(3)]);
        let r = partial_isometry_defect(&t, 2, &MultiIndex::ones(2), &tol()).unwrap();
        assert!((r.norm - 3f64.sqrt()).abs() < 1e-10);
        assert!((&r.matrix - &t1).frobenius_norm() < 1e-12);
        let mut e1 = DVector::from_element(3, ZERO);
        e1[0] = ONE;
        let s = scalar_defect(&t, 2, &MultiIndex::ones(2), &e1).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_padded_is_order_two() {
        let t = tuple(vec![golden(), ComplexMatrix::zeros(2)]);
        let r = partial_isometry_defect(&t, 2, &MultiIndex::new(vec![1, 0]), &tol()).unwrap();
        assert!(r.norm <= 1e-12, "{}", r.norm);
    }

    #[test]
    fn zero_vector_gives_zero() {
        let t = tuple(vec![golden()]);
        let x = DVector::from_element(2, ZERO);
        assert_eq!(
            scalar_defect(&t, 3, &MultiIndex::new(vec![2]), &x).unwrap(),
            0.0
        );
        assert!(scalar_defect(
            &t,
            1,
            &MultiIndex::new(vec![1]),
            &DVector::from_element(3, ONE)
        )
        .is_err());
    }

    #[test]
    fn sign_conventions_agree_in_norm() {
        let t = tuple(vec![golden(), golden().scaled(c(0.3, -0.2))]);
        for m in 1..=4 {
            let a = isometry_defect_with(&t, m, SignConvention::Alternating, &tol()).unwrap();
            let b = isometry_defect_with(&t, m, SignConvention::Reversed, &tol()).unwrap();
            assert!((a.norm - b.norm).abs() <= 1e-12 * a.scale.max(1.0));
        }
    }

    #[test]
    fn probes_count() {
        assert_eq!(probe_states(3, false).len(), 3);
        assert_eq!(probe_states(3, true).len(), 3 + 6);
    }

    #[test]
    fn classification_examples() {
        let h = FRAC_1_SQRT_2;
        let t = tuple(vec![example_21().scaled(c(h, 0.0)); 2]);
        let rep = classify(&t, 1, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(rep.partial_isometry.is_zero);
        assert!(!rep.null_space_reducing);

        let pair = tuple(vec![cycle_i(), ComplexMatrix::identity(3)]);
        let rep = classify(&pair, 2, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(!rep.partial_isometry.is_zero);
        assert!(rep.components.iter().all(|c| c.defect.is_zero));

        let u = tuple(vec![cycle_i().scaled(c(h, 0.0)); 2]);
        let rep = classify(&u, 1, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(rep.is_m_isometry && rep.partial_isometry.is_zero);
        assert!(rep.quasinormal.matricial && rep.doubly_commuting);
        assert_eq!(rep.entrywise_invertible, vec![true, true]);
    }

    #[test]
    fn equivalence_audit_examples() {
        let h = FRAC_1_SQRT_2;
        let u = tuple(vec![cycle_i().scaled(c(h, 0.0)); 2]);
        let r = audit_defect_equivalence(&u, 1, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(r.hypotheses_hold && r.conclusion_holds);

        let pair = tuple(vec![cycle_i(), ComplexMatrix::identity(3)]);
        let r = audit_defect_equivalence(&pair, 2, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(r.hypotheses_hold && r.conclusion_holds);
        assert!(r.norms["max scalar form"] > 0.5);

        let t = tuple(vec![example_21().scaled(c(h, 0.0)); 2]);
        let r = audit_defect_equivalence(&t, 1, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(!r.hypotheses_hold);
        assert!(!r.is_counterexample());
    }

    #[test]
    fn ascent_examples() {
        let h = FRAC_1_SQRT_2;
        let u = tuple(vec![cycle_i().scaled(c(h, 0.0)); 2]);
        let r = audit_order_ascent(&u, 1, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(r.hypotheses_hold && r.conclusion_holds);

        let t = tuple(vec![example_21()]);
        let r = audit_order_ascent(&t, 1, &MultiIndex::new(vec![1]), &tol()).unwrap();
        assert!(!r.hypotheses_hold);
        assert!(
            !r.hypothesis_named("N(T^q) reduces every T_j")
                .unwrap()
                .holds
        );

        let diag = tuple(vec![
            ComplexMatrix::diagonal(&[c(0.6, 0.0), c(0.0, 1.0)]).unwrap(),
            ComplexMatrix::diagonal(&[c(0.0, 0.8), c(0.0, 0.0)]).unwrap(),
        ]);
        let r = audit_quasinormal_collapse(&diag, 3, &tol()).unwrap();
        assert!(r.hypotheses_hold && r.conclusion_holds);

        let r = audit_ascent_family(&u, 1, &MultiIndex::ones(2), &tol()).unwrap();
        assert!(r.conclusion_holds, "{r:#?}");
    }

    #[test]
    fn next_order_identity_holds_algebraically() {
        let t = tuple(vec![golden(), ComplexMatrix::zeros(2)]);
        let r = audit_next_order_identity(&t, 2, &MultiIndex::new(vec![1, 0]), &tol()).unwrap();
        assert!(
            r.sub_verdict("scalar form of order m+1 equals order m minus shifted sums")
                .unwrap()
                .holds
        );
    }
}
