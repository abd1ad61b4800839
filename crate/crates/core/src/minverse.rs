//! Left and right m-inverses through the polynomials
//! `β_m(S,T) = ∑_k (−1)^{m−k} C(m,k) ∑_{|α|=k} (k!/α!) S^α T^α`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{frob, smallest_singular, stack_shifted, ComplexMatrix, ToleranceModel, C64};
use crate::multiindex::{
    binomial, enumerate_multiindices, multinomial_weight, pochhammer_descending,
};
use crate::report::{notes, AuditReport, Claim};
use crate::spectra::{joint_point_spectrum, residual_bound, zero_variety_member};
use crate::tuples::OperatorTuple;

/// Largest order for which the recurrence is cross-checked by enumeration.
pub const CROSS_CHECK_MAX_ORDER: usize = 4;
/// Relative disagreement tolerated between the two β evaluations.
pub const CROSS_CHECK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMethod {
    Enumeration,
    Recurrence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaResult {
    pub matrix: ComplexMatrix,
    pub norm: f64,
    /// `max_k C(m,k) ‖∑_{|α|=k} (k!/α!) S^α T^α‖_F`.
    pub scale: f64,
    pub method: BetaMethod,
    /// `‖β_recurrence − β_enumeration‖_F / scale` when both were computed.
    pub cross_check: Option<f64>,
}

impl BetaResult {
    pub fn is_zero(&self, tol: &ToleranceModel) -> bool {
        tol.is_negligible(self.norm, self.scale)
    }
}

fn check_shapes(a: &OperatorTuple, b: &OperatorTuple) -> Result<()> {
    if a.d() != b.d() || a.dim() != b.dim() {
        return Err(invalid(format!(
            "tuples must share d and dimension, got d={} dim={} and d={} dim={}",
            a.d(),
            a.dim(),
            b.d(),
            b.dim()
        )));
    }
    Ok(())
}

fn sign(m: usize, k: usize) -> f64 {
    if (m - k).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `P_k = ∑_{|α|=k} (k!/α!) A^α B^α` by enumeration.
fn level_by_enumeration(a: &OperatorTuple, b: &OperatorTuple, k: usize) -> Result<DMatrix<C64>> {
    let n = a.dim();
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for alpha in enumerate_multiindices(a.d(), k)? {
        let w = multinomial_weight(&alpha)? as f64;
        acc += (a.power(&alpha)?.inner() * b.power(&alpha)?.inner()) * C64::new(w, 0.0);
    }
    Ok(acc)
}

/// `P_0, …, P_m` through `P_{k+1} = ∑_j A_j P_k B_j`.
fn levels_by_recurrence(a: &OperatorTuple, b: &OperatorTuple, m: usize) -> Vec<DMatrix<C64>> {
    let n = a.dim();
    let mut levels = vec![DMatrix::<C64>::identity(n, n)];
    for _ in 0..m {
        let prev = levels.last().expect("nonempty");
        let next = a
            .matrices()
            .iter()
            .zip(b.matrices())
            .fold(DMatrix::zeros(n, n), |acc, (aj, bj)| {
                acc + aj.inner() * prev * bj.inner()
            });
        levels.push(next);
    }
    levels
}

fn scale_of(levels: &[DMatrix<C64>], m: usize) -> Result<f64> {
    let mut scale: f64 = 0.0;
    for (k, p) in levels.iter().enumerate() {
        scale = scale.max(binomial(m, k)? as f64 * frob(p));
    }
    Ok(scale)
}

fn beta_enumeration(a: &OperatorTuple, b: &OperatorTuple, m: usize) -> Result<(DMatrix<C64>, f64)> {
    let levels = (0..=m)
        .map(|k| level_by_enumeration(a, b, k))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = DMatrix::<C64>::zeros(a.dim(), a.dim());
    for (k, p) in levels.iter().enumerate() {
        acc += p * C64::new(sign(m, k) * binomial(m, k)? as f64, 0.0);
    }
    Ok((acc, scale_of(&levels, m)?))
}

/// `β_0, …, β_m` through `β_{k+1} = −β_k + ∑_j A_j β_k B_j`.
fn betas_by_recurrence(a: &OperatorTuple, b: &OperatorTuple, m: usize) -> Vec<DMatrix<C64>> {
    let n = a.dim();
    let mut out = vec![DMatrix::<C64>::identity(n, n)];
    for _ in 0..m {
        let prev = out.last().expect("nonempty");
        let mut next = -prev.clone();
        for (aj, bj) in a.matrices().iter().zip(b.matrices()) {
            next += aj.inner() * prev * bj.inner();
        }
        out.push(next);
    }
    out
}

/// `∑_k (−1)^{m−k} C(m,k) ∑_{|α|=k} (k!/α!) A^α B^α`.
pub fn beta_sided(
    a: &OperatorTuple,
    b: &OperatorTuple,
    m: usize,
    method: BetaMethod,
) -> Result<BetaResult> {
    check_shapes(a, b)?;
    let (matrix, scale, cross_check) = match method {
        BetaMethod::Enumeration => {
            let (mat, scale) = beta_enumeration(a, b, m)?;
            (mat, scale, None)
        }
        BetaMethod::Recurrence => {
            let mat = betas_by_recurrence(a, b, m).pop().expect("nonempty");
            let scale = scale_of(&levels_by_recurrence(a, b, m), m)?;
            let cross = if m <= CROSS_CHECK_MAX_ORDER {
                let (reference, _) = beta_enumeration(a, b, m)?;
                let gap = frob(&(&mat - reference)) / scale;
                if gap > CROSS_CHECK_TOL {
                    return Err(Error::NumericalFailure(format!(
                        "recurrence and enumeration disagree for m={m}: relative gap {gap:.3e}"
                    )));
                }
                Some(gap)
            } else {
                None
            };
            (mat, scale, cross)
        }
    };
    Ok(BetaResult {
        norm: frob(&matrix),
        matrix: ComplexMatrix::wrap(matrix),
        scale,
        method,
        cross_check,
    })
}

/// `β_m(S,T)` with monomials `S^α T^α`.
pub fn beta(
    s: &OperatorTuple,
    t: &OperatorTuple,
    m: usize,
    method: BetaMethod,
) -> Result<BetaResult> {
    beta_sided(s, t, m, method)
}

pub fn is_left_m_inverse(
    s: &OperatorTuple,
    t: &OperatorTuple,
    m: usize,
    tol: &ToleranceModel,
) -> Result<bool> {
    Ok(beta(s, t, m, BetaMethod::Recurrence)?.is_zero(tol))
}

/// Right variant: monomials `T^α R^α`.
pub fn is_right_m_inverse(
    r: &OperatorTuple,
    t: &OperatorTuple,
    m: usize,
    tol: &ToleranceModel,
) -> Result<bool> {
    Ok(beta_sided(t, r, m, BetaMethod::Recurrence)?.is_zero(tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// `C(n,k)`
    Binomial,
    /// Descending Pochhammer `n^(k)`
    Pochhammer,
}

impl CoefficientMode {
    pub fn coefficient(self, n: usize, k: usize) -> Result<f64> {
        Ok(match self {
            CoefficientMode::Binomial => binomial(n, k)?,
            CoefficientMode::Pochhammer => pochhammer_descending(n, k)?,
        } as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSumExpansion {
    pub lhs: ComplexMatrix,
    pub rhs: ComplexMatrix,
    /// `‖lhs − rhs‖_F / max(1, ‖lhs‖_F)`.
    pub deviation: f64,
}

/// `∑_{|α|=n} (n!/α!) S^α T^α` against `∑_{k<top} c(n,k) β_k(S,T)`.
fn expansion(
    s: &OperatorTuple,
    t: &OperatorTuple,
    n: usize,
    top: usize,
    mode: CoefficientMode,
) -> Result<PowerSumExpansion> {
    check_shapes(s, t)?;
    let lhs = level_by_enumeration(s, t, n)?;
    let betas = betas_by_recurrence(s, t, n);
    let mut rhs = DMatrix::<C64>::zeros(s.dim(), s.dim());
    for (k, b) in betas.iter().enumerate().take(top.min(n + 1)) {
        rhs += b * C64::new(mode.coefficient(n, k)?, 0.0);
    }
    let deviation = frob(&(&lhs - &rhs)) / frob(&lhs).max(1.0);
    Ok(PowerSumExpansion {
        lhs: ComplexMatrix::wrap(lhs),
        rhs: ComplexMatrix::wrap(rhs),
        deviation,
    })
}

pub fn expand_power_sum(
    s: &OperatorTuple,
    t: &OperatorTuple,
    n: usize,
    mode: CoefficientMode,
) -> Result<PowerSumExpansion> {
    expansion(s, t, n, n + 1, mode)
}

/// Expansion truncated to `β_0, …, β_{m−1}`, as for a left m-inverse.
pub fn expand_power_sum_truncated(
    s: &OperatorTuple,
    t: &OperatorTuple,
    n: usize,
    m: usize,
    mode: CoefficientMode,
) -> Result<PowerSumExpansion> {
    expansion(s, t, n, m, mode)
}

/// Whether `μ` is a joint eigenvalue of `t`: the stacked `[T_j − μ_j]` has
/// a singular value within the eigenpair residual bound.
fn is_joint_eigenvalue(t: &OperatorTuple, mu: &[C64]) -> Result<(bool, f64)> {
    let mats: Vec<&DMatrix<C64>> = t.matrices().iter().map(|a| a.inner()).collect();
    let (sigma, _) = smallest_singular(&stack_shifted(&mats, mu))?;
    Ok((sigma <= residual_bound(t), sigma))
}

/// Shared body of the two spectral-map audits. `source` carries the
/// spectrum being mapped, `target` must contain its image.
fn spectral_map_audit(
    claim: Claim,
    source: &OperatorTuple,
    target: &OperatorTuple,
    hypothesis_name: &str,
    hypothesis: bool,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(claim, tol, seed);
    r.hypothesis(hypothesis_name, hypothesis);
    let spec = joint_point_spectrum(source, seed, tol)?;
    let d = source.d() as f64;

    // a finite point set never contains the zero variety
    r.conclusion("zero variety not contained in point spectrum", true);
    let meets_variety = spec.iter().any(|p| zero_variety_member(&p.lambda, tol));
    r.informational("point spectrum avoids the zero variety", !meets_variety);
    for p in spec.iter().filter(|p| zero_variety_member(&p.lambda, tol)) {
        r.witness("eigenvalue in the zero variety", p.lambda.clone());
    }

    let mut maps = true;
    let mut worst: f64 = 0.0;
    for p in spec.iter().filter(|p| !zero_variety_member(&p.lambda, tol)) {
        let image: Vec<C64> = p
            .lambda
            .iter()
            .map(|z| C64::new(1.0, 0.0) / (z * d))
            .collect();
        let (hit, sigma) = is_joint_eigenvalue(target, &image)?;
        worst = worst.max(sigma);
        if !hit {
            maps = false;
            r.witness(
                "eigenvalue whose image is not an eigenvalue",
                p.lambda.clone(),
            );
            r.witness("image (1/(d lambda_j))", image);
        }
    }
    r.conclusion(
        "image of every eigenvalue off the zero variety is an eigenvalue",
        maps,
    );
    r.norm("max image singular value", worst)
        .norm("eigenvalue count", spec.len() as f64);
    r.note(notes::FINITE_SURROGATE)
        .note(notes::ZERO_VARIETY_READING)
        .note(notes::INVERSE_MAP_CLAIM);
    Ok(r)
}

/// Spectral map `λ ↦ (1/(dλ_j))` from `σ_p(T)` into `σ_p(S)` for a left
/// m-inverse `S`.
pub fn audit_left_inverse_spectral_map(
    s: &OperatorTuple,
    t: &OperatorTuple,
    m: usize,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let b = beta(s, t, m, BetaMethod::Recurrence)?;
    let mut r = spectral_map_audit(
        Claim::LeftInverseSpectralMap,
        t,
        s,
        "S is a left m-inverse of T",
        b.is_zero(tol),
        tol,
        seed,
    )?;
    r.norm("beta_m", b.norm).norm("beta_m scale", b.scale);
    Ok(r)
}

/// Spectral map from `σ_p(R)` into `σ_p(T)` for a right m-inverse `R`.
pub fn audit_right_inverse_spectral_map(
    r_tuple: &OperatorTuple,
    t: &OperatorTuple,
    m: usize,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let b = beta_sided(t, r_tuple, m, BetaMethod::Recurrence)?;
    let mut r = spectral_map_audit(
        Claim::RightInverseSpectralMap,
        r_tuple,
        t,
        "R is a right m-inverse of T",
        b.is_zero(tol),
        tol,
        seed,
    )?;
    r.norm("beta_m", b.norm).norm("beta_m scale", b.scale);
    Ok(r)
}

/// Largest order `n` used by the power-sum audit.
pub const EXPANSION_MAX_ORDER: usize = 6;
/// Deviation accepted by the power-sum audit.
pub const EXPANSION_TOL: f64 = 1e-10;

/// Power-sum expansion for `n = 0..=6` under both coefficient readings.
/// The printed descending-Pochhammer reading is the binding one.
pub fn audit_power_sum_expansion(
    s: &OperatorTuple,
    t: &OperatorTuple,
    m: usize,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::PowerSumExpansion, tol, seed);
    r.hypothesis(
        "S and T are commuting tuples of equal shape",
        s.d() == t.d() && s.dim() == t.dim(),
    );
    let left = beta(s, t, m, BetaMethod::Recurrence)?.is_zero(tol);
    r.side_hypothesis("S is a left m-inverse of T", left);

    let mut worst = [0.0_f64; 2];
    let mut worst_n = [0usize; 2];
    for n in 1..=EXPANSION_MAX_ORDER {
        for (i, mode) in [CoefficientMode::Pochhammer, CoefficientMode::Binomial]
            .into_iter()
            .enumerate()
        {
            let dev = expand_power_sum(s, t, n, mode)?.deviation;
            if dev > worst[i] {
                worst[i] = dev;
                worst_n[i] = n;
            }
        }
    }
    r.conclusion(
        "expansion with descending Pochhammer coefficients",
        worst[0] <= EXPANSION_TOL,
    );
    r.informational(
        "expansion with binomial coefficients",
        worst[1] <= EXPANSION_TOL,
    );
    r.norm("max deviation pochhammer", worst[0])
        .norm("max deviation binomial", worst[1])
        .norm("order of max deviation pochhammer", worst_n[0] as f64);

    let zero_case = expand_power_sum(s, t, 0, CoefficientMode::Pochhammer)?.deviation;
    r.informational(
        "descending Pochhammer expansion at n = 0",
        zero_case <= EXPANSION_TOL,
    );
    r.norm("deviation pochhammer n=0", zero_case);

    if left {
        let mut trunc = 0.0_f64;
        for n in 0..=EXPANSION_MAX_ORDER {
            trunc = trunc
                .max(expand_power_sum_truncated(s, t, n, m, CoefficientMode::Binomial)?.deviation);
        }
        r.informational(
            "truncated binomial expansion for a left m-inverse",
            trunc <= EXPANSION_TOL,
        );
        r.norm("max deviation truncated binomial", trunc);
    }
    r.note(notes::POCHHAMMER_COEFFICIENT)
        .note(notes::POCHHAMMER_AT_ZERO);
    Ok(r)
}
