//! Joint spectra of commuting tuples in finite dimension.
//!
//! The approximate point spectrum coincides with the point spectrum here,
//! and the Taylor spectrum is read off the diagonal of a simultaneous
//! upper-triangular form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::defects::partial_isometry_defect;
use crate::error::{Error, Result};
use crate::linalg::{
    frob, null_columns, refine_common_eigenpair, reflector_with_first_column, schur,
    smallest_singular, stack_shifted, ComplexMatrix, ToleranceModel, C64, EIGEN_RESIDUAL,
};
use crate::multiindex::MultiIndex;
use crate::report::{notes, AuditReport, Claim};
use crate::rng;
use crate::tuples::OperatorTuple;

/// Below-diagonal mass accepted in a simultaneous triangular form.
pub const TRIANGULAR_TOL: f64 = 1e-7;
/// Random combinations tried before falling back to deflation.
pub const MAX_ATTEMPTS: u64 = 8;
/// `|‖λ‖₂ − 1|` accepted as lying on the unit sphere.
pub const SPHERE_TOL: f64 = 1e-8;
/// `|⟨x, y⟩|` accepted as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangularizationMethod {
    RandomCombination,
    Deflation,
}

#[derive(Clone, Debug)]
pub struct Triangularization {
    pub q: ComplexMatrix,
    pub upper: Vec<ComplexMatrix>,
    /// Largest `‖strict lower part of Q*T_jQ‖_F`.
    pub below_diagonal: f64,
    pub attempts: u64,
    pub method: TriangularizationMethod,
}

impl Triangularization {
    /// Diagonal d-vectors `(U₁[i,i], …, U_d[i,i])` with multiplicity.
    pub fn diagonal(&self) -> Vec<Vec<C64>> {
        let n = self.q.dim();
        (0..n)
            .map(|i| self.upper.iter().map(|u| u[(i, i)]).collect())
            .collect()
    }
}

fn lower_mass(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in j + 1..n {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Conjugates every component by `q` and measures how far from upper
/// triangular the results are, relative to the per-component bound.
fn conjugate_all(t: &OperatorTuple, q: &DMatrix<C64>) -> (Vec<ComplexMatrix>, f64, bool) {
    let mut upper = Vec::with_capacity(t.d());
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for a in t.matrices() {
        let u = q.adjoint() * a.inner() * q;
        let mass = lower_mass(&u);
        worst = worst.max(mass);
        if mass > TRIANGULAR_TOL * a.frobenius_norm().max(1.0) {
            ok = false;
        }
        upper.push(ComplexMatrix::wrap(u));
    }
    (upper, worst, ok)
}

/// Unitary `Q` with every `Q*T_jQ` upper triangular.
///
/// A random combination `∑ c_j T_j` is Schur-decomposed; its Schur basis
/// triangularizes the whole tuple unless `c` is unlucky, in which case a
/// fresh `c` is drawn. After [`MAX_ATTEMPTS`] failures a deflation by common
/// eigenvectors is used instead.
pub fn simultaneous_triangularize(
    t: &OperatorTuple,
    seed: u64,
    _tol: &ToleranceModel,
) -> Result<Triangularization> {
    let n = t.dim();
    for attempt in 0..MAX_ATTEMPTS {
        let mut g = rng::derived(seed, attempt);
        let c = rng::unit_vector(&mut g, t.d());
        let mut comb = DMatrix::<C64>::zeros(n, n);
        for (a, cj) in t.matrices().iter().zip(c.iter()) {
            comb += a.inner() * *cj;
        }
        let (q, _) = schur(&comb)?;
        let (upper, below_diagonal, ok) = conjugate_all(t, &q);
        if ok {
            return Ok(Triangularization {
                q: ComplexMatrix::wrap(q),
                upper,
                below_diagonal,
                attempts: attempt + 1,
                method: TriangularizationMethod::RandomCombination,
            });
        }
    }
    let mats: Vec<DMatrix<C64>> = t.matrices().iter().map(|a| a.inner().clone()).collect();
    let q = deflate(&mats)?;
    let (upper, below_diagonal, ok) = conjugate_all(t, &q);
    if !ok {
        return Err(Error::NumericalFailure(format!(
            "simultaneous triangularization failed after {MAX_ATTEMPTS} random combinations and deflation \
             (below-diagonal mass {below_diagonal:.3e}); is the tuple commuting?"
        )));
    }
    Ok(Triangularization {
        q: ComplexMatrix::wrap(q),
        upper,
        below_diagonal,
        attempts: MAX_ATTEMPTS + 1,
        method: TriangularizationMethod::Deflation,
    })
}

/// A unit vector that is (numerically) an eigenvector of every matrix.
fn common_eigenvector(mats: &[DMatrix<C64>]) -> Result<DVector<C64>> {
    let n = mats[0].nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    for a in mats {
        let b = v.adjoint() * a * &v;
        let (_, u) = schur(&b)?;
        let mu = u[(0, 0)];
        let mut shifted = b.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] -= mu;
        }
        let cutoff = TRIANGULAR_TOL * frob(&b).max(1.0);
        let mut null = null_columns(&shifted, cutoff)?;
        if null.ncols() == 0 {
            let (_, x) = smallest_singular(&shifted)?;
            null = DMatrix::from_column_slice(x.len(), 1, x.as_slice());
        }
        v = &v * null;
    }
    Ok(v.column(0).into_owned())
}

fn deflate(mats: &[DMatrix<C64>]) -> Result<DMatrix<C64>> {
    let n = mats[0].nrows();
    if n == 1 {
        return Ok(DMatrix::identity(1, 1));
    }
    let v = common_eigenvector(mats)?;
    let h = reflector_with_first_column(&v);
    let blocks: Vec<DMatrix<C64>> = mats
        .iter()
        .map(|a| {
            (h.adjoint() * a * &h)
                .view((1, 1), (n - 1, n - 1))
                .into_owned()
        })
        .collect();
    let sub = deflate(&blocks)?;
    let mut embed = DMatrix::<C64>::identity(n, n);
    embed.view_mut((1, 1), (n - 1, n - 1)).copy_from(&sub);
    Ok(h * embed)
}

/// Diagonal of a simultaneous triangular form: the Taylor spectrum with
/// multiplicity.
pub fn taylor_diagonal(
    t: &OperatorTuple,
    seed: u64,
    tol: &ToleranceModel,
) -> Result<Vec<Vec<C64>>> {
    Ok(simultaneous_triangularize(t, seed, tol)?.diagonal())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointEigenpair {
    pub lambda: Vec<C64>,
    pub witness: Vec<C64>,
    /// `max_j ‖(T_j − λ_j) x‖₂`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSpectrumResult {
    pub point_spectrum: Vec<JointEigenpair>,
    pub taylor_diagonal: Vec<Vec<C64>>,
    pub spectral_radius: f64,
    pub residuals: Vec<f64>,
    pub seed: u64,
    pub method: TriangularizationMethod,
}

/// ℓ∞ distance on `C^d`.
pub fn linf_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn euclidean_norm(lambda: &[C64]) -> f64 {
    lambda.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn cluster(points: &[Vec<C64>], radius: f64) -> Vec<Vec<C64>> {
    let mut reps: Vec<Vec<C64>> = Vec::new();
    for p in points {
        if !reps.iter().any(|r| linf_distance(r, p) <= radius) {
            reps.push(p.clone());
        }
    }
    reps
}

/// Residual bound for an accepted joint eigenpair.
pub fn residual_bound(t: &OperatorTuple) -> f64 {
    EIGEN_RESIDUAL * t.max_norm().max(1.0)
}

fn point_spectrum_from(
    t: &OperatorTuple,
    candidates: &[Vec<C64>],
    tol: &ToleranceModel,
) -> Result<Vec<JointEigenpair>> {
    let mats: Vec<&DMatrix<C64>> = t.matrices().iter().map(|a| a.inner()).collect();
    let bound = residual_bound(t);
    let mut out: Vec<JointEigenpair> = Vec::new();
    for cand in cluster(candidates, tol.cluster_tol) {
        let (lambda, x, residual) = refine_common_eigenpair(&mats, &cand)?;
        if residual > bound {
            continue;
        }
        if out
            .iter()
            .any(|p| linf_distance(&p.lambda, &lambda) <= tol.cluster_tol)
        {
            continue;
        }
        out.push(JointEigenpair {
            lambda,
            witness: x.iter().copied().collect(),
            residual,
        });
    }
    Ok(out)
}

/// Points `λ` with a common eigenvector, one unit witness each.
pub fn joint_point_spectrum(
    t: &OperatorTuple,
    seed: u64,
    tol: &ToleranceModel,
) -> Result<Vec<JointEigenpair>> {
    let diag = taylor_diagonal(t, seed, tol)?;
    point_spectrum_from(t, &diag, tol)
}

pub fn joint_spectrum(
    t: &OperatorTuple,
    seed: u64,
    tol: &ToleranceModel,
) -> Result<JointSpectrumResult> {
    let tri = simultaneous_triangularize(t, seed, tol)?;
    let diag = tri.diagonal();
    let point_spectrum = point_spectrum_from(t, &diag, tol)?;
    Ok(JointSpectrumResult {
        residuals: point_spectrum.iter().map(|p| p.residual).collect(),
        spectral_radius: diag.iter().map(|l| euclidean_norm(l)).fold(0.0, f64::max),
        taylor_diagonal: diag,
        point_spectrum,
        seed,
        method: tri.method,
    })
}

/// `max ‖λ‖₂` over the Taylor diagonal.
pub fn spectral_radius(t: &OperatorTuple, seed: u64, tol: &ToleranceModel) -> Result<f64> {
    Ok(taylor_diagonal(t, seed, tol)?
        .iter()
        .map(|l| euclidean_norm(l))
        .fold(0.0, f64::max))
}

/// `∏ λ_j = 0`, decided coordinatewise.
pub fn zero_variety_member(lambda: &[C64], tol: &ToleranceModel) -> bool {
    lambda.iter().any(|z| z.norm() <= tol.abs_tol)
}

pub fn on_unit_sphere(lambda: &[C64]) -> bool {
    (euclidean_norm(lambda) - 1.0).abs() <= SPHERE_TOL
}

/// Smallest singular value of the stacked `[T₁; …; T_d]`: the best `δ`
/// with `(∑‖T_j x‖²)^{1/2} ≥ δ‖x‖`.
pub fn joint_lower_bound(t: &OperatorTuple) -> Result<f64> {
    let mats: Vec<&DMatrix<C64>> = t.matrices().iter().map(|a| a.inner()).collect();
    let zeros = vec![C64::new(0.0, 0.0); t.d()];
    Ok(smallest_singular(&stack_shifted(&mats, &zeros))?.0)
}

pub fn jointly_bounded_below(t: &OperatorTuple, tol: &ToleranceModel) -> Result<bool> {
    let delta = joint_lower_bound(t)?;
    Ok(!tol.is_negligible(delta, t.max_norm()))
}

/// Orthonormal basis of `∩_j N(T_j − λ_j)`, falling back to the witness.
fn joint_eigenspace(t: &OperatorTuple, pair: &JointEigenpair) -> Result<DMatrix<C64>> {
    let mats: Vec<&DMatrix<C64>> = t.matrices().iter().map(|a| a.inner()).collect();
    let basis = null_columns(&stack_shifted(&mats, &pair.lambda), residual_bound(t))?;
    if basis.ncols() > 0 {
        return Ok(basis);
    }
    let x = DVector::from_vec(pair.witness.clone());
    Ok(DMatrix::from_column_slice(x.len(), 1, x.as_slice()))
}

fn partial_hypotheses(
    r: &mut AuditReport,
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
) -> Result<()> {
    let defect = partial_isometry_defect(t, m, q, tol)?;
    let reducing = t.null_reducing_check(q, tol)?;
    r.hypothesis("partial isometry defect vanishes", defect.is_zero)
        .hypothesis("N(T^q) reduces every T_j", reducing.is_reducing);
    r.norm("partial isometry defect", defect.norm);
    Ok(())
}

/// Every joint eigenvalue lies on the unit sphere or in the zero variety.
pub fn audit_spectrum_location(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::SpectrumLocation, tol, seed);
    partial_hypotheses(&mut r, t, m, q, tol)?;
    let spec = joint_spectrum(t, seed, tol)?;
    let mut inside = true;
    let mut max_gap: f64 = 0.0;
    for p in &spec.point_spectrum {
        let on_sphere = on_unit_sphere(&p.lambda);
        let in_variety = zero_variety_member(&p.lambda, tol);
        if !in_variety {
            max_gap = max_gap.max((euclidean_norm(&p.lambda) - 1.0).abs());
        }
        if !on_sphere && !in_variety {
            inside = false;
            r.witness(
                "eigenvalue off the sphere and the zero variety",
                p.lambda.clone(),
            );
        }
    }
    r.conclusion("point spectrum inside unit sphere or zero variety", inside);
    r.informational(
        "spectral radius equals 1",
        (spec.spectral_radius - 1.0).abs() <= SPHERE_TOL,
    );
    r.norm("spectral radius", spec.spectral_radius)
        .norm("max distance to sphere outside zero variety", max_gap)
        .norm("joint eigenvalue count", spec.point_spectrum.len() as f64);
    r.note(notes::FINITE_SURROGATE)
        .note(notes::SPECTRAL_RADIUS_EXPONENT)
        .note(notes::RADIUS_DICHOTOMY);
    if !r.hypotheses_hold && !inside {
        r.note(notes::REDUCING_SHARPNESS);
    }
    Ok(r)
}

/// Conjugated eigenvalues of the adjoint tuple, and orthogonality of joint
/// eigenspaces for well-separated eigenvalues.
pub fn audit_eigen_conjugation(
    t: &OperatorTuple,
    m: usize,
    q: &MultiIndex,
    tol: &ToleranceModel,
    seed: u64,
) -> Result<AuditReport> {
    let mut r = AuditReport::new(Claim::EigenConjugation, tol, seed);
    partial_hypotheses(&mut r, t, m, q, tol)?;
    let spec = joint_point_spectrum(t, seed, tol)?;
    let adj = t.adjoint();
    let adj_mats: Vec<&DMatrix<C64>> = adj.matrices().iter().map(|a| a.inner()).collect();
    let bound = residual_bound(t);

    let mut conj_ok = true;
    for p in spec.iter().filter(|p| !zero_variety_member(&p.lambda, tol)) {
        let target: Vec<C64> = p.lambda.iter().map(|z| z.conj()).collect();
        let (mu, _, residual) = refine_common_eigenpair(&adj_mats, &target)?;
        if residual > bound || linf_distance(&mu, &target) > tol.cluster_tol {
            conj_ok = false;
            r.witness(
                "eigenvalue whose conjugate is not an adjoint eigenvalue",
                p.lambda.clone(),
            );
        }
    }
    r.conclusion(
        "conjugate of every eigenvalue outside the zero variety is an adjoint eigenvalue",
        conj_ok,
    );

    let spaces = spec
        .iter()
        .map(|p| joint_eigenspace(t, p))
        .collect::<Result<Vec<_>>>()?;
    let mut orthogonal = true;
    let mut max_overlap: f64 = 0.0;
    for i in 0..spec.len() {
        for j in i + 1..spec.len() {
            let coupling: C64 = spec[i]
                .lambda
                .iter()
                .zip(&spec[j].lambda)
                .map(|(a, b)| a * b.conj())
                .sum();
            if (C64::new(1.0, 0.0) - coupling).norm() < tol.threshold(1.0) {
                continue;
            }
            let overlap = (spaces[i].adjoint() * &spaces[j])
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            max_overlap = max_overlap.max(overlap);
            if overlap > ORTHOGONALITY_TOL {
                orthogonal = false;
                r.witness(
                    "non-orthogonal eigenvalue pair, first",
                    spec[i].lambda.clone(),
                );
                r.witness(
                    "non-orthogonal eigenvalue pair, second",
                    spec[j].lambda.clone(),
                );
            }
        }
    }
    r.conclusion(
        "eigenvectors of distinct eigenvalues are orthogonal",
        orthogonal,
    );
    r.norm("max eigenvector overlap", max_overlap).norm(
        "max witness residual",
        spec.iter().map(|p| p.residual).fold(0.0, f64::max),
    );
    r.note(notes::FINITE_SURROGATE);
    Ok(r)
}
