//! Dense complex matrix primitives.
//!
//! The heavy lifting (Schur form, SVD) is delegated to `nalgebra`; this
//! module fixes the numerical contracts the rest of the crate relies on:
//! rank decisions by a scaled singular-value cutoff, residual-checked
//! eigenpairs and a single "is this negligible" rule.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Residual bound for eigenpairs and joint eigenpairs, relative to `max(1, ‖A‖_F)`.
pub const EIGEN_RESIDUAL: f64 = 1e-8;

const SCHUR_ITERATIONS_PER_DIM: usize = 500;
const SVD_MAX_ITERATIONS: usize = 10_000;

/// Thresholds for every "is zero" / "commutes" / rank decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceModel {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Multiplies `ε · dim · σ_max` to form the rank cutoff.
    pub rank_factor: f64,
    /// ℓ∞ radius used to merge joint eigenvalues.
    #[serde(default = "default_cluster_tol")]
    pub cluster_tol: f64,
}

fn default_cluster_tol() -> f64 {
    1e-7
}

impl Default for ToleranceModel {
    fn default() -> Self {
        ToleranceModel {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            rank_factor: 1e3,
            cluster_tol: default_cluster_tol(),
        }
    }
}

impl ToleranceModel {
    /// Same thresholds with `abs_tol = rel_tol = tol`.
    pub fn uniform(tol: f64) -> Result<Self> {
        ToleranceModel {
            abs_tol: tol,
            rel_tol: tol,
            ..Default::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let fields = [
            self.abs_tol,
            self.rel_tol,
            self.rank_factor,
            self.cluster_tol,
        ];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("tolerances must be finite and nonnegative"));
        }
        Ok(self)
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale
    }

    pub fn is_negligible(&self, norm: f64, scale: f64) -> bool {
        norm <= self.threshold(scale)
    }

    pub fn rank_cutoff(&self, dim: usize, sigma_max: f64) -> f64 {
        self.rank_factor * f64::EPSILON * dim.max(1) as f64 * sigma_max
    }
}

/// A square matrix of complex doubles with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(invalid(format!(
                "matrix must be square, got {}×{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.nrows() == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(ComplexMatrix(inner))
    }

    /// Wraps a matrix known to be square and finite (results of arithmetic
    /// on valid matrices).
    pub(crate) fn wrap(inner: DMatrix<C64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        ComplexMatrix(inner)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("rows must all have length equal to the row count"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        frob(&self.0)
    }

    pub fn scaled(&self, c: C64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * c)
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: usize) -> ComplexMatrix {
        let mut result = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.0.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        ComplexMatrix(result)
    }

    pub fn commutator_norm(&self, other: &ComplexMatrix) -> f64 {
        frob(&(&self.0 * &other.0 - &other.0 * &self.0))
    }

    /// Entry rows as `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.0[(i, j)].re, self.0[(i, j)].im])
                    .collect()
            })
            .collect()
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<C64>;

    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm()
}

pub(crate) fn frob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn vec_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal columns spanning a subspace of `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    dim: usize,
    vectors: DMatrix<C64>,
}

impl SubspaceBasis {
    pub(crate) fn from_columns(dim: usize, vectors: DMatrix<C64>) -> Self {
        debug_assert_eq!(vectors.nrows(), dim);
        SubspaceBasis { dim, vectors }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    /// Basis vectors as columns (`dim × rank`).
    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }

    /// `‖(I − P) X‖_F` where `P` projects onto this subspace.
    pub fn projection_residual(&self, x: &DMatrix<C64>) -> f64 {
        if self.is_empty() {
            return frob(x);
        }
        let coeffs = self.vectors.adjoint() * x;
        frob(&(x - &self.vectors * coeffs))
    }

    /// Largest entry of `|B*B − I|` in Frobenius norm.
    pub fn gram_deviation(&self) -> f64 {
        let k = self.rank();
        frob(&(self.vectors.adjoint() * &self.vectors - DMatrix::<C64>::identity(k, k)))
    }

    /// Whether two subspaces coincide: equal rank and each contained in the other.
    pub fn same_span(&self, other: &SubspaceBasis, threshold: f64) -> bool {
        self.rank() == other.rank()
            && self.projection_residual(&other.vectors) <= threshold
            && other.projection_residual(&self.vectors) <= threshold
    }
}

/// Thin SVD with singular values sorted descending.
pub(crate) struct SortedSvd {
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns, same order as `singular_values`.
    pub right: DMatrix<C64>,
}

/// SVD of an arbitrary (tall or square) matrix.
pub(crate) fn svd(m: &DMatrix<C64>) -> Result<SortedSvd> {
    let (rows, cols) = m.shape();
    if rows < cols {
        // pad with zero rows: right singular vectors are unchanged
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        return svd(&padded);
    }
    let mut decomposition = SVD::try_new(m.clone(), false, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| {
            Error::NumericalFailure(format!(
                "SVD of a {rows}×{cols} matrix did not converge in {SVD_MAX_ITERATIONS} iterations"
            ))
        })?;
    decomposition.sort_by_singular_values();
    let v_t = decomposition
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD returned no right singular vectors".into()))?;
    Ok(SortedSvd {
        singular_values: decomposition.singular_values.iter().copied().collect(),
        right: v_t.adjoint(),
    })
}

/// Smallest singular value of `m` together with its right singular vector.
pub(crate) fn smallest_singular(m: &DMatrix<C64>) -> Result<(f64, DVector<C64>)> {
    let s = svd(m)?;
    let last = s.singular_values.len() - 1;
    Ok((s.singular_values[last], s.right.column(last).into_owned()))
}

/// Right singular vectors whose singular values fall at or below `cutoff`,
/// for any tall or square matrix.
pub(crate) fn null_columns(m: &DMatrix<C64>, cutoff: f64) -> Result<DMatrix<C64>> {
    let s = svd(m)?;
    let keep: Vec<usize> = (0..s.singular_values.len())
        .filter(|&i| s.singular_values[i] <= cutoff)
        .collect();
    Ok(DMatrix::from_fn(m.ncols(), keep.len(), |r, c| {
        s.right[(r, keep[c])]
    }))
}

/// Orthonormal basis of `N(A)` from the singular values below
/// `rank_factor · ε · dim · σ_max`.
pub fn null_space_basis(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<SubspaceBasis> {
    let n = a.dim();
    let s = svd(a.inner())?;
    let sigma_max = s.singular_values[0];
    if sigma_max == 0.0 {
        return Ok(SubspaceBasis::from_columns(n, DMatrix::identity(n, n)));
    }
    let cutoff = tol.rank_cutoff(n, sigma_max);
    let keep: Vec<usize> = (0..n).filter(|&i| s.singular_values[i] <= cutoff).collect();
    Ok(SubspaceBasis::from_columns(
        n,
        DMatrix::from_fn(n, keep.len(), |r, c| s.right[(r, keep[c])]),
    ))
}

/// Complex Schur form `A = Q U Q*`.
pub fn unitary_triangularize(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (q, u) = schur(a.inner())?;
    Ok((ComplexMatrix::wrap(q), ComplexMatrix::wrap(u)))
}

pub(crate) fn schur(m: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = m.nrows();
    if n == 1 {
        return Ok((DMatrix::identity(1, 1), m.clone()));
    }
    let iterations = SCHUR_ITERATIONS_PER_DIM * n;
    let decomposition = Schur::try_new(m.clone(), f64::EPSILON, iterations).ok_or_else(|| {
        Error::NumericalFailure(format!(
            "complex Schur iteration on a {n}×{n} matrix did not converge in {iterations} sweeps"
        ))
    })?;
    Ok(decomposition.unpack())
}

/// Refines an approximate eigenvalue of a family of matrices with a shared
/// eigenvector: repeatedly takes the smallest right singular vector of the
/// stacked shifted matrices and replaces the shifts by Rayleigh quotients.
///
/// Returns the refined values, the unit vector and the final residual
/// `max_j ‖(A_j − λ_j) x‖₂`.
pub(crate) fn refine_common_eigenpair(
    mats: &[&DMatrix<C64>],
    initial: &[C64],
) -> Result<(Vec<C64>, DVector<C64>, f64)> {
    let mut lambda = initial.to_vec();
    let mut best: Option<(Vec<C64>, DVector<C64>, f64)> = None;
    for _ in 0..4 {
        let stacked = stack_shifted(mats, &lambda);
        let (_, x) = smallest_singular(&stacked)?;
        let refined: Vec<C64> = mats.iter().map(|a| x.dotc(&(*a * &x))).collect();
        let residual = mats
            .iter()
            .zip(&refined)
            .map(|(a, l)| vec_norm(&(*a * &x - &x * *l)))
            .fold(0.0, f64::max);
        let improved = best.as_ref().is_none_or(|b| residual < b.2);
        if improved {
            best = Some((refined.clone(), x, residual));
        }
        lambda = refined;
        if residual == 0.0 || !improved {
            break;
        }
    }
    Ok(best.expect("at least one refinement step runs"))
}

pub(crate) fn stack_shifted(mats: &[&DMatrix<C64>], lambda: &[C64]) -> DMatrix<C64> {
    let n = mats[0].nrows();
    let mut stacked = DMatrix::zeros(n * mats.len(), n);
    for (j, (a, l)) in mats.iter().zip(lambda).enumerate() {
        let mut block = (*a).clone();
        for i in 0..n {
            block[(i, i)] -= *l;
        }
        stacked.view_mut((j * n, 0), (n, n)).copy_from(&block);
    }
    stacked
}

/// Eigenvalues with algebraic multiplicity and a unit eigenvector each.
///
/// Eigenvalues come from the complex Schur form and are then polished
/// against their eigenvector; for defective matrices several eigenvalues may
/// share one eigenvector.
pub fn eigendecomposition(a: &ComplexMatrix) -> Result<Vec<(C64, DVector<C64>)>> {
    let (_, u) = schur(a.inner())?;
    let bound = EIGEN_RESIDUAL * a.frobenius_norm().max(1.0);
    let mut pairs = Vec::with_capacity(a.dim());
    for i in 0..a.dim() {
        let (lambda, v, residual) = refine_common_eigenpair(&[a.inner()], &[u[(i, i)]])?;
        if residual > bound {
            return Err(Error::NumericalFailure(format!(
                "eigenpair {i} has residual {residual:.3e} above {bound:.3e} after refinement"
            )));
        }
        pairs.push((lambda[0], v));
    }
    Ok(pairs)
}

/// Unitary Householder reflector whose first column is a unit multiple of `v`.
pub(crate) fn reflector_with_first_column(v: &DVector<C64>) -> DMatrix<C64> {
    let n = v.len();
    let v = v / C64::new(vec_norm(v), 0.0);
    let phase = if v[0].norm() > 0.0 {
        v[0] / v[0].norm()
    } else {
        ONE
    };
    let mut w = v.clone();
    w[0] -= phase;
    let wn = vec_norm(&w);
    if wn < 1e-300 {
        return DMatrix::identity(n, n) * phase;
    }
    let w = w / C64::new(wn, 0.0);
    DMatrix::identity(n, n) - (&w * w.adjoint()) * C64::new(2.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn example_three_by_three() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0],
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0],
        ])
        .unwrap()
    }

    fn cycle_times_i() -> ComplexMatrix {
        let i = c(0.0, 1.0);
        ComplexMatrix::from_rows(&[
            vec![ZERO, i, ZERO],
            vec![ZERO, ZERO, i],
            vec![i, ZERO, ZERO],
        ])
        .unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ComplexMatrix::new(DMatrix::zeros(2, 3)).is_err());
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(ComplexMatrix::new(m).is_err());
        assert!(ComplexMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(
            ComplexMatrix::identity(3).adjoint(),
            ComplexMatrix::identity(3)
        );
        let a = ComplexMatrix::from_rows(&[vec![ZERO, c(0.0, 1.0)], vec![ZERO, ZERO]]).unwrap();
        let expected =
            ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![c(0.0, -1.0), ZERO]]).unwrap();
        assert_eq!(adjoint(&a), expected);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&ComplexMatrix::zeros(4)), 0.0);
        assert!((ComplexMatrix::identity(2).frobenius_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!((cycle_times_i().frobenius_norm() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn null_space_examples() {
        let tol = ToleranceModel::default();
        assert_eq!(
            null_space_basis(&ComplexMatrix::zeros(3), &tol)
                .unwrap()
                .rank(),
            3
        );
        assert!(null_space_basis(&ComplexMatrix::identity(2), &tol)
            .unwrap()
            .is_empty());

        let a = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
        let t = ComplexMatrix::from_real_rows(&[&[a, 0.0], &[1.0, 0.0]]).unwrap();
        let basis = null_space_basis(&t, &tol).unwrap();
        assert_eq!(basis.rank(), 1);
        let v = basis.vector(0);
        assert!(v[0].norm() < 1e-14);
        assert!((v[1].norm() - 1.0).abs() < 1e-14);
        assert!(basis.gram_deviation() < 1e-12);
    }

    #[test]
    fn pow_matches_repeated_products() {
        let t = example_three_by_three();
        let t2 = &t * &t;
        assert!(frob(&(t.pow(2).inner() - t2.inner())) < 1e-15);
        let t5 = &(&t2 * &t2) * &t;
        assert!(frob(&(t.pow(5).inner() - t5.inner())) < 1e-14);
        assert_eq!(t.pow(0), ComplexMatrix::identity(3));
    }

    fn sorted_by_arg(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn eigen_examples() {
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let pairs = eigendecomposition(&d).unwrap();
        let vals = sorted_by_arg(pairs.iter().map(|p| p.0).collect());
        assert!((vals[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((vals[1] - c(2.0, 0.0)).norm() < 1e-12);

        // characteristic polynomial −x³ + x/√2
        let mu = 2f64.powf(-0.25);
        let vals = sorted_by_arg(
            eigendecomposition(&example_three_by_three())
                .unwrap()
                .iter()
                .map(|p| p.0)
                .collect(),
        );
        let expected = [c(-mu, 0.0), c(0.0, 0.0), c(mu, 0.0)];
        for (v, e) in vals.iter().zip(&expected) {
            assert!((v - e).norm() < 1e-10, "{v} vs {e}");
        }

        // i times a cyclic permutation: i·ω with ω³ = 1
        let pairs = eigendecomposition(&cycle_times_i()).unwrap();
        for (lambda, v) in &pairs {
            let cube = (lambda / c(0.0, 1.0)).powu(3);
            assert!((cube - ONE).norm() < 1e-10);
            let r = vec_norm(&(cycle_times_i().inner() * v - v * *lambda));
            assert!(r < 1e-10);
        }
    }

    #[test]
    fn eigen_handles_jordan_block() {
        let j = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let pairs = eigendecomposition(&j).unwrap();
        for (lambda, _) in pairs {
            assert!((lambda - ONE).norm() < 1e-8);
        }
    }

    #[test]
    fn triangularize_examples() {
        let upper =
            ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 1.0)], vec![ZERO, c(3.0, 0.0)]])
                .unwrap();
        let (q, u) = unitary_triangularize(&upper).unwrap();
        let rebuilt = &(&q * &u) * &q.adjoint();
        assert!(frob(&(rebuilt.inner() - upper.inner())) < 1e-12);
        assert!(u[(1, 0)].norm() < 1e-12);

        let h = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0)],
            vec![c(1.0, 1.0), c(-1.0, 0.0)],
        ])
        .unwrap();
        let (_, u) = unitary_triangularize(&h).unwrap();
        assert!(
            u[(0, 1)].norm() < 1e-10,
            "Hermitian Schur form should be diagonal"
        );
    }

    #[test]
    fn reflector_is_unitary_with_given_column() {
        let v = DVector::from_vec(vec![c(0.0, 0.5), c(0.5, 0.5), c(-0.5, 0.0)]);
        let h = reflector_with_first_column(&v);
        assert!(frob(&(h.adjoint() * &h - DMatrix::identity(3, 3))) < 1e-14);
        let col = h.column(0).into_owned();
        let v = &v / C64::new(vec_norm(&v), 0.0);
        assert!((col.dotc(&v).norm() - 1.0).abs() < 1e-14);
    }
}
