//! Commuting tuples of matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{frob, null_space_basis, ComplexMatrix, SubspaceBasis, ToleranceModel, C64};
use crate::multiindex::{check_permutation, MultiIndex};

/// Unitarity tolerance for conjugating matrices, `‖V*V − I‖_F`.
pub const UNITARY_TOL: f64 = 1e-8;

/// An ordered list of pairwise commuting square matrices of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    matrices: Vec<ComplexMatrix>,
    max_commutator: f64,
}

impl OperatorTuple {
    /// Validates dimensions and pairwise commutativity.
    pub fn new(matrices: Vec<ComplexMatrix>, tol: &ToleranceModel) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| invalid("a tuple needs at least one matrix"))?;
        let dim = first.dim();
        if let Some((j, m)) = matrices.iter().enumerate().find(|(_, m)| m.dim() != dim) {
            return Err(invalid(format!(
                "matrix {j} has dimension {} but matrix 0 has dimension {dim}",
                m.dim()
            )));
        }
        let mut max_commutator: f64 = 0.0;
        for i in 0..matrices.len() {
            for j in i + 1..matrices.len() {
                let norm = matrices[i].commutator_norm(&matrices[j]);
                let threshold =
                    tol.threshold(matrices[i].frobenius_norm() * matrices[j].frobenius_norm());
                if norm > threshold {
                    return Err(Error::NonCommuting {
                        i,
                        j,
                        norm,
                        threshold,
                    });
                }
                max_commutator = max_commutator.max(norm);
            }
        }
        Ok(OperatorTuple {
            matrices,
            max_commutator,
        })
    }

    /// Builds a tuple derived from a validated one (adjoints, permutations,
    /// unitary conjugates), recording the commutator norm without rejecting.
    pub(crate) fn derived(matrices: Vec<ComplexMatrix>) -> Self {
        let mut max_commutator: f64 = 0.0;
        for i in 0..matrices.len() {
            for j in i + 1..matrices.len() {
                max_commutator = max_commutator.max(matrices[i].commutator_norm(&matrices[j]));
            }
        }
        OperatorTuple {
            matrices,
            max_commutator,
        }
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn get(&self, j: usize) -> &ComplexMatrix {
        &self.matrices[j]
    }

    /// Largest `‖T_iT_j − T_jT_i‖_F` observed over all pairs.
    pub fn max_commutator(&self) -> f64 {
        self.max_commutator
    }

    pub fn max_norm(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| m.frobenius_norm())
            .fold(0.0, f64::max)
    }

    /// `(T₁*, …, T_d*)`.
    pub fn adjoint(&self) -> OperatorTuple {
        OperatorTuple {
            matrices: self.matrices.iter().map(|m| m.adjoint()).collect(),
            max_commutator: self.max_commutator,
        }
    }

    /// `T^α = T₁^{α₁} ⋯ T_d^{α_d}`, in index order.
    pub fn power(&self, alpha: &MultiIndex) -> Result<ComplexMatrix> {
        self.check_index(alpha)?;
        let mut acc: Option<ComplexMatrix> = None;
        for (m, &a) in self.matrices.iter().zip(alpha.entries()) {
            if a == 0 {
                continue;
            }
            let p = m.pow(a);
            acc = Some(match acc {
                None => p,
                Some(prev) => &prev * &p,
            });
        }
        Ok(acc.unwrap_or_else(|| ComplexMatrix::identity(self.dim())))
    }

    pub(crate) fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.d() != self.d() {
            return Err(invalid(format!(
                "multi-index {alpha} has {} entries but the tuple has {} components",
                alpha.d(),
                self.d()
            )));
        }
        Ok(())
    }

    /// `(T_σ(1), …, T_σ(d))` with `sigma` zero-based.
    pub fn permute(&self, sigma: &[usize]) -> Result<OperatorTuple> {
        check_permutation(sigma, self.d())?;
        Ok(OperatorTuple {
            matrices: sigma.iter().map(|&s| self.matrices[s].clone()).collect(),
            max_commutator: self.max_commutator,
        })
    }

    /// `(V*T₁V, …, V*T_dV)`.
    pub fn conjugate_by_unitary(&self, v: &ComplexMatrix) -> Result<OperatorTuple> {
        if v.dim() != self.dim() {
            return Err(invalid(format!(
                "unitary has dimension {} but the tuple acts on dimension {}",
                v.dim(),
                self.dim()
            )));
        }
        let defect = frob(&(v.adjoint().inner() * v.inner() - DMatrix::identity(v.dim(), v.dim())));
        if defect > UNITARY_TOL {
            return Err(invalid(format!(
                "conjugating matrix is not unitary (‖V*V − I‖_F = {defect:.3e})"
            )));
        }
        let vs = v.adjoint();
        Ok(OperatorTuple::derived(
            self.matrices.iter().map(|m| &(&vs * m) * v).collect(),
        ))
    }

    /// Block-diagonal sum `(T_j ⊕ S_j)_j`.
    pub fn direct_sum(&self, other: &OperatorTuple) -> Result<OperatorTuple> {
        if self.d() != other.d() {
            return Err(invalid("direct sums need tuples of equal length"));
        }
        let (n1, n2) = (self.dim(), other.dim());
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
                m.view_mut((0, 0), (n1, n1)).copy_from(a.inner());
                m.view_mut((n1, n1), (n2, n2)).copy_from(b.inner());
                ComplexMatrix::wrap(m)
            })
            .collect();
        Ok(OperatorTuple::derived(matrices))
    }

    /// Appends a further component (used for zero padding).
    pub fn extended(&self, m: ComplexMatrix, tol: &ToleranceModel) -> Result<OperatorTuple> {
        let mut matrices = self.matrices.clone();
        matrices.push(m);
        OperatorTuple::new(matrices, tol)
    }

    pub fn is_doubly_commuting(&self, tol: &ToleranceModel) -> bool {
        let adj = self.adjoint();
        (0..self.d()).all(|i| {
            (0..self.d()).filter(|&j| j != i).all(|j| {
                let a = self.get(i);
                let b = adj.get(j);
                tol.is_negligible(
                    a.commutator_norm(b),
                    a.frobenius_norm() * b.frobenius_norm(),
                )
            })
        })
    }

    pub fn quasinormal_class(&self, tol: &ToleranceModel) -> QuasinormalFlags {
        let d = self.d();
        let norms: Vec<f64> = self.matrices.iter().map(|m| m.frobenius_norm()).collect();
        let products: Vec<Vec<ComplexMatrix>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|k| &self.get(j).adjoint() * self.get(k))
                    .collect()
            })
            .collect();
        let commutes = |i: usize, j: usize, k: usize| {
            tol.is_negligible(
                self.get(i).commutator_norm(&products[j][k]),
                norms[i] * norms[j] * norms[k],
            )
        };
        let joint_check = (0..d).all(|i| (0..d).all(|j| commutes(i, j, j)));
        let matricial = joint_check
            && (0..d).all(|i| (0..d).all(|j| (0..d).all(|k| j == k || commutes(i, j, k))));

        let mut sum = ComplexMatrix::zeros(self.dim());
        for (j, row) in products.iter().enumerate() {
            sum = &sum + &row[j];
        }
        let sum_scale: f64 = norms.iter().map(|n| n * n).sum();
        // the threshold dominates the sum of the per-component ones, so
        // the joint check always implies this one
        let spherical_check = (0..d).all(|i| {
            self.get(i).commutator_norm(&sum)
                <= d as f64 * tol.abs_tol + tol.rel_tol * norms[i] * sum_scale
        });
        QuasinormalFlags {
            matricial,
            joint: joint_check,
            spherical: spherical_check,
        }
    }

    /// Computes `N(T^q)` and tests whether it reduces every `T_j`.
    pub fn null_reducing_check(
        &self,
        q: &MultiIndex,
        tol: &ToleranceModel,
    ) -> Result<ReducingCheck> {
        let tq = self.power(q)?;
        let basis = null_space_basis(&tq, tol)?;
        let mut max_residual: f64 = 0.0;
        let mut is_reducing = true;
        if !basis.is_empty() {
            for m in &self.matrices {
                let scale = m.frobenius_norm();
                for x in [m.clone(), m.adjoint()] {
                    let r = basis.projection_residual(&(x.inner() * basis.vectors()));
                    max_residual = max_residual.max(r);
                    if !tol.is_negligible(r, scale) {
                        is_reducing = false;
                    }
                }
            }
        }
        Ok(ReducingCheck {
            is_reducing,
            basis,
            max_residual,
        })
    }

    /// Per-component invertibility by the rank cutoff.
    pub fn entrywise_invertible(&self, tol: &ToleranceModel) -> Result<Vec<bool>> {
        self.matrices
            .iter()
            .map(|m| Ok(null_space_basis(m, tol)?.is_empty()))
            .collect()
    }

    /// Componentwise scalar multiples `(c₁T₁, …, c_dT_d)`.
    pub fn scaled(&self, coefficients: &[C64]) -> Result<OperatorTuple> {
        if coefficients.len() != self.d() {
            return Err(invalid("one coefficient per component is required"));
        }
        Ok(OperatorTuple::derived(
            self.matrices
                .iter()
                .zip(coefficients)
                .map(|(m, c)| m.scaled(*c))
                .collect(),
        ))
    }
}

/// Quasinormality flags; `matricial ⟹ joint ⟹ spherical` always holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasinormalFlags {
    pub matricial: bool,
    pub joint: bool,
    pub spherical: bool,
}

#[derive(Clone, Debug)]
pub struct ReducingCheck {
    pub is_reducing: bool,
    pub basis: SubspaceBasis,
    pub max_residual: f64,
}
