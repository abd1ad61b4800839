//! Exact integer combinatorics over multi-indices `α ∈ Z₊^d`.
//!
//! Every quantity here is computed with checked 64-bit arithmetic; the
//! working ranges of the crate (orders up to 12, `d ≤ 4`) never come close
//! to overflowing, and anything that would is reported as
//! [`Error::Overflow`] instead of wrapping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A vector of nonnegative exponents, one per tuple component.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn ones(d: usize) -> Self {
        MultiIndex(vec![1; d])
    }

    /// The unit multi-index `e_j` of length `d`.
    pub fn unit(d: usize, j: usize) -> Self {
        let mut e = vec![0; d];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `|α|`, the sum of the entries.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `α!`, the product of the entry factorials.
    pub fn factorial(&self) -> Result<u64> {
        self.0.iter().try_fold(1u64, |acc, &a| {
            acc.checked_mul(factorial(a)?)
                .ok_or(Error::Overflow("multi-index factorial"))
        })
    }

    /// Componentwise `self ≥ other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.d() == other.d() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// Reorders entries so that position `i` holds entry `sigma[i]`.
    pub fn permuted(&self, sigma: &[usize]) -> Result<MultiIndex> {
        check_permutation(sigma, self.d())?;
        Ok(MultiIndex(sigma.iter().map(|&s| self.0[s]).collect()))
    }

    /// Appends one more coordinate.
    pub fn extended(&self, value: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e.push(value);
        MultiIndex(e)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn check_permutation(sigma: &[usize], d: usize) -> Result<()> {
    if sigma.len() != d {
        return Err(invalid(format!(
            "permutation has length {} but the tuple has {d} components",
            sigma.len()
        )));
    }
    let mut seen = vec![false; d];
    for &s in sigma {
        if s >= d || seen[s] {
            return Err(invalid(format!("{sigma:?} is not a permutation of 0..{d}")));
        }
        seen[s] = true;
    }
    Ok(())
}

pub fn factorial(n: usize) -> Result<u64> {
    (1..=n as u64).try_fold(1u64, |acc, i| {
        acc.checked_mul(i).ok_or(Error::Overflow("factorial"))
    })
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::Overflow("binomial coefficient"));
        }
    }
    Ok(acc as u64)
}

/// All `α ∈ Z₊^d` with `|α| = k`, in descending lexicographic order.
pub fn enumerate_multiindices(d: usize, k: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(invalid(
            "multi-indices need at least one coordinate (d ≥ 1)",
        ));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    fill(d, k, &mut current, &mut out);
    Ok(out)
}

fn fill(d: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if current.len() + 1 == d {
        current.push(remaining);
        out.push(MultiIndex(current.clone()));
        current.pop();
        return;
    }
    for first in (0..=remaining).rev() {
        current.push(first);
        fill(d, remaining - first, current, out);
        current.pop();
    }
}

/// `|α|! / α!` as a product of binomials, so intermediate values stay small.
pub fn multinomial_weight(alpha: &MultiIndex) -> Result<u64> {
    let mut remaining = alpha.order();
    let mut acc = 1u64;
    for &a in alpha.entries() {
        acc = acc
            .checked_mul(binomial(remaining, a)?)
            .ok_or(Error::Overflow("multinomial weight"))?;
        remaining -= a;
    }
    Ok(acc)
}

/// Descending Pochhammer symbol with the conventions `n^(k) = 0` when
/// `n = 0` (including `k = 0`) or `k > n`, and `C(n,k)·k!` otherwise.
pub fn pochhammer_descending(n: usize, k: usize) -> Result<u64> {
    if n == 0 || k > n {
        return Ok(0);
    }
    binomial(n, k)?
        .checked_mul(factorial(k)?)
        .ok_or(Error::Overflow("descending Pochhammer symbol"))
}

/// Both sides of the Pascal recursion for multinomial coefficients,
/// `C(n; k₁…k_d) = Σ_j C(n−1; k₁…k_j−1…k_d)`.
///
/// The left side is `n!/α!` from factorials, the right side sums
/// [`multinomial_weight`] over the decremented indices, skipping those with
/// a negative entry.
pub fn pascal_multinomial(n: usize, parts: &MultiIndex) -> Result<(u64, u64)> {
    if n == 0 {
        return Err(invalid("the Pascal recursion needs n ≥ 1"));
    }
    if parts.order() != n {
        return Err(invalid(format!(
            "parts {parts} sum to {} but n = {n}",
            parts.order()
        )));
    }
    let lhs = factorial(n)? / parts.factorial()?;
    let mut rhs = 0u64;
    for j in 0..parts.d() {
        if parts.entries()[j] == 0 {
            continue;
        }
        let mut dec = parts.entries().to_vec();
        dec[j] -= 1;
        rhs = rhs
            .checked_add(multinomial_weight(&MultiIndex(dec))?)
            .ok_or(Error::Overflow("Pascal recursion sum"))?;
    }
    Ok((lhs, rhs))
}
