//! Worked examples and seeded random families of commuting tuples.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, ToleranceModel, C64, ONE, ZERO};
use crate::multiindex::MultiIndex;
use crate::report::Claim;
use crate::rng;
use crate::tuples::OperatorTuple;

/// Frobenius norm cap for generated components.
pub const MAX_COMPONENT_NORM: f64 = 10.0;

pub const EXAMPLE_IDS: [&str; 5] = [
    "2.1(d)",
    "2.2",
    "3.golden(d)",
    "4.1-as-printed",
    "4.1-corrected",
];

/// `((1 + √5)/2)^{1/2}`
pub fn golden_modulus() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).sqrt()
}

fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).expect("literal matrix")
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn example_21_matrix() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    real(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[h, h, 0.0]])
}

pub fn example_22_matrix() -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    ComplexMatrix::from_rows(&[
        vec![ZERO, i, ZERO],
        vec![ZERO, ZERO, i],
        vec![i, ZERO, ZERO],
    ])
    .expect("literal matrix")
}

pub fn golden_matrix() -> ComplexMatrix {
    real(&[&[golden_modulus(), 0.0], &[1.0, 0.0]])
}

pub fn example_41_matrices() -> (ComplexMatrix, ComplexMatrix) {
    (
        real(&[&[1.0, 1.0], &[0.0, 1.0]]),
        real(&[&[1.0, -1.0], &[0.0, 1.0]]),
    )
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Asserted alongside the example.
    Printed,
    /// Obtained by hand computation.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    PartialIsometry {
        m: usize,
        q: MultiIndex,
        holds: bool,
    },
    ComponentPartialIsometry {
        index: usize,
        m: usize,
        q: usize,
        holds: bool,
    },
    DefectNorm {
        m: usize,
        q: MultiIndex,
        value: f64,
    },
    LeftInverse {
        m: usize,
        holds: bool,
    },
    BetaNorm {
        m: usize,
        value: f64,
    },
    PointSpectrum {
        points: Vec<Vec<C64>>,
    },
    SpectralRadius {
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub expectation: Expectation,
    pub source: Source,
}

#[derive(Clone, Debug)]
pub struct WorkedExample {
    pub id: String,
    pub tuple: OperatorTuple,
    pub m: usize,
    pub q: MultiIndex,
    /// Left m-inverse candidate, where the example has one.
    pub inverse: Option<OperatorTuple>,
    pub expectations: Vec<Expected>,
}

/// Splits `"2.1(3)"` into `("2.1", Some(3))`.
fn parse_id(id: &str) -> Result<(&str, Option<usize>)> {
    match id.find('(') {
        None => Ok((id, None)),
        Some(open) => {
            let inner = id[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| invalid(format!("malformed example id '{id}'")))?;
            let d: usize = inner
                .parse()
                .map_err(|_| invalid(format!("malformed component count in '{id}'")))?;
            if d == 0 {
                return Err(invalid("component count must be positive"));
            }
            Ok((&id[..open], Some(d)))
        }
    }
}

fn unknown(id: &str) -> crate::error::Error {
    invalid(format!(
        "unknown example '{id}', expected one of {}",
        EXAMPLE_IDS.join(", ")
    ))
}

pub fn worked_example(id: &str) -> Result<WorkedExample> {
    let tol = ToleranceModel::default();
    let (base, d) = parse_id(id)?;
    let expect = |expectation, source| Expected {
        expectation,
        source,
    };
    match (base, d) {
        ("2.1", d) => {
            let d = d.unwrap_or(2);
            let s = 1.0 / (d as f64).sqrt();
            let tuple = scaled_single(&example_21_matrix(), &vec![c(s); d])?;
            let q = MultiIndex::ones(d);
            Ok(WorkedExample {
                id: format!("2.1({d})"),
                tuple,
                m: 1,
                q: q.clone(),
                inverse: None,
                expectations: vec![expect(
                    Expectation::PartialIsometry {
                        m: 1,
                        q,
                        holds: true,
                    },
                    Source::Printed,
                )],
            })
        }
        ("2.2", None) => {
            let t1 = example_22_matrix();
            let tuple = OperatorTuple::new(vec![t1, ComplexMatrix::identity(3)], &tol)?;
            let q = MultiIndex::ones(2);
            let mut expectations: Vec<Expected> = (0..2)
                .map(|index| {
                    expect(
                        Expectation::ComponentPartialIsometry {
                            index,
                            m: 2,
                            q: 1,
                            holds: true,
                        },
                        Source::Printed,
                    )
                })
                .collect();
            expectations.push(expect(
                Expectation::PartialIsometry {
                    m: 2,
                    q: q.clone(),
                    holds: false,
                },
                Source::Printed,
            ));
            expectations.push(expect(
                Expectation::DefectNorm {
                    m: 2,
                    q: q.clone(),
                    value: 3f64.sqrt(),
                },
                Source::Derived,
            ));
            let spectrum = (0..3)
                .map(|k| {
                    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
                    vec![C64::new(0.0, 1.0) * w, ONE]
                })
                .collect();
            expectations.push(expect(
                Expectation::PointSpectrum { points: spectrum },
                Source::Derived,
            ));
            Ok(WorkedExample {
                id: "2.2".into(),
                tuple,
                m: 2,
                q,
                inverse: None,
                expectations,
            })
        }
        ("3.golden", d) => {
            let d = d.unwrap_or(2);
            let mut mats = vec![golden_matrix()];
            mats.extend((1..d).map(|_| ComplexMatrix::zeros(2)));
            let tuple = OperatorTuple::new(mats, &tol)?;
            let q = MultiIndex::unit(d, 0);
            let a = golden_modulus();
            let mut top = vec![ZERO; d];
            top[0] = c(a);
            Ok(WorkedExample {
                id: format!("3.golden({d})"),
                tuple,
                m: 2,
                q: q.clone(),
                inverse: None,
                expectations: vec![
                    expect(
                        Expectation::PartialIsometry {
                            m: 2,
                            q,
                            holds: true,
                        },
                        Source::Printed,
                    ),
                    expect(
                        Expectation::PointSpectrum {
                            points: vec![top, vec![ZERO; d]],
                        },
                        Source::Printed,
                    ),
                    expect(Expectation::SpectralRadius { value: a }, Source::Derived),
                ],
            })
        }
        ("4.1-as-printed", None) | ("4.1-corrected", None) => {
            let printed = base == "4.1-as-printed";
            let (t1, s1) = example_41_matrices();
            let tuple = OperatorTuple::new(vec![t1.clone(), t1], &tol)?;
            let factor = if printed { 1.0 } else { 0.5 };
            let inverse =
                OperatorTuple::new(vec![s1.scaled(c(factor)), s1.scaled(c(factor))], &tol)?;
            let mut expectations = Vec::new();
            for m in 1..=4 {
                expectations.push(expect(
                    Expectation::LeftInverse { m, holds: true },
                    Source::Printed,
                ));
                let value = if printed { 2f64.sqrt() } else { 0.0 };
                expectations.push(expect(Expectation::BetaNorm { m, value }, Source::Derived));
            }
            Ok(WorkedExample {
                id: base.into(),
                tuple,
                m: 2,
                q: MultiIndex::ones(2),
                inverse: Some(inverse),
                expectations,
            })
        }
        _ => Err(unknown(id)),
    }
}

/// `(λ₁A, …, λ_dA)` for a unit vector `λ`.
pub fn scaled_single(a: &ComplexMatrix, lambda: &[C64]) -> Result<OperatorTuple> {
    if lambda.is_empty() {
        return Err(invalid("lambda must have at least one entry"));
    }
    let norm = lambda.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!(
            "lambda must have Euclidean norm 1, got {norm}"
        )));
    }
    OperatorTuple::new(
        lambda.iter().map(|l| a.scaled(*l)).collect(),
        &ToleranceModel::default(),
    )
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(g: &mut R, n: usize) -> DMatrix<C64> {
    let qr = rng::gaussian_matrix(g, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Orthogonal projection of rank `rank` onto a random subspace.
pub fn random_projection<R: Rng + ?Sized>(g: &mut R, n: usize, rank: usize) -> DMatrix<C64> {
    let u = random_unitary(g, n);
    let cols = u.columns(0, rank.min(n)).into_owned();
    &cols * cols.adjoint()
}

/// `U·P` with `U` unitary and `P` a projection of random rank, so that
/// `A(I − A*A) = 0`.
pub fn random_partial_isometry<R: Rng + ?Sized>(g: &mut R, n: usize) -> ComplexMatrix {
    let rank = g.random_range(1..=n);
    let u = random_unitary(g, n);
    ComplexMatrix::wrap(u * random_projection(g, n, rank))
}

/// `V (U ⊕ 0) V*` with `U` a random `rank × rank` unitary, optionally
/// conjugated by a random unitary `V`.
pub fn unitary_with_zero_block<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
    rank: usize,
    conjugate: bool,
) -> ComplexMatrix {
    let mut m = DMatrix::<C64>::zeros(n, n);
    m.view_mut((0, 0), (rank, rank))
        .copy_from(&random_unitary(g, rank));
    if conjugate {
        let v = random_unitary(g, n);
        m = &v * m * v.adjoint();
    }
    ComplexMatrix::wrap(m)
}

/// Doubly commuting `T_j = V (D_j ⊕ 0) V*` with `∑_j D_j* D_j = I` on the
/// first block: an order-one partial isometry whose kernel reduces.
pub fn reducing_partial_isometry<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
    d: usize,
    rank: usize,
) -> Result<OperatorTuple> {
    let v = random_unitary(g, n);
    let columns: Vec<Vec<C64>> = (0..rank)
        .map(|_| rng::unit_vector(g, d).iter().copied().collect())
        .collect();
    let mats = (0..d)
        .map(|j| {
            let mut diag = DMatrix::<C64>::zeros(n, n);
            for (i, col) in columns.iter().enumerate() {
                diag[(i, i)] = col[j];
            }
            ComplexMatrix::wrap(&v * diag * v.adjoint())
        })
        .collect();
    OperatorTuple::new(mats, &ToleranceModel::default())
}

fn random_polynomial_tuple<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
    d: usize,
    degree: usize,
) -> Result<OperatorTuple> {
    let m = rng::gaussian_matrix(g, n, n) / C64::new((n as f64).sqrt(), 0.0);
    let mut powers = vec![DMatrix::<C64>::identity(n, n)];
    for k in 1..=degree {
        powers.push(&powers[k - 1] * &m);
    }
    let mats = (0..d)
        .map(|_| {
            let mut p = DMatrix::<C64>::zeros(n, n);
            for pk in &powers {
                p += pk * rng::gaussian_complex(g);
            }
            let norm = crate::linalg::frob(&p).max(1e-300);
            let target = g.random_range(0.5..2.0);
            ComplexMatrix::wrap(p * C64::new(target / norm, 0.0))
        })
        .collect();
    OperatorTuple::new(mats, &ToleranceModel::default())
}

fn random_diagonal_conjugate<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
    d: usize,
    unitary: bool,
) -> Result<OperatorTuple> {
    let (v, v_inv) = if unitary {
        let v = random_unitary(g, n);
        let vi = v.adjoint();
        (v, vi)
    } else {
        let u1 = random_unitary(g, n);
        let u2 = random_unitary(g, n);
        let r: Vec<f64> = (0..n).map(|_| g.random_range(0.5..2.0)).collect();
        let sv = DMatrix::from_fn(n, n, |i, j| if i == j { c(r[i]) } else { ZERO });
        let si = DMatrix::from_fn(n, n, |i, j| if i == j { c(1.0 / r[i]) } else { ZERO });
        (&u1 * sv * &u2, u2.adjoint() * si * u1.adjoint())
    };
    let mats = (0..d)
        .map(|_| {
            let diag = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    rng::gaussian_complex(g)
                } else {
                    ZERO
                }
            });
            let m = &v * diag * &v_inv;
            let norm = crate::linalg::frob(&m);
            let m = if norm > MAX_COMPONENT_NORM {
                m * c(MAX_COMPONENT_NORM / norm)
            } else {
                m
            };
            ComplexMatrix::wrap(m)
        })
        .collect();
    OperatorTuple::new(mats, &ToleranceModel::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[serde(rename = "paper_example")]
    WorkedExample,
    ScaledSingle,
    PolynomialFamily,
    DiagonalConjugate,
    DirectSum,
}

/// Recipe for a tuple. Identical specs produce bit-identical tuples.
///
/// Recognised `params`: `example` (worked_example id), `lambda` (list of
/// `[re, im]`), `degree` (polynomial_family), `unitary` (diagonal_conjugate,
/// default true), `parts` (direct_sum, list of nested specs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub scheme: Scheme,
    pub seed: u64,
    pub dim: usize,
    pub d: usize,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl GeneratorSpec {
    pub fn new(scheme: Scheme, seed: u64, dim: usize, d: usize) -> Self {
        GeneratorSpec {
            scheme,
            seed,
            dim,
            d,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn usize_param(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| invalid(format!("parameter '{key}' must be a nonnegative integer"))),
        }
    }
}

pub fn random_commuting_tuple(spec: &GeneratorSpec) -> Result<OperatorTuple> {
    let mut g = rng::seeded(spec.seed);
    let needs_shape = !matches!(spec.scheme, Scheme::WorkedExample | Scheme::DirectSum);
    if needs_shape && (spec.dim == 0 || spec.d == 0) {
        return Err(invalid("dim and d must be positive"));
    }
    match spec.scheme {
        Scheme::WorkedExample => {
            let id = spec
                .params
                .get("example")
                .and_then(Value::as_str)
                .ok_or_else(|| invalid("worked_example needs a string parameter 'example'"))?;
            Ok(worked_example(id)?.tuple)
        }
        Scheme::ScaledSingle => {
            let lambda: Vec<C64> = match spec.params.get("lambda") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| invalid(format!("parameter 'lambda': {e}")))?,
                None => rng::unit_vector(&mut g, spec.d).iter().copied().collect(),
            };
            scaled_single(&random_partial_isometry(&mut g, spec.dim), &lambda)
        }
        Scheme::PolynomialFamily => {
            let degree = spec.usize_param("degree", 3)?;
            random_polynomial_tuple(&mut g, spec.dim, spec.d, degree)
        }
        Scheme::DiagonalConjugate => {
            let unitary = match spec.params.get("unitary") {
                None => true,
                Some(v) => v
                    .as_bool()
                    .ok_or_else(|| invalid("parameter 'unitary' must be a boolean"))?,
            };
            random_diagonal_conjugate(&mut g, spec.dim, spec.d, unitary)
        }
        Scheme::DirectSum => {
            let parts: Vec<GeneratorSpec> = match spec.params.get("parts") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| invalid(format!("parameter 'parts': {e}")))?,
                None => {
                    let first = (spec.dim / 2).max(1);
                    let second = spec.dim.saturating_sub(first).max(1);
                    vec![
                        GeneratorSpec::new(Scheme::PolynomialFamily, g.next_u64(), first, spec.d),
                        GeneratorSpec::new(Scheme::PolynomialFamily, g.next_u64(), second, spec.d),
                    ]
                }
            };
            let mut iter = parts.iter();
            let first = iter
                .next()
                .ok_or_else(|| invalid("direct_sum needs at least one part"))?;
            let mut acc = random_commuting_tuple(first)?;
            for p in iter {
                acc = acc.direct_sum(&random_commuting_tuple(p)?)?;
            }
            Ok(acc)
        }
    }
}

/// `T_j = t_j M`, `S_j = s_j M⁻¹` with `∑ s_j t_j = 1`: a left (and right)
/// inverse of every order.
pub fn scaled_inverse_pair<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
    d: usize,
) -> Result<(OperatorTuple, OperatorTuple)> {
    let u1 = random_unitary(g, n);
    let u2 = random_unitary(g, n);
    let r: Vec<f64> = (0..n).map(|_| g.random_range(0.5..2.0)).collect();
    let diag = |f: &dyn Fn(f64) -> f64| {
        DMatrix::from_fn(n, n, |i, j| if i == j { c(f(r[i])) } else { ZERO })
    };
    let m = &u1 * diag(&|x| x) * &u2;
    let m_inv = u2.adjoint() * diag(&|x| 1.0 / x) * u1.adjoint();

    let t: Vec<C64> = (0..d)
        .map(|_| {
            C64::from_polar(
                g.random_range(0.3..1.5),
                g.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let tt: f64 = t.iter().map(|z| z.norm_sqr()).sum();
    let mut s: Vec<C64> = t.iter().map(|z| z.conj() / tt).collect();
    if d > 1 {
        // add a random direction w with ∑ w_j t_j = 0
        let w: Vec<C64> = (0..d).map(|_| rng::gaussian_complex(g) * 0.3).collect();
        let wt: C64 = w.iter().zip(&t).map(|(a, b)| a * b).sum();
        for j in 0..d {
            s[j] += w[j] - t[j].conj() * wt / tt;
        }
    }
    let tol = ToleranceModel::default();
    let tt_tuple = OperatorTuple::new(
        t.iter().map(|z| ComplexMatrix::wrap(&m * *z)).collect(),
        &tol,
    )?;
    let ss_tuple = OperatorTuple::new(
        s.iter().map(|z| ComplexMatrix::wrap(&m_inv * *z)).collect(),
        &tol,
    )?;
    Ok((ss_tuple, tt_tuple))
}

/// Left 2-inverse pair `(S, T)` of polynomials in the nilpotent shift `J`
/// with `S₁T₁ + S₂T₂ = I + cJ^h`, `2h ≥ n`; not a left 1-inverse.
pub fn nilpotent_two_inverse_pair<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
) -> Result<(OperatorTuple, OperatorTuple)> {
    let n = n.max(2);
    let j = DMatrix::<C64>::from_fn(n, n, |r, col| if r + 1 == col { ONE } else { ZERO });
    let id = DMatrix::<C64>::identity(n, n);
    let mut coef = || C64::new(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)) * 0.5;
    let a = coef();
    let b = coef();
    let s2c = coef();
    let cst = coef() + C64::new(0.5, 0.0);
    let h = n.div_ceil(2);
    let jh = (0..h).fold(id.clone(), |acc, _| acc * &j);

    let t1 = &id + &j * a;
    let t2 = &j * b + &id * C64::new(0.5, 0.0);
    let s2 = &id * s2c + &j * coef();
    // (I + aJ)⁻¹ = ∑ (−aJ)^k, finite since J is nilpotent
    let mut t1_inv = DMatrix::<C64>::zeros(n, n);
    let mut term = id.clone();
    for _ in 0..n {
        t1_inv += &term;
        term *= &j * (-a);
    }
    let s1 = (&id + &jh * cst - &s2 * &t2) * t1_inv;
    let tol = ToleranceModel::default();
    let s = OperatorTuple::new(vec![ComplexMatrix::wrap(s1), ComplexMatrix::wrap(s2)], &tol)?;
    let t = OperatorTuple::new(vec![ComplexMatrix::wrap(t1), ComplexMatrix::wrap(t2)], &tol)?;
    Ok((s, t))
}

/// Two independent polynomial families of the same shape.
pub fn random_commuting_pair<R: Rng + ?Sized>(
    g: &mut R,
    n: usize,
    d: usize,
) -> Result<(OperatorTuple, OperatorTuple)> {
    let degree = g.random_range(1..=3);
    let s = random_polynomial_tuple(g, n, d, degree)?;
    let t = random_polynomial_tuple(g, n, d, degree)?;
    Ok((s, t))
}

/// Seed of trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    rng::derived(seed, trial).next_u64()
}

/// A generated audit input.
#[derive(Clone, Debug)]
pub struct Instance {
    pub tuple: OperatorTuple,
    pub inverse: Option<OperatorTuple>,
    pub m: usize,
    pub q: MultiIndex,
    pub seed: u64,
    pub family: &'static str,
}

/// Random instance suited to `claim`, drawn from stream `trial` of `seed`.
pub fn random_instance(claim: Claim, seed: u64, trial: u64) -> Result<Instance> {
    let seed = trial_seed(seed, trial);
    let mut g = rng::seeded(seed);
    let d = g.random_range(1..=3usize);
    let n = g.random_range(2..=6usize);
    let m = g.random_range(1..=3usize);
    let q = MultiIndex::new((0..d).map(|_| g.random_range(1..=2usize)).collect());
    let instance = |tuple, inverse, m, q, family| Instance {
        tuple,
        inverse,
        m,
        q,
        seed,
        family,
    };
    match claim {
        Claim::DefectEquivalence | Claim::NextOrderIdentity | Claim::KernelStableReduction
            if trial % 2 == 1 =>
        {
            let spec = GeneratorSpec::new(Scheme::PolynomialFamily, g.next_u64(), n, d);
            Ok(instance(
                random_commuting_tuple(&spec)?,
                None,
                m,
                q,
                "polynomial_family",
            ))
        }
        Claim::DefectEquivalence
        | Claim::NextOrderIdentity
        | Claim::KernelStableReduction
        | Claim::OrderAscent
        | Claim::QuasinormalCollapse
        | Claim::SpectrumLocation
        | Claim::EigenConjugation => {
            let rank = g.random_range(1..=n);
            let t = reducing_partial_isometry(&mut g, n, d, rank)?;
            let q = if claim == Claim::QuasinormalCollapse {
                MultiIndex::ones(d)
            } else {
                q
            };
            Ok(instance(t, None, m, q, "reducing_partial_isometry"))
        }
        Claim::PowerSumExpansion => {
            let (s, t) = random_commuting_pair(&mut g, n, d)?;
            Ok(instance(
                t,
                Some(s),
                g.random_range(1..=4),
                MultiIndex::ones(d),
                "random_commuting_pair",
            ))
        }
        Claim::LeftInverseSpectralMap | Claim::RightInverseSpectralMap => {
            if trial.is_multiple_of(2) {
                let (s, t) = scaled_inverse_pair(&mut g, n, d)?;
                Ok(instance(
                    t,
                    Some(s),
                    1,
                    MultiIndex::ones(d),
                    "scaled_inverse_pair",
                ))
            } else {
                let (s, t) = nilpotent_two_inverse_pair(&mut g, n)?;
                Ok(instance(
                    t,
                    Some(s),
                    2,
                    MultiIndex::ones(2),
                    "nilpotent_two_inverse_pair",
                ))
            }
        }
    }
}
