//! Exact quasi-polynomials with period dividing 4.
//!
//! Fitting solves one Vandermonde-type system per residue class by Gaussian
//! elimination over the rationals. Nothing in this module touches floating
//! point.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::FitError;

pub type Rational = BigRational;

/// Default largest index accepted by [`bernoulli`].
pub const DEFAULT_BERNOULLI_BOUND: u32 = 64;

/// Periods searched by [`fit_auto`], smallest first.
pub const CANDIDATE_PERIODS: [u32; 3] = [1, 2, 4];

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Bernoulli numbers `B_0 ..= B_n` with `B_1 = -1/2`, from
/// `sum_{k=0}^{m} C(m+1, k) B_k = 0`.
pub fn bernoulli_table(n: u32) -> Vec<Rational> {
    let mut table: Vec<Rational> = Vec::with_capacity(n as usize + 1);
    table.push(Rational::one());
    for m in 1..=n as usize {
        // binomials C(m+1, k) for k = 0..m
        let mut binom = BigInt::one();
        let mut acc = Rational::zero();
        for (k, b) in table.iter().enumerate() {
            acc += b * int(binom.clone());
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        table.push(-acc / int(m as u64 + 1));
    }
    table
}

pub fn bernoulli(n: u32) -> Result<Rational, FitError> {
    bernoulli_bounded(n, DEFAULT_BERNOULLI_BOUND)
}

pub fn bernoulli_bounded(n: u32, bound: u32) -> Result<Rational, FitError> {
    if n > bound {
        return Err(FitError::BoundExceeded { index: n, bound });
    }
    Ok(bernoulli_table(n).pop().expect("table has n + 1 entries"))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// Which quasi-polynomial a leading-coefficient prediction refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeadingKind {
    /// count at level 1
    H1,
    /// count at level 2
    H2,
    /// ratio of the level-2 and level-1 counts
    Q,
}

/// Leading coefficient of H1, H2 or Q at genus `g`, in terms of `B_{2g-2}`.
pub fn predicted_leading(kind: LeadingKind, g: u32) -> Rational {
    assert!(g >= 2, "genus must be at least 2");
    let b = bernoulli_table(2 * g - 2).pop().expect("nonempty");
    let fact = int(factorial(2 * g - 2));
    let sign = if g % 2 == 0 { int(1) } else { int(-1) };
    match kind {
        LeadingKind::H1 => sign * &b / (int(2) * fact),
        LeadingKind::H2 => {
            int(BigInt::from(2).pow(3 * g - 5)) * &b * &b / (&fact * &fact)
        }
        LeadingKind::Q => sign * int(BigInt::from(2).pow(3 * g - 4)) * b / fact,
    }
}

/// Monomials used by a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Basis {
    /// `1, t, ..., t^d`
    #[default]
    Full,
    /// `t^d, t^(d-2), ...`; assumes the constituents have the parity of `d`.
    ParityRestricted,
}

impl Basis {
    fn powers(self, degree: usize) -> Vec<usize> {
        match self {
            Basis::Full => (0..=degree).collect(),
            Basis::ParityRestricted => (0..=degree).rev().step_by(2).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub t: i64,
    pub value: Rational,
}

impl Sample {
    pub fn new(t: i64, value: impl Into<BigInt>) -> Self {
        Sample {
            t,
            value: int(value),
        }
    }

    pub fn rational(t: i64, value: Rational) -> Self {
        Sample { t, value }
    }
}

/// `constituents[r]` holds the coefficients (constant term first) used for
/// arguments congruent to `r` modulo the period; `None` when no data
/// determined it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiPolynomial {
    pub period: u32,
    pub degree: usize,
    pub constituents: Vec<Option<Vec<Rational>>>,
}

impl QuasiPolynomial {
    pub fn polynomial(coeffs: Vec<Rational>) -> Self {
        let degree = coeffs.len().saturating_sub(1);
        QuasiPolynomial {
            period: 1,
            degree,
            constituents: vec![Some(coeffs)],
        }
    }

    pub fn residue(&self, t: i64) -> u32 {
        t.rem_euclid(self.period as i64) as u32
    }

    pub fn constituent(&self, residue: u32) -> Option<&[Rational]> {
        self.constituents
            .get(residue as usize)
            .and_then(|c| c.as_deref())
    }

    pub fn evaluate(&self, t: i64) -> Result<Rational, FitError> {
        let r = self.residue(t);
        let coeffs = self
            .constituent(r)
            .ok_or(FitError::UndefinedConstituent(r))?;
        let x = int(t);
        Ok(coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * &x + c))
    }

    /// Coefficient of `t^degree` in the given constituent.
    pub fn leading(&self, residue: u32) -> Option<&Rational> {
        self.constituent(residue).map(|c| &c[self.degree])
    }

    pub fn to_json(&self) -> QuasiPolynomialJson {
        QuasiPolynomialJson {
            period: self.period,
            degree: self.degree,
            constituents: self
                .constituents
                .iter()
                .map(|c| {
                    c.as_ref()
                        .map(|cs| cs.iter().map(format_rational).collect())
                })
                .collect(),
        }
    }

    pub fn from_json(doc: &QuasiPolynomialJson) -> Result<Self, FitError> {
        if !CANDIDATE_PERIODS.contains(&doc.period) {
            return Err(FitError::UnsupportedPeriod(doc.period));
        }
        let constituents = doc
            .constituents
            .iter()
            .map(|c| {
                c.as_ref()
                    .map(|cs| cs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>())
                    .transpose()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if constituents.len() != doc.period as usize
            || constituents
                .iter()
                .flatten()
                .any(|c| c.len() != doc.degree + 1)
        {
            return Err(FitError::MalformedCoefficient(
                "constituent shape does not match period and degree".into(),
            ));
        }
        Ok(QuasiPolynomial {
            period: doc.period,
            degree: doc.degree,
            constituents,
        })
    }
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, c) in self.constituents.iter().enumerate() {
            if self.period > 1 {
                write!(f, "[t = {r} mod {}] ", self.period)?;
            }
            match c {
                None => write!(f, "undefined")?,
                Some(cs) => {
                    let mut first = true;
                    for (k, a) in cs.iter().enumerate().rev() {
                        if a.is_zero() {
                            continue;
                        }
                        if !first {
                            f.write_str(" + ")?;
                        }
                        first = false;
                        match k {
                            0 => write!(f, "{a}")?,
                            1 => write!(f, "({a})t")?,
                            _ => write!(f, "({a})t^{k}")?,
                        }
                    }
                    if first {
                        f.write_str("0")?;
                    }
                }
            }
            if r + 1 < self.constituents.len() {
                f.write_str("; ")?;
            }
        }
        Ok(())
    }
}

/// Wire form: coefficients as `"num/den"` strings, constant term first;
/// `null` marks an undefined constituent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiPolynomialJson {
    pub period: u32,
    pub degree: usize,
    pub constituents: Vec<Option<Vec<String>>>,
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, FitError> {
    let bad = || FitError::MalformedCoefficient(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

// ---------------------------------------------------------------------------
// Linear algebra

enum Solve {
    Unique(Vec<Rational>),
    Singular,
    Inconsistent,
}

/// Solves the overdetermined system `rows * x = rhs` exactly. The solution
/// must be unique and satisfy every row.
fn solve_exact(mut rows: Vec<Vec<Rational>>, mut rhs: Vec<Rational>, unknowns: usize) -> Solve {
    let n_rows = rows.len();
    let mut pivot_row = 0;
    for col in 0..unknowns {
        // largest magnitude pivot; comparison of rationals is exact
        let best = (pivot_row..n_rows)
            .filter(|&r| !rows[r][col].is_zero())
            .max_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
        let Some(best) = best else {
            return Solve::Singular;
        };
        rows.swap(pivot_row, best);
        rhs.swap(pivot_row, best);
        let pivot = rows[pivot_row][col].clone();
        for r in 0..n_rows {
            if r == pivot_row || rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &pivot;
            for c in col..unknowns {
                let delta = &factor * &rows[pivot_row][c];
                rows[r][c] -= delta;
            }
            let delta = &factor * &rhs[pivot_row];
            rhs[r] -= delta;
        }
        pivot_row += 1;
    }
    if rhs[unknowns..].iter().any(|v| !v.is_zero()) {
        return Solve::Inconsistent;
    }
    Solve::Unique(
        (0..unknowns)
            .map(|i| &rhs[i] / &rows[i][i])
            .collect(),
    )
}

fn fit_residue(
    samples: &[&Sample],
    degree: usize,
    basis: Basis,
    residue: u32,
) -> Result<Vec<Rational>, FitError> {
    let powers = basis.powers(degree);
    if samples.len() < powers.len() {
        return Err(FitError::InsufficientSamples {
            residue,
            have: samples.len(),
            need: powers.len(),
        });
    }
    let mut ts: Vec<i64> = samples.iter().map(|s| s.t).collect();
    ts.sort_unstable();
    if ts.windows(2).any(|w| w[0] == w[1]) {
        return Err(FitError::SingularSystem(residue));
    }
    let rows = samples
        .iter()
        .map(|s| {
            let x = int(s.t);
            powers.iter().map(|&k| num_traits::pow(x.clone(), k)).collect()
        })
        .collect();
    let rhs = samples.iter().map(|s| s.value.clone()).collect();
    match solve_exact(rows, rhs, powers.len()) {
        Solve::Unique(x) => {
            let mut coeffs = vec![Rational::zero(); degree + 1];
            for (k, v) in powers.iter().zip(x) {
                coeffs[*k] = v;
            }
            Ok(coeffs)
        }
        Solve::Singular => Err(FitError::SingularSystem(residue)),
        Solve::Inconsistent => Err(FitError::InconsistentSamples(residue)),
    }
}

/// Fits one constituent per residue class mod `period`. Every sample is
/// reproduced exactly, or the fit fails.
pub fn fit(
    samples: &[Sample],
    degree: usize,
    period: u32,
    basis: Basis,
) -> Result<QuasiPolynomial, FitError> {
    if !CANDIDATE_PERIODS.contains(&period) {
        return Err(FitError::UnsupportedPeriod(period));
    }
    let mut constituents = Vec::with_capacity(period as usize);
    for r in 0..period {
        let class: Vec<&Sample> = samples
            .iter()
            .filter(|s| s.t.rem_euclid(period as i64) as u32 == r)
            .collect();
        if class.is_empty() {
            constituents.push(None);
        } else {
            constituents.push(Some(fit_residue(&class, degree, basis, r)?));
        }
    }
    Ok(QuasiPolynomial {
        period,
        degree,
        constituents,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutoFit {
    pub quasi: QuasiPolynomial,
    /// Smallest period whose fit reproduced the held-out samples.
    pub period: u32,
    /// Arguments that were held out for validation.
    pub held_out: Vec<i64>,
}

/// Tries periods 1, 2, 4 in turn. For each, the largest argument of every
/// residue class is held out, the rest are fitted, and the period is
/// accepted when the held-out values are reproduced exactly. The returned
/// quasi-polynomial is refitted on all samples.
pub fn fit_auto(samples: &[Sample], degree: usize, basis: Basis) -> Result<AutoFit, FitError> {
    let need = basis.powers(degree).len() + 1;
    let mut shortage: Option<FitError> = None;
    let mut any_candidate = false;
    for period in CANDIDATE_PERIODS {
        let mut train = Vec::new();
        let mut held = Vec::new();
        let mut enough = true;
        for r in 0..period {
            let mut class: Vec<&Sample> = samples
                .iter()
                .filter(|s| s.t.rem_euclid(period as i64) as u32 == r)
                .collect();
            if class.is_empty() {
                continue;
            }
            if class.len() < need {
                enough = false;
                shortage.get_or_insert(FitError::InsufficientSamples {
                    residue: r,
                    have: class.len(),
                    need,
                });
                break;
            }
            class.sort_by_key(|s| s.t);
            held.push(class.pop().expect("nonempty").clone());
            train.extend(class.into_iter().cloned());
        }
        if !enough {
            continue;
        }
        any_candidate = true;
        let Ok(q) = fit(&train, degree, period, basis) else {
            continue;
        };
        let validated = held
            .iter()
            .all(|s| q.evaluate(s.t).map(|v| v == s.value).unwrap_or(false));
        if validated {
            return Ok(AutoFit {
                quasi: fit(samples, degree, period, basis)?,
                period,
                held_out: held.iter().map(|s| s.t).collect(),
            });
        }
    }
    if any_candidate {
        Err(FitError::NoPeriodValidates)
    } else {
        Err(shortage.unwrap_or(FitError::InsufficientSamples {
            residue: 0,
            have: 0,
            need,
        }))
    }
}
