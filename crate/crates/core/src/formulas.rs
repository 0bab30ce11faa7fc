//! Degree formulas and their cross-checks against exact counts.
//!
//! * `deg_pi1_sine`: `p^(g-1) / 2^(2g-1) * sum_{θ=1}^{p-1} csc^(2g-2)(πθ/p)`,
//!   evaluated in binary fixed point and snapped to the nearest integer.
//! * `deg_ver_ratio`: quotient of the level-2 and level-1 counts.
//! * `deg_ver_closed`: closed forms for genus 2 and 3.
//! * `deg_pi_n`: level-1 degree times the Verschiebung degree to the `N-1`.

use std::time::Instant;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::admissibility::LevelParams;
use crate::enumeration::{count_dp, DpOptions};
use crate::error::FormulaError;
use crate::graph::{catalog, TrivalentGraph};

/// Minimum mantissa width accepted for the sine sum.
pub const MIN_PRECISION_BITS: u32 = 64;
/// Relative distance to the nearest integer tolerated by the snap.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Pi1,
    PiN,
    Ver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMethod {
    SineSum,
    CountRatio,
    ClosedForm,
    Product,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeResult {
    pub genus: u32,
    pub p: u64,
    pub level: u32,
    pub quantity: Quantity,
    pub value: BigUint,
    pub method: DegreeMethod,
    pub elapsed_ms: u64,
}

/// Wire form of a [`DegreeResult`], following the count report conventions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeResultJson {
    pub quantity: Quantity,
    pub genus: u32,
    pub p: u64,
    #[serde(rename = "N")]
    pub level: u32,
    pub value: String,
    pub method: DegreeMethod,
    pub elapsed_ms: u64,
}

impl DegreeResult {
    pub fn to_json(&self, stable: bool) -> DegreeResultJson {
        DegreeResultJson {
            quantity: self.quantity,
            genus: self.genus,
            p: self.p,
            level: self.level,
            value: self.value.to_str_radix(10),
            method: self.method,
            elapsed_ms: if stable { 0 } else { self.elapsed_ms },
        }
    }
}

fn check_odd_p(p: u64) -> Result<(), FormulaError> {
    if p < 3 || p % 2 == 0 {
        return Err(FormulaError::InvalidArgument(format!(
            "p must be an odd integer >= 3, got {p}"
        )));
    }
    Ok(())
}

fn check_genus(g: u32) -> Result<(), FormulaError> {
    if g < 2 {
        return Err(FormulaError::InvalidArgument(format!(
            "genus must be at least 2, got {g}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fixed-point trigonometry. A value x is stored as round(x * 2^bits).

struct Fixed {
    bits: u32,
}

impl Fixed {
    fn one(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }

    /// atan(1/x) for an integer x > 1.
    fn atan_inv(&self, x: u64) -> BigInt {
        let x = BigInt::from(x);
        let x2 = &x * &x;
        let mut power = self.one() / &x;
        let mut sum = BigInt::zero();
        let mut k: u64 = 0;
        while !power.is_zero() {
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &x2;
            k += 1;
        }
        sum
    }

    fn pi(&self) -> BigInt {
        // Machin: π = 16 atan(1/5) - 4 atan(1/239)
        self.atan_inv(5) * 16 - self.atan_inv(239) * 4
    }

    /// Taylor series, accurate for |x| <= 2.
    fn sin(&self, x: &BigInt) -> BigInt {
        let x2 = self.mul(x, x);
        let mut term = x.clone();
        let mut sum = BigInt::zero();
        let mut k: u64 = 1;
        while !term.is_zero() {
            sum += &term;
            term = -self.mul(&term, &x2) / BigInt::from((2 * k) * (2 * k + 1));
            k += 1;
        }
        sum
    }
}

/// `p^(g-1) / 2^(2g-1) * sum csc^(2g-2)(πθ/p)` in fixed point with `bits`
/// fractional bits. Returns the scaled value.
fn sine_sum_scaled(g: u32, p: u64, bits: u32) -> BigInt {
    // guard bits absorb rounding in the sum and in the reciprocal powers
    let work = Fixed {
        bits: bits + 32 + 8 * g,
    };
    let pi = work.pi();
    let power = 2 * g - 2;
    let mut sum = BigInt::zero();
    for theta in 1..p {
        // sin(πθ/p) = sin(π(p-θ)/p), keep the angle below π/2
        let folded = theta.min(p - theta);
        let angle = &pi * BigInt::from(folded) / BigInt::from(p);
        let s = work.sin(&angle);
        let mut sp = work.one();
        for _ in 0..power {
            sp = work.mul(&sp, &s);
        }
        sum += (BigInt::one() << (2 * work.bits)) / sp;
    }
    let scaled = sum * BigInt::from(p).pow(g - 1) >> (2 * g - 1);
    scaled >> (work.bits - bits)
}

/// Nearest integer to a fixed-point value when it lies within the relative
/// tolerance, otherwise `NotNearInteger`.
fn snap_to_integer(value: &BigInt, bits: u32) -> Result<BigUint, FormulaError> {
    let half = BigInt::one() << (bits - 1);
    let nearest: BigInt = (value + &half) >> bits;
    let diff = value - (&nearest << bits);
    let diff = if diff.sign() == Sign::Minus { -diff } else { diff };
    // |diff| / 2^bits <= tol * nearest
    let tol_inv = BigInt::from((1.0 / INTEGRALITY_TOLERANCE).round() as u64);
    let describe = || {
        let whole = value >> bits;
        let frac = ((value - (&whole << bits)) * BigInt::from(1_000_000_000u64)) >> bits;
        format!("{whole}.{frac:0>9}")
    };
    if nearest.sign() != Sign::Plus || diff * tol_inv > (&nearest << bits) {
        return Err(FormulaError::NotNearInteger { value: describe() });
    }
    Ok(nearest.to_biguint().expect("positive"))
}

/// Level-1 degree from the trigonometric sum.
pub fn deg_pi1_sine(g: u32, p: u64, precision_bits: u32) -> Result<BigUint, FormulaError> {
    check_genus(g)?;
    check_odd_p(p)?;
    if precision_bits < MIN_PRECISION_BITS {
        return Err(FormulaError::InvalidArgument(format!(
            "precision must be at least {MIN_PRECISION_BITS} bits, got {precision_bits}"
        )));
    }
    snap_to_integer(&sine_sum_scaled(g, p, precision_bits), precision_bits)
}

/// `sum_{θ=1}^{p-1} csc^(2g-2)(πθ/p)` in closed form for genus 2 and 3:
/// `(p^2-1)/3` and `(p^2-1)(p^2+11)/45`. Independent of the sine evaluation.
pub fn csc_power_sum_closed(g: u32, p: u64) -> Result<BigRational, FormulaError> {
    let p2 = BigInt::from(p) * p;
    let (num, den) = match g {
        2 => (&p2 - 1, 3),
        3 => ((&p2 - 1) * (&p2 + 11), 45),
        _ => return Err(FormulaError::UnsupportedGenus(g)),
    };
    Ok(BigRational::new(num, BigInt::from(den)))
}

/// Level-1 degree through [`csc_power_sum_closed`], genus 2 and 3 only.
pub fn deg_pi1_closed(g: u32, p: u64) -> Result<BigUint, FormulaError> {
    check_odd_p(p)?;
    let sum = csc_power_sum_closed(g, p)?;
    let value = sum * BigRational::from_integer(BigInt::from(p).pow(g - 1))
        / BigRational::from_integer(BigInt::one() << (2 * g - 1));
    if !value.is_integer() {
        return Err(FormulaError::NonIntegerRatio {
            numerator: value.numer().to_string(),
            denominator: value.denom().to_string(),
        });
    }
    Ok(value.to_integer().to_biguint().expect("positive"))
}

fn exact_div(num: &BigUint, den: &BigUint) -> Result<BigUint, FormulaError> {
    if den.is_zero() {
        return Err(FormulaError::ZeroDenominator);
    }
    let (q, r) = num.div_rem(den);
    if !r.is_zero() {
        return Err(FormulaError::NonIntegerRatio {
            numerator: num.to_string(),
            denominator: den.to_string(),
        });
    }
    Ok(q)
}

/// Level-2 count over level-1 count on `graph`.
pub fn deg_ver_ratio(
    graph: &TrivalentGraph,
    p: u64,
    opts: &DpOptions,
) -> Result<BigUint, FormulaError> {
    let level = |n| LevelParams::new(p, n).map_err(|e| FormulaError::InvalidArgument(e.to_string()));
    let low = count_dp(graph, &level(1)?, opts)?.count;
    if low.is_zero() {
        return Err(FormulaError::ZeroDenominator);
    }
    let high = count_dp(graph, &level(2)?, opts)?.count;
    exact_div(&high, &low)
}

/// `(p^3 + 2p)/3` for genus 2, `(2p^6 + 5p^4 + 38p^2)/45` for genus 3.
pub fn deg_ver_closed(g: u32, p: u64) -> Result<BigUint, FormulaError> {
    check_odd_p(p)?;
    let x = BigUint::from(p);
    let (num, den) = match g {
        2 => ((&x).pow(3u32) + 2u8 * &x, 3u8),
        3 => (2u8 * (&x).pow(6u32) + 5u8 * (&x).pow(4u32) + 38u8 * (&x).pow(2u32), 45u8),
        _ => return Err(FormulaError::UnsupportedGenus(g)),
    };
    exact_div(&num, &BigUint::from(den))
}

/// Verschiebung degree by closed form where one exists, otherwise by the
/// count ratio on `chain:g`.
pub fn deg_ver(g: u32, p: u64, opts: &DpOptions) -> Result<(BigUint, DegreeMethod), FormulaError> {
    check_genus(g)?;
    match deg_ver_closed(g, p) {
        Ok(v) => Ok((v, DegreeMethod::ClosedForm)),
        Err(FormulaError::UnsupportedGenus(_)) => {
            let graph = catalog(&format!("chain:{g}"))?;
            Ok((deg_ver_ratio(&graph, p, opts)?, DegreeMethod::CountRatio))
        }
        Err(e) => Err(e),
    }
}

/// Degree at level `N`: the level-1 sine formula times `deg_ver^(N-1)`.
pub fn deg_pi_n(
    g: u32,
    p: u64,
    level: u32,
    precision_bits: u32,
    opts: &DpOptions,
) -> Result<BigUint, FormulaError> {
    if level == 0 {
        return Err(FormulaError::InvalidArgument("level must be at least 1".into()));
    }
    let base = deg_pi1_sine(g, p, precision_bits)?;
    if level == 1 {
        return Ok(base);
    }
    let (ver, _) = deg_ver(g, p, opts)?;
    Ok(base * ver.pow(level - 1))
}

/// Runs one of the degree computations and wraps it in a [`DegreeResult`].
pub fn degree(
    quantity: Quantity,
    g: u32,
    p: u64,
    level: u32,
    precision_bits: u32,
    opts: &DpOptions,
) -> Result<DegreeResult, FormulaError> {
    let start = Instant::now();
    let (value, method, level) = match quantity {
        Quantity::Pi1 => (deg_pi1_sine(g, p, precision_bits)?, DegreeMethod::SineSum, 1),
        Quantity::PiN => (
            deg_pi_n(g, p, level, precision_bits, opts)?,
            DegreeMethod::Product,
            level,
        ),
        Quantity::Ver => {
            let (v, m) = deg_ver(g, p, opts)?;
            (v, m, 1)
        }
    };
    Ok(DegreeResult {
        genus: g,
        p,
        level,
        quantity,
        value,
        method,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn sine_examples() {
        assert_eq!(deg_pi1_sine(2, 3, 64).unwrap(), big(1));
        assert_eq!(deg_pi1_sine(2, 5, 64).unwrap(), big(5));
        assert_eq!(deg_pi1_sine(3, 5, 64).unwrap(), big(15));
        assert_eq!(deg_pi1_sine(3, 11, 128).unwrap(), big(1331));
    }

    #[test]
    fn sine_matches_closed_csc_sums() {
        assert_eq!(
            csc_power_sum_closed(2, 3).unwrap(),
            BigRational::new(8.into(), 3.into())
        );
        for g in 2..=3u32 {
            for p in (3..=61u64).step_by(2) {
                assert_eq!(
                    deg_pi1_sine(g, p, 64).unwrap(),
                    deg_pi1_closed(g, p).unwrap(),
                    "g={g} p={p}"
                );
            }
        }
        assert_eq!(deg_pi1_closed(4, 5), Err(FormulaError::UnsupportedGenus(4)));
    }

    #[test]
    fn pi_digits() {
        let f = Fixed { bits: 200 };
        let pi = f.pi();
        // 3.14159265358979323846 * 10^20
        let digits: BigInt = (pi * BigInt::from(10u64).pow(20u32)) >> 200;
        assert_eq!(digits.to_string(), "314159265358979323846");
    }

    #[test]
    fn sine_argument_checks() {
        assert!(matches!(
            deg_pi1_sine(2, 4, 64),
            Err(FormulaError::InvalidArgument(_))
        ));
        assert!(matches!(
            deg_pi1_sine(2, 5, 32),
            Err(FormulaError::InvalidArgument(_))
        ));
        assert!(matches!(
            deg_pi1_sine(1, 5, 64),
            Err(FormulaError::InvalidArgument(_))
        ));
    }

    #[test]
    fn snap_rejects_fractional_values() {
        let bits = 64;
        let two_and_half = (BigInt::from(5) << bits) / 2;
        assert!(matches!(
            snap_to_integer(&two_and_half, bits),
            Err(FormulaError::NotNearInteger { .. })
        ));
        let nearly_seven = (BigInt::from(7) << bits) - BigInt::from(1000);
        assert_eq!(snap_to_integer(&nearly_seven, bits).unwrap(), big(7));
        // sum for p = 6 at genus 2 is 6*35/24 = 8.75
        assert!(matches!(
            snap_to_integer(&sine_sum_scaled(2, 6, 64), 64),
            Err(FormulaError::NotNearInteger { .. })
        ));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(deg_ver_closed(2, 3).unwrap(), big(11));
        assert_eq!(deg_ver_closed(3, 3).unwrap(), big(49));
        assert_eq!(deg_ver_closed(3, 7).unwrap(), big(5537));
        assert_eq!(deg_ver_closed(4, 7), Err(FormulaError::UnsupportedGenus(4)));
        assert!(deg_ver_closed(2, 8).is_err());
    }

    #[test]
    fn ratios() {
        let opts = DpOptions::default();
        let c3 = catalog("chain:3").unwrap();
        assert_eq!(deg_ver_ratio(&c3, 3, &opts).unwrap(), big(49));
        assert_eq!(deg_ver_ratio(&c3, 5, &opts).unwrap(), big(785));
        let theta = catalog("theta").unwrap();
        assert_eq!(deg_ver_ratio(&theta, 3, &opts).unwrap(), big(11));
        assert_eq!(
            deg_ver_ratio(&theta, 1, &opts),
            Err(FormulaError::ZeroDenominator)
        );
    }

    #[test]
    fn products() {
        let opts = DpOptions::default();
        assert_eq!(deg_pi_n(3, 5, 2, 64, &opts).unwrap(), big(11775));
        assert_eq!(deg_pi_n(3, 3, 3, 64, &opts).unwrap(), big(2401));
        assert_eq!(deg_pi_n(2, 3, 2, 64, &opts).unwrap(), big(11));
        // genus 4 goes through the count ratio
        let r = degree(Quantity::Ver, 4, 3, 1, 64, &opts).unwrap();
        assert_eq!(r.method, DegreeMethod::CountRatio);
    }

    #[test]
    fn degree_json() {
        let r = degree(Quantity::Ver, 2, 3, 1, 64, &DpOptions::default()).unwrap();
        let j = serde_json::to_string(&r.to_json(true)).unwrap();
        assert_eq!(
            j,
            r#"{"quantity":"ver","genus":2,"p":3,"N":1,"value":"11","method":"closed_form","elapsed_ms":0}"#
        );
    }
}
