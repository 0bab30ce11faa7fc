//! Membership of integer triples in the admissible set at level `(p, N)`.
//!
//! A triple `(s1, s2, s3)` is admissible when
//!
//! * `s1 + s2 + s3 <= p^N - 2` and the three triangle inequalities hold, and
//! * for every lower level `N' < N` some choice
//!   `s'_i in {[s_i], p^N' - 1 - [s_i]}` (residues mod `p^N'`) satisfies the
//!   same conditions with bound `p^N' - 2`.
//!
//! [`is_admissible`] implements that existential form and is the reference.
//! [`is_admissible_hat`] uses the folded residue `min([a], m - 1 - [a])`
//! instead and serves as an independent check.

use serde::{Deserialize, Serialize};

use crate::error::AdmissibilityError;

/// Default bound on `p^N` for [`enumerate_admissible`].
pub const DEFAULT_ENUMERATION_GUARD: u128 = 10_000;

/// The pair `(p, N)`. `p` may be any nonnegative integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelParams {
    p: u64,
    level: u32,
    /// `p^1, ..., p^N`
    moduli: Vec<u128>,
}

impl LevelParams {
    pub fn new(p: u64, level: u32) -> Result<Self, AdmissibilityError> {
        if level == 0 {
            return Err(AdmissibilityError::ZeroLevel);
        }
        let mut moduli = Vec::with_capacity(level as usize);
        let mut m: u128 = 1;
        for _ in 0..level {
            m = m
                .checked_mul(p as u128)
                .ok_or(AdmissibilityError::LevelOverflow { p, level })?;
            moduli.push(m);
        }
        Ok(LevelParams { p, level, moduli })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `p^N' ` for `1 <= N' <= N`.
    pub fn modulus_at(&self, level: u32) -> u128 {
        self.moduli[level as usize - 1]
    }

    /// `p^N`
    pub fn modulus(&self) -> u128 {
        self.modulus_at(self.level)
    }

    /// Largest admissible label sum `p^N - 2`; negative when the set is empty.
    pub fn label_bound(&self) -> i128 {
        self.modulus() as i128 - 2
    }

    /// Number of candidate labels per edge, `max(p^N - 1, 0)`.
    pub fn alphabet_size(&self) -> u128 {
        self.modulus().saturating_sub(1)
    }

    pub fn with_level(&self, level: u32) -> Result<Self, AdmissibilityError> {
        LevelParams::new(self.p, level)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple(pub [u64; 3]);

impl Triple {
    pub fn new(s1: u64, s2: u64, s3: u64) -> Self {
        Triple([s1, s2, s3])
    }
}

impl From<(u64, u64, u64)> for Triple {
    fn from((a, b, c): (u64, u64, u64)) -> Self {
        Triple([a, b, c])
    }
}

/// `a mod m`.
pub fn remainder(a: u128, m: u128) -> Result<u128, AdmissibilityError> {
    if m == 0 {
        return Err(AdmissibilityError::ZeroModulus);
    }
    Ok(a % m)
}

/// Folded residue `min([a]_m, m - 1 - [a]_m)`.
pub fn hat(a: u128, m: u128) -> Result<u128, AdmissibilityError> {
    let r = remainder(a, m)?;
    Ok(r.min(m - 1 - r))
}

/// Sum bound plus triangle inequalities.
pub fn base_admissible(t: Triple, bound: i128) -> bool {
    let [a, b, c] = t.0.map(|x| x as i128);
    a + b + c <= bound && (b - c).abs() <= a && a <= b + c
}

fn base_u128(a: u128, b: u128, c: u128, bound: i128) -> bool {
    if bound < 0 {
        return false;
    }
    let bound = bound as u128;
    a + b + c <= bound && a <= b + c && b <= a + c && c <= a + b
}

fn exists_lifted_choice(t: Triple, m: u128) -> bool {
    let r = t.0.map(|x| x as u128 % m);
    let bound = m as i128 - 2;
    (0..8u8).any(|mask| {
        let pick = |i: usize| {
            if mask >> i & 1 == 0 {
                r[i]
            } else {
                m - 1 - r[i]
            }
        };
        base_u128(pick(0), pick(1), pick(2), bound)
    })
}

/// Existential membership test.
pub fn is_admissible(t: Triple, lp: &LevelParams) -> bool {
    if !base_admissible(t, lp.label_bound()) {
        return false;
    }
    (1..lp.level()).all(|lower| exists_lifted_choice(t, lp.modulus_at(lower)))
}

/// Membership test through folded residues.
pub fn is_admissible_hat(t: Triple, lp: &LevelParams) -> bool {
    if !base_admissible(t, lp.label_bound()) {
        return false;
    }
    (1..lp.level()).all(|lower| {
        let m = lp.modulus_at(lower);
        let [a, b, c] = t.0.map(|x| {
            let r = x as u128 % m;
            r.min(m - 1 - r)
        });
        base_u128(a, b, c, m as i128 - 2)
    })
}

/// Lexicographic stream of the admissible triples. The sum bound keeps every
/// component at most `p^N - 2`, so only that cube is scanned.
pub fn enumerate_admissible(
    lp: &LevelParams,
    guard: u128,
) -> Result<impl Iterator<Item = Triple> + '_, AdmissibilityError> {
    let size = lp.modulus();
    if size > guard {
        return Err(AdmissibilityError::GuardExceeded { size, guard });
    }
    let n = lp.alphabet_size() as u64;
    let checker = LabelChecker::new(lp).expect("guarded alphabet fits");
    Ok((0..n)
        .flat_map(move |a| (0..n).flat_map(move |b| (0..n).map(move |c| Triple([a, b, c]))))
        .filter(move |t| checker.admits(t.0[0], t.0[1], t.0[2])))
}

/// Cardinality of the admissible set.
pub fn count_admissible(lp: &LevelParams, guard: u128) -> Result<u64, AdmissibilityError> {
    Ok(enumerate_admissible(lp, guard)?.count() as u64)
}

/// Membership test specialised to labels below `u64::MAX`, used in the
/// counting hot loops. Same semantics as [`is_admissible`].
#[derive(Clone, Debug)]
pub struct LabelChecker {
    bound: i64,
    /// moduli of the lower levels `p^1 .. p^(N-1)`
    lower: Vec<u64>,
}

impl LabelChecker {
    /// `None` when `p^N` does not fit in 63 bits.
    pub fn new(lp: &LevelParams) -> Option<Self> {
        if lp.modulus() > i64::MAX as u128 {
            return None;
        }
        Some(LabelChecker {
            bound: lp.label_bound() as i64,
            lower: (1..lp.level())
                .map(|l| lp.modulus_at(l) as u64)
                .collect(),
        })
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    #[inline]
    pub fn admits_base(&self, a: u64, b: u64, c: u64) -> bool {
        self.bound >= 0
            && a + b + c <= self.bound as u64
            && a <= b + c
            && b <= a + c
            && c <= a + b
    }

    #[inline]
    pub fn admits(&self, a: u64, b: u64, c: u64) -> bool {
        if !self.admits_base(a, b, c) {
            return false;
        }
        self.lower.iter().all(|&m| {
            let r = [a % m, b % m, c % m];
            let bound = m - 2;
            (0..8u8).any(|mask| {
                let pick = |i: usize| {
                    if mask >> i & 1 == 0 {
                        r[i]
                    } else {
                        m - 1 - r[i]
                    }
                };
                let (x, y, z) = (pick(0), pick(1), pick(2));
                x + y + z <= bound && x <= y + z && y <= x + z && z <= x + y
            })
        })
    }
}
