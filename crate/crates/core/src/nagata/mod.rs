//! Point-count arithmetic: `r = k^2 + alpha`, `eps = sqrt(r) - k`, the two
//! coverage cases, the dimension-count condition and the minimal degree
//! exceeding `sqrt(r) mu`.
//!
//! Case 1 (`alpha` odd, `eps > 1/sqrt(2k-1)`) is decided by an integer test.
//! With `c = 1/sqrt(2k-1)`, `eps > c` iff `k^2 + alpha > (k + c)^2` iff
//! `alpha - c^2 > 2kc` iff `alpha(2k-1) - 1 > 2k sqrt(2k-1)`, i.e. the left
//! side is positive and `(alpha(2k-1) - 1)^2 > 4k^2 (2k-1)`.

pub mod trace;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::picard::{chi, isqrt, PicardClass};
use crate::quadratic::{rational, rational_serde, QuadraticExpr, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    Case1,
    Case2,
    Square,
    NotCovered,
}

impl Coverage {
    pub fn is_covered(self) -> bool {
        self != Coverage::NotCovered
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coverage::Case1 => "Case1",
            Coverage::Case2 => "Case2",
            Coverage::Square => "Square",
            Coverage::NotCovered => "NotCovered",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NagataProfile {
    pub r: u64,
    pub square: bool,
    pub k: u64,
    pub alpha: u64,
    pub epsilon: QuadraticExpr,
    pub coverage: Coverage,
}

impl NagataProfile {
    /// `eps` to `digits` decimals, truncated; for display only.
    pub fn epsilon_decimal(&self, digits: u32) -> String {
        self.epsilon.to_decimal(digits)
    }
}

fn floor_sqrt(r: u64) -> u64 {
    isqrt(&BigInt::from(r)).try_into().expect("fits")
}

fn check_r(r: u64) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("need r >= 2, got {r}")));
    }
    Ok(())
}

/// `sqrt(r) - floor(sqrt(r))`.
pub fn epsilon(r: u64) -> QuadraticExpr {
    QuadraticExpr::sqrt(r) - QuadraticExpr::int(floor_sqrt(r))
}

/// Integer form of `eps > 1/sqrt(2k-1)`.
pub fn case1_bound(k: u64, alpha: u64) -> bool {
    let k = BigInt::from(k);
    let lhs = BigInt::from(alpha) * (&k * 2 - 1) - 1;
    lhs > BigInt::zero() && &lhs * &lhs > &k * &k * 4 * (&k * 2 - 1)
}

/// `2(sqrt 2 - 1)`.
pub fn case2_ceiling() -> QuadraticExpr {
    QuadraticExpr::term(rational(2, 1), 2) - QuadraticExpr::int(2)
}

fn coverage_of(k: u64, alpha: u64, eps: &QuadraticExpr) -> Coverage {
    if alpha == 0 {
        Coverage::Square
    } else if k < 3 {
        Coverage::NotCovered
    } else if alpha % 2 == 1 && case1_bound(k, alpha) {
        Coverage::Case1
    } else if alpha.is_multiple_of(2) && alpha >= 6 && *eps <= case2_ceiling() {
        Coverage::Case2
    } else {
        Coverage::NotCovered
    }
}

pub fn profile(r: u64) -> Result<NagataProfile> {
    check_r(r)?;
    let k = floor_sqrt(r);
    let alpha = r - k * k;
    let epsilon = epsilon(r);
    Ok(NagataProfile {
        r,
        square: alpha == 0,
        k,
        alpha,
        coverage: coverage_of(k, alpha, &epsilon),
        epsilon,
    })
}

pub fn theorem_covers(r: u64) -> Result<Coverage> {
    profile(r).map(|p| p.coverage)
}

/// One profile per `r` in `r_min..=r_max`, in order.
pub fn scan(r_min: u64, r_max: u64) -> Result<Vec<NagataProfile>> {
    check_r(r_min)?;
    if r_min > r_max {
        return Err(Error::InvalidArgument(format!(
            "empty range {r_min}..={r_max}"
        )));
    }
    (r_min..=r_max).map(profile).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub holds: bool,
    #[serde(with = "crate::picard::bigint_serde")]
    pub chi: BigInt,
    /// `r mu / 2 - 4`.
    #[serde(with = "rational_serde")]
    pub threshold: Rational,
    pub coverage: Coverage,
    /// `(d+3; (mu+1)^r)`, the twist by the anticanonical class.
    pub adjoint: PicardClass,
    #[serde(with = "crate::picard::bigint_serde")]
    pub adjoint_self_intersection: BigInt,
}

/// `chi(d, mu, r) > r mu / 2 - 4`, evaluated as `2 chi > r mu - 8`. The
/// coverage of `r` is reported alongside; the condition is evaluated
/// either way.
pub fn corollary_condition(d: u64, mu: u64, r: u64) -> Result<CorollaryReport> {
    check_r(r)?;
    let c = chi(d, mu, r);
    let rmu = BigInt::from(r) * mu;
    let holds = &c * 2 > &rmu - 8;
    let adjoint = PicardClass::uniform(d + 3, mu + 1, r as usize);
    Ok(CorollaryReport {
        holds,
        threshold: Rational::new(rmu, 2.into()) - Rational::from_integer(4.into()),
        chi: c,
        coverage: theorem_covers(r)?,
        adjoint_self_intersection: adjoint.self_intersection(),
        adjoint,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NefTarget {
    #[serde(with = "crate::picard::bigint_serde")]
    pub d: BigInt,
    #[serde(with = "crate::picard::bigint_serde")]
    pub d_squared: BigInt,
    #[serde(with = "crate::picard::bigint_serde")]
    pub r_mu_squared: BigInt,
    /// `(d-1)^2`, which is below `r mu^2`.
    #[serde(with = "crate::picard::bigint_serde")]
    pub previous_squared: BigInt,
}

/// Smallest `d` with `d^2 > r mu^2`.
pub fn nef_target(r: u64, mu: u64) -> Result<NefTarget> {
    check_r(r)?;
    if mu == 0 {
        return Err(Error::InvalidArgument("mu must be positive".into()));
    }
    let root = floor_sqrt(r);
    if root * root == r {
        return Err(Error::InvalidArgument(format!(
            "r = {r} is a square: d = {} mu satisfies d^2 = r mu^2 exactly, so no minimal strict d exists",
            root
        )));
    }
    let rmu2 = BigInt::from(r) * mu * mu;
    let d = isqrt(&rmu2) + BigInt::one();
    let prev = &d - 1;
    Ok(NefTarget {
        d_squared: &d * &d,
        previous_squared: &prev * &prev,
        r_mu_squared: rmu2,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_examples() {
        let p = profile(16).unwrap();
        assert!(p.square);
        assert_eq!((p.k, p.alpha, p.coverage), (4, 0, Coverage::Square));
        assert!(p.epsilon.is_zero());
        let p = profile(14).unwrap();
        assert_eq!((p.k, p.alpha), (3, 5));
        assert_eq!(p.epsilon, QuadraticExpr::sqrt(14) - QuadraticExpr::int(3));
        let p = profile(10).unwrap();
        assert_eq!((p.k, p.alpha), (3, 1));
        assert!(profile(1).is_err());
    }

    #[test]
    fn coverage_examples() {
        let expect = [
            (9, Coverage::Square),
            (10, Coverage::NotCovered),
            (11, Coverage::NotCovered),
            (12, Coverage::Case1),
            (13, Coverage::NotCovered),
            (14, Coverage::Case1),
            (15, Coverage::NotCovered),
            (16, Coverage::Square),
            (20, Coverage::NotCovered),
            (21, Coverage::Case1),
            (22, Coverage::Case2),
            (23, Coverage::Case1),
            (24, Coverage::NotCovered),
            (25, Coverage::Square),
        ];
        for (r, c) in expect {
            assert_eq!(theorem_covers(r).unwrap(), c, "r = {r}");
        }
        assert_eq!(theorem_covers(5).unwrap(), Coverage::NotCovered);
    }

    #[test]
    fn case1_integer_form_matches_direct_comparison() {
        for r in 10..2000u64 {
            let p = profile(r).unwrap();
            if p.square || p.alpha.is_multiple_of(2) {
                continue;
            }
            let bound = QuadraticExpr::sqrt(2 * p.k - 1).inverse().unwrap();
            assert_eq!(case1_bound(p.k, p.alpha), p.epsilon > bound, "r = {r}");
        }
    }

    #[test]
    fn epsilon_identity() {
        for r in 10..3000u64 {
            let p = profile(r).unwrap();
            let lhs = p.epsilon.scale(&Rational::from_integer((2 * p.k).into())) + p.epsilon.square();
            assert_eq!(lhs, QuadraticExpr::int(p.alpha), "r = {r}");
        }
    }

    #[test]
    fn corollary_examples() {
        let c = corollary_condition(8, 1, 14).unwrap();
        assert!(c.holds);
        assert_eq!(c.chi, 31.into());
        assert_eq!(c.threshold, rational(3, 1));
        assert!(corollary_condition(0, 0, 14).unwrap().holds);
        let c = corollary_condition(4, 2, 12).unwrap();
        assert!(!c.holds);
        assert_eq!(c.chi, (-21).into());
        assert_eq!(c.adjoint, PicardClass::uniform(7, 3, 12));
        let c = corollary_condition(3, 1, 13).unwrap();
        assert_eq!(c.threshold, rational(5, 2));
    }

    #[test]
    fn nef_target_examples() {
        let t = nef_target(14, 4).unwrap();
        assert_eq!(t.d, 15.into());
        assert_eq!((t.d_squared, t.r_mu_squared, t.previous_squared), (225.into(), 224.into(), 196.into()));
        assert_eq!(nef_target(10, 1).unwrap().d, 4.into());
        assert_eq!(nef_target(12, 2).unwrap().d, 7.into());
        assert!(nef_target(16, 3).is_err());
        assert!(nef_target(14, 0).is_err());
    }

    #[test]
    fn scan_examples() {
        let cov: Vec<_> = scan(10, 16).unwrap().into_iter().map(|p| p.coverage).collect();
        use Coverage::*;
        assert_eq!(cov, [NotCovered, NotCovered, Case1, NotCovered, Case1, NotCovered, Square]);
        assert_eq!(scan(9, 9).unwrap()[0].coverage, Square);
        assert!(scan(12, 11).is_err());
        assert!(scan(1, 11).is_err());
    }

    #[test]
    fn epsilon_decimal_is_truncated() {
        assert_eq!(
            profile(14).unwrap().epsilon_decimal(30),
            "0.741657386773941385583748732316"
        );
    }
}
