//! The iterated difference operator `g(x) -> g(4x+2) - g(4x)` applied to
//! `f(x) = x^n`, represented as an explicit signed set of even offsets.
//!
//! Applying the operator `k` times turns `f(2^(2k) x)` into a +/- sum of
//! `2^k` shifted copies; after `n` applications the polynomial collapses to
//! the constant `a = n! * 2^(n^2)`, independent of the evaluation point.
//! Everything downstream (the progression blocks) only needs the offset
//! multiset, so the operator is never represented symbolically.

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::{big, Error, Params, Result};

/// Practical cap on the expansion level; the set has `2^k` offsets.
pub const DEFAULT_LEVEL_CAP: u32 = 16;

/// The expansion of the level-`k` operator: evaluate at `m` as
/// `sum f(m + o) over positives  -  sum f(m + o) over negatives`.
///
/// Offsets are stored sorted descending within each sign; set equality, not
/// order, is the semantic contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedOffsetSet {
    pub level: u32,
    /// `2^(2k)`, the scale factor the offsets live under.
    pub scale: u64,
    pub positives: Vec<u64>,
    pub negatives: Vec<u64>,
}

/// Largest offset at level `k`: `(2/3) * (4^k - 1)`, always an integer.
pub fn alpha_max(k: u32) -> u64 {
    assert!(k >= 1 && k <= 31);
    let v = (1u64 << (2 * k)) - 1;
    debug_assert_eq!(v % 3, 0);
    2 * (v / 3)
}

/// Expand the level-`k` operator. Level 1 is `+{2} -{0}`; each further
/// level maps a signed offset `o` to `(same sign, 4o+2)` and
/// `(flipped sign, 4o)`.
pub fn expand_delta(k: u32) -> Result<SignedOffsetSet> {
    if k < 1 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    if k > DEFAULT_LEVEL_CAP {
        return Err(Error::ResourceLimit(format!(
            "expansion level capped at {DEFAULT_LEVEL_CAP}, got {k} (2^k terms)"
        )));
    }
    let mut pos: Vec<u64> = vec![2];
    let mut neg: Vec<u64> = vec![0];
    for _ in 1..k {
        let new_pos: Vec<u64> = pos
            .iter()
            .map(|o| 4 * o + 2)
            .chain(neg.iter().map(|o| 4 * o))
            .collect();
        let new_neg: Vec<u64> = neg
            .iter()
            .map(|o| 4 * o + 2)
            .chain(pos.iter().map(|o| 4 * o))
            .collect();
        pos = new_pos;
        neg = new_neg;
    }
    pos.sort_unstable_by(|x, y| y.cmp(x));
    neg.sort_unstable_by(|x, y| y.cmp(x));
    let set = SignedOffsetSet {
        level: k,
        scale: 1u64 << (2 * k),
        positives: pos,
        negatives: neg,
    };
    debug_assert!(set.check_invariants());
    Ok(set)
}

impl SignedOffsetSet {
    fn check_invariants(&self) -> bool {
        let half = 1usize << (self.level - 1);
        let all: Vec<u64> = self
            .positives
            .iter()
            .chain(self.negatives.iter())
            .copied()
            .collect();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let max = alpha_max(self.level);
        self.positives.len() == half
            && self.negatives.len() == half
            && sorted.len() == all.len()
            && all.iter().all(|o| o % 2 == 0 && *o <= max)
            && self.positives[0] == max
            && {
                let two_smallest = [sorted[0], sorted[1]];
                two_smallest == [0, 2]
            }
    }

    /// Evaluate `sum (m+o)^n` over positives minus the same over negatives.
    pub fn eval(&self, n: u32, m: &BigUint) -> BigInt {
        let term = |offs: &[u64]| -> BigUint {
            offs.iter().map(|o| (m + big(*o)).pow(n)).sum()
        };
        BigInt::from(term(&self.positives)) - BigInt::from(term(&self.negatives))
    }
}

/// The level-`n` evaluation at any anchor `m`: always exactly
/// `a = n! * 2^(n^2)`.
pub fn delta_constant(n: u32, m: &BigUint) -> Result<BigUint> {
    let set = expand_delta(n)?;
    let v = set.eval(n, m);
    let (sign, mag) = v.into_parts();
    if sign == num_bigint::Sign::Minus {
        return Err(Error::CheckFailed(format!(
            "level-{n} evaluation came out negative at m = {m}"
        )));
    }
    Ok(mag)
}

/// Check `delta_constant(n, m) == a` for a batch of anchors.
pub fn verify_delta_constant(p: &Params, anchors: &[BigUint]) -> Result<bool> {
    for m in anchors {
        if delta_constant(p.n, m)? != p.a {
            return Ok(false);
        }
    }
    Ok(true)
}
