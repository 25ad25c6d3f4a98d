//! The constants `a`, `b`, `r`, `alpha` attached to an exponent `n`, and the
//! exact evaluation of the explicit upper bound built from them.
//!
//! Everything here is arbitrary-precision integer arithmetic. The factor 2/3
//! that appears in `alpha` is handled by asserting divisibility and dividing
//! exactly, never through rationals.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::{big, Error, Result};

/// Default cap on `n` for bound evaluation; the bound for larger `n` is
/// still computable but the final power blows up to millions of bits.
pub const DEFAULT_N_MAX: u32 = 8;

/// The derived constants for one exponent `n >= 2`:
///
/// * `a = n! * 2^(n^2)`
/// * `r = 2^(n^2 - n) * a`
/// * `b = 2^(n^3) * a^(n-1)`
/// * `alpha = (2/3) * (2^(2n) - 1)` (exact: 3 divides `2^(2n) - 1`)
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Params {
    pub n: u32,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub a: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub b: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub r: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub alpha: BigUint,
}

fn factorial(n: u32) -> BigUint {
    (1..=u64::from(n)).fold(BigUint::one(), |acc, k| acc * k)
}

fn pow2(e: u64) -> BigUint {
    BigUint::one() << usize::try_from(e).expect("exponent fits usize")
}

/// Divide exactly by 3, asserting divisibility.
fn div3_exact(v: BigUint) -> BigUint {
    let (q, rem) = num_integer::Integer::div_rem(&v, &big(3));
    assert!(rem.is_zero(), "operand not divisible by 3");
    q
}

/// Derive the constants for exponent `n`. Rejects `n < 2`; the linear case
/// is trivial and the formulas below assume `n >= 2`.
pub fn derive_params(n: u32) -> Result<Params> {
    if n < 2 {
        return Err(Error::ExponentOutOfRange { got: n, min: 2 });
    }
    let n64 = u64::from(n);
    let a = factorial(n) * pow2(n64 * n64);
    let r = pow2(n64 * n64 - n64) * &a;
    let b = pow2(n64 * n64 * n64) * a.pow(n - 1);
    let alpha = div3_exact(big(2) * (pow2(2 * n64) - BigUint::one()));
    let p = Params { n, a, b, r, alpha };
    debug_assert!(p.check_invariants());
    Ok(p)
}

impl Params {
    /// The exact value of the upper bound
    /// `(b-1) * 2^(n-1) * (r + (b-1)*alpha + 2(b-2))^n - 2a + ab`.
    ///
    /// The middle term of the inner base is `(2/3)(b-1)(2^(2n)-1)`, computed
    /// as `(b-1) * alpha` so the whole pipeline stays in integers.
    pub fn theorem_bound(&self) -> BigUint {
        let one = BigUint::one();
        let b1 = &self.b - &one;
        let inner = &self.r + &b1 * &self.alpha + big(2) * (&self.b - big(2));
        b1 * pow2(u64::from(self.n) - 1) * inner.pow(self.n) - big(2) * &self.a
            + &self.a * &self.b
    }

    /// `(2^n + 1)^n < a`; the smallest element of the leftover sequence is
    /// below `a`, which is what makes the greedy descent work.
    pub fn smallest_leftover_below_a(&self) -> bool {
        (pow2(u64::from(self.n)) + BigUint::one()).pow(self.n) < self.a
    }

    fn check_invariants(&self) -> bool {
        let n64 = u64::from(self.n);
        self.r == pow2(n64 * n64 - n64) * &self.a
            && big(3) * &self.alpha == big(2) * (pow2(2 * n64) - BigUint::one())
            && self.smallest_leftover_below_a()
    }
}

/// One row of the bound size report.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub n: u32,
    pub bound_bits: u64,
}

/// Bit lengths of the bound for `n = 2..=n_max`. Diagnostic only: the bound
/// grows too fast for anything beyond its bit length to be worth printing.
pub fn bound_report(n_max: u32) -> Result<Vec<BoundRow>> {
    if n_max < 2 {
        return Err(Error::ExponentOutOfRange { got: n_max, min: 2 });
    }
    if n_max > DEFAULT_N_MAX {
        return Err(Error::ResourceLimit(format!(
            "bound report capped at n = {DEFAULT_N_MAX}, got {n_max}"
        )));
    }
    (2..=n_max)
        .map(|n| {
            let p = derive_params(n)?;
            Ok(BoundRow {
                n,
                bound_bits: p.theorem_bound().bits(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Structurally different evaluation route for the bound, used to check
    /// the main path bit-for-bit: powers by repeated multiplication, the 2/3
    /// factor applied to the full product instead of precomputed alpha.
    fn bound_second_route(n: u32) -> BigUint {
        let n64 = u64::from(n);
        let mut a = BigUint::one();
        for k in 1..=n64 {
            a *= k;
        }
        for _ in 0..n64 * n64 {
            a *= 2u32;
        }
        let mut b = BigUint::one();
        for _ in 0..n - 1 {
            b *= &a;
        }
        for _ in 0..n64 * n64 * n64 {
            b *= 2u32;
        }
        let r = &a * pow2(n64 * n64 - n64);
        let b1 = &b - 1u32;
        let three_inner = big(3) * &r
            + big(2) * &b1 * (pow2(2 * n64) - BigUint::one())
            + big(6) * (&b - 2u32);
        let inner = div3_exact(three_inner);
        let mut pw = BigUint::one();
        for _ in 0..n {
            pw *= &inner;
        }
        b1 * pw * pow2(n64 - 1) + &a * &b - big(2) * a
    }

    #[test]
    fn constants_n2() {
        let p = derive_params(2).unwrap();
        assert_eq!(p.a, big(32));
        assert_eq!(p.r, big(128));
        assert_eq!(p.b, big(8192));
        assert_eq!(p.alpha, big(10));
    }

    #[test]
    fn constants_n3() {
        let p = derive_params(3).unwrap();
        assert_eq!(p.a, big(3072));
        assert_eq!(p.r, big(196608));
        assert_eq!(p.b, big(1266637395197952));
        assert_eq!(p.b, big(9) << 47);
        assert_eq!(p.alpha, big(42));
    }

    #[test]
    fn rejects_small_n() {
        assert!(derive_params(0).is_err());
        assert!(derive_params(1).is_err());
    }

    #[test]
    fn r_over_a_is_power_of_two() {
        for n in 2..=8 {
            let p = derive_params(n).unwrap();
            let n64 = u64::from(n);
            assert_eq!(p.r, &p.a << usize::try_from(n64 * n64 - n64).unwrap());
        }
    }

    #[test]
    fn bound_n2_inner_term() {
        let p = derive_params(2).unwrap();
        let b1 = &p.b - 1u32;
        let inner = &p.r + &b1 * &p.alpha + big(2) * (&p.b - big(2));
        assert_eq!(inner, big(98418));
        assert_eq!(&b1 * &p.alpha, big(81910));
        assert_eq!(big(2) * (&p.b - big(2)), big(16380));
    }

    #[test]
    fn bound_n2_value() {
        // Frozen after confirmation against an independent big-integer
        // evaluation (and the second route below).
        let p = derive_params(2).unwrap();
        assert_eq!(p.theorem_bound(), big(158677735086648));
    }

    #[test]
    fn bound_two_routes_agree() {
        for n in 2..=6 {
            let p = derive_params(n).unwrap();
            assert_eq!(p.theorem_bound(), bound_second_route(n), "n = {n}");
        }
    }

    #[test]
    fn bound_exceeds_known_thresholds() {
        let theta: [(u32, u64); 5] = [
            (2, 128),
            (3, 12758),
            (4, 5134240),
            (5, 67898771),
            (6, 11146309947),
        ];
        for (n, th) in theta {
            let p = derive_params(n).unwrap();
            assert!(p.theorem_bound() > big(th), "n = {n}");
        }
    }

    #[test]
    fn bound_exceeds_largest_construction_element() {
        for n in 2..=6 {
            let p = derive_params(n).unwrap();
            assert!(p.theorem_bound() > p.r.pow(n), "n = {n}");
        }
    }

    #[test]
    fn alpha_divisibility() {
        for n in 1..=16u64 {
            let v = pow2(2 * n) - BigUint::one();
            assert!(num_integer::Integer::is_multiple_of(&v, &big(3)), "n = {n}");
        }
    }

    #[test]
    fn report_rows_monotone() {
        let rows = bound_report(8).unwrap();
        assert_eq!(rows[0].n, 2);
        assert_eq!(rows[0].bound_bits, 48);
        for w in rows.windows(2) {
            assert!(w[1].bound_bits > w[0].bound_bits);
        }
        assert!(bound_report(1).is_err());
        assert!(bound_report(9).is_err());
    }
}
