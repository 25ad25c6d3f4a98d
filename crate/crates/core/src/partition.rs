//! The four-way split of the bases `1, 2, 3, ...` and the derived sequences.
//!
//! Bases below `r` split by their residue `beta` in `1..=a`: class `B1` when
//! `beta <= 2^n`, class `B2` otherwise. Bases from `r` on split by parity of
//! the offset from `r`: even is `B3`, odd is `B4`. Four sequences of n-th
//! powers are read off the classes:
//!
//! * `S`: the `2^(n^2)` powers with base in `B1`
//! * `T`: powers with base in `B3`
//! * `U`: powers with base in `B1 | B3`
//! * `W`: powers with base in `B2 | B4` (everything `U` does not take)
//!
//! `W` is the sequence the greedy descent consumes, so this module also
//! machine-checks the adjacent-ratio facts that make `W` a Sigma(a)-sequence.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::{big, Error, Params, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartitionClass {
    B1,
    B2,
    B3,
    B4,
}

/// Classify a base `m >= 1`. Total: every base lands in exactly one class.
pub fn classify(m: &BigUint, p: &Params) -> PartitionClass {
    assert!(!num_traits::Zero::is_zero(m), "bases start at 1");
    if *m < p.r {
        let beta = (m - BigUint::one()).mod_floor(&p.a) + BigUint::one();
        if beta <= big(1) << p.n as usize {
            PartitionClass::B1
        } else {
            PartitionClass::B2
        }
    } else if (m - &p.r).is_even() {
        PartitionClass::B3
    } else {
        PartitionClass::B4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeqLabel {
    S,
    T,
    U,
    W,
}

/// One of the four power sequences, materialized up to some prefix.
#[derive(Debug, Clone, Serialize)]
pub struct PowerSeq {
    pub label: SeqLabel,
    #[serde(serialize_with = "ser_elems")]
    pub elems: Vec<(BigUint, BigUint)>,
}

fn ser_elems<S: serde::Serializer>(v: &[(BigUint, BigUint)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(b, val)| (b.to_str_radix(10), val.to_str_radix(10))))
}

/// Lazy ascending iterator over the bases of one sequence.
///
/// The low range (`< r`) is generated structurally as `alpha * a + beta`
/// with `beta` ranging over the class's residue window, so no scan over all
/// bases is needed; the high range (`>= r`) is an arithmetic progression of
/// step 2 (or step 1 for `U`'s `B3` tail interleaved with nothing).
pub struct BaseIter {
    label: SeqLabel,
    a: BigUint,
    r: BigUint,
    beta_lo: BigUint,
    beta_hi: BigUint,
    // low-range state
    cur_block: BigUint, // alpha * a
    beta: BigUint,
    low_done: bool,
    // high-range state
    next_high: BigUint,
    high_step: BigUint,
}

pub fn bases(label: SeqLabel, p: &Params) -> BaseIter {
    let two_n = big(1) << p.n as usize;
    let (beta_lo, beta_hi) = match label {
        SeqLabel::S | SeqLabel::U => (BigUint::one(), two_n.clone()),
        SeqLabel::W => (&two_n + BigUint::one(), p.a.clone()),
        SeqLabel::T => (BigUint::one(), BigUint::from(0u32)), // empty low range
    };
    let (next_high, high_step) = match label {
        SeqLabel::S => (p.r.clone(), BigUint::from(0u32)), // never used
        SeqLabel::T | SeqLabel::U => (p.r.clone(), big(2)),
        SeqLabel::W => (&p.r + BigUint::one(), big(2)),
    };
    BaseIter {
        label,
        a: p.a.clone(),
        r: p.r.clone(),
        low_done: beta_hi < beta_lo,
        beta: beta_lo.clone(),
        beta_lo,
        beta_hi,
        cur_block: BigUint::from(0u32),
        next_high,
        high_step,
    }
}

impl Iterator for BaseIter {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        if !self.low_done {
            let m = &self.cur_block + &self.beta;
            if m < self.r {
                if self.beta == self.beta_hi {
                    self.beta = self.beta_lo.clone();
                    self.cur_block += &self.a;
                } else {
                    self.beta += BigUint::one();
                }
                return Some(m);
            }
            self.low_done = true;
        }
        if self.label == SeqLabel::S {
            return None;
        }
        let m = self.next_high.clone();
        self.next_high += &self.high_step;
        Some(m)
    }
}

/// First `count` elements of a sequence, in strictly increasing order of
/// value, with exact powers.
pub fn sequence_prefix(label: SeqLabel, p: &Params, count: usize) -> Result<PowerSeq> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if label == SeqLabel::S {
        let s_len = BigUint::one() << (p.n as usize * p.n as usize);
        if big(count as u64) > s_len {
            return Err(Error::InvalidArgument(format!(
                "S has exactly 2^(n^2) = {s_len} elements, asked for {count}"
            )));
        }
    }
    let elems: Vec<(BigUint, BigUint)> = bases(label, p)
        .take(count)
        .map(|b| {
            let v = b.pow(p.n);
            (b, v)
        })
        .collect();
    debug_assert!(elems.windows(2).all(|w| w[0].1 < w[1].1));
    Ok(PowerSeq { label, elems })
}

/// Outcome of a Sigma(k) check: each term must be at most `k` plus the sum
/// of all earlier terms.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaCheck {
    pub is_sigma: bool,
    pub first_violation: Option<usize>,
}

pub fn verify_sigma(seq: &[BigUint], k: &BigUint) -> Result<SigmaCheck> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("sequence must be nonempty".into()));
    }
    if !seq.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "sequence must be strictly increasing".into(),
        ));
    }
    let mut prefix = BigUint::from(0u32);
    for (i, s) in seq.iter().enumerate() {
        if *s > k + &prefix {
            return Ok(SigmaCheck {
                is_sigma: false,
                first_violation: Some(i),
            });
        }
        prefix += s;
    }
    Ok(SigmaCheck {
        is_sigma: true,
        first_violation: None,
    })
}

/// The three adjacent-ratio inequalities bounding consecutive `W` terms,
/// each checked by exact cross-multiplication of integer powers:
///
/// 1. `(r+1)^n * a^n    < (a+2^n+1)^n * (r-1)^n`
/// 2. `(a+2^n+1)^n * (2^n+1)^n < (2^n+2)^n * a^n`
/// 3. `(2^n+2)^n <= 2 * (2^n+1)^n`
#[derive(Debug, Clone, Serialize)]
pub struct Lemma3Certificate {
    /// Identifier of the statement this certificate instantiates.
    pub lemma: &'static str,
    pub n: u32,
    pub passed: bool,
    #[serde(serialize_with = "crate::ser::biguint_vec_dec")]
    pub lhs: Vec<BigUint>,
    #[serde(serialize_with = "crate::ser::biguint_vec_dec")]
    pub rhs: Vec<BigUint>,
}

pub fn verify_lemma3(p: &Params) -> Lemma3Certificate {
    let one = BigUint::one();
    let two_n = big(1) << p.n as usize;
    let mid = &p.a + &two_n + &one; // a + 2^n + 1
    let mid_n = mid.pow(p.n);

    let lhs = vec![
        (&p.r + &one).pow(p.n) * p.a.pow(p.n),
        &mid_n * (&two_n + &one).pow(p.n),
        (&two_n + big(2)).pow(p.n),
    ];
    let rhs = vec![
        &mid_n * (&p.r - &one).pow(p.n),
        (&two_n + big(2)).pow(p.n) * p.a.pow(p.n),
        big(2) * (&two_n + &one).pow(p.n),
    ];
    let passed = lhs[0] < rhs[0] && lhs[1] < rhs[1] && lhs[2] <= rhs[2];
    Lemma3Certificate {
        lemma: "lemma3",
        n: p.n,
        passed,
        lhs,
        rhs,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Corollary1Certificate {
    pub lemma: &'static str,
    pub n: u32,
    pub prefix_len: usize,
    pub passed: bool,
    /// `w_1 = (2^n + 1)^n` and `w_1 < a`.
    pub first_element_ok: bool,
    /// `w_k <= 2 * w_(k-1)` over the whole prefix.
    pub ratio_ok: bool,
    pub sigma: SigmaCheck,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub w1: BigUint,
}

/// Check the Sigma(a) property of `W` on a materialized prefix: the first
/// element is `(2^n+1)^n < a`, adjacent ratios stay at most 2, and the
/// Sigma(a) inequality holds term by term.
pub fn verify_corollary1(p: &Params, prefix_len: usize) -> Result<Corollary1Certificate> {
    if prefix_len < 2 {
        return Err(Error::InvalidArgument("prefix_len must be at least 2".into()));
    }
    let seq = sequence_prefix(SeqLabel::W, p, prefix_len)?;
    let values: Vec<BigUint> = seq.elems.iter().map(|(_, v)| v.clone()).collect();
    let w1 = values[0].clone();
    let expected_w1 = ((big(1) << p.n as usize) + BigUint::one()).pow(p.n);
    let first_element_ok = w1 == expected_w1 && w1 < p.a;
    let ratio_ok = values.windows(2).all(|w| w[1] <= big(2) * &w[0]);
    let sigma = verify_sigma(&values, &p.a)?;
    let passed = first_element_ok && ratio_ok && sigma.is_sigma;
    Ok(Corollary1Certificate {
        lemma: "corollary1",
        n: p.n,
        prefix_len,
        passed,
        first_element_ok,
        ratio_ok,
        sigma,
        w1,
    })
}

/// Default prefix length for the Corollary-1 spot check: long enough to
/// cross the seam at base `r` (so all three ratio-case shapes occur), capped
/// so large `n` stays affordable.
pub fn default_corollary1_prefix(p: &Params) -> usize {
    const CAP: usize = 1_000_000;
    // W bases <= 2r: all of B2 (r - 1 - 2^(n^2) of them) plus the odd
    // bases in (r, 2r].
    let count = &p.r - BigUint::one() - (big(1) << (p.n as usize * p.n as usize)) + (&p.r >> 1);
    let count = usize::try_from(&count).unwrap_or(CAP);
    count.clamp(1000, CAP)
}
