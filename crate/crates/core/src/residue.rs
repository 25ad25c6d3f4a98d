//! A complete residue system modulo `a` made of subset sums of `S`.
//!
//! Working modulo `a`, the elements of `S` reduce to `2^(n^2 - n)` copies of
//! each residue `j^n`, `1 <= j <= 2^n`. A greedy descent over these classes
//! writes any target in `1..=M` as a multiplicity vector, and lifting the
//! multiplicities back to distinct bases `j, a+j, 2a+j, ...` turns each
//! target into an honest subset sum with a certificate.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::progression::{binomial, power_sum};
use crate::{big, Error, Params, Result};

/// Largest `n` for which the full residue system is materialized by
/// default (`a` representatives; `a` is about 1.6e6 at n = 4).
pub const MATERIALIZE_N_CAP: u32 = 4;

/// Largest `n` for the exhaustive reachability cross-check.
pub const DP_N_CAP: u32 = 3;

/// A set of distinct bases together with its claimed power sum.
///
/// Bases are stored in compressed form: `counts[j-1]` copies of residue
/// class `j` lift to bases `j, a+j, ..., (counts[j-1]-1)*a + j`. The
/// expanded base list is available through [`SubsetCertificate::bases`].
#[derive(Debug, Clone, Serialize)]
pub struct SubsetCertificate {
    pub n: u32,
    /// The class target `m` in `1..=a` this certificate was built for.
    pub target: u64,
    pub counts: Vec<u64>,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub value: BigUint,
}

impl SubsetCertificate {
    /// Expand to the actual distinct bases, ascending within each class.
    pub fn bases<'a>(&'a self, p: &'a Params) -> impl Iterator<Item = BigUint> + 'a {
        self.counts.iter().enumerate().flat_map(move |(idx, cnt)| {
            let j = big(idx as u64 + 1);
            (0..*cnt).map(move |i| big(i) * &p.a + &j)
        })
    }

    /// Re-verify `value` by direct summation over the expanded bases.
    pub fn verify_by_summation(&self, p: &Params) -> bool {
        let direct: BigUint = self.bases(p).map(|b| b.pow(self.n)).sum();
        direct == self.value
    }
}

/// `M = 2^(n^2-n) * (1^n + 2^n + ... + (2^n)^n)`: every target in `1..=M`
/// is expressible from the residue classes. Asserts `a <= M`.
pub fn coverage_interval(p: &Params) -> BigUint {
    let cap = big(1) << (p.n as usize * p.n as usize - p.n as usize);
    let two_n = 1u64 << p.n;
    let sum: BigUint = (1..=two_n).map(|j| big(j).pow(p.n)).sum();
    let m = cap * sum;
    assert!(p.a <= m, "coverage interval must reach a");
    m
}

/// Cumulative coverage bound for classes `1..=j`.
fn coverage_prefix(j: u64, p: &Params) -> BigUint {
    let cap = big(1) << (p.n as usize * p.n as usize - p.n as usize);
    let sum: BigUint = (1..=j).map(|i| big(i).pow(p.n)).sum();
    cap * sum
}

/// Greedy descent: write `m` as `sum_j counts[j-1] * j^n` with every count
/// at most `2^(n^2-n)`. Walking classes from `2^n` down, each step takes
/// the largest multiplicity that leaves a remainder of at least 1 inside
/// the coverage interval of the smaller classes.
pub fn represent_residue(m: &BigUint, p: &Params) -> Result<Vec<u64>> {
    let cov = coverage_interval(p);
    if m.is_zero() || *m > cov {
        return Err(Error::InvalidArgument(format!(
            "target {m} outside coverage interval [1, {cov}]"
        )));
    }
    let cap = big(1) << (p.n as usize * p.n as usize - p.n as usize);
    let two_n = 1u64 << p.n;
    let mut counts = vec![0u64; two_n as usize];
    let mut rem = m.clone();
    for j in (2..=two_n).rev() {
        let jn = big(j).pow(p.n);
        let mut take = (&rem / &jn).min(cap.clone());
        if !take.is_zero() && rem == &take * &jn {
            // remainder must stay at least 1
            take -= BigUint::one();
        }
        rem -= &take * &jn;
        counts[j as usize - 1] = (&take).try_into().expect("count fits u64");
        debug_assert!(!rem.is_zero() && rem <= coverage_prefix(j - 1, p));
    }
    if rem > cap {
        return Err(Error::CheckFailed(format!(
            "greedy descent left remainder {rem} above the class-1 capacity"
        )));
    }
    counts[0] = (&rem).try_into().expect("count fits u64");
    Ok(counts)
}

/// Closed-form power sum of the lifted bases for one class:
/// `sum_{i=0}^{cnt-1} (j + i*a)^n`.
fn lifted_class_value(j: u64, cnt: u64, p: &Params) -> BigUint {
    if cnt == 0 {
        return BigUint::from(0u32);
    }
    let jb = big(j);
    let mut total = BigUint::from(0u32);
    for q in 0..=p.n {
        let isum = if q == 0 {
            big(cnt)
        } else {
            power_sum(&big(cnt - 1), q)
        };
        total += binomial(p.n, q) * jb.pow(p.n - q) * p.a.pow(q) * isum;
    }
    total
}

fn certificate_for_target(target: u64, p: &Params) -> Result<SubsetCertificate> {
    let counts = represent_residue(&big(target), p)?;
    let value = counts
        .iter()
        .enumerate()
        .map(|(idx, cnt)| lifted_class_value(idx as u64 + 1, *cnt, p))
        .sum();
    Ok(SubsetCertificate {
        n: p.n,
        target,
        counts,
        value,
    })
}

/// The full residue system: one certificate per residue class mod `a`,
/// sorted ascending by value.
#[derive(Debug, Clone, Serialize)]
pub struct ResidueSystem {
    /// Identifier of the statement this certificate instantiates.
    pub lemma: &'static str,
    pub n: u32,
    pub representatives: Vec<SubsetCertificate>,
}

impl ResidueSystem {
    pub fn k1(&self) -> &BigUint {
        &self.representatives.first().unwrap().value
    }

    pub fn k_max(&self) -> &BigUint {
        &self.representatives.last().unwrap().value
    }
}

/// Build the system: class `c` in `1..=a` gets target `m = c` (the unique
/// representative of the class inside `[1, a]`), which is the smallest
/// choice and keeps the top representative small.
pub fn residue_system(p: &Params) -> Result<ResidueSystem> {
    if p.n > MATERIALIZE_N_CAP {
        return Err(Error::ResourceLimit(format!(
            "residue system materialization capped at n = {MATERIALIZE_N_CAP}"
        )));
    }
    let a: u64 = (&p.a).try_into().expect("a fits u64 below the cap");
    let targets: Vec<u64> = (1..=a).collect();
    #[cfg(feature = "parallel")]
    let mut reps = {
        use rayon::prelude::*;
        targets
            .par_iter()
            .map(|t| certificate_for_target(*t, p))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let mut reps = targets
        .iter()
        .map(|t| certificate_for_target(*t, p))
        .collect::<Result<Vec<_>>>()?;

    reps.sort_by(|x, y| x.value.cmp(&y.value));
    let sys = ResidueSystem {
        lemma: "lemma4",
        n: p.n,
        representatives: reps,
    };
    verify_residue_system(&sys, p)?;
    Ok(sys)
}

/// Structural checks: `a` pairwise incongruent values, `k_1 = 1`, and the
/// top value below `ab - a`.
pub fn verify_residue_system(sys: &ResidueSystem, p: &Params) -> Result<()> {
    let a: u64 = (&p.a).try_into().expect("a fits u64 below the cap");
    if sys.representatives.len() != a as usize {
        return Err(Error::CheckFailed("wrong number of representatives".into()));
    }
    let mut seen = vec![false; a as usize];
    for cert in &sys.representatives {
        let res: u64 = (&cert.value.mod_floor(&p.a)).try_into().unwrap();
        if std::mem::replace(&mut seen[res as usize], true) {
            return Err(Error::CheckFailed(format!(
                "duplicate residue class {res} mod a"
            )));
        }
        let cap = 1u64 << (p.n as usize * p.n as usize - p.n as usize);
        if cert.counts.iter().any(|c| *c > cap) {
            return Err(Error::CheckFailed("class multiplicity exceeds column count".into()));
        }
    }
    if !sys.k1().is_one() {
        return Err(Error::CheckFailed("smallest representative must be 1".into()));
    }
    if *sys.k_max() >= &p.a * &p.b - &p.a {
        return Err(Error::CheckFailed("largest representative must stay below ab - a".into()));
    }
    Ok(())
}

/// Exhaustive cross-check of the coverage claim: bitset reachability over
/// the residue multiset equals exactly the interval `[1, M]`.
pub fn verify_lemma4_dp(p: &Params) -> Result<bool> {
    if p.n > DP_N_CAP {
        return Err(Error::ResourceLimit(format!(
            "exhaustive reachability check capped at n = {DP_N_CAP}"
        )));
    }
    let m: u64 = (&coverage_interval(p)).try_into().unwrap();
    let cap = 1u64 << (p.n * p.n - p.n);
    let nbits = m as usize + 1;
    let mut words = vec![0u64; nbits / 64 + 1];
    words[0] = 1; // empty sum
    for j in 1..=(1u64 << p.n) {
        let pw = j.pow(p.n) as usize;
        for _copy in 0..cap {
            // shifted OR, descending so each copy is used at most once
            for i in (0..words.len()).rev() {
                let (ws, bs) = (pw / 64, pw % 64);
                if i >= ws {
                    let mut v = words[i - ws] << bs;
                    if bs > 0 && i > ws {
                        v |= words[i - ws - 1] >> (64 - bs);
                    }
                    words[i] |= v;
                }
            }
        }
    }
    // reachable set must be {0} followed by exactly [1, M]
    for v in 0..=m {
        let set = words[(v / 64) as usize] >> (v % 64) & 1 == 1;
        if !set {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive_params;

    fn p2() -> Params {
        derive_params(2).unwrap()
    }

    #[test]
    fn coverage_values() {
        assert_eq!(coverage_interval(&p2()), big(120));
        assert_eq!(coverage_interval(&derive_params(3).unwrap()), big(82944));
    }

    #[test]
    fn represent_examples_n2() {
        let p = p2();
        assert_eq!(represent_residue(&big(1), &p).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(represent_residue(&big(120), &p).unwrap(), vec![4, 4, 4, 4]);
        assert_eq!(represent_residue(&big(32), &p).unwrap(), vec![3, 1, 1, 1]);
        assert!(represent_residue(&big(0), &p).is_err());
        assert!(represent_residue(&big(121), &p).is_err());
    }

    #[test]
    fn represent_covers_whole_interval() {
        for n in [2u32, 3] {
            let p = derive_params(n).unwrap();
            let m: u64 = (&coverage_interval(&p)).try_into().unwrap();
            let cap = 1u64 << (n * n - n);
            for target in 1..=m {
                let counts = represent_residue(&big(target), &p).unwrap();
                let total: u64 = counts
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * (i as u64 + 1).pow(n))
                    .sum();
                assert_eq!(total, target);
                assert!(counts.iter().all(|c| *c <= cap));
            }
        }
    }

    #[test]
    fn dp_equals_interval() {
        assert!(verify_lemma4_dp(&p2()).unwrap());
        assert!(verify_lemma4_dp(&derive_params(3).unwrap()).unwrap());
        assert!(verify_lemma4_dp(&derive_params(4).unwrap()).is_err());
    }

    #[test]
    fn lifted_value_matches_direct_summation() {
        for n in [2u32, 3] {
            let p = derive_params(n).unwrap();
            for target in [1u64, 2, 17, 31] {
                let cert = certificate_for_target(target, &p).unwrap();
                assert!(cert.verify_by_summation(&p), "n = {n}, target = {target}");
            }
        }
    }

    #[test]
    fn class_2_example() {
        // target 2 -> two copies of residue 1 -> bases {1, 33}, value 1090
        let p = p2();
        let cert = certificate_for_target(2, &p).unwrap();
        assert_eq!(cert.counts, vec![2, 0, 0, 0]);
        assert_eq!(cert.value, big(1090));
        let bases: Vec<BigUint> = cert.bases(&p).collect();
        assert_eq!(bases, vec![big(1), big(33)]);
    }

    #[test]
    fn system_n2() {
        let p = p2();
        let sys = residue_system(&p).unwrap();
        assert_eq!(sys.representatives.len(), 32);
        assert!(sys.k1().is_one());
        assert_eq!(*sys.k_max(), big(14749));
        for cert in &sys.representatives {
            assert!(cert.verify_by_summation(&p));
            // lifted bases land in B1
            for b in cert.bases(&p) {
                assert_eq!(
                    crate::partition::classify(&b, &p),
                    crate::partition::PartitionClass::B1
                );
            }
        }
        // congruence: value == target mod a
        for cert in &sys.representatives {
            assert_eq!(cert.value.mod_floor(&p.a), big(cert.target % 32));
        }
    }

    #[test]
    fn sum_of_s_below_ab_minus_a() {
        let p = p2();
        let s = crate::partition::sequence_prefix(crate::partition::SeqLabel::S, &p, 16).unwrap();
        let sigma: BigUint = s.elems.iter().map(|(_, v)| v.clone()).sum();
        assert_eq!(sigma, big(61304));
        assert!(sigma < &p.a * &p.b - &p.a);
    }

    #[test]
    fn system_n3() {
        let p = derive_params(3).unwrap();
        let sys = residue_system(&p).unwrap();
        assert_eq!(sys.representatives.len(), 3072);
        assert!(sys.k1().is_one());
        assert_eq!(*sys.k_max(), big(25667910451093));
    }
}
