//! The final assembly: a window of `a` consecutive subset sums, and the
//! greedy decomposition of arbitrary large integers it seeds.
//!
//! The residue system supplies `a` subset sums `k_1 < ... < k_a` covering
//! every class mod `a`; the progression supplies `c + j*a` for `1 <= j <= b`.
//! Choosing `n_j` so that `n_j*a + k_j` lands in `(k_a, k_a + a]` makes the
//! combined values exactly `d+1, ..., d+a` with `d = c + k_a`. From there,
//! the greedy descent over the leftover sequence `W` reaches every integer
//! above `d`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::partition::{bases, SeqLabel};
use crate::progression::{block, progression_c, progression_member, SumMode};
use crate::residue::{residue_system, ResidueSystem};
use crate::{big, Error, Params, Result};

/// One member of the window: the combined value `c + n_j*a + k_j`.
#[derive(Debug, Clone, Serialize)]
pub struct WindowEntry {
    /// Target class of the residue certificate supplying `k_j`.
    pub class_target: u64,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub n_j: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub k_j: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub value: BigUint,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowCertificate {
    /// Identifier of the statement this certificate instantiates.
    pub lemma: &'static str,
    pub n: u32,
    /// Progression length used: `t = b`.
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub t: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub c: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub k_a: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub d: BigUint,
    /// Entries in value order: exactly `d+1, ..., d+a`.
    pub entries: Vec<WindowEntry>,
    pub residue: ResidueSystem,
}

/// Build and fully verify the window.
///
/// The progression membership identity `C_(n_j) = c + n_j*a` is re-derived
/// from the closed form for every entry up to n = 3 and for a sample above;
/// for n = 2 the `t - 1` blocks are additionally materialized and summed
/// directly, which re-verifies every combined certificate end to end.
pub fn build_window(p: &Params) -> Result<WindowCertificate> {
    let rs = residue_system(p)?;
    let t = p.b.clone();
    let c = progression_c(&t, p, SumMode::ClosedForm)?;
    let k_a = rs.k_max().clone();
    let d = &c + &k_a;

    let a: u64 = (&p.a).try_into().expect("a fits u64 under the residue cap");
    let mut slots: Vec<Option<WindowEntry>> = vec![None; a as usize];
    for cert in &rs.representatives {
        let k_j = cert.value.clone();
        let n_j = (&k_a - &k_j).div_floor(&p.a) + BigUint::one();
        if n_j < BigUint::one() || n_j >= p.b {
            return Err(Error::CheckFailed(format!(
                "n_j = {n_j} outside [1, b) for class {}",
                cert.target
            )));
        }
        let value = &c + &n_j * &p.a + &k_j;
        // value - d must land in 1..=a, each offset exactly once
        let offset = &value - &d;
        let off: u64 = (&offset)
            .try_into()
            .map_err(|_| Error::CheckFailed("window value too far from d".into()))?;
        if off < 1 || off > a {
            return Err(Error::CheckFailed(format!("window offset {off} outside 1..=a")));
        }
        let slot = &mut slots[off as usize - 1];
        if slot.is_some() {
            return Err(Error::CheckFailed(format!("duplicate window offset {off}")));
        }
        *slot = Some(WindowEntry {
            class_target: cert.target,
            n_j,
            k_j,
            value,
        });
    }
    let entries: Vec<WindowEntry> = slots
        .into_iter()
        .map(|s| s.ok_or_else(|| Error::CheckFailed("window has a hole".into())))
        .collect::<Result<_>>()?;

    let w = WindowCertificate {
        lemma: "lemma7",
        n: p.n,
        t,
        c,
        k_a,
        d,
        entries,
        residue: rs,
    };
    verify_window_membership(&w, p)?;
    Ok(w)
}

/// Verify `C_(n_j) = c + n_j * a` for window entries: every entry up to
/// n = 3, a sample for larger n (the closed form is identical per entry).
fn verify_window_membership(w: &WindowCertificate, p: &Params) -> Result<()> {
    let check_entry = |e: &WindowEntry| -> Result<()> {
        let cj = progression_member(&e.n_j, &w.t, p)?;
        if cj != &w.c + &e.n_j * &p.a {
            return Err(Error::CheckFailed(format!(
                "progression member at n_j = {} does not match c + n_j*a",
                e.n_j
            )));
        }
        Ok(())
    };
    if p.n <= 3 {
        for e in &w.entries {
            check_entry(e)?;
        }
    } else {
        for e in w.entries.iter().step_by((w.entries.len() / 16).max(1)) {
            check_entry(e)?;
        }
    }
    if p.n == 2 {
        verify_window_by_block_summation(w, p)?;
    }
    Ok(())
}

/// n = 2 only: materialize all `t - 1` blocks once, accumulate prefix sums
/// of A- and B-values, and confirm every entry's T-part by direct summation.
fn verify_window_by_block_summation(w: &WindowCertificate, p: &Params) -> Result<()> {
    let t: u64 = (&w.t).try_into().expect("t fits u64 for n = 2");
    let mut prefix_a = vec![BigUint::from(0u32)];
    let mut prefix_b = vec![BigUint::from(0u32)];
    for j in 1..t {
        let blk = block(&big(j), p)?;
        prefix_a.push(prefix_a.last().unwrap() + blk.a_value);
        prefix_b.push(prefix_b.last().unwrap() + blk.b_value);
    }
    let total_b = prefix_b.last().unwrap().clone();
    for e in &w.entries {
        let nj: u64 = (&e.n_j).try_into().unwrap();
        // C_(n_j) = sum of A over blocks < n_j plus sum of B over the rest
        let cj = &prefix_a[nj as usize - 1] + &total_b - &prefix_b[nj as usize - 1];
        if cj != &w.c + &e.n_j * &p.a {
            return Err(Error::CheckFailed(format!(
                "block summation mismatch at n_j = {nj}"
            )));
        }
    }
    Ok(())
}

/// An explicit representation of `x` as a sum of distinct n-th powers.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// Identifier of the statement this certificate instantiates.
    pub theorem: &'static str,
    pub n: u32,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub x: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_vec_dec")]
    pub parts: Vec<BigUint>,
    /// Set only after re-summation confirmed the claim.
    pub verified: bool,
}

/// Decompose `x > d` into distinct n-th powers. Supported for n = 2, where
/// the full base list (thousands of bases near 10^5) is desk scale; for
/// larger n the window alone already needs bases beyond any enumerable
/// range, so other exponents are rejected.
pub fn decompose(x: &BigUint, p: &Params, w: &WindowCertificate) -> Result<Decomposition> {
    if p.n != 2 {
        return Err(Error::ResourceLimit(
            "full decomposition is supported for n = 2 only".into(),
        ));
    }
    if *x <= w.d {
        return Err(Error::InvalidArgument(format!("x must exceed d = {}", w.d)));
    }
    let a: u64 = (&p.a).try_into().unwrap();
    let target = x - &w.d;

    // Enumerate the W prefix until the greedy descent is guaranteed to land
    // in [1, a]: a + sum of enumerated values must reach the target.
    let mut w_bases: Vec<BigUint> = Vec::new();
    let mut w_values: Vec<BigUint> = Vec::new();
    let mut prefix: Vec<BigUint> = vec![BigUint::from(0u32)];
    for base in bases(SeqLabel::W, p) {
        if big(a) + prefix.last().unwrap() >= target {
            break;
        }
        let v = base.pow(p.n);
        prefix.push(prefix.last().unwrap() + &v);
        w_bases.push(base);
        w_values.push(v);
    }

    // Greedy descent: take w_m exactly when the remainder still exceeds
    // a plus everything below it.
    let mut rem = target.clone();
    let mut taken: Vec<usize> = Vec::new();
    for m in (0..w_values.len()).rev() {
        if rem > big(a) + &prefix[m] {
            rem -= &w_values[m];
            taken.push(m);
        }
    }
    let off: u64 = (&rem)
        .try_into()
        .map_err(|_| Error::CheckFailed("greedy descent did not land in [1, a]".into()))?;
    if off < 1 || off > a {
        return Err(Error::CheckFailed(format!(
            "greedy descent finished at {off}, outside [1, a]"
        )));
    }

    // Window entry for d + off supplies the rest.
    let entry = &w.entries[off as usize - 1];
    debug_assert_eq!(entry.value, &w.d + big(off));
    let t: u64 = (&w.t).try_into().unwrap();
    let nj: u64 = (&entry.n_j).try_into().unwrap();
    let mut parts: Vec<BigUint> = Vec::new();
    for j in 1..t {
        let blk = block(&big(j), p)?;
        parts.extend(if j < nj { blk.a_bases } else { blk.b_bases });
    }
    let cert = w
        .residue
        .representatives
        .iter()
        .find(|cand| cand.target == entry.class_target)
        .expect("window entry refers to an existing certificate");
    parts.extend(cert.bases(p));
    parts.extend(taken.into_iter().map(|m| w_bases[m].clone()));

    // Re-verify: distinct parts, exact sum.
    let mut sorted = parts.clone();
    sorted.sort();
    if sorted.windows(2).any(|pair| pair[0] == pair[1]) {
        return Err(Error::CheckFailed("decomposition repeats a base".into()));
    }
    let total: BigUint = parts.iter().map(|b| b.pow(p.n)).sum();
    if total != *x {
        return Err(Error::CheckFailed(format!(
            "decomposition sums to {total}, expected {x}"
        )));
    }
    Ok(Decomposition {
        theorem: "theorem1",
        n: p.n,
        x: x.clone(),
        parts,
        verified: true,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub n: u32,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub d: BigUint,
    #[serde(serialize_with = "crate::ser::biguint_dec")]
    pub bound: BigUint,
    pub d_below_bound: bool,
    pub window_ok: bool,
    pub leftover_sigma_ok: bool,
    pub passed: bool,
}

/// End-to-end check for one exponent: the window exists and verifies, the
/// leftover sequence passes its Sigma(a) prefix check, and `d` stays below
/// the explicit bound.
pub fn verify_theorem(p: &Params) -> Result<TheoremReport> {
    let w = build_window(p)?;
    let bound = p.theorem_bound();
    let d_below_bound = w.d < bound;
    let window_ok = true; // build_window verifies or errors
    let sigma = crate::partition::verify_corollary1(p, 1000)?;
    let leftover_sigma_ok = sigma.passed;
    let passed = d_below_bound && window_ok && leftover_sigma_ok;
    Ok(TheoremReport {
        n: p.n,
        d: w.d,
        bound,
        d_below_bound,
        window_ok,
        leftover_sigma_ok,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive_params;
    use crate::partition::{classify, PartitionClass};
    use rand::{Rng, SeedableRng};

    fn p2() -> Params {
        derive_params(2).unwrap()
    }

    #[test]
    fn window_n2() {
        let p = p2();
        let w = build_window(&p).unwrap();
        assert_eq!(w.c, big(52961995197804));
        assert_eq!(w.k_a, big(14749));
        assert_eq!(w.d, big(52961995212553));
        assert_eq!(w.entries.len(), 32);
        for (i, e) in w.entries.iter().enumerate() {
            assert_eq!(e.value, &w.d + big(i as u64 + 1));
        }
        assert!(w.d < p.theorem_bound());
        // empirical threshold is far below d
        assert!(big(128) < w.d);
        // max n_j stays below b
        let max_nj = w.entries.iter().map(|e| e.n_j.clone()).max().unwrap();
        assert!(max_nj < p.b);
        assert_eq!(max_nj, big(461));
    }

    #[test]
    fn window_covers_all_residues() {
        let p = p2();
        let w = build_window(&p).unwrap();
        let mut seen = [false; 32];
        for e in &w.entries {
            let r: u64 = (&e.value.mod_floor(&p.a)).try_into().unwrap();
            assert!(!std::mem::replace(&mut seen[r as usize], true));
        }
    }

    #[test]
    fn decompose_first_window_value() {
        let p = p2();
        let w = build_window(&p).unwrap();
        let x = &w.d + big(1);
        let dec = decompose(&x, &p, &w).unwrap();
        assert!(dec.verified);
        // t = 1: no W elements needed, so every part is a U base
        for part in &dec.parts {
            assert!(matches!(
                classify(part, &p),
                PartitionClass::B1 | PartitionClass::B3
            ));
        }
    }

    #[test]
    fn decompose_single_greedy_step() {
        let p = p2();
        let w = build_window(&p).unwrap();
        let x = &w.d + big(32 + 25);
        let dec = decompose(&x, &p, &w).unwrap();
        assert!(dec.parts.contains(&big(5))); // w_1 = 25 from base 5
        assert!(dec.verified);
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let p = p2();
        let w = build_window(&p).unwrap();
        assert!(decompose(&w.d, &p, &w).is_err());
        let p3 = derive_params(3).unwrap();
        assert!(decompose(&(big(1) << 80), &p3, &w).is_err());
    }

    #[test]
    fn decompose_random_sample() {
        let p = p2();
        let w = build_window(&p).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
        for _ in 0..10 {
            let x = &w.d + big(rng.gen_range(1..=1_000_000u64));
            let dec = decompose(&x, &p, &w).unwrap();
            assert!(dec.verified);
            // W-side and U-side parts never collide by class
            for part in &dec.parts {
                let _ = classify(part, &p);
            }
        }
    }

    #[test]
    fn theorem_n2() {
        let rep = verify_theorem(&p2()).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.d, big(52961995212553));
    }

    #[test]
    fn theorem_n3() {
        let rep = verify_theorem(&derive_params(3).unwrap()).unwrap();
        assert!(rep.passed);
        // d = c + k_a with c astronomically large; sanity: d below bound
        assert!(rep.d < rep.bound);
    }
}
