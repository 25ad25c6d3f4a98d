//! Exact subset-sum reachability over n-th powers, and the threshold of
//! completeness it pins down.
//!
//! The reach set is one flat bit array: bit `v` means `v` is a sum of
//! distinct n-th powers of the bases folded in so far. Folding in the next
//! power is a shifted OR of the array into itself, processed high-to-low so
//! each power is used at most once.
//!
//! A run of consecutive set bits of length at least `(m+1)^n`, found after
//! folding bases up to `m`, is a stopping certificate: the remaining powers
//! grow by a factor of at most 2 step over step, so the greedy descent
//! carries representability from the run to every larger integer. The
//! threshold is then the largest bit still unset below the run once every
//! power small enough to matter has been folded.

use serde::Serialize;

use crate::{Error, Result};

/// Memory / search limits for a threshold run.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdLimits {
    pub mem_bytes: u64,
    pub base_cap: u64,
}

impl Default for ThresholdLimits {
    fn default() -> Self {
        ThresholdLimits {
            mem_bytes: 1 << 30, // 1 GiB
            base_cap: 1 << 20,
        }
    }
}

impl ThresholdLimits {
    pub fn with_mem_gb(gb: u64) -> Self {
        ThresholdLimits {
            mem_bytes: gb << 30,
            ..Default::default()
        }
    }
}

fn pow_u128(base: u64, n: u32) -> Option<u128> {
    u128::from(base).checked_pow(n)
}

/// Exact bit-indexed reachability over `[0, cap_bits)`.
///
/// Bit 0 (the empty sum) is set as the seed; every bit below `cap_bits` is
/// exact: sums that overflow the cap are clamped away but cannot influence
/// smaller bits.
pub struct ReachSet {
    n: u32,
    m_used: u64,
    sum_powers: u128,
    cap_bits: u64,
    words: Vec<u64>,
}

impl ReachSet {
    pub fn new(n: u32, cap_bits: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ExponentOutOfRange { got: n, min: 2 });
        }
        if cap_bits < 2 {
            return Err(Error::InvalidArgument("capacity must be at least 2 bits".into()));
        }
        let nwords = usize::try_from(cap_bits / 64 + 1)
            .map_err(|_| Error::ResourceLimit("capacity exceeds address space".into()))?;
        let mut words = vec![0u64; nwords];
        words[0] = 1;
        Ok(ReachSet {
            n,
            m_used: 0,
            sum_powers: 0,
            cap_bits,
            words,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m_used(&self) -> u64 {
        self.m_used
    }

    pub fn cap_bits(&self) -> u64 {
        self.cap_bits
    }

    /// Upper end (exclusive) of the region where bits can be set at all:
    /// nothing above the sum of the folded powers is reachable.
    pub fn frontier(&self) -> u64 {
        let limit = self.sum_powers.saturating_add(1);
        u64::try_from(limit.min(u128::from(self.cap_bits))).unwrap()
    }

    /// Power of the next base to fold, if it still fits the cap.
    pub fn next_power(&self) -> Option<u64> {
        let p = pow_u128(self.m_used + 1, self.n)?;
        if p >= u128::from(self.cap_bits) {
            return None;
        }
        Some(u64::try_from(p).unwrap())
    }

    /// Fold `(m_used + 1)^n` into the set. Returns the folded power.
    pub fn fold_next(&mut self) -> Result<u64> {
        let p = self
            .next_power()
            .ok_or_else(|| Error::ResourceLimit("next power exceeds the bit capacity".into()))?;
        self.fold_raw(p);
        self.m_used += 1;
        self.sum_powers += u128::from(p);
        Ok(p)
    }

    pub(crate) fn fold_raw(&mut self, power: u64) {
        #[cfg(feature = "parallel")]
        fold_power_par(&mut self.words, power);
        #[cfg(not(feature = "parallel"))]
        fold_power_seq(&mut self.words, power);
    }

    pub fn contains(&self, v: u64) -> bool {
        assert!(v < self.cap_bits, "query outside the exact region");
        self.words[(v / 64) as usize] >> (v % 64) & 1 == 1
    }

    /// Ascending iterator over unset bit positions in `[1, limit)`.
    fn unset_bits(&self, limit: u64) -> impl Iterator<Item = u64> + '_ {
        let nwords = ((limit + 63) / 64) as usize;
        self.words[..nwords]
            .iter()
            .enumerate()
            .flat_map(move |(wi, w)| {
                let mut inv = !w;
                if wi == 0 {
                    inv &= !1; // bit 0 is the seed, not a value
                }
                std::iter::from_fn(move || {
                    while inv != 0 {
                        let b = inv.trailing_zeros() as u64;
                        inv &= inv - 1;
                        return Some(wi as u64 * 64 + b);
                    }
                    None
                })
            })
            .filter(move |b| *b < limit)
    }

    /// Largest unset bit in `[1, limit]`, scanning downward.
    pub fn largest_unset_at_or_below(&self, limit: u64) -> Option<u64> {
        let mut wi = (limit / 64) as usize;
        loop {
            let mut inv = !self.words[wi];
            if wi == (limit / 64) as usize {
                let top = limit % 64;
                if top < 63 {
                    inv &= (1u64 << (top + 1)) - 1;
                }
            }
            if wi == 0 {
                inv &= !1;
            }
            if inv != 0 {
                let b = 63 - inv.leading_zeros() as u64;
                return Some(wi as u64 * 64 + b);
            }
            if wi == 0 {
                return None;
            }
            wi -= 1;
        }
    }

    /// First unset bit in the inclusive range `[lo, hi]`, word-level.
    fn first_unset_in(&self, lo: u64, hi: u64) -> Option<u64> {
        let mut wi = (lo / 64) as usize;
        let hi_wi = (hi / 64) as usize;
        while wi <= hi_wi {
            let mut inv = !self.words[wi];
            if wi == (lo / 64) as usize {
                inv &= !0u64 << (lo % 64);
            }
            if wi == hi_wi {
                let top = hi % 64;
                if top < 63 {
                    inv &= (1u64 << (top + 1)) - 1;
                }
            }
            if inv != 0 {
                return Some(wi as u64 * 64 + inv.trailing_zeros() as u64);
            }
            wi += 1;
        }
        None
    }

    /// Earliest run of at least `min_len` consecutive set bits: returns
    /// `(start, len)` where bits `start+1 ..= start+len` are all set and
    /// bit `start` is not. Only gaps fully inside the exact region count.
    pub fn scan_for_run(&self, min_len: u64) -> Option<(u64, u64)> {
        let limit = self.frontier().min(self.cap_bits);
        let mut prev = 0u64;
        for u in self.unset_bits(limit).chain(std::iter::once(limit)) {
            let gap = u - prev - 1;
            if gap >= min_len {
                return Some((prev, gap));
            }
            prev = u;
        }
        None
    }
}

/// Build the reach set for bases `1..=m_max` under an explicit bit cap.
pub fn reachable_set(n: u32, m_max: u64, cap_bits: u64) -> Result<ReachSet> {
    if m_max < 1 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let largest = pow_u128(m_max, n)
        .filter(|p| *p < u128::from(cap_bits))
        .ok_or_else(|| {
            Error::InvalidArgument(format!("capacity {cap_bits} below largest power {m_max}^{n}"))
        })?;
    let _ = largest;
    let mut rs = ReachSet::new(n, cap_bits)?;
    for _ in 0..m_max {
        rs.fold_next()?;
    }
    Ok(rs)
}

/// Shifted-OR fold, sequential, high-to-low so the power is used at most
/// once per sum.
pub fn fold_power_seq(words: &mut [u64], power: u64) {
    let s = (power / 64) as usize;
    let o = (power % 64) as u32;
    let len = words.len();
    if s >= len {
        return;
    }
    if o == 0 {
        for i in (s..len).rev() {
            words[i] |= words[i - s];
        }
    } else {
        for i in (s + 1..len).rev() {
            words[i] |= words[i - s] << o | words[i - s - 1] >> (64 - o);
        }
        words[s] |= words[0] << o;
    }
}

/// Parallel fold: the output region is processed in waves of at most `s`
/// words from the top; within a wave every output word reads only words
/// below the wave, so chunks are independent.
#[cfg(feature = "parallel")]
pub fn fold_power_par(words: &mut [u64], power: u64) {
    use rayon::prelude::*;

    const PAR_MIN_WAVE: usize = 1 << 13;
    let s = (power / 64) as usize;
    let o = (power % 64) as u32;
    let len = words.len();
    if s < PAR_MIN_WAVE || len <= s {
        fold_power_seq(words, power);
        return;
    }
    let mut hi = len;
    while hi > s {
        let lo = std::cmp::max(s, hi - s);
        let (src, dst) = words.split_at_mut(lo);
        dst[..hi - lo]
            .par_iter_mut()
            .with_min_len(1 << 10)
            .enumerate()
            .for_each(|(idx, w)| {
                let j = lo + idx - s;
                let mut v = src[j] << o;
                if o > 0 && j > 0 {
                    v |= src[j - 1] >> (64 - o);
                }
                *w |= v;
            });
        hi = lo;
    }
}

/// The stopping certificate for one exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCertificate {
    /// Statements justifying the stopping rule.
    pub lemma: &'static str,
    pub n: u32,
    pub theta: u64,
    /// Base count at which the run was found.
    pub m_star: u64,
    /// Bits `run_start+1 ..= run_start+run_length` were all set using only
    /// bases `<= m_star`.
    pub run_start: u64,
    pub run_length: u64,
    /// Base count at which theta stabilized: `(m_final+1)^n > theta`.
    pub m_final: u64,
}

const INITIAL_CAP_BITS: u64 = 1 << 22;

/// Compute the threshold of completeness for exponent `n`. The bit capacity
/// grows geometrically only when the certificate scan fails; a wrong answer
/// is never reported — if the limits run out first, this errors instead.
pub fn find_threshold(n: u32, limits: &ThresholdLimits) -> Result<(ThresholdCertificate, ReachSet)> {
    if n < 2 {
        return Err(Error::ExponentOutOfRange { got: n, min: 2 });
    }
    let mut cap_bits = INITIAL_CAP_BITS;
    loop {
        if cap_bits / 8 > limits.mem_bytes {
            return Err(Error::CertificateNotFound(format!(
                "no stopping certificate within {} bytes (next capacity would need {} bytes)",
                limits.mem_bytes,
                cap_bits / 8
            )));
        }
        let mut rs = ReachSet::new(n, cap_bits)?;
        let mut found: Option<(u64, u64, u64)> = None;
        while rs.next_power().is_some() && rs.m_used() < limits.base_cap {
            rs.fold_next()?;
            let m = rs.m_used();
            let need = match pow_u128(m + 1, n) {
                Some(p) if p <= u128::from(cap_bits) => u64::try_from(p).unwrap(),
                _ => continue,
            };
            if !ratio_condition_holds(m + 1, n) {
                continue;
            }
            if let Some((start, len)) = rs.scan_for_run(need) {
                found = Some((m, start, len));
                break;
            }
        }
        let Some((m_star, run_start, run_length)) = found else {
            // 1.5x keeps the worst-case overshoot low; n = 6 fits in ~3.2 GB
            // where doubling would land on a full 4 GiB array.
            cap_bits += cap_bits / 2;
            continue;
        };
        // Stabilize theta: bits at or below run_start can still flip while
        // powers no bigger than them remain unfolded.
        let mut theta = rs
            .largest_unset_at_or_below(run_start)
            .expect("2 is never a sum of distinct powers for n >= 2");
        loop {
            match pow_u128(rs.m_used() + 1, n) {
                Some(p) if p <= u128::from(theta) => {
                    rs.fold_next()?;
                    theta = rs
                        .largest_unset_at_or_below(run_start)
                        .expect("2 is never representable");
                }
                _ => break,
            }
        }
        let cert = ThresholdCertificate {
            lemma: "lemma1+lemma2",
            n,
            theta,
            m_star,
            run_start,
            run_length,
            m_final: rs.m_used(),
        };
        check_certificate(&cert, &rs)?;
        return Ok((cert, rs));
    }
}

/// `(j+1)^n <= 2 * j^n`, exact. Checking it at one `j` covers all larger
/// `j`: the ratio decreases in `j`.
pub fn ratio_condition_holds(j: u64, n: u32) -> bool {
    match (pow_u128(j + 1, n), pow_u128(j, n)) {
        (Some(hi), Some(lo)) => hi <= 2 * lo,
        _ => false,
    }
}

/// Replay a certificate against a reach set without re-running the search:
/// run length versus `(m_star+1)^n`, the ratio inequality, every run bit
/// still set, theta unset, nothing unset between theta and the run, and
/// `(m_final+1)^n > theta`.
pub fn check_certificate(cert: &ThresholdCertificate, rs: &ReachSet) -> Result<()> {
    let fail = |msg: String| Err(Error::CheckFailed(msg));
    let s1 = pow_u128(cert.m_star + 1, cert.n).unwrap();
    if u128::from(cert.run_length) < s1 {
        return fail(format!("run length {} below (m_star+1)^n = {s1}", cert.run_length));
    }
    if !ratio_condition_holds(cert.m_star + 1, cert.n) {
        return fail("adjacent-ratio condition fails at m_star + 1".into());
    }
    if cert.theta > cert.run_start {
        return fail("theta must not exceed the run start".into());
    }
    if rs.contains(cert.theta) {
        return fail(format!("theta = {} is marked reachable", cert.theta));
    }
    // Everything in (theta, run_start + run_length] must be set, except
    // possibly the run start itself (it may or may not have flipped since).
    let run_end = (cert.run_start + cert.run_length).min(rs.cap_bits() - 1);
    if let Some(u) = rs.first_unset_in(cert.theta + 1, run_end) {
        if u != cert.run_start {
            return fail(format!("bit {u} between theta and run end is unset"));
        }
        if u < run_end {
            if let Some(u2) = rs.first_unset_in(u + 1, run_end) {
                return fail(format!("bit {u2} between theta and run end is unset"));
            }
        }
    }
    match pow_u128(cert.m_final + 1, cert.n) {
        Some(p) if p > u128::from(cert.theta) => Ok(()),
        _ => fail("(m_final+1)^n does not exceed theta; theta not stabilized".into()),
    }
}

/// All integers in `[1, up_to]` with no distinct-power representation.
/// The last element equals theta whenever `up_to` reaches it.
pub fn nonrepresentable_list(n: u32, up_to: u64, limits: &ThresholdLimits) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::ExponentOutOfRange { got: n, min: 2 });
    }
    let cap_bits = up_to + 2;
    if cap_bits / 8 > limits.mem_bytes {
        return Err(Error::ResourceLimit(format!(
            "listing up to {up_to} needs {} bytes, limit is {}",
            cap_bits / 8,
            limits.mem_bytes
        )));
    }
    let mut rs = ReachSet::new(n, cap_bits)?;
    while rs.next_power().is_some() {
        rs.fold_next()?;
    }
    Ok(rs.unset_bits(up_to + 1).collect())
}
