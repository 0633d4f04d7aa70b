//! Function families and blinding sets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use thiserror::Error;

use crate::gf2::Gf2w;
use crate::qsim::{low_mask, BitFunction};

/// Largest domain an explicit blinding bitmask may cover.
pub const MAX_EXPLICIT_BITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncError {
    #[error("input {input:#x} does not fit in {bits} bits")]
    WidthMismatch { input: u64, bits: usize },
    #[error("domain of {0} bits is too large for an explicit bitmask")]
    DomainTooLarge(usize),
    #[error("epsilon {0} is outside [0, 1]")]
    BadEpsilon(f64),
    #[error("hash-defined blinding needs a positive epsilon")]
    ZeroEpsilon,
    #[error("hash member of width {field} cannot cover a {domain}-bit domain")]
    FieldTooSmall { field: usize, domain: usize },
    #[error("codomain mismatch: hash outputs {hash} bits, set covers {set} bits")]
    CodomainMismatch { hash: usize, set: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Explicit lookup table `{0,1}^n -> {0,1}^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    n: usize,
    m: usize,
    values: Vec<u64>,
}

impl FunctionTable {
    pub fn new(n: usize, m: usize, values: Vec<u64>) -> Result<Self, FuncError> {
        if values.len() != 1usize << n {
            return Err(FuncError::Invalid(format!("{} values for a {n}-bit domain", values.len())));
        }
        if let Some(&v) = values.iter().find(|&&v| v > low_mask(m)) {
            return Err(FuncError::WidthMismatch { input: v, bits: m });
        }
        Ok(Self { n, m, values })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(u64) -> u64) -> Self {
        let values = (0..1u64 << n).map(|x| f(x) & low_mask(m)).collect();
        Self { n, m, values }
    }

    pub fn random(n: usize, m: usize, rng: &mut dyn RngCore) -> Self {
        let values = (0..1usize << n).map(|_| rng.next_u64() & low_mask(m)).collect();
        Self { n, m, values }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

impl BitFunction for FunctionTable {
    fn input_bits(&self) -> usize {
        self.n
    }
    fn output_bits(&self) -> usize {
        self.m
    }
    fn eval(&self, x: u64) -> u64 {
        self.values[x as usize]
    }
}

/// Uniformly random function sampled point by point on first touch.
///
/// Values come from a counter-based stream keyed by the function's seed, so a
/// point's value does not depend on evaluation order.
#[derive(Debug)]
pub struct LazyFunction {
    n: usize,
    m: usize,
    key: [u8; 32],
    memo: Mutex<HashMap<u64, u64>>,
}

impl LazyFunction {
    pub fn new(n: usize, m: usize, rng: &mut dyn RngCore) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self { n, m, key, memo: Mutex::new(HashMap::new()) }
    }

    fn fresh(&self, x: u64) -> u64 {
        let mut r = ChaCha8Rng::from_seed(self.key);
        r.set_stream(x);
        r.next_u64() & low_mask(self.m)
    }

    pub fn try_eval(&self, x: u64) -> Result<u64, FuncError> {
        if x > low_mask(self.n) {
            return Err(FuncError::WidthMismatch { input: x, bits: self.n });
        }
        let mut memo = self.memo.lock().expect("memo lock poisoned");
        Ok(*memo.entry(x).or_insert_with(|| self.fresh(x)))
    }

    /// Number of points sampled so far.
    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock poisoned").len()
    }

    /// Full table, without touching the memo.
    pub fn materialize(&self) -> FunctionTable {
        FunctionTable::from_fn(self.n, self.m, |x| self.fresh(x))
    }
}

impl BitFunction for LazyFunction {
    fn input_bits(&self) -> usize {
        self.n
    }
    fn output_bits(&self) -> usize {
        self.m
    }
    /// # Panics
    /// If `x` does not fit in the domain; use [`LazyFunction::try_eval`] to handle that case.
    fn eval(&self, x: u64) -> u64 {
        self.try_eval(x).expect("lazy function input out of range")
    }
}

/// Degree-(k-1) polynomials over GF(2^w): an exactly k-wise independent family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KWiseFamily {
    pub k: usize,
    pub w: usize,
}

impl KWiseFamily {
    pub fn new(k: usize, w: usize) -> Result<Self, FuncError> {
        if k == 0 || !(1..=64).contains(&w) {
            return Err(FuncError::Invalid(format!("k={k}, w={w}")));
        }
        Ok(Self { k, w })
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> KWiseMember {
        let field = Gf2w::new(self.w);
        let coeffs = (0..self.k).map(|_| rng.next_u64() & field.mask()).collect();
        KWiseMember { field, coeffs }
    }

    /// Member with explicit coefficients, constant term first.
    pub fn member(&self, coeffs: Vec<u64>) -> Result<KWiseMember, FuncError> {
        let field = Gf2w::new(self.w);
        if coeffs.len() != self.k || coeffs.iter().any(|&c| c > field.mask()) {
            return Err(FuncError::Invalid(format!("coefficients {coeffs:?} for k={}, w={}", self.k, self.w)));
        }
        Ok(KWiseMember { field, coeffs })
    }

    /// Every member, for exhaustive checks. Only sensible when `2^(w k)` is small.
    pub fn members(&self) -> impl Iterator<Item = KWiseMember> + '_ {
        let field = Gf2w::new(self.w);
        let total = 1u128 << (self.w * self.k);
        (0..total).map(move |i| {
            let coeffs = (0..self.k).map(|j| ((i >> (j * self.w)) as u64) & field.mask()).collect();
            KWiseMember { field, coeffs }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KWiseMember {
    field: Gf2w,
    coeffs: Vec<u64>,
}

impl KWiseMember {
    pub fn eval(&self, x: u64) -> u64 {
        self.field.eval_poly(&self.coeffs, x)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn width(&self) -> usize {
        self.field.width()
    }
}

impl BitFunction for KWiseMember {
    fn input_bits(&self) -> usize {
        self.field.width()
    }
    fn output_bits(&self) -> usize {
        self.field.width()
    }
    fn eval(&self, x: u64) -> u64 {
        KWiseMember::eval(self, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlindingMode {
    Explicit,
    Hash,
    Pullback,
}

#[derive(Debug, Clone)]
enum Membership {
    Bits(Arc<Vec<u64>>),
    Hash { member: KWiseMember, threshold: u128 },
}

/// Subset of `{0,1}^bits` used to blind an oracle.
#[derive(Debug, Clone)]
pub struct BlindingSet {
    bits: usize,
    epsilon: f64,
    realized: f64,
    mode: BlindingMode,
    membership: Membership,
}

fn check_eps(eps: f64) -> Result<(), FuncError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(FuncError::BadEpsilon(eps));
    }
    Ok(())
}

/// Fills `words` with independent Bernoulli(`eps`) bits, 64 at a time.
///
/// Each bit compares a lazily drawn uniform binary fraction against the exact
/// binary expansion of `eps`; a lane is settled at its first differing digit.
fn bitsliced_bernoulli(words: &mut [u64], size: u64, eps: f64, rng: &mut dyn RngCore) {
    let mut digits = Vec::new();
    let mut x = eps;
    while x > 0.0 {
        x *= 2.0;
        let d = x >= 1.0;
        if d {
            x -= 1.0;
        }
        digits.push(d);
    }
    for (i, word) in words.iter_mut().enumerate() {
        let lanes = (size - 64 * i as u64).min(64);
        let mut open = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        let mut member = 0u64;
        for &d in &digits {
            let r = rng.next_u64();
            let settled = open & if d { !r } else { r };
            if d {
                member |= settled;
            }
            open &= !settled;
            if open == 0 {
                break;
            }
        }
        *word = member;
    }
}

impl BlindingSet {
    pub fn empty(bits: usize) -> Result<Self, FuncError> {
        Self::from_predicate(bits, |_| false)
    }

    /// Explicit set from a membership predicate.
    pub fn from_predicate(bits: usize, pred: impl Fn(u64) -> bool) -> Result<Self, FuncError> {
        if bits > MAX_EXPLICIT_BITS {
            return Err(FuncError::DomainTooLarge(bits));
        }
        let size = 1usize << bits;
        let mut words = vec![0u64; size.div_ceil(64)];
        let mut count = 0usize;
        for x in 0..size {
            if pred(x as u64) {
                words[x / 64] |= 1 << (x % 64);
                count += 1;
            }
        }
        let frac = count as f64 / size as f64;
        Ok(Self { bits, epsilon: frac, realized: frac, mode: BlindingMode::Explicit, membership: Membership::Bits(Arc::new(words)) })
    }

    /// Each element included independently with probability `eps`.
    pub fn uniform(bits: usize, eps: f64, rng: &mut dyn RngCore) -> Result<Self, FuncError> {
        check_eps(eps)?;
        if bits > MAX_EXPLICIT_BITS {
            return Err(FuncError::DomainTooLarge(bits));
        }
        let size = 1u64 << bits;
        let mut words = vec![0u64; (size as usize).div_ceil(64)];
        if eps >= 1.0 {
            for x in 0..size {
                words[(x / 64) as usize] |= 1 << (x % 64);
            }
        } else if eps >= 1.0 / 64.0 {
            bitsliced_bernoulli(&mut words, size, eps, rng);
        } else if eps > 0.0 {
            // Gaps between members are geometric, so only the members are drawn.
            let gap = Geometric::new(eps).map_err(|e| FuncError::Invalid(e.to_string()))?;
            let mut x = gap.sample(rng);
            while x < size {
                words[(x / 64) as usize] |= 1 << (x % 64);
                x = x.saturating_add(1).saturating_add(gap.sample(rng));
            }
        }
        Ok(Self { bits, epsilon: eps, realized: eps, mode: BlindingMode::Explicit, membership: Membership::Bits(Arc::new(words)) })
    }

    /// Hash-defined set `{x : h(x) < t}` with `h` drawn from a k-wise independent
    /// family of width `max(bits, 32)` and `t = round(2^w / R)`, `R = round(1/eps)`.
    pub fn from_hash(k: usize, eps: f64, bits: usize, rng: &mut dyn RngCore) -> Result<Self, FuncError> {
        check_eps(eps)?;
        if eps == 0.0 {
            return Err(FuncError::ZeroEpsilon);
        }
        let range = (1.0 / eps).round().max(1.0);
        let w = bits.clamp(32, 64);
        let member = KWiseFamily::new(k, w)?.sample(rng);
        Self::from_member(member, range as u64, bits, eps)
    }

    /// Hash-defined set from a given member and range size `R`.
    pub fn from_member(member: KWiseMember, range: u64, bits: usize, eps: f64) -> Result<Self, FuncError> {
        if member.width() < bits {
            return Err(FuncError::FieldTooSmall { field: member.width(), domain: bits });
        }
        if range == 0 {
            return Err(FuncError::ZeroEpsilon);
        }
        let order = 1u128 << member.width();
        let threshold = ((order as f64) / range as f64).round() as u128;
        let threshold = threshold.clamp(0, order);
        let realized = threshold as f64 / order as f64;
        Ok(Self { bits, epsilon: eps, realized, mode: BlindingMode::Hash, membership: Membership::Hash { member, threshold } })
    }

    /// Pullback `{x : h(x) in C}`, materialized over the domain of `h`.
    pub fn pullback(h: &dyn BitFunction, c: &BlindingSet) -> Result<Self, FuncError> {
        if h.output_bits() != c.bits {
            return Err(FuncError::CodomainMismatch { hash: h.output_bits(), set: c.bits });
        }
        let mut s = Self::from_predicate(h.input_bits(), |x| c.chi(h.eval(x)))?;
        s.epsilon = c.epsilon;
        s.realized = c.realized;
        s.mode = BlindingMode::Pullback;
        Ok(s)
    }

    /// Characteristic function.
    #[inline]
    pub fn chi(&self, x: u64) -> bool {
        match &self.membership {
            Membership::Bits(words) => words.get((x / 64) as usize).is_some_and(|w| w >> (x % 64) & 1 == 1),
            Membership::Hash { member, threshold } => (member.eval(x) as u128) < *threshold,
        }
    }

    pub fn domain_bits(&self) -> usize {
        self.bits
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Per-element inclusion probability actually realized by the construction.
    pub fn realized_epsilon(&self) -> f64 {
        self.realized
    }

    pub fn mode(&self) -> BlindingMode {
        self.mode
    }

    /// Number of members, by enumeration.
    pub fn count(&self) -> u64 {
        match &self.membership {
            Membership::Bits(words) => words.iter().map(|w| w.count_ones() as u64).sum(),
            Membership::Hash { .. } => (0..1u64 << self.bits).filter(|&x| self.chi(x)).count() as u64,
        }
    }
}
