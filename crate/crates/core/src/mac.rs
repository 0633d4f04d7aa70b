//! MAC schemes.

use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::func::{KWiseFamily, KWiseMember, LazyFunction};
use crate::gf2::Gf2w;
use crate::qsim::{low_mask, BitFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacError {
    #[error("hash outputs {hash} bits but the inner scheme signs {inner}-bit messages")]
    Incompatible { hash: usize, inner: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// A keyed tag function with its verifier.
pub trait MacKey: Send + Sync {
    fn mac(&self, m: u64) -> u64;

    fn verify(&self, m: u64, t: u64) -> bool {
        self.mac(m) == t
    }
}

pub trait MacScheme: Send + Sync {
    fn name(&self) -> String;
    fn message_bits(&self) -> usize;
    fn tag_bits(&self) -> usize;
    /// Whether `verify(m, t)` accepts exactly `t = mac(m)`.
    fn canonical(&self) -> bool {
        true
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey>;
}

/// Tag function of a key as a [`BitFunction`].
pub struct KeyFunction<'a> {
    pub key: &'a dyn MacKey,
    pub message_bits: usize,
    pub tag_bits: usize,
}

impl BitFunction for KeyFunction<'_> {
    fn input_bits(&self) -> usize {
        self.message_bits
    }
    fn output_bits(&self) -> usize {
        self.tag_bits
    }
    fn eval(&self, x: u64) -> u64 {
        self.key.mac(x)
    }
}

/// Tag is a uniformly random function of the message.
#[derive(Debug, Clone, Copy)]
pub struct RandomMac {
    pub n: usize,
    pub m: usize,
}

struct LazyKey(LazyFunction);

impl MacKey for LazyKey {
    fn mac(&self, m: u64) -> u64 {
        self.0.eval(m)
    }
}

impl MacScheme for RandomMac {
    fn name(&self) -> String {
        format!("random(n={},m={})", self.n, self.m)
    }
    fn message_bits(&self) -> usize {
        self.n
    }
    fn tag_bits(&self) -> usize {
        self.m
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey> {
        Box::new(LazyKey(LazyFunction::new(self.n, self.m, rng)))
    }
}

/// Tag is a member of a (4q+1)-wise independent family, truncated to `m` bits.
#[derive(Debug, Clone, Copy)]
pub struct KWiseMac {
    pub q: usize,
    pub n: usize,
    pub m: usize,
}

impl KWiseMac {
    pub fn family(&self) -> KWiseFamily {
        KWiseFamily { k: 4 * self.q + 1, w: self.n.max(self.m) }
    }
}

struct KWiseKey {
    member: KWiseMember,
    mask: u64,
}

impl MacKey for KWiseKey {
    fn mac(&self, m: u64) -> u64 {
        self.member.eval(m) & self.mask
    }
}

impl MacScheme for KWiseMac {
    fn name(&self) -> String {
        format!("kwise(q={},n={},m={})", self.q, self.n, self.m)
    }
    fn message_bits(&self) -> usize {
        self.n
    }
    fn tag_bits(&self) -> usize {
        self.m
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey> {
        Box::new(KWiseKey { member: self.family().sample(rng), mask: low_mask(self.m) })
    }
}

/// How the hidden period of [`CounterexampleMac`] is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodDistribution {
    /// Uniform over all n-bit strings, including 0 and 1.
    Uniform,
    /// Uniform over odd values in `lo..=hi`.
    Odd { lo: u64, hi: u64 },
    /// Uniform over `lo..=hi`.
    Range { lo: u64, hi: u64 },
}

/// The period-hiding MAC on `n+1`-bit messages with `2n`-bit tags:
///
/// * `0 || p  -> 0^{2n}`
/// * `0 || x  -> 0^n || f(x)` for `x != p`
/// * `1 || x  -> g(x mod p) || f(x)`
///
/// The leading message bit is the most significant bit, `p` is read MSB-first,
/// `x mod 0 = x`, and the upper tag half carries the `g` part.
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleMac {
    pub n: usize,
    pub periods: PeriodDistribution,
}

impl CounterexampleMac {
    pub fn new(n: usize) -> Result<Self, MacError> {
        Self::with_periods(n, PeriodDistribution::Uniform)
    }

    pub fn with_periods(n: usize, periods: PeriodDistribution) -> Result<Self, MacError> {
        if !(2..=20).contains(&n) {
            return Err(MacError::Invalid(format!("n = {n}")));
        }
        match periods {
            PeriodDistribution::Odd { lo, hi } | PeriodDistribution::Range { lo, hi } if lo > hi || hi > low_mask(n) => {
                return Err(MacError::Invalid(format!("period range {lo}..={hi} for n = {n}")));
            }
            PeriodDistribution::Odd { lo, hi } if lo == hi && lo % 2 == 0 => {
                return Err(MacError::Invalid(format!("no odd period in {lo}..={hi}")));
            }
            _ => {}
        }
        Ok(Self { n, periods })
    }

    pub fn sample_period(&self, rng: &mut dyn RngCore) -> u64 {
        use rand::Rng;
        match self.periods {
            PeriodDistribution::Uniform => rng.next_u64() & low_mask(self.n),
            PeriodDistribution::Range { lo, hi } => rng.random_range(lo..=hi),
            PeriodDistribution::Odd { lo, hi } => {
                let (a, b) = ((lo | 1), if hi % 2 == 1 { hi } else { hi - 1 });
                a + 2 * rng.random_range(0..=(b - a) / 2)
            }
        }
    }

    pub fn keygen_concrete(&self, rng: &mut dyn RngCore) -> CounterexampleKey {
        let p = self.sample_period(rng);
        self.key_with_period(p, rng)
    }

    pub fn key_with_period(&self, p: u64, rng: &mut dyn RngCore) -> CounterexampleKey {
        let f = LazyFunction::new(self.n, self.n, rng).materialize();
        let g = LazyFunction::new(self.n, self.n, rng).materialize();
        CounterexampleKey { n: self.n, p: p & low_mask(self.n), f: f.values().to_vec(), g: g.values().to_vec() }
    }
}

#[derive(Debug, Clone)]
pub struct CounterexampleKey {
    n: usize,
    p: u64,
    f: Vec<u64>,
    g: Vec<u64>,
}

impl CounterexampleKey {
    pub fn period(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `x mod p`, with `p = 0` acting as the identity.
    pub fn reduce(&self, x: u64) -> u64 {
        if self.p == 0 {
            x
        } else {
            x % self.p
        }
    }

    /// The periodic part `x -> g(x mod p)`.
    pub fn periodic(&self, x: u64) -> u64 {
        self.g[self.reduce(x) as usize]
    }
}

impl MacKey for CounterexampleKey {
    fn mac(&self, m: u64) -> u64 {
        let x = m & low_mask(self.n);
        if m >> self.n & 1 == 0 {
            if x == self.p {
                0
            } else {
                self.f[x as usize]
            }
        } else {
            self.periodic(x) << self.n | self.f[x as usize]
        }
    }
}

impl MacScheme for CounterexampleMac {
    fn name(&self) -> String {
        format!("counterexample(n={})", self.n)
    }
    fn message_bits(&self) -> usize {
        self.n + 1
    }
    fn tag_bits(&self) -> usize {
        2 * self.n
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey> {
        Box::new(self.keygen_concrete(rng))
    }
}

/// `Mac o h` with verification `Ver(h(m), t)`.
pub struct HashAndMac {
    inner: Arc<dyn MacScheme>,
    hash: Arc<dyn BitFunction>,
}

impl HashAndMac {
    pub fn new(inner: Arc<dyn MacScheme>, hash: Arc<dyn BitFunction>) -> Result<Self, MacError> {
        if hash.output_bits() != inner.message_bits() {
            return Err(MacError::Incompatible { hash: hash.output_bits(), inner: inner.message_bits() });
        }
        Ok(Self { inner, hash })
    }
}

struct HashedKey {
    inner: Box<dyn MacKey>,
    hash: Arc<dyn BitFunction>,
}

impl MacKey for HashedKey {
    fn mac(&self, m: u64) -> u64 {
        self.inner.mac(self.hash.eval(m))
    }
    fn verify(&self, m: u64, t: u64) -> bool {
        self.inner.verify(self.hash.eval(m), t)
    }
}

impl MacScheme for HashAndMac {
    fn name(&self) -> String {
        format!("hash-and-mac({})", self.inner.name())
    }
    fn message_bits(&self) -> usize {
        self.hash.input_bits()
    }
    fn tag_bits(&self) -> usize {
        self.inner.tag_bits()
    }
    fn canonical(&self) -> bool {
        self.inner.canonical()
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey> {
        Box::new(HashedKey { inner: self.inner.keygen(rng), hash: self.hash.clone() })
    }
}

/// Tag `F(m) || 0` whose verifier ignores the final bit.
#[derive(Debug, Clone, Copy)]
pub struct NoncanonicalMac {
    pub n: usize,
}

struct NoncanonicalKey(LazyFunction);

impl MacKey for NoncanonicalKey {
    fn mac(&self, m: u64) -> u64 {
        self.0.eval(m) << 1
    }
    fn verify(&self, m: u64, t: u64) -> bool {
        t >> 1 == self.0.eval(m)
    }
}

impl MacScheme for NoncanonicalMac {
    fn name(&self) -> String {
        format!("noncanonical(n={})", self.n)
    }
    fn message_bits(&self) -> usize {
        self.n
    }
    fn tag_bits(&self) -> usize {
        self.n + 1
    }
    fn canonical(&self) -> bool {
        false
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey> {
        Box::new(NoncanonicalKey(LazyFunction::new(self.n, self.n, rng)))
    }
}

/// Toy scheme `t = a m + b` over GF(2^n); two tags reveal the key.
#[derive(Debug, Clone, Copy)]
pub struct AffineMac {
    pub n: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AffineKey {
    field: Gf2w,
    a: u64,
    b: u64,
}

impl AffineKey {
    /// Recovers `(a, b)` from two distinct message/tag pairs.
    pub fn solve(n: usize, (m1, t1): (u64, u64), (m2, t2): (u64, u64)) -> Option<Self> {
        let field = Gf2w::new(n);
        if m1 == m2 {
            return None;
        }
        let a = field.mul(t1 ^ t2, field.inv(m1 ^ m2));
        let b = t1 ^ field.mul(a, m1);
        Some(Self { field, a, b })
    }
}

impl MacKey for AffineKey {
    fn mac(&self, m: u64) -> u64 {
        self.field.mul(self.a, m) ^ self.b
    }
}

impl MacScheme for AffineMac {
    fn name(&self) -> String {
        format!("affine(n={})", self.n)
    }
    fn message_bits(&self) -> usize {
        self.n
    }
    fn tag_bits(&self) -> usize {
        self.n
    }
    fn keygen(&self, rng: &mut dyn RngCore) -> Box<dyn MacKey> {
        let field = Gf2w::new(self.n);
        Box::new(AffineKey { field, a: rng.next_u64() & field.mask(), b: rng.next_u64() & field.mask() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::FunctionTable;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(s: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(s)
    }

    fn completeness(scheme: &dyn MacScheme, seed: u64) {
        let mut r = rng(seed);
        for _ in 0..100 {
            let key = scheme.keygen(&mut r);
            for _ in 0..100 {
                let m = r.next_u64() & low_mask(scheme.message_bits());
                assert!(key.verify(m, key.mac(m)), "{}", scheme.name());
                assert!(key.mac(m) <= low_mask(scheme.tag_bits()));
            }
        }
    }

    #[test]
    fn all_schemes_complete() {
        completeness(&RandomMac { n: 8, m: 16 }, 1);
        completeness(&KWiseMac { q: 2, n: 8, m: 12 }, 2);
        completeness(&CounterexampleMac::new(6).unwrap(), 3);
        completeness(&NoncanonicalMac { n: 6 }, 4);
        completeness(&AffineMac { n: 8 }, 5);
        let h: Arc<dyn BitFunction> = Arc::new(FunctionTable::from_fn(10, 8, |x| x >> 2));
        completeness(&HashAndMac::new(Arc::new(RandomMac { n: 8, m: 8 }), h).unwrap(), 6);
    }

    #[test]
    fn kwise_mac_exhaustive_completeness() {
        let s = KWiseMac { q: 1, n: 3, m: 3 };
        let mut r = rng(7);
        for _ in 0..50 {
            let k = s.keygen(&mut r);
            assert!((0..8).all(|m| k.verify(m, k.mac(m))));
        }
    }

    #[test]
    fn random_mac_keys_differ() {
        let s = RandomMac { n: 8, m: 16 };
        let mut r = rng(8);
        let (a, b) = (s.keygen(&mut r), s.keygen(&mut r));
        let agree = (0..256).filter(|&m| a.mac(m) == b.mac(m)).count();
        assert!(agree < 4);
    }

    #[test]
    fn counterexample_cases() {
        let s = CounterexampleMac::new(4).unwrap();
        let mut r = rng(9);
        for p in 0..16u64 {
            let k = s.key_with_period(p, &mut r);
            assert_eq!(k.mac(p), 0);
            for x in 0..16u64 {
                if x != p {
                    assert_eq!(k.mac(x) >> 4, 0);
                    assert_eq!(k.mac(16 | x) & 15, k.mac(x));
                }
                for y in 0..16u64 {
                    let same = if p == 0 { x == y } else { x % p == y % p };
                    if same {
                        assert_eq!(k.mac(16 | x) >> 4, k.mac(16 | y) >> 4);
                    }
                }
            }
            if p == 1 {
                assert!((0..16).all(|x| k.mac(16 | x) >> 4 == k.mac(16) >> 4));
            }
        }
    }

    #[test]
    fn period_distributions() {
        let mut r = rng(10);
        let s = CounterexampleMac::with_periods(8, PeriodDistribution::Odd { lo: 3, hi: 128 }).unwrap();
        for _ in 0..1000 {
            let p = s.sample_period(&mut r);
            assert!(p % 2 == 1 && (3..=127).contains(&p));
        }
        assert!(CounterexampleMac::with_periods(3, PeriodDistribution::Range { lo: 2, hi: 9 }).is_err());
        assert!(CounterexampleMac::new(1).is_err());
    }

    #[test]
    fn hash_and_mac_properties() {
        let mut r = rng(11);
        let inner: Arc<dyn MacScheme> = Arc::new(RandomMac { n: 8, m: 12 });
        let id: Arc<dyn BitFunction> = Arc::new(FunctionTable::from_fn(8, 8, |x| x));
        let s = HashAndMac::new(inner.clone(), id).unwrap();
        let mut r2 = r.clone();
        let (a, b) = (s.keygen(&mut r), inner.keygen(&mut r2));
        assert!((0..256).all(|m| a.mac(m) == b.mac(m)));
        let h: Arc<dyn BitFunction> = Arc::new(FunctionTable::from_fn(9, 8, |x| x >> 1));
        let s = HashAndMac::new(inner.clone(), h).unwrap();
        let k = s.keygen(&mut r);
        for m in (0..512).step_by(2) {
            assert_eq!(k.mac(m), k.mac(m + 1));
            assert!(k.verify(m + 1, k.mac(m)));
        }
        let bad: Arc<dyn BitFunction> = Arc::new(FunctionTable::from_fn(9, 7, |x| x >> 2));
        assert!(HashAndMac::new(inner, bad).is_err());
    }

    #[test]
    fn noncanonical_tags() {
        let s = NoncanonicalMac { n: 6 };
        assert!(!s.canonical());
        let mut r = rng(12);
        let k = s.keygen(&mut r);
        for m in 0..64 {
            let t = k.mac(m);
            assert_eq!(t & 1, 0);
            assert!(k.verify(m, t) && k.verify(m, t | 1));
            assert!(!k.verify(m, t ^ 2));
        }
    }

    #[test]
    fn affine_key_recovery() {
        let mut r = rng(13);
        for _ in 0..100 {
            let k = AffineMac { n: 8 }.keygen(&mut r);
            let (m1, m2) = (r.random_range(0..256u64), r.random_range(0..256u64));
            match AffineKey::solve(8, (m1, k.mac(m1)), (m2, k.mac(m2))) {
                Some(s) => assert!((0..256).all(|m| s.mac(m) == k.mac(m))),
                None => assert_eq!(m1, m2),
            }
        }
    }
}
