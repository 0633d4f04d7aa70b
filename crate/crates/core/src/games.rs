//! Security experiments, Monte Carlo estimation and reductions between games.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::func::{BlindingMode, BlindingSet, FuncError, FunctionTable};
use crate::mac::{MacKey, MacScheme};
use crate::oracle::OracleError;
use crate::qsim::{low_mask, QState, Register, SimError};

/// Largest blinded domain realized as an explicit bitmask inside games.
pub const GAME_EXPLICIT_BITS: usize = 20;
/// Largest amplitude tolerated outside a declared query support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Human-readable description of how per-trial streams are derived.
pub const SEED_RULE: &str = "ChaCha8(seed_from_u64(seed)), stream = trial index";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("query budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("query amplitude {amplitude:e} outside the declared support `{support}`")]
    SupportViolation { support: String, amplitude: f64 },
    #[error("this oracle only answers classical queries")]
    ClassicalOnly,
    #[error("scheme `{0}` has non-canonical verification; use the pair-blinded game")]
    NonCanonical(String),
    #[error("adversary emitted {got} pairs, the game needs {needed}")]
    NotEnoughPairs { needed: usize, got: usize },
    #[error("no period candidate was confirmed after {samples} samples")]
    NoConsistentPeriod { samples: usize },
    #[error("domain of {0} bits is too large for superposition queries")]
    DomainTooLarge(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Invalid(String),
}

/// Which inputs a blinding set is drawn over.
#[derive(Debug, Clone)]
pub enum Blinding {
    None,
    /// Over messages.
    Message(BlindingSet),
    /// Over message-tag pairs, indexed `m << tag_bits | t`.
    Pair(BlindingSet),
}

#[derive(Debug)]
struct LazyBlinding {
    eps: f64,
    rng: ChaCha8Rng,
    decided: HashMap<u64, bool>,
}

/// Predicate on messages that every query must stay inside.
#[derive(Clone)]
pub struct SupportMask {
    label: String,
    pred: Arc<dyn Fn(u64) -> bool + Send + Sync>,
}

impl SupportMask {
    pub fn new(label: impl Into<String>, pred: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        Self { label: label.into(), pred: Arc::new(pred) }
    }

    pub fn contains(&self, m: u64) -> bool {
        (self.pred)(m)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl std::fmt::Debug for SupportMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SupportMask({})", self.label)
    }
}

/// The adversary's view of a (possibly blinded) MAC oracle.
///
/// Answers are `tag << 1 | flag`: the flag is set, with a zero tag, exactly
/// on blinded inputs. Every classical or quantum call counts against the budget.
pub struct OracleHandle<'k> {
    key: &'k dyn MacKey,
    message_bits: usize,
    tag_bits: usize,
    blinding: Blinding,
    lazy: Option<LazyBlinding>,
    budget: usize,
    used: usize,
    classical_only: bool,
    support: Option<SupportMask>,
    table: Option<FunctionTable>,
    answered: Vec<(u64, u64)>,
    max_outside: f64,
}

impl<'k> OracleHandle<'k> {
    pub fn new(key: &'k dyn MacKey, message_bits: usize, tag_bits: usize, blinding: Blinding, budget: usize) -> Self {
        Self {
            key,
            message_bits,
            tag_bits,
            blinding,
            lazy: None,
            budget,
            used: 0,
            classical_only: false,
            support: None,
            table: None,
            answered: Vec::new(),
            max_outside: 0.0,
        }
    }

    pub fn classical_only(mut self) -> Self {
        self.classical_only = true;
        self
    }

    pub fn with_support(mut self, support: Option<SupportMask>) -> Self {
        self.support = support;
        self
    }

    pub fn message_bits(&self) -> usize {
        self.message_bits
    }

    pub fn tag_bits(&self) -> usize {
        self.tag_bits
    }

    /// Width of a quantum answer: the tag plus the blinding flag.
    pub fn output_bits(&self) -> usize {
        self.tag_bits + 1
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn used(&self) -> usize {
        self.used
    }

    /// Classical queries that were answered with a tag.
    pub fn answered(&self) -> &[(u64, u64)] {
        &self.answered
    }

    /// Largest amplitude ever observed outside the declared support.
    pub fn max_outside_amplitude(&self) -> f64 {
        self.max_outside
    }

    /// Blinds classical answers on the fly: each new message is blinded with
    /// probability `eps`, and blinded messages never reach the real oracle.
    pub fn enable_lazy_blinding(&mut self, eps: f64, seed: u64) {
        self.lazy = Some(LazyBlinding { eps, rng: ChaCha8Rng::seed_from_u64(seed), decided: HashMap::new() });
    }

    pub fn disable_lazy_blinding(&mut self) {
        self.lazy = None;
    }

    fn respond(&self, m: u64) -> u64 {
        match &self.blinding {
            Blinding::None => self.key.mac(m) << 1,
            Blinding::Message(b) => {
                if b.chi(m) {
                    1
                } else {
                    self.key.mac(m) << 1
                }
            }
            Blinding::Pair(b) => {
                let t = self.key.mac(m);
                if b.chi(m << self.tag_bits | t) {
                    1
                } else {
                    t << 1
                }
            }
        }
    }

    fn spend(&mut self) -> Result<(), GameError> {
        if self.used >= self.budget {
            return Err(GameError::BudgetExceeded { budget: self.budget });
        }
        self.used += 1;
        Ok(())
    }

    fn check_classical_support(&mut self, m: u64) -> Result<(), GameError> {
        if let Some(s) = &self.support {
            if !s.contains(m) {
                self.max_outside = 1.0;
                return Err(GameError::SupportViolation { support: s.label.clone(), amplitude: 1.0 });
            }
        }
        Ok(())
    }

    /// Classical query. `None` means the answer was the blinding symbol.
    pub fn classical(&mut self, m: u64) -> Result<Option<u64>, GameError> {
        if m > low_mask(self.message_bits) {
            return Err(GameError::Invalid(format!("message {m:#x} exceeds {} bits", self.message_bits)));
        }
        self.check_classical_support(m)?;
        self.spend()?;
        if let Some(lazy) = &mut self.lazy {
            let eps = lazy.eps;
            let blinded = *lazy.decided.entry(m).or_insert_with(|| lazy.rng.random_bool(eps));
            if blinded {
                return Ok(None);
            }
        }
        let r = self.respond(m);
        if r & 1 == 1 {
            return Ok(None);
        }
        self.answered.push((m, r >> 1));
        Ok(Some(r >> 1))
    }

    fn table(&mut self) -> Result<&FunctionTable, GameError> {
        if self.table.is_none() {
            if self.message_bits > GAME_EXPLICIT_BITS {
                return Err(GameError::DomainTooLarge(self.message_bits));
            }
            let t = FunctionTable::from_fn(self.message_bits, self.output_bits(), |m| self.respond(m));
            self.table = Some(t);
        }
        Ok(self.table.as_ref().expect("table built"))
    }

    fn begin_quantum(&mut self, state: &QState, in_regs: &[&str]) -> Result<(), GameError> {
        if self.classical_only {
            return Err(GameError::ClassicalOnly);
        }
        if self.lazy.is_some() {
            return Err(GameError::Invalid("lazy blinding answers classical queries only".into()));
        }
        let regs = state.layout().resolve(in_regs)?;
        let width: usize = regs.iter().map(|r| r.width).sum();
        if width != self.message_bits {
            return Err(SimError::WidthMismatch { expected: self.message_bits, got: width }.into());
        }
        if let Some(s) = &self.support {
            let outside = state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(i, _)| !s.contains(state.layout().value_of(*i, &regs)))
                .map(|(_, a)| a.norm())
                .fold(0.0, f64::max);
            self.max_outside = self.max_outside.max(outside);
            if outside > SUPPORT_TOL {
                return Err(GameError::SupportViolation { support: s.label.clone(), amplitude: outside });
            }
        }
        self.spend()?;
        self.table()?;
        Ok(())
    }

    /// Standard XOR query `|m>|y> -> |m>|y xor answer(m)>`.
    pub fn query(&mut self, state: &mut QState, in_regs: &[&str], out_reg: &str) -> Result<(), GameError> {
        self.begin_quantum(state, in_regs)?;
        let table = self.table.as_ref().expect("table built");
        state.apply_xor_oracle_multi(table, in_regs, out_reg)?;
        Ok(())
    }

    /// XOR query that writes only `width` bits of the answer starting at bit `shift`.
    /// The remaining answer bits act on registers held in the uniform state, which
    /// the query leaves unchanged, so they are not simulated.
    pub fn query_slice(
        &mut self,
        state: &mut QState,
        in_regs: &[&str],
        out_reg: &str,
        shift: usize,
        width: usize,
    ) -> Result<(), GameError> {
        self.begin_quantum(state, in_regs)?;
        let table = self.table.as_ref().expect("table built");
        let sliced = FunctionTable::from_fn(self.message_bits, width, |m| table.values()[m as usize] >> shift);
        state.apply_xor_oracle_multi(&sliced, in_regs, out_reg)?;
        Ok(())
    }

    /// Query into a blank register whose `width`-bit slice at `shift` is measured at once.
    /// Collapses `state` onto the inputs consistent with the outcome, which is returned.
    pub fn query_slice_measured(
        &mut self,
        state: &mut QState,
        in_regs: &[&str],
        shift: usize,
        width: usize,
        rng: &mut dyn RngCore,
    ) -> Result<u64, GameError> {
        self.begin_quantum(state, in_regs)?;
        let table = self.table.as_ref().expect("table built");
        let f = |m: u64| (table.values()[m as usize] >> shift) & low_mask(width);
        let regs: Vec<Register> = state.layout().resolve(in_regs)?.into_iter().cloned().collect();
        let refs: Vec<&Register> = regs.iter().collect();
        let values: Vec<u64> = (0..state.amplitudes().len()).map(|i| f(state.layout().value_of(i, &refs))).collect();
        let mut weights: BTreeMap<u64, f64> = BTreeMap::new();
        for (v, a) in values.iter().zip(state.amplitudes()) {
            *weights.entry(*v).or_default() += a.norm_sqr();
        }
        let w: Vec<f64> = weights.values().copied().collect();
        let v = *weights.keys().nth(crate::qsim::sample_index(&w, rng)).expect("nonempty state");
        let zero = Complex64::new(0.0, 0.0);
        for (a, &u) in state.amplitudes_mut().iter_mut().zip(&values) {
            if u != v {
                *a = zero;
            }
        }
        state.normalize();
        Ok(v)
    }
}

/// Splits `state` by the value of `f` on the concatenated input registers.
/// Each branch keeps its unnormalized amplitudes.
pub fn slice_branches(
    state: &QState,
    in_regs: &[&str],
    f: impl Fn(u64) -> u64,
) -> Result<BTreeMap<u64, QState>, GameError> {
    let regs = state.layout().resolve(in_regs)?;
    let zero = Complex64::new(0.0, 0.0);
    let mut out: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let v = f(state.layout().value_of(i, &regs));
        out.entry(v).or_insert_with(|| vec![zero; state.amplitudes().len()])[i] = *a;
    }
    out.into_iter()
        .map(|(v, amps)| Ok((v, QState::from_amplitudes(state.layout().clone(), amps)?)))
        .collect()
}

/// An adversary in any of the games. It emits candidate (message, tag) pairs;
/// single-forgery games judge the last one.
pub trait Adversary: Send + Sync {
    fn name(&self) -> String;
    fn query_budget(&self) -> usize;
    fn declared_epsilon(&self) -> Option<f64> {
        None
    }
    fn support(&self) -> Option<SupportMask> {
        None
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError>;
}

/// Blinding set for a game over a `bits`-bit domain: an explicit bitmask up to
/// [`GAME_EXPLICIT_BITS`], a (4q+1)-wise independent hash above.
pub fn make_blinding(bits: usize, eps: f64, q: usize, rng: &mut dyn RngCore) -> Result<BlindingSet, GameError> {
    if bits <= GAME_EXPLICIT_BITS {
        Ok(BlindingSet::uniform(bits, eps, rng)?)
    } else {
        Ok(BlindingSet::from_hash(4 * q + 1, eps, bits, rng)?)
    }
}

/// Mode and realized inclusion probability that [`make_blinding`] will use.
pub fn blinding_plan(bits: usize, eps: f64) -> (BlindingMode, f64) {
    if bits <= GAME_EXPLICIT_BITS {
        (BlindingMode::Explicit, eps)
    } else {
        let range = (1.0 / eps).round().max(1.0);
        let w = bits.clamp(32, 64) as i32;
        let order = 2f64.powi(w);
        ((BlindingMode::Hash), (order / range).round() / order)
    }
}

fn run_blinded(
    scheme: &dyn MacScheme,
    adv: &dyn Adversary,
    eps: f64,
    budget: usize,
    pairs: bool,
    rng: &mut dyn RngCore,
) -> Result<bool, GameError> {
    let key = scheme.keygen(rng);
    let (bits, q) = (scheme.message_bits(), adv.query_budget());
    let blinding = if pairs {
        Blinding::Pair(make_blinding(bits + scheme.tag_bits(), eps, q, rng)?)
    } else {
        Blinding::Message(make_blinding(bits, eps, q, rng)?)
    };
    let set = match &blinding {
        Blinding::Message(b) | Blinding::Pair(b) => b.clone(),
        Blinding::None => unreachable!(),
    };
    let mut oracle = OracleHandle::new(key.as_ref(), bits, scheme.tag_bits(), blinding, budget).with_support(adv.support());
    let out = adv.run(&mut oracle, rng)?;
    let Some(&(m, t)) = out.last() else { return Ok(false) };
    if m > low_mask(bits) || t > low_mask(scheme.tag_bits()) {
        return Ok(false);
    }
    let inside = if pairs { set.chi(m << scheme.tag_bits() | t) } else { set.chi(m) };
    Ok(inside && key.verify(m, t))
}

/// Runs the adversary against the plain oracle; wins iff its last pair verifies.
pub fn unblinded_forge(scheme: &dyn MacScheme, adv: &dyn Adversary, rng: &mut dyn RngCore) -> Result<bool, GameError> {
    let key = scheme.keygen(rng);
    let mut oracle =
        OracleHandle::new(key.as_ref(), scheme.message_bits(), scheme.tag_bits(), Blinding::None, adv.query_budget())
            .with_support(adv.support());
    let out = adv.run(&mut oracle, rng)?;
    Ok(out.last().is_some_and(|&(m, t)| m <= low_mask(scheme.message_bits()) && key.verify(m, t)))
}

/// Blind forgery: the oracle is blinded on a random ε-fraction of messages and
/// the adversary wins with a valid pair whose message is blinded.
pub fn blindforge(scheme: &dyn MacScheme, adv: &dyn Adversary, eps: f64, rng: &mut dyn RngCore) -> Result<bool, GameError> {
    if !scheme.canonical() {
        return Err(GameError::NonCanonical(scheme.name()));
    }
    run_blinded(scheme, adv, eps, adv.query_budget(), false, rng)
}

/// [`blindforge`] with a hard cap of `q` oracle calls.
pub fn blindforge_q(
    scheme: &dyn MacScheme,
    adv: &dyn Adversary,
    q: usize,
    eps: f64,
    rng: &mut dyn RngCore,
) -> Result<bool, GameError> {
    if !scheme.canonical() {
        return Err(GameError::NonCanonical(scheme.name()));
    }
    run_blinded(scheme, adv, eps, q, false, rng)
}

/// Blind forgery over message-tag pairs. Membership of the output pair is
/// decided by a single evaluation of the characteristic function after the run.
pub fn strong_blindforge(
    scheme: &dyn MacScheme,
    adv: &dyn Adversary,
    eps: f64,
    rng: &mut dyn RngCore,
) -> Result<bool, GameError> {
    run_blinded(scheme, adv, eps, adv.query_budget(), true, rng)
}

/// The q-query, (q+1)-pair game: win iff the first q+1 pairs are distinct and all verify.
pub fn bz_experiment(scheme: &dyn MacScheme, adv: &dyn Adversary, rng: &mut dyn RngCore) -> Result<bool, GameError> {
    let key = scheme.keygen(rng);
    let q = adv.query_budget();
    let mut oracle = OracleHandle::new(key.as_ref(), scheme.message_bits(), scheme.tag_bits(), Blinding::None, q)
        .with_support(adv.support());
    let out = adv.run(&mut oracle, rng)?;
    if out.len() < q + 1 {
        return Err(GameError::NotEnoughPairs { needed: q + 1, got: out.len() });
    }
    let pairs = &out[..q + 1];
    let distinct: HashSet<_> = pairs.iter().collect();
    Ok(distinct.len() == q + 1 && pairs.iter().all(|&(m, t)| key.verify(m, t)))
}

/// What a classical forgery must avoid having queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Freshness {
    Message,
    Pair,
}

/// Classical existential forgery under chosen-message attack.
pub fn eufcma_experiment(
    scheme: &dyn MacScheme,
    adv: &dyn Adversary,
    freshness: Freshness,
    rng: &mut dyn RngCore,
) -> Result<bool, GameError> {
    let key = scheme.keygen(rng);
    let mut oracle =
        OracleHandle::new(key.as_ref(), scheme.message_bits(), scheme.tag_bits(), Blinding::None, adv.query_budget())
            .classical_only();
    let out = adv.run(&mut oracle, rng)?;
    let Some(&(m, t)) = out.last() else { return Ok(false) };
    let fresh = match freshness {
        Freshness::Message => oracle.answered().iter().all(|&(q, _)| q != m),
        Freshness::Pair => oracle.answered().iter().all(|&p| p != (m, t)),
    };
    Ok(fresh && key.verify(m, t))
}

/// Win rate with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameResult {
    pub wins: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub seed_rule: &'static str,
}

pub const Z95: f64 = 1.96;

/// 95% Wilson score interval.
pub fn wilson(wins: u64, trials: u64) -> (f64, f64) {
    let (n, p) = (trials as f64, wins as f64 / trials as f64);
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if wins == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if wins == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Wilson standard error: the 95% half-width divided by 1.96. Positive even at 0 or n wins.
pub fn wilson_sigma(wins: u64, trials: u64) -> f64 {
    let (n, p) = (trials as f64, wins as f64 / trials as f64);
    let z2 = Z95 * Z95;
    (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

impl GameResult {
    pub fn from_counts(wins: u64, trials: u64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson(wins, trials);
        Self { wins, trials, rate: wins as f64 / trials as f64, ci_lo, ci_hi, seed, seed_rule: SEED_RULE }
    }

    pub fn sigma(&self) -> f64 {
        wilson_sigma(self.wins, self.trials)
    }

    /// `rate <= bound + 3 sigma`.
    pub fn below(&self, bound: f64) -> bool {
        self.rate <= bound + 3.0 * self.sigma()
    }

    /// `rate >= bound - 3 sigma`.
    pub fn above(&self, bound: f64) -> bool {
        self.rate >= bound - 3.0 * self.sigma()
    }

    /// `|rate - target| <= 3 sigma`.
    pub fn near(&self, target: f64) -> bool {
        (self.rate - target).abs() <= 3.0 * self.sigma()
    }
}

/// Stream for trial `index` under master `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Runs `trials` independent trials in parallel. Results do not depend on thread count.
pub fn estimate<F>(trials: u64, seed: u64, game: F) -> Result<GameResult, GameError>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool, GameError> + Sync,
{
    if trials == 0 {
        return Err(GameError::Invalid("at least one trial is needed".into()));
    }
    let wins = (0..trials)
        .into_par_iter()
        .map(|i| game(&mut trial_rng(seed, i)).map(u64::from))
        .collect::<Result<Vec<u64>, _>>()?
        .into_iter()
        .sum();
    Ok(GameResult::from_counts(wins, trials, seed))
}

/// Runs a classical forger unchanged against the blinded oracle, declaring
/// ε = 1/p for a forger that runs within `p` steps.
pub struct ClassicalToBu {
    forger: Arc<dyn Adversary>,
    runtime: usize,
}

pub fn classical_to_bu(forger: Arc<dyn Adversary>, runtime: usize) -> ClassicalToBu {
    ClassicalToBu { forger, runtime }
}

impl ClassicalToBu {
    pub fn epsilon(&self) -> f64 {
        1.0 / self.runtime as f64
    }
}

impl Adversary for ClassicalToBu {
    fn name(&self) -> String {
        format!("bu[{}; p={}]", self.forger.name(), self.runtime)
    }
    fn query_budget(&self) -> usize {
        self.forger.query_budget()
    }
    fn declared_epsilon(&self) -> Option<f64> {
        Some(self.epsilon())
    }
    fn support(&self) -> Option<SupportMask> {
        self.forger.support()
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        self.forger.run(oracle, rng)
    }
}

/// Forger that simulates the blinded oracle for a blind adversary by deciding
/// blinding lazily, one fresh coin per new message.
pub struct BuToEufCma {
    inner: Arc<dyn Adversary>,
    eps: f64,
}

pub fn bu_to_eufcma(inner: Arc<dyn Adversary>, eps: f64) -> BuToEufCma {
    BuToEufCma { inner, eps }
}

impl Adversary for BuToEufCma {
    fn name(&self) -> String {
        format!("euf[{}; eps={}]", self.inner.name(), self.eps)
    }
    fn query_budget(&self) -> usize {
        self.inner.query_budget()
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        oracle.enable_lazy_blinding(self.eps, rng.next_u64());
        let out = self.inner.run(oracle, rng);
        oracle.disable_lazy_blinding();
        out
    }
}

/// Constants of the many-pairs-to-blind-forgery reduction.
pub const BZ_TO_BU_C: usize = 288;
pub const BZ_TO_BU_EPS_DENOM: usize = 144;
pub const BZ_TO_BU_DELTA: f64 = 1.0 / 6.0;

/// Blind forger built from an adversary that emits `c k^2` valid pairs after
/// `k` queries: it outputs one emitted pair chosen uniformly at random.
pub struct BzToBu {
    inner: Arc<dyn Adversary>,
    k: usize,
    c: usize,
}

pub fn bz_to_bu(inner: Arc<dyn Adversary>, k: usize) -> BzToBu {
    BzToBu { inner, k, c: BZ_TO_BU_C }
}

impl BzToBu {
    pub fn epsilon(&self) -> f64 {
        1.0 / (BZ_TO_BU_EPS_DENOM * self.k * self.k) as f64
    }

    pub fn pairs_needed(&self) -> usize {
        self.c * self.k * self.k
    }
}

impl Adversary for BzToBu {
    fn name(&self) -> String {
        format!("bz-to-bu[{}; k={}]", self.inner.name(), self.k)
    }
    fn query_budget(&self) -> usize {
        self.inner.query_budget()
    }
    fn declared_epsilon(&self) -> Option<f64> {
        Some(self.epsilon())
    }
    fn support(&self) -> Option<SupportMask> {
        self.inner.support()
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        let out = self.inner.run(oracle, rng)?;
        let needed = self.pairs_needed();
        if out.len() < needed {
            return Err(GameError::NotEnoughPairs { needed, got: out.len() });
        }
        Ok(vec![out[rng.random_range(0..needed)]])
    }
}
