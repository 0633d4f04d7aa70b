//! Concrete adversaries: quantum period finding against the period-hiding MAC,
//! measurement-based and classical templates, and the double-spending experiment.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::games::{slice_branches, Adversary, Blinding, GameError, OracleHandle, SupportMask};
use crate::mac::{AffineKey, CounterexampleKey, CounterexampleMac, MacKey};
use crate::qsim::{low_mask, sample_index, Projector, QState, RegisterLayout};

/// Tag emitted when the adversary has nothing to submit; never verifies.
pub const NO_TAG: u64 = u64::MAX;

/// Floor applied to per-sample likelihoods before taking logs.
const LIKELIHOOD_FLOOR: f64 = 1e-300;

/// How QFT samples are turned into period candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recovery {
    /// Rank every candidate by the exact outcome likelihood.
    Likelihood,
    /// Continued-fraction denominators that at least `agreement` samples share.
    ContinuedFraction { agreement: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeriodAttackConfig {
    /// Quantum samples, one query each.
    pub samples: usize,
    /// Top candidates checked with classical queries.
    pub confirm: usize,
    pub recovery: Recovery,
}

impl PeriodAttackConfig {
    /// Default sample budget of `5n`.
    pub fn for_bits(n: usize) -> Self {
        Self { samples: 5 * n, confirm: 4, recovery: Recovery::Likelihood }
    }

    /// Total oracle calls: the samples, one reference query and the confirmations.
    pub fn query_budget(&self) -> usize {
        self.samples + 1 + self.confirm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodRecovery {
    pub period: u64,
    pub outcomes: Vec<u64>,
    pub candidates: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodAttackReport {
    pub true_period: u64,
    pub recovered: Option<u64>,
    pub samples: usize,
    pub outcomes: Vec<u64>,
    pub success: bool,
    pub forgery: (u64, u64),
    pub forgery_verifies: bool,
}

/// `sin^2(pi L theta) / sin^2(pi theta)`, the squared Dirichlet kernel.
fn dirichlet(len: u64, theta: f64) -> f64 {
    let den = (PI * theta).sin().powi(2);
    if den < 1e-24 {
        (len * len) as f64
    } else {
        (PI * len as f64 * theta).sin().powi(2) / den
    }
}

/// Log-likelihood of QFT outcomes `ys` on `n` qubits if the period were `p`.
pub fn period_log_likelihood(ys: &[u64], n: usize, p: u64) -> f64 {
    let big_n = 1u64 << n;
    let (q, s) = (big_n / p, big_n % p);
    let norm = (big_n as f64).powi(2);
    ys.iter()
        .map(|&y| {
            let theta = ((y as u128 * p as u128) % big_n as u128) as f64 / big_n as f64;
            let pr = (s as f64 * dirichlet(q + 1, theta) + (p - s) as f64 * dirichlet(q, theta)) / norm;
            pr.max(LIKELIHOOD_FLOOR).ln()
        })
        .sum()
}

/// Candidates in `1..2^n` ordered by decreasing likelihood, ties toward smaller values.
pub fn rank_periods(ys: &[u64], n: usize) -> Vec<u64> {
    let mut scored: Vec<(f64, u64)> = (1..1u64 << n).map(|p| (period_log_likelihood(ys, n, p), p)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, p)| p).collect()
}

/// Denominator of the last convergent of `y / 2^n` not exceeding `max_den`.
pub fn cf_denominator(y: u64, n: usize, max_den: u64) -> u64 {
    let (mut num, mut den) = (y as u128, 1u128 << n);
    let (mut q_prev, mut q_cur) = (0u128, 1u128);
    while num != 0 {
        let a = den / num;
        (den, num) = (num, den % num);
        let q_next = a * q_cur + q_prev;
        if q_next > max_den as u128 {
            break;
        }
        (q_prev, q_cur) = (q_cur, q_next);
    }
    q_cur as u64
}

/// Denominators shared by at least `agreement` samples, most frequent first, ties toward smaller.
pub fn cf_candidates(ys: &[u64], n: usize, agreement: usize) -> Vec<u64> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &y in ys {
        *counts.entry(cf_denominator(y, n, low_mask(n))).or_default() += 1;
    }
    let mut c: Vec<(usize, u64)> = counts.into_iter().filter(|&(_, k)| k >= agreement).map(|(d, k)| (k, d)).collect();
    c.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    c.into_iter().map(|(_, d)| d).collect()
}

/// One quantum sample: uniform superposition over prefix-1 messages, a query whose
/// periodic half is measured at once, then a QFT of the low message bits.
pub fn period_sample(oracle: &mut OracleHandle<'_>, n: usize, rng: &mut dyn RngCore) -> Result<u64, GameError> {
    let layout = RegisterLayout::new([("Xp", 1), ("Xl", n)])?;
    let mut state = QState::from_values(layout, &[("Xp", 1)])?;
    state.apply_hadamard("Xl")?;
    oracle.query_slice_measured(&mut state, &["Xp", "Xl"], n + 1, n, rng)?;
    state.apply_qft("Xl")?;
    Ok(state.measure("Xl", rng)?)
}

fn upper_half(oracle: &mut OracleHandle<'_>, n: usize, x: u64) -> Result<Option<u64>, GameError> {
    Ok(oracle.classical(1 << n | x)?.map(|t| t >> n))
}

/// Collects samples, ranks candidates and confirms the top ones classically by
/// comparing the periodic tag half at `1||p` and `1||0`. Returns the smallest
/// confirmed candidate.
pub fn recover_period(
    oracle: &mut OracleHandle<'_>,
    n: usize,
    cfg: &PeriodAttackConfig,
    rng: &mut dyn RngCore,
) -> Result<PeriodRecovery, GameError> {
    let outcomes = (0..cfg.samples).map(|_| period_sample(oracle, n, rng)).collect::<Result<Vec<_>, _>>()?;
    let ranked = match cfg.recovery {
        Recovery::Likelihood => rank_periods(&outcomes, n),
        Recovery::ContinuedFraction { agreement } => cf_candidates(&outcomes, n, agreement),
    };
    let candidates: Vec<u64> = ranked.into_iter().filter(|&p| p > 0).take(cfg.confirm).collect();
    let none = GameError::NoConsistentPeriod { samples: cfg.samples };
    if candidates.is_empty() {
        return Err(none);
    }
    let Some(base) = upper_half(oracle, n, 0)? else { return Err(none) };
    let mut confirmed = Vec::new();
    for &p in &candidates {
        if upper_half(oracle, n, p)? == Some(base) {
            confirmed.push(p);
        }
    }
    match confirmed.into_iter().min() {
        Some(period) => Ok(PeriodRecovery { period, outcomes, candidates }),
        None => Err(none),
    }
}

/// The forgery `(0 || p, 0^{2n})`.
pub fn forge_from_period(period: u64) -> (u64, u64) {
    (period, 0)
}

/// Runs the attack once against a fresh key with an unblinded oracle.
pub fn run_period_attack(
    scheme: &CounterexampleMac,
    cfg: &PeriodAttackConfig,
    rng: &mut dyn RngCore,
) -> Result<PeriodAttackReport, GameError> {
    let key = scheme.keygen_concrete(rng);
    attack_key(&key, cfg, rng)
}

/// Runs the attack against a given key.
pub fn attack_key(
    key: &CounterexampleKey,
    cfg: &PeriodAttackConfig,
    rng: &mut dyn RngCore,
) -> Result<PeriodAttackReport, GameError> {
    let n = key.n();
    let mut oracle = OracleHandle::new(key, n + 1, 2 * n, Blinding::None, cfg.query_budget())
        .with_support(Some(prefix_one(n)));
    let (recovered, outcomes) = match recover_period(&mut oracle, n, cfg, rng) {
        Ok(r) => (Some(r.period), r.outcomes),
        Err(GameError::NoConsistentPeriod { .. }) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    let forgery = forge_from_period(recovered.unwrap_or(0));
    Ok(PeriodAttackReport {
        true_period: key.period(),
        recovered,
        samples: cfg.samples,
        outcomes,
        success: recovered == Some(key.period()),
        forgery,
        forgery_verifies: key.verify(forgery.0, forgery.1),
    })
}

/// Messages with leading bit 1 on an `n+1`-bit space.
pub fn prefix_one(n: usize) -> SupportMask {
    SupportMask::new("prefix-1", move |m| m >> n == 1)
}

/// The period-finding forger as a game adversary. Falls back to `(0||0, 0)`
/// when no candidate is confirmed.
#[derive(Debug, Clone, Copy)]
pub struct PeriodAdversary {
    pub n: usize,
    pub cfg: PeriodAttackConfig,
}

impl Adversary for PeriodAdversary {
    fn name(&self) -> String {
        format!("period-finding(S={}, K={})", self.cfg.samples, self.cfg.confirm)
    }
    fn query_budget(&self) -> usize {
        self.cfg.query_budget()
    }
    fn support(&self) -> Option<SupportMask> {
        Some(prefix_one(self.n))
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        match recover_period(oracle, self.n, &self.cfg, rng) {
            Ok(r) => Ok(vec![forge_from_period(r.period)]),
            Err(GameError::NoConsistentPeriod { .. }) => Ok(vec![forge_from_period(0)]),
            Err(e) => Err(e),
        }
    }
}

fn sample_layout(n: usize) -> Result<RegisterLayout, GameError> {
    Ok(RegisterLayout::new([("Xp", 1), ("Xl", n), ("Y1", n)])?)
}

/// QFT outcome distribution when the periodic half stays coherent in `Y1`.
pub fn coherent_outcome_distribution(key: &CounterexampleKey) -> Result<Vec<f64>, GameError> {
    let n = key.n();
    let mut oracle = OracleHandle::new(key, n + 1, 2 * n, Blinding::None, 1);
    let mut state = QState::from_values(sample_layout(n)?, &[("Xp", 1)])?;
    state.apply_hadamard("Xl")?;
    oracle.query_slice(&mut state, &["Xp", "Xl"], "Y1", n + 1, n)?;
    state.apply_qft("Xl")?;
    Ok(state.probabilities(&["Xl"])?)
}

/// The same distribution with the periodic half measured before the QFT.
pub fn semiclassical_outcome_distribution(key: &CounterexampleKey) -> Result<Vec<f64>, GameError> {
    let n = key.n();
    let layout = RegisterLayout::new([("Xp", 1), ("Xl", n)])?;
    let mut state = QState::from_values(layout, &[("Xp", 1)])?;
    state.apply_hadamard("Xl")?;
    let mut dist = vec![0.0; 1 << n];
    for (_, mut branch) in slice_branches(&state, &["Xp", "Xl"], |m| key.periodic(m & low_mask(n)))? {
        let w = branch.normalize().powi(2);
        branch.apply_qft("Xl")?;
        for (d, p) in dist.iter_mut().zip(branch.probabilities(&["Xl"])?) {
            *d += w * p;
        }
    }
    Ok(dist)
}

fn uniform_over(layout: RegisterLayout, reg: &str, allowed: &[u64]) -> Result<QState, GameError> {
    let r = layout.register(reg)?.clone();
    let amp = Complex64::new(1.0 / (allowed.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for &x in allowed {
        amps[r.set(0, x)] = amp;
    }
    Ok(QState::from_amplitudes(layout, amps)?)
}

fn fresh_message(bits: usize, used: &HashSet<u64>, rng: &mut dyn RngCore) -> u64 {
    loop {
        let m = rng.random_range(0..=low_mask(bits));
        if used.len() as u64 > low_mask(bits) || !used.contains(&m) {
            return m;
        }
    }
}

fn guess(oracle: &OracleHandle<'_>, used: &HashSet<u64>, rng: &mut dyn RngCore) -> (u64, u64) {
    let m = fresh_message(oracle.message_bits(), used, rng);
    (m, rng.random_range(0..=low_mask(oracle.tag_bits())))
}

/// Outputs a uniform message with a uniform tag without querying.
#[derive(Debug, Clone, Copy)]
pub struct BlindGuess;

impl Adversary for BlindGuess {
    fn name(&self) -> String {
        "blind-guess".into()
    }
    fn query_budget(&self) -> usize {
        0
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        Ok(vec![guess(oracle, &HashSet::new(), rng)])
    }
}

/// Queries `q` distinct random messages classically, then replays the observed
/// pairs followed by a guess on a fresh message.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalQueryGuess {
    pub q: usize,
}

impl Adversary for ClassicalQueryGuess {
    fn name(&self) -> String {
        format!("classical-query-guess(q={})", self.q)
    }
    fn query_budget(&self) -> usize {
        self.q
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        let mut used = HashSet::new();
        let mut out = Vec::new();
        for _ in 0..self.q {
            let m = fresh_message(oracle.message_bits(), &used, rng);
            used.insert(m);
            if let Some(t) = oracle.classical(m)? {
                out.push((m, t));
            }
        }
        out.push(guess(oracle, &used, rng));
        Ok(out)
    }
}

/// Makes `q` uniform-superposition queries and measures each output state in full,
/// then outputs the observed unblinded pairs followed by a guess on a fresh message.
/// With `distinct` set, each query is spread over inputs not yet observed.
#[derive(Debug, Clone, Copy)]
pub struct MeasureAdversary {
    pub q: usize,
    pub distinct: bool,
}

/// Measures every query outright.
pub fn trivial_measure_adversary(q: usize) -> MeasureAdversary {
    MeasureAdversary { q, distinct: false }
}

/// Measures every query, each over inputs not seen before.
pub fn parallel_measure_adversary(q: usize) -> MeasureAdversary {
    MeasureAdversary { q, distinct: true }
}

impl Adversary for MeasureAdversary {
    fn name(&self) -> String {
        let kind = if self.distinct { "parallel-measure" } else { "trivial-measure" };
        format!("{kind}(q={})", self.q)
    }
    fn query_budget(&self) -> usize {
        self.q
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        let bits = oracle.message_bits();
        let layout = RegisterLayout::new([("X", bits)])?;
        let mut used = HashSet::new();
        let mut out = Vec::new();
        for _ in 0..self.q {
            let allowed: Vec<u64> = (0..=low_mask(bits)).filter(|m| !self.distinct || !used.contains(m)).collect();
            let mut state = uniform_over(layout.clone(), "X", &allowed)?;
            let answer = oracle.query_slice_measured(&mut state, &["X"], 0, oracle.output_bits(), rng)?;
            let m = state.measure("X", rng)?;
            used.insert(m);
            if answer & 1 == 0 {
                out.push((m, answer >> 1));
            }
        }
        out.push(guess(oracle, &used, rng));
        Ok(out)
    }
}

const AFFINE_QUERIES: [u64; 2] = [1, 2];

fn learn_affine(oracle: &mut OracleHandle<'_>) -> Result<Option<AffineKey>, GameError> {
    let mut pairs = Vec::new();
    for m in AFFINE_QUERIES {
        match oracle.classical(m)? {
            Some(t) => pairs.push((m, t)),
            None => return Ok(None),
        }
    }
    Ok(AffineKey::solve(oracle.message_bits(), pairs[0], pairs[1]))
}

/// Learns an affine key from two classical queries and tags a fresh message.
#[derive(Debug, Clone, Copy)]
pub struct AffineForger;

impl Adversary for AffineForger {
    fn name(&self) -> String {
        "affine-forger".into()
    }
    fn query_budget(&self) -> usize {
        2
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        let used: HashSet<u64> = AFFINE_QUERIES.into_iter().collect();
        let m = fresh_message(oracle.message_bits(), &used, rng);
        Ok(vec![match learn_affine(oracle)? {
            Some(k) => (m, k.mac(m)),
            None => (m, NO_TAG),
        }])
    }
}

/// Learns an affine key from two queries and emits `pairs` valid pairs on
/// distinct unqueried messages.
#[derive(Debug, Clone, Copy)]
pub struct AffineHarvester {
    pub pairs: usize,
}

impl Adversary for AffineHarvester {
    fn name(&self) -> String {
        format!("affine-harvester({})", self.pairs)
    }
    fn query_budget(&self) -> usize {
        2
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, _rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        let key = learn_affine(oracle)?;
        let messages = (0..=low_mask(oracle.message_bits())).filter(|m| !AFFINE_QUERIES.contains(m));
        Ok(messages
            .take(self.pairs)
            .map(|m| (m, key.as_ref().map_or(NO_TAG, |k| k.mac(m))))
            .collect())
    }
}

/// Queries a random message and resubmits it with the observed answer.
#[derive(Debug, Clone, Copy)]
pub struct ReplayForger;

impl Adversary for ReplayForger {
    fn name(&self) -> String {
        "replay".into()
    }
    fn query_budget(&self) -> usize {
        1
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        let m = rng.random_range(0..=low_mask(oracle.message_bits()));
        Ok(vec![(m, oracle.classical(m)?.unwrap_or(NO_TAG))])
    }
}

/// Queries `0^n` and flips the last tag bit.
#[derive(Debug, Clone, Copy)]
pub struct NoncanonicalForger;

impl Adversary for NoncanonicalForger {
    fn name(&self) -> String {
        "noncanonical-forger".into()
    }
    fn query_budget(&self) -> usize {
        1
    }
    fn run(&self, oracle: &mut OracleHandle<'_>, _rng: &mut dyn RngCore) -> Result<Vec<(u64, u64)>, GameError> {
        Ok(vec![(0, oracle.classical(0)?.map_or(NO_TAG, |t| t ^ 1))])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DoubleSpendOutcome {
    /// Decoded property (a period estimate), or `None` when the property step was skipped.
    pub property: Option<u64>,
    pub property_correct: bool,
    pub pair: (u64, u64),
    pub pair_valid: bool,
}

impl DoubleSpendOutcome {
    pub fn joint(&self) -> bool {
        self.property_correct && self.pair_valid
    }
}

/// Largest denominator the double-spend decoder accepts on `n` qubits.
pub fn double_spend_max_den(n: usize) -> u64 {
    1 << n.div_ceil(2)
}

/// One coherent period-finding query, a property measurement that only reveals
/// the decoded denominator, then a computational-basis measurement of the
/// surviving state for an input/output pair. The pair is `(1||x, periodic(x))`.
pub fn double_spend(key: &CounterexampleKey, measure_property: bool, rng: &mut dyn RngCore) -> Result<DoubleSpendOutcome, GameError> {
    let n = key.n();
    let mut oracle = OracleHandle::new(key, n + 1, 2 * n, Blinding::None, 1).with_support(Some(prefix_one(n)));
    let mut state = QState::from_values(sample_layout(n)?, &[("Xp", 1)])?;
    state.apply_hadamard("Xl")?;
    oracle.query_slice(&mut state, &["Xp", "Xl"], "Y1", n + 1, n)?;

    let max_den = double_spend_max_den(n);
    let property = if measure_property {
        state.apply_qft("Xl")?;
        let decode = move |y: u64| cf_denominator(y, n, max_den);
        let mut by_class: BTreeMap<u64, f64> = BTreeMap::new();
        for (y, p) in state.probabilities(&["Xl"])?.into_iter().enumerate() {
            *by_class.entry(decode(y as u64)).or_default() += p;
        }
        let classes: Vec<(u64, f64)> = by_class.into_iter().collect();
        let weights: Vec<f64> = classes.iter().map(|c| c.1).collect();
        let class = classes[sample_index(&weights, rng)].0;
        let (mut projected, _) = state.project(&Projector::new(&["Xl"], move |v| decode(v[0]) == class))?;
        projected.normalize();
        state = projected;
        state.apply_inverse_qft("Xl")?;
        Some(class)
    } else {
        None
    };
    let x = state.measure("Xl", rng)?;
    let y = state.measure("Y1", rng)?;
    Ok(DoubleSpendOutcome {
        property,
        property_correct: property == Some(key.period()),
        pair: (1 << n | x, y),
        pair_valid: y == key.periodic(x),
    })
}
