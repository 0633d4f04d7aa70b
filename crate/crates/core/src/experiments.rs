//! Named, seeded experiments producing self-contained result records.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::attacks::{
    attack_key, double_spend, trivial_measure_adversary, AffineForger, AffineHarvester,
    BlindGuess, ClassicalQueryGuess, NoncanonicalForger, PeriodAdversary, PeriodAttackConfig, ReplayForger,
};
use crate::func::{BlindingMode, FuncError};
use crate::games::{
    blinding_plan, blindforge, blindforge_q, bu_to_eufcma, bz_experiment, bz_to_bu, classical_to_bu, estimate,
    eufcma_experiment, strong_blindforge, trial_rng, unblinded_forge, Adversary, Freshness, GameError, GameResult,
    BZ_TO_BU_DELTA, SEED_RULE,
};
use crate::mac::{AffineMac, CounterexampleMac, KWiseMac, MacError, MacScheme, NoncanonicalMac, PeriodDistribution, RandomMac};
use crate::verify::{
    bphash_classical_check, bz_random_bound_check, commutator_check, compressed_vs_dense_check, hybrid_bound_check,
    kwise_enumeration_check, kwise_vandermonde_check, number_support_check, partial_measure_check, relabel_check,
    sub_seed, BoundReport, BpHash, Direction, HybridParams, VerifyError,
};

pub const EXPERIMENTS: [&str; 15] = [
    "blindforge",
    "blindforge-q",
    "strong-blindforge",
    "bz",
    "eufcma",
    "attack-period",
    "double-spend",
    "verify-hybrid",
    "verify-relabel",
    "verify-partialmeasure",
    "verify-numberop",
    "verify-bz-bound",
    "verify-bphash",
    "verify-compressed",
    "verify-kwise",
];

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}`")]
    Unknown(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Parameters as given on the command line; unset fields take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<usize>,
    pub t: Option<usize>,
    pub eps: Option<f64>,
    pub trials: Option<u64>,
    pub c: Option<usize>,
    pub samples: Option<usize>,
    /// Trials for the game-based checks of experiments whose `trials` counts keys or circuits.
    pub game_trials: Option<u64>,
    pub seed: u64,
}

fn sig12<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*v))
}

fn sig12_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&round12(*x)),
        None => s.serialize_none(),
    }
}

/// Rounds to 12 significant decimal digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// One result line: the resolved configuration and one check's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub wins: Option<u64>,
    pub trials: Option<u64>,
    #[serde(serialize_with = "sig12_opt")]
    pub rate: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub ci_lo: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub ci_hi: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub bound: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub measured: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub margin: Option<f64>,
    pub pass: Option<bool>,
    pub formula: String,
    pub note: String,
    pub blinding_mode: Option<BlindingMode>,
    #[serde(serialize_with = "sig12_opt")]
    pub realized_eps: Option<f64>,
    pub seed_rule: String,
    pub version: String,
    #[serde(serialize_with = "sig12")]
    pub wall_clock_s: f64,
}

impl Record {
    fn base(experiment: &str, check: impl Into<String>, params: &BTreeMap<String, Value>, seed: u64) -> Self {
        Self {
            experiment: experiment.into(),
            check: check.into(),
            params: params.clone(),
            seed,
            wins: None,
            trials: None,
            rate: None,
            ci_lo: None,
            ci_hi: None,
            bound: None,
            measured: None,
            margin: None,
            pass: None,
            formula: String::new(),
            note: String::new(),
            blinding_mode: None,
            realized_eps: None,
            seed_rule: SEED_RULE.into(),
            version: VERSION.into(),
            wall_clock_s: 0.0,
        }
    }

    fn game(mut self, r: &GameResult) -> Self {
        self.wins = Some(r.wins);
        self.trials = Some(r.trials);
        self.rate = Some(r.rate);
        self.ci_lo = Some(r.ci_lo);
        self.ci_hi = Some(r.ci_hi);
        self.measured = Some(r.rate);
        self
    }

    fn bound(mut self, b: &BoundReport) -> Self {
        self.check = b.name.clone();
        self.bound = Some(b.bound);
        self.measured = Some(b.measured);
        self.margin = Some(b.margin);
        self.pass = Some(b.pass);
        self.formula = b.formula.clone();
        self.note = b.note.clone();
        self
    }

    fn blinding(mut self, bits: usize, eps: f64) -> Self {
        let (mode, realized) = blinding_plan(bits, eps);
        self.blinding_mode = Some(mode);
        self.realized_eps = Some(realized);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Same record with the wall-clock field cleared, for reproducibility comparisons.
    pub fn without_clock(&self) -> Self {
        Self { wall_clock_s: 0.0, ..self.clone() }
    }
}

struct Ctx<'a> {
    name: &'a str,
    params: BTreeMap<String, Value>,
    seed: u64,
    records: Vec<Record>,
    started: Instant,
}

impl<'a> Ctx<'a> {
    fn new(name: &'a str, seed: u64) -> Self {
        Self { name, params: BTreeMap::new(), seed, records: Vec::new(), started: Instant::now() }
    }

    fn set(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("parameter serializes");
        self.params.insert(key.to_string(), v);
    }

    fn record(&self, check: impl Into<String>) -> Record {
        Record::base(self.name, check, &self.params, self.seed)
    }

    fn push(&mut self, mut r: Record) {
        r.params = self.params.clone();
        r.wall_clock_s = self.started.elapsed().as_secs_f64();
        self.records.push(r);
        self.started = Instant::now();
    }

    fn seed_for(&self, label: &str) -> u64 {
        sub_seed(self.seed, label)
    }
}

/// Runs a named experiment.
pub fn run(name: &str, p: &Params) -> Result<Vec<Record>, ExperimentError> {
    let mut ctx = Ctx::new(name, p.seed);
    match name {
        "blindforge" => blindforge_exp(&mut ctx, p)?,
        "blindforge-q" => blindforge_q_exp(&mut ctx, p)?,
        "strong-blindforge" => strong_exp(&mut ctx, p)?,
        "bz" => bz_exp(&mut ctx, p)?,
        "eufcma" => eufcma_exp(&mut ctx, p)?,
        "attack-period" => attack_exp(&mut ctx, p)?,
        "double-spend" => double_spend_exp(&mut ctx, p)?,
        "verify-hybrid" => hybrid_exp(&mut ctx, p)?,
        "verify-relabel" => relabel_exp(&mut ctx, p)?,
        "verify-partialmeasure" => partial_exp(&mut ctx, p)?,
        "verify-numberop" => numberop_exp(&mut ctx, p)?,
        "verify-bz-bound" => bz_bound_exp(&mut ctx, p)?,
        "verify-bphash" => bphash_exp(&mut ctx, p)?,
        "verify-compressed" => compressed_exp(&mut ctx, p)?,
        "verify-kwise" => kwise_exp(&mut ctx, p)?,
        other => return Err(ExperimentError::Unknown(other.to_string())),
    }
    Ok(ctx.records)
}

fn check_eps(eps: f64) -> Result<f64, ExperimentError> {
    if (0.0..=1.0).contains(&eps) {
        Ok(eps)
    } else {
        Err(ExperimentError::InvalidParams(format!("eps = {eps} is outside [0, 1]")))
    }
}

fn templates(q: usize) -> Vec<Box<dyn Adversary>> {
    vec![Box::new(BlindGuess), Box::new(ClassicalQueryGuess { q }), Box::new(trivial_measure_adversary(q))]
}

fn blindforge_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, m, q) = (p.n.unwrap_or(8), p.m.unwrap_or(16), p.q.unwrap_or(2));
    let (eps, trials) = (check_eps(p.eps.unwrap_or(0.5))?, p.trials.unwrap_or(10_000));
    ctx.set("scheme", "random-mac");
    ctx.set("n", n);
    ctx.set("m", m);
    ctx.set("q", q);
    ctx.set("eps", eps);
    ctx.set("trials", trials);
    let scheme = RandomMac { n, m };
    let bound = 2f64.powi(-(m as i32));
    for adv in templates(q) {
        let r = estimate(trials, ctx.seed_for(&adv.name()), |rng| blindforge(&scheme, adv.as_ref(), eps, rng))?;
        let rep = BoundReport::from_game(format!("random-mac/{}", adv.name()), "2^-m", bound, &r, Direction::AtMost);
        let rec = ctx.record("").game(&r).bound(&rep).blinding(n, eps);
        ctx.push(rec);
    }
    Ok(())
}

fn blindforge_q_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, m, q) = (p.n.unwrap_or(12), p.m.unwrap_or(12), p.q.unwrap_or(2));
    let (eps, trials) = (check_eps(p.eps.unwrap_or(0.5))?, p.trials.unwrap_or(10_000));
    ctx.set("scheme", "kwise-mac");
    ctx.set("n", n);
    ctx.set("m", m);
    ctx.set("q", q);
    ctx.set("eps", eps);
    ctx.set("trials", trials);
    let scheme = KWiseMac { q, n, m };
    let bound = 2f64.powi(-(m as i32));
    for adv in templates(q) {
        let r = estimate(trials, ctx.seed_for(&adv.name()), |rng| blindforge_q(&scheme, adv.as_ref(), q, eps, rng))?;
        let rep = BoundReport::from_game(format!("kwise-mac/{}", adv.name()), "2^-m", bound, &r, Direction::AtMost);
        let rec = ctx.record("").game(&r).bound(&rep).blinding(n, eps);
        ctx.push(rec);
    }
    Ok(())
}

fn strong_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let n = p.n.unwrap_or(8);
    let trials = p.trials.unwrap_or(10_000);
    let eps_list = match p.eps {
        Some(e) => vec![check_eps(e)?],
        None => vec![0.1, 0.25],
    };
    ctx.set("scheme", "noncanonical-mac");
    ctx.set("n", n);
    ctx.set("eps", &eps_list);
    ctx.set("trials", trials);
    let scheme = NoncanonicalMac { n };
    for &eps in &eps_list {
        let r = estimate(trials, ctx.seed_for(&format!("strong/{eps}")), |rng| {
            strong_blindforge(&scheme, &NoncanonicalForger, eps, rng)
        })?;
        let rep = BoundReport::new(
            format!("noncanonical-strong(eps={eps})"),
            "eps (1 - eps)",
            eps * (1.0 - eps),
            r.rate,
            Direction::Equal,
            3.0 * r.sigma(),
        );
        let rec = ctx.record("").game(&r).bound(&rep).blinding(n + scheme.tag_bits(), eps);
        ctx.push(rec);
    }
    let eps = eps_list[0];
    let msg = estimate(trials, ctx.seed_for("strong/message-only"), |rng| {
        blindforge(&CanonicalView(scheme), &NoncanonicalForger, eps, rng)
    })?;
    let rec = ctx
        .record(format!("noncanonical-message-blinding(eps={eps})"))
        .game(&msg)
        .blinding(n, eps)
        .note("message-only blinding for comparison; not a pass/fail check");
    ctx.push(rec);

    // A canonical scheme should give matching rates under both blindings.
    let affine = AffineMac { n };
    let a = estimate(trials, ctx.seed_for("canonical/message"), |rng| blindforge(&affine, &AffineForger, eps, rng))?;
    let b = estimate(trials, ctx.seed_for("canonical/pair"), |rng| strong_blindforge(&affine, &AffineForger, eps, rng))?;
    let sigma = (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
    let rep = BoundReport::new(format!("canonical-agreement(eps={eps})"), "pair rate = message rate", a.rate, b.rate, Direction::Equal, 3.0 * sigma)
        .with_note(format!("affine forger: message blinding {:.4}, pair blinding {:.4}", a.rate, b.rate));
    let rec = ctx.record("").game(&b).bound(&rep);
    ctx.push(rec);
    Ok(())
}

/// Presents a non-canonical scheme as canonical so the message-blinded game accepts it.
#[derive(Clone, Copy)]
struct CanonicalView(NoncanonicalMac);

impl MacScheme for CanonicalView {
    fn name(&self) -> String {
        self.0.name()
    }
    fn message_bits(&self) -> usize {
        self.0.message_bits()
    }
    fn tag_bits(&self) -> usize {
        self.0.tag_bits()
    }
    fn keygen(&self, rng: &mut dyn rand::RngCore) -> Box<dyn crate::mac::MacKey> {
        self.0.keygen(rng)
    }
}

fn bz_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, m) = (p.n.unwrap_or(4), p.m.unwrap_or(8));
    let trials = p.trials.unwrap_or(10_000);
    let qs = match p.q {
        Some(q) => vec![q],
        None => vec![1, 3],
    };
    ctx.set("scheme", "random-mac");
    ctx.set("n", n);
    ctx.set("m", m);
    ctx.set("q", &qs);
    ctx.set("trials", trials);
    let scheme = RandomMac { n, m };
    for &q in &qs {
        let bound = crate::verify::bz_bound(q, m);
        let advs: Vec<Box<dyn Adversary>> = vec![Box::new(trivial_measure_adversary(q)), Box::new(ClassicalQueryGuess { q })];
        for adv in advs {
            let r = estimate(trials, ctx.seed_for(&adv.name()), |rng| bz_experiment(&scheme, adv.as_ref(), rng))?;
            let rep = BoundReport::from_game(format!("bz/{}", adv.name()), "2^{ceil(log(q+1))} / 2^m", bound, &r, Direction::AtMost);
            let rec = ctx.record("").game(&r).bound(&rep);
            ctx.push(rec);
        }
    }

    // Many valid pairs from k queries turn into a blind forgery.
    let k = 2;
    let bu = bz_to_bu(Arc::new(AffineHarvester { pairs: crate::games::BZ_TO_BU_C * k * k }), k);
    let eps = bu.epsilon();
    let scheme = AffineMac { n: 16 };
    let r = estimate(trials, ctx.seed_for("bz-to-bu"), |rng| blindforge(&scheme, &bu, eps, rng))?;
    let bound = 2.0 * BZ_TO_BU_DELTA * eps;
    let rep = BoundReport::from_game("bz-to-bu(k=2)", "2 delta eps, eps = 1/(144 k^2)", bound, &r, Direction::AtLeast)
        .with_note(format!("affine harvester over 2^16 messages emitting {} pairs", bu.pairs_needed()));
    let rec = ctx.record("").game(&r).bound(&rep).blinding(16, eps);
    ctx.push(rec);
    Ok(())
}

fn eufcma_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let n = p.n.unwrap_or(8);
    let runtime = p.t.unwrap_or(8);
    let trials = p.trials.unwrap_or(10_000);
    ctx.set("scheme", "affine-mac");
    ctx.set("n", n);
    ctx.set("t", runtime);
    ctx.set("trials", trials);
    let scheme = AffineMac { n };

    let s = estimate(trials, ctx.seed_for("euf/affine"), |rng| eufcma_experiment(&scheme, &AffineForger, Freshness::Message, rng))?;
    let rep = BoundReport::from_game("eufcma/affine-forger", "s = 1", 1.0, &s, Direction::AtLeast);
    let rec = ctx.record("").game(&s).bound(&rep);
    ctx.push(rec);

    let replay = estimate(trials, ctx.seed_for("euf/replay"), |rng| eufcma_experiment(&scheme, &ReplayForger, Freshness::Message, rng))?;
    let rep = BoundReport::from_game("eufcma/replay", "freshness: 0", 0.0, &replay, Direction::AtMost);
    let rec = ctx.record("").game(&replay).bound(&rep);
    ctx.push(rec);

    let bu = Arc::new(classical_to_bu(Arc::new(AffineForger), runtime));
    let eps = bu.epsilon();
    let blind = estimate(trials, ctx.seed_for("bu/affine"), |rng| blindforge(&scheme, bu.as_ref(), eps, rng))?;
    let bound = s.rate * eps / std::f64::consts::E;
    let rep = BoundReport::from_game(format!("classical-to-bu(p={runtime})"), "s eps / e, eps = 1/p", bound, &blind, Direction::AtLeast);
    let rec = ctx.record("").game(&blind).bound(&rep).blinding(n, eps);
    ctx.push(rec);

    let sim = bu_to_eufcma(bu.clone(), eps);
    let lazy = estimate(trials, ctx.seed_for("euf/lazy"), |rng| eufcma_experiment(&scheme, &sim, Freshness::Message, rng))?;
    let rep = BoundReport::from_game("bu-to-eufcma(lazy)", "blind win rate of the simulated adversary", blind.rate, &lazy, Direction::AtLeast)
        .with_note(format!("lazy blinding at eps = {eps}"));
    let rec = ctx.record("").game(&lazy).bound(&rep);
    ctx.push(rec);
    Ok(())
}

fn attack_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let n = p.n.unwrap_or(8);
    let keys = p.trials.unwrap_or(100);
    let samples = p.samples.unwrap_or(30);
    let game_trials = p.game_trials.unwrap_or(10_000);
    let (lo, hi) = (3u64, 1u64 << (n - 1));
    ctx.set("n", n);
    ctx.set("trials", keys);
    ctx.set("samples", samples);
    ctx.set("game_trials", game_trials);
    ctx.set("periods", format!("odd in [{lo}, {hi}]"));
    let cfg = PeriodAttackConfig { samples, ..PeriodAttackConfig::for_bits(n) };
    ctx.set("confirm", cfg.confirm);
    let scheme = CounterexampleMac::with_periods(n, PeriodDistribution::Odd { lo, hi })?;

    let seed = ctx.seed_for("keys");
    let reports = rayon_map(keys, |i| {
        let mut rng = trial_rng(seed, i);
        let key = scheme.keygen_concrete(&mut rng);
        attack_key(&key, &cfg, &mut rng)
    })?;
    let recovered = reports.iter().filter(|r| r.success).count() as u64;
    let verified = reports.iter().filter(|r| r.success && r.forgery_verifies).count() as u64;
    let need = (0.9 * keys as f64).ceil();
    let r = GameResult::from_counts(recovered, keys, seed);
    let rep = BoundReport::new("period-recovery", "recovered keys >= 0.9 x keys", need, recovered as f64, Direction::AtLeast, 0.0);
    let rec = ctx.record("").game(&r).bound(&rep);
    ctx.push(rec);
    let rep = BoundReport::new("period-forgery", "forgery verifies for every recovered key", recovered as f64, verified as f64, Direction::Equal, 0.0);
    let rec = ctx.record("").bound(&rep);
    ctx.push(rec);

    // Uniform periods, for information: small periods and even periods are harder to pin down.
    let uniform = CounterexampleMac::new(n)?;
    let useed = ctx.seed_for("uniform-keys");
    let ureports = rayon_map(keys, |i| {
        let mut rng = trial_rng(useed, i);
        let key = uniform.keygen_concrete(&mut rng);
        attack_key(&key, &cfg, &mut rng)
    })?;
    let ur = GameResult::from_counts(ureports.iter().filter(|r| r.success).count() as u64, keys, useed);
    let rec = ctx.record("period-recovery-uniform").game(&ur).note("uniform periods over all n-bit values; informational");
    ctx.push(rec);

    // Blind-forgery instantiation.
    let adv = PeriodAdversary { n, cfg };
    let t = adv.query_budget();
    let plain = estimate(game_trials, ctx.seed_for("plain"), |rng| unblinded_forge(&scheme, &adv, rng))?;
    let pt = plain.rate;
    let eps = (pt / (3.0 * t as f64)).powi(2);
    let blind = estimate(game_trials, ctx.seed_for("blind"), |rng| blindforge(&scheme, &adv, eps, rng))?;
    let bound = pt.powi(3) / (27.0 * (t * t) as f64);
    let rep = BoundReport::from_game("period-attack-blind", "p^3 / (27 T^2), eps = (p / 3T)^2", bound, &blind, Direction::AtLeast)
        .with_note(format!("unblinded success {pt:.6}, T = {t}, eps = {eps:.6e}; every query audited against the prefix-1 support"));
    let rec = ctx.record("").game(&blind).bound(&rep).blinding(n + 1, eps);
    ctx.push(rec);
    Ok(())
}

fn rayon_map<T: Send>(count: u64, f: impl Fn(u64) -> Result<T, GameError> + Sync + Send) -> Result<Vec<T>, GameError> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

fn double_spend_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let n = p.n.unwrap_or(6);
    let trials = p.trials.unwrap_or(10_000);
    let (lo, hi) = (2u64, 8u64);
    ctx.set("n", n);
    ctx.set("trials", trials);
    ctx.set("periods", format!("[{lo}, {hi}]"));
    ctx.set("max_denominator", crate::attacks::double_spend_max_den(n));
    let scheme = CounterexampleMac::with_periods(n, PeriodDistribution::Range { lo, hi })?;
    let seed = ctx.seed_for("double-spend");
    let outcomes = rayon_map(trials, |i| {
        let mut rng = trial_rng(seed, i);
        let key = scheme.keygen_concrete(&mut rng);
        double_spend(&key, true, &mut rng)
    })?;
    let single = GameResult::from_counts(outcomes.iter().filter(|o| o.property_correct).count() as u64, trials, seed);
    let joint = GameResult::from_counts(outcomes.iter().filter(|o| o.joint()).count() as u64, trials, seed);
    let rec = ctx.record("double-spend-property").game(&single).note("single-sample property success");
    ctx.push(rec);
    let rep = BoundReport::from_game("double-spend-joint", "p_succ^2", single.rate.powi(2), &joint, Direction::AtLeast)
        .with_note(format!("property success {:.4}", single.rate));
    let rec = ctx.record("").game(&joint).bound(&rep);
    ctx.push(rec);

    let direct = rayon_map(trials.min(1000), |i| {
        let mut rng = trial_rng(seed ^ 1, i);
        let key = scheme.keygen_concrete(&mut rng);
        double_spend(&key, false, &mut rng)
    })?;
    let valid = GameResult::from_counts(direct.iter().filter(|o| o.pair_valid).count() as u64, direct.len() as u64, seed ^ 1);
    let rep = BoundReport::new("double-spend-no-property", "pair valid w.p. 1", 1.0, valid.rate, Direction::Equal, 0.0);
    let rec = ctx.record("").game(&valid).bound(&rep);
    ctx.push(rec);
    Ok(())
}

fn hybrid_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let hp = HybridParams {
        n: p.n.unwrap_or(6),
        m: p.m.unwrap_or(2),
        queries: p.t.unwrap_or(3),
        eps: check_eps(p.eps.unwrap_or(0.01))?,
        circuits: p.trials.unwrap_or(200) as usize,
        draws: p.samples.unwrap_or(50),
    };
    ctx.set("n", hp.n);
    ctx.set("m", hp.m);
    ctx.set("t", hp.queries);
    ctx.set("eps", hp.eps);
    ctx.set("trials", hp.circuits);
    ctx.set("samples", hp.draws);
    let out = hybrid_bound_check(&hp, ctx.seed)?;
    let rec = ctx.record("").bound(&out.report);
    ctx.push(rec);
    Ok(())
}

fn relabel_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let q = p.q.unwrap_or(1);
    let n = p.n.unwrap_or(2);
    if n != 2 {
        return Err(ExperimentError::InvalidParams(format!("relabelling runs at n = 2 only (got {n})")));
    }
    let trials = p.trials.unwrap_or(100);
    ctx.set("n", n);
    ctx.set("q", q);
    ctx.set("trials", trials);
    let rep = relabel_check(q, trials as usize, ctx.seed)?;
    let rec = ctx.record("").bound(&rep);
    ctx.push(rec);
    Ok(())
}

fn partial_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, c, trials) = (p.n.unwrap_or(8), p.c.unwrap_or(3), p.trials.unwrap_or(10_000));
    ctx.set("n", n);
    ctx.set("c", c);
    ctx.set("trials", trials);
    let (rep, r) = partial_measure_check(n, c, trials, ctx.seed)?;
    let rec = ctx.record("").game(&r).bound(&rep);
    ctx.push(rec);
    Ok(())
}

fn numberop_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let m = p.m.unwrap_or(1);
    let sizes = match p.n {
        Some(n) => vec![n],
        None => vec![1, 2],
    };
    ctx.set("n", &sizes);
    ctx.set("m", m);
    for &n in &sizes {
        let rep = commutator_check(n, m)?;
        let rec = ctx.record("").bound(&rep);
        ctx.push(rec);
    }
    let n = *sizes.last().expect("one size");
    for q in 1..=2 {
        let rep = number_support_check(n, m, q, ctx.seed_for(&format!("support/{q}")))?;
        let rec = ctx.record("").bound(&rep);
        ctx.push(rec);
    }
    Ok(())
}

fn bz_bound_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, m, trials) = (p.n.unwrap_or(4), p.m.unwrap_or(8), p.trials.unwrap_or(10_000));
    let qs = match p.q {
        Some(q) => vec![q],
        None => vec![1, 3],
    };
    ctx.set("n", n);
    ctx.set("m", m);
    ctx.set("q", &qs);
    ctx.set("trials", trials);
    for &q in &qs {
        let (rep, results) = bz_random_bound_check(n, m, q, trials, ctx.seed_for(&format!("q{q}")))?;
        let worst = results.iter().max_by(|a, b| a.1.rate.total_cmp(&b.1.rate)).expect("results");
        let rec = ctx.record("").game(&worst.1).bound(&BoundReport { name: format!("bz-bound(q={q})"), ..rep });
        ctx.push(rec);
    }
    Ok(())
}

fn bphash_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, trials, q) = (p.n.unwrap_or(8), p.trials.unwrap_or(10_000), p.q.unwrap_or(2));
    ctx.set("n", n);
    ctx.set("q", q);
    ctx.set("trials", trials);
    for hash in [BpHash::TwoToOne, BpHash::Injective, BpHash::KWise { q }] {
        let rep = bphash_classical_check(n, hash, trials, ctx.seed_for(&format!("{hash:?}")))?;
        let rec = ctx.record("").bound(&rep);
        ctx.push(rec);
    }
    Ok(())
}

fn compressed_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let (n, m, circuits) = (p.n.unwrap_or(2), p.m.unwrap_or(1), p.trials.unwrap_or(50) as usize);
    let qs = match p.q {
        Some(q) => vec![q],
        None => vec![1, 2],
    };
    ctx.set("n", n);
    ctx.set("m", m);
    ctx.set("q", &qs);
    ctx.set("trials", circuits);
    for &q in &qs {
        let rep = compressed_vs_dense_check(n, m, q, circuits, ctx.seed_for(&format!("q{q}")))?;
        let rec = ctx.record("").bound(&BoundReport { name: format!("compressed-vs-dense(q={q})"), ..rep });
        ctx.push(rec);
    }
    Ok(())
}

fn kwise_exp(ctx: &mut Ctx, p: &Params) -> Result<(), ExperimentError> {
    let q = p.q.unwrap_or(2);
    let w = p.n.unwrap_or(4);
    let k = 4 * q + 1;
    if k > 1 << w {
        return Err(ExperimentError::InvalidParams(format!("GF(2^{w}) has fewer than k = {k} points")));
    }
    ctx.set("q", q);
    ctx.set("k", k);
    ctx.set("w", w);
    for (k, w) in [(3, 3), (4, 3), (5, 3)] {
        let rep = kwise_enumeration_check(k, w)?;
        let rec = ctx.record("").bound(&rep);
        ctx.push(rec);
    }
    let rep = kwise_vandermonde_check(k, w)?;
    let rec = ctx.record("").bound(&rep);
    ctx.push(rec);
    Ok(())
}
