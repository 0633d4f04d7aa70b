//! Numerical checks of the quantitative lemmas behind the games.
//!
//! Every check returns a [`BoundReport`]; bounds are evaluated from the
//! parameters at run time. Random circuits give evidence, not proof: the
//! statements quantify over all algorithms.

use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::attacks::{parallel_measure_adversary, trivial_measure_adversary};
use crate::func::{BlindingSet, FuncError, FunctionTable, KWiseFamily};
use crate::games::{bz_experiment, estimate, trial_rng, Adversary, GameError, GameResult};
use crate::gf2::Gf2w;
use crate::mac::RandomMac;
use crate::oracle::{commutator_norm, CommutatorTarget, CompressedOracle, FourierOracle, OracleError, F_REG};
use crate::qsim::{random_gate, BitFunction, tv_distance, Gate1, Projector, QState, RegisterLayout, SimError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{0}")]
    Invalid(String),
}

/// Which way a measured value must sit relative to its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `measured <= bound + tolerance`.
    AtMost,
    /// `measured >= bound - tolerance`.
    AtLeast,
    /// `|measured - bound| <= tolerance`.
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub formula: String,
    pub bound: f64,
    pub measured: f64,
    pub direction: Direction,
    pub tolerance: f64,
    /// Signed slack: positive when the inequality holds with room to spare.
    pub margin: f64,
    pub pass: bool,
    pub note: String,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        formula: impl Into<String>,
        bound: f64,
        measured: f64,
        direction: Direction,
        tolerance: f64,
    ) -> Self {
        let margin = match direction {
            Direction::AtMost => bound + tolerance - measured,
            Direction::AtLeast => measured - bound + tolerance,
            Direction::Equal => tolerance - (measured - bound).abs(),
        };
        Self {
            name: name.into(),
            formula: formula.into(),
            bound,
            measured,
            direction,
            tolerance,
            margin,
            pass: margin >= 0.0,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Report from a game estimate against `bound` with a 3-sigma Wilson allowance.
    pub fn from_game(name: impl Into<String>, formula: impl Into<String>, bound: f64, r: &GameResult, direction: Direction) -> Self {
        Self::new(name, formula, bound, r.rate, direction, 3.0 * r.sigma())
    }
}

/// A fixed random circuit: between consecutive oracle calls, `depth` rounds of
/// Haar-random single-qubit gates on every wire followed by CZ on neighbouring wires.
/// Wires are named `(register, bit)` so the circuit applies to any layout containing them.
#[derive(Debug, Clone)]
pub struct RandomCircuit {
    wires: Vec<(String, usize)>,
    blocks: Vec<Vec<Vec<Gate1>>>,
}

impl RandomCircuit {
    pub const DEPTH: usize = 3;

    /// Circuit with `queries + 1` blocks over every bit of `registers`.
    pub fn new(registers: &[(&str, usize)], queries: usize, rng: &mut dyn RngCore) -> Self {
        let wires: Vec<(String, usize)> =
            registers.iter().flat_map(|&(r, w)| (0..w).map(move |b| (r.to_string(), b))).collect();
        let blocks = (0..=queries)
            .map(|_| (0..Self::DEPTH).map(|_| wires.iter().map(|_| random_gate(rng)).collect()).collect())
            .collect();
        Self { wires, blocks }
    }

    pub fn queries(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Applies block `i` (block 0 precedes the first query).
    pub fn apply_block(&self, state: &mut QState, i: usize) -> Result<(), SimError> {
        let qubits = self
            .wires
            .iter()
            .map(|(r, b)| Ok(state.layout().register(r)?.qubit(*b)))
            .collect::<Result<Vec<usize>, SimError>>()?;
        for round in &self.blocks[i] {
            for (q, g) in qubits.iter().zip(round) {
                state.apply_gate(*q, g);
            }
            for pair in qubits.windows(2) {
                state.apply_cz(pair[0], pair[1]);
            }
        }
        Ok(())
    }

    /// Runs the circuit on `|0>` with `oracle` between blocks; returns the output distribution.
    pub fn run(
        &self,
        layout: &RegisterLayout,
        mut oracle: impl FnMut(&mut QState) -> Result<(), SimError>,
    ) -> Result<Vec<f64>, SimError> {
        let mut s = QState::zero(layout.clone());
        self.apply_block(&mut s, 0)?;
        for i in 1..self.blocks.len() {
            oracle(&mut s)?;
            self.apply_block(&mut s, i)?;
        }
        Ok(s.distribution())
    }
}

/// Seeded per-item streams for parallel checks.
fn item_rng(seed: u64, i: u64) -> ChaCha8Rng {
    trial_rng(seed, i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HybridParams {
    pub n: usize,
    pub m: usize,
    pub queries: usize,
    pub eps: f64,
    pub circuits: usize,
    pub draws: usize,
}

/// Per-circuit mean distances alongside the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridOutcome {
    pub report: BoundReport,
    pub per_circuit: Vec<(f64, f64)>,
    pub worst_circuit_ok: bool,
}

/// Mean total-variation distance between runs against `F` and `F xor P`, with
/// `P` uniformly random on a fresh ε-blinding set and zero elsewhere.
pub fn hybrid_bound_check(p: &HybridParams, seed: u64) -> Result<HybridOutcome, VerifyError> {
    let bound = 2.0 * p.queries as f64 * p.eps.sqrt();
    let layout = RegisterLayout::new([("X", p.n), ("Y", p.m)])?;
    let per_circuit = (0..p.circuits as u64)
        .into_par_iter()
        .map(|c| -> Result<(f64, f64), VerifyError> {
            let mut rng = item_rng(seed, c);
            let circuit = RandomCircuit::new(&[("X", p.n), ("Y", p.m)], p.queries, &mut rng);
            let d: Vec<f64> = (0..p.draws)
                .map(|_| -> Result<f64, VerifyError> {
                    let f = FunctionTable::random(p.n, p.m, &mut rng);
                    let b = BlindingSet::uniform(p.n, p.eps, &mut rng)?;
                    let pt = FunctionTable::random(p.n, p.m, &mut rng);
                    let g = FunctionTable::from_fn(p.n, p.m, |x| f.eval(x) ^ if b.chi(x) { pt.eval(x) } else { 0 });
                    let a = circuit.run(&layout, |s| s.apply_xor_oracle(&f, "X", "Y"))?;
                    let bb = circuit.run(&layout, |s| s.apply_xor_oracle(&g, "X", "Y"))?;
                    Ok(tv_distance(&a, &bb)?)
                })
                .collect::<Result<_, _>>()?;
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len().max(2) - 1) as f64;
            Ok((mean, (var / d.len() as f64).sqrt()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean = per_circuit.iter().map(|c| c.0).sum::<f64>() / per_circuit.len().max(1) as f64;
    let worst_circuit_ok = per_circuit.iter().all(|&(m, s)| m <= bound + 3.0 * s);
    let report = BoundReport::new("hybrid", "2 T sqrt(eps)", bound, mean, Direction::AtMost, 0.0).with_note(format!(
        "{} random circuits x {} blinding draws; max circuit mean {:.3e}",
        p.circuits,
        p.draws,
        per_circuit.iter().map(|c| c.0).fold(0.0, f64::max)
    ));
    Ok(HybridOutcome { report: BoundReport { pass: report.pass && worst_circuit_ok, ..report }, per_circuit, worst_circuit_ok })
}

const RELABEL_REGS: [(&str, usize); 4] = [("X", 2), ("Y1", 2), ("Y2", 1), ("E", 1)];

/// Final joint state of a random circuit whose queries apply the Fourier oracle
/// on `(X, Y2)` followed by `h` on `(X, Y1)`, projected onto "exactly the cells
/// in `set` are nonzero".
pub fn relabel_final_state(circuit: &RandomCircuit, h: &FunctionTable, set: &[u64]) -> Result<QState, VerifyError> {
    let mut fo = FourierOracle::new(&RELABEL_REGS, 2, 1)?;
    circuit.apply_block(fo.state_mut(), 0)?;
    for i in 1..=circuit.queries() {
        fo.query("X", "Y2")?;
        fo.state_mut().apply_xor_oracle(h, "X", "Y1")?;
        circuit.apply_block(fo.state_mut(), i)?;
    }
    let set: HashSet<u64> = set.iter().copied().collect();
    let probe = FourierOracle::new(&RELABEL_REGS, 2, 1)?;
    let proj = Projector::new(&[F_REG], move |v| (0..4).all(|x| (probe.cell(v[0], x) != 0) == set.contains(&x)));
    Ok(fo.state().project(&proj)?.0)
}

/// Largest entrywise deviation between projected finals for `h` and a
/// relabelling `h'` agreeing with `h` on a random `q`-set, over `instances` draws.
pub fn relabel_check(q: usize, instances: usize, seed: u64) -> Result<BoundReport, VerifyError> {
    if q > 2 {
        return Err(VerifyError::Invalid(format!("q = {q}; the dense oracle is only feasible for q <= 2")));
    }
    let devs = (0..instances as u64)
        .into_par_iter()
        .map(|i| -> Result<f64, VerifyError> {
            let mut rng = item_rng(seed, i);
            let circuit = RandomCircuit::new(&RELABEL_REGS, q, &mut rng);
            let h = FunctionTable::random(2, 2, &mut rng);
            let mut pts: Vec<u64> = (0..4).collect();
            for j in 0..q {
                let k = rng.random_range(j..4);
                pts.swap(j, k);
            }
            let set = &pts[..q];
            let other = FunctionTable::random(2, 2, &mut rng);
            let h2 = FunctionTable::from_fn(2, 2, |x| if set.contains(&x) { h.eval(x) } else { other.eval(x) });
            let a = relabel_final_state(&circuit, &h, set)?;
            let b = relabel_final_state(&circuit, &h2, set)?;
            Ok(a.max_deviation(&b))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = devs.into_iter().fold(0.0, f64::max);
    Ok(BoundReport::new("relabel", "max |P_K psi_h - P_K psi_h'| = 0", 0.0, worst, Direction::AtMost, 1e-10)
        .with_note(format!("{instances} random (circuit, h, h', K) instances, q = {q}")))
}

/// Exact probability that `2^n` independent uniform `cn`-bit signatures are not all distinct.
pub fn partial_measure_exact(n: usize, c: usize) -> f64 {
    let space = 2f64.powi((c * n) as i32);
    let items = 1u64 << n;
    1.0 - (0..items).map(|i| 1.0 - i as f64 / space).product::<f64>()
}

/// Monte Carlo estimate of the probability that two distinct points fall in
/// exactly the same members of `cn` uniformly random subsets, against `2^{2n} / 2^{cn}`.
pub fn partial_measure_check(n: usize, c: usize, trials: u64, seed: u64) -> Result<(BoundReport, GameResult), VerifyError> {
    let subsets = c * n;
    if n > 16 || subsets > 128 {
        return Err(VerifyError::Invalid(format!("n = {n}, c = {c} exceeds the supported size")));
    }
    let mask = if subsets == 128 { u128::MAX } else { (1u128 << subsets) - 1 };
    let result = estimate(trials, seed, |rng| {
        let mut seen = HashSet::with_capacity(1 << n);
        // Bit i of a point's signature is its membership in subset i.
        let bad = (0..1u64 << n).any(|_| {
            let sig = ((rng.next_u64() as u128) << 64 | rng.next_u64() as u128) & mask;
            !seen.insert(sig)
        });
        Ok(bad)
    })?;
    let bound = 2f64.powi((2 * n) as i32 - subsets as i32);
    let report = BoundReport::from_game("partial-measurement", "2^{2n} / 2^{cn}", bound, &result, Direction::AtMost)
        .with_note(format!("exact collision probability {:.6e}", partial_measure_exact(n, c)));
    Ok((report, result))
}

/// `2^{ceil(log2(q+1))} / 2^m`.
pub fn bz_bound(q: usize, m: usize) -> f64 {
    (q + 1).next_power_of_two() as f64 / 2f64.powi(m as i32)
}

/// Measures measurement-based adversaries in the q-query, (q+1)-pair game on a
/// random function, reporting the best rate against the bound.
pub fn bz_random_bound_check(n: usize, m: usize, q: usize, trials: u64, seed: u64) -> Result<(BoundReport, Vec<(String, GameResult)>), VerifyError> {
    let scheme = RandomMac { n, m };
    let advs: Vec<Box<dyn Adversary>> = vec![Box::new(trivial_measure_adversary(q)), Box::new(parallel_measure_adversary(q))];
    let mut results = Vec::new();
    for adv in &advs {
        let r = estimate(trials, seed, |rng| bz_experiment(&scheme, adv.as_ref(), rng))?;
        results.push((adv.name(), r));
    }
    let worst = results.iter().max_by(|a, b| a.1.rate.total_cmp(&b.1.rate)).expect("two adversaries");
    let report = BoundReport::from_game("bz-bound", "2^{ceil(log(q+1))} / 2^m", bz_bound(q, m), &worst.1, Direction::AtMost)
        .with_note(format!("worst adversary {}", worst.0));
    Ok((report, results))
}

/// Hash used by the Bernoulli-preserving check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BpHash {
    /// `x -> x >> 1`; inputs 0 and 1 collide.
    TwoToOne,
    /// Identity.
    Injective,
    /// Blinding drawn from a (4q+1)-wise independent hash instead of a pullback.
    KWise { q: usize },
}

/// Advantage of the distinguisher "are points 0 and 1 blinded alike?" between
/// a uniform ε = 1/2 blinding set and the hash-derived one.
pub fn bphash_classical_check(n: usize, hash: BpHash, trials: u64, seed: u64) -> Result<BoundReport, VerifyError> {
    let co_blinded = |b: &BlindingSet| b.chi(0) == b.chi(1);
    let uniform = estimate(trials, seed, |rng| Ok(co_blinded(&BlindingSet::uniform(n, 0.5, rng)?)))?;
    let derived = estimate(trials, seed ^ 0x5bd1_e995, |rng| {
        let set = match hash {
            BpHash::TwoToOne => {
                let h = FunctionTable::from_fn(n, n - 1, |x| x >> 1);
                BlindingSet::pullback(&h, &BlindingSet::uniform(n - 1, 0.5, rng)?)?
            }
            BpHash::Injective => {
                let h = FunctionTable::from_fn(n, n, |x| x);
                BlindingSet::pullback(&h, &BlindingSet::uniform(n, 0.5, rng)?)?
            }
            BpHash::KWise { q } => BlindingSet::from_hash(4 * q + 1, 0.5, n, rng)?,
        };
        Ok(co_blinded(&set))
    })?;
    let adv = derived.rate - uniform.rate;
    let sigma = (uniform.sigma().powi(2) + derived.sigma().powi(2)).sqrt();
    let report = match hash {
        BpHash::TwoToOne => BoundReport::new("bphash-collision", "advantage = 1/2", 0.5, adv, Direction::Equal, 0.02),
        _ => BoundReport::new("bphash-secure", "advantage = 0", 0.0, adv, Direction::Equal, 3.0 * sigma),
    };
    Ok(report.with_note(format!("{hash:?}; co-blinding rates {:.4} (uniform) vs {:.4} (hash)", uniform.rate, derived.rate)))
}

/// Largest TV distance between dense and compressed Fourier oracles over random circuits
/// on registers `X(n), Y(m), E(1)`.
pub fn compressed_vs_dense_check(n: usize, m: usize, q: usize, circuits: usize, seed: u64) -> Result<BoundReport, VerifyError> {
    let regs = [("X", n), ("Y", m), ("E", 1)];
    let worst = (0..circuits as u64)
        .into_par_iter()
        .map(|i| -> Result<f64, VerifyError> {
            let circuit = RandomCircuit::new(&regs, q, &mut item_rng(seed, i));
            let mut dense = FourierOracle::new(&regs, n, m)?;
            let mut sparse = CompressedOracle::new(&regs, n, m)?;
            circuit.apply_block(dense.state_mut(), 0)?;
            sparse.apply(|s| circuit.apply_block(s, 0))?;
            for b in 1..=q {
                dense.query("X", "Y")?;
                sparse.query("X", "Y")?;
                circuit.apply_block(dense.state_mut(), b)?;
                sparse.apply(|s| circuit.apply_block(s, b))?;
            }
            Ok(tv_distance(&dense.adversary_distribution(), &sparse.adversary_distribution())?)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(BoundReport::new("compressed-vs-dense", "TV = 0", 0.0, worst, Direction::AtMost, 1e-9)
        .with_note(format!("{circuits} random circuits, {q} queries")))
}

/// Commutator norm of the number operator with one query, which should be exactly 1.
pub fn commutator_check(n: usize, m: usize) -> Result<BoundReport, VerifyError> {
    let v = commutator_norm(n, m, CommutatorTarget::FourierQuery)?;
    Ok(BoundReport::new(format!("commutator(n={n},m={m})"), "||[N, U]|| = 1", 1.0, v, Direction::Equal, 1e-9))
}

/// Weight on more than `q` nonzero cells after `q` queries of a random circuit.
pub fn number_support_check(n: usize, m: usize, q: usize, seed: u64) -> Result<BoundReport, VerifyError> {
    let regs = [("X", n), ("Y", m), ("E", 1)];
    let circuit = RandomCircuit::new(&regs, q, &mut item_rng(seed, 0));
    let mut fo = FourierOracle::new(&regs, n, m)?;
    circuit.apply_block(fo.state_mut(), 0)?;
    for b in 1..=q {
        fo.query("X", "Y")?;
        circuit.apply_block(fo.state_mut(), b)?;
    }
    let beyond = ((q + 1)..=(1 << n)).map(|l| fo.number_project(l).map(|p| p.1.powi(2))).sum::<Result<f64, _>>()?;
    Ok(BoundReport::new(format!("number-support(q={q})"), "||P_{>q} psi|| = 0", 0.0, beyond.sqrt(), Direction::AtMost, 1e-10))
}

fn gf_rank(field: &Gf2w, mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col]);
        let pivot: Vec<u64> = rows[rank].iter().map(|&v| field.mul(v, inv)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let f = row[col];
                for (a, &p) in row.iter_mut().zip(&pivot) {
                    *a ^= field.mul(f, p);
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank
}

/// Whether evaluation at `points` is a bijection from coefficient vectors of
/// length `points.len()` to value vectors, which makes the values jointly uniform.
pub fn evaluation_is_bijective(field: &Gf2w, points: &[u64]) -> bool {
    let rows = points.iter().map(|&x| (0..points.len() as u128).map(|j| field.pow(x, j)).collect()).collect();
    gf_rank(field, rows) == points.len()
}

fn combinations(n: u64, k: usize, mut visit: impl FnMut(&[u64]) -> bool) -> bool {
    fn rec(start: u64, n: u64, k: usize, cur: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        for x in start..n {
            cur.push(x);
            let ok = rec(x + 1, n, k, cur, visit);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(0, n, k, &mut Vec::with_capacity(k), &mut visit)
}

/// Exhaustive check of exact k-wise independence for the polynomial family over GF(2^w):
/// every k-set of distinct points, every family member counted.
pub fn kwise_enumeration_check(k: usize, w: usize) -> Result<BoundReport, VerifyError> {
    let family = KWiseFamily::new(k, w)?;
    let members: Vec<_> = family.members().collect();
    let expected = members.len() as u64 >> (k * w);
    let mut worst = 0u64;
    combinations(1 << w, k, |pts| {
        let mut counts = vec![0u64; 1 << (k * w)];
        for h in &members {
            let v = pts.iter().fold(0usize, |acc, &x| acc << w | h.eval(x) as usize);
            counts[v] += 1;
        }
        worst = worst.max(counts.iter().map(|&c| c.abs_diff(expected)).max().unwrap_or(0));
        true
    });
    Ok(BoundReport::new(format!("kwise-enumeration(k={k},w={w})"), "count per value tuple = |H| / 2^{kw}", 0.0, worst as f64, Direction::AtMost, 0.0)
        .with_note(format!("{} members", members.len())))
}

/// Every k-set of distinct points of GF(2^w) gives an invertible evaluation map.
pub fn kwise_vandermonde_check(k: usize, w: usize) -> Result<BoundReport, VerifyError> {
    let field = Gf2w::new(w);
    let mut singular = 0u64;
    let mut sets = 0u64;
    combinations(1 << w, k, |pts| {
        sets += 1;
        if !evaluation_is_bijective(&field, pts) {
            singular += 1;
        }
        true
    });
    Ok(BoundReport::new(format!("kwise-vandermonde(k={k},w={w})"), "singular point sets = 0", 0.0, singular as f64, Direction::AtMost, 0.0)
        .with_note(format!("{sets} point sets checked")))
}

/// Master seed for a named sub-check derived from the run seed.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3)));
    r.next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_queries_or_zero_eps_give_zero_distance() {
        let base = HybridParams { n: 3, m: 1, queries: 0, eps: 0.3, circuits: 4, draws: 4 };
        assert_eq!(hybrid_bound_check(&base, 1).unwrap().report.measured, 0.0);
        let no_eps = HybridParams { queries: 2, eps: 0.0, ..base };
        assert_eq!(hybrid_bound_check(&no_eps, 1).unwrap().report.measured, 0.0);
    }

    #[test]
    fn identical_h_gives_identical_states() {
        let mut r = item_rng(3, 0);
        let c = RandomCircuit::new(&RELABEL_REGS, 1, &mut r);
        let h = FunctionTable::random(2, 2, &mut r);
        let a = relabel_final_state(&c, &h, &[2]).unwrap();
        let b = relabel_final_state(&c, &h, &[2]).unwrap();
        assert_eq!(a.max_deviation(&b), 0.0);
        assert!(a.norm() > 1e-3);
    }

    #[test]
    fn changing_h_on_the_set_is_visible() {
        let mut r = item_rng(4, 0);
        let c = RandomCircuit::new(&RELABEL_REGS, 1, &mut r);
        let h = FunctionTable::from_fn(2, 2, |x| x);
        let h2 = FunctionTable::from_fn(2, 2, |x| if x == 1 { 2 } else { x });
        let a = relabel_final_state(&c, &h, &[1]).unwrap();
        let b = relabel_final_state(&c, &h2, &[1]).unwrap();
        assert!(a.max_deviation(&b) > 1e-3);
        // Outside the set the relabelling is invisible.
        let h3 = FunctionTable::from_fn(2, 2, |x| if x == 3 { 0 } else { x });
        let d = relabel_final_state(&c, &h3, &[1]).unwrap();
        assert!(a.max_deviation(&d) < 1e-12);
    }

    #[test]
    fn partial_measure_tiny_matches_enumeration() {
        // n=2, c=2: four uniform 4-bit signatures.
        let exact = 1.0 - (16.0 * 15.0 * 14.0 * 13.0) / 16f64.powi(4);
        assert!((partial_measure_exact(2, 2) - exact).abs() < 1e-15);
        let (_, r) = partial_measure_check(2, 2, 20_000, 5).unwrap();
        assert!(r.near(exact), "{} vs {exact}", r.rate);
    }

    #[test]
    fn partial_measure_large_c_never_bad() {
        let (rep, r) = partial_measure_check(4, 8, 10_000, 6).unwrap();
        assert_eq!(r.wins, 0);
        assert!(rep.pass);
    }

    #[test]
    fn bz_bound_values() {
        assert_eq!(bz_bound(0, 8), 1.0 / 256.0);
        assert_eq!(bz_bound(1, 8), 2.0 / 256.0);
        assert_eq!(bz_bound(3, 8), 4.0 / 256.0);
        assert_eq!(bz_bound(4, 8), 8.0 / 256.0);
    }

    #[test]
    fn compressed_zero_queries_exact() {
        let rep = compressed_vs_dense_check(2, 1, 0, 5, 7).unwrap();
        assert_eq!(rep.measured, 0.0);
    }

    #[test]
    fn small_kwise_families_are_exact() {
        for (k, w) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
            let r = kwise_enumeration_check(k, w).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn repeated_points_are_singular() {
        let f = Gf2w::new(4);
        assert!(!evaluation_is_bijective(&f, &[1, 2, 1]));
        assert!(evaluation_is_bijective(&f, &[0, 1, 2]));
    }

    #[test]
    fn report_direction() {
        assert!(BoundReport::new("a", "", 1.0, 1.05, Direction::AtMost, 0.1).pass);
        assert!(!BoundReport::new("a", "", 1.0, 1.2, Direction::AtMost, 0.1).pass);
        assert!(BoundReport::new("a", "", 1.0, 0.95, Direction::AtLeast, 0.1).pass);
        assert!(!BoundReport::new("a", "", 1.0, 0.5, Direction::Equal, 0.1).pass);
    }
}
