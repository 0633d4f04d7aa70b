//! Oracle representations: the dense Fourier oracle, its sparse compressed
//! equivalent, the number operator, and blinded classical functions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::RngCore;
use thiserror::Error;

use crate::func::{BlindingSet, FunctionTable};
use crate::qsim::{low_mask, BitFunction, Projector, QState, RegisterLayout, SimError};

/// Name of the oracle register in a Fourier-oracle layout.
pub const F_REG: &str = "F";
/// Largest total width for which an explicit operator matrix is built.
pub const DENSE_MATRIX_QUBITS: usize = 10;
/// Amplitudes below this modulus are dropped from the compressed oracle.
pub const PRUNE_THRESHOLD: f64 = 1e-12;
/// Total squared mass the compressed oracle may drop before it fails its audit.
pub const PRUNE_BUDGET: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("register `{reg}` has width {got}, the oracle needs {expected}")]
    WidthMismatch { reg: String, expected: usize, got: usize },
    #[error("pruned mass {0:e} exceeds the audit budget")]
    PruneAudit(f64),
    #[error("blinding set covers {set} bits but the function takes {input}")]
    DomainMismatch { set: usize, input: usize },
}

fn check_width(layout: &RegisterLayout, reg: &str, expected: usize) -> Result<(), OracleError> {
    let got = layout.register(reg)?.width;
    if got != expected {
        return Err(OracleError::WidthMismatch { reg: reg.to_string(), expected, got });
    }
    Ok(())
}

/// Bit position of cell `x` inside the F register: cell 0 is most significant.
#[inline]
fn cell_shift(n: usize, m: usize, x: u64) -> usize {
    ((1usize << n) - 1 - x as usize) * m
}

/// Adversary registers jointly held with the purified oracle register F,
/// which has one `m`-qubit cell per input in `{0,1}^n`.
#[derive(Debug, Clone)]
pub struct FourierOracle {
    state: QState,
    n: usize,
    m: usize,
}

impl FourierOracle {
    /// Adversary registers all zero, F all zero.
    pub fn new(adversary: &[(&str, usize)], n: usize, m: usize) -> Result<Self, OracleError> {
        let mut regs: Vec<(String, usize)> = adversary.iter().map(|(s, w)| (s.to_string(), *w)).collect();
        regs.push((F_REG.to_string(), m << n));
        let layout = RegisterLayout::new(regs)?;
        Ok(Self { state: QState::zero(layout), n, m })
    }

    /// Joint state whose adversary part is `adv` and whose F register is zero.
    pub fn with_adversary_state(adv: &QState, n: usize, m: usize) -> Result<Self, OracleError> {
        let regs: Vec<(&str, usize)> = adv.layout().registers().iter().map(|r| (r.name.as_str(), r.width)).collect();
        let mut fo = Self::new(&regs, n, m)?;
        let shift = m << n;
        let amps = fo.state.amplitudes_mut();
        amps[0] = Complex64::new(0.0, 0.0);
        for (i, a) in adv.amplitudes().iter().enumerate() {
            amps[i << shift] = *a;
        }
        Ok(fo)
    }

    pub fn input_bits(&self) -> usize {
        self.n
    }

    pub fn cell_bits(&self) -> usize {
        self.m
    }

    pub fn state(&self) -> &QState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut QState {
        &mut self.state
    }

    fn f_register(&self) -> crate::qsim::Register {
        self.state.layout().register(F_REG).expect("F register present").clone()
    }

    /// Content of cell `x` in the F value `f`.
    pub fn cell(&self, f: u64, x: u64) -> u64 {
        (f >> cell_shift(self.n, self.m, x)) & low_mask(self.m)
    }

    /// Number of nonzero cells in the F value `f`.
    pub fn nonzero_cells(&self, f: u64) -> usize {
        (0..1u64 << self.n).filter(|&x| self.cell(f, x) != 0).count()
    }

    /// One Fourier-oracle query: Hadamard on Y, `F_x ^= Y` controlled on X = x, Hadamard on Y.
    pub fn query(&mut self, x_reg: &str, y_reg: &str) -> Result<(), OracleError> {
        check_width(self.state.layout(), x_reg, self.n)?;
        check_width(self.state.layout(), y_reg, self.m)?;
        self.state.layout().resolve(&[x_reg, y_reg, F_REG])?;
        let (n, m) = (self.n, self.m);
        let xr = self.state.layout().register(x_reg)?.clone();
        let yr = self.state.layout().register(y_reg)?.clone();
        let fr = self.f_register();
        self.state.apply_hadamard(y_reg)?;
        self.state.permute(|i| {
            let y = yr.get(i);
            if y == 0 {
                return i;
            }
            let f = fr.get(i) ^ (y << cell_shift(n, m, xr.get(i)));
            fr.set(i, f)
        });
        self.state.apply_hadamard(y_reg)?;
        Ok(())
    }

    /// The same query written literally as `H_F U^O H_F`, with `U^O` the standard
    /// oracle `|x>|y>|f> -> |x>|y xor f(x)>|f>` reading f from the F register.
    pub fn query_literal(&mut self, x_reg: &str, y_reg: &str) -> Result<(), OracleError> {
        check_width(self.state.layout(), x_reg, self.n)?;
        check_width(self.state.layout(), y_reg, self.m)?;
        let (n, m) = (self.n, self.m);
        let xr = self.state.layout().register(x_reg)?.clone();
        let yr = self.state.layout().register(y_reg)?.clone();
        let fr = self.f_register();
        self.state.apply_hadamard(F_REG)?;
        self.state.permute(|i| {
            let fx = (fr.get(i) >> cell_shift(n, m, xr.get(i))) & low_mask(m);
            yr.set(i, yr.get(i) ^ fx)
        });
        self.state.apply_hadamard(F_REG)?;
        Ok(())
    }

    /// Projector onto basis states with exactly `l` nonzero cells.
    pub fn number_projector(&self, l: usize) -> Projector {
        let (n, m) = (self.n, self.m);
        Projector::new(&[F_REG], move |v| {
            (0..1u64 << n).filter(|&x| (v[0] >> cell_shift(n, m, x)) & low_mask(m) != 0).count() == l
        })
    }

    pub fn number_project(&self, l: usize) -> Result<(QState, f64), OracleError> {
        Ok(self.state.project(&self.number_projector(l))?)
    }

    /// Largest number of nonzero cells over the state's support.
    pub fn max_support_size(&self) -> usize {
        let fr = self.f_register();
        self.state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > PRUNE_THRESHOLD * PRUNE_THRESHOLD)
            .map(|(i, _)| self.nonzero_cells(fr.get(i)))
            .max()
            .unwrap_or(0)
    }

    /// Marginal distribution over all adversary registers.
    pub fn adversary_distribution(&self) -> Vec<f64> {
        let shift = self.m << self.n;
        let mut out = vec![0.0; self.state.amplitudes().len() >> shift];
        for (i, a) in self.state.amplitudes().iter().enumerate() {
            out[i >> shift] += a.norm_sqr();
        }
        out
    }

    /// Moves F back to the computational picture, measures every cell and
    /// returns the resulting function with the adversary's residual state.
    pub fn sample_function(&self, rng: &mut dyn RngCore) -> Result<(FunctionTable, QState), OracleError> {
        let mut s = self.state.clone();
        s.apply_hadamard(F_REG)?;
        let f = s.measure(F_REG, rng)?;
        let table = FunctionTable::from_fn(self.n, self.m, |x| self.cell(f, x));
        let mut residual = s.slice(&[(F_REG, f)])?;
        residual.normalize();
        Ok((table, residual))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorTarget {
    FourierQuery,
    Identity,
}

/// Spectral norm of `[N_F, U]` for `U` the Fourier-oracle query (or the
/// identity) on the layout `X(n), Y(m), F(m 2^n)`, from the explicit matrix.
pub fn commutator_norm(n: usize, m: usize, target: CommutatorTarget) -> Result<f64, OracleError> {
    let total = n + m + (m << n);
    if total > DENSE_MATRIX_QUBITS {
        return Err(SimError::TooManyQubits { requested: total, cap: DENSE_MATRIX_QUBITS }.into());
    }
    let base = FourierOracle::new(&[("X", n), ("Y", m)], n, m)?;
    let dim = base.state.layout().dim();
    let fr = base.f_register();
    let number: Vec<f64> = (0..dim).map(|i| base.nonzero_cells(fr.get(i)) as f64).collect();
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..dim {
        let mut col = base.clone();
        let amps = col.state.amplitudes_mut();
        amps[0] = Complex64::new(0.0, 0.0);
        amps[j] = Complex64::new(1.0, 0.0);
        if target == CommutatorTarget::FourierQuery {
            col.query("X", "Y")?;
        }
        for (i, a) in col.state.amplitudes().iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    let c = DMatrix::from_fn(dim, dim, |i, j| u[(i, j)] * (number[i] - number[j]));
    Ok(c.singular_values().max())
}

/// Set of `(x, nonzero cell value)` pairs, sorted by `x`.
pub type Database = Vec<(u64, u64)>;

fn toggle(db: &Database, x: u64, y: u64) -> Database {
    let mut out = db.clone();
    match out.binary_search_by_key(&x, |e| e.0) {
        Ok(pos) => {
            let v = out[pos].1 ^ y;
            if v == 0 {
                out.remove(pos);
            } else {
                out[pos].1 = v;
            }
        }
        Err(pos) => out.insert(pos, (x, y)),
    }
    out
}

/// Sparse Fourier oracle: one adversary vector per database.
#[derive(Debug, Clone)]
pub struct CompressedOracle {
    layout: RegisterLayout,
    n: usize,
    m: usize,
    branches: BTreeMap<Database, QState>,
    pruned: f64,
    queries: usize,
}

impl CompressedOracle {
    pub fn new(adversary: &[(&str, usize)], n: usize, m: usize) -> Result<Self, OracleError> {
        let layout = RegisterLayout::new(adversary.iter().map(|(s, w)| (*s, *w)))?;
        Self::from_adversary_state(QState::zero(layout), n, m)
    }

    pub fn from_adversary_state(state: QState, n: usize, m: usize) -> Result<Self, OracleError> {
        let layout = state.layout().clone();
        let mut branches = BTreeMap::new();
        branches.insert(Database::new(), state);
        Ok(Self { layout, n, m, branches, pruned: 0.0, queries: 0 })
    }

    /// Applies an adversary operation to every branch.
    pub fn apply<F>(&mut self, mut op: F) -> Result<(), OracleError>
    where
        F: FnMut(&mut QState) -> Result<(), SimError>,
    {
        for s in self.branches.values_mut() {
            op(s)?;
        }
        Ok(())
    }

    pub fn query(&mut self, x_reg: &str, y_reg: &str) -> Result<(), OracleError> {
        check_width(&self.layout, x_reg, self.n)?;
        check_width(&self.layout, y_reg, self.m)?;
        self.layout.resolve(&[x_reg, y_reg])?;
        let xr = self.layout.register(x_reg)?.clone();
        let yr = self.layout.register(y_reg)?.clone();
        let zero = Complex64::new(0.0, 0.0);
        let mut out: BTreeMap<Database, Vec<Complex64>> = BTreeMap::new();
        for (db, s) in &self.branches {
            let mut t = s.clone();
            t.apply_hadamard(y_reg)?;
            for (i, a) in t.amplitudes().iter().enumerate() {
                if *a == zero {
                    continue;
                }
                let y = yr.get(i);
                let key = if y == 0 { db.clone() } else { toggle(db, xr.get(i), y) };
                out.entry(key).or_insert_with(|| vec![zero; self.layout.dim()])[i] += a;
            }
        }
        let mut branches = BTreeMap::new();
        for (db, amps) in out {
            let mut s = QState::from_amplitudes(self.layout.clone(), amps)?;
            s.apply_hadamard(y_reg)?;
            let mut kept = false;
            for a in s.amplitudes_mut() {
                let p = a.norm_sqr();
                if p > 0.0 && a.norm() < PRUNE_THRESHOLD {
                    self.pruned += p;
                    *a = zero;
                } else if p > 0.0 {
                    kept = true;
                }
            }
            if kept {
                branches.insert(db, s);
            }
        }
        self.branches = branches;
        self.queries += 1;
        if self.pruned >= PRUNE_BUDGET {
            return Err(OracleError::PruneAudit(self.pruned));
        }
        Ok(())
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn max_database_size(&self) -> usize {
        self.branches.keys().map(|d| d.len()).max().unwrap_or(0)
    }

    pub fn databases(&self) -> impl Iterator<Item = &Database> {
        self.branches.keys()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.branches.values().map(|s| s.norm_sqr()).sum()
    }

    pub fn adversary_distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.dim()];
        for s in self.branches.values() {
            for (o, a) in out.iter_mut().zip(s.amplitudes()) {
                *o += a.norm_sqr();
            }
        }
        out
    }

    /// Embeds the superposition into the dense Fourier-oracle layout.
    pub fn to_dense(&self) -> Result<FourierOracle, OracleError> {
        let regs: Vec<(&str, usize)> = self.layout.registers().iter().map(|r| (r.name.as_str(), r.width)).collect();
        let mut fo = FourierOracle::new(&regs, self.n, self.m)?;
        let shift = self.m << self.n;
        let amps = fo.state.amplitudes_mut();
        amps[0] = Complex64::new(0.0, 0.0);
        for (db, s) in &self.branches {
            let f = db.iter().fold(0u64, |acc, &(x, y)| acc | y << cell_shift(self.n, self.m, x));
            for (i, a) in s.amplitudes().iter().enumerate() {
                amps[(i << shift) | f as usize] += a;
            }
        }
        Ok(fo)
    }
}

/// `x -> 0^l || 1` on blinded inputs, `x -> f(x) || 0` elsewhere.
#[derive(Debug, Clone)]
pub struct Blinded<F> {
    inner: F,
    set: BlindingSet,
}

pub fn blind_wrap<F: BitFunction>(f: F, set: BlindingSet) -> Result<Blinded<F>, OracleError> {
    if set.domain_bits() != f.input_bits() {
        return Err(OracleError::DomainMismatch { set: set.domain_bits(), input: f.input_bits() });
    }
    Ok(Blinded { inner: f, set })
}

impl<F> Blinded<F> {
    pub fn blinding(&self) -> &BlindingSet {
        &self.set
    }
}

impl<F: BitFunction> BitFunction for Blinded<F> {
    fn input_bits(&self) -> usize {
        self.inner.input_bits()
    }
    fn output_bits(&self) -> usize {
        self.inner.output_bits() + 1
    }
    fn eval(&self, x: u64) -> u64 {
        if self.set.chi(x) {
            1
        } else {
            self.inner.eval(x) << 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::tv_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_query_writes_fourier_label() {
        // |x>|phi_y> on the first query leaves |y> in cell x and nothing elsewhere.
        for x in 0..4u64 {
            for y in 1..4u64 {
                let mut fo = FourierOracle::new(&[("X", 2), ("Y", 2)], 2, 2).unwrap();
                let layout = fo.state().layout().clone();
                *fo.state_mut() = QState::from_values(layout, &[("X", x), ("Y", y)]).unwrap();
                fo.state_mut().apply_hadamard("Y").unwrap();
                fo.query("X", "Y").unwrap();
                let p = fo.state().probabilities(&["F"]).unwrap();
                let f = p.iter().position(|&v| v > 0.5).unwrap() as u64;
                assert!((p[f as usize] - 1.0).abs() < 1e-12);
                for z in 0..4 {
                    assert_eq!(fo.cell(f, z), if z == x { y } else { 0 });
                }
            }
        }
    }

    #[test]
    fn uniform_y_leaves_f_untouched() {
        let mut fo = FourierOracle::new(&[("X", 2), ("Y", 1)], 2, 1).unwrap();
        fo.state_mut().apply_hadamard("X").unwrap();
        fo.state_mut().apply_hadamard("Y").unwrap();
        let before = fo.state().clone();
        fo.query("X", "Y").unwrap();
        assert!(fo.state().max_deviation(&before) < 1e-12);
    }

    #[test]
    fn literal_and_fast_queries_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let adv = QState::random(RegisterLayout::new([("X", 2), ("Y", 1)]).unwrap(), &mut rng);
            let mut a = FourierOracle::with_adversary_state(&adv, 2, 1).unwrap();
            a.state_mut().apply_gate(3, &crate::qsim::random_gate(&mut rng));
            let mut b = a.clone();
            a.query("X", "Y").unwrap();
            b.query_literal("X", "Y").unwrap();
            assert!(a.state().max_deviation(b.state()) < 1e-12);
        }
    }

    #[test]
    fn number_operator_support_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut fo = FourierOracle::new(&[("X", 2), ("Y", 1)], 2, 1).unwrap();
        let (_, n0) = fo.number_project(0).unwrap();
        assert!((n0 - 1.0).abs() < 1e-12);
        for q in 1..=2 {
            for qb in 0..3 {
                fo.state_mut().apply_gate(4 + qb, &crate::qsim::random_gate(&mut rng));
            }
            fo.query("X", "Y").unwrap();
            let (_, nq) = fo.number_project(q + 1).unwrap();
            assert!(nq < 1e-10);
            let total: f64 = (0..=4).map(|l| fo.number_project(l).unwrap().1.powi(2)).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn commutator_norms() {
        for (n, m) in [(1, 1), (2, 1)] {
            let c = commutator_norm(n, m, CommutatorTarget::FourierQuery).unwrap();
            assert!((c - 1.0).abs() < 1e-9, "{c}");
            assert!(commutator_norm(n, m, CommutatorTarget::Identity).unwrap() < 1e-12);
        }
        assert!(commutator_norm(3, 1, CommutatorTarget::Identity).is_err());
    }

    #[test]
    fn unqueried_oracle_samples_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fo = FourierOracle::new(&[("X", 2), ("Y", 1)], 2, 1).unwrap();
        let mut counts = [0f64; 16];
        let trials = 10_000;
        for _ in 0..trials {
            let (t, _) = fo.sample_function(&mut rng).unwrap();
            counts[t.values().iter().fold(0, |a, &v| a * 2 + v as usize)] += 1.0;
        }
        let e = trials as f64 / 16.0;
        let chi2: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
        // p > 0.001 for 15 degrees of freedom.
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }

    #[test]
    fn classical_query_is_recorded_consistently() {
        // Query on |x0>|phi_y> for every y and read the output in the standard basis:
        // equivalently, prepare Y = |0>, Hadamard-free output y0 = f(x0).
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mut fo = FourierOracle::new(&[("X", 2), ("Y", 1)], 2, 1).unwrap();
            let layout = fo.state().layout().clone();
            *fo.state_mut() = QState::from_values(layout, &[("X", 2)]).unwrap();
            fo.query("X", "Y").unwrap();
            let y0 = fo.state_mut().measure("Y", &mut rng).unwrap();
            let (t, _) = fo.sample_function(&mut rng).unwrap();
            assert_eq!(t.eval(2), y0);
        }
    }

    #[test]
    fn dense_and_compressed_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layout = RegisterLayout::new([("X", 2), ("Y", 1), ("E", 1)]).unwrap();
        for _ in 0..10 {
            let adv = QState::random(layout.clone(), &mut rng);
            let mut dense = FourierOracle::with_adversary_state(&adv, 2, 1).unwrap();
            let mut sparse = CompressedOracle::from_adversary_state(adv, 2, 1).unwrap();
            for q in 1..=2 {
                let gates: Vec<_> = (0..4).map(|_| crate::qsim::random_gate(&mut rng)).collect();
                for (k, g) in gates.iter().enumerate() {
                    dense.state_mut().apply_gate(4 + k, g);
                }
                sparse
                    .apply(|s| {
                        for (k, g) in gates.iter().enumerate() {
                            s.apply_gate(k, g);
                        }
                        Ok(())
                    })
                    .unwrap();
                dense.query("X", "Y").unwrap();
                sparse.query("X", "Y").unwrap();
                assert!(sparse.max_database_size() <= q);
                let tv = tv_distance(&dense.adversary_distribution(), &sparse.adversary_distribution()).unwrap();
                assert!(tv < 1e-9);
                assert!(sparse.to_dense().unwrap().state().max_deviation(dense.state()) < 1e-10);
            }
        }
    }

    #[test]
    fn compressed_uniform_y_is_noop() {
        let mut co = CompressedOracle::new(&[("X", 2), ("Y", 1)], 2, 1).unwrap();
        co.apply(|s| s.apply_hadamard("Y")).unwrap();
        co.apply(|s| s.apply_hadamard("X")).unwrap();
        co.query("X", "Y").unwrap();
        assert_eq!(co.databases().collect::<Vec<_>>(), vec![&Database::new()]);
    }

    #[test]
    fn blinding_convention() {
        let f = FunctionTable::new(2, 2, vec![0b01, 0b10, 0b11, 0b00]).unwrap();
        let none = blind_wrap(f.clone(), BlindingSet::empty(2).unwrap()).unwrap();
        assert!((0..4).all(|x| none.eval(x) == f.eval(x) << 1));
        let all = blind_wrap(f.clone(), BlindingSet::from_predicate(2, |_| true).unwrap()).unwrap();
        assert!((0..4).all(|x| all.eval(x) == 0b001));
        let one = blind_wrap(f.clone(), BlindingSet::from_predicate(2, |x| x == 0b10).unwrap()).unwrap();
        assert_eq!(one.eval(0b10), 0b001);
        assert_eq!(one.eval(0b11), 0b000);
        assert_eq!(one.output_bits(), 3);
        assert!(blind_wrap(f, BlindingSet::empty(3).unwrap()).is_err());
    }
}
