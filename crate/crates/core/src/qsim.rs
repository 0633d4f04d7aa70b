//! Dense state-vector simulation over named registers.
//!
//! Basis indices are laid out with the first register in the most significant
//! position. A register value is read MSB-first from its own qubits, and qubit
//! `j` of the whole state is bit `j` of the basis index (qubit 0 is the least
//! significant bit of the last register).

use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rustfft::FftPlanner;
use thiserror::Error;

/// Qubit cap used when the environment does not override it.
pub const DEFAULT_MAX_QUBITS: usize = 26;
/// Environment variable that overrides the qubit cap.
pub const MAX_QUBITS_ENV: &str = "BULAB_MAX_QUBITS";
/// Tolerance on the squared norm of a normalized state.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance on the squared norm accepted before a measurement.
pub const MEASURE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("duplicate register name `{0}`")]
    DuplicateRegister(String),
    #[error("register `{0}` has zero width")]
    EmptyRegister(String),
    #[error("layout needs {requested} qubits but the cap is {cap}")]
    TooManyQubits { requested: usize, cap: usize },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("invalid basis label `{0}`")]
    InvalidLabel(String),
    #[error("state norm squared {0} is not 1")]
    NotNormalized(f64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("registers overlap: `{0}`")]
    Overlap(String),
}

/// Current qubit cap, honouring [`MAX_QUBITS_ENV`].
pub fn max_qubits() -> usize {
    std::env::var(MAX_QUBITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub width: usize,
    /// Position of the register's least significant qubit.
    pub offset: usize,
}

impl Register {
    pub fn mask(&self) -> u64 {
        low_mask(self.width)
    }

    #[inline]
    pub fn get(&self, idx: usize) -> u64 {
        ((idx >> self.offset) as u64) & self.mask()
    }

    #[inline]
    pub fn set(&self, idx: usize, value: u64) -> usize {
        let m = (self.mask() as usize) << self.offset;
        (idx & !m) | (((value & self.mask()) as usize) << self.offset)
    }

    /// Global qubit index of bit `bit` (0 = least significant) of this register.
    pub fn qubit(&self, bit: usize) -> usize {
        self.offset + bit
    }
}

pub(crate) fn low_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total_width: usize,
}

impl RegisterLayout {
    pub fn new<S: Into<String>, I: IntoIterator<Item = (S, usize)>>(
        registers: I,
    ) -> Result<Self, SimError> {
        let named: Vec<(String, usize)> = registers.into_iter().map(|(n, w)| (n.into(), w)).collect();
        let mut seen = HashSet::new();
        for (name, width) in &named {
            if !seen.insert(name.clone()) {
                return Err(SimError::DuplicateRegister(name.clone()));
            }
            if *width == 0 {
                return Err(SimError::EmptyRegister(name.clone()));
            }
        }
        let total_width: usize = named.iter().map(|(_, w)| w).sum();
        let cap = max_qubits();
        if total_width > cap {
            return Err(SimError::TooManyQubits { requested: total_width, cap });
        }
        let mut offset = total_width;
        let registers = named
            .into_iter()
            .map(|(name, width)| {
                offset -= width;
                Register { name, width, offset }
            })
            .collect();
        Ok(Self { registers, total_width })
    }

    pub fn total_width(&self) -> usize {
        self.total_width
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_width
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register, SimError> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| SimError::UnknownRegister(name.to_string()))
    }

    /// Concatenated value of several registers, first register most significant.
    pub fn value_of(&self, idx: usize, regs: &[&Register]) -> u64 {
        regs.iter().fold(0u64, |acc, r| (acc << r.width) | r.get(idx))
    }

    /// Inverse of [`value_of`](Self::value_of): writes `value` into the registers.
    pub fn with_value(&self, mut idx: usize, regs: &[&Register], mut value: u64) -> usize {
        for r in regs.iter().rev() {
            idx = r.set(idx, value);
            value >>= r.width;
        }
        idx
    }

    pub fn resolve(&self, names: &[&str]) -> Result<Vec<&Register>, SimError> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(SimError::Overlap(n.to_string()));
                }
                self.register(n)
            })
            .collect()
    }

    /// Layout with the named registers removed, preserving order.
    pub fn without(&self, names: &[&str]) -> Result<RegisterLayout, SimError> {
        for n in names {
            self.register(n)?;
        }
        RegisterLayout::new(
            self.registers
                .iter()
                .filter(|r| !names.contains(&r.name.as_str()))
                .map(|r| (r.name.clone(), r.width)),
        )
    }
}

/// Single-qubit gate as a row-major 2x2 matrix.
pub type Gate1 = [[Complex64; 2]; 2];

pub fn hadamard_gate() -> Gate1 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Haar-random single-qubit unitary.
pub fn random_gate(rng: &mut dyn RngCore) -> Gate1 {
    use std::f64::consts::PI;
    let u: f64 = rng.random();
    let theta = u.sqrt().asin() * 2.0;
    let phi = rng.random::<f64>() * 2.0 * PI;
    let lambda = rng.random::<f64>() * 2.0 * PI;
    let alpha = rng.random::<f64>() * 2.0 * PI;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let g = Complex64::from_polar(1.0, alpha);
    [
        [g * c, -g * Complex64::from_polar(s, lambda)],
        [g * Complex64::from_polar(s, phi), g * Complex64::from_polar(c, phi + lambda)],
    ]
}

/// A total function on bit strings, the shape every oracle has.
pub trait BitFunction: Send + Sync {
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    fn eval(&self, x: u64) -> u64;
}

impl<T: BitFunction + ?Sized> BitFunction for Arc<T> {
    fn input_bits(&self) -> usize {
        (**self).input_bits()
    }
    fn output_bits(&self) -> usize {
        (**self).output_bits()
    }
    fn eval(&self, x: u64) -> u64 {
        (**self).eval(x)
    }
}

impl<T: BitFunction + ?Sized> BitFunction for &T {
    fn input_bits(&self) -> usize {
        (**self).input_bits()
    }
    fn output_bits(&self) -> usize {
        (**self).output_bits()
    }
    fn eval(&self, x: u64) -> u64 {
        (**self).eval(x)
    }
}

type Predicate = Arc<dyn Fn(&[u64]) -> bool + Send + Sync>;

/// Projector onto the basis states whose register values satisfy a predicate.
#[derive(Clone)]
pub struct Projector {
    registers: Vec<String>,
    predicate: Predicate,
}

impl std::fmt::Debug for Projector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Projector").field("registers", &self.registers).finish()
    }
}

impl Projector {
    pub fn new<F>(registers: &[&str], predicate: F) -> Self
    where
        F: Fn(&[u64]) -> bool + Send + Sync + 'static,
    {
        Self {
            registers: registers.iter().map(|s| s.to_string()).collect(),
            predicate: Arc::new(predicate),
        }
    }

    pub fn identity() -> Self {
        Self::new(&[], |_| true)
    }

    pub fn complement(&self) -> Self {
        let p = self.predicate.clone();
        Self { registers: self.registers.clone(), predicate: Arc::new(move |v| !p(v)) }
    }

    pub fn accepts(&self, values: &[u64]) -> bool {
        (self.predicate)(values)
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }
}

#[derive(Debug, Clone)]
pub struct QState {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
    normalized: bool,
}

impl QState {
    /// All-zero basis state.
    pub fn zero(layout: RegisterLayout) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { layout, amps, normalized: true }
    }

    /// Basis state from a bit string covering the whole layout, MSB first.
    pub fn init_basis(layout: RegisterLayout, label: &str) -> Result<Self, SimError> {
        if label.len() != layout.total_width() {
            return Err(SimError::WidthMismatch { expected: layout.total_width(), got: label.len() });
        }
        if !label.chars().all(|c| c == '0' || c == '1') {
            return Err(SimError::InvalidLabel(label.to_string()));
        }
        let idx = label.chars().fold(0usize, |acc, c| (acc << 1) | (c == '1') as usize);
        let mut s = Self::zero(layout);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Basis state with the given register values; unnamed registers are zero.
    pub fn from_values(layout: RegisterLayout, values: &[(&str, u64)]) -> Result<Self, SimError> {
        let mut idx = 0usize;
        for (name, v) in values {
            let r = layout.register(name)?;
            if *v > r.mask() {
                return Err(SimError::WidthMismatch { expected: r.width, got: 64 - v.leading_zeros() as usize });
            }
            idx = r.set(idx, *v);
        }
        let mut s = Self::zero(layout);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self, SimError> {
        if amps.len() != layout.dim() {
            return Err(SimError::WidthMismatch { expected: layout.dim(), got: amps.len() });
        }
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        Ok(Self { layout, amps, normalized: (n - 1.0).abs() <= NORM_TOL })
    }

    /// Haar-like random state (normalized complex Gaussian vector).
    pub fn random(layout: RegisterLayout, rng: &mut dyn RngCore) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        let mut amps: Vec<Complex64> = (0..layout.dim())
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= n);
        Self { layout, amps, normalized: true }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// False for projection outputs that have not been renormalized.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rescale to unit norm. Returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self.normalized = true;
        n
    }

    pub fn inner(&self, other: &QState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_deviation(&self, other: &QState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn apply_gate(&mut self, qubit: usize, g: &Gate1) {
        let bit = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = g[0][0] * a + g[0][1] * b;
                self.amps[i | bit] = g[1][0] * a + g[1][1] * b;
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    pub fn apply_hadamard(&mut self, register: &str) -> Result<(), SimError> {
        let r = self.layout.register(register)?.clone();
        let h = hadamard_gate();
        for b in 0..r.width {
            self.apply_gate(r.qubit(b), &h);
        }
        Ok(())
    }

    /// Applies the basis permutation `idx -> perm(idx)`. The caller guarantees bijectivity.
    pub fn permute(&mut self, perm: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if a.re != 0.0 || a.im != 0.0 {
                out[perm(i)] = *a;
            }
        }
        self.amps = out;
    }

    /// `|x>|y> -> |x>|y xor f(x)>`.
    pub fn apply_xor_oracle(&mut self, f: &dyn BitFunction, in_reg: &str, out_reg: &str) -> Result<(), SimError> {
        self.apply_xor_oracle_multi(f, &[in_reg], out_reg)
    }

    /// XOR oracle whose input is the concatenation of several registers.
    pub fn apply_xor_oracle_multi(&mut self, f: &dyn BitFunction, in_regs: &[&str], out_reg: &str) -> Result<(), SimError> {
        let mut all = in_regs.to_vec();
        all.push(out_reg);
        self.layout.resolve(&all)?;
        let ins = self.layout.resolve(in_regs)?;
        let in_width: usize = ins.iter().map(|r| r.width).sum();
        if in_width != f.input_bits() {
            return Err(SimError::WidthMismatch { expected: f.input_bits(), got: in_width });
        }
        let out = self.layout.register(out_reg)?.clone();
        if out.width != f.output_bits() {
            return Err(SimError::WidthMismatch { expected: f.output_bits(), got: out.width });
        }
        let table: Vec<u64> = (0..1u64 << in_width).map(|x| f.eval(x)).collect();
        let layout = self.layout.clone();
        let ins: Vec<Register> = ins.into_iter().cloned().collect();
        let refs: Vec<&Register> = ins.iter().collect();
        self.permute(|i| {
            let x = layout.value_of(i, &refs);
            out.set(i, out.get(i) ^ table[x as usize])
        });
        Ok(())
    }

    fn fft_register(&mut self, register: &str, inverse: bool) -> Result<(), SimError> {
        let r = self.layout.register(register)?.clone();
        let n = 1usize << r.width;
        let mut planner = FftPlanner::<f64>::new();
        // QFT uses e^{+2 pi i xk/N}, which is rustfft's inverse direction.
        let fft = if inverse { planner.plan_fft_forward(n) } else { planner.plan_fft_inverse(n) };
        let scale = 1.0 / (n as f64).sqrt();
        let stride = 1usize << r.offset;
        let reg_mask = (n - 1) << r.offset;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for base in 0..self.amps.len() {
            if base & reg_mask != 0 {
                continue;
            }
            for (k, b) in buf.iter_mut().enumerate() {
                *b = self.amps[base + k * stride];
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                self.amps[base + k * stride] = b * scale;
            }
        }
        Ok(())
    }

    /// QFT over Z_{2^w}: `|x> -> 2^{-w/2} sum_k e^{2 pi i xk / 2^w} |k>`.
    pub fn apply_qft(&mut self, register: &str) -> Result<(), SimError> {
        self.fft_register(register, false)
    }

    pub fn apply_inverse_qft(&mut self, register: &str) -> Result<(), SimError> {
        self.fft_register(register, true)
    }

    /// Marginal distribution of the concatenated value of `registers`.
    pub fn probabilities(&self, registers: &[&str]) -> Result<Vec<f64>, SimError> {
        let regs = self.layout.resolve(registers)?;
        let width: usize = regs.iter().map(|r| r.width).sum();
        let mut p = vec![0.0; 1usize << width];
        for (i, a) in self.amps.iter().enumerate() {
            p[self.layout.value_of(i, &regs) as usize] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Distribution over full basis labels.
    pub fn distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Projective measurement of one register. Returns the outcome value.
    pub fn measure(&mut self, register: &str, rng: &mut dyn RngCore) -> Result<u64, SimError> {
        self.measure_many(&[register], rng)
    }

    /// Measures the concatenation of several registers.
    pub fn measure_many(&mut self, registers: &[&str], rng: &mut dyn RngCore) -> Result<u64, SimError> {
        let ns = self.norm_sqr();
        if (ns - 1.0).abs() > MEASURE_TOL {
            return Err(SimError::NotNormalized(ns));
        }
        let p = self.probabilities(registers)?;
        let outcome = sample_index(&p, rng) as u64;
        let regs: Vec<Register> = self.layout.resolve(registers)?.into_iter().cloned().collect();
        let refs: Vec<&Register> = regs.iter().collect();
        let zero = Complex64::new(0.0, 0.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if self.layout.value_of(i, &refs) != outcome {
                *a = zero;
            }
        }
        self.normalize();
        Ok(outcome)
    }

    /// Component inside the projector image, with its norm. Not renormalized.
    pub fn project(&self, proj: &Projector) -> Result<(QState, f64), SimError> {
        let names: Vec<&str> = proj.registers().iter().map(|s| s.as_str()).collect();
        let regs = self.layout.resolve(&names)?;
        let mut vals = vec![0u64; regs.len()];
        let zero = Complex64::new(0.0, 0.0);
        let amps: Vec<Complex64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                for (v, r) in vals.iter_mut().zip(&regs) {
                    *v = r.get(i);
                }
                if proj.accepts(&vals) {
                    *a
                } else {
                    zero
                }
            })
            .collect();
        let out = QState { layout: self.layout.clone(), amps, normalized: false };
        let n = out.norm();
        Ok((out, n))
    }

    /// Conditional state of the remaining registers given fixed values of `fixed`.
    /// The result is unnormalized.
    pub fn slice(&self, fixed: &[(&str, u64)]) -> Result<QState, SimError> {
        let names: Vec<&str> = fixed.iter().map(|(n, _)| *n).collect();
        let rest = self.layout.without(&names)?;
        let regs = self.layout.resolve(&names)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); rest.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            if regs.iter().zip(fixed).all(|(r, (_, v))| r.get(i) == *v) {
                let mut j = 0usize;
                for rr in rest.registers() {
                    let src = self.layout.register(&rr.name)?;
                    j = rr.set(j, src.get(i));
                }
                amps[j] = *a;
            }
        }
        Ok(QState { layout: rest, amps, normalized: false })
    }
}

/// Samples an index from a (possibly slightly unnormalized) weight vector.
pub fn sample_index(p: &[f64], rng: &mut dyn RngCore) -> usize {
    let total: f64 = p.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in p.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

/// Total variation distance, half the l1 difference.
pub fn tv_distance(d1: &[f64], d2: &[f64]) -> Result<f64, SimError> {
    if d1.len() != d2.len() {
        return Err(SimError::InvalidDistribution(format!("lengths {} and {}", d1.len(), d2.len())));
    }
    for d in [d1, d2] {
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > NORM_TOL || d.iter().any(|&x| x < -NORM_TOL) {
            return Err(SimError::InvalidDistribution(format!("total mass {s}")));
        }
    }
    Ok(0.5 * d1.iter().zip(d2).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Formats `value` as a `width`-bit string, MSB first.
pub fn bits(value: u64, width: usize) -> String {
    (0..width).rev().map(|b| if value >> b & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lay(regs: &[(&str, usize)]) -> RegisterLayout {
        RegisterLayout::new(regs.iter().map(|(n, w)| (*n, *w))).unwrap()
    }

    #[test]
    fn basis_states() {
        let s = QState::init_basis(lay(&[("X", 1), ("Y", 1)]), "00").unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let s = QState::init_basis(lay(&[("X", 2)]), "10").unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0));
        assert!(matches!(
            QState::init_basis(lay(&[("X", 2)]), "000"),
            Err(SimError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn layout_rules() {
        assert!(matches!(RegisterLayout::new([("A", 1), ("A", 2)]), Err(SimError::DuplicateRegister(_))));
        assert!(matches!(RegisterLayout::new([("A", 0)]), Err(SimError::EmptyRegister(_))));
        assert!(matches!(RegisterLayout::new([("A", 40)]), Err(SimError::TooManyQubits { .. })));
        let l = lay(&[("X", 3), ("Y", 2)]);
        assert_eq!(l.total_width(), 5);
        let s = QState::from_values(l, &[("X", 0b101), ("Y", 0b10)]).unwrap();
        assert_eq!(s.amplitudes()[0b10110], c(1.0));
    }

    #[test]
    fn hadamard_basics() {
        let mut s = QState::zero(lay(&[("X", 1)]));
        s.apply_hadamard("X").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(h)).norm() < 1e-12);
        assert!((s.amplitudes()[1] - c(h)).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = QState::random(lay(&[("X", 3), ("Y", 2)]), &mut rng);
        let mut t = r.clone();
        t.apply_hadamard("X").unwrap();
        t.apply_hadamard("X").unwrap();
        assert!(t.max_deviation(&r) < 1e-10);
        assert!(matches!(t.apply_hadamard("Z"), Err(SimError::UnknownRegister(_))));
    }

    #[test]
    fn fourier_basis_orthonormal() {
        // <phi_y|phi_y'> computed from the simulator against the closed form.
        let m = 3;
        let states: Vec<QState> = (0..8u64)
            .map(|y| {
                let mut s = QState::from_values(lay(&[("Y", m)]), &[("Y", y)]).unwrap();
                s.apply_hadamard("Y").unwrap();
                s
            })
            .collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let ip = a.inner(b);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(expect)).norm() < 1e-12);
            }
            for x in 0..8usize {
                let sign = if ((i & x).count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a.amplitudes()[x] - c(sign / 8f64.sqrt())).norm() < 1e-12);
            }
        }
    }

    struct Table(usize, usize, Vec<u64>);
    impl BitFunction for Table {
        fn input_bits(&self) -> usize {
            self.0
        }
        fn output_bits(&self) -> usize {
            self.1
        }
        fn eval(&self, x: u64) -> u64 {
            self.2[x as usize]
        }
    }

    #[test]
    fn xor_oracle_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = lay(&[("X", 3), ("Y", 2)]);
        let r = QState::random(l.clone(), &mut rng);
        let zero = Table(3, 2, vec![0; 8]);
        let mut s = r.clone();
        s.apply_xor_oracle(&zero, "X", "Y").unwrap();
        assert!(s.max_deviation(&r) < 1e-15);
        let f = Table(3, 2, (0..8).map(|_| rng.random_range(0..4)).collect());
        s.apply_xor_oracle(&f, "X", "Y").unwrap();
        s.apply_xor_oracle(&f, "X", "Y").unwrap();
        assert!(s.max_deviation(&r) < 1e-10);
        let mut u = QState::from_values(l, &[("X", 5)]).unwrap();
        u.apply_hadamard("Y").unwrap();
        let before = u.clone();
        u.apply_xor_oracle(&f, "X", "Y").unwrap();
        assert!(u.max_deviation(&before) < 1e-12);
        let bad = Table(2, 2, vec![0; 4]);
        assert!(matches!(u.apply_xor_oracle(&bad, "X", "Y"), Err(SimError::WidthMismatch { .. })));
    }

    #[test]
    fn qft_matches_direct_dft() {
        let n = 64usize;
        let l = lay(&[("X", 6)]);
        let mut amps = vec![c(0.0); n];
        for x in (1..n).step_by(4) {
            amps[x] = c(0.25);
        }
        let mut s = QState::from_amplitudes(l, amps.clone()).unwrap();
        s.apply_qft("X").unwrap();
        for k in 0..n {
            let direct: Complex64 = (0..n)
                .map(|x| amps[x] * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (x * k) as f64 / n as f64))
                .sum::<Complex64>()
                / (n as f64).sqrt();
            assert!((direct - s.amplitudes()[k]).norm() < 1e-12);
        }
        let p = s.probabilities(&["X"]).unwrap();
        let peaks: f64 = (0..4).map(|j| p[j * 16]).sum();
        assert!((peaks - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qft_roundtrip_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = lay(&[("A", 2), ("X", 4), ("B", 1)]);
        let mut z = QState::zero(l.clone());
        z.apply_qft("X").unwrap();
        for k in 0..16 {
            let idx = l.register("X").unwrap().set(0, k);
            assert!((z.amplitudes()[idx] - c(0.25)).norm() < 1e-12);
        }
        let r = QState::random(l, &mut rng);
        let mut s = r.clone();
        s.apply_qft("X").unwrap();
        s.apply_inverse_qft("X").unwrap();
        assert!(s.max_deviation(&r) < 1e-10);
    }

    #[test]
    fn measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = QState::init_basis(lay(&[("X", 2)]), "01").unwrap();
        assert_eq!(s.measure("X", &mut rng).unwrap(), 1);
        let mut zeros = 0;
        for _ in 0..100_000 {
            let mut s = QState::zero(lay(&[("X", 1)]));
            s.apply_hadamard("X").unwrap();
            if s.measure("X", &mut rng).unwrap() == 0 {
                zeros += 1;
            }
        }
        assert!((zeros as f64 / 1e5 - 0.5).abs() < 0.01);
        let mut u = QState::zero(lay(&[("X", 1)]));
        u.amplitudes_mut()[0] = c(2.0);
        assert!(matches!(u.measure("X", &mut rng), Err(SimError::NotNormalized(_))));
    }

    #[test]
    fn measuring_periodic_output_leaves_the_fiber() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4;
        let p = 3u64;
        let g: Vec<u64> = vec![9, 4, 13];
        let f = Table(n, n, (0..16).map(|x| g[(x % p) as usize]).collect());
        for _ in 0..20 {
            let mut s = QState::zero(lay(&[("X", n), ("Y", n)]));
            s.apply_hadamard("X").unwrap();
            s.apply_xor_oracle(&f, "X", "Y").unwrap();
            let v = s.measure("Y", &mut rng).unwrap();
            let px = s.probabilities(&["X"]).unwrap();
            let support: Vec<u64> = (0..16).filter(|&x| px[x as usize] > 1e-12).collect();
            let expected: Vec<u64> = (0..16).filter(|&x| g[(x % p) as usize] == v).collect();
            assert_eq!(support, expected);
        }
    }

    #[test]
    fn projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = QState::random(lay(&[("X", 2), ("Y", 2)]), &mut rng);
        let (s, n) = r.project(&Projector::identity()).unwrap();
        assert!((n - 1.0).abs() < 1e-12 && s.max_deviation(&r) < 1e-15);
        assert!(!s.is_normalized());
        let p = Projector::new(&["X", "Y"], |v| v[0] == v[1]);
        let (_, a) = r.project(&p).unwrap();
        let (_, b) = r.project(&p.complement()).unwrap();
        assert!((a * a + b * b - 1.0).abs() < 1e-12);
        let (once, _) = r.project(&p).unwrap();
        let (twice, _) = once.project(&p).unwrap();
        assert!(once.max_deviation(&twice) < 1e-15);
    }

    #[test]
    fn tv() {
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((tv_distance(&[0.5, 0.5], &[0.75, 0.25]).unwrap() - 0.25).abs() < 1e-15);
        assert!(tv_distance(&[0.5, 0.6], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn slice_and_bits() {
        let l = lay(&[("A", 1), ("B", 2)]);
        let s = QState::from_values(l, &[("A", 1), ("B", 2)]).unwrap();
        let t = s.slice(&[("A", 1)]).unwrap();
        assert_eq!(t.amplitudes()[2], c(1.0));
        assert_eq!(bits(5, 4), "0101");
    }
}
