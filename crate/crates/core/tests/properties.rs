use std::f64::consts::PI;

use bulab::attacks::{
    coherent_outcome_distribution, semiclassical_outcome_distribution, AffineForger, BlindGuess, ReplayForger,
};
use bulab::experiments::round12;
use bulab::func::{BlindingSet, FunctionTable};
use bulab::games::{
    blindforge, estimate, eufcma_experiment, wilson, Blinding, Freshness, OracleHandle,
};
use bulab::mac::{AffineMac, CounterexampleMac, MacKey, MacScheme, RandomMac};
use bulab::oracle::{blind_wrap, FourierOracle};
use bulab::qsim::{random_gate, QState, RegisterLayout};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn layout() -> RegisterLayout {
    RegisterLayout::new([("A", 3), ("B", 2), ("C", 2)]).unwrap()
}

/// Applies `steps` random operations drawn from `r` to a seven-qubit state.
fn scramble(s: &mut QState, steps: usize, r: &mut ChaCha8Rng) {
    let table = FunctionTable::random(3, 2, r);
    for _ in 0..steps {
        match r.random_range(0..6) {
            0 => {
                let g = random_gate(r);
                s.apply_gate(r.random_range(0..7), &g);
            }
            1 => {
                let (a, b) = (r.random_range(0..7), r.random_range(0..7));
                if a != b {
                    s.apply_cnot(a, b);
                }
            }
            2 => {
                let (a, b) = (r.random_range(0..7), r.random_range(0..7));
                if a != b {
                    s.apply_cz(a, b);
                }
            }
            3 => s.apply_qft("A").unwrap(),
            4 => s.apply_inverse_qft("C").unwrap(),
            _ => s.apply_xor_oracle(&table, "A", "B").unwrap(),
        }
    }
}

struct Table(FunctionTable);

impl MacKey for Table {
    fn mac(&self, m: u64) -> u64 {
        self.0.values()[m as usize]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitary_steps_preserve_norm(seed in any::<u64>(), steps in 1usize..40) {
        let mut r = rng(seed);
        let mut s = QState::random(layout(), &mut r);
        scramble(&mut s, steps, &mut r);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qft_agrees_with_direct_sum(seed in any::<u64>(), w in 1usize..6) {
        let mut r = rng(seed);
        let l = RegisterLayout::new([("X", w)]).unwrap();
        let s0 = QState::random(l, &mut r);
        let mut s = s0.clone();
        s.apply_qft("X").unwrap();
        let n = 1usize << w;
        for k in 0..n {
            let direct: Complex64 = (0..n)
                .map(|x| s0.amplitudes()[x] * Complex64::from_polar(1.0, 2.0 * PI * (x * k) as f64 / n as f64))
                .sum::<Complex64>()
                / (n as f64).sqrt();
            prop_assert!((direct - s.amplitudes()[k]).norm() < 1e-10);
        }
        s.apply_inverse_qft("X").unwrap();
        prop_assert!(s.max_deviation(&s0) < 1e-10);
    }

    #[test]
    fn xor_oracle_is_an_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s0 = QState::random(layout(), &mut r);
        let f = FunctionTable::random(3, 2, &mut r);
        let mut s = s0.clone();
        s.apply_xor_oracle(&f, "A", "C").unwrap();
        s.apply_xor_oracle(&f, "A", "C").unwrap();
        prop_assert!(s.max_deviation(&s0) < 1e-12);
    }

    #[test]
    fn measuring_the_query_output_early_changes_nothing(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let scheme = CounterexampleMac::new(n).unwrap();
        let p = r.random_range(1..=1u64 << n);
        let key = scheme.key_with_period(p, &mut r);
        let coherent = coherent_outcome_distribution(&key).unwrap();
        let semi = semiclassical_outcome_distribution(&key).unwrap();
        prop_assert_eq!(coherent.len(), semi.len());
        for (a, b) in coherent.iter().zip(&semi) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn fourier_oracle_support_grows_by_at_most_one(seed in any::<u64>(), q in 0usize..4) {
        let mut r = rng(seed);
        let adv = RegisterLayout::new([("X", 2), ("Y", 1), ("E", 1)]).unwrap();
        let mut o = FourierOracle::with_adversary_state(&QState::random(adv, &mut r), 2, 1).unwrap();
        for _ in 0..q {
            let g = random_gate(&mut r);
            // F holds the four low qubits; the adversary sits above it.
            let qubit = 4 + r.random_range(0..4);
            o.state_mut().apply_gate(qubit, &g);
            o.query("X", "Y").unwrap();
        }
        prop_assert!(o.max_support_size() <= q);
        prop_assert!((o.state().norm_sqr() - 1.0).abs() < 1e-10);
        let total: f64 = (0..=4).map(|l| o.number_project(l).unwrap().1.powi(2)).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fourier_query_matches_its_literal_form(seed in any::<u64>()) {
        let mut r = rng(seed);
        let adv = RegisterLayout::new([("X", 2), ("Y", 1), ("E", 1)]).unwrap();
        let start = QState::random(adv, &mut r);
        let mut a = FourierOracle::with_adversary_state(&start, 2, 1).unwrap();
        let mut b = a.clone();
        a.query("X", "Y").unwrap();
        b.query_literal("X", "Y").unwrap();
        prop_assert!(a.state().max_deviation(b.state()) < 1e-10);
    }

    #[test]
    fn blinded_answers_agree_everywhere(seed in any::<u64>(), eps in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let f = FunctionTable::random(5, 3, &mut r);
        let set = BlindingSet::uniform(5, eps, &mut r).unwrap();
        let wrapped = blind_wrap(f.clone(), set.clone()).unwrap();
        let key = Table(f.clone());
        let mut handle = OracleHandle::new(&key, 5, 3, Blinding::Message(set.clone()), 64);
        for m in 0..32u64 {
            let expected = if set.chi(m) { 1 } else { f.values()[m as usize] << 1 };
            prop_assert_eq!(bulab::qsim::BitFunction::eval(&wrapped, m), expected);
            let answer = handle.classical(m).unwrap();
            prop_assert_eq!(answer, if set.chi(m) { None } else { Some(f.values()[m as usize]) });
            let l = RegisterLayout::new([("M", 5), ("T", 4)]).unwrap();
            let mut s = QState::from_values(l, &[("M", m)]).unwrap();
            handle.query(&mut s, &["M"], "T").unwrap();
            let t = s.measure("T", &mut r).unwrap();
            prop_assert_eq!(t, expected);
        }
    }

    #[test]
    fn wilson_interval_brackets_the_rate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let wins = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = wilson(wins, trials);
        let rate = wins as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= rate + 1e-15 && rate <= hi + 1e-15 && hi <= 1.0);
    }

    #[test]
    fn rounding_is_idempotent(x in -1e12f64..1e12) {
        let y = round12(x);
        prop_assert_eq!(round12(y), y);
        prop_assert!((x - y).abs() <= 1e-11 * x.abs());
    }
}

#[test]
fn affine_scheme_is_broken_in_both_senses() {
    let scheme = AffineMac { n: 8 };
    let euf = estimate(500, 1, |r| eufcma_experiment(&scheme, &AffineForger, Freshness::Message, r)).unwrap();
    assert_eq!(euf.wins, 500);
    // Wins need both queries answered and the fresh message blinded: (1/2)^3.
    let bu = estimate(4000, 2, |r| blindforge(&scheme, &AffineForger, 0.5, r)).unwrap();
    assert!(bu.near(0.125), "{bu:?}");
}

#[test]
fn random_mac_resists_both_games() {
    let scheme = RandomMac { n: 8, m: 16 };
    let bound = 1.0 / 65536.0;
    let euf = estimate(4000, 3, |r| eufcma_experiment(&scheme, &ReplayForger, Freshness::Message, r)).unwrap();
    assert!(euf.below(bound), "{euf:?}");
    let bu = estimate(4000, 4, |r| blindforge(&scheme, &BlindGuess, 0.5, r)).unwrap();
    assert!(bu.below(bound), "{bu:?}");
    let replay = estimate(4000, 5, |r| blindforge(&scheme, &ReplayForger, 0.5, r)).unwrap();
    assert!(replay.below(bound), "{replay:?}");
}

#[test]
fn schemes_report_their_shapes() {
    let schemes: Vec<Box<dyn MacScheme>> =
        vec![Box::new(AffineMac { n: 8 }), Box::new(RandomMac { n: 8, m: 16 }), Box::new(CounterexampleMac::new(4).unwrap())];
    for s in &schemes {
        let key = s.keygen(&mut rng(0));
        for m in 0..1u64 << s.message_bits() {
            assert!(key.mac(m) < 1 << s.tag_bits());
            assert!(key.verify(m, key.mac(m)));
        }
    }
}
