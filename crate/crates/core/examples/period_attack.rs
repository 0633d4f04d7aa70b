//! Recovers the hidden period of the counterexample MAC with quantum queries
//! restricted to messages starting with 1, then forges on a message starting with 0.

use bulab::attacks::{run_period_attack, PeriodAttackConfig};
use bulab::games::estimate;
use bulab::mac::{CounterexampleMac, PeriodDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 8;
    let scheme = CounterexampleMac::new(n)?;
    let cfg = PeriodAttackConfig::for_bits(n);
    println!("n = {n}, {} samples, {} oracle calls per attack", cfg.samples, cfg.query_budget());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let r = run_period_attack(&scheme, &cfg, &mut rng)?;
        println!(
            "period {:>3}  recovered {:>9}  forgery (m={:#x}, t={:#x}) verifies: {}",
            r.true_period,
            format!("{:?}", r.recovered),
            r.forgery.0,
            r.forgery.1,
            r.forgery_verifies
        );
    }

    // Recovery is reliable once two full periods fit in the sampled range.
    let odd = CounterexampleMac::with_periods(n, PeriodDistribution::Odd { lo: 3, hi: 1 << (n - 1) })?;
    let wide = CounterexampleMac::with_periods(n, PeriodDistribution::Odd { lo: 3, hi: (1 << n) - 1 })?;
    for (label, s) in [("uniform", &scheme), ("odd <= 2^(n-1)", &odd), ("odd < 2^n", &wide)] {
        let r = estimate(200, 2, |rng| Ok(run_period_attack(s, &cfg, rng)?.forgery_verifies))?;
        println!("{label:<15} periods, {} keys: success {:.3} [{:.3}, {:.3}]", r.trials, r.rate, r.ci_lo, r.ci_hi);
    }
    Ok(())
}
