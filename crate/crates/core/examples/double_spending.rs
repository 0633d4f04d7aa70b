//! One quantum query yields both the period class of the key and a valid
//! message/tag pair, more often than two independent uses would allow.

use bulab::attacks::double_spend;
use bulab::games::estimate;
use bulab::mac::{CounterexampleMac, PeriodDistribution};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 6;
    let scheme = CounterexampleMac::with_periods(n, PeriodDistribution::Range { lo: 2, hi: 8 })?;
    let trials = 5000;
    let property = estimate(trials, 1, |rng| Ok(double_spend(&scheme.keygen_concrete(rng), true, rng)?.property_correct))?;
    let joint = estimate(trials, 1, |rng| Ok(double_spend(&scheme.keygen_concrete(rng), true, rng)?.joint()))?;
    let pair = estimate(trials, 2, |rng| Ok(double_spend(&scheme.keygen_concrete(rng), false, rng)?.pair_valid))?;
    println!("property correct  {:.4}", property.rate);
    println!("pair valid alone  {:.4}", pair.rate);
    println!("both at once      {:.4}  vs property^2 = {:.4}", joint.rate, property.rate * property.rate);
    Ok(())
}
