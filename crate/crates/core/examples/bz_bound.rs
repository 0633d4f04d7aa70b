//! Producing q+1 valid pairs from q queries to a random function, and the
//! reduction from many valid pairs to a blind forgery.

use std::sync::Arc;

use bulab::attacks::AffineHarvester;
use bulab::games::{blindforge, bz_to_bu, estimate, BZ_TO_BU_C};
use bulab::mac::AffineMac;
use bulab::verify::{bz_bound, bz_random_bound_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for q in [1, 2, 3] {
        let (rep, games) = bz_random_bound_check(4, 8, q, 4000, 5)?;
        let best = games.iter().map(|(_, g)| g.rate).fold(0.0, f64::max);
        println!("q = {q}: best adversary {best:.2e}, bound {:.2e}, pass {}", bz_bound(q, 8), rep.pass);
    }

    let k = 2;
    let reduction = bz_to_bu(Arc::new(AffineHarvester { pairs: BZ_TO_BU_C * k * k }), k);
    let eps = reduction.epsilon();
    let r = estimate(20_000, 6, |rng| blindforge(&AffineMac { n: 16 }, &reduction, eps, rng))?;
    println!(
        "{} pairs at eps = 1/{}: blind forgery rate {:.2e}",
        reduction.pairs_needed(),
        (1.0 / eps).round(),
        r.rate
    );
    Ok(())
}
