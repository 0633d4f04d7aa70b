//! For classical adversaries blind unforgeability and EUF-CMA coincide: a
//! forger becomes a blind forger, and a blind forger is simulated with lazily
//! decided blinding.

use std::sync::Arc;

use bulab::attacks::AffineForger;
use bulab::games::{blindforge, bu_to_eufcma, classical_to_bu, estimate, eufcma_experiment, Freshness};
use bulab::mac::AffineMac;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = AffineMac { n: 8 };
    let euf = estimate(5000, 1, |rng| eufcma_experiment(&scheme, &AffineForger, Freshness::Message, rng))?;
    println!("classical forger: {:.4}", euf.rate);

    let runtime = 8;
    let blind = Arc::new(classical_to_bu(Arc::new(AffineForger), runtime));
    let eps = blind.epsilon();
    let bu = estimate(20_000, 2, |rng| blindforge(&scheme, blind.as_ref(), eps, rng))?;
    println!("as a blind forger at eps = 1/{runtime}: {:.4} (at least s eps / e = {:.4})", bu.rate, euf.rate * eps / std::f64::consts::E);

    let sim = bu_to_eufcma(blind, eps);
    let back = estimate(20_000, 3, |rng| eufcma_experiment(&scheme, &sim, Freshness::Message, rng))?;
    println!("simulated back into EUF-CMA: {:.4}", back.rate);
    Ok(())
}
