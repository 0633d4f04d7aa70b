//! Pair blinding catches a forger that flips the ignored last tag bit, which
//! message blinding cannot express for a non-canonical scheme.

use bulab::attacks::NoncanonicalForger;
use bulab::games::{blindforge, estimate, strong_blindforge, GameError};
use bulab::mac::NoncanonicalMac;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = NoncanonicalMac { n: 8 };
    match blindforge(&scheme, &NoncanonicalForger, 0.1, &mut rand::rng()) {
        Err(GameError::NonCanonical(name)) => println!("message blinding refuses {name}"),
        other => println!("unexpected: {other:?}"),
    }
    for eps in [0.1, 0.25] {
        let r = estimate(10_000, 11, |rng| strong_blindforge(&scheme, &NoncanonicalForger, eps, rng))?;
        println!("eps {eps}: forger wins {:.4}, expected eps (1 - eps) = {:.4}", r.rate, eps * (1.0 - eps));
    }
    Ok(())
}
