//! Blind-forgery game against a random MAC and a two-query-breakable affine MAC.

use bulab::attacks::{trivial_measure_adversary, AffineForger, BlindGuess, ClassicalQueryGuess};
use bulab::games::{blindforge, estimate, Adversary};
use bulab::mac::{AffineMac, MacScheme, RandomMac};

fn row(scheme: &dyn MacScheme, adv: &dyn Adversary, eps: f64, seed: u64) -> Result<(), Box<dyn std::error::Error>> {
    let r = estimate(20_000, seed, |rng| blindforge(scheme, adv, eps, rng))?;
    println!(
        "{:<18} {:<24} rate {:.5} [{:.5}, {:.5}]",
        scheme.name(),
        adv.name(),
        r.rate,
        r.ci_lo,
        r.ci_hi
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.5;
    let random = RandomMac { n: 8, m: 16 };
    println!("eps = {eps}; a random 16-bit tag is guessed with probability {:.2e}", 2f64.powi(-16));
    row(&random, &BlindGuess, eps, 1)?;
    row(&random, &ClassicalQueryGuess { q: 2 }, eps, 2)?;
    row(&random, &trivial_measure_adversary(2), eps, 3)?;

    // The affine forger wins when both queries are answered and its fresh message is blinded.
    let affine = AffineMac { n: 8 };
    row(&affine, &AffineForger, eps, 4)?;
    println!("expected for the affine forger: (1 - eps)^2 eps = {:.3}", (1.0 - eps) * (1.0 - eps) * eps);
    Ok(())
}
