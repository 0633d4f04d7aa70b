//! Blinding sets pulled back through a hash: a 2-to-1 hash is classically
//! distinguishable from independent blinding, an injective one is not.
//! Also shows the realized fraction of a hash-defined set.

use bulab::func::BlindingSet;
use bulab::verify::{bphash_classical_check, BpHash};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for hash in [BpHash::TwoToOne, BpHash::Injective, BpHash::KWise { q: 2 }] {
        let rep = bphash_classical_check(8, hash, 20_000, 4)?;
        println!("{:<14} {:<18} advantage {:.4}", format!("{hash:?}"), rep.name, rep.measured);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let set = BlindingSet::from_hash(9, 0.1, 24, &mut rng)?;
    let sample = (0..100_000u64).filter(|&x| set.chi(x)).count() as f64 / 100_000.0;
    println!("hash-defined set: requested 0.1, realized {:.6}, empirical {:.4}", set.realized_epsilon(), sample);
    Ok(())
}
