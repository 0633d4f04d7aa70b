//! MAC from a (4q+1)-wise independent polynomial family, secure for q queries.

use bulab::attacks::{trivial_measure_adversary, BlindGuess, ClassicalQueryGuess};
use bulab::games::{blindforge_q, estimate, Adversary};
use bulab::mac::{KWiseMac, MacScheme};
use bulab::verify::{kwise_enumeration_check, kwise_vandermonde_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = KWiseMac { q: 2, n: 12, m: 12 };
    println!("{} uses {}-wise independence", scheme.name(), 4 * scheme.q + 1);

    let advs: [&dyn Adversary; 3] = [&BlindGuess, &ClassicalQueryGuess { q: 2 }, &trivial_measure_adversary(2)];
    for (i, adv) in advs.into_iter().enumerate() {
        let r = estimate(5_000, i as u64, |rng| blindforge_q(&scheme, adv, 2, 0.5, rng))?;
        println!("{:<24} rate {:.2e} vs 2^-12 = {:.2e}", adv.name(), r.rate, 2f64.powi(-12));
    }

    for rep in [kwise_vandermonde_check(9, 4)?, kwise_enumeration_check(3, 3)?] {
        println!("{}: {} (pass: {})", rep.name, rep.note, rep.pass);
    }
    Ok(())
}
