//! Sparse database representation of the purified oracle, checked against the
//! dense Fourier-basis simulation.

use bulab::oracle::CompressedOracle;
use bulab::qsim::random_gate;
use bulab::verify::compressed_vs_dense_check;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut co = CompressedOracle::new(&[("X", 3), ("Y", 2)], 3, 2)?;
    for _ in 0..4 {
        let gates: Vec<_> = (0..5).map(|q| (q, random_gate(&mut rng))).collect();
        co.apply(|s| {
            for (q, g) in &gates {
                s.apply_gate(*q, g);
            }
            Ok(())
        })?;
        co.query("X", "Y")?;
        println!(
            "queries {}  branches {:>4}  largest database {}  norm^2 {:.12}  pruned {:.1e}",
            co.queries(),
            co.branch_count(),
            co.max_database_size(),
            co.norm_sqr(),
            co.pruned_mass()
        );
    }

    let rep = compressed_vs_dense_check(2, 1, 3, 20, 9)?;
    println!("{}: max TV {:.2e} (pass: {})", rep.name, rep.measured, rep.pass);
    Ok(())
}
