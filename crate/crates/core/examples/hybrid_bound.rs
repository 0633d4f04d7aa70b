//! Reprogramming a random function on a blinded set moves the output
//! distribution of a q-query circuit by at most 2q sqrt(eps) on average.

use bulab::verify::{hybrid_bound_check, HybridParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for eps in [0.01, 0.05, 0.2] {
        let p = HybridParams { n: 5, m: 2, queries: 3, eps, circuits: 40, draws: 20 };
        let out = hybrid_bound_check(&p, 17)?;
        let worst = out.per_circuit.iter().map(|c| c.0).fold(0.0, f64::max);
        println!(
            "eps {eps:<5} mean TV {:.4}  worst circuit {:.4}  bound {:.4}  pass {}",
            out.report.measured, worst, out.report.bound, out.report.pass
        );
    }
    Ok(())
}
