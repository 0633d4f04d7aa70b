//! Purified random oracle in the Fourier basis: each query adds at most one
//! nonzero cell, and it matches the literal conjugated standard oracle.

use bulab::oracle::FourierOracle;
use bulab::verify::{commutator_check, number_support_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m) = (2, 1);
    let mut fo = FourierOracle::new(&[("X", n), ("Y", m)], n, m)?;
    fo.state_mut().apply_hadamard("X")?;
    let mut literal = fo.clone();

    for q in 1..=3 {
        fo.query("X", "Y")?;
        literal.query_literal("X", "Y")?;
        let weights: Vec<String> = (0..=q)
            .map(|l| fo.number_project(l).map(|(_, norm)| format!("{:.4}", norm * norm)))
            .collect::<Result<_, _>>()?;
        println!(
            "after {q} queries: weight by number of nonzero cells {:?}, max {}, literal form deviation {:.1e}",
            weights,
            fo.max_support_size(),
            fo.state().max_deviation(literal.state())
        );
    }

    for n in 1..=2 {
        let c = commutator_check(n, m)?;
        println!("{}: {:.12}", c.name, c.measured);
    }
    let s = number_support_check(n, m, 2, 5)?;
    println!("{}: {:.2e} (pass: {})", s.name, s.measured, s.pass);
    Ok(())
}
