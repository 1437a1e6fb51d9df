//! Composition and the monoidal product of finite correspondences.
//!
//! `cargo run --release --example category_laws`

use ck::catlaws::{check_category_axioms, check_tensor_laws, compose, tensor, FinSet, FiniteCorrespondence};

fn main() -> ck::Result<()> {
    let one = FinSet::new("1", 1)?;
    let two = FinSet::new("2", 2)?;
    let phi = FiniteCorrespondence::new(one, two.clone(), vec![vec![0, 1]])?;
    let psi = FiniteCorrespondence::new(two.clone(), two.clone(), vec![vec![1], vec![0]])?;
    let c = compose(&phi, &psi)?;
    println!("(psi . phi)(0) = {:?}", c.fiber(0));

    let t = tensor(&psi, &FiniteCorrespondence::identity(&two));
    println!("psi (x) id on {} points:", t.source().size());
    for (i, f) in t.fibers().iter().enumerate() {
        println!("  ({}, {}) -> {:?}", i / 2, i % 2, f.ones().map(|j| (j / 2, j % 2)).collect::<Vec<_>>());
    }

    for sizes in [[2, 2, 2, 2], [3, 3, 3, 3], [4, 4, 4, 4]] {
        for r in check_category_axioms(&sizes, 500, 1)? {
            println!("{sizes:?} {:<14} {:>8} checked, {} failed ({})", r.law, r.trials, r.failures, r.mode);
        }
    }
    for r in check_tensor_laws(&[2; 6], 500, 1)? {
        println!("[2; 6] {:<24} {:>6} checked, {} failed", r.law, r.trials, r.failures);
    }
    Ok(())
}
