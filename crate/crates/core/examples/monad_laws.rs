//! The hyperspace functor on finite sets and its monad laws.
//!
//! `cargo run --release --example monad_laws`

use ck::catlaws::{
    check_functor_laws, check_monad_laws, compose, multiplication, unit, vietoris_map, Comparison, FinSet,
    FiniteCorrespondence, VietorisObject, VietorisVariant,
};

fn main() -> ck::Result<()> {
    let x = FinSet::new("X", 2)?;
    let kx = VietorisObject::new(&x)?;
    println!("K(X) = {:?}", kx.elements());

    let swap = FiniteCorrespondence::new(x.clone(), x.clone(), vec![vec![1], vec![0]])?;
    let t = vietoris_map(&swap, VietorisVariant::Singleton)?;
    for (c, f) in kx.elements().iter().zip(t.fibers()) {
        let img: Vec<_> = f.ones().map(|i| &kx.elements()[i]).collect();
        println!("T(swap) {c:?} -> {img:?}");
    }

    let nu = multiplication(&x)?;
    let left = compose(&vietoris_map(&unit(&x)?, VietorisVariant::Singleton)?, &nu)?;
    println!("nu . T(eta) = id: {}", left == FiniteCorrespondence::identity(&kx.as_finset()));

    for (variant, cmp) in [
        (VietorisVariant::Singleton, Comparison::Literal),
        (VietorisVariant::DownSet, Comparison::Literal),
        (VietorisVariant::DownSet, Comparison::DownClosure),
    ] {
        println!("\n{variant:?} / {cmp:?}");
        for base in 1..=3 {
            for r in check_monad_laws(base, variant, cmp, 100, 9)? {
                println!("  base {base} {:<14} {:>5} checked, {:>4} failed ({})", r.law, r.trials, r.failures, r.mode);
            }
        }
        for r in check_functor_laws(2, variant, cmp)? {
            println!("  {:<20} {:>5} checked, {:>4} failed", r.law, r.trials, r.failures);
        }
    }
    Ok(())
}
