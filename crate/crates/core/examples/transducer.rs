//! Conformal transducer and prediction region for a small scalar sample.
//!
//! `cargo run --example transducer`

use ck::fullcp::{kappa_from, next_level, normalize_consonant, transducer, TieGrid};
use ck::grid::{make_uniform_grid, Sample};
use ck::scores::ScoreFn;
use std::sync::Arc;

fn main() -> ck::Result<()> {
    let y_n = Sample::scalar(&[0.1, 0.4, 0.35, -0.2, 0.8])?;
    let grid = Arc::new(make_uniform_grid(&[(-1.0, 1.5)], &[11])?);
    let t = transducer(&y_n, &ScoreFn::MeanAbsDistance, &grid)?;

    println!("{:>6}  {:>3}  {:>6}", "y", "k", "pi");
    for (i, p) in grid.points().iter().enumerate() {
        println!("{:>6.2}  {:>3}  {:>6.3}", p[0], t.counts()[i], t.value(i));
    }
    println!("consonant: {}", t.is_consonant());

    let tg = TieGrid::new(y_n.n())?;
    let alpha = 0.3;
    println!("next tie level above {alpha}: {:.4}", next_level(alpha, &tg)?);
    let region = kappa_from(&t, alpha)?;
    println!("region at alpha = {alpha}: {:?}", region.indices());

    // rescaled so the grid maximum is exactly 1
    let norm = normalize_consonant(&t);
    println!("normalized max: {}", norm.values().iter().cloned().fold(0.0, f64::max));

    // a level on the tie grid is refused
    println!("alpha = 0.5: {}", kappa_from(&t, 0.5).unwrap_err());

    println!("\nCSV:");
    t.write_csv(std::io::stdout())
}
