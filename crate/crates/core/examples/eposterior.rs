//! Upper posterior of a credal prior and the e-posterior condition.
//!
//! `cargo run --example eposterior`

use ck::bayes::{check_eposterior, upper_posterior, CredalPrior};
use ck::grid::Grid;
use std::sync::Arc;

fn main() -> ck::Result<()> {
    let theta = Arc::new(Grid::midpoint(0.0, 1.0, 101)?);
    let ys = Grid::midpoint(-4.0, 5.0, 101)?;
    let build = |lower: Vec<f64>, upper: Vec<f64>| {
        CredalPrior::gaussian_location(theta.clone(), &ys, 1, 1.0, lower, upper)
    };

    let wide = build(vec![0.5; 101], vec![1.5; 101])?;
    let post = upper_posterior(&wide, 60)?;
    let best = post.iter().cloned().fold(0.0, f64::max);
    println!("upper posterior after y = {:.3}: peak {best:.4}", ys.point(60)[0]);

    let mut upper = vec![1.5; 101];
    let mut lower = vec![0.5; 101];
    upper[40] = 0.2;
    lower[40] = 0.2;
    let dipped = build(lower, upper)?;

    for (name, cp) in [("wide", &wide), ("dipped", &dipped)] {
        let r = check_eposterior(cp)?;
        println!(
            "{name}: lower mass {:.4} <= min upper {:.4}: {} | max E[1/upper posterior] = {:.4} at theta {:.3}",
            r.lower_mass,
            r.min_upper_density,
            r.condition_holds,
            r.max_evalue_expectation,
            theta.point(r.argmax_theta)[0]
        );
    }

    let vacuous = build(vec![0.0; 101], vec![2.0; 101])?;
    println!("vacuous lower prior: {}", check_eposterior(&vacuous).unwrap_err());
    Ok(())
}
