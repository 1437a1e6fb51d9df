//! The predictive level set of a conjugate Gaussian model against the
//! conformal region of its predictive-density score and the matching IHDR.
//!
//! `cargo run --example bayes_triangle`

use ck::bayes::{bayes_triangle, bcp, posterior_predictive, quant_diagnostic, ConjugateModel};
use ck::grid::{Grid, Sample};
use std::sync::Arc;

fn main() -> ck::Result<()> {
    let model = ConjugateModel::new(1.0, 0.0, 2.0)?;
    let y_n = Sample::scalar(&[0.52, -1.31, 0.07, 1.88, -0.44, 0.91, -2.02, 0.33, -0.71, 1.24])?;
    let (mean, var) = model.posterior(&y_n)?;
    let sd = (var + 1.0).sqrt();
    println!("posterior mean {mean:.4}, predictive sd {sd:.4}");

    // odd count centred on the predictive mode
    let grid = Arc::new(Grid::centered(mean, 6.0 * sd, 121)?);
    let pd = posterior_predictive(&model, &y_n, &grid)?;
    println!("score: {:?}", bcp(&y_n, &pd)?);

    for alpha in [0.05, 0.13, 0.42] {
        let rep = bayes_triangle(alpha, &model, &y_n, &grid)?;
        let span = |idx: &[usize]| match (idx.first(), idx.last()) {
            (Some(&a), Some(&b)) => format!("[{:.3}, {:.3}]", grid.point(a)[0], grid.point(b)[0]),
            _ => "empty".into(),
        };
        println!(
            "alpha {alpha}: QUANT {} | agree {} | consonant {}",
            span(&rep.quant.indices()),
            rep.agree(),
            rep.consonant
        );
        let d = quant_diagnostic(alpha, &y_n, &pd, &grid)?;
        println!(
            "  sizes: order statistic {}, CDF route {}, central {} ",
            d.order_statistic_size, d.cdf_literal_size, d.hdr_size
        );
    }
    Ok(())
}
