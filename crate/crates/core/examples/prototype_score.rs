//! Nonconformity from a small feed-forward embedding: distance to the
//! embedded class prototype.
//!
//! `cargo run --example prototype_score`

use ck::fullcp::{kappa, transducer};
use ck::grid::{make_uniform_grid, Sample};
use ck::scores::{
    check_permutation_invariance, check_permutation_invariance_exhaustive, score_mean_abs,
    score_prototype, EmbeddingNet, Layer, ScoreFn,
};
use std::sync::Arc;

fn main() -> ck::Result<()> {
    let net = EmbeddingNet::new(vec![
        Layer {
            weights: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, -1.0]],
            bias: vec![0.0, 0.0, 0.5],
        },
        Layer {
            weights: vec![vec![0.5, 0.5, 1.0]],
            bias: vec![0.0],
        },
    ])?;
    let y_n = Sample::new(vec![vec![0.0, 0.1], vec![0.3, -0.2], vec![0.5, 0.4], vec![-0.1, 0.2]])?;

    for y in [[0.2, 0.1], [1.5, -1.0]] {
        println!("psi({y:?}) = {:.4}", score_prototype(&y_n, &y, &net)?);
    }

    let id = EmbeddingNet::identity(2);
    let y = [0.4, 0.4];
    println!(
        "identity net: {:.6} vs -mean_abs^2 = {:.6}",
        score_prototype(&y_n, &y, &id)?,
        -score_mean_abs(&y_n, &y)?.powi(2)
    );

    let psi = ScoreFn::PrototypeEmbedding(net);
    println!("invariant under 200 shuffles: {}", check_permutation_invariance(&psi, &y_n, &y, 200, 1));
    println!("invariant under all 24 orders: {}", check_permutation_invariance_exhaustive(&psi, &y_n, &y));

    let grid = Arc::new(make_uniform_grid(&[(-1.0, 1.0), (-1.0, 1.0)], &[9, 9])?);
    let t = transducer(&y_n, &psi, &grid)?;
    println!("max pi on the grid: {}", t.values().iter().cloned().fold(0.0, f64::max));
    let region = kappa(0.3, &y_n, &psi, &grid)?;
    println!("region at alpha 0.3 keeps {} of {} grid points", region.len(), grid.len());
    Ok(())
}
