//! A possibility contour, its upper and lower probabilities, membership in
//! the credal set, and the imprecise highest density region computed two
//! ways.
//!
//! `cargo run --example credal_ihdr`

use ck::grid::{make_uniform_grid, Region};
use ck::imprecise::{
    ihdr_bruteforce, ihdr_contour, is_member, lower_prob, upper_prob, CredalSpec, PossibilityContour,
    ProbVector,
};
use std::sync::Arc;

fn main() -> ck::Result<()> {
    let u = Arc::new(make_uniform_grid(&[(0.0, 4.0)], &[5])?);
    let contour = PossibilityContour::new(u.clone(), vec![0.2, 0.6, 1.0, 0.6, 0.2])?;

    let a = Region::from_indices(u.clone(), [1, 2])?;
    println!("A = {:?}", a.indices());
    println!("upper(A) = {}", upper_prob(&contour, &a)?);
    println!("lower(A) = {}", lower_prob(&contour, &a)?);

    let cs = CredalSpec::new(contour);
    let centred = ProbVector::new(u.clone(), vec![0.1, 0.2, 0.4, 0.2, 0.1])?;
    let lopsided = ProbVector::new(u.clone(), vec![0.5, 0.0, 0.5, 0.0, 0.0])?;
    println!("centred in credal set: {}", is_member(&centred, &cs)?);
    println!("lopsided in credal set: {}", is_member(&lopsided, &cs)?);

    for alpha in [0.1, 0.3, 0.7] {
        let closed = ihdr_contour(alpha, &cs);
        let brute = ihdr_bruteforce(alpha, &cs)?;
        println!(
            "alpha {alpha}: IHDR {:?} (brute force agrees: {})",
            closed.indices(),
            closed == brute
        );
    }
    Ok(())
}
