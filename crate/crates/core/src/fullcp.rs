//! Full (transductive) conformal prediction on a grid.
//!
//! For each candidate `ỹ` the sample is augmented to `y^{n+1}`, every point
//! gets its leave-one-out score `T_i = ψ(y^{n+1}_{-i}, y_i)`, and the
//! transducer value is the fraction of `T_i` at least as large as the
//! candidate's own score. Values are kept as the integer count `k`, so
//! `π = k / (n+1)` is exact and membership in the tie grid `S_{n+1}` never
//! depends on rounding.

use crate::error::{Error, Result};
use crate::grid::{Grid, Point, Region, Sample};
use crate::scores::Nonconformity;
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct Transducer {
    universe: Arc<Grid>,
    counts: Vec<usize>,
    denom: usize,
    n: usize,
    normalized: bool,
}

impl Transducer {
    /// Builds a transducer from raw counts `k` (value `k / (n+1)`).
    pub fn from_counts(universe: Arc<Grid>, n: usize, counts: Vec<usize>) -> Result<Transducer> {
        if counts.len() != universe.len() {
            return Err(Error::DimensionMismatch {
                expected: universe.len(),
                found: counts.len(),
            });
        }
        if let Some(&k) = counts.iter().find(|&&k| k == 0 || k > n + 1) {
            return Err(Error::InvalidParameter(format!(
                "transducer count {k} outside 1..={}",
                n + 1
            )));
        }
        Ok(Transducer {
            universe,
            counts,
            denom: n + 1,
            n,
            normalized: false,
        })
    }

    pub fn universe(&self) -> &Arc<Grid> {
        &self.universe
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Integer numerators `k`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Common denominator: `n + 1`, or the maximal count once normalized.
    pub fn denominator(&self) -> usize {
        self.denom
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn value(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.denom as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.value(i)).collect()
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// `sup π = 1`.
    pub fn is_consonant(&self) -> bool {
        self.max_count() == self.denom
    }

    /// `{ỹ : π(ỹ) > alpha}` without any tie check.
    pub fn region_above(&self, alpha: f64) -> Region {
        Region::from_predicate(self.universe.clone(), |i| self.value(i) > alpha)
    }

    /// Writes `grid_index, x0.., k, pi_value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_rows(out, false)
    }

    pub(crate) fn write_rows<W: Write>(&self, out: W, with_flag: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.universe.dim();
        let mut header = vec!["grid_index".to_string()];
        header.extend((0..dim).map(|k| format!("x{k}")));
        header.push("k".into());
        header.push("pi_value".into());
        if with_flag {
            header.push("normalized".into());
        }
        w.write_record(&header)?;
        for (i, p) in self.universe.points().iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.iter().map(|v| format!("{v:?}")));
            row.push(self.counts[i].to_string());
            row.push(format!("{:?}", self.value(i)));
            if with_flag {
                row.push(self.normalized.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Transducer value count at one candidate: `#{i : T_i >= T_{n+1}}`.
fn count_at<P: Nonconformity + ?Sized>(psi: &P, sample: &[Point], candidate: &[f64]) -> usize {
    let mut all = Vec::with_capacity(sample.len() + 1);
    all.extend_from_slice(sample);
    all.push(candidate.to_vec());
    let last = sample.len();
    let own = psi.score_leave_one_out(&all, last);
    (0..=last)
        .filter(|&i| i == last || psi.score_leave_one_out(&all, i) >= own)
        .count()
}

/// Conformal transducer `π(·, y^n)` over every grid point.
///
/// Candidates are evaluated in parallel; each is a pure function of its
/// inputs so the result does not depend on the worker count.
pub fn transducer<P: Nonconformity + ?Sized>(
    y_n: &Sample,
    psi: &P,
    universe: &Arc<Grid>,
) -> Result<Transducer> {
    if y_n.dim() != universe.dim() {
        return Err(Error::DimensionMismatch {
            expected: universe.dim(),
            found: y_n.dim(),
        });
    }
    if let Some(d) = psi.input_dim() {
        if d != universe.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: universe.dim(),
            });
        }
    }
    let counts: Vec<usize> = universe
        .points()
        .par_iter()
        .map(|c| count_at(psi, y_n.points(), c))
        .collect();
    Transducer::from_counts(universe.clone(), y_n.n(), counts)
}

/// The tie grid `S_{n+1} = {0, 1/(n+1), ..., 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TieGrid {
    n: usize,
    levels: Vec<f64>,
}

impl TieGrid {
    pub fn new(n: usize) -> Result<TieGrid> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let m = (n + 1) as f64;
        let levels = (0..=n + 1).map(|k| k as f64 / m).collect();
        Ok(TieGrid { n, levels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.levels.contains(&alpha)
    }

    /// Distance from `alpha` to the nearest level.
    pub fn distance(&self, alpha: f64) -> f64 {
        self.levels
            .iter()
            .map(|&l| (l - alpha).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `β(α)`: the smallest level of `S_{n+1}` strictly above `alpha`.
pub fn next_level(alpha: f64, tg: &TieGrid) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    tg.levels
        .iter()
        .copied()
        .find(|&l| l > alpha)
        .ok_or(Error::NoLevelAbove(alpha))
}

/// True iff `alpha ∉ S_{n+1}`.
pub fn assert_no_tie(alpha: f64, tg: &TieGrid) -> bool {
    !tg.contains(alpha)
}

pub(crate) fn require_no_tie(alpha: f64, n: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !assert_no_tie(alpha, &TieGrid::new(n)?) {
        return Err(Error::TieLevel { alpha, n });
    }
    Ok(())
}

/// The conformal prediction region at level `alpha` for an already computed
/// transducer. Refuses tie levels.
pub fn kappa_from(t: &Transducer, alpha: f64) -> Result<Region> {
    require_no_tie(alpha, t.n())?;
    Ok(t.region_above(alpha))
}

/// `κ(α, y^n, ψ) = {ỹ : π(ỹ, y^n) > α}`.
pub fn kappa<P: Nonconformity + ?Sized>(
    alpha: f64,
    y_n: &Sample,
    psi: &P,
    universe: &Arc<Grid>,
) -> Result<Region> {
    require_no_tie(alpha, y_n.n())?;
    let t = transducer(y_n, psi, universe)?;
    Ok(t.region_above(alpha))
}

/// Divides by the grid maximum so the largest value is exactly 1.
pub fn normalize_consonant(t: &Transducer) -> Transducer {
    let max = t.max_count();
    if max == t.denom {
        return t.clone();
    }
    Transducer {
        denom: max,
        normalized: true,
        ..t.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use crate::scores::{EmbeddingNet, ScoreFn};

    fn irregular(points: &[f64]) -> Arc<Grid> {
        Arc::new(Grid::from_points(points.iter().map(|&v| vec![v]).collect()).unwrap())
    }

    /// Straight transcription of the algorithm with explicit drops, used as
    /// an independent oracle for the parallel implementation.
    fn oracle_pi(y_n: &[f64], psi: &ScoreFn, candidate: f64) -> f64 {
        let mut all: Vec<Point> = y_n.iter().map(|&v| vec![v]).collect();
        all.push(vec![candidate]);
        let t: Vec<f64> = (1..=all.len())
            .map(|i| {
                let (rest, held) = crate::grid::drop_index(&all, i).unwrap();
                psi.score(&rest, &held)
            })
            .collect();
        let own = *t.last().unwrap();
        t.iter().filter(|&&v| v >= own).count() as f64 / all.len() as f64
    }

    #[test]
    fn hand_enumerated_values() {
        let y_n = Sample::scalar(&[0.0, 1.0]).unwrap();
        let u = irregular(&[0.0, 0.5, 1.0, 2.0]);
        let t = transducer(&y_n, &ScoreFn::MeanAbsDistance, &u).unwrap();
        assert_eq!(t.counts(), &[3, 3, 3, 2]);
        assert_eq!(t.value(1), 1.0);
        assert_eq!(t.value(3), 2.0 / 3.0);
        for (i, &c) in [0.0, 0.5, 1.0, 2.0].iter().enumerate() {
            assert_eq!(t.value(i), oracle_pi(&[0.0, 1.0], &ScoreFn::MeanAbsDistance, c));
        }
    }

    #[test]
    fn constant_sample_is_fully_plausible_at_its_value() {
        let c = 0.37;
        let y_n = Sample::scalar(&[c; 5]).unwrap();
        let u = irregular(&[-1.0, c, 2.0]);
        let net = EmbeddingNet::identity(1);
        for psi in [ScoreFn::MeanAbsDistance, ScoreFn::PrototypeEmbedding(net)] {
            let t = transducer(&y_n, &psi, &u).unwrap();
            assert_eq!(t.value(1), 1.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let y_n = Sample::new(vec![vec![0.0, 1.0]]).unwrap();
        let u = irregular(&[0.0, 1.0]);
        assert!(matches!(
            transducer(&y_n, &ScoreFn::MeanAbsDistance, &u),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn next_level_examples() {
        let tg = TieGrid::new(3).unwrap();
        assert_eq!(next_level(0.1, &tg).unwrap(), 0.25);
        assert_eq!(next_level(0.0, &tg).unwrap(), 0.25);
        assert_eq!(next_level(0.25, &tg).unwrap(), 0.5);
        assert_eq!(next_level(0.0, &TieGrid::new(6).unwrap()).unwrap(), 1.0 / 7.0);
        assert!(matches!(next_level(1.0, &tg), Err(Error::NoLevelAbove(_))));
        assert_eq!(tg.levels().len(), 5);
    }

    #[test]
    fn no_tie_examples() {
        let tg = TieGrid::new(3).unwrap();
        assert!(assert_no_tie(0.1, &tg));
        assert!(!assert_no_tie(0.5, &tg));
        assert!(!assert_no_tie(1.0, &tg));
        assert!(!assert_no_tie(0.0, &tg));
    }

    #[test]
    fn kappa_examples() {
        let y_n = Sample::scalar(&[0.0, 1.0]).unwrap();
        let u = irregular(&[0.0, 0.5, 1.0, 2.0]);
        let psi = ScoreFn::MeanAbsDistance;
        // π = (1, 1, 1, 2/3) and 2/3 > 0.6
        assert_eq!(kappa(0.6, &y_n, &psi, &u).unwrap().indices(), vec![0, 1, 2, 3]);
        assert_eq!(kappa(0.01, &y_n, &psi, &u).unwrap().len(), 4);
        assert_eq!(kappa(0.99, &y_n, &psi, &u).unwrap().indices(), vec![0, 1, 2]);
        assert_eq!(kappa(0.7, &y_n, &psi, &u).unwrap().indices(), vec![0, 1, 2]);
        let err = kappa(2.0 / 3.0, &y_n, &psi, &u).unwrap_err();
        assert!(matches!(err, Error::TieLevel { n: 2, .. }));
        assert!(err.to_string().contains("S_{n+1}"));
    }

    #[test]
    fn kappa_on_uniform_grid_contains_the_mean() {
        let y_n = Sample::scalar(&[-0.5, 0.25, 0.5, 1.0]).unwrap();
        let u = Arc::new(make_uniform_grid(&[(-2.0, 2.0)], &[41]).unwrap());
        let r = kappa(0.3, &y_n, &ScoreFn::MeanAbsDistance, &u).unwrap();
        let mean_idx = u.nearest_index(&[0.3125]).unwrap();
        assert!(r.contains(mean_idx));
        assert!(!r.contains(0) && !r.contains(40));
    }

    #[test]
    fn normalization_examples() {
        let u = irregular(&[0.0, 1.0]);
        let t = Transducer::from_counts(u.clone(), 2, vec![2, 1]).unwrap();
        let nt = normalize_consonant(&t);
        assert_eq!(nt.values(), vec![1.0, 0.5]);
        assert!(nt.is_consonant() && nt.is_normalized());
        assert_eq!(normalize_consonant(&nt), nt);

        let consonant = Transducer::from_counts(u.clone(), 2, vec![3, 1]).unwrap();
        assert_eq!(normalize_consonant(&consonant), consonant);

        let flat = Transducer::from_counts(u, 4, vec![2, 2]).unwrap();
        assert_eq!(normalize_consonant(&flat).values(), vec![1.0, 1.0]);
    }

    #[test]
    fn csv_schema() {
        let u = irregular(&[0.0, 1.5]);
        let t = Transducer::from_counts(u, 2, vec![3, 1]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "grid_index,x0,k,pi_value\n0,0.0,3,1.0\n1,1.5,1,0.3333333333333333\n"
        );
    }
}
