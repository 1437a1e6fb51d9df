//! Finite discretization of a box-shaped state space, subsets of it, and
//! observed samples.
//!
//! Every set-level computation in the crate happens on a [`Grid`]: the power
//! set of its points plays the role of the event algebra, so suprema and
//! intersections are exact and every subset is trivially closed.

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::sync::Arc;

/// A point of a `d`-dimensional state space.
pub type Point = Vec<f64>;

/// JSON form of a uniform grid: `{"bounds": [[lo, hi], ...], "counts": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Vec<[f64; 2]>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        let bounds: Vec<(f64, f64)> = self.bounds.iter().map(|b| (b[0], b[1])).collect();
        make_uniform_grid(&bounds, &self.counts)
    }
}

#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<Point>,
    bounds: Vec<(f64, f64)>,
    spacing: Vec<f64>,
    counts: Option<Vec<usize>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let last = (count - 1) as f64;
    (0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                lo + (hi - lo) * (k as f64) / last
            }
        })
        .collect()
}

/// Cartesian-product grid with `counts[k]` equally spaced points on
/// `bounds[k]`, endpoints included, in lexicographic order.
pub fn make_uniform_grid(bounds: &[(f64, f64)], counts: &[usize]) -> Result<Grid> {
    if bounds.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            found: counts.len(),
        });
    }
    if bounds.is_empty() {
        return Err(Error::InvalidParameter("grid needs at least one dimension".into()));
    }
    let mut axes = Vec::with_capacity(bounds.len());
    let mut spacing = Vec::with_capacity(bounds.len());
    for (dim, (&(lo, hi), &count)) in bounds.iter().zip(counts).enumerate() {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite {
                what: "grid bounds",
                value: if lo.is_finite() { hi } else { lo },
            });
        }
        if lo > hi {
            return Err(Error::DegenerateInterval { dim, lo, hi });
        }
        if count == 0 {
            return Err(Error::ZeroCount { dim });
        }
        if count > 1 && lo == hi {
            return Err(Error::DegenerateInterval { dim, lo, hi });
        }
        spacing.push(if count > 1 {
            (hi - lo) / (count - 1) as f64
        } else if hi > lo {
            hi - lo
        } else {
            1.0
        });
        axes.push(linspace(lo, hi, count));
    }

    let total: usize = counts.iter().product();
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; counts.len()];
    for _ in 0..total {
        points.push(idx.iter().zip(&axes).map(|(&i, axis)| axis[i]).collect());
        // odometer with the last dimension fastest gives lexicographic order
        for k in (0..counts.len()).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(Grid {
        points,
        bounds: bounds.to_vec(),
        spacing,
        counts: Some(counts.to_vec()),
    })
}

impl Grid {
    /// Grid over an arbitrary finite point set. Points are sorted
    /// lexicographically; duplicates are rejected.
    pub fn from_points(mut points: Vec<Point>) -> Result<Grid> {
        let first = points.first().ok_or(Error::EmptySample)?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if let Some(&v) = p.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "grid point",
                    value: v,
                });
            }
        }
        points.sort_by(|a, b| lex_cmp(a, b));
        for i in 1..points.len() {
            if points[i] == points[i - 1] {
                return Err(Error::DuplicatePoint { index: i });
            }
        }
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for p in &points {
            for (b, &v) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        let spacing = (0..dim)
            .map(|k| {
                let mut axis: Vec<f64> = points.iter().map(|p| p[k]).collect();
                axis.sort_by(f64::total_cmp);
                axis.dedup();
                axis.windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min)
            })
            .map(|s| if s.is_finite() { s } else { 1.0 })
            .collect();
        Ok(Grid {
            points,
            bounds,
            spacing,
            counts: None,
        })
    }

    /// One-dimensional grid of `count` points symmetric about `center`,
    /// with `center` itself included exactly when `count` is odd.
    pub fn centered(center: f64, half_width: f64, count: usize) -> Result<Grid> {
        if count < 2 || !(half_width > 0.0) {
            return Err(Error::InvalidParameter(
                "centered grid needs count >= 2 and half_width > 0".into(),
            ));
        }
        let h = (count - 1) as f64 / 2.0;
        let step = half_width / h;
        let points = (0..count)
            .map(|j| vec![center + step * (j as f64 - h)])
            .collect();
        Grid::from_points(points)
    }

    /// One-dimensional midpoint-rule grid: `count` cell centres covering
    /// `[lo, hi]`, each cell of width `(hi - lo) / count`.
    pub fn midpoint(lo: f64, hi: f64, count: usize) -> Result<Grid> {
        if count == 0 {
            return Err(Error::ZeroCount { dim: 0 });
        }
        if !(hi > lo) {
            return Err(Error::DegenerateInterval { dim: 0, lo, hi });
        }
        let h = (hi - lo) / count as f64;
        let points = (0..count).map(|k| vec![lo + h * (k as f64 + 0.5)]).collect();
        let mut g = Grid::from_points(points)?;
        g.bounds = vec![(lo, hi)];
        g.spacing = vec![h];
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// `Some` for grids built by [`make_uniform_grid`].
    pub fn spec(&self) -> Option<GridSpec> {
        self.counts.as_ref().map(|counts| GridSpec {
            bounds: self.bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            counts: counts.clone(),
        })
    }

    /// Index of the grid point closest to `y` in Euclidean distance; ties go
    /// to the lower index.
    pub fn nearest_index(&self, y: &[f64]) -> Result<usize> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        if let Some(counts) = &self.counts {
            // per-axis rounding on the product grid
            let mut index = 0usize;
            for (k, &v) in y.iter().enumerate() {
                let (lo, _) = self.bounds[k];
                let c = counts[k];
                let j = if c == 1 {
                    0
                } else {
                    let t = ((v - lo) / self.spacing[k]).round();
                    t.clamp(0.0, (c - 1) as f64) as usize
                };
                index = index * c + j;
            }
            return Ok(index);
        }
        let dist = |p: &Point| -> f64 { p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum() };
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = dist(p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(best)
    }
}

/// A subset of a grid, stored as a bitset over grid indices.
#[derive(Debug, Clone)]
pub struct Region {
    universe: Arc<Grid>,
    members: BitSet,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.members == other.members
    }
}

impl Eq for Region {}

fn same_universe(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Region {
    pub fn empty(universe: Arc<Grid>) -> Region {
        let members = BitSet::new(universe.len());
        Region { universe, members }
    }

    pub fn full(universe: Arc<Grid>) -> Region {
        let members = BitSet::full(universe.len());
        Region { universe, members }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(
        universe: Arc<Grid>,
        indices: I,
    ) -> Result<Region> {
        let len = universe.len();
        let mut members = BitSet::new(len);
        for i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            members.insert(i);
        }
        Ok(Region { universe, members })
    }

    pub(crate) fn from_bits(universe: Arc<Grid>, members: BitSet) -> Region {
        debug_assert_eq!(universe.len(), members.len());
        Region { universe, members }
    }

    /// Region of the grid points whose index satisfies `pred`.
    pub fn from_predicate(universe: Arc<Grid>, pred: impl Fn(usize) -> bool) -> Region {
        let members = BitSet::from_indices(universe.len(), (0..universe.len()).filter(|&i| pred(i)));
        Region { universe, members }
    }

    pub fn universe(&self) -> &Arc<Grid> {
        &self.universe
    }

    pub fn bits(&self) -> &BitSet {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(i)
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.ones().collect()
    }

    fn check(&self, other: &Region) -> Result<()> {
        if same_universe(&self.universe, &other.universe) {
            Ok(())
        } else {
            Err(Error::UniverseMismatch)
        }
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        self.check(other)?;
        Ok(Region::from_bits(self.universe.clone(), self.members.union(&other.members)))
    }

    pub fn intersection(&self, other: &Region) -> Result<Region> {
        self.check(other)?;
        Ok(Region::from_bits(
            self.universe.clone(),
            self.members.intersection(&other.members),
        ))
    }

    pub fn complement(&self) -> Region {
        Region::from_bits(self.universe.clone(), self.members.complement())
    }

    pub fn is_subset(&self, other: &Region) -> Result<bool> {
        self.check(other)?;
        Ok(self.members.is_subset(&other.members))
    }
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members.ones())
    }
}

/// Observed data `y^n`: `n >= 1` finite points of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    observations: Vec<Point>,
}

impl Sample {
    pub fn new(observations: Vec<Point>) -> Result<Sample> {
        let dim = observations.first().ok_or(Error::EmptySample)?.len();
        for o in &observations {
            if o.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: o.len(),
                });
            }
            if let Some(&v) = o.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "observation",
                    value: v,
                });
            }
        }
        Ok(Sample { observations })
    }

    /// Convenience constructor for scalar data.
    pub fn scalar(values: &[f64]) -> Result<Sample> {
        Sample::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn dim(&self) -> usize {
        self.observations[0].len()
    }

    pub fn points(&self) -> &[Point] {
        &self.observations
    }

    /// `y^{n+1} = y^n ∪ {candidate}` with the candidate last.
    pub fn with_candidate(&self, candidate: &[f64]) -> Result<Sample> {
        if candidate.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: candidate.len(),
            });
        }
        let mut obs = self.observations.clone();
        obs.push(candidate.to_vec());
        Sample::new(obs)
    }

    /// Removes observation `i` (1-based) and returns the rest, order kept,
    /// together with the held-out point.
    pub fn drop_index(&self, i: usize) -> Result<(Vec<Point>, Point)> {
        drop_index(&self.observations, i)
    }
}

/// Removes element `i` (1-based) from `points`, keeping the order of the rest.
pub fn drop_index(points: &[Point], i: usize) -> Result<(Vec<Point>, Point)> {
    if i == 0 || i > points.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: points.len(),
        });
    }
    let mut rest = points.to_vec();
    let held = rest.remove(i - 1);
    Ok((rest, held))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalars(g: &Grid) -> Vec<f64> {
        g.points().iter().map(|p| p[0]).collect()
    }

    #[test]
    fn two_point_grid_is_the_endpoints() {
        let g = make_uniform_grid(&[(0.0, 1.0)], &[2]).unwrap();
        assert_eq!(scalars(&g), vec![0.0, 1.0]);
    }

    #[test]
    fn unit_square_corners() {
        let g = make_uniform_grid(&[(0.0, 1.0), (0.0, 1.0)], &[2, 2]).unwrap();
        assert_eq!(
            g.points(),
            &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
    }

    #[test]
    fn five_points_on_symmetric_interval() {
        let g = make_uniform_grid(&[(-1.0, 1.0)], &[5]).unwrap();
        assert_eq!(scalars(&g), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.spacing(), &[0.5]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            make_uniform_grid(&[(1.0, 0.0)], &[3]),
            Err(Error::DegenerateInterval { .. })
        ));
        assert!(matches!(
            make_uniform_grid(&[(0.0, 1.0)], &[0]),
            Err(Error::ZeroCount { dim: 0 })
        ));
        assert!(make_uniform_grid(&[(2.0, 2.0)], &[1]).is_ok());
        assert!(Grid::from_points(vec![vec![1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn grid_spec_json() {
        let spec: GridSpec =
            serde_json::from_str(r#"{"bounds": [[-1, 1]], "counts": [5]}"#).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.spec().unwrap(), spec);
    }

    #[test]
    fn nearest_index_on_uniform_and_irregular() {
        let g = make_uniform_grid(&[(-1.0, 1.0)], &[5]).unwrap();
        assert_eq!(g.nearest_index(&[0.3]).unwrap(), 3);
        assert_eq!(g.nearest_index(&[-7.0]).unwrap(), 0);
        assert_eq!(g.nearest_index(&[7.0]).unwrap(), 4);
        let h = Grid::from_points(vec![vec![2.0], vec![0.0], vec![0.5]]).unwrap();
        assert_eq!(scalars(&h), vec![0.0, 0.5, 2.0]);
        assert_eq!(h.nearest_index(&[1.5]).unwrap(), 2);
    }

    #[test]
    fn centered_grid_contains_center_exactly() {
        let g = Grid::centered(0.3, 2.0, 101).unwrap();
        assert_eq!(g.point(50), &[0.3]);
        assert_eq!(g.len(), 101);
    }

    #[test]
    fn drop_index_examples() {
        let s = Sample::scalar(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.drop_index(2).unwrap(), (vec![vec![0.0], vec![2.0]], vec![1.0]));
        let s = Sample::scalar(&[5.0]).unwrap();
        assert_eq!(s.drop_index(1).unwrap(), (vec![], vec![5.0]));
        let s = Sample::scalar(&[0.0, 1.0, 0.5]).unwrap();
        assert_eq!(s.drop_index(3).unwrap(), (vec![vec![0.0], vec![1.0]], vec![0.5]));
        assert!(matches!(s.drop_index(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(s.drop_index(4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn sample_rejects_non_finite() {
        assert!(Sample::scalar(&[1.0, f64::NAN]).is_err());
        assert!(Sample::scalar(&[]).is_err());
    }

    #[test]
    fn region_examples() {
        let u = Arc::new(make_uniform_grid(&[(0.0, 1.0)], &[3]).unwrap());
        let a = Region::from_indices(u.clone(), [0, 1]).unwrap();
        let b = Region::from_indices(u.clone(), [1, 2]).unwrap();
        assert_eq!(a.intersection(&b).unwrap().indices(), vec![1]);
        assert!(Region::full(u.clone()).complement().is_empty());
        assert!(a.is_subset(&Region::full(u.clone())).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), "[0,1]");
        assert!(Region::from_indices(u.clone(), [3]).is_err());

        let other = Arc::new(make_uniform_grid(&[(0.0, 2.0)], &[3]).unwrap());
        assert!(matches!(
            a.union(&Region::empty(other)),
            Err(Error::UniverseMismatch)
        ));
    }

    proptest! {
        #[test]
        fn de_morgan(a in 0u32..(1 << 12), b in 0u32..(1 << 12)) {
            let u = Arc::new(make_uniform_grid(&[(0.0, 1.0)], &[12]).unwrap());
            let ra = Region::from_bits(u.clone(), BitSet::from_mask(12, a as u64));
            let rb = Region::from_bits(u.clone(), BitSet::from_mask(12, b as u64));
            prop_assert_eq!(
                ra.union(&rb).unwrap().complement(),
                ra.complement().intersection(&rb.complement()).unwrap()
            );
            prop_assert_eq!(
                ra.intersection(&rb).unwrap().complement(),
                ra.complement().union(&rb.complement()).unwrap()
            );
        }

        #[test]
        fn grid_points_within_bounds(lo in -50.0f64..50.0, w in 1e-3f64..100.0, c in 1usize..40) {
            let g = make_uniform_grid(&[(lo, lo + w)], &[c]).unwrap();
            for p in g.points() {
                let tol = 1e-12 * (1.0 + lo.abs() + w);
                prop_assert!(p[0] >= lo - tol && p[0] <= lo + w + tol);
            }
            prop_assert!(g.points().windows(2).all(|w| w[0][0] < w[1][0]));
        }

        #[test]
        fn drop_then_reinsert(values in proptest::collection::vec(-10.0f64..10.0, 1..10), seed in 0usize..100) {
            let s = Sample::scalar(&values).unwrap();
            let i = seed % values.len() + 1;
            let (mut rest, held) = s.drop_index(i).unwrap();
            rest.insert(i - 1, held);
            prop_assert_eq!(rest, s.points().to_vec());
        }
    }
}
