//! Possibility functions, their conjugate lower probabilities, credal sets
//! given by possibility dominance, and imprecise highest density regions.
//!
//! A credal set is never enumerated: it is carried by its dominating
//! consonant contour and queried through `Π̄` and `Π̲` only.

use crate::error::{Error, Result};
use crate::fullcp::{normalize_consonant, transducer, Transducer};
use crate::grid::{Grid, Region, Sample};
use crate::scores::Nonconformity;
use std::io::Write;
use std::sync::Arc;

/// Largest universe `is_member` will enumerate (`2^20` subsets).
pub const MEMBERSHIP_LIMIT: usize = 20;
/// Largest universe `ihdr_bruteforce` will enumerate (`2^16` subsets).
pub const BRUTEFORCE_LIMIT: usize = 16;
/// Slack on dominance checks `P(A) <= Π̄(A)`.
pub const DOMINANCE_TOL: f64 = 1e-12;

/// A consonant contour: values in `[0, 1]` with maximum exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PossibilityContour {
    universe: Arc<Grid>,
    contour: Vec<f64>,
}

impl PossibilityContour {
    pub fn new(universe: Arc<Grid>, contour: Vec<f64>) -> Result<Self> {
        if contour.len() != universe.len() {
            return Err(Error::DimensionMismatch {
                expected: universe.len(),
                found: contour.len(),
            });
        }
        for (index, &value) in contour.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidContour { index, value });
            }
        }
        let max = contour.iter().copied().fold(0.0, f64::max);
        if max != 1.0 {
            return Err(Error::NotConsonant { max });
        }
        Ok(PossibilityContour { universe, contour })
    }

    /// Contour of a consonant transducer.
    pub fn from_transducer(t: &Transducer) -> Result<Self> {
        PossibilityContour::new(t.universe().clone(), t.values())
    }

    pub fn universe(&self) -> &Arc<Grid> {
        &self.universe
    }

    pub fn values(&self) -> &[f64] {
        &self.contour
    }

    pub fn len(&self) -> usize {
        self.contour.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contour.is_empty()
    }

    /// True iff `alpha` is not one of the contour's values.
    pub fn is_generic_level(&self, alpha: f64) -> bool {
        !self.contour.contains(&alpha)
    }

    fn check(&self, a: &Region) -> Result<()> {
        if Arc::ptr_eq(&self.universe, a.universe()) || *self.universe == **a.universe() {
            Ok(())
        } else {
            Err(Error::UniverseMismatch)
        }
    }

    /// `max_{i ∈ mask} contour[i]` for a subset given as a bitmask.
    fn sup_mask(&self, mask: u32) -> f64 {
        let mut m = mask;
        let mut best = 0.0f64;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            best = best.max(self.contour[i]);
            m &= m - 1;
        }
        best
    }
}

/// `Π̄(A) = max_{y ∈ A} π(y)`, zero on the empty set.
pub fn upper_prob(c: &PossibilityContour, a: &Region) -> Result<f64> {
    c.check(a)?;
    Ok(a.bits().ones().map(|i| c.contour[i]).fold(0.0, f64::max))
}

/// `Π̲(A) = 1 − Π̄(Aᶜ)`.
pub fn lower_prob(c: &PossibilityContour, a: &Region) -> Result<f64> {
    Ok(1.0 - upper_prob(c, &a.complement())?)
}

/// A probability mass function on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    universe: Arc<Grid>,
    mass: Vec<f64>,
}

impl ProbVector {
    pub fn new(universe: Arc<Grid>, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != universe.len() {
            return Err(Error::DimensionMismatch {
                expected: universe.len(),
                found: mass.len(),
            });
        }
        if let Some(&m) = mass.iter().find(|&&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidProbVector(format!("negative or non-finite mass {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbVector(format!("masses sum to {total}")));
        }
        Ok(ProbVector { universe, mass })
    }

    pub fn point_mass(universe: Arc<Grid>, at: usize) -> Result<Self> {
        let mut mass = vec![0.0; universe.len()];
        *mass.get_mut(at).ok_or(Error::IndexOutOfRange {
            index: at,
            len: universe.len(),
        })? = 1.0;
        ProbVector::new(universe, mass)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

/// The credal set `{P : P(A) <= Π̄(A) ∀A}`, held by its contour.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSpec {
    pub contour: PossibilityContour,
}

impl CredalSpec {
    pub fn new(contour: PossibilityContour) -> Self {
        CredalSpec { contour }
    }

    pub fn universe(&self) -> &Arc<Grid> {
        self.contour.universe()
    }
}

/// `CRED(y^n, ψ)`: the credal set of the normalized conformal transducer.
pub fn cred<P: Nonconformity + ?Sized>(
    y_n: &Sample,
    psi: &P,
    universe: &Arc<Grid>,
) -> Result<CredalSpec> {
    let t = transducer(y_n, psi, universe)?;
    cred_from_transducer(&t)
}

pub fn cred_from_transducer(t: &Transducer) -> Result<CredalSpec> {
    Ok(CredalSpec::new(PossibilityContour::from_transducer(&normalize_consonant(t))?))
}

/// Writes a transducer-derived contour: the transducer CSV columns plus a
/// `normalized` flag.
pub fn write_contour_csv<W: Write>(t: &Transducer, out: W) -> Result<()> {
    t.write_rows(out, true)
}

fn enumeration_guard(size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(Error::UniverseTooLarge { size, limit })
    } else {
        Ok(())
    }
}

/// Dominance check `P(A) <= Π̄(A) + 1e-12` over every subset `A`.
pub fn is_member(p: &ProbVector, cs: &CredalSpec) -> Result<bool> {
    let c = &cs.contour;
    if !(Arc::ptr_eq(&p.universe, c.universe()) || *p.universe == **c.universe()) {
        return Err(Error::UniverseMismatch);
    }
    let m = c.len();
    enumeration_guard(m, MEMBERSHIP_LIMIT)?;
    let subsets = 1usize << m;
    let mut prob = vec![0.0f64; subsets];
    let mut sup = vec![0.0f64; subsets];
    for mask in 1..subsets {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        prob[mask] = prob[rest] + p.mass[low];
        sup[mask] = sup[rest].max(c.contour[low]);
        if prob[mask] > sup[mask] + DOMINANCE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `IHDR_α = ⋂ {A : Π̲(A) >= 1 − α}` by enumerating every subset.
pub fn ihdr_bruteforce(alpha: f64, cs: &CredalSpec) -> Result<Region> {
    let c = &cs.contour;
    let m = c.len();
    enumeration_guard(m, BRUTEFORCE_LIMIT)?;
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let threshold = 1.0 - alpha;
    // the full set always qualifies, so the family is never empty
    let mut meet = full;
    for mask in 0..=full {
        let lower = 1.0 - c.sup_mask(full & !mask);
        if lower >= threshold {
            meet &= mask;
        }
    }
    Region::from_indices(c.universe().clone(), (0..m).filter(|&i| meet & (1 << i) != 0))
}

/// Closed form of the IHDR for a consonant contour: `{y : π(y) > α}`.
pub fn ihdr_contour(alpha: f64, cs: &CredalSpec) -> Region {
    let c = &cs.contour;
    Region::from_predicate(c.universe().clone(), |i| c.contour[i] > alpha)
}

fn ihdr(alpha: f64, cs: &CredalSpec) -> Result<Region> {
    if cs.contour.len() <= BRUTEFORCE_LIMIT {
        ihdr_bruteforce(alpha, cs)
    } else {
        Ok(ihdr_contour(alpha, cs))
    }
}

fn dominated(small: &CredalSpec, big: &CredalSpec) -> Result<()> {
    let (a, b) = (&small.contour, &big.contour);
    if !(Arc::ptr_eq(a.universe(), b.universe()) || **a.universe() == **b.universe()) {
        return Err(Error::UniverseMismatch);
    }
    if let Some(i) = (0..a.len()).find(|&i| a.contour[i] > b.contour[i]) {
        return Err(Error::Precondition(format!(
            "contour not dominated at index {i}: {} > {}",
            a.contour[i], b.contour[i]
        )));
    }
    Ok(())
}

/// Monotonicity of `IHDR_α` along the inclusion `M(π_small) ⊆ M(π_big)`
/// given by pointwise dominance of the contours.
pub fn check_functor_monotone(
    cs_small: &CredalSpec,
    cs_big: &CredalSpec,
    alpha: f64,
) -> Result<bool> {
    dominated(cs_small, cs_big)?;
    ihdr(alpha, cs_small)?.is_subset(&ihdr(alpha, cs_big)?)
}

/// Functor law on a chain `a ⊆ b ⊆ c`: both steps are nested and the
/// composite inclusion maps to the composite of the two nestings.
pub fn check_functor_chain(
    a: &CredalSpec,
    b: &CredalSpec,
    c: &CredalSpec,
    alpha: f64,
) -> Result<bool> {
    dominated(a, b)?;
    dominated(b, c)?;
    let (ra, rb, rc) = (ihdr(alpha, a)?, ihdr(alpha, b)?, ihdr(alpha, c)?);
    let steps = ra.is_subset(&rb)? && rb.is_subset(&rc)?;
    let composite = ra.is_subset(&rc)?;
    Ok(steps && composite)
}
