//! Law checking for correspondences between finite discrete sets: category
//! axioms, the monoidal product, and the hyperspace (Vietoris) monad.
//!
//! Elements of a hyperspace `K(X)` are nonempty subsets of `X`, encoded by
//! their bitmask and indexed by `mask - 1`. Elements of `K(K(X))` are masks
//! over those indices, so everything up to base size 4 fits in a `u64`.

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeSet;

/// Counterexamples kept per law; the total is still counted.
pub const MAX_WITNESSES: usize = 16;
/// Enumerations larger than this fall back to a reduced or randomized check.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 22;
/// Largest base for hyperspace constructions.
pub const MAX_VIETORIS_BASE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinSet {
    pub label: String,
    size: usize,
}

impl FinSet {
    pub fn new(label: impl Into<String>, size: usize) -> Result<FinSet> {
        if size == 0 {
            return Err(Error::SetSize { size, max: usize::MAX });
        }
        Ok(FinSet {
            label: label.into(),
            size,
        })
    }

    /// The monoidal unit, a one-point set.
    pub fn unit() -> FinSet {
        FinSet {
            label: "I".into(),
            size: 1,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Product set, with the pair `(a, b)` at index `a * |Y| + b`.
    pub fn product(&self, other: &FinSet) -> FinSet {
        FinSet {
            label: format!("({}⊗{})", self.label, other.label),
            size: self.size * other.size,
        }
    }
}

/// A set-valued map `X ⇉ Y`; equality is fiber-table equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteCorrespondence {
    source: FinSet,
    target: FinSet,
    fibers: Vec<BitSet>,
}

impl FiniteCorrespondence {
    pub fn new(source: FinSet, target: FinSet, fibers: Vec<Vec<usize>>) -> Result<Self> {
        if fibers.len() != source.size {
            return Err(Error::DimensionMismatch {
                expected: source.size,
                found: fibers.len(),
            });
        }
        let mut bits = Vec::with_capacity(fibers.len());
        for f in fibers {
            if let Some(&value) = f.iter().find(|&&v| v >= target.size) {
                return Err(Error::FiberOutOfRange {
                    value,
                    size: target.size,
                });
            }
            bits.push(BitSet::from_indices(target.size, f));
        }
        Ok(FiniteCorrespondence {
            source,
            target,
            fibers: bits,
        })
    }

    fn from_bits(source: FinSet, target: FinSet, fibers: Vec<BitSet>) -> Self {
        debug_assert!(fibers.len() == source.size && fibers.iter().all(|f| f.len() == target.size));
        FiniteCorrespondence {
            source,
            target,
            fibers,
        }
    }

    pub fn identity(x: &FinSet) -> Self {
        let fibers = (0..x.size).map(|i| BitSet::singleton(x.size, i)).collect();
        Self::from_bits(x.clone(), x.clone(), fibers)
    }

    pub fn source(&self) -> &FinSet {
        &self.source
    }

    pub fn target(&self) -> &FinSet {
        &self.target
    }

    pub fn fiber(&self, x: usize) -> &BitSet {
        &self.fibers[x]
    }

    pub fn fibers(&self) -> &[BitSet] {
        &self.fibers
    }

    /// `Φ[C] = ⋃_{x ∈ C} Φ(x)`.
    pub fn image(&self, c: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.target.size);
        for x in c.ones() {
            out.union_with(&self.fibers[x]);
        }
        out
    }

    pub fn require_nonempty(&self) -> Result<()> {
        match self.fibers.iter().position(BitSet::is_empty) {
            Some(element) => Err(Error::EmptyFiber { element }),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source,
            "target": self.target,
            "fibers": self.fibers.iter().map(|f| f.ones().collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// `Ψ ∘ Φ`, the fiberwise union `x ↦ ⋃_{y ∈ Φ(x)} Ψ(y)`.
pub fn compose(phi: &FiniteCorrespondence, psi: &FiniteCorrespondence) -> Result<FiniteCorrespondence> {
    if phi.target != psi.source {
        return Err(Error::EndpointMismatch {
            target: format!("{}[{}]", phi.target.label, phi.target.size),
            source_set: format!("{}[{}]", psi.source.label, psi.source.size),
        });
    }
    let fibers = phi.fibers.iter().map(|f| psi.image(f)).collect();
    Ok(FiniteCorrespondence::from_bits(
        phi.source.clone(),
        psi.target.clone(),
        fibers,
    ))
}

/// `(Φ ⊗ Ψ)(a, b) = Φ(a) × Ψ(b)`.
pub fn tensor(phi: &FiniteCorrespondence, psi: &FiniteCorrespondence) -> FiniteCorrespondence {
    let source = phi.source.product(&psi.source);
    let target = phi.target.product(&psi.target);
    let tb = psi.target.size;
    let mut fibers = Vec::with_capacity(source.size);
    for fa in &phi.fibers {
        for fb in &psi.fibers {
            let mut f = BitSet::new(target.size);
            for i in fa.ones() {
                for j in fb.ones() {
                    f.insert(i * tb + j);
                }
            }
            fibers.push(f);
        }
    }
    FiniteCorrespondence::from_bits(source, target, fibers)
}

/// Re-bracketing `(X⊗Y)⊗Z → X⊗(Y⊗Z)`. With lexicographic pairing both
/// sides enumerate triples in the same order, so the bijection is the
/// identity on indices between differently bracketed objects.
pub fn associator(x: &FinSet, y: &FinSet, z: &FinSet) -> FiniteCorrespondence {
    let source = x.product(y).product(z);
    let target = x.product(&y.product(z));
    relabel(source, target, |i| i)
}

/// `I ⊗ X → X`.
pub fn left_unitor(x: &FinSet) -> FiniteCorrespondence {
    relabel(FinSet::unit().product(x), x.clone(), |i| i)
}

/// `X ⊗ I → X`.
pub fn right_unitor(x: &FinSet) -> FiniteCorrespondence {
    relabel(x.product(&FinSet::unit()), x.clone(), |i| i)
}

fn relabel(source: FinSet, target: FinSet, f: impl Fn(usize) -> usize) -> FiniteCorrespondence {
    let fibers = (0..source.size)
        .map(|i| BitSet::singleton(target.size, f(i)))
        .collect();
    FiniteCorrespondence::from_bits(source, target, fibers)
}

/// Uniformly random correspondence; with `nonempty` every fiber gets at
/// least one element.
pub fn random_correspondence<R: Rng>(
    rng: &mut R,
    source: &FinSet,
    target: &FinSet,
    nonempty: bool,
) -> FiniteCorrespondence {
    let fibers = (0..source.size)
        .map(|_| loop {
            let f = BitSet::from_indices(target.size, (0..target.size).filter(|_| rng.gen_bool(0.5)));
            if !nonempty || !f.is_empty() {
                break f;
            }
        })
        .collect();
    FiniteCorrespondence::from_bits(source.clone(), target.clone(), fibers)
}

/// Number of correspondences `source ⇉ target`, saturating.
pub fn count_correspondences(source: usize, target: usize, nonempty: bool) -> u64 {
    let per_fiber = if target >= 64 {
        u64::MAX
    } else {
        (1u64 << target) - nonempty as u64
    };
    (0..source).fold(1u64, |acc, _| acc.saturating_mul(per_fiber))
}

/// Every correspondence `source ⇉ target`, in mixed-radix order of the
/// fiber masks.
pub fn all_correspondences(
    source: &FinSet,
    target: &FinSet,
    nonempty: bool,
) -> Result<Vec<FiniteCorrespondence>> {
    let total = count_correspondences(source.size, target.size, nonempty);
    if total > EXHAUSTIVE_LIMIT {
        return Err(Error::UniverseTooLarge {
            size: source.size * target.size,
            limit: 22,
        });
    }
    let lo = nonempty as u64;
    let radix = (1u64 << target.size) - lo;
    Ok((0..total)
        .map(|mut code| {
            let fibers = (0..source.size)
                .map(|_| {
                    let m = code % radix + lo;
                    code /= radix;
                    BitSet::from_mask(target.size, m)
                })
                .collect();
            FiniteCorrespondence::from_bits(source.clone(), target.clone(), fibers)
        })
        .collect())
}

/// Outcome of one law over a family of instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub law: String,
    pub instance_sizes: Vec<usize>,
    /// How the instances were chosen.
    pub mode: String,
    /// Instances checked.
    pub trials: u64,
    pub failures: u64,
    /// The first few failing instances.
    pub counterexamples: Vec<Value>,
}

impl LawReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

/// Runs `check` over `items` in parallel, keeping witnesses in input order.
fn run_law<T, F>(law: &str, sizes: &[usize], mode: &str, items: Vec<T>, check: F) -> LawReport
where
    T: Send + Sync,
    F: Fn(&T) -> Option<Value> + Sync + Send,
{
    let trials = items.len() as u64;
    let failed: Vec<Value> = items.par_iter().filter_map(check).collect();
    LawReport {
        law: law.into(),
        instance_sizes: sizes.to_vec(),
        mode: mode.into(),
        trials,
        failures: failed.len() as u64,
        counterexamples: failed.into_iter().take(MAX_WITNESSES).collect(),
    }
}

/// Generator for trial `t`; independent of scheduling.
pub(crate) fn trial_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

fn named_sets(sizes: &[usize]) -> Result<Vec<FinSet>> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| FinSet::new(format!("X{i}"), s))
        .collect()
}

fn check_sizes(sizes: &[usize], count: usize, max: usize) -> Result<()> {
    if sizes.len() != count {
        return Err(Error::InvalidParameter(format!(
            "expected {count} object sizes, got {}",
            sizes.len()
        )));
    }
    match sizes.iter().find(|&&s| s == 0 || s > max) {
        Some(&size) => Err(Error::SetSize { size, max }),
        None => Ok(()),
    }
}

/// Associativity and both unit laws for composable triples over objects of
/// sizes `[w, x, y, z]`.
///
/// With every size at most 3 the check is exhaustive. When the full triple
/// count exceeds [`EXHAUSTIVE_LIMIT`], the first arrow is enumerated from a
/// one-point source: composition acts fiber by fiber, so this covers every
/// possible fiber `Φ(w)` and is equivalent to full enumeration. Larger
/// sizes are checked on `trials` random triples.
pub fn check_category_axioms(sizes: &[usize], trials: u64, seed: u64) -> Result<Vec<LawReport>> {
    check_sizes(sizes, 4, 6)?;
    let objs = named_sets(sizes)?;
    let (w, x, y, z) = (&objs[0], &objs[1], &objs[2], &objs[3]);
    let exhaustive = sizes.iter().all(|&s| s <= 3);

    let assoc_check = |(phi, psi, theta): &(
        FiniteCorrespondence,
        FiniteCorrespondence,
        FiniteCorrespondence,
    )| {
        let lhs = compose(&compose(phi, psi).ok()?, theta).ok()?;
        let rhs = compose(phi, &compose(psi, theta).ok()?).ok()?;
        (lhs != rhs).then(|| {
            json!({"phi": phi.to_json(), "psi": psi.to_json(), "theta": theta.to_json(),
                   "lhs": lhs.to_json(), "rhs": rhs.to_json()})
        })
    };
    let unit_check = |phi: &FiniteCorrespondence| {
        let left = compose(phi, &FiniteCorrespondence::identity(&phi.target)).ok()?;
        let right = compose(&FiniteCorrespondence::identity(&phi.source), phi).ok()?;
        (left != *phi || right != *phi).then(|| json!({"phi": phi.to_json()}))
    };

    let (assoc, units) = if exhaustive {
        let full = count_correspondences(w.size, x.size, false)
            .saturating_mul(count_correspondences(x.size, y.size, false))
            .saturating_mul(count_correspondences(y.size, z.size, false));
        let (first_source, mode) = if full <= EXHAUSTIVE_LIMIT {
            (w.clone(), "exhaustive")
        } else {
            (FinSet::new("W1", 1)?, "exhaustive-fiberwise")
        };
        let phis = all_correspondences(&first_source, x, false)?;
        let psis = all_correspondences(x, y, false)?;
        let thetas = all_correspondences(y, z, false)?;
        let (np, nq, nr) = (phis.len(), psis.len(), thetas.len());
        let assoc = run_law("associativity", sizes, mode, (0..np * nq * nr).collect(), |&i| {
            let t = (
                phis[i / (nq * nr)].clone(),
                psis[i / nr % nq].clone(),
                thetas[i % nr].clone(),
            );
            assoc_check(&t)
        });
        let units = run_law(
            "unit_laws",
            sizes,
            "exhaustive",
            all_correspondences(w, x, false)?,
            unit_check,
        );
        (assoc, units)
    } else {
        let triples: Vec<_> = (0..trials)
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                (
                    random_correspondence(&mut rng, w, x, false),
                    random_correspondence(&mut rng, x, y, false),
                    random_correspondence(&mut rng, y, z, false),
                )
            })
            .collect();
        let phis: Vec<_> = triples.iter().map(|t| t.0.clone()).collect();
        (
            run_law("associativity", sizes, "randomized", triples, assoc_check),
            run_law("unit_laws", sizes, "randomized", phis, unit_check),
        )
    };
    Ok(vec![assoc, units])
}

/// Bifunctoriality, `id ⊗ id = id`, naturality of the unitors and the
/// associator, and the pentagon and triangle identities, for objects of
/// sizes `[a, b, c, d, e, f]` and arrows `Φ₁: a→b`, `Ψ₁: b→c`, `Φ₂: d→e`,
/// `Ψ₂: e→f`. Families small enough are enumerated; the rest use `trials`
/// random draws.
pub fn check_tensor_laws(sizes: &[usize], trials: u64, seed: u64) -> Result<Vec<LawReport>> {
    check_sizes(sizes, 6, 6)?;
    let o = named_sets(sizes)?;
    let (a, b, c, d, e, f) = (&o[0], &o[1], &o[2], &o[3], &o[4], &o[5]);
    let n = |s: &FinSet, t: &FinSet| count_correspondences(s.size, t.size, false);
    let mut reports = Vec::new();

    // (Ψ₁∘Φ₁)⊗(Ψ₂∘Φ₂) = (Ψ₁⊗Ψ₂)∘(Φ₁⊗Φ₂)
    let quads = arrows(
        &[(a, b), (b, c), (d, e), (e, f)],
        n(a, b)
            .saturating_mul(n(b, c))
            .saturating_mul(n(d, e))
            .saturating_mul(n(e, f)),
        trials,
        seed,
    )?;
    reports.push(run_law("tensor_bifunctoriality", sizes, &quads.0, quads.1, |q| {
        let lhs = tensor(&compose(&q[0], &q[1]).ok()?, &compose(&q[2], &q[3]).ok()?);
        let rhs = compose(&tensor(&q[0], &q[2]), &tensor(&q[1], &q[3])).ok()?;
        (lhs != rhs).then(|| json!({"arrows": q.iter().map(|p| p.to_json()).collect::<Vec<_>>()}))
    }));

    reports.push(run_law("tensor_identity", sizes, "exhaustive", vec![(a, d)], |(x, y)| {
        let lhs = tensor(&FiniteCorrespondence::identity(x), &FiniteCorrespondence::identity(y));
        (lhs != FiniteCorrespondence::identity(&x.product(y))).then(|| json!({"lhs": lhs.to_json()}))
    }));

    // λ_b ∘ (id_I ⊗ Φ) = Φ ∘ λ_a and the same for ρ
    let singles = arrows(&[(a, b)], n(a, b), trials, seed)?;
    reports.push(run_law("unitor_naturality", sizes, &singles.0, singles.1, |q| {
        let phi = &q[0];
        let id_i = FiniteCorrespondence::identity(&FinSet::unit());
        let l1 = compose(&tensor(&id_i, phi), &left_unitor(&phi.target)).ok()?;
        let l2 = compose(&left_unitor(&phi.source), phi).ok()?;
        let r1 = compose(&tensor(phi, &id_i), &right_unitor(&phi.target)).ok()?;
        let r2 = compose(&right_unitor(&phi.source), phi).ok()?;
        (l1 != l2 || r1 != r2).then(|| json!({"phi": phi.to_json()}))
    }));

    // α ∘ ((Φ₁⊗Φ₂)⊗Φ₃) = (Φ₁⊗(Φ₂⊗Φ₃)) ∘ α
    let triples = arrows(
        &[(a, b), (d, e), (c, f)],
        n(a, b).saturating_mul(n(d, e)).saturating_mul(n(c, f)),
        trials,
        seed,
    )?;
    reports.push(run_law("associator_naturality", sizes, &triples.0, triples.1, |q| {
        let (p1, p2, p3) = (&q[0], &q[1], &q[2]);
        let lhs = compose(
            &tensor(&tensor(p1, p2), p3),
            &associator(&p1.target, &p2.target, &p3.target),
        )
        .ok()?;
        let rhs = compose(
            &associator(&p1.source, &p2.source, &p3.source),
            &tensor(p1, &tensor(p2, p3)),
        )
        .ok()?;
        (lhs != rhs).then(|| json!({"arrows": [p1.to_json(), p2.to_json(), p3.to_json()]}))
    }));

    reports.push(run_law(
        "pentagon_triangle",
        sizes,
        "exhaustive",
        vec![(a, b, c, d)],
        |&(w, x, y, z)| {
            let id = FiniteCorrespondence::identity;
            // ((WX)Y)Z → (WX)(YZ) → W(X(YZ))
            let top = compose(
                &associator(&w.product(x), y, z),
                &associator(w, x, &y.product(z)),
            )
            .ok()?;
            // ((WX)Y)Z → (W(XY))Z → W((XY)Z) → W(X(YZ))
            let bottom = compose(
                &compose(
                    &tensor(&associator(w, x, y), &id(z)),
                    &associator(w, &x.product(y), z),
                )
                .ok()?,
                &tensor(&id(w), &associator(x, y, z)),
            )
            .ok()?;
            // (W⊗I)⊗X → W⊗X both ways
            let t1 = compose(&associator(w, &FinSet::unit(), x), &tensor(&id(w), &left_unitor(x))).ok()?;
            let t2 = tensor(&right_unitor(w), &id(x));
            (top != bottom || t1 != t2).then(|| json!({"sizes": [w.size, x.size, y.size, z.size]}))
        },
    ));
    Ok(reports)
}

/// Arrow tuples for the given endpoint pairs: every tuple when `total` is
/// within [`EXHAUSTIVE_LIMIT`], otherwise `trials` random ones.
fn arrows(
    ends: &[(&FinSet, &FinSet)],
    total: u64,
    trials: u64,
    seed: u64,
) -> Result<(String, Vec<Vec<FiniteCorrespondence>>)> {
    if total <= EXHAUSTIVE_LIMIT {
        let mut tuples: Vec<Vec<FiniteCorrespondence>> = vec![Vec::new()];
        for (s, t) in ends {
            let all = all_correspondences(s, t, false)?;
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    all.iter().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c.clone());
                        v
                    })
                })
                .collect();
        }
        Ok(("exhaustive".into(), tuples))
    } else {
        let tuples = (0..trials)
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                ends.iter()
                    .map(|(s, t)| random_correspondence(&mut rng, s, t, false))
                    .collect()
            })
            .collect();
        Ok(("randomized".into(), tuples))
    }
}

/// Which action on arrows the hyperspace functor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VietorisVariant {
    /// `T(Φ)(C) = {Φ[C]}`.
    Singleton,
    /// `T(Φ)(C) = {L : L ⊆ Φ[C]}`.
    DownSet,
}

/// How two fibers of hyperspace arrows are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Literal,
    /// Equality after closing each fiber under nonempty subsets.
    DownClosure,
}

/// `K(X)`: the nonempty subsets of a finite base set.
#[derive(Debug, Clone, PartialEq)]
pub struct VietorisObject {
    base: FinSet,
    elements: Vec<BitSet>,
}

impl VietorisObject {
    pub fn new(base: &FinSet) -> Result<Self> {
        if base.size > 16 {
            return Err(Error::SetSize {
                size: base.size,
                max: 16,
            });
        }
        let elements = (1..1u64 << base.size)
            .map(|m| BitSet::from_mask(base.size, m))
            .collect();
        Ok(VietorisObject {
            base: base.clone(),
            elements,
        })
    }

    pub fn base(&self) -> &FinSet {
        &self.base
    }

    pub fn elements(&self) -> &[BitSet] {
        &self.elements
    }

    pub fn index_of(&self, c: &BitSet) -> Option<usize> {
        (c.len() == self.base.size && !c.is_empty()).then(|| c.to_mask() as usize - 1)
    }

    pub fn as_finset(&self) -> FinSet {
        FinSet {
            label: format!("K({})", self.base.label),
            size: self.elements.len(),
        }
    }
}

/// Nonempty submasks of `m`, in decreasing order.
fn submasks(m: u64) -> impl Iterator<Item = u64> {
    let mut s = m;
    let mut done = m == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = s;
        s = (s - 1) & m;
        done = s == 0;
        Some(out)
    })
}

/// `T(Φ): K(X) ⇉ K(Y)` for the chosen variant.
pub fn vietoris_map(phi: &FiniteCorrespondence, variant: VietorisVariant) -> Result<FiniteCorrespondence> {
    phi.require_nonempty()?;
    let kx = VietorisObject::new(&phi.source)?;
    let ky = VietorisObject::new(&phi.target)?;
    let len = ky.elements.len();
    let fibers = kx
        .elements
        .iter()
        .map(|c| {
            let img = phi.image(c).to_mask();
            match variant {
                VietorisVariant::Singleton => BitSet::singleton(len, img as usize - 1),
                VietorisVariant::DownSet => {
                    BitSet::from_indices(len, submasks(img).map(|s| s as usize - 1))
                }
            }
        })
        .collect();
    Ok(FiniteCorrespondence::from_bits(kx.as_finset(), ky.as_finset(), fibers))
}

/// Unit `η_X: X ⇉ K(X)`, `x ↦ {{x}}`.
pub fn unit(x: &FinSet) -> Result<FiniteCorrespondence> {
    let kx = VietorisObject::new(x)?;
    let len = kx.elements.len();
    let fibers = (0..x.size)
        .map(|i| BitSet::singleton(len, (1usize << i) - 1))
        .collect();
    Ok(FiniteCorrespondence::from_bits(x.clone(), kx.as_finset(), fibers))
}

/// Multiplication `ν_X: K(K(X)) ⇉ K(X)`, `𝓕 ↦ {⋃𝓕}`.
pub fn multiplication(x: &FinSet) -> Result<FiniteCorrespondence> {
    if x.size > MAX_VIETORIS_BASE {
        return Err(Error::SetSize {
            size: x.size,
            max: MAX_VIETORIS_BASE,
        });
    }
    let kx = VietorisObject::new(x)?;
    let kkx = VietorisObject::new(&kx.as_finset())?;
    let len = kx.elements.len();
    let fibers = (1..=kkx.elements.len() as u64)
        .map(|fam| BitSet::singleton(len, union_of_family(fam) as usize - 1))
        .collect();
    Ok(FiniteCorrespondence::from_bits(kkx.as_finset(), kx.as_finset(), fibers))
}

/// Union of a family of subsets, both given as masks.
fn union_of_family(fam: u64) -> u64 {
    mask_ones(fam).fold(0, |acc, i| acc | (i as u64 + 1))
}

fn mask_ones(m: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| m >> i & 1 == 1)
}

fn mask_json(m: u64) -> Value {
    json!(mask_ones(m).collect::<Vec<_>>())
}

fn family_json(fam: u64) -> Value {
    Value::Array(mask_ones(fam).map(|i| mask_json(i as u64 + 1)).collect())
}

type Fiber = BTreeSet<u64>;

/// Fiber of `T(f)` at a family whose image under `f` is the mask `img`.
fn lift(img: u64, variant: VietorisVariant) -> Fiber {
    match variant {
        VietorisVariant::Singleton => BTreeSet::from([img]),
        VietorisVariant::DownSet => submasks(img).collect(),
    }
}

/// Set of subsets (as masks) to the mask of their indices in `K(X)`.
fn as_family(sets: impl IntoIterator<Item = u64>) -> u64 {
    sets.into_iter().fold(0, |acc, s| acc | 1 << (s - 1))
}

fn down_close(f: &Fiber) -> Fiber {
    f.iter().flat_map(|&m| submasks(m)).collect()
}

fn same(a: &Fiber, b: &Fiber, cmp: Comparison) -> bool {
    match cmp {
        Comparison::Literal => a == b,
        Comparison::DownClosure => down_close(a) == down_close(b),
    }
}

fn fiber_json(f: &Fiber) -> Value {
    Value::Array(f.iter().map(|&m| mask_json(m)).collect())
}

/// Left unit `ν∘T(η) = id`, right unit `ν∘η_T = id` over `K(X)`, and
/// associativity `ν∘T(ν) = ν∘ν_T` over `K(K(K(X)))`.
///
/// Both sides of the associativity law send a union of families to the
/// union of their values, so they agree everywhere iff they agree on the
/// one-member families. Base sizes up to 2 are enumerated in full. Size 3
/// checks every one- and two-member family, size 4 every one-member family,
/// and both add `trials` random families of up to eight members.
pub fn check_monad_laws(
    base_size: usize,
    variant: VietorisVariant,
    cmp: Comparison,
    trials: u64,
    seed: u64,
) -> Result<Vec<LawReport>> {
    if base_size == 0 || base_size > MAX_VIETORIS_BASE {
        return Err(Error::SetSize {
            size: base_size,
            max: MAX_VIETORIS_BASE,
        });
    }
    let sizes = [base_size];
    let k1 = (1u64 << base_size) - 1;
    let k2 = (1u64 << k1) - 1;
    let sets: Vec<u64> = (1..=k1).collect();

    let left = run_law("unit_left", &sizes, "exhaustive", sets.clone(), |&c| {
        // T(η)(C) then ν on each member
        let eta_img = as_family(mask_ones(c).map(|x| 1u64 << x));
        let lhs: Fiber = lift(eta_img, variant).into_iter().map(union_of_family).collect();
        let rhs = BTreeSet::from([c]);
        (!same(&lhs, &rhs, cmp)).then(|| json!({"element": mask_json(c), "lhs": fiber_json(&lhs)}))
    });
    let right = run_law("unit_right", &sizes, "exhaustive", sets, |&c| {
        let lhs = BTreeSet::from([union_of_family(as_family([c]))]);
        (!same(&lhs, &BTreeSet::from([c]), cmp))
            .then(|| json!({"element": mask_json(c), "lhs": fiber_json(&lhs)}))
    });

    let (mode, families) = match base_size {
        1 | 2 => ("exhaustive", all_families(k2)),
        _ => {
            let mut fams: Vec<Vec<u64>> = (1..=k2).map(|f| vec![f]).collect();
            let mut mode = "one-member families + random";
            if base_size == 3 {
                mode = "one- and two-member families + random";
                for f in 1..=k2 {
                    for g in f + 1..=k2 {
                        fams.push(vec![f, g]);
                    }
                }
            }
            for t in 0..trials {
                let mut rng = trial_rng(seed, t);
                let m = rng.gen_range(1..=8usize.min(k2 as usize));
                let mut fam: Vec<u64> = sample(&mut rng, k2 as usize, m)
                    .into_iter()
                    .map(|i| i as u64 + 1)
                    .collect();
                fam.sort_unstable();
                fams.push(fam);
            }
            (mode, fams)
        }
    };
    let assoc = run_law("associativity", &sizes, mode, families, |fam| {
        // T(ν)(𝔉): images ν(F) for F ∈ 𝔉, lifted, then ν on each member
        let nu_img = as_family(fam.iter().map(|&f| union_of_family(f)));
        let lhs: Fiber = lift(nu_img, variant).into_iter().map(union_of_family).collect();
        // ν_T(𝔉) = ⋃𝔉, then ν
        let flat = fam.iter().fold(0, |acc, &f| acc | f);
        let rhs = BTreeSet::from([union_of_family(flat)]);
        (!same(&lhs, &rhs, cmp)).then(|| {
            json!({"family": fam.iter().map(|&f| family_json(f)).collect::<Vec<_>>(),
                   "lhs": fiber_json(&lhs), "rhs": fiber_json(&rhs)})
        })
    });
    Ok(vec![left, right, assoc])
}

/// All nonempty subsets of `{1..=k}` as sorted lists.
fn all_families(k: u64) -> Vec<Vec<u64>> {
    (1..1u64 << k)
        .map(|m| mask_ones(m).map(|i| i as u64 + 1).collect())
        .collect()
}

fn fibers_match(a: &FiniteCorrespondence, b: &FiniteCorrespondence, cmp: Comparison) -> bool {
    if a.source != b.source || a.target != b.target {
        return false;
    }
    let to_fiber = |f: &BitSet| -> Fiber { f.ones().map(|i| i as u64 + 1).collect() };
    a.fibers
        .iter()
        .zip(&b.fibers)
        .all(|(x, y)| same(&to_fiber(x), &to_fiber(y), cmp))
}

/// `T(id) = id` and `T(Ψ∘Φ) = T(Ψ)∘T(Φ)` over every object size up to
/// `max_size` (at most 3) and every pair of composable arrows with
/// nonempty fibers.
pub fn check_functor_laws(
    max_size: usize,
    variant: VietorisVariant,
    cmp: Comparison,
) -> Result<Vec<LawReport>> {
    if max_size == 0 || max_size > 3 {
        return Err(Error::SetSize {
            size: max_size,
            max: 3,
        });
    }
    let objs: Vec<FinSet> = (1..=max_size)
        .map(|s| FinSet::new(format!("X{s}"), s))
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = (1..=max_size).collect();

    let ident = run_law("functor_identity", &sizes, "exhaustive", objs.clone(), |x| {
        let t = vietoris_map(&FiniteCorrespondence::identity(x), variant).ok()?;
        let kx = VietorisObject::new(x).ok()?.as_finset();
        (!fibers_match(&t, &FiniteCorrespondence::identity(&kx), cmp))
            .then(|| json!({"size": x.size, "t_id": t.to_json()}))
    });

    let mut pairs = Vec::new();
    for a in &objs {
        for b in &objs {
            for c in &objs {
                let phis = all_correspondences(a, b, true)?;
                let psis = all_correspondences(b, c, true)?;
                for phi in &phis {
                    for psi in &psis {
                        pairs.push((phi.clone(), psi.clone()));
                    }
                }
            }
        }
    }
    let comp = run_law("functor_composition", &sizes, "exhaustive", pairs, |(phi, psi)| {
        let lhs = vietoris_map(&compose(phi, psi).ok()?, variant).ok()?;
        let rhs = compose(&vietoris_map(phi, variant).ok()?, &vietoris_map(psi, variant).ok()?).ok()?;
        (!fibers_match(&lhs, &rhs, cmp)).then(|| json!({"phi": phi.to_json(), "psi": psi.to_json()}))
    });
    Ok(vec![ident, comp])
}
