//! Nonconformity measures.
//!
//! A measure `ψ(y^n, y)` scores how strange `y` looks next to the sample
//! `y^n` and must be invariant to permutations of the sample. Floating-point
//! sums are not associative, so every sample average here is taken over the
//! values in sorted order: the result depends only on the multiset, which
//! makes permutation invariance hold bit for bit.

use crate::error::{Error, Result};
use crate::grid::{Point, Sample};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Anything usable as `ψ` in the conformal transducer.
pub trait Nonconformity: Sync {
    /// `ψ(sample, y)`.
    fn score(&self, sample: &[Point], y: &[f64]) -> f64;

    /// `ψ(all \ {all[i]}, all[i])` for a 0-based `i`.
    fn score_leave_one_out(&self, all: &[Point], i: usize) -> f64 {
        let mut rest = all.to_vec();
        let held = rest.remove(i);
        self.score(&rest, &held)
    }

    /// Dimension of the state space this measure accepts, if it is fixed.
    fn input_dim(&self) -> Option<usize> {
        None
    }
}

/// Sum of `values` taken in ascending order.
fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Componentwise mean of the rows produced by `rows`, order-independent.
fn canonical_mean<'a, I>(rows: I, dim: usize) -> Vec<f64>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let n = rows.clone().count() as f64;
    let mut buf = Vec::new();
    (0..dim)
        .map(|k| {
            buf.clear();
            buf.extend(rows.clone().map(|r| r[k]));
            canonical_sum(&mut buf) / n
        })
        .collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `out x in` weight matrix.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Feed-forward embedding `φ_θ`: affine layers with a rectifier between them
/// and a linear output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingNet {
    pub layers: Vec<Layer>,
}

impl EmbeddingNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let net = EmbeddingNet { layers };
        net.validate()?;
        Ok(net)
    }

    pub fn identity(dim: usize) -> Self {
        let weights = (0..dim)
            .map(|j| (0..dim).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        EmbeddingNet {
            layers: vec![Layer {
                weights,
                bias: vec![0.0; dim],
            }],
        }
    }

    /// All weights and biases zero: a constant embedding.
    pub fn zeros(input: usize, output: usize) -> Self {
        EmbeddingNet {
            layers: vec![Layer {
                weights: vec![vec![0.0; input]; output],
                bias: vec![0.0; output],
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .layers
            .first()
            .ok_or_else(|| Error::InvalidParameter("embedding net has no layers".into()))?;
        let mut width = first.weights.first().map(Vec::len).unwrap_or(0);
        if width == 0 {
            return Err(Error::InvalidParameter("embedding input dimension is 0".into()));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.weights.is_empty() || layer.weights.len() != layer.bias.len() {
                return Err(Error::InvalidParameter(format!(
                    "layer {l}: {} weight rows but {} biases",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            for row in &layer.weights {
                if row.len() != width {
                    return Err(Error::DimensionMismatch {
                        expected: width,
                        found: row.len(),
                    });
                }
            }
            let all = layer.weights.iter().flatten().chain(&layer.bias);
            if let Some(&v) = all.into_iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "embedding weight",
                    value: v,
                });
            }
            width = layer.weights.len();
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.bias.len()).unwrap_or(0)
    }

    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut h = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            h = layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(row, b)| {
                    let z = row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b;
                    if l < last {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
        }
        h
    }
}

/// The shipped nonconformity measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum ScoreFn {
    /// `‖mean(y^n) − y‖₂` (absolute difference for scalar data).
    MeanAbsDistance,
    /// `−‖φ(y) − mean φ(y_i)‖²`, the negated squared distance to the
    /// embedded prototype. Large values mean *conforming*.
    PrototypeEmbedding(EmbeddingNet),
    /// `−p(y | y^n)` for a Gaussian predictive frozen at construction; the
    /// sample argument is ignored.
    NegPredictiveDensity { mean: f64, sd: f64 },
}

pub(crate) fn gaussian_pdf(y: f64, mean: f64, sd: f64) -> f64 {
    let z = (y - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

impl ScoreFn {
    fn eval<'a, I>(&self, rows: I, y: &[f64]) -> f64
    where
        I: Iterator<Item = &'a [f64]> + Clone,
    {
        match self {
            ScoreFn::MeanAbsDistance => {
                let mean = canonical_mean(rows, y.len());
                euclidean(&mean, y)
            }
            ScoreFn::PrototypeEmbedding(net) => {
                let embedded: Vec<Vec<f64>> = rows.map(|r| net.embed(r)).collect();
                let proto = canonical_mean(embedded.iter().map(Vec::as_slice), net.output_dim());
                -sq_dist(&net.embed(y), &proto)
            }
            ScoreFn::NegPredictiveDensity { mean, sd } => -gaussian_pdf(y[0], *mean, *sd),
        }
    }

    /// Checks that the measure can score points of dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ScoreFn::MeanAbsDistance => Ok(()),
            ScoreFn::PrototypeEmbedding(net) => {
                net.validate()?;
                if net.input_dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: net.input_dim(),
                        found: dim,
                    });
                }
                Ok(())
            }
            ScoreFn::NegPredictiveDensity { mean, sd } => {
                if dim != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        found: dim,
                    });
                }
                if !(mean.is_finite() && *sd > 0.0 && sd.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "predictive density needs finite mean and sd > 0, got ({mean}, {sd})"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl Nonconformity for ScoreFn {
    fn score(&self, sample: &[Point], y: &[f64]) -> f64 {
        self.eval(sample.iter().map(Vec::as_slice), y)
    }

    fn score_leave_one_out(&self, all: &[Point], i: usize) -> f64 {
        let rows = all
            .iter()
            .enumerate()
            .filter(move |&(j, _)| j != i)
            .map(|(_, p)| p.as_slice());
        self.eval(rows, &all[i])
    }

    fn input_dim(&self) -> Option<usize> {
        match self {
            ScoreFn::MeanAbsDistance => None,
            ScoreFn::PrototypeEmbedding(net) => Some(net.input_dim()),
            ScoreFn::NegPredictiveDensity { .. } => Some(1),
        }
    }
}

fn check_point(sample: &Sample, y: &[f64]) -> Result<()> {
    if y.len() != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: sample.dim(),
            found: y.len(),
        });
    }
    Ok(())
}

/// `|mean(y^n) − y|`, Euclidean norm for `d > 1`.
pub fn score_mean_abs(y_n: &Sample, y: &[f64]) -> Result<f64> {
    check_point(y_n, y)?;
    Ok(ScoreFn::MeanAbsDistance.score(y_n.points(), y))
}

/// `−‖φ(y) − (1/n) Σ φ(y_i)‖²`.
pub fn score_prototype(y_n: &Sample, y: &[f64], net: &EmbeddingNet) -> Result<f64> {
    check_point(y_n, y)?;
    let psi = ScoreFn::PrototypeEmbedding(net.clone());
    psi.validate(y_n.dim())?;
    Ok(psi.score(y_n.points(), y))
}

/// True iff `psi` returns the identical value on `trials` random
/// permutations of the sample.
pub fn check_permutation_invariance<P: Nonconformity + ?Sized>(
    psi: &P,
    y_n: &Sample,
    y: &[f64],
    trials: usize,
    seed: u64,
) -> bool {
    let reference = psi.score(y_n.points(), y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = y_n.points().to_vec();
    (0..trials.max(1)).all(|_| {
        shuffled.shuffle(&mut rng);
        psi.score(&shuffled, y).to_bits() == reference.to_bits()
    })
}

/// Exhaustive version over all `n!` orderings. Intended for `n <= 6`.
pub fn check_permutation_invariance_exhaustive<P: Nonconformity + ?Sized>(
    psi: &P,
    y_n: &Sample,
    y: &[f64],
) -> bool {
    let reference = psi.score(y_n.points(), y).to_bits();
    let mut points = y_n.points().to_vec();
    let mut all_equal = true;
    for_each_permutation(&mut points, &mut |perm| {
        all_equal &= psi.score(perm, y).to_bits() == reference;
    });
    all_equal
}

/// Heap's algorithm.
pub(crate) fn for_each_permutation<T>(items: &mut [T], f: &mut impl FnMut(&[T])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
