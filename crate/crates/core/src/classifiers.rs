//! Minimal classifiers for the evaluation harness: ZeroR, Naive Bayes and kNN.
//!
//! A [`Learner`] fits on a subset of a dataset's rows and returns a
//! [`Classifier`] that predicts rows of a dataset with the same layout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeColumn, Dataset};
use crate::error::{Error, Result};

pub trait Classifier: Send + Sync {
    fn predict(&self, ds: &Dataset, row: usize) -> u32;
}

pub trait Learner: Send + Sync {
    fn name(&self) -> String;

    fn fit(&self, ds: &Dataset, rows: &[usize]) -> Result<Box<dyn Classifier>>;
}

/// The classifiers shipped with the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifierSpec {
    ZeroR,
    NaiveBayes,
    Knn { k: usize },
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::ZeroR => f.write_str("zeror"),
            ClassifierSpec::NaiveBayes => f.write_str("naive-bayes"),
            ClassifierSpec::Knn { k: 1 } => f.write_str("knn"),
            ClassifierSpec::Knn { k } => write!(f, "knn{k}"),
        }
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    /// `zeror`, `naive-bayes`, `knn` (k = 1) or `knnK` / `knn:K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "zeror" | "zero-r" => Ok(ClassifierSpec::ZeroR),
            "naive-bayes" | "nb" | "naivebayes" => Ok(ClassifierSpec::NaiveBayes),
            "knn" => Ok(ClassifierSpec::Knn { k: 1 }),
            _ => s
                .strip_prefix("knn")
                .map(|rest| rest.trim_start_matches(':'))
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| ClassifierSpec::Knn { k })
                .ok_or_else(|| Error::invalid(format!("unknown classifier '{s}'"))),
        }
    }
}

impl Learner for ClassifierSpec {
    fn name(&self) -> String {
        self.to_string()
    }

    fn fit(&self, ds: &Dataset, rows: &[usize]) -> Result<Box<dyn Classifier>> {
        Ok(match *self {
            ClassifierSpec::ZeroR => Box::new(ZeroR::fit(ds, rows)?),
            ClassifierSpec::NaiveBayes => Box::new(NaiveBayes::fit(ds, rows)?),
            ClassifierSpec::Knn { k } => Box::new(Knn::fit(ds, rows, k)?),
        })
    }
}

fn class_counts(ds: &Dataset, rows: &[usize]) -> Result<Vec<usize>> {
    if rows.is_empty() {
        return Err(Error::invalid("cannot train on an empty set of rows"));
    }
    let mut counts = vec![0usize; ds.n_classes()];
    for &r in rows {
        counts[ds.classes()[r] as usize] += 1;
    }
    Ok(counts)
}

/// Index of the largest value, first on ties.
fn argmax<T: PartialOrd + Copy>(values: impl IntoIterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Always predicts the majority training class (lowest code on ties).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroR {
    class: u32,
}

impl ZeroR {
    pub fn fit(ds: &Dataset, rows: &[usize]) -> Result<Self> {
        Ok(Self {
            class: argmax(class_counts(ds, rows)?) as u32,
        })
    }

    pub fn class(&self) -> u32 {
        self.class
    }
}

impl Classifier for ZeroR {
    fn predict(&self, _: &Dataset, _: usize) -> u32 {
        self.class
    }
}

pub fn zero_r(train: &Dataset) -> ZeroR {
    let rows: Vec<usize> = (0..train.n_instances()).collect();
    ZeroR::fit(train, &rows).expect("a dataset has at least one instance")
}

const MIN_VARIANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
enum NbAttribute {
    /// Per-class mean and variance.
    Gaussian(Vec<(f64, f64)>),
    /// Per-class log probabilities, `class * cardinality + value`.
    Frequencies { log_probs: Vec<f64>, cardinality: usize },
}

/// Naive Bayes with Laplace-smoothed priors and nominal frequencies and
/// Gaussian class-conditional densities for numeric attributes.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    log_priors: Vec<f64>,
    observed: Vec<bool>,
    attributes: Vec<NbAttribute>,
}

impl NaiveBayes {
    pub fn fit(ds: &Dataset, rows: &[usize]) -> Result<Self> {
        let counts = class_counts(ds, rows)?;
        let s = counts.len();
        let total = rows.len() as f64;
        let log_priors = counts
            .iter()
            .map(|&c| ((c as f64 + 1.0) / (total + s as f64)).ln())
            .collect();
        let classes = ds.classes();
        let attributes = ds
            .columns()
            .iter()
            .map(|col| match col {
                AttributeColumn::Numeric(num) => {
                    let v = num.values();
                    let mut sums = vec![0.0f64; s];
                    for &r in rows {
                        sums[classes[r] as usize] += v[r];
                    }
                    let means: Vec<f64> =
                        sums.iter().zip(&counts).map(|(&t, &c)| if c > 0 { t / c as f64 } else { 0.0 }).collect();
                    let mut sq = vec![0.0f64; s];
                    for &r in rows {
                        let c = classes[r] as usize;
                        sq[c] += (v[r] - means[c]).powi(2);
                    }
                    let params = (0..s)
                        .map(|c| {
                            let var = if counts[c] > 0 { sq[c] / counts[c] as f64 } else { 1.0 };
                            (means[c], var.max(MIN_VARIANCE))
                        })
                        .collect();
                    NbAttribute::Gaussian(params)
                }
                AttributeColumn::Nominal(nom) => {
                    let card = nom.column().cardinality() as usize;
                    let codes = nom.column().codes();
                    let mut freq = vec![0usize; s * card];
                    for &r in rows {
                        freq[classes[r] as usize * card + codes[r] as usize] += 1;
                    }
                    let log_probs = freq
                        .iter()
                        .enumerate()
                        .map(|(i, &f)| ((f as f64 + 1.0) / (counts[i / card] as f64 + card as f64)).ln())
                        .collect();
                    NbAttribute::Frequencies {
                        log_probs,
                        cardinality: card,
                    }
                }
            })
            .collect();
        Ok(Self {
            log_priors,
            observed: counts.iter().map(|&c| c > 0).collect(),
            attributes,
        })
    }

    /// Log of prior times likelihood for each class, unnormalized.
    pub fn log_joint(&self, ds: &Dataset, row: usize) -> Vec<f64> {
        let mut scores = self.log_priors.clone();
        for (attr, col) in self.attributes.iter().zip(ds.columns()) {
            match (attr, col) {
                (NbAttribute::Gaussian(params), AttributeColumn::Numeric(num)) => {
                    let x = num.values()[row];
                    for (score, &(mean, var)) in scores.iter_mut().zip(params) {
                        *score += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mean).powi(2) / (2.0 * var);
                    }
                }
                (NbAttribute::Frequencies { log_probs, cardinality }, AttributeColumn::Nominal(nom)) => {
                    let v = nom.column().codes()[row] as usize;
                    if v < *cardinality {
                        for (c, score) in scores.iter_mut().enumerate() {
                            *score += log_probs[c * cardinality + v];
                        }
                    }
                }
                _ => panic!("dataset layout differs from the training data"),
            }
        }
        scores
    }
}

impl Classifier for NaiveBayes {
    fn predict(&self, ds: &Dataset, row: usize) -> u32 {
        let scores = self.log_joint(ds, row);
        // classes absent from training are never predicted
        let masked = scores
            .iter()
            .zip(&self.observed)
            .map(|(&s, &seen)| if seen { s } else { f64::NEG_INFINITY });
        argmax(masked) as u32
    }
}

#[derive(Debug, Clone)]
enum KnnAttribute {
    Numeric { min: f64, range: f64 },
    Nominal,
}

/// k-nearest-neighbour vote under Euclidean distance with range-normalized
/// numerics and 0/1 nominal differences.
#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    attributes: Vec<KnnAttribute>,
    /// Normalized training features, row-major.
    features: Vec<f64>,
    labels: Vec<u32>,
    n_classes: usize,
}

impl Knn {
    pub fn fit(ds: &Dataset, rows: &[usize], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("kNN needs k >= 1"));
        }
        class_counts(ds, rows)?;
        let attributes: Vec<KnnAttribute> = ds
            .columns()
            .iter()
            .map(|col| match col {
                AttributeColumn::Numeric(num) => {
                    let v = num.values();
                    let (lo, hi) = rows
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(v[r]), hi.max(v[r])));
                    KnnAttribute::Numeric { min: lo, range: hi - lo }
                }
                AttributeColumn::Nominal(_) => KnnAttribute::Nominal,
            })
            .collect();
        let mut features = Vec::with_capacity(rows.len() * attributes.len());
        for &r in rows {
            features.extend(Self::encode(&attributes, ds, r));
        }
        Ok(Self {
            k,
            attributes,
            features,
            labels: rows.iter().map(|&r| ds.classes()[r]).collect(),
            n_classes: ds.n_classes(),
        })
    }

    /// Numerics scaled to the training range; nominals keep their code.
    fn encode<'a>(attrs: &'a [KnnAttribute], ds: &'a Dataset, row: usize) -> impl Iterator<Item = f64> + 'a {
        attrs.iter().zip(ds.columns()).map(move |(a, col)| match (a, col) {
            (KnnAttribute::Numeric { min, range }, AttributeColumn::Numeric(num)) => {
                if *range > 0.0 {
                    (num.values()[row] - min) / range
                } else {
                    0.0
                }
            }
            (KnnAttribute::Nominal, AttributeColumn::Nominal(nom)) => f64::from(nom.column().codes()[row]),
            _ => panic!("dataset layout differs from the training data"),
        })
    }
}

impl Classifier for Knn {
    fn predict(&self, ds: &Dataset, row: usize) -> u32 {
        let query: Vec<f64> = Self::encode(&self.attributes, ds, row).collect();
        let d = query.len();
        let mut dist: Vec<(f64, usize)> = self
            .labels
            .iter()
            .enumerate()
            .map(|(t, _)| {
                let train = &self.features[t * d..(t + 1) * d];
                let sq: f64 = self
                    .attributes
                    .iter()
                    .zip(train.iter().zip(&query))
                    .map(|(a, (&x, &y))| match a {
                        KnnAttribute::Numeric { .. } => (x - y) * (x - y),
                        KnnAttribute::Nominal => f64::from(u8::from(x != y)),
                    })
                    .sum();
                (sq, t)
            })
            .collect();
        let k = self.k.min(dist.len());
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, order);
        }
        let mut votes = vec![0usize; self.n_classes];
        for &(_, t) in &dist[..k] {
            votes[self.labels[t] as usize] += 1;
        }
        argmax(votes) as u32
    }
}
