//! CFS subset merit and the Pairwise Correlation ranker.
//!
//! The merit of a subset `S` of `k` attributes is
//!
//! ```text
//! k * mean_c / sqrt(k + k (k - 1) * mean_f)
//! ```
//!
//! where `mean_c` is the mean symmetrical uncertainty between each member and
//! the class and `mean_f` the mean SU over unordered member pairs. An
//! attribute's Pairwise Correlation score is the mean merit of the two-element
//! subsets it forms with every other attribute.

use std::collections::HashMap;

use crate::dataset::{Dataset, DiscreteColumn};
use crate::discretize::discretize_dataset;
use crate::error::{Error, Result};
use crate::metrics::{entropy_of_positive, entropy_unchecked, su_from_entropies, symmetrical_uncertainty};
use crate::pairwise::{mean_pair_scores, PairData, PairScore, PairwiseOptions};
use crate::ranking::Ranking;

pub const METHOD: &str = "pairwise-correlation";

/// SU of each attribute with the class, alongside the discretized data it was computed on.
#[derive(Debug, Clone)]
pub struct MeritInputs {
    pub su_class: Vec<f64>,
    pub dataset_disc: Dataset,
}

impl MeritInputs {
    pub fn new(ds: &Dataset) -> Self {
        let dataset_disc = discretize_dataset(ds);
        let cols = dataset_disc.discrete_columns().expect("discretized");
        let class = dataset_disc.class_column();
        let su_class = cols
            .iter()
            .map(|c| symmetrical_uncertainty(c, class).expect("equal lengths"))
            .collect();
        Self { su_class, dataset_disc }
    }
}

pub(crate) fn discrete_columns(ds: &Dataset) -> Result<Vec<&DiscreteColumn>> {
    ds.discrete_columns()
        .ok_or_else(|| Error::invalid("dataset must be fully discrete; discretize it first"))
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("attribute subset must not be empty"));
    }
    if let Some(&bad) = subset.iter().find(|&&a| a >= n) {
        return Err(Error::invalid(format!("attribute id {bad} out of range ({n} attributes)")));
    }
    Ok(())
}

/// Merit from its ingredients; `mean_f` is ignored when `k == 1`.
pub fn merit(k: usize, mean_c: f64, mean_f: f64) -> f64 {
    let k = k as f64;
    let redundancy = if k > 1.0 { k * (k - 1.0) * mean_f } else { 0.0 };
    k * mean_c / (k + redundancy).sqrt()
}

/// Merit of `subset` in an already discretized dataset.
pub fn subset_merit(ds_disc: &Dataset, subset: &[usize]) -> Result<f64> {
    let cols = discrete_columns(ds_disc)?;
    check_subset(cols.len(), subset)?;
    let class = ds_disc.class_column();
    let k = subset.len();
    let mut sum_c = 0.0;
    for &a in subset {
        sum_c += symmetrical_uncertainty(cols[a], class)?;
    }
    let mut sum_f = 0.0;
    for (x, &a) in subset.iter().enumerate() {
        for &b in &subset[x + 1..] {
            sum_f += symmetrical_uncertainty(cols[a], cols[b])?;
        }
    }
    let pairs = k * (k - 1) / 2;
    let mean_f = if pairs == 0 { 0.0 } else { sum_f / pairs as f64 };
    Ok(merit(k, sum_c / k as f64, mean_f))
}

/// Merit of a two-attribute subset from its three SU values.
pub fn pair_merit(su_i_c: f64, su_j_c: f64, su_i_j: f64) -> f64 {
    (su_i_c + su_j_c) / (2.0 + 2.0 * su_i_j).sqrt()
}

struct CorrelationScore {
    data: PairData,
    entropy: Vec<f64>,
    su_class: Vec<f64>,
    dense_cell_limit: usize,
}

struct Scratch {
    dense: Vec<u32>,
    positive: Vec<u64>,
    sparse: HashMap<u64, u64>,
}

impl CorrelationScore {
    fn joint_entropy(&self, i: usize, j: usize, s: &mut Scratch) -> f64 {
        let (ci, cj) = (&self.data.codes[i], &self.data.codes[j]);
        let card_j = self.data.cards[j] as usize;
        let cells = self.data.cards[i] as usize * card_j;
        s.positive.clear();
        if cells <= self.dense_cell_limit {
            s.dense.clear();
            s.dense.resize(cells, 0);
            for (&a, &b) in ci.iter().zip(cj) {
                s.dense[a as usize * card_j + b as usize] += 1;
            }
            s.positive.extend(s.dense.iter().filter(|&&c| c > 0).map(|&c| u64::from(c)));
        } else {
            s.sparse.clear();
            for (&a, &b) in ci.iter().zip(cj) {
                *s.sparse.entry(u64::from(a) * card_j as u64 + u64::from(b)).or_insert(0) += 1;
            }
            s.positive.extend(s.sparse.values().copied());
        }
        entropy_of_positive(&mut s.positive)
    }
}

impl PairScore for CorrelationScore {
    type Scratch = Scratch;

    fn scratch(&self) -> Scratch {
        Scratch {
            dense: Vec::new(),
            positive: Vec::new(),
            sparse: HashMap::new(),
        }
    }

    fn score(&self, i: usize, j: usize, s: &mut Scratch) -> f64 {
        // a single-bin attribute makes the joint table a copy of the other
        // column's counts, so the pair SU is exactly 0
        let su = if self.data.cards[i] == 1 || self.data.cards[j] == 1 {
            0.0
        } else {
            let hij = self.joint_entropy(i, j, s);
            su_from_entropies(self.entropy[i], self.entropy[j], hij)
        };
        pair_merit(self.su_class[i], self.su_class[j], su)
    }
}

/// Pairwise Correlation scores, indexed by attribute id.
pub fn pairwise_correlation_scores(ds: &Dataset, opts: &PairwiseOptions) -> Result<Vec<f64>> {
    let n = ds.n_attributes();
    if n < 2 {
        return Err(Error::invalid(format!(
            "pairwise correlation needs at least 2 attributes, dataset has {n}"
        )));
    }
    let inputs = MeritInputs::new(ds);
    let cols = discrete_columns(&inputs.dataset_disc)?;
    let data = PairData::new(&cols);
    let entropy = cols.iter().map(|c| entropy_unchecked(&c.counts())).collect();
    let scorer = CorrelationScore {
        data,
        entropy,
        su_class: inputs.su_class,
        dense_cell_limit: opts.dense_cell_limit,
    };
    Ok(mean_pair_scores(n, &scorer, opts.block_size))
}

pub fn rank_pairwise_correlation(ds: &Dataset) -> Result<Ranking> {
    rank_pairwise_correlation_with(ds, &PairwiseOptions::default())
}

pub fn rank_pairwise_correlation_with(ds: &Dataset, opts: &PairwiseOptions) -> Result<Ranking> {
    Ok(Ranking::from_scores(METHOD, pairwise_correlation_scores(ds, opts)?))
}
