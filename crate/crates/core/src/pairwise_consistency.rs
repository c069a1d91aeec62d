//! Inconsistency rate of attribute subsets and the Pairwise Consistency ranker.
//!
//! A pattern is the tuple of values an instance takes on the selected
//! attributes, class excluded. Its inconsistency count is the number of
//! instances sharing the pattern minus those of its majority class; the
//! inconsistency rate sums the counts over patterns and divides by the
//! number of instances.

use std::collections::HashMap;

use crate::dataset::Dataset;
use crate::discretize::discretize_dataset;
use crate::error::{Error, Result};
use crate::pairwise::{mean_pair_scores, PairData, PairScore, PairwiseOptions};
use crate::pairwise_correlation::discrete_columns;
use crate::ranking::Ranking;

pub const METHOD: &str = "pairwise-consistency";

/// Instances sharing a pattern minus those of its majority class.
pub fn pattern_inconsistency(class_counts: &[u64]) -> u64 {
    let total: u64 = class_counts.iter().sum();
    total - class_counts.iter().copied().max().unwrap_or(0)
}

/// Class counts of every pattern of an attribute subset. Patterns are
/// numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternStats {
    n_classes: usize,
    class_counts: Vec<u64>,
}

impl PatternStats {
    pub fn from_subset(ds_disc: &Dataset, subset: &[usize]) -> Result<Self> {
        let cols = discrete_columns(ds_disc)?;
        if subset.is_empty() {
            return Err(Error::invalid("attribute subset must not be empty"));
        }
        if let Some(&bad) = subset.iter().find(|&&a| a >= cols.len()) {
            return Err(Error::invalid(format!("attribute id {bad} out of range ({} attributes)", cols.len())));
        }
        let w = ds_disc.n_instances();
        // refine pattern ids one attribute at a time; ids stay below w
        let mut pattern = vec![0u32; w];
        for &a in subset {
            let codes = cols[a].codes();
            let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
            for (p, &c) in pattern.iter_mut().zip(codes) {
                let next = ids.len() as u32;
                *p = *ids.entry((*p, c)).or_insert(next);
            }
        }
        let s = ds_disc.n_classes();
        let n_patterns = pattern.iter().max().map_or(0, |&m| m as usize + 1);
        let mut class_counts = vec![0u64; n_patterns * s];
        for (&p, &c) in pattern.iter().zip(ds_disc.classes()) {
            class_counts[p as usize * s + c as usize] += 1;
        }
        Ok(Self {
            n_classes: s,
            class_counts,
        })
    }

    /// One row of class counts per pattern.
    pub fn from_class_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let s = rows.first().map_or(0, Vec::len);
        if s == 0 || rows.iter().any(|r| r.len() != s) {
            return Err(Error::invalid("every pattern needs the same, non-zero number of class counts"));
        }
        Ok(Self {
            n_classes: s,
            class_counts: rows.concat(),
        })
    }

    pub fn n_patterns(&self) -> usize {
        self.class_counts.len() / self.n_classes
    }

    pub fn class_counts(&self, pattern: usize) -> &[u64] {
        &self.class_counts[pattern * self.n_classes..(pattern + 1) * self.n_classes]
    }

    pub fn total(&self, pattern: usize) -> u64 {
        self.class_counts(pattern).iter().sum()
    }

    pub fn majority(&self, pattern: usize) -> u64 {
        self.class_counts(pattern).iter().copied().max().unwrap_or(0)
    }

    pub fn n_instances(&self) -> u64 {
        self.class_counts.iter().sum()
    }

    /// Sum of the pattern inconsistency counts.
    pub fn inconsistency_count(&self) -> u64 {
        self.class_counts.chunks(self.n_classes).map(pattern_inconsistency).sum()
    }

    pub fn inconsistency_rate(&self) -> f64 {
        self.inconsistency_count() as f64 / self.n_instances() as f64
    }
}

pub fn inconsistency_rate(ds_disc: &Dataset, subset: &[usize]) -> Result<f64> {
    Ok(PatternStats::from_subset(ds_disc, subset)?.inconsistency_rate())
}

pub fn consistency_rate(ds_disc: &Dataset, subset: &[usize]) -> Result<f64> {
    Ok(1.0 - inconsistency_rate(ds_disc, subset)?)
}

struct ConsistencyScore {
    data: PairData,
    /// `code * n_classes + class` per attribute and instance.
    code_class: Vec<Vec<u32>>,
    n_classes: usize,
    /// Consistency rate of each attribute alone.
    single: Vec<f64>,
    w: f64,
    dense_cell_limit: usize,
}

struct Scratch {
    dense: Vec<u32>,
    sparse: HashMap<u64, Vec<u64>>,
}

impl ConsistencyScore {
    fn inconsistent(&self, i: usize, j: usize, s: &mut Scratch) -> u64 {
        let k = self.n_classes;
        let card_i = self.data.cards[i] as usize;
        let cells = card_i * self.data.cards[j] as usize;
        let cj = &self.data.codes[j];
        let ici = &self.code_class[i];
        if cells <= self.dense_cell_limit {
            let stride = card_i * k;
            s.dense.clear();
            s.dense.resize(cells * k, 0);
            for (&b, &ac) in cj.iter().zip(ici) {
                s.dense[b as usize * stride + ac as usize] += 1;
            }
            s.dense
                .chunks_exact(k)
                .map(|counts| {
                    let (sum, max) = counts.iter().fold((0u64, 0u64), |(t, m), &c| {
                        (t + u64::from(c), m.max(u64::from(c)))
                    });
                    sum - max
                })
                .sum()
        } else {
            s.sparse.clear();
            for (&b, &ac) in cj.iter().zip(ici) {
                let (a, c) = (ac as usize / k, ac as usize % k);
                let key = u64::from(b) * card_i as u64 + a as u64;
                s.sparse.entry(key).or_insert_with(|| vec![0; k])[c] += 1;
            }
            s.sparse.values().map(|v| pattern_inconsistency(v)).sum()
        }
    }
}

impl PairScore for ConsistencyScore {
    type Scratch = Scratch;

    fn scratch(&self) -> Scratch {
        Scratch {
            dense: Vec::new(),
            sparse: HashMap::new(),
        }
    }

    fn score(&self, i: usize, j: usize, s: &mut Scratch) -> f64 {
        // a single-bin partner leaves the patterns of the other attribute unchanged
        if self.data.cards[i] == 1 {
            return self.single[j];
        }
        if self.data.cards[j] == 1 {
            return self.single[i];
        }
        1.0 - self.inconsistent(i, j, s) as f64 / self.w
    }
}

/// Pairwise Consistency scores, indexed by attribute id.
pub fn pairwise_consistency_scores(ds: &Dataset, opts: &PairwiseOptions) -> Result<Vec<f64>> {
    let n = ds.n_attributes();
    if n < 2 {
        return Err(Error::invalid(format!(
            "pairwise consistency needs at least 2 attributes, dataset has {n}"
        )));
    }
    let disc = discretize_dataset(ds);
    let cols = discrete_columns(&disc)?;
    let k = disc.n_classes();
    let classes = disc.classes();
    let w = disc.n_instances();
    let code_class: Vec<Vec<u32>> = cols
        .iter()
        .map(|c| c.codes().iter().zip(classes).map(|(&a, &y)| a * k as u32 + y).collect())
        .collect();
    let single = cols
        .iter()
        .zip(&code_class)
        .map(|(c, cc)| {
            let mut counts = vec![0u64; c.cardinality() as usize * k];
            for &v in cc {
                counts[v as usize] += 1;
            }
            let bad: u64 = counts.chunks_exact(k).map(pattern_inconsistency).sum();
            1.0 - bad as f64 / w as f64
        })
        .collect();
    let scorer = ConsistencyScore {
        data: PairData::new(&cols),
        code_class,
        n_classes: k,
        single,
        w: w as f64,
        dense_cell_limit: opts.dense_cell_limit,
    };
    Ok(mean_pair_scores(n, &scorer, opts.block_size))
}

pub fn rank_pairwise_consistency(ds: &Dataset) -> Result<Ranking> {
    rank_pairwise_consistency_with(ds, &PairwiseOptions::default())
}

pub fn rank_pairwise_consistency_with(ds: &Dataset, opts: &PairwiseOptions) -> Result<Ranking> {
    Ok(Ranking::from_scores(METHOD, pairwise_consistency_scores(ds, opts)?))
}
