//! Supervised MDL discretization: recursive binary entropy splitting with the
//! minimum-description-length stopping rule.

use rayon::prelude::*;

use crate::dataset::{AttributeColumn, Dataset, DiscreteColumn, NominalColumn};
use crate::error::{Error, Result};
use crate::metrics::entropy_unchecked;

/// Sorted cut points for one attribute. Value `v` falls in bin
/// `#{cut <= v}`, so bins are `[cut_i, cut_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutPointSet {
    pub attribute: usize,
    cuts: Vec<f64>,
}

impl CutPointSet {
    pub fn new(attribute: usize, cuts: Vec<f64>) -> Result<Self> {
        if cuts.windows(2).any(|w| w[0] >= w[1]) || cuts.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("cut points must be finite and strictly increasing"));
        }
        Ok(Self { attribute, cuts })
    }

    pub fn with_attribute(mut self, attribute: usize) -> Self {
        self.attribute = attribute;
        self
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn n_bins(&self) -> u32 {
        self.cuts.len() as u32 + 1
    }

    pub fn bin(&self, v: f64) -> u32 {
        self.cuts.partition_point(|&c| c <= v) as u32
    }

    /// Interval labels, e.g. `(-inf,2.5)` and `[2.5,inf)`.
    pub fn bin_labels(&self) -> Vec<String> {
        if self.cuts.is_empty() {
            return vec!["(-inf,inf)".to_string()];
        }
        let mut labels = Vec::with_capacity(self.cuts.len() + 1);
        labels.push(format!("(-inf,{})", self.cuts[0]));
        for w in self.cuts.windows(2) {
            labels.push(format!("[{},{})", w[0], w[1]));
        }
        labels.push(format!("[{},inf)", self.cuts[self.cuts.len() - 1]));
        labels
    }

    pub fn apply(&self, values: &[f64]) -> DiscreteColumn {
        let codes = values.iter().map(|&v| self.bin(v)).collect();
        DiscreteColumn::new(codes, self.n_bins()).expect("bins are below n_bins")
    }
}

/// Values sorted ascending, grouped into runs of equal value.
struct SortedSample {
    values: Vec<f64>,
    /// Start offset of each group of equal values, plus a final sentinel.
    group_starts: Vec<usize>,
    /// Class counts per group, `n_groups * n_classes`.
    group_counts: Vec<u64>,
    n_classes: usize,
}

impl SortedSample {
    fn new(values: &[f64], labels: &DiscreteColumn) -> Self {
        let n_classes = labels.cardinality() as usize;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let mut group_starts = Vec::new();
        let mut group_counts = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            if pos == 0 || sorted[pos] != sorted[pos - 1] {
                group_starts.push(pos);
                group_counts.extend(std::iter::repeat_n(0, n_classes));
            }
            let g = group_starts.len() - 1;
            group_counts[g * n_classes + labels.codes()[i] as usize] += 1;
        }
        group_starts.push(sorted.len());
        Self {
            values: sorted,
            group_starts,
            group_counts,
            n_classes,
        }
    }

    fn n_groups(&self) -> usize {
        self.group_starts.len() - 1
    }

    fn counts(&self, g: usize) -> &[u64] {
        &self.group_counts[g * self.n_classes..(g + 1) * self.n_classes]
    }

    /// The single class of a pure group.
    fn pure_class(&self, g: usize) -> Option<usize> {
        let mut found = None;
        for (c, &n) in self.counts(g).iter().enumerate() {
            if n > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(c);
            }
        }
        found
    }

    /// A cut between groups `g` and `g + 1` can only be optimal if some pair
    /// of instances across it has different classes.
    fn is_boundary(&self, g: usize) -> bool {
        match (self.pure_class(g), self.pure_class(g + 1)) {
            (Some(a), Some(b)) => a != b,
            _ => true,
        }
    }

    fn cut_between(&self, g: usize) -> f64 {
        let lo = self.values[self.group_starts[g + 1] - 1];
        let hi = self.values[self.group_starts[g + 1]];
        let mid = lo / 2.0 + hi / 2.0;
        if mid > lo && mid <= hi {
            mid
        } else {
            hi
        }
    }

    /// Splits groups `[first, last)` recursively, appending accepted cuts in order.
    fn split(&self, first: usize, last: usize, cuts: &mut Vec<f64>) {
        if last - first < 2 {
            return;
        }
        let k = self.n_classes;
        let mut total = vec![0u64; k];
        for g in first..last {
            for (t, &c) in total.iter_mut().zip(self.counts(g)) {
                *t += c;
            }
        }
        let n: u64 = total.iter().sum();
        let h = entropy_unchecked(&total);
        if h <= 0.0 {
            return;
        }
        let nf = n as f64;

        let mut left = vec![0u64; k];
        let mut right = vec![0u64; k];
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for g in first..last - 1 {
            for (l, &c) in left.iter_mut().zip(self.counts(g)) {
                *l += c;
            }
            if !self.is_boundary(g) {
                continue;
            }
            for c in 0..k {
                right[c] = total[c] - left[c];
            }
            let n1: u64 = left.iter().sum();
            let n2 = n - n1;
            let h1 = entropy_unchecked(&left);
            let h2 = entropy_unchecked(&right);
            let e = (n1 as f64 * h1 + n2 as f64 * h2) / nf;
            if best.is_none_or(|(_, be, _, _)| e < be) {
                best = Some((g, e, h1, h2));
            }
        }
        let Some((g, e, h1, h2)) = best else {
            return;
        };

        let mut left = vec![0u64; k];
        for gg in first..=g {
            for (l, &c) in left.iter_mut().zip(self.counts(gg)) {
                *l += c;
            }
        }
        let present = |counts: &[u64]| counts.iter().filter(|&&c| c > 0).count() as f64;
        let right: Vec<u64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let (k0, k1, k2) = (present(&total), present(&left), present(&right));
        let gain = h - e;
        let delta = (3f64.powf(k0) - 2.0).log2() - (k0 * h - k1 * h1 - k2 * h2);
        let threshold = ((nf - 1.0).log2() + delta) / nf;
        if gain > threshold {
            self.split(first, g + 1, cuts);
            cuts.push(self.cut_between(g));
            self.split(g + 1, last, cuts);
        }
    }
}

/// MDL-accepted cut points of `values` with respect to `labels`.
/// The returned set has attribute id 0; see [`CutPointSet::with_attribute`].
pub fn mdl_cut_points(values: &[f64], labels: &DiscreteColumn) -> Result<CutPointSet> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: labels.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::invalid("cannot discretize an empty column"));
    }
    let sample = SortedSample::new(values, labels);
    let mut cuts = Vec::new();
    sample.split(0, sample.n_groups(), &mut cuts);
    CutPointSet::new(0, cuts)
}

/// Discretizes every numeric attribute against the class. Nominal columns
/// pass through. Also returns the cut points of each numeric attribute.
pub fn discretize_with_cuts(ds: &Dataset) -> (Dataset, Vec<CutPointSet>) {
    let class = ds.class_column();
    let results: Vec<(AttributeColumn, Option<CutPointSet>)> = ds
        .columns()
        .par_iter()
        .enumerate()
        .map(|(i, col)| match col {
            AttributeColumn::Numeric(num) => {
                let cuts = mdl_cut_points(num.values(), class)
                    .expect("column and class lengths agree in a valid dataset")
                    .with_attribute(i);
                let nominal = NominalColumn::new(cuts.apply(num.values()), cuts.bin_labels())
                    .expect("one label per bin");
                (AttributeColumn::Nominal(nominal), Some(cuts))
            }
            AttributeColumn::Nominal(_) => (col.clone(), None),
        })
        .collect();
    let (columns, cuts): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    (ds.with_columns(columns), cuts.into_iter().flatten().collect())
}

pub fn discretize_dataset(ds: &Dataset) -> Dataset {
    if ds.is_discrete() {
        return ds.clone();
    }
    discretize_with_cuts(ds).0
}
