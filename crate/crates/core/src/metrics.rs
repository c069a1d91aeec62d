//! Association measures between discrete columns: entropy, information gain,
//! symmetrical uncertainty, chi-squared, and attribute-class correlation.
//!
//! Entropies are in bits. They are computed as `log2 N - (sum c log2 c) / N`
//! over the positive counts taken in ascending order, so the result depends
//! only on the multiset of counts. That makes `SU(x, y) == SU(y, x)` hold
//! bit-for-bit and keeps results stable under relabeling.

use crate::dataset::{DiscreteColumn, NumericColumn};
use crate::error::{Error, Result};

/// Dense `rows x cols` count matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn from_columns(x: &DiscreteColumn, y: &DiscreteColumn) -> Result<Self> {
        check_len(x.len(), y.len())?;
        let rows = x.cardinality() as usize;
        let cols = y.cardinality() as usize;
        let mut counts = vec![0u64; rows * cols];
        for (&a, &b) in x.codes().iter().zip(y.codes()) {
            counts[a as usize * cols + b as usize] += 1;
        }
        Ok(Self::from_counts(counts, rows, cols))
    }

    /// Builds a table from row-major cell counts.
    pub fn from_counts(counts: Vec<u64>, rows: usize, cols: usize) -> Self {
        assert_eq!(counts.len(), rows * cols, "cell count does not match shape");
        let mut row_totals = vec![0u64; rows];
        let mut col_totals = vec![0u64; cols];
        for r in 0..rows {
            for c in 0..cols {
                let v = counts[r * cols + c];
                row_totals[r] += v;
                col_totals[c] += v;
            }
        }
        let total = row_totals.iter().sum();
        Self {
            counts,
            rows,
            cols,
            row_totals,
            col_totals,
            total,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.cols + col]
    }

    pub fn cells(&self) -> &[u64] {
        &self.counts
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn col_totals(&self) -> &[u64] {
        &self.col_totals
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row_entropy(&self) -> f64 {
        entropy_unchecked(&self.row_totals)
    }

    pub fn col_entropy(&self) -> f64 {
        entropy_unchecked(&self.col_totals)
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_unchecked(&self.counts)
    }

    /// `H(row) + H(col) - H(row, col)`, floored at zero.
    pub fn mutual_information(&self) -> f64 {
        info_gain_from_entropies(self.row_entropy(), self.col_entropy(), self.joint_entropy())
    }

    pub fn symmetrical_uncertainty(&self) -> f64 {
        su_from_entropies(self.row_entropy(), self.col_entropy(), self.joint_entropy())
    }

    pub fn chi_squared(&self) -> f64 {
        let total = self.total as f64;
        let mut chi = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let expected = self.row_totals[r] as f64 * self.col_totals[c] as f64 / total;
                if expected > 0.0 {
                    let d = self.get(r, c) as f64 - expected;
                    chi += d * d / expected;
                }
            }
        }
        chi
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

/// Shannon entropy (bits) of a count vector.
pub fn entropy(counts: &[u64]) -> Result<f64> {
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::invalid("entropy of an all-zero count vector"));
    }
    Ok(entropy_unchecked(counts))
}

/// Entropy of a count vector, 0 when every count is zero.
pub(crate) fn entropy_unchecked(counts: &[u64]) -> f64 {
    let mut small = [0u64; 64];
    let mut heap;
    let positive: &mut [u64] = if counts.len() <= small.len() {
        let mut k = 0;
        for &c in counts.iter().filter(|&&c| c > 0) {
            small[k] = c;
            k += 1;
        }
        &mut small[..k]
    } else {
        heap = counts.iter().copied().filter(|&c| c > 0).collect::<Vec<_>>();
        &mut heap
    };
    entropy_of_positive(positive)
}

/// Entropy of positive counts; sorts `positive` in place.
pub(crate) fn entropy_of_positive(positive: &mut [u64]) -> f64 {
    if positive.len() <= 1 {
        return 0.0;
    }
    positive.sort_unstable();
    let mut total = 0u64;
    let mut weighted = 0.0f64;
    for &c in positive.iter() {
        total += c;
        weighted += c as f64 * (c as f64).log2();
    }
    let n = total as f64;
    (n.log2() - weighted / n).max(0.0)
}

pub(crate) fn info_gain_from_entropies(hx: f64, hy: f64, hxy: f64) -> f64 {
    (hx + hy - hxy).max(0.0)
}

pub(crate) fn su_from_entropies(hx: f64, hy: f64, hxy: f64) -> f64 {
    let denom = hx + hy;
    if denom <= 0.0 {
        return 0.0;
    }
    (2.0 * info_gain_from_entropies(hx, hy, hxy) / denom).min(1.0)
}

/// `H(y) - H(y | x)` in bits.
pub fn info_gain(x: &DiscreteColumn, y: &DiscreteColumn) -> Result<f64> {
    Ok(ContingencyTable::from_columns(x, y)?.mutual_information())
}

/// `2 IG(x, y) / (H(x) + H(y))`, defined as 0 when both entropies vanish.
pub fn symmetrical_uncertainty(x: &DiscreteColumn, y: &DiscreteColumn) -> Result<f64> {
    Ok(ContingencyTable::from_columns(x, y)?.symmetrical_uncertainty())
}

/// Pearson chi-squared statistic of the `x` by `y` table.
pub fn chi_squared(x: &DiscreteColumn, y: &DiscreteColumn) -> Result<f64> {
    Ok(ContingencyTable::from_columns(x, y)?.chi_squared())
}

/// Class-frequency weighted mean of `|pearson(x, [class == c])|` over classes.
/// Zero-variance inputs contribute 0.
pub fn class_correlation(x: &NumericColumn, class: &DiscreteColumn) -> Result<f64> {
    check_len(x.len(), class.len())?;
    let values = x.values();
    let w = values.len() as f64;
    let mean = values.iter().sum::<f64>() / w;
    let sxx: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sxx <= 0.0 {
        return Ok(0.0);
    }
    let counts = class.counts();
    let mut dev_sum = vec![0.0f64; counts.len()];
    for (&v, &c) in values.iter().zip(class.codes()) {
        dev_sum[c as usize] += v - mean;
    }
    let mut score = 0.0;
    for (c, &nc) in counts.iter().enumerate() {
        if nc == 0 || nc as f64 == w {
            continue;
        }
        let p = nc as f64 / w;
        // cov(x, 1[c]) summed = sum over class-c rows of (x - mean); var(1[c]) summed = w p (1 - p)
        let syy = w * p * (1.0 - p);
        let r = dev_sum[c] / (sxx * syy).sqrt();
        score += p * r.abs();
    }
    Ok(score.min(1.0))
}
