//! Baseline rankers: univariate Information Gain, Chi-Squared and Correlation,
//! and the multivariate ReliefF.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{AttributeColumn, Dataset};
use crate::discretize::discretize_dataset;
use crate::error::{Error, Result};
use crate::metrics::{chi_squared, class_correlation, info_gain};
use crate::ranking::Ranking;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnivariateMetric {
    InfoGain,
    ChiSquared,
    Correlation,
}

impl UnivariateMetric {
    pub fn method_name(self) -> &'static str {
        match self {
            UnivariateMetric::InfoGain => "info-gain",
            UnivariateMetric::ChiSquared => "chi-squared",
            UnivariateMetric::Correlation => "correlation",
        }
    }
}

/// Scores each attribute against the class on its own. Information gain and
/// chi-squared read the MDL-discretized data; correlation reads raw numerics
/// and scores nominal attributes 0.
pub fn rank_univariate(ds: &Dataset, metric: UnivariateMetric) -> Result<Ranking> {
    if ds.n_attributes() == 0 {
        return Err(Error::invalid("cannot rank a dataset without attributes"));
    }
    let class = ds.class_column();
    let scores: Vec<f64> = match metric {
        UnivariateMetric::InfoGain | UnivariateMetric::ChiSquared => {
            let disc = discretize_dataset(ds);
            let cols = disc.discrete_columns().expect("discretized");
            cols.par_iter()
                .map(|c| match metric {
                    UnivariateMetric::InfoGain => info_gain(c, class),
                    _ => chi_squared(c, class),
                })
                .collect::<Result<_>>()?
        }
        UnivariateMetric::Correlation => ds
            .columns()
            .par_iter()
            .enumerate()
            .map(|(i, col)| match col {
                AttributeColumn::Numeric(num) => class_correlation(num, class),
                AttributeColumn::Nominal(_) => {
                    log::warn!(
                        "correlation is undefined for nominal attribute '{}'; scoring it 0",
                        ds.attribute_names()[i]
                    );
                    Ok(0.0)
                }
            })
            .collect::<Result<_>>()?,
    };
    Ok(Ranking::from_scores(metric.method_name(), scores))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReliefFConfig {
    pub k_neighbors: usize,
    /// Number of sampled instances; `None` uses every instance.
    pub sample_size: Option<usize>,
    pub rng_seed: u64,
}

impl Default for ReliefFConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 10,
            sample_size: None,
            rng_seed: 42,
        }
    }
}

pub const RELIEFF_METHOD: &str = "relieff";

/// Instances per partial-weight chunk. Fixed so that the reduction order is
/// independent of the worker count.
const RELIEFF_CHUNK: usize = 32;

enum DiffColumn<'a> {
    Numeric { values: &'a [f64], range: f64 },
    Nominal(&'a [u32]),
}

impl DiffColumn<'_> {
    fn diff(&self, a: usize, b: usize) -> f64 {
        match self {
            DiffColumn::Numeric { values, range, .. } => {
                if *range > 0.0 {
                    (values[a] - values[b]).abs() / range
                } else {
                    0.0
                }
            }
            DiffColumn::Nominal(codes) => f64::from(u8::from(codes[a] != codes[b])),
        }
    }
}

/// ReliefF weights, indexed by attribute id.
///
/// For each sampled instance `r`, the `k` nearest hits lower every weight by
/// their mean diff and, for each other class `c`, the `k` nearest misses of
/// class `c` raise it by their mean diff weighted by `P(c) / (1 - P(class(r)))`.
/// The total is divided by the number of sampled instances. When a class has
/// fewer than `k` candidates all of them are used.
pub fn relieff_weights(ds: &Dataset, cfg: &ReliefFConfig) -> Result<Vec<f64>> {
    let w = ds.n_instances();
    let s = ds.n_classes();
    if w < 2 {
        return Err(Error::invalid("ReliefF needs at least 2 instances"));
    }
    if s < 2 {
        return Err(Error::invalid("ReliefF needs at least 2 classes to find misses"));
    }
    if cfg.k_neighbors == 0 {
        return Err(Error::invalid("ReliefF k_neighbors must be at least 1"));
    }
    let samples: Vec<usize> = match cfg.sample_size {
        None => (0..w).collect(),
        Some(m) if m == 0 || m > w => {
            return Err(Error::invalid(format!("ReliefF sample size {m} must be in 1..={w}")))
        }
        Some(m) if m == w => (0..w).collect(),
        Some(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            let mut idx = sample(&mut rng, w, m).into_vec();
            idx.sort_unstable();
            idx
        }
    };

    let cols: Vec<DiffColumn> = ds
        .columns()
        .iter()
        .map(|c| match c {
            AttributeColumn::Numeric(num) => {
                let v = num.values();
                let (min, max) = v
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                DiffColumn::Numeric {
                    values: v,
                    range: max - min,
                }
            }
            AttributeColumn::Nominal(nom) => DiffColumn::Nominal(nom.column().codes()),
        })
        .collect();
    let classes = ds.classes();
    let priors: Vec<f64> = ds.class_column().counts().iter().map(|&c| c as f64 / w as f64).collect();
    let n = cols.len();
    let m = samples.len() as f64;
    let k = cfg.k_neighbors;

    let partials: Vec<Vec<f64>> = samples
        .par_chunks(RELIEFF_CHUNK)
        .map(|chunk| {
            let mut weights = vec![0.0f64; n];
            let mut dist = vec![0.0f64; w];
            for &r in chunk {
                for (other, d) in dist.iter_mut().enumerate() {
                    *d = cols.iter().map(|c| c.diff(r, other)).sum();
                }
                let cr = classes[r] as usize;
                for c in 0..s {
                    let neighbors = nearest_of_class(&dist, classes, c as u32, r, k);
                    if neighbors.is_empty() {
                        continue;
                    }
                    let scale = if c == cr {
                        -1.0 / (m * neighbors.len() as f64)
                    } else {
                        priors[c] / (1.0 - priors[cr]) / (m * neighbors.len() as f64)
                    };
                    for (a, col) in cols.iter().enumerate() {
                        let total: f64 = neighbors.iter().map(|&o| col.diff(r, o)).sum();
                        weights[a] += scale * total;
                    }
                }
            }
            weights
        })
        .collect();

    let mut weights = vec![0.0f64; n];
    for part in &partials {
        for (w, p) in weights.iter_mut().zip(part) {
            *w += p;
        }
    }
    Ok(weights)
}

/// Up to `k` instances of class `c` other than `r`, nearest first; equal
/// distances keep ascending instance order.
fn nearest_of_class(dist: &[f64], classes: &[u32], c: u32, r: usize, k: usize) -> Vec<usize> {
    let mut cands: Vec<usize> = (0..dist.len()).filter(|&o| o != r && classes[o] == c).collect();
    let by_distance = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
    if cands.len() > k {
        cands.select_nth_unstable_by(k - 1, by_distance);
        cands.truncate(k);
    }
    cands.sort_by(by_distance);
    cands
}

pub fn rank_relieff(ds: &Dataset, cfg: &ReliefFConfig) -> Result<Ranking> {
    Ok(Ranking::from_scores(RELIEFF_METHOD, relieff_weights(ds, cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn info_gain_ranks_perfect_predictor_first() {
        let class = vec![0u32, 1, 0, 1, 1, 0];
        let ds = Dataset::from_discrete("p", vec![vec![0, 0, 1, 1, 0, 1], class.clone(), vec![0; 6]], class).unwrap();
        let r = rank_univariate(&ds, UnivariateMetric::InfoGain).unwrap();
        assert_eq!(r.ids(), vec![1, 0, 2]);
        assert!((r.entries()[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(r.scores_by_id()[2], 0.0);
    }

    #[test]
    fn constant_attribute_scores_zero_under_every_metric() {
        let ds = Dataset::from_numeric("c", vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4]], vec![0, 0, 1, 1]).unwrap();
        for metric in [UnivariateMetric::InfoGain, UnivariateMetric::ChiSquared, UnivariateMetric::Correlation] {
            assert_eq!(rank_univariate(&ds, metric).unwrap().scores_by_id()[1], 0.0, "{metric:?}");
        }
    }

    #[test]
    fn correlation_on_nominal_scores_zero() {
        let ds = Dataset::from_discrete("n", vec![vec![0, 1, 0, 1]], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(rank_univariate(&ds, UnivariateMetric::Correlation).unwrap().scores_by_id(), vec![0.0]);
    }

    fn random_dataset(seed: u64, w: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let class: Vec<u32> = (0..w).map(|i| (i % 2) as u32).collect();
        let signal: Vec<f64> = class.iter().map(|&c| f64::from(c)).collect();
        let noise1: Vec<f64> = (0..w).map(|_| rng.gen::<f64>()).collect();
        let noise2: Vec<f64> = (0..w).map(|_| rng.gen::<f64>()).collect();
        Dataset::from_numeric("r", vec![noise1, signal, noise2], class).unwrap()
    }

    #[test]
    fn relieff_prefers_class_copy() {
        let ds = random_dataset(7, 20);
        let weights = relieff_weights(&ds, &ReliefFConfig::default()).unwrap();
        assert!(weights[1] > weights[0] && weights[1] > weights[2], "{weights:?}");
        assert!(weights.iter().all(|w| w.abs() <= 1.0 + 1e-12), "{weights:?}");
    }

    #[test]
    fn relieff_constant_attribute_is_zero() {
        let mut cols = vec![vec![2.0; 10], (0..10).map(f64::from).collect()];
        cols.push(vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let ds = Dataset::from_numeric("c", cols, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        let weights = relieff_weights(&ds, &ReliefFConfig::default()).unwrap();
        assert_eq!(weights[0], 0.0);
    }

    #[test]
    fn duplicated_instances_have_zero_hit_diffs() {
        let ds = random_dataset(3, 10);
        let mut cols: Vec<Vec<f64>> =
            ds.columns().iter().map(|c| c.as_numeric().unwrap().values().to_vec()).collect();
        for c in &mut cols {
            let copy = c.clone();
            c.extend(copy);
        }
        let mut classes = ds.classes().to_vec();
        classes.extend(ds.classes().to_vec());
        let doubled = Dataset::from_numeric("d", cols, classes.clone()).unwrap();
        let cfg = ReliefFConfig {
            k_neighbors: 1,
            ..Default::default()
        };
        let weights = relieff_weights(&doubled, &cfg).unwrap();

        // hand-built expectation: the hit is always the twin, so only the
        // nearest miss contributes
        let w = classes.len();
        let ranges: Vec<f64> = doubled
            .columns()
            .iter()
            .map(|c| {
                let v = c.as_numeric().unwrap().values();
                v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
            })
            .collect();
        let val = |a: usize, p: usize| doubled.column(a).as_numeric().unwrap().values()[p];
        let diff = |a: usize, p: usize, q: usize| (val(a, p) - val(a, q)).abs() / ranges[a];
        let mut expected = vec![0.0; 3];
        for r in 0..w {
            let dist = |o: usize| (0..3).map(|a| diff(a, r, o)).sum::<f64>();
            let miss = (0..w)
                .filter(|&o| classes[o] != classes[r])
                .min_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)))
                .unwrap();
            // two balanced classes: P(c) / (1 - P(class r)) = 1
            for (a, e) in expected.iter_mut().enumerate() {
                *e += diff(a, r, miss) / w as f64;
            }
        }
        for (got, want) in weights.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12, "{weights:?} vs {expected:?}");
        }
        assert!(weights.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn relieff_full_sample_ignores_seed_and_is_thread_stable() {
        let ds = random_dataset(11, 70);
        let a = relieff_weights(&ds, &ReliefFConfig { rng_seed: 1, ..Default::default() }).unwrap();
        let b = relieff_weights(&ds, &ReliefFConfig { rng_seed: 99, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let c = pool.install(|| relieff_weights(&ds, &ReliefFConfig::default()).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn relieff_sampled_is_reproducible() {
        let ds = random_dataset(5, 40);
        let cfg = ReliefFConfig {
            sample_size: Some(15),
            rng_seed: 9,
            k_neighbors: 3,
        };
        assert_eq!(relieff_weights(&ds, &cfg).unwrap(), relieff_weights(&ds, &cfg).unwrap());
        assert!(relieff_weights(&ds, &ReliefFConfig { sample_size: Some(41), ..cfg }).is_err());
    }

    #[test]
    fn relieff_rejects_single_class() {
        let ds = Dataset::from_numeric("s", vec![vec![1.0, 2.0, 3.0]], vec![0, 0, 0]).unwrap();
        assert!(relieff_weights(&ds, &ReliefFConfig::default()).is_err());
    }
}
