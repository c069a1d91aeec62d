//! Library results against slow, independently written reference code.

mod common;

use std::collections::HashMap;

use pairrank::baselines::{rank_univariate, relieff_weights, ReliefFConfig, UnivariateMetric};
use pairrank::dataset::{AttributeColumn, Dataset};
use pairrank::discretize::discretize_dataset;
use pairrank::pairwise::PairwiseOptions;
use pairrank::pairwise_consistency::{inconsistency_rate, pairwise_consistency_scores};
use pairrank::pairwise_correlation::{pairwise_correlation_scores, subset_merit};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (any::<u64>(), 2usize..10, 4usize..60, any::<bool>()).prop_map(|(seed, n, w, numeric)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if numeric {
            common::random_numeric(&mut rng, n, w)
        } else {
            common::random_discrete(&mut rng, n, w)
        }
    })
}

/// `k`-attribute CFS merit straight from the definition, with naive SU.
fn naive_subset_merit(cols: &[Vec<u32>], class: &[u32], subset: &[usize]) -> f64 {
    let k = subset.len() as f64;
    let mean_c = subset.iter().map(|&a| common::naive_su(&cols[a], class)).sum::<f64>() / k;
    let mut sum_f = 0.0;
    let mut pairs = 0.0;
    for (x, &a) in subset.iter().enumerate() {
        for &b in &subset[x + 1..] {
            sum_f += common::naive_su(&cols[a], &cols[b]);
            pairs += 1.0;
        }
    }
    let mean_f = if pairs > 0.0 { sum_f / pairs } else { 0.0 };
    k * mean_c / (k + k * (k - 1.0) * mean_f).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairwise_scores_match_references(ds in dataset_strategy()) {
        let (cols, class) = common::codes_of(&ds);
        let opts = PairwiseOptions::default();
        let corr = pairwise_correlation_scores(&ds, &opts).unwrap();
        let cons = pairwise_consistency_scores(&ds, &opts).unwrap();
        for (got, want) in corr.iter().zip(common::oracle_pairwise_correlation(&cols, &class)) {
            prop_assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in cons.iter().zip(common::oracle_pairwise_consistency(&cols, &class)) {
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn block_layout_never_changes_scores(ds in dataset_strategy(), block in 1usize..7, dense in prop_oneof![Just(0usize), Just(1 << 16)]) {
        let reference = PairwiseOptions::default();
        let opts = PairwiseOptions { block_size: block, dense_cell_limit: dense };
        prop_assert_eq!(
            pairwise_correlation_scores(&ds, &reference).unwrap(),
            pairwise_correlation_scores(&ds, &opts).unwrap()
        );
        prop_assert_eq!(
            pairwise_consistency_scores(&ds, &reference).unwrap(),
            pairwise_consistency_scores(&ds, &opts).unwrap()
        );
    }

    #[test]
    fn subset_measures_match_references(ds in dataset_strategy(), mask in 1u32..512) {
        let disc = discretize_dataset(&ds);
        let (cols, class) = common::codes_of(&ds);
        let subset: Vec<usize> = (0..cols.len()).filter(|&a| mask & (1 << a) != 0).collect();
        prop_assume!(!subset.is_empty());
        let merit = subset_merit(&disc, &subset).unwrap();
        prop_assert!((merit - naive_subset_merit(&cols, &class, &subset)).abs() < 1e-12);
        let rate = inconsistency_rate(&disc, &subset).unwrap();
        let want = common::string_key_inconsistency(&cols, &class, &subset) as f64 / class.len() as f64;
        prop_assert_eq!(rate, want);
    }
}

fn naive_info_gain(x: &[u32], y: &[u32]) -> f64 {
    let h = |keys: Vec<String>| {
        let mut counts: HashMap<String, f64> = HashMap::new();
        for k in &keys {
            *counts.entry(k.clone()).or_insert(0.0) += 1.0;
        }
        let n = keys.len() as f64;
        counts.values().map(|c| -(c / n) * (c / n).log2()).sum::<f64>()
    };
    let hx = h(x.iter().map(|v| v.to_string()).collect());
    let hy = h(y.iter().map(|v| v.to_string()).collect());
    let hxy = h(x.iter().zip(y).map(|(a, b)| format!("{a}/{b}")).collect());
    hx + hy - hxy
}

fn naive_chi_squared(x: &[u32], y: &[u32]) -> f64 {
    let n = x.len() as f64;
    let rows: Vec<u32> = {
        let mut v = x.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let cols: Vec<u32> = {
        let mut v = y.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut chi = 0.0;
    for &r in &rows {
        for &c in &cols {
            let observed = x.iter().zip(y).filter(|&(&a, &b)| a == r && b == c).count() as f64;
            let expected = x.iter().filter(|&&a| a == r).count() as f64 * y.iter().filter(|&&b| b == c).count() as f64 / n;
            chi += (observed - expected).powi(2) / expected;
        }
    }
    chi
}

#[test]
fn univariate_baselines_match_references() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(1..10);
        let w = rng.gen_range(4..80);
        let ds = if rng.gen_bool(0.5) {
            common::random_discrete(&mut rng, n, w)
        } else {
            common::random_numeric(&mut rng, n, w)
        };
        let (cols, class) = common::codes_of(&ds);
        let ig = rank_univariate(&ds, UnivariateMetric::InfoGain).unwrap().scores_by_id();
        let chi = rank_univariate(&ds, UnivariateMetric::ChiSquared).unwrap().scores_by_id();
        for a in 0..n {
            assert!((ig[a] - naive_info_gain(&cols[a], &class)).abs() < 1e-12);
            let want = naive_chi_squared(&cols[a], &class);
            assert!((chi[a] - want).abs() <= 1e-9 * want.max(1.0), "{} vs {want}", chi[a]);
        }
    }
}

fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[test]
fn correlation_baseline_matches_weighted_indicator_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let w = rng.gen_range(4..60);
        let ds = common::random_numeric(&mut rng, 3, w);
        let scores = rank_univariate(&ds, UnivariateMetric::Correlation).unwrap().scores_by_id();
        let k = ds.n_classes();
        for a in 0..3 {
            let x = ds.column(a).as_numeric().unwrap().values();
            let want = if k == 2 {
                let y: Vec<f64> = ds.classes().iter().map(|&c| f64::from(c)).collect();
                naive_pearson(x, &y).abs()
            } else {
                (0..k as u32)
                    .map(|c| {
                        let y: Vec<f64> = ds.classes().iter().map(|&v| f64::from(u8::from(v == c))).collect();
                        let p = y.iter().sum::<f64>() / w as f64;
                        p * naive_pearson(x, &y).abs()
                    })
                    .sum()
            };
            assert!((scores[a] - want).abs() < 1e-9, "{} vs {want}", scores[a]);
        }
    }
}

/// ReliefF with full sorting of every candidate list.
fn naive_relieff(ds: &Dataset, k: usize) -> Vec<f64> {
    let w = ds.n_instances();
    let n = ds.n_attributes();
    let diff = |a: usize, i: usize, j: usize| -> f64 {
        match ds.column(a) {
            AttributeColumn::Numeric(c) => {
                let v = c.values();
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    (v[i] - v[j]).abs() / (hi - lo)
                } else {
                    0.0
                }
            }
            AttributeColumn::Nominal(c) => {
                let codes = c.column().codes();
                if codes[i] == codes[j] {
                    0.0
                } else {
                    1.0
                }
            }
        }
    };
    let classes = ds.classes();
    let prior = |c: u32| classes.iter().filter(|&&v| v == c).count() as f64 / w as f64;
    let mut weights = vec![0.0; n];
    for r in 0..w {
        let dist = |o: usize| (0..n).map(|a| diff(a, r, o)).sum::<f64>();
        for c in 0..ds.n_classes() as u32 {
            let mut cands: Vec<(f64, usize)> =
                (0..w).filter(|&o| o != r && classes[o] == c).map(|o| (dist(o), o)).collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cands.truncate(k);
            if cands.is_empty() {
                continue;
            }
            let scale = if c == classes[r] {
                -1.0
            } else {
                prior(c) / (1.0 - prior(classes[r]))
            } / (w as f64 * cands.len() as f64);
            for (a, wt) in weights.iter_mut().enumerate() {
                *wt += scale * cands.iter().map(|&(_, o)| diff(a, r, o)).sum::<f64>();
            }
        }
    }
    weights
}

#[test]
fn relieff_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for t in 0..60 {
        let n = rng.gen_range(1..6);
        let w = rng.gen_range(3..50);
        let ds = if t % 2 == 0 {
            common::random_discrete(&mut rng, n, w)
        } else {
            common::random_numeric(&mut rng, n, w)
        };
        let k = rng.gen_range(1..12);
        let got = relieff_weights(
            &ds,
            &ReliefFConfig {
                k_neighbors: k,
                ..ReliefFConfig::default()
            },
        )
        .unwrap();
        for (g, want) in got.iter().zip(naive_relieff(&ds, k)) {
            assert!((g - want).abs() < 1e-9, "{g} vs {want}");
        }
    }
}
