//! Shared generators and brute-force reference implementations.
#![allow(dead_code)]

use std::collections::HashMap;

use pairrank::dataset::Dataset;
use pairrank::discretize::discretize_dataset;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Class codes with every code in `0..k` present, `k >= 2`.
pub fn random_classes(rng: &mut ChaCha8Rng, w: usize, k: usize) -> Vec<u32> {
    let mut y: Vec<u32> = (0..w).map(|_| rng.gen_range(0..k as u32)).collect();
    for c in 0..k.min(w) {
        y[c] = c as u32;
    }
    y
}

/// Small random discrete dataset with occasional duplicated and constant columns.
pub fn random_discrete(rng: &mut ChaCha8Rng, n: usize, w: usize) -> Dataset {
    let k = rng.gen_range(2..=3.min(w).max(2));
    let classes = random_classes(rng, w, k);
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n);
    for a in 0..n {
        let roll = rng.gen_range(0..10);
        let col = if a > 0 && roll == 0 {
            cols[rng.gen_range(0..a)].clone()
        } else if roll == 1 {
            vec![0; w]
        } else if roll == 2 {
            // noisy copy of the class
            classes.iter().map(|&c| if rng.gen_bool(0.8) { c } else { rng.gen_range(0..3) }).collect()
        } else {
            let card = rng.gen_range(2..=5);
            (0..w).map(|_| rng.gen_range(0..card)).collect()
        };
        cols.push(col);
    }
    Dataset::from_discrete("random", cols, classes).unwrap()
}

/// Small random numeric dataset whose columns carry some class signal.
pub fn random_numeric(rng: &mut ChaCha8Rng, n: usize, w: usize) -> Dataset {
    let k = rng.gen_range(2..=3.min(w).max(2));
    let classes = random_classes(rng, w, k);
    let cols = (0..n)
        .map(|_| {
            let strength = rng.gen_range(0.0..3.0);
            let levels = rng.gen_range(3..40);
            classes
                .iter()
                .map(|&c| f64::from(c) * strength + f64::from(rng.gen_range(0..levels)) / 10.0)
                .collect()
        })
        .collect();
    Dataset::from_numeric("random", cols, classes).unwrap()
}

/// Discretized attribute codes and the class codes as plain vectors.
pub fn codes_of(ds: &Dataset) -> (Vec<Vec<u32>>, Vec<u32>) {
    let disc = discretize_dataset(ds);
    let cols = disc
        .discrete_columns()
        .unwrap()
        .iter()
        .map(|c| c.codes().to_vec())
        .collect();
    (cols, disc.classes().to_vec())
}

fn plogp_entropy<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> f64 {
    let mut counts: HashMap<K, usize> = HashMap::new();
    let mut n = 0usize;
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
        n += 1;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

pub fn naive_su(x: &[u32], y: &[u32]) -> f64 {
    let hx = plogp_entropy(x.iter());
    let hy = plogp_entropy(y.iter());
    let hxy = plogp_entropy(x.iter().zip(y));
    if hx + hy <= 0.0 {
        return 0.0;
    }
    (2.0 * (hx + hy - hxy) / (hx + hy)).clamp(0.0, 1.0)
}

/// Mean two-attribute CFS merit, recomputing every SU from scratch.
pub fn oracle_pairwise_correlation(cols: &[Vec<u32>], class: &[u32]) -> Vec<f64> {
    let n = cols.len();
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                let k = 2.0;
                let mean_c = (naive_su(&cols[i], class) + naive_su(&cols[j], class)) / 2.0;
                let mean_f = naive_su(&cols[i], &cols[j]);
                total += k * mean_c / (k + k * (k - 1.0) * mean_f).sqrt();
            }
            total / (n - 1) as f64
        })
        .collect()
}

/// Inconsistency count of an attribute subset using string pattern keys.
pub fn string_key_inconsistency(cols: &[Vec<u32>], class: &[u32], subset: &[usize]) -> usize {
    let mut patterns: HashMap<String, HashMap<u32, usize>> = HashMap::new();
    for (r, &c) in class.iter().enumerate() {
        let key = subset
            .iter()
            .map(|&a| cols[a][r].to_string())
            .collect::<Vec<_>>()
            .join("|");
        *patterns.entry(key).or_default().entry(c).or_insert(0) += 1;
    }
    patterns
        .values()
        .map(|by_class| by_class.values().sum::<usize>() - by_class.values().copied().max().unwrap_or(0))
        .sum()
}

pub fn oracle_pairwise_consistency(cols: &[Vec<u32>], class: &[u32]) -> Vec<f64> {
    let n = cols.len();
    let w = class.len() as f64;
    (0..n)
        .map(|i| {
            let total: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 - string_key_inconsistency(cols, class, &[i, j]) as f64 / w)
                .sum();
            total / (n - 1) as f64
        })
        .collect()
}

/// Adjacent entries of `order` that the reference scores rank the other way
/// round by more than `tol`.
pub fn ordering_violations(order: &[usize], reference: &[f64], tol: f64) -> usize {
    order
        .windows(2)
        .filter(|p| reference[p[0]] < reference[p[1]] - tol)
        .count()
}

/// Reference order: descending score, ascending id, scores within `tol` treated as equal.
pub fn reference_order(reference: &[f64], tol: f64) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..reference.len()).collect();
    ids.sort_by(|&a, &b| {
        let (x, y) = (reference[a], reference[b]);
        if (x - y).abs() <= tol {
            a.cmp(&b)
        } else {
            y.total_cmp(&x)
        }
    });
    ids
}
