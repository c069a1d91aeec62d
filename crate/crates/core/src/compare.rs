//! Paired t-tests between cross-validation results and the wins-losses and
//! best-count tallies built from them.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::eval::CvResult;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AWins,
    BWins,
    Tie,
}

impl Verdict {
    pub fn mirrored(self) -> Self {
        match self {
            Verdict::AWins => Verdict::BWins,
            Verdict::BWins => Verdict::AWins,
            Verdict::Tie => Verdict::Tie,
        }
    }
}

/// `Plain` divides the variance of the differences by the number of cells;
/// `Resampled` uses `1/m + n_test/n_train` to account for overlapping training sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    Plain,
    #[default]
    Resampled,
}

impl std::str::FromStr for TTestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "none" => Ok(TTestVariant::Plain),
            "resampled" | "corrected" => Ok(TTestVariant::Resampled),
            other => Err(Error::invalid(format!("unknown t-test variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Context {
    pub dataset: String,
    pub q: Option<usize>,
    pub classifier: String,
}

impl Context {
    pub fn of(r: &CvResult) -> Self {
        Self {
            dataset: r.dataset.clone(),
            q: r.q,
            classifier: r.classifier.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub method_a: String,
    pub method_b: String,
    pub context: Context,
    pub verdict: Verdict,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub p: f64,
    pub alpha: f64,
    pub variant: TTestVariant,
}

/// Paired t-test on the cell-wise differences `b - a`.
pub fn paired_t(a: &CvResult, b: &CvResult, alpha: f64, variant: TTestVariant) -> Result<ComparisonOutcome> {
    if a.plan != b.plan {
        return Err(Error::invalid(format!(
            "cannot compare '{}' and '{}': fold plans differ",
            a.method, b.method
        )));
    }
    let (xa, xb) = (a.flat_scores(), b.flat_scores());
    if xa.len() != xb.len() || a.scores.len() != b.scores.len() {
        return Err(Error::invalid(format!(
            "cannot compare '{}' and '{}': score grids differ in shape",
            a.method, b.method
        )));
    }
    if xa.len() < 2 {
        return Err(Error::invalid("paired t-test needs at least 2 cells"));
    }
    let m = xa.len() as f64;
    let d: Vec<f64> = xa.iter().zip(&xb).map(|(x, y)| y - x).collect();
    let mean = d.iter().sum::<f64>() / m;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let scale = match variant {
        TTestVariant::Plain => 1.0 / m,
        TTestVariant::Resampled => 1.0 / m + a.plan.test_train_ratio,
    };
    let (t, p) = if var == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (scale * var).sqrt();
        let dist = StudentsT::new(0.0, 1.0, m - 1.0).expect("positive degrees of freedom");
        (t, 2.0 * dist.cdf(-t.abs()))
    };
    let verdict = if p < alpha && mean > 0.0 {
        Verdict::BWins
    } else if p < alpha && mean < 0.0 {
        Verdict::AWins
    } else {
        Verdict::Tie
    };
    Ok(ComparisonOutcome {
        method_a: a.method.clone(),
        method_b: b.method.clone(),
        context: Context::of(a),
        verdict,
        mean_a: a.mean,
        mean_b: b.mean,
        t,
        p,
        alpha,
        variant,
    })
}

/// Methods in order of first appearance.
fn method_order<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        if !out.iter().any(|m| m == n) {
            out.push(n.to_string());
        }
    }
    out
}

/// Groups results by context and tests every pair of methods within each one.
/// Contexts are visited in sorted order; pairs follow method first appearance.
pub fn compare_all(results: &[CvResult], alpha: f64, variant: TTestVariant) -> Result<Vec<ComparisonOutcome>> {
    let methods = method_order(results.iter().map(|r| r.method.as_str()));
    if methods.len() < 2 {
        return Err(Error::invalid(format!(
            "need results for at least 2 methods to compare, got {}",
            methods.len()
        )));
    }
    if let Some(first) = results.first() {
        if let Some(bad) = results.iter().find(|r| r.plan != first.plan) {
            return Err(Error::invalid(format!(
                "fold plan of '{}' ({}) differs from '{}'",
                bad.method, bad.classifier, first.method
            )));
        }
    }
    let mut contexts: Vec<Context> = results.iter().map(Context::of).collect();
    contexts.sort();
    contexts.dedup();
    let mut out = Vec::new();
    for ctx in &contexts {
        let mut here: Vec<&CvResult> = Vec::new();
        for m in &methods {
            let mut found = results.iter().filter(|r| &r.method == m && Context::of(r) == *ctx);
            if let Some(r) = found.next() {
                if found.next().is_some() {
                    return Err(Error::invalid(format!(
                        "duplicate result for method '{m}' on {} q={:?} {}",
                        ctx.dataset, ctx.q, ctx.classifier
                    )));
                }
                here.push(r);
            }
        }
        for (x, a) in here.iter().enumerate() {
            for b in &here[x + 1..] {
                out.push(paired_t(a, b, alpha, variant)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinsLossesRow {
    pub method: String,
    pub wins: usize,
    pub losses: usize,
    pub difference: i64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinsLossesTable {
    pub rows: Vec<WinsLossesRow>,
}

impl WinsLossesTable {
    pub fn row(&self, method: &str) -> Option<&WinsLossesRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Dense ranks for values already sorted in non-increasing order.
fn dense_ranks<T: PartialEq>(sorted: &[T]) -> Vec<usize> {
    let mut ranks = Vec::with_capacity(sorted.len());
    for (i, v) in sorted.iter().enumerate() {
        let r = match i {
            0 => 1,
            _ if *v == sorted[i - 1] => ranks[i - 1],
            _ => ranks[i - 1] + 1,
        };
        ranks.push(r);
    }
    ranks
}

pub fn wins_losses(outcomes: &[ComparisonOutcome]) -> WinsLossesTable {
    let methods = method_order(
        outcomes
            .iter()
            .flat_map(|o| [o.method_a.as_str(), o.method_b.as_str()]),
    );
    let mut wins = vec![0usize; methods.len()];
    let mut losses = vec![0usize; methods.len()];
    let idx = |m: &str| methods.iter().position(|x| x == m).expect("collected above");
    for o in outcomes {
        let (a, b) = (idx(&o.method_a), idx(&o.method_b));
        match o.verdict {
            Verdict::AWins => {
                wins[a] += 1;
                losses[b] += 1;
            }
            Verdict::BWins => {
                wins[b] += 1;
                losses[a] += 1;
            }
            Verdict::Tie => {}
        }
    }
    let mut order: Vec<usize> = (0..methods.len()).collect();
    let diff = |i: usize| wins[i] as i64 - losses[i] as i64;
    order.sort_by_key(|&i| std::cmp::Reverse(diff(i)));
    let diffs: Vec<i64> = order.iter().map(|&i| diff(i)).collect();
    let ranks = dense_ranks(&diffs);
    let rows = order
        .iter()
        .zip(ranks)
        .map(|(&i, rank)| WinsLossesRow {
            method: methods[i].clone(),
            wins: wins[i],
            losses: losses[i],
            difference: diff(i),
            rank,
        })
        .collect();
    WinsLossesTable { rows }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestCountRow {
    pub method: String,
    pub count: usize,
    pub rank: usize,
}

/// For every context, credits each method whose mean equals the maximum.
pub fn best_count(results: &[CvResult]) -> Vec<BestCountRow> {
    let methods = method_order(results.iter().map(|r| r.method.as_str()));
    let mut counts = vec![0usize; methods.len()];
    let mut contexts: Vec<Context> = results.iter().map(Context::of).collect();
    contexts.sort();
    contexts.dedup();
    for ctx in &contexts {
        let here: Vec<&CvResult> = results.iter().filter(|r| Context::of(r) == *ctx).collect();
        let best = here.iter().map(|r| r.mean).fold(f64::NEG_INFINITY, f64::max);
        for r in here.iter().filter(|r| r.mean == best) {
            let i = methods.iter().position(|m| *m == r.method).expect("collected above");
            counts[i] += 1;
        }
    }
    let mut order: Vec<usize> = (0..methods.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(counts[i]));
    let sorted: Vec<usize> = order.iter().map(|&i| counts[i]).collect();
    order
        .iter()
        .zip(dense_ranks(&sorted))
        .map(|(&i, rank)| BestCountRow {
            method: methods[i].clone(),
            count: counts[i],
            rank,
        })
        .collect()
}
