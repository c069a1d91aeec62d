//! Repeated stratified k-fold cross-validation scored by percent correct.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::Learner;
use crate::dataset::{project, Dataset};
use crate::error::{Error, Result};
use crate::ranking::Ranking;

/// Fold assignment of every instance for each repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    assignments: Vec<Vec<u32>>,
}

/// Identifies the grid a [`CvResult`] was produced on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSignature {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    pub n_instances: usize,
    /// Total test rows over total training rows across all cells.
    pub test_train_ratio: f64,
}

impl FoldPlan {
    /// Per repeat, instances are shuffled by an RNG seeded with `(seed, repeat)`,
    /// grouped by class in code order, and dealt to folds round-robin.
    pub fn stratified(ds: &Dataset, k: usize, repeats: usize, seed: u64) -> Result<Self> {
        let w = ds.n_instances();
        if k < 2 {
            return Err(Error::invalid(format!("fold count must be at least 2, got {k}")));
        }
        if k > w {
            return Err(Error::invalid(format!("{k} folds requested for {w} instances")));
        }
        if repeats == 0 {
            return Err(Error::invalid("at least one repeat is required"));
        }
        let classes = ds.classes();
        let assignments = (0..repeats)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let mut order: Vec<usize> = (0..w).collect();
                order.shuffle(&mut rng);
                // stable: keeps the shuffled order inside each class
                order.sort_by_key(|&i| classes[i]);
                let mut folds = vec![0u32; w];
                for (pos, &i) in order.iter().enumerate() {
                    folds[i] = (pos % k) as u32;
                }
                folds
            })
            .collect();
        Ok(Self {
            k,
            repeats,
            seed,
            assignments,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.assignments.first().map_or(0, Vec::len)
    }

    pub fn assignment(&self, repeat: usize) -> &[u32] {
        &self.assignments[repeat]
    }

    /// `(train rows, test rows)` of one cell, both ascending.
    pub fn train_test(&self, repeat: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignments[repeat].iter().enumerate() {
            if f as usize == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn signature(&self) -> PlanSignature {
        let w = self.n_instances() as f64;
        let cells = (self.k * self.repeats) as f64;
        // every instance is tested once per repeat and trained on k - 1 times
        let test = w * self.repeats as f64;
        let train = w * cells - test;
        PlanSignature {
            k: self.k,
            repeats: self.repeats,
            seed: self.seed,
            n_instances: self.n_instances(),
            test_train_ratio: test / train,
        }
    }
}

pub fn stratified_folds(ds: &Dataset, k: usize, repeats: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::stratified(ds, k, repeats, seed)
}

/// Percent-correct grid (`repeats x k`) of one classifier on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub dataset: String,
    pub method: String,
    pub q: Option<usize>,
    pub classifier: String,
    pub plan: PlanSignature,
    pub scores: Vec<Vec<f64>>,
    pub mean: f64,
    pub std_dev: f64,
}

impl CvResult {
    pub fn new(
        dataset: impl Into<String>,
        method: impl Into<String>,
        q: Option<usize>,
        classifier: impl Into<String>,
        plan: PlanSignature,
        scores: Vec<Vec<f64>>,
    ) -> Self {
        let flat: Vec<f64> = scores.iter().flatten().copied().collect();
        let m = flat.len() as f64;
        let mean = flat.iter().sum::<f64>() / m;
        let std_dev = if flat.len() > 1 {
            (flat.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            dataset: dataset.into(),
            method: method.into(),
            q,
            classifier: classifier.into(),
            plan,
            scores,
            mean,
            std_dev,
        }
    }

    /// All cells in repeat-major order.
    pub fn flat_scores(&self) -> Vec<f64> {
        self.scores.iter().flatten().copied().collect()
    }
}

/// Trains on the out-of-fold rows of every `(repeat, fold)` cell and scores
/// the held-out rows.
pub fn cross_validate(ds: &Dataset, learner: &dyn Learner, plan: &FoldPlan) -> Result<CvResult> {
    if plan.n_instances() != ds.n_instances() {
        return Err(Error::invalid(format!(
            "fold plan covers {} instances, dataset has {}",
            plan.n_instances(),
            ds.n_instances()
        )));
    }
    let cells: Vec<f64> = (0..plan.repeats * plan.k)
        .into_par_iter()
        .map(|cell| {
            let (repeat, fold) = (cell / plan.k, cell % plan.k);
            let (train, test) = plan.train_test(repeat, fold);
            let model = learner.fit(ds, &train).map_err(|e| Error::Fold {
                repeat,
                fold,
                source: Box::new(e),
            })?;
            let correct = test.iter().filter(|&&r| model.predict(ds, r) == ds.classes()[r]).count();
            Ok(100.0 * correct as f64 / test.len() as f64)
        })
        .collect::<Result<_>>()?;
    let scores = cells.chunks(plan.k).map(<[f64]>::to_vec).collect();
    Ok(CvResult::new(ds.name(), "full", None, learner.name(), plan.signature(), scores))
}

/// `floor(log2 n)`, at least 1.
pub fn log2_q(n: usize) -> usize {
    if n < 2 {
        1
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

/// A requested reduced-dataset size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QSpec {
    Fixed(usize),
    Log2,
}

impl QSpec {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            QSpec::Fixed(q) => q,
            QSpec::Log2 => log2_q(n),
        }
    }
}

impl std::str::FromStr for QSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("log2") || s.eq_ignore_ascii_case("log2(n)") {
            return Ok(QSpec::Log2);
        }
        match s.parse::<usize>() {
            Ok(q) if q >= 1 => Ok(QSpec::Fixed(q)),
            _ => Err(Error::invalid(format!("invalid q value '{s}'"))),
        }
    }
}

/// Cross-validates every classifier on the top-`q` reduced dataset for each `q`.
/// Rows come out `q`-major, in the order given.
pub fn evaluate_ranking(
    ds: &Dataset,
    ranking: &Ranking,
    q_list: &[usize],
    learners: &[&dyn Learner],
    plan: &FoldPlan,
) -> Result<Vec<CvResult>> {
    let n = ds.n_attributes();
    if ranking.len() != n {
        return Err(Error::invalid(format!(
            "ranking has {} entries but the dataset has {n} attributes",
            ranking.len()
        )));
    }
    let mut out = Vec::with_capacity(q_list.len() * learners.len());
    for &q in q_list {
        if q > n {
            return Err(Error::invalid(format!("q = {q} exceeds the {n} available attributes")));
        }
        let reduced = project(ds, &ranking.top(q))?;
        for learner in learners {
            let mut res = cross_validate(&reduced, *learner, plan)?;
            res.method = ranking.method().to_string();
            res.q = Some(q);
            out.push(res);
        }
    }
    Ok(out)
}
