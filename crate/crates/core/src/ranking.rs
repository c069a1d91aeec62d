use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Attributes ordered by descending score, ties by ascending attribute id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    method: String,
    entries: Vec<(usize, f64)>,
}

impl Ranking {
    /// Orders `scores[i]` (the score of attribute `i`). Scores must not be NaN.
    pub fn from_scores(method: impl Into<String>, scores: Vec<f64>) -> Self {
        assert!(scores.iter().all(|s| !s.is_nan()), "ranking scores must not be NaN");
        let mut entries: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self {
            method: method.into(),
            entries,
        }
    }

    /// Builds a ranking from entries already in rank order, e.g. one read back
    /// from a file. Ids must be a permutation of `0..entries.len()`.
    pub fn from_ordered(method: impl Into<String>, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut seen = vec![false; entries.len()];
        for &(id, _) in &entries {
            if id >= seen.len() || std::mem::replace(&mut seen[id], true) {
                return Err(Error::invalid(format!("ranking entry {id} is duplicated or out of range")));
            }
        }
        Ok(Self {
            method: method.into(),
            entries,
        })
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Attribute ids in rank order.
    pub fn ids(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn top(&self, q: usize) -> Vec<usize> {
        self.entries.iter().take(q).map(|e| e.0).collect()
    }

    /// Score of each attribute, indexed by id.
    pub fn scores_by_id(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        for &(id, s) in &self.entries {
            out[id] = s;
        }
        out
    }

    /// `rank<TAB>attribute<TAB>score`, one row per attribute, 6 decimals.
    pub fn write_tsv<W: Write>(&self, ds: &Dataset, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rank\tattribute\tscore")?;
        for (r, &(id, score)) in self.entries.iter().enumerate() {
            writeln!(out, "{}\t{}\t{:.6}", r + 1, ds.attribute_names()[id], score)?;
        }
        Ok(())
    }
}

/// Reads `(attribute name, score)` rows back from a ranking TSV, in file order.
pub fn read_ranking_tsv<R: BufRead>(input: R, source: &str) -> Result<Vec<(String, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(source, Some(i + 1), None, e.to_string()))?;
        if i == 0 {
            if line.trim() != "rank\tattribute\tscore" {
                return Err(Error::parse(source, Some(1), None, "expected header 'rank\tattribute\tscore'"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(source, Some(i + 1), None, "expected 3 tab-separated fields"));
        }
        let score = fields[2]
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::parse(source, Some(i + 1), Some("score".into()), e.to_string()))?;
        rows.push((fields[1].to_string(), score));
    }
    Ok(rows)
}
