//! Blocked evaluation of a symmetric pair score over all attribute pairs.
//!
//! Attributes are split into index blocks. Tiles `(row block, column block)`
//! with `row <= column` are visited in row-major order; each tile is filled in
//! parallel and then merged serially. The merge adds the contributions of
//! every attribute in ascending partner order, so the per-attribute sums are
//! exactly those of the naive double loop whatever the thread count.

use rayon::prelude::*;

use crate::dataset::DiscreteColumn;

pub const DEFAULT_BLOCK_SIZE: usize = 256;

/// Joint cells above which pair counting switches from a dense array to a hash map.
pub const DEFAULT_DENSE_CELL_LIMIT: usize = 1 << 16;

/// Tuning knobs shared by the two pairwise rankers. Results do not depend on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairwiseOptions {
    pub block_size: usize,
    pub dense_cell_limit: usize,
}

impl Default for PairwiseOptions {
    fn default() -> Self {
        Self {
            block_size: DEFAULT_BLOCK_SIZE,
            dense_cell_limit: DEFAULT_DENSE_CELL_LIMIT,
        }
    }
}

/// Symmetric score of an attribute pair. `score(i, j)` is only called with `i < j`.
pub(crate) trait PairScore: Sync {
    type Scratch: Send;

    fn scratch(&self) -> Self::Scratch;

    fn score(&self, i: usize, j: usize, scratch: &mut Self::Scratch) -> f64;
}

/// For every attribute `i`, `(1 / (n - 1)) * sum_{j != i} score(i, j)` with the
/// sum taken in ascending `j`.
pub(crate) fn mean_pair_scores<S: PairScore>(n: usize, scorer: &S, block_size: usize) -> Vec<f64> {
    assert!(n >= 2, "pairwise means need at least two attributes");
    let bs = block_size.max(1);
    let n_blocks = n.div_ceil(bs);
    let mut acc = vec![0.0f64; n];
    let mut tile = Vec::with_capacity(bs * bs);

    for rb in 0..n_blocks {
        let r0 = rb * bs;
        let r1 = (r0 + bs).min(n);
        for cb in rb..n_blocks {
            let c0 = cb * bs;
            let c1 = (c0 + bs).min(n);
            let width = c1 - c0;
            tile.clear();
            tile.resize((r1 - r0) * width, 0.0);
            tile.par_chunks_mut(width).enumerate().for_each_init(
                || scorer.scratch(),
                |scratch, (ri, row)| {
                    let i = r0 + ri;
                    for (ci, slot) in row.iter_mut().enumerate() {
                        let j = c0 + ci;
                        if j > i {
                            *slot = scorer.score(i, j, scratch);
                        }
                    }
                },
            );

            if rb == cb {
                // diagonal tile: partners inside the block, in ascending order
                for i in r0..r1 {
                    for j in r0..r1 {
                        if j == i {
                            continue;
                        }
                        let (a, b) = if i < j { (i, j) } else { (j, i) };
                        acc[i] += tile[(a - r0) * width + (b - c0)];
                    }
                }
            } else {
                for i in r0..r1 {
                    let row = &tile[(i - r0) * width..(i - r0 + 1) * width];
                    for &v in row {
                        acc[i] += v;
                    }
                }
                for j in c0..c1 {
                    for i in r0..r1 {
                        acc[j] += tile[(i - r0) * width + (j - c0)];
                    }
                }
            }
        }
    }
    let denom = (n - 1) as f64;
    acc.into_iter().map(|s| s / denom).collect()
}

/// Discrete attributes prepared for pair counting.
pub(crate) struct PairData {
    pub codes: Vec<Vec<u32>>,
    pub cards: Vec<u32>,
}

impl PairData {
    pub fn new(columns: &[&DiscreteColumn]) -> Self {
        Self {
            codes: columns.iter().map(|c| c.codes().to_vec()).collect(),
            cards: columns.iter().map(|c| c.cardinality()).collect(),
        }
    }
}
