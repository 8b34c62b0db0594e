//! Traversals (warping paths) and the exhaustive small-instance oracles.
//!
//! A traversal of an `m' x m''` grid is a monotone index-pair sequence from
//! `(1,1)` to `(m',m'')` stepping right, down or diagonally. Every distance
//! measure in this crate is a minimization over traversals, so the brute-force
//! enumeration here is the reference point for all DP kernels.

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;

/// Default cap on `m' + m''` for exhaustive enumeration; the traversal count is
/// the Delannoy number D(m'-1, m''-1), which grows exponentially.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 16;

/// A monotone warping path, stored as 1-based index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traversal {
    pairs: Vec<(usize, usize)>,
}

impl Traversal {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Traversal { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks the traversal invariants against an `rows x cols` grid: starts at
    /// `(1,1)`, ends at `(rows,cols)`, and each successor is one of
    /// `(i+1,j)`, `(i,j+1)`, `(i+1,j+1)`.
    pub fn validate(&self, rows: usize, cols: usize) -> bool {
        if self.pairs.first() != Some(&(1, 1)) || self.pairs.last() != Some(&(rows, cols)) {
            return false;
        }
        self.pairs.windows(2).all(|w| {
            let (i, j) = w[0];
            let (ni, nj) = w[1];
            (ni == i + 1 && nj == j) || (ni == i && nj == j + 1) || (ni == i + 1 && nj == j + 1)
        })
    }

    /// Distances matched by this traversal, sorted nonincreasing.
    pub fn profile(&self, d: &DistanceMatrix) -> Result<TopKProfile> {
        if !self.validate(d.rows(), d.cols()) {
            return Err(Error::InvalidTraversal {
                rows: d.rows(),
                cols: d.cols(),
            });
        }
        Ok(TopKProfile::from_matched(
            self.pairs.iter().map(|&(i, j)| d.get(i - 1, j - 1)),
        ))
    }
}

/// The nonincreasing sequence `s_1 >= s_2 >= ...` of distances matched by a
/// traversal; indices beyond the traversal length count as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKProfile {
    sorted_distances: Vec<f64>,
}

impl TopKProfile {
    pub fn from_matched(matched: impl IntoIterator<Item = f64>) -> Self {
        let mut sorted: Vec<f64> = matched.into_iter().collect();
        sorted.sort_unstable_by(|a, b| b.total_cmp(a));
        TopKProfile {
            sorted_distances: sorted,
        }
    }

    pub fn sorted_distances(&self) -> &[f64] {
        &self.sorted_distances
    }

    /// `s_l` with zero padding beyond the traversal length (1-based `l`).
    pub fn nth_largest(&self, l: usize) -> f64 {
        self.sorted_distances.get(l - 1).copied().unwrap_or(0.0)
    }

    /// Sum of the `k` largest matched distances, zero-padded when `k` exceeds
    /// the traversal length.
    pub fn top_k_sum(&self, k: usize) -> f64 {
        self.sorted_distances.iter().take(k).sum()
    }

    /// l_q norm of the matched distances.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q == 1.0 {
            self.sorted_distances.iter().sum()
        } else {
            self.sorted_distances
                .iter()
                .map(|x| x.powf(q))
                .sum::<f64>()
                .powf(1.0 / q)
        }
    }

    pub fn max(&self) -> f64 {
        self.sorted_distances.first().copied().unwrap_or(0.0)
    }
}

/// Sum of the `k` largest distances matched by `t` on `d`.
pub fn topk_cost(t: &Traversal, d: &DistanceMatrix, k: usize) -> Result<f64> {
    Ok(t.profile(d)?.top_k_sum(k))
}

fn check_guard(rows: usize, cols: usize, limit: Option<usize>) -> Result<usize> {
    let limit = limit.unwrap_or(DEFAULT_ENUMERATION_LIMIT);
    if rows + cols > limit {
        return Err(Error::SizeGuardExceeded { rows, cols, limit });
    }
    Ok(limit)
}

/// Streaming enumeration of every traversal of an `rows x cols` grid, in
/// lexicographic order of step choices (right, down, diagonal).
///
/// `limit` overrides the default guard on `rows + cols`.
pub fn enumerate_traversals(
    rows: usize,
    cols: usize,
    limit: Option<usize>,
) -> Result<TraversalIter> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidMatrix("grid must be nonempty".into()));
    }
    check_guard(rows, cols, limit)?;
    Ok(TraversalIter {
        rows,
        cols,
        path: vec![(1, 1)],
        choices: vec![0],
        done: false,
    })
}

/// Depth-first traversal enumerator with an explicit backtracking stack.
pub struct TraversalIter {
    rows: usize,
    cols: usize,
    path: Vec<(usize, usize)>,
    // Step chosen at each path position: 0 = right, 1 = down, 2 = diagonal,
    // 3 = exhausted.
    choices: Vec<u8>,
    done: bool,
}

impl TraversalIter {
    fn step(&self, pos: (usize, usize), choice: u8) -> Option<(usize, usize)> {
        let (i, j) = pos;
        let next = match choice {
            0 => (i, j + 1),
            1 => (i + 1, j),
            2 => (i + 1, j + 1),
            _ => return None,
        };
        (next.0 <= self.rows && next.1 <= self.cols).then_some(next)
    }
}

impl Iterator for TraversalIter {
    type Item = Traversal;

    fn next(&mut self) -> Option<Traversal> {
        if self.done {
            return None;
        }
        loop {
            let &pos = self.path.last().unwrap();
            if pos == (self.rows, self.cols) {
                let out = Traversal::new(self.path.clone());
                // Backtrack to the deepest position with an untried step.
                loop {
                    self.path.pop();
                    self.choices.pop();
                    match self.choices.last_mut() {
                        None => {
                            self.done = true;
                            return Some(out);
                        }
                        Some(c) => {
                            *c += 1;
                            let parent = *self.path.last().unwrap();
                            let mut choice = *self.choices.last().unwrap();
                            while choice < 3 {
                                if let Some(next) = self.step(parent, choice) {
                                    self.path.push(next);
                                    self.choices.push(0);
                                    return Some(out);
                                }
                                *self.choices.last_mut().unwrap() += 1;
                                choice += 1;
                            }
                            // All steps from the parent tried; keep unwinding.
                        }
                    }
                }
            }
            // Descend along the first viable step from the current position.
            let mut choice = *self.choices.last().unwrap();
            let mut advanced = false;
            while choice < 3 {
                if let Some(next) = self.step(pos, choice) {
                    self.path.push(next);
                    self.choices.push(0);
                    advanced = true;
                    break;
                }
                *self.choices.last_mut().unwrap() += 1;
                choice += 1;
            }
            if !advanced {
                // No step applies; only possible from the terminal cell, which
                // is handled above.
                unreachable!("non-terminal grid cell with no legal step");
            }
        }
    }
}

/// Exhaustive k-DTW: exact minimum of the top-k cost over all traversals,
/// with the first minimizer in enumeration order.
pub fn oracle_kdtw(
    d: &DistanceMatrix,
    k: usize,
    limit: Option<usize>,
) -> Result<(f64, Traversal)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    oracle_min_by(d, limit, |profile| profile.top_k_sum(k))
}

/// Exhaustive DTW_q: exact minimum of the l_q traversal cost.
pub fn oracle_dtw_q(
    d: &DistanceMatrix,
    q: f64,
    limit: Option<usize>,
) -> Result<(f64, Traversal)> {
    if q < 1.0 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    oracle_min_by(d, limit, |profile| profile.lq_norm(q))
}

/// Exhaustive discrete Frechet: exact minimum of the max matched distance.
pub fn oracle_frechet(d: &DistanceMatrix, limit: Option<usize>) -> Result<(f64, Traversal)> {
    oracle_min_by(d, limit, |profile| profile.max())
}

fn oracle_min_by(
    d: &DistanceMatrix,
    limit: Option<usize>,
    cost: impl Fn(&TopKProfile) -> f64,
) -> Result<(f64, Traversal)> {
    let mut best: Option<(f64, Traversal)> = None;
    for t in enumerate_traversals(d.rows(), d.cols(), limit)? {
        let profile = TopKProfile::from_matched(t.pairs().iter().map(|&(i, j)| d.get(i - 1, j - 1)));
        let c = cost(&profile);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, t));
        }
    }
    Ok(best.expect("grid has at least one traversal"))
}
