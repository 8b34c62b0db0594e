//! Dynamic-programming kernels for the classical curve measures: DTW_q,
//! discrete Frechet, weak discrete Frechet, ERP, windowed DTW and segmented
//! DTW. All kernels run in O(m'm'') over a precomputed distance matrix.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{euclidean, Curve, DistanceMatrix, Point};
use crate::traversal::Traversal;

/// Value of a measure, an optional realizing traversal, and the number of DP
/// cells the kernel evaluated.
#[derive(Debug, Clone)]
pub struct DistanceResult {
    pub value: f64,
    pub traversal: Option<Traversal>,
    pub dp_cells_evaluated: u64,
}

impl DistanceResult {
    fn value_only(value: f64, dp_cells_evaluated: u64) -> Self {
        DistanceResult {
            value,
            traversal: None,
            dp_cells_evaluated,
        }
    }
}

// Predecessor preference on ties: diagonal, then vertical (i-1,j), then
// horizontal (i,j-1). Fixing this makes every backtracked traversal
// deterministic.
const PRED_DIAG: u8 = 0;
const PRED_VERT: u8 = 1;
const PRED_HORIZ: u8 = 2;
const PRED_NONE: u8 = 3;

#[inline]
fn pick_predecessor(diag: f64, vert: f64, horiz: f64) -> (f64, u8) {
    let mut best = diag;
    let mut pred = PRED_DIAG;
    if vert < best {
        best = vert;
        pred = PRED_VERT;
    }
    if horiz < best {
        best = horiz;
        pred = PRED_HORIZ;
    }
    if best.is_infinite() {
        pred = PRED_NONE;
    }
    (best, pred)
}

fn backtrack(preds: &[u8], rows: usize, cols: usize) -> Traversal {
    let mut pairs = Vec::with_capacity(rows + cols);
    let (mut i, mut j) = (rows - 1, cols - 1);
    loop {
        pairs.push((i + 1, j + 1));
        if i == 0 && j == 0 {
            break;
        }
        match preds[i * cols + j] {
            PRED_DIAG => {
                i -= 1;
                j -= 1;
            }
            PRED_VERT => i -= 1,
            PRED_HORIZ => j -= 1,
            _ => unreachable!("backtracking entered an unreachable cell"),
        }
    }
    pairs.reverse();
    Traversal::new(pairs)
}

/// Min-sum DP over `cost(i, j)` restricted to cells where `mask(i, j)` holds
/// (0-based). Returns the raw accumulated sum, a traversal when requested, and
/// the cell count. The sum is infinite when no in-mask traversal exists.
pub(crate) fn min_sum_dp(
    rows: usize,
    cols: usize,
    cost: impl Fn(usize, usize) -> f64,
    mask: impl Fn(usize, usize) -> bool,
    want_traversal: bool,
) -> (f64, Option<Traversal>, u64) {
    let mut cells = 0u64;
    if want_traversal {
        let mut table = vec![f64::INFINITY; rows * cols];
        let mut preds = vec![PRED_NONE; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                if !mask(i, j) {
                    continue;
                }
                cells += 1;
                let (reach, pred) = if i == 0 && j == 0 {
                    (0.0, PRED_NONE)
                } else {
                    let diag = if i > 0 && j > 0 {
                        table[(i - 1) * cols + (j - 1)]
                    } else {
                        f64::INFINITY
                    };
                    let vert = if i > 0 { table[(i - 1) * cols + j] } else { f64::INFINITY };
                    let horiz = if j > 0 { table[i * cols + (j - 1)] } else { f64::INFINITY };
                    pick_predecessor(diag, vert, horiz)
                };
                if reach.is_finite() || (i == 0 && j == 0) {
                    table[i * cols + j] = reach + cost(i, j);
                    preds[i * cols + j] = pred;
                }
            }
        }
        let value = table[rows * cols - 1];
        let traversal = value.is_finite().then(|| backtrack(&preds, rows, cols));
        (value, traversal, cells)
    } else {
        let mut prev = vec![f64::INFINITY; cols];
        let mut curr = vec![f64::INFINITY; cols];
        for i in 0..rows {
            for j in 0..cols {
                curr[j] = f64::INFINITY;
                if !mask(i, j) {
                    continue;
                }
                cells += 1;
                let reach = if i == 0 && j == 0 {
                    0.0
                } else {
                    let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                    let vert = if i > 0 { prev[j] } else { f64::INFINITY };
                    let horiz = if j > 0 { curr[j - 1] } else { f64::INFINITY };
                    diag.min(vert).min(horiz)
                };
                if reach.is_finite() {
                    curr[j] = reach + cost(i, j);
                }
            }
            std::mem::swap(&mut prev, &mut curr);
        }
        (prev[cols - 1], None, cells)
    }
}

/// DTW value of `d` with every entry passed through `f`; value-only fast path
/// used by the parametric k-DTW loop.
pub(crate) fn dtw_sum_transformed(d: &DistanceMatrix, f: impl Fn(f64) -> f64) -> (f64, u64) {
    let cols = d.cols();
    let mut prev = vec![f64::INFINITY; cols];
    let mut curr = vec![f64::INFINITY; cols];
    let mut cells = 0u64;
    for i in 0..d.rows() {
        let row = d.row(i);
        for j in 0..cols {
            let reach = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                let vert = if i > 0 { prev[j] } else { f64::INFINITY };
                let horiz = if j > 0 { curr[j - 1] } else { f64::INFINITY };
                diag.min(vert).min(horiz)
            };
            curr[j] = reach + f(row[j]);
            cells += 1;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    (prev[cols - 1], cells)
}

/// DTW with transformed entries, also recovering one optimal traversal.
pub(crate) fn dtw_backtrack_transformed(
    d: &DistanceMatrix,
    f: impl Fn(f64) -> f64,
) -> (f64, Traversal, u64) {
    let (value, traversal, cells) =
        min_sum_dp(d.rows(), d.cols(), |i, j| f(d.get(i, j)), |_, _| true, true);
    (value, traversal.expect("unmasked grid always reachable"), cells)
}

/// DTW_q: minimum over traversals of the l_q norm of matched distances.
pub fn dtw_q(d: &DistanceMatrix, q: f64, backtrack: bool) -> Result<DistanceResult> {
    if q < 1.0 {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    let cost: Box<dyn Fn(usize, usize) -> f64> = if q == 1.0 {
        Box::new(|i, j| d.get(i, j))
    } else {
        Box::new(move |i, j| d.get(i, j).powf(q))
    };
    let (raw, traversal, cells) = min_sum_dp(d.rows(), d.cols(), cost, |_, _| true, backtrack);
    let value = if q == 1.0 { raw } else { raw.powf(1.0 / q) };
    Ok(DistanceResult {
        value,
        traversal,
        dp_cells_evaluated: cells,
    })
}

/// Discrete Frechet distance: min over traversals of the max matched distance.
pub fn discrete_frechet(d: &DistanceMatrix, backtrack: bool) -> Result<DistanceResult> {
    let (rows, cols) = (d.rows(), d.cols());
    let mut table = vec![f64::INFINITY; rows * cols];
    let mut preds = vec![PRED_NONE; rows * cols];
    let mut cells = 0u64;
    for i in 0..rows {
        let row = d.row(i);
        for j in 0..cols {
            cells += 1;
            let (reach, pred) = if i == 0 && j == 0 {
                (0.0, PRED_NONE)
            } else {
                let diag = if i > 0 && j > 0 {
                    table[(i - 1) * cols + (j - 1)]
                } else {
                    f64::INFINITY
                };
                let vert = if i > 0 { table[(i - 1) * cols + j] } else { f64::INFINITY };
                let horiz = if j > 0 { table[i * cols + (j - 1)] } else { f64::INFINITY };
                pick_predecessor(diag, vert, horiz)
            };
            table[i * cols + j] = reach.max(row[j]);
            preds[i * cols + j] = pred;
        }
    }
    Ok(DistanceResult {
        value: table[rows * cols - 1],
        traversal: backtrack.then(|| self::backtrack(&preds, rows, cols)),
        dp_cells_evaluated: cells,
    })
}

#[derive(PartialEq)]
struct HeapEntry {
    bottleneck: f64,
    cell: (usize, usize),
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on bottleneck, ties by grid position.
        other
            .bottleneck
            .total_cmp(&self.bottleneck)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Weak discrete Frechet distance: the bottleneck-path value from cell (1,1)
/// to (m',m'') in the grid graph whose node weight is `D[i,j]`, with edges to
/// all existing neighbors in the 8-neighborhood. Monotonicity is not required,
/// so no realizing traversal is reported.
pub fn weak_discrete_frechet(d: &DistanceMatrix) -> Result<DistanceResult> {
    let (rows, cols) = (d.rows(), d.cols());
    let mut best = vec![f64::INFINITY; rows * cols];
    let mut heap = BinaryHeap::new();
    let mut cells = 0u64;
    best[0] = d.get(0, 0);
    heap.push(HeapEntry {
        bottleneck: best[0],
        cell: (0, 0),
    });
    while let Some(HeapEntry { bottleneck, cell: (i, j) }) = heap.pop() {
        if bottleneck > best[i * cols + j] {
            continue;
        }
        cells += 1;
        if (i, j) == (rows - 1, cols - 1) {
            return Ok(DistanceResult::value_only(bottleneck, cells));
        }
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= rows as i64 || nj >= cols as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let cand = bottleneck.max(d.get(ni, nj));
                if cand < best[ni * cols + nj] {
                    best[ni * cols + nj] = cand;
                    heap.push(HeapEntry {
                        bottleneck: cand,
                        cell: (ni, nj),
                    });
                }
            }
        }
    }
    unreachable!("target cell is always reachable in a connected grid")
}

/// Edit distance with real penalty: insertions and deletions are charged
/// against a fixed gap point.
pub fn erp(a: &Curve, b: &Curve, gap: &Point) -> Result<DistanceResult> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    if gap.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: gap.dim(),
        });
    }
    let (m, n) = (a.len(), b.len());
    let gap_a: Vec<f64> = a
        .vertices()
        .iter()
        .map(|p| euclidean(p, gap).expect("dims checked"))
        .collect();
    let gap_b: Vec<f64> = b
        .vertices()
        .iter()
        .map(|p| euclidean(p, gap).expect("dims checked"))
        .collect();

    let mut prev: Vec<f64> = Vec::with_capacity(n + 1);
    prev.push(0.0);
    for j in 0..n {
        prev.push(prev[j] + gap_b[j]);
    }
    let mut curr = vec![0.0; n + 1];
    let mut cells = 0u64;
    for i in 0..m {
        curr[0] = prev[0] + gap_a[i];
        for j in 0..n {
            let matched = prev[j] + euclidean(a.vertex(i), b.vertex(j)).expect("dims checked");
            let delete = prev[j + 1] + gap_a[i];
            let insert = curr[j] + gap_b[j];
            curr[j + 1] = matched.min(delete).min(insert);
            cells += 1;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(DistanceResult::value_only(prev[n], cells))
}

/// Band predicate for windowed DTW (1-based `i`, `j`): the slope-normalized
/// Sakoe-Chiba band `|i * (cols/rows) - j| <= w`, which always contains the
/// diagonal corners once wide enough.
pub fn in_window_band(i: usize, j: usize, rows: usize, cols: usize, w: usize) -> bool {
    if w >= rows + cols {
        return true;
    }
    let slope = cols as f64 / rows as f64;
    (i as f64 * slope - j as f64).abs() <= w as f64
}

/// Smallest `w' >= w` whose band admits at least one traversal. The band is
/// widened one unit at a time; `w' = rows + cols` is always sufficient.
pub fn effective_window(rows: usize, cols: usize, w: usize) -> usize {
    let mut w = w.max(1);
    loop {
        if w >= rows + cols {
            return w;
        }
        // Boolean reachability over in-band cells.
        let mut prev = vec![false; cols];
        let mut curr = vec![false; cols];
        for i in 0..rows {
            for j in 0..cols {
                curr[j] = in_window_band(i + 1, j + 1, rows, cols, w)
                    && if i == 0 && j == 0 {
                        true
                    } else {
                        (i > 0 && j > 0 && prev[j - 1]) || (i > 0 && prev[j]) || (j > 0 && curr[j - 1])
                    };
            }
            std::mem::swap(&mut prev, &mut curr);
        }
        if prev[cols - 1] {
            return w;
        }
        w += 1;
    }
}

/// DTW restricted to a slope-normalized band of width `w` around the diagonal.
pub fn window_dtw(d: &DistanceMatrix, w: usize) -> Result<DistanceResult> {
    if w == 0 {
        return Err(Error::InvalidParameter("window width must be >= 1".into()));
    }
    let (rows, cols) = (d.rows(), d.cols());
    let w_eff = effective_window(rows, cols, w);
    let (value, _, cells) = min_sum_dp(
        rows,
        cols,
        |i, j| d.get(i, j),
        |i, j| in_window_band(i + 1, j + 1, rows, cols, w_eff),
        false,
    );
    debug_assert!(value.is_finite());
    Ok(DistanceResult::value_only(value, cells))
}

/// Index ranges (0-based, half-open) splitting `1..=m` into `blocks` contiguous
/// blocks, block `b` covering `floor((b-1)m/blocks)+1 ..= floor(b*m/blocks)`.
fn segment_ranges(m: usize, blocks: usize) -> Vec<std::ops::Range<usize>> {
    (1..=blocks)
        .map(|b| ((b - 1) * m / blocks)..(b * m / blocks))
        .collect()
}

/// Segmented DTW: both index ranges are split into `min(segments, m', m'')`
/// contiguous blocks and each block pair is matched independently by DTW.
pub fn segment_dtw(d: &DistanceMatrix, segments: usize) -> Result<DistanceResult> {
    if segments == 0 {
        return Err(Error::InvalidParameter("segment count must be >= 1".into()));
    }
    let (rows, cols) = (d.rows(), d.cols());
    let blocks = segments.min(rows).min(cols);
    let row_ranges = segment_ranges(rows, blocks);
    let col_ranges = segment_ranges(cols, blocks);
    let mut value = 0.0;
    let mut cells = 0u64;
    for (rr, cr) in row_ranges.into_iter().zip(col_ranges) {
        let (block_value, _, block_cells) = min_sum_dp(
            rr.len(),
            cr.len(),
            |i, j| d.get(rr.start + i, cr.start + j),
            |_, _| true,
            false,
        );
        value += block_value;
        cells += block_cells;
    }
    Ok(DistanceResult::value_only(value, cells))
}
