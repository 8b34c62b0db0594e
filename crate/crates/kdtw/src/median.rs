//! Top-k geometric median of a vertex set and the empirical breakdown-point
//! experiment for the curve-of-top-k-median estimator.
//!
//! The objective `f(s) = sum of the k largest ||p_i - s||` is convex (a sum of
//! the k largest among convex functions). It is minimized by subgradient
//! descent with iterate averaging, followed by restarted descent epochs with
//! geometrically shrinking step scales that polish the best iterate to far
//! below the verification tolerances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{euclidean_unchecked, Point};

/// Result of a top-k median solve.
#[derive(Debug, Clone)]
pub struct TopKMedianResult {
    /// The common vertex of the curve-of-top-k-median.
    pub center: Point,
    /// Sum of the k largest distances from the input points to the center.
    pub objective: f64,
    /// Indices attaining the top-k distances at the optimum, ties by index.
    pub active_set: Vec<usize>,
    /// Total subgradient steps spent across all phases.
    pub iterations: usize,
}

const MAX_STEPS: usize = 200_000;
const STALL_WINDOW: usize = 100;
const RELATIVE_IMPROVEMENT: f64 = 1e-9;
const POLISH_EPOCHS: usize = 48;
const POLISH_STEPS: usize = 600;

struct Objective<'a> {
    points: &'a [Point],
    k: usize,
    dim: usize,
}

impl<'a> Objective<'a> {
    /// Distances sorted descending with index tie-break; returns (objective,
    /// active indices).
    fn eval(&self, s: &[f64]) -> (f64, Vec<usize>) {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (euclidean_unchecked(p.coords(), s), i))
            .collect();
        dist.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let active: Vec<usize> = dist.iter().take(self.k).map(|&(_, i)| i).collect();
        let value = dist.iter().take(self.k).map(|&(d, _)| d).sum();
        (value, active)
    }

    /// Subgradient at `s`: sum over the active set of the unit vectors from
    /// each active point toward `s`; points coinciding with `s` contribute 0.
    fn subgradient(&self, s: &[f64], active: &[usize]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for &i in active {
            let p = self.points[i].coords();
            let norm = euclidean_unchecked(p, s);
            if norm > 0.0 {
                for (gc, (sc, pc)) in g.iter_mut().zip(s.iter().zip(p)) {
                    *gc += (sc - pc) / norm;
                }
            }
        }
        g
    }
}

struct Tracker {
    best_value: f64,
    best_point: Vec<f64>,
    best_active: Vec<usize>,
}

impl Tracker {
    fn observe(&mut self, value: f64, point: &[f64], active: &[usize]) -> bool {
        if value < self.best_value {
            self.best_value = value;
            self.best_point.copy_from_slice(point);
            self.best_active = active.to_vec();
            true
        } else {
            false
        }
    }
}

/// One diminishing-step subgradient run from `start`, evaluating both the raw
/// iterate and the running average, tracking the best point seen. With a
/// stall window, the run stops once the best objective improves by less than
/// `RELATIVE_IMPROVEMENT` (relative) over `window` consecutive steps.
fn subgradient_run(
    obj: &Objective,
    start: &[f64],
    scale: f64,
    max_steps: usize,
    stall_window: Option<usize>,
    tracker: &mut Tracker,
) -> usize {
    let dim = start.len();
    let mut s = start.to_vec();
    let mut avg = start.to_vec();
    let mut avg_buf = vec![0.0; dim];
    let mut window_base = tracker.best_value;
    let mut window_len = 0usize;
    let mut steps = 0usize;

    for t in 1..=max_steps {
        steps = t;
        let (value, active) = obj.eval(&s);
        tracker.observe(value, &s, &active);
        let g = obj.subgradient(&s, &active);
        let step = scale / (t as f64).sqrt();
        for (sc, gc) in s.iter_mut().zip(&g) {
            *sc -= step * gc;
        }
        // Running average of iterates; often lands closer than the raw
        // iterate once the step size dominates the dynamics.
        let w = 1.0 / t as f64;
        for ((ac, sc), buf) in avg.iter_mut().zip(&s).zip(avg_buf.iter_mut()) {
            *ac += (sc - *ac) * w;
            *buf = *ac;
        }
        let (avg_value, avg_active) = obj.eval(&avg_buf);
        tracker.observe(avg_value, &avg_buf, &avg_active);

        if let Some(window) = stall_window {
            window_len += 1;
            if window_len >= window {
                let gain = window_base - tracker.best_value;
                if gain < RELATIVE_IMPROVEMENT * window_base.abs().max(f64::MIN_POSITIVE) {
                    break;
                }
                window_base = tracker.best_value;
                window_len = 0;
            }
        }
    }
    steps
}

/// Minimizes the sum of the `k` largest distances to `points`.
pub fn top_k_geometric_median(points: &[Point], k: usize) -> Result<TopKMedianResult> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("point set must be nonempty".into()));
    }
    let m = points.len();
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={m}, got {k}"
        )));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::InvalidParameter(
            "points must share one dimension".into(),
        ));
    }

    let obj = Objective { points, k, dim };

    // Start at the coordinate-wise mean; step scale is the point spread.
    let mut start = vec![0.0; dim];
    for p in points {
        for (sc, pc) in start.iter_mut().zip(p.coords()) {
            *sc += pc / m as f64;
        }
    }
    let spread = points
        .iter()
        .flat_map(|p| points.iter().map(|q| euclidean_unchecked(p.coords(), q.coords())))
        .fold(0.0, f64::max);

    let (start_value, start_active) = obj.eval(&start);
    let mut tracker = Tracker {
        best_value: start_value,
        best_point: start.clone(),
        best_active: start_active,
    };

    if spread == 0.0 {
        // All points coincide.
        return Ok(TopKMedianResult {
            center: Point::new(tracker.best_point)?,
            objective: tracker.best_value,
            active_set: tracker.best_active,
            iterations: 0,
        });
    }

    let mut iterations = subgradient_run(
        &obj,
        &start,
        spread,
        MAX_STEPS,
        Some(STALL_WINDOW),
        &mut tracker,
    );

    // Polish: restarted short runs with geometrically shrinking step scales.
    // Each epoch starts from the incumbent, so the best objective only
    // improves; the final scale is ~1e-14 of the spread.
    for epoch in 1..=POLISH_EPOCHS {
        let scale = spread / (1u64 << epoch.min(63)) as f64;
        if scale == 0.0 {
            break;
        }
        let from = tracker.best_point.clone();
        iterations += subgradient_run(&obj, &from, scale, POLISH_STEPS, None, &mut tracker);
    }

    Ok(TopKMedianResult {
        center: Point::new(tracker.best_point)?,
        objective: tracker.best_value,
        active_set: tracker.best_active,
        iterations,
    })
}

/// Seeded sample of `n` points from the unit ball in `R^dim`, the standard
/// instance for the breakdown experiment.
pub fn unit_ball_points(n: usize, dim: usize, seed: u64) -> Vec<Point> {
    use rand::Rng;
    let mut rng = crate::seeded::stream_rng(seed, 0);
    (0..n)
        .map(|_| loop {
            let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if coords.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
                return Point::new(coords).expect("finite coordinates");
            }
        })
        .collect()
}

/// Outcome of one corruption scenario.
#[derive(Debug, Clone, Serialize)]
pub struct BreakdownPart {
    pub corrupted: usize,
    pub magnitude: f64,
    /// Norm of the corrupted-estimate center relative to the clean center.
    pub center_shift: f64,
    /// The bound or threshold the shift is compared against.
    pub threshold: f64,
    pub passed: bool,
}

/// Report of the two-part breakdown experiment.
#[derive(Debug, Clone, Serialize)]
pub struct BreakdownReport {
    pub k: usize,
    /// `max_i ||p_i||` after centering at the clean estimate.
    pub point_norm_bound: f64,
    /// Corrupting `floor((k-1)/2)` points must leave the center bounded.
    pub bounded: BreakdownPart,
    /// Corrupting `floor((k+1)/2)` extreme points must move the center
    /// proportionally to the corruption magnitude.
    pub unbounded: Vec<BreakdownPart>,
}

impl BreakdownReport {
    pub fn passed(&self) -> bool {
        self.bounded.passed && self.unbounded.iter().all(|p| p.passed)
    }
}

fn corrupt(points: &[Point], indices: &[usize], shift: &[f64]) -> Vec<Point> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if indices.contains(&i) {
                p.translate(shift).expect("dims match")
            } else {
                p.clone()
            }
        })
        .collect()
}

/// Indices of the `count` points with largest first coordinate (the
/// corruption direction), ties by index.
fn extreme_indices(points: &[Point], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b].coords()[0]
            .total_cmp(&points[a].coords()[0])
            .then(a.cmp(&b))
    });
    order.truncate(count);
    order
}

/// Runs the breakdown experiment at the given corruption magnitude:
/// (a) `floor((k-1)/2)` corruptions leave the center within
///     `2M * floor((k+1)/2)` of the clean center, and
/// (b) `floor((k+1)/2)` corruptions of the extreme points along the corruption
///     direction move the center by at least `magnitude / (2k)`.
pub fn breakdown_experiment(
    points: &[Point],
    k: usize,
    magnitude: f64,
    unbounded_magnitudes: &[f64],
) -> Result<BreakdownReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("point set must be nonempty".into()));
    }
    let dim = points[0].dim();
    let clean = top_k_geometric_median(points, k)?;

    // Center the instance at the clean estimate; the estimator is translation
    // equivariant, so this loses no generality and makes norms comparable.
    let neg_center: Vec<f64> = clean.center.coords().iter().map(|c| -c).collect();
    let centered: Vec<Point> = points
        .iter()
        .map(|p| p.translate(&neg_center).expect("dims match"))
        .collect();
    let m_bound = centered
        .iter()
        .map(|p| euclidean_unchecked(p.coords(), &vec![0.0; dim]))
        .fold(0.0, f64::max);

    let mut direction = vec![0.0; dim];
    direction[0] = 1.0;

    // Part (a): fewer corruptions than the breakdown point.
    let l_bounded = (k - 1) / 2;
    let bounded = {
        let shift: Vec<f64> = direction.iter().map(|c| c * magnitude).collect();
        let indices = extreme_indices(&centered, l_bounded);
        let corrupted = corrupt(&centered, &indices, &shift);
        let est = top_k_geometric_median(&corrupted, k)?;
        let center_shift = euclidean_unchecked(est.center.coords(), &vec![0.0; dim]);
        let threshold = 2.0 * m_bound * (((k + 1) / 2) as f64);
        BreakdownPart {
            corrupted: l_bounded,
            magnitude,
            center_shift,
            threshold,
            passed: center_shift <= threshold,
        }
    };

    // Part (b): corruptions at the breakdown point drag the center away
    // proportionally to the magnitude.
    let l_unbounded = (k + 1) / 2;
    let indices = extreme_indices(&centered, l_unbounded);
    let unbounded = unbounded_magnitudes
        .iter()
        .map(|&mag| {
            let shift: Vec<f64> = direction.iter().map(|c| c * mag).collect();
            let corrupted = corrupt(&centered, &indices, &shift);
            let est = top_k_geometric_median(&corrupted, k)?;
            let center_shift = euclidean_unchecked(est.center.coords(), &vec![0.0; dim]);
            let threshold = mag / (2.0 * k as f64);
            Ok(BreakdownPart {
                corrupted: l_unbounded,
                magnitude: mag,
                center_shift,
                threshold,
                passed: center_shift >= threshold,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BreakdownReport {
        k,
        point_norm_bound: m_bound,
        bounded,
        unbounded,
    })
}
