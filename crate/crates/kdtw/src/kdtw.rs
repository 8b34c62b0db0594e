//! Exact and approximate k-DTW via parametric search over the k-th largest
//! matched distance.
//!
//! The exact algorithm guesses a threshold `e` among the distinct entries of
//! the distance matrix (plus zero), clamps the matrix at the threshold,
//! computes plain DTW on `max(D - e, 0)` and corrects with `+ k*e`; the
//! minimum over all guesses is the exact k-DTW distance. Two value-neutral
//! heuristics prune guesses: an early exit once `k*e` reaches the incumbent
//! (H1) and a feasibility binary search discarding thresholds under which
//! every traversal has more than `k` entries above the threshold (H2).

use crate::error::{Error, Result};
use crate::geometry::{DistanceMatrix, Curve};
use crate::measures::{discrete_frechet, dtw_backtrack_transformed, dtw_sum_transformed};
use crate::traversal::Traversal;

/// Which of the two pruning heuristics to apply. Both are value-neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Heuristics {
    /// Early exit once the per-iteration lower bound `k * e` reaches mincost.
    pub h1: bool,
    /// Binary search discarding thresholds that admit no traversal with at
    /// most `k` entries above the threshold.
    pub h2: bool,
}

impl Heuristics {
    pub const NONE: Heuristics = Heuristics { h1: false, h2: false };
    pub const ALL: Heuristics = Heuristics { h1: true, h2: true };

    pub fn h1_only() -> Heuristics {
        Heuristics { h1: true, h2: false }
    }

    pub fn h2_only() -> Heuristics {
        Heuristics { h1: false, h2: true }
    }
}

/// Result of a k-DTW computation with instrumentation counters.
#[derive(Debug, Clone)]
pub struct KdtwResult {
    pub value: f64,
    pub traversal: Option<Traversal>,
    /// Candidate thresholds actually evaluated in the main loop.
    pub iterations_executed: usize,
    /// DTW invocations in the main loop (excludes feasibility probes).
    pub dtw_calls: usize,
    /// Feasibility DTW probes spent by the H2 binary search.
    pub feasibility_checks: usize,
    /// Full candidate count (distinct thresholds including zero).
    pub z_plus_one: usize,
    /// Threshold of the winning iteration.
    pub winning_threshold: f64,
}

impl KdtwResult {
    /// Fraction of candidate DTW evaluations pruned by the heuristics.
    pub fn saved_fraction(&self) -> f64 {
        if self.z_plus_one == 0 {
            0.0
        } else {
            1.0 - self.dtw_calls as f64 / self.z_plus_one as f64
        }
    }
}

/// Parameters derived for the (1+epsilon) approximation.
#[derive(Debug, Clone, Copy)]
pub struct ApproxParams {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub d_min: f64,
    pub d_max: f64,
}

impl ApproxParams {
    fn derive(epsilon: f64, k: usize, frechet: f64) -> ApproxParams {
        let epsilon_prime = epsilon / 2.0;
        ApproxParams {
            epsilon,
            epsilon_prime,
            d_min: epsilon_prime * frechet / k as f64,
            d_max: frechet,
        }
    }
}

/// Distinct entries of `d` in ascending order, with 0 ensured present.
fn ascending_candidates(d: &DistanceMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = d.entries().to_vec();
    values.sort_unstable_by(f64::total_cmp);
    values.dedup();
    if values.first() != Some(&0.0) {
        values.insert(0, 0.0);
    }
    values
}

/// Minimum over traversals of the number of matched entries exceeding `e`,
/// computed as DTW over the 0/1 indicator matrix.
fn min_count_above(d: &DistanceMatrix, e: f64) -> f64 {
    dtw_sum_transformed(d, |x| if x > e { 1.0 } else { 0.0 }).0
}

/// The parametric main loop shared by the exact and approximate variants.
/// `candidates` must be ascending and start at 0.
fn parametric_loop(
    d: &DistanceMatrix,
    k: usize,
    candidates: &[f64],
    heuristics: Heuristics,
    backtrack: bool,
) -> KdtwResult {
    let z_plus_one = candidates.len();
    let mut feasibility_checks = 0usize;

    // H2: discard leading (small) thresholds under which every traversal has
    // more than k entries above the threshold. Feasibility is monotone in the
    // threshold, so the first feasible candidate is found by binary search.
    let start = if heuristics.h2 {
        let mut lo = 0usize; // smallest index that might be feasible
        let mut hi = z_plus_one - 1; // the largest threshold is always feasible
        while lo < hi {
            let mid = (lo + hi) / 2;
            feasibility_checks += 1;
            if min_count_above(d, candidates[mid]) <= k as f64 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    } else {
        0
    };

    let mut mincost = f64::INFINITY;
    let mut winning_threshold = 0.0;
    let mut iterations = 0usize;
    let mut dtw_calls = 0usize;

    for &e in &candidates[start..] {
        if heuristics.h1 && k as f64 * e >= mincost {
            break;
        }
        iterations += 1;
        dtw_calls += 1;
        let (clamped_sum, _) = dtw_sum_transformed(d, |x| (x - e).max(0.0));
        let cost = clamped_sum + k as f64 * e;
        if cost < mincost {
            mincost = cost;
            winning_threshold = e;
        }
    }

    let traversal = backtrack.then(|| {
        let e = winning_threshold;
        dtw_backtrack_transformed(d, |x| (x - e).max(0.0)).1
    });

    KdtwResult {
        value: mincost,
        traversal,
        iterations_executed: iterations,
        dtw_calls,
        feasibility_checks,
        z_plus_one,
        winning_threshold,
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    Ok(())
}

/// Exact k-DTW distance of a distance matrix.
///
/// The returned value is the true k-DTW distance for every heuristic subset;
/// the backtracked traversal of the winning iteration realizes it.
pub fn kdtw_exact(
    d: &DistanceMatrix,
    k: usize,
    heuristics: Heuristics,
    backtrack: bool,
) -> Result<KdtwResult> {
    check_k(k)?;
    let candidates = ascending_candidates(d);
    Ok(parametric_loop(d, k, &candidates, heuristics, backtrack))
}

/// (1+epsilon)-approximate k-DTW for `0 < epsilon <= 1`.
///
/// Nonzero entries below the discrete Frechet distance are rounded up onto a
/// geometric grid (capped at the Frechet value), and thresholds above the
/// Frechet value are omitted, shrinking the candidate count to
/// O(log(k/epsilon)/epsilon).
pub fn kdtw_approx(
    d: &DistanceMatrix,
    k: usize,
    epsilon: f64,
    backtrack: bool,
) -> Result<KdtwResult> {
    check_k(k)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1], got {epsilon}"
        )));
    }
    let frechet = discrete_frechet(d, backtrack)?;
    if frechet.value == 0.0 {
        // k-DTW is sandwiched between the Frechet distance and k times it.
        return Ok(KdtwResult {
            value: 0.0,
            traversal: frechet.traversal,
            iterations_executed: 0,
            dtw_calls: 0,
            feasibility_checks: 0,
            z_plus_one: 0,
            winning_threshold: 0.0,
        });
    }
    let params = ApproxParams::derive(epsilon, k, frechet.value);

    // Rounding grid (1+e')^i * d_min for i = 0..=ceil(log_{1+e'}(k/e')); the
    // last grid value reaches d_max. Values are capped at d_max so that the
    // k-th largest rounded entry of any traversal stays an admissible
    // candidate.
    let ratio = 1.0 + params.epsilon_prime;
    let i_max = (k as f64 / params.epsilon_prime).log(ratio).ceil() as usize;
    let mut grid = Vec::with_capacity(i_max + 1);
    let mut g = params.d_min;
    for _ in 0..=i_max {
        grid.push(g.min(params.d_max));
        g *= ratio;
    }
    let round_up = |x: f64| -> f64 {
        if x <= 0.0 || x >= params.d_max {
            return x;
        }
        let idx = grid.partition_point(|&g| g < x);
        grid[idx.min(grid.len() - 1)]
    };

    let rounded = d.map(round_up).expect("rounding preserves validity");
    let mut candidates: Vec<f64> = ascending_candidates(&rounded);
    candidates.retain(|&e| e <= params.d_max);

    // A traversal backtracked on the rounded matrix is a valid traversal of
    // the original instance; the reported value keeps the rounded optimum,
    // which carries the (1+epsilon) guarantee.
    Ok(parametric_loop(&rounded, k, &candidates, Heuristics::ALL, backtrack))
}

/// How to evaluate the k-DTW distance of a curve pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KdtwMode {
    Exact,
    Approx { epsilon: f64 },
}

/// Convenience composition: distance matrix plus exact or approximate k-DTW.
pub fn kdtw(a: &Curve, b: &Curve, k: usize, mode: KdtwMode) -> Result<KdtwResult> {
    let d = DistanceMatrix::from_curves(a, b)?;
    match mode {
        KdtwMode::Exact => kdtw_exact(&d, k, Heuristics::ALL, false),
        KdtwMode::Approx { epsilon } => kdtw_approx(&d, k, epsilon, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance_matrix;
    use crate::measures::dtw_q;
    use crate::traversal::{oracle_kdtw, topk_cost};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DistanceMatrix {
        DistanceMatrix::new(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.gen_range(0.0..10.0)).collect(),
        )
        .unwrap()
    }

    fn triangle() -> (Curve, Curve, Curve) {
        let eps = 0.2;
        let sigma = Curve::from_values(&[0.0; 5]).unwrap();
        let tau = Curve::from_values(&[0.0, eps, eps, eps, 0.0]).unwrap();
        let upsilon = Curve::from_values(&[0.0, eps, 0.0, 0.0, 0.0]).unwrap();
        (sigma, tau, upsilon)
    }

    #[test]
    fn rejects_k_zero() {
        let d = DistanceMatrix::new(1, 1, vec![0.0]).unwrap();
        assert!(kdtw_exact(&d, 0, Heuristics::ALL, false).is_err());
        assert!(kdtw_approx(&d, 0, 0.5, false).is_err());
    }

    #[test]
    fn rejects_bad_epsilon() {
        let d = DistanceMatrix::new(1, 1, vec![0.0]).unwrap();
        for eps in [0.0, -0.5, 1.5] {
            assert!(kdtw_approx(&d, 1, eps, false).is_err());
        }
    }

    #[test]
    fn triangle_fixture_values() {
        let (sigma, tau, upsilon) = triangle();
        let k = 2;
        let st = kdtw(&sigma, &tau, k, KdtwMode::Exact).unwrap().value;
        let su = kdtw(&sigma, &upsilon, k, KdtwMode::Exact).unwrap().value;
        let ut = kdtw(&upsilon, &tau, k, KdtwMode::Exact).unwrap().value;
        assert!((st - 0.4).abs() < 1e-12);
        assert!((su - 0.2).abs() < 1e-12);
        assert!(ut.abs() < 1e-12);
    }

    #[test]
    fn k1_equals_frechet() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..20 {
            let d = random_matrix(&mut rng, 5, 4);
            let f = discrete_frechet(&d, false).unwrap().value;
            let k1 = kdtw_exact(&d, 1, Heuristics::ALL, false).unwrap().value;
            assert!((f - k1).abs() <= 1e-9);
        }
    }

    #[test]
    fn large_k_equals_dtw() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..20 {
            let rows = rng.gen_range(2..=6);
            let cols = rng.gen_range(2..=6);
            let d = random_matrix(&mut rng, rows, cols);
            let dtw = dtw_q(&d, 1.0, false).unwrap().value;
            let k = rows + cols - 1;
            let kd = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
            assert!((dtw - kd).abs() <= 1e-9);
        }
    }

    #[test]
    fn matches_oracle_on_random_5x5() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let d = random_matrix(&mut rng, 5, 5);
            for k in 1..=9 {
                let got = kdtw_exact(&d, k, Heuristics::ALL, true).unwrap();
                let (oracle, _) = oracle_kdtw(&d, k, None).unwrap();
                assert!(
                    (got.value - oracle).abs() <= 1e-9,
                    "k={k}: {} vs {}",
                    got.value,
                    oracle
                );
                let t = got.traversal.unwrap();
                assert!((topk_cost(&t, &d, k).unwrap() - got.value).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn heuristics_are_value_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..20 {
            let d = random_matrix(&mut rng, 6, 5);
            for k in [1, 3, 7] {
                let base = kdtw_exact(&d, k, Heuristics::NONE, true).unwrap();
                for h in [Heuristics::h1_only(), Heuristics::h2_only(), Heuristics::ALL] {
                    let pruned = kdtw_exact(&d, k, h, true).unwrap();
                    assert_eq!(base.value.to_bits(), pruned.value.to_bits());
                    assert_eq!(
                        base.winning_threshold.to_bits(),
                        pruned.winning_threshold.to_bits()
                    );
                    assert_eq!(
                        base.traversal.as_ref().unwrap().pairs(),
                        pruned.traversal.as_ref().unwrap().pairs()
                    );
                    assert!(pruned.dtw_calls <= base.dtw_calls);
                }
            }
        }
    }

    #[test]
    fn dtw_calls_bounded_by_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let d = random_matrix(&mut rng, 6, 6);
        for h in [Heuristics::NONE, Heuristics::ALL] {
            let res = kdtw_exact(&d, 3, h, false).unwrap();
            assert!(res.dtw_calls <= res.z_plus_one);
            assert_eq!(res.dtw_calls, res.iterations_executed);
        }
    }

    #[test]
    fn monotone_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for _ in 0..10 {
            let d = random_matrix(&mut rng, 5, 6);
            let mut prev = 0.0;
            for k in 1..=10 {
                let v = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
                assert!(v + 1e-12 >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn frechet_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        for _ in 0..20 {
            let d = random_matrix(&mut rng, 5, 5);
            let f = discrete_frechet(&d, false).unwrap().value;
            for k in [1, 2, 5] {
                let v = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
                assert!(f <= v + 1e-9);
                assert!(v <= k as f64 * f + 1e-9);
            }
        }
    }

    #[test]
    fn per_iteration_costs_lower_bounded_by_final_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..10 {
            let d = random_matrix(&mut rng, 5, 5);
            let k = 3;
            let final_value = kdtw_exact(&d, k, Heuristics::NONE, false).unwrap().value;
            for &e in &ascending_candidates(&d) {
                let cost = dtw_sum_transformed(&d, |x| (x - e).max(0.0)).0 + k as f64 * e;
                assert!(cost + 1e-9 >= final_value);
            }
        }
    }

    #[test]
    fn approx_identical_curves_shortcut() {
        let c = Curve::from_values(&[0.0, 5.0, 2.0]).unwrap();
        let d = distance_matrix(&c, &c).unwrap();
        let res = kdtw_approx(&d, 3, 0.5, false).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(res.z_plus_one, 0);
    }

    #[test]
    fn approx_within_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..20 {
            let d = random_matrix(&mut rng, 6, 6);
            let k = 3;
            let exact = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
            for eps in [0.1, 0.5, 1.0] {
                let approx = kdtw_approx(&d, k, eps, false).unwrap().value;
                assert!(approx + 1e-9 >= exact, "eps={eps}: {approx} < {exact}");
                assert!(
                    approx <= (1.0 + eps) * exact + 1e-9,
                    "eps={eps}: {approx} > (1+eps)*{exact}"
                );
            }
        }
    }

    #[test]
    fn approx_triangle_bound() {
        let (sigma, tau, _) = triangle();
        let d = distance_matrix(&sigma, &tau).unwrap();
        let v = kdtw_approx(&d, 2, 1.0, false).unwrap().value;
        assert!((0.4..=0.8 + 1e-12).contains(&v));
    }

    #[test]
    fn approx_candidate_count_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..10 {
            let d = random_matrix(&mut rng, 7, 7);
            for k in [1, 4, 9] {
                for eps in [0.1, 0.5, 1.0] {
                    let res = kdtw_approx(&d, k, eps, false).unwrap();
                    let ep = eps / 2.0;
                    let bound = (k as f64 / ep).log(1.0 + ep).ceil() as usize + 2;
                    assert!(
                        res.z_plus_one <= bound,
                        "k={k} eps={eps}: {} > {bound}",
                        res.z_plus_one
                    );
                }
            }
        }
    }

    #[test]
    fn approx_backtracked_traversal_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let d = random_matrix(&mut rng, 6, 5);
        let res = kdtw_approx(&d, 3, 0.5, true).unwrap();
        let t = res.traversal.unwrap();
        assert!(t.validate(6, 5));
        // The traversal's true top-k cost is bracketed by the exact value and
        // the reported (rounded) value.
        let exact = kdtw_exact(&d, 3, Heuristics::ALL, false).unwrap().value;
        let cost = topk_cost(&t, &d, 3).unwrap();
        assert!(cost + 1e-9 >= exact);
        assert!(cost <= res.value + 1e-9);
    }

    #[test]
    fn symmetry_under_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        for _ in 0..10 {
            let d = random_matrix(&mut rng, 4, 6);
            let dt = d.transpose();
            for k in [1, 2, 4] {
                let ab = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
                let ba = kdtw_exact(&dt, k, Heuristics::ALL, false).unwrap().value;
                assert!((ab - ba).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn relaxed_triangle_inequality_tight_on_fixture() {
        let (sigma, tau, upsilon) = triangle();
        for k in 1..=3 {
            let st = kdtw(&sigma, &tau, k, KdtwMode::Exact).unwrap().value;
            let su = kdtw(&sigma, &upsilon, k, KdtwMode::Exact).unwrap().value;
            let ut = kdtw(&upsilon, &tau, k, KdtwMode::Exact).unwrap().value;
            assert!((st - k as f64 * (su + ut)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_padding_when_k_exceeds_traversal_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        let d = random_matrix(&mut rng, 3, 3);
        let dtw = dtw_q(&d, 1.0, false).unwrap().value;
        for k in [5, 8, 20] {
            let v = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
            assert!((v - dtw).abs() <= 1e-9);
        }
    }
}
