//! Property tests for the measure invariants on randomly generated instances.

use proptest::prelude::*;

use kdtw::measures::{segment_dtw, window_dtw};
use kdtw::{
    discrete_frechet, distance_matrix, dtw_q, erp, kdtw_exact, weak_discrete_frechet, Curve,
    DistanceMatrix, Heuristics, Point,
};

fn small_matrix() -> impl Strategy<Value = DistanceMatrix> {
    (2usize..=6, 2usize..=6)
        .prop_flat_map(|(rows, cols)| {
            (
                Just(rows),
                Just(cols),
                proptest::collection::vec(0.0f64..10.0, rows * cols),
            )
        })
        .prop_map(|(rows, cols, data)| DistanceMatrix::new(rows, cols, data).unwrap())
}

fn small_curve(dim: usize) -> impl Strategy<Value = Curve> {
    proptest::collection::vec(
        proptest::collection::vec(-5.0f64..5.0, dim),
        1..=6,
    )
    .prop_map(|rows| {
        Curve::new(rows.into_iter().map(|c| Point::new(c).unwrap()).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euclidean_metric_axioms(
        a in proptest::collection::vec(-100.0f64..100.0, 3),
        b in proptest::collection::vec(-100.0f64..100.0, 3),
        c in proptest::collection::vec(-100.0f64..100.0, 3),
    ) {
        let pa = Point::new(a).unwrap();
        let pb = Point::new(b).unwrap();
        let pc = Point::new(c).unwrap();
        let d = |p: &Point, q: &Point| kdtw::euclidean(p, q).unwrap();
        let scale = d(&pa, &pb).max(d(&pb, &pc)).max(d(&pa, &pc)).max(1.0);
        prop_assert!((d(&pa, &pb) - d(&pb, &pa)).abs() <= 1e-12 * scale);
        prop_assert_eq!(d(&pa, &pa), 0.0);
        prop_assert!(d(&pa, &pc) <= d(&pa, &pb) + d(&pb, &pc) + 1e-12 * scale);
    }

    #[test]
    fn distance_matrix_transpose_symmetry(a in small_curve(2), b in small_curve(2)) {
        let ab = distance_matrix(&a, &b).unwrap();
        let ba = distance_matrix(&b, &a).unwrap();
        prop_assert_eq!(ab.transpose(), ba);
    }

    #[test]
    fn measures_symmetric_and_ordered(d in small_matrix()) {
        let dt = d.transpose();
        let frechet = discrete_frechet(&d, false).unwrap().value;
        let weak = weak_discrete_frechet(&d).unwrap().value;
        // Symmetry under swapping the curves.
        prop_assert!((frechet - discrete_frechet(&dt, false).unwrap().value).abs() <= 1e-12);
        prop_assert!((weak - weak_discrete_frechet(&dt).unwrap().value).abs() <= 1e-12);
        prop_assert!(
            (dtw_q(&d, 1.0, false).unwrap().value - dtw_q(&dt, 1.0, false).unwrap().value).abs()
                <= 1e-9
        );
        // Weak Frechet is dominated by strong Frechet and dominates the
        // corner entries every path must take.
        prop_assert!(weak <= frechet + 1e-12);
        prop_assert!(weak + 1e-12 >= d.get(0, 0).max(d.get(d.rows() - 1, d.cols() - 1)));
    }

    #[test]
    fn restricted_traversal_sets_dominate(d in small_matrix(), w in 1usize..4, l in 1usize..5) {
        let plain = dtw_q(&d, 1.0, false).unwrap().value;
        prop_assert!(plain <= window_dtw(&d, w).unwrap().value + 1e-9);
        prop_assert!(plain <= segment_dtw(&d, l).unwrap().value + 1e-9);
    }

    #[test]
    fn scale_equivariance(d in small_matrix(), scale in 0.001f64..100.0) {
        let scaled = d.map(|x| x * scale).unwrap();
        let tol = 1e-9 * scale.max(1.0);
        prop_assert!(
            (dtw_q(&scaled, 1.0, false).unwrap().value
                - scale * dtw_q(&d, 1.0, false).unwrap().value)
                .abs()
                <= tol
        );
        prop_assert!(
            (discrete_frechet(&scaled, false).unwrap().value
                - scale * discrete_frechet(&d, false).unwrap().value)
                .abs()
                <= tol
        );
        prop_assert!(
            (weak_discrete_frechet(&scaled).unwrap().value
                - scale * weak_discrete_frechet(&d).unwrap().value)
                .abs()
                <= tol
        );
        let k = 3;
        prop_assert!(
            (kdtw_exact(&scaled, k, Heuristics::ALL, false).unwrap().value
                - scale * kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value)
                .abs()
                <= tol
        );
    }

    #[test]
    fn erp_scale_equivariance_with_scaled_gap(
        a in small_curve(2),
        b in small_curve(2),
        gap in proptest::collection::vec(-2.0f64..2.0, 2),
        scale in 0.01f64..10.0,
    ) {
        let gap_point = Point::new(gap.clone()).unwrap();
        let base = erp(&a, &b, &gap_point).unwrap().value;
        let scale_curve = |c: &Curve| {
            Curve::new(
                c.vertices()
                    .iter()
                    .map(|p| Point::new(p.coords().iter().map(|x| x * scale).collect()).unwrap())
                    .collect(),
            )
            .unwrap()
        };
        let scaled_gap = Point::new(gap.iter().map(|x| x * scale).collect()).unwrap();
        let scaled = erp(&scale_curve(&a), &scale_curve(&b), &scaled_gap).unwrap().value;
        prop_assert!((scaled - scale * base).abs() <= 1e-9 * (scale * base).max(1.0));
    }

    #[test]
    fn erp_symmetric_for_fixed_gap(a in small_curve(2), b in small_curve(2)) {
        let gap = Point::new(vec![0.0, 0.0]).unwrap();
        let ab = erp(&a, &b, &gap).unwrap().value;
        let ba = erp(&b, &a, &gap).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
    }

    #[test]
    fn kdtw_monotone_in_k_and_sandwiched(d in small_matrix()) {
        let frechet = discrete_frechet(&d, false).unwrap().value;
        let mut prev = 0.0;
        for k in 1..=(d.rows() + d.cols()) {
            let v = kdtw_exact(&d, k, Heuristics::ALL, false).unwrap().value;
            prop_assert!(v + 1e-12 >= prev, "d_k not monotone at k={}", k);
            prop_assert!(frechet <= v + 1e-9);
            prop_assert!(v <= k as f64 * frechet + 1e-9);
            prev = v;
        }
    }

    #[test]
    fn heuristic_subsets_agree_bitwise(d in small_matrix(), k in 1usize..8) {
        let base = kdtw_exact(&d, k, Heuristics::NONE, false).unwrap();
        for h in [
            Heuristics { h1: true, h2: false },
            Heuristics { h1: false, h2: true },
            Heuristics::ALL,
        ] {
            let pruned = kdtw_exact(&d, k, h, false).unwrap();
            prop_assert_eq!(base.value.to_bits(), pruned.value.to_bits());
        }
    }
}
