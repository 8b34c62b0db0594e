//! Measure dispatch and parallel pairwise distance-matrix computation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Curve, DistanceMatrix, Point};
use crate::kdtw::{kdtw_approx, kdtw_exact, Heuristics, KdtwResult};
use crate::measures::{
    discrete_frechet, dtw_q, erp, segment_dtw, weak_discrete_frechet, window_dtw,
};
use crate::parallel;

/// A fully parameterized dissimilarity measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Frechet,
    WeakFrechet,
    Dtw { q: f64 },
    Kdtw { k: usize },
    KdtwApprox { k: usize, epsilon: f64 },
    Erp { gap: Option<Point> },
    WindowDtw { window: usize },
    SegmentDtw { segments: usize },
}

impl Measure {
    /// Display name used in reports, e.g. `13-DTW` for k-DTW with k = 13.
    pub fn label(&self) -> String {
        match self {
            Measure::Frechet => "Frechet".into(),
            Measure::WeakFrechet => "WeakFrechet".into(),
            Measure::Dtw { q } if *q == 1.0 => "DTW".into(),
            Measure::Dtw { q } => format!("DTW_q{q}"),
            Measure::Kdtw { k } => format!("{k}-DTW"),
            Measure::KdtwApprox { k, epsilon } => format!("{k}-DTW(eps={epsilon})"),
            Measure::Erp { .. } => "EditRealPenalty".into(),
            Measure::WindowDtw { .. } => "PartWinDTW".into(),
            Measure::SegmentDtw { .. } => "PartSegmDTW".into(),
        }
    }

    /// Distance between two curves under this measure.
    pub fn evaluate(&self, a: &Curve, b: &Curve) -> Result<f64> {
        match self {
            Measure::Erp { gap } => {
                let gap = match gap {
                    Some(g) => g.clone(),
                    None => Point::new(vec![0.0; a.dim()])?,
                };
                Ok(erp(a, b, &gap)?.value)
            }
            _ => {
                let d = DistanceMatrix::from_curves(a, b)?;
                self.evaluate_matrix(&d)
            }
        }
    }

    fn evaluate_matrix(&self, d: &DistanceMatrix) -> Result<f64> {
        Ok(match self {
            Measure::Frechet => discrete_frechet(d, false)?.value,
            Measure::WeakFrechet => weak_discrete_frechet(d)?.value,
            Measure::Dtw { q } => dtw_q(d, *q, false)?.value,
            Measure::Kdtw { k } => kdtw_exact(d, *k, Heuristics::ALL, false)?.value,
            Measure::KdtwApprox { k, epsilon } => kdtw_approx(d, *k, *epsilon, false)?.value,
            Measure::WindowDtw { window } => window_dtw(d, *window)?.value,
            Measure::SegmentDtw { segments } => segment_dtw(d, *segments)?.value,
            Measure::Erp { .. } => unreachable!("handled by evaluate"),
        })
    }

    /// k-DTW evaluation with instrumentation; `None` for other measures.
    pub fn evaluate_instrumented(&self, a: &Curve, b: &Curve) -> Result<Option<KdtwResult>> {
        match self {
            Measure::Kdtw { k } => {
                let d = DistanceMatrix::from_curves(a, b)?;
                Ok(Some(kdtw_exact(&d, *k, Heuristics::ALL, false)?))
            }
            Measure::KdtwApprox { k, epsilon } => {
                let d = DistanceMatrix::from_curves(a, b)?;
                Ok(Some(kdtw_approx(&d, *k, *epsilon, false)?))
            }
            _ => Ok(None),
        }
    }
}

/// Instrumentation for one evaluated pair of a k-DTW pairwise run.
#[derive(Debug, Clone, Serialize)]
pub struct PairInstrumentation {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub iterations_executed: usize,
    pub dtw_calls: usize,
    pub z_plus_one: usize,
    pub saved_fraction: f64,
}

/// Full symmetric pairwise matrix under `measure`, diagonal pinned to zero.
/// Pairs are evaluated in parallel and assembled in index order.
pub fn pairwise_matrix(curves: &[Curve], measure: &Measure) -> Result<Vec<Vec<f64>>> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no curves to compare".into()));
    }
    let pairs = pair_list(curves.len());
    let values: Result<Vec<f64>> = parallel::map_indexed(pairs.len(), |p| {
        let (i, j) = pairs[p];
        measure.evaluate(&curves[i], &curves[j])
    })
    .into_iter()
    .collect();
    Ok(assemble(curves.len(), &values?))
}

/// Sequential twin of [`pairwise_matrix`] for benchmarking the fallback path.
pub fn pairwise_matrix_seq(curves: &[Curve], measure: &Measure) -> Result<Vec<Vec<f64>>> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no curves to compare".into()));
    }
    let pairs = pair_list(curves.len());
    let values: Result<Vec<f64>> = parallel::map_indexed_seq(pairs.len(), |p| {
        let (i, j) = pairs[p];
        measure.evaluate(&curves[i], &curves[j])
    })
    .into_iter()
    .collect();
    Ok(assemble(curves.len(), &values?))
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn assemble(n: usize, upper: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; n];
    for (p, &(i, j)) in pair_list(n).iter().enumerate() {
        out[i][j] = upper[p];
        out[j][i] = upper[p];
    }
    out
}

/// Pairwise matrix plus per-pair instrumentation (k-DTW measures only).
pub fn pairwise_matrix_instrumented(
    curves: &[Curve],
    measure: &Measure,
) -> Result<(Vec<Vec<f64>>, Vec<PairInstrumentation>)> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no curves to compare".into()));
    }
    let pairs = pair_list(curves.len());
    let results: Vec<Result<(f64, Option<PairInstrumentation>)>> =
        parallel::map_indexed(pairs.len(), |p| {
            let (i, j) = pairs[p];
            let inst = measure.evaluate_instrumented(&curves[i], &curves[j])?;
            match inst {
                Some(res) => Ok((
                    res.value,
                    Some(PairInstrumentation {
                        i,
                        j,
                        value: res.value,
                        iterations_executed: res.iterations_executed,
                        dtw_calls: res.dtw_calls,
                        z_plus_one: res.z_plus_one,
                        saved_fraction: res.saved_fraction(),
                    }),
                )),
                None => Ok((measure.evaluate(&curves[i], &curves[j])?, None)),
            }
        });
    let mut upper = Vec::with_capacity(pairs.len());
    let mut instrumentation = Vec::new();
    for r in results {
        let (v, inst) = r?;
        upper.push(v);
        if let Some(inst) = inst {
            instrumentation.push(inst);
        }
    }
    Ok((assemble(curves.len(), &upper), instrumentation))
}
