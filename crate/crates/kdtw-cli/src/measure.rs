//! Measure specification parsing for the CLI.

use anyhow::{anyhow, bail, Result};
use kdtw::pairwise::Measure;
use kdtw::Point;

/// Parameter flags a measure spec can draw from.
#[derive(Debug, Clone)]
pub struct MeasureParams {
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub q: f64,
    pub window: usize,
    pub segments: usize,
    pub gap: Option<Vec<f64>>,
}

/// Parses one measure spec of the form `name` or `name=value`, where the
/// value overrides the measure's primary parameter (k for kdtw and
/// kdtw-approx, w for window-dtw, L for segment-dtw, q for dtw).
pub fn parse_measure(spec: &str, params: &MeasureParams) -> Result<Measure> {
    let (name, inline) = match spec.split_once('=') {
        Some((n, v)) => (n.trim(), Some(v.trim())),
        None => (spec.trim(), None),
    };
    let inline_usize = |what: &str| -> Result<Option<usize>> {
        inline
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| anyhow!("{what} '{v}' in '{spec}' is not an integer"))
            })
            .transpose()
    };
    Ok(match name {
        "frechet" => Measure::Frechet,
        "weak-frechet" => Measure::WeakFrechet,
        "dtw" => {
            let q = match inline {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| anyhow!("q '{v}' in '{spec}' is not a number"))?,
                None => params.q,
            };
            Measure::Dtw { q }
        }
        "kdtw" => {
            let k = inline_usize("k")?
                .or(params.k)
                .ok_or_else(|| anyhow!("measure kdtw requires --k (or kdtw=<k>)"))?;
            Measure::Kdtw { k }
        }
        "kdtw-approx" => {
            let k = inline_usize("k")?
                .or(params.k)
                .ok_or_else(|| anyhow!("measure kdtw-approx requires --k (or kdtw-approx=<k>)"))?;
            let epsilon = params
                .epsilon
                .ok_or_else(|| anyhow!("measure kdtw-approx requires --epsilon"))?;
            Measure::KdtwApprox { k, epsilon }
        }
        "erp" => {
            let gap = params
                .gap
                .as_ref()
                .map(|coords| Point::new(coords.clone()))
                .transpose()?;
            Measure::Erp { gap }
        }
        "window-dtw" => Measure::WindowDtw {
            window: inline_usize("window")?.unwrap_or(params.window),
        },
        "segment-dtw" => Measure::SegmentDtw {
            segments: inline_usize("segments")?.unwrap_or(params.segments),
        },
        other => bail!(
            "unknown measure '{other}' (expected frechet|weak-frechet|dtw|kdtw|kdtw-approx|erp|window-dtw|segment-dtw)"
        ),
    })
}

/// Parses a comma-separated list of measure specs.
pub fn parse_measures(specs: &str, params: &MeasureParams) -> Result<Vec<Measure>> {
    specs
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_measure(s, params))
        .collect()
}
