//! Implementations of the CLI subcommands.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use kdtw::dataset::{load_dataset, save_json, save_matrix, LabeledDataset};
use kdtw::hac::{agglomerate, cut as cut_dendrogram, leaf_ordered_matrix, purity, Linkage};
use kdtw::knn::{cross_validate, tune_k_holdout, CvConfig, MetricsReport, TuneReport};
use kdtw::median::breakdown_experiment;
use kdtw::pairwise::{pairwise_matrix, pairwise_matrix_instrumented, Measure, PairInstrumentation};
use kdtw::synth::{
    d_gadget_curves, gen_ensemble, k_gadget_curves, long_short_fixture, triangle_fixture,
    SynthParams,
};
use kdtw::{Curve, DatasetItem, Point};

use crate::measure::{parse_measure, parse_measures};
use crate::output::{fmt_opt, write_json};
use crate::{CvArgs, InputArgs, MeasureArgs};

fn load(input: &InputArgs) -> Result<LabeledDataset> {
    let dataset =
        load_dataset(&input.input).with_context(|| format!("loading {}", input.input.display()))?;
    Ok(if input.dedup_vertices {
        dataset.dedup_vertices()
    } else {
        dataset
    })
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

#[derive(Serialize)]
struct InstrumentReport {
    measure: String,
    mean_saved_fraction: f64,
    pairs: Vec<PairInstrumentation>,
}

pub fn dist(input: &InputArgs, measure: &MeasureArgs, output: &Path, instrument: bool) -> Result<()> {
    let dataset = load(input)?;
    let spec = parse_measure(&measure.measure, &measure.params())?;
    let curves = dataset.curves();
    if instrument {
        let (matrix, pairs) = pairwise_matrix_instrumented(&curves, &spec)?;
        save_matrix(&matrix, &dataset.ids(), output)?;
        if !pairs.is_empty() {
            let mean_saved_fraction =
                pairs.iter().map(|p| p.saved_fraction).sum::<f64>() / pairs.len() as f64;
            let report = InstrumentReport {
                measure: spec.label(),
                mean_saved_fraction,
                pairs,
            };
            let mut inst_path = output.as_os_str().to_owned();
            inst_path.push(".instrument.json");
            write_json(&report, Path::new(&inst_path))?;
        }
    } else {
        let matrix = pairwise_matrix(&curves, &spec)?;
        save_matrix(&matrix, &dataset.ids(), output)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DendrogramDoc {
    merges: Vec<(usize, usize, usize, f64, usize)>,
    leaf_order: Vec<usize>,
}

#[derive(Serialize)]
struct ClusterDoc {
    measure: String,
    linkage: String,
    cut: usize,
    purity: f64,
    ids: Vec<String>,
    assignment: Vec<usize>,
}

pub fn cluster(
    input: &InputArgs,
    measure: &MeasureArgs,
    linkage: &str,
    cut: usize,
    output: &Path,
) -> Result<()> {
    let dataset = load(input)?;
    let spec = parse_measure(&measure.measure, &measure.params())?;
    let linkage: Linkage = linkage.parse()?;
    ensure_dir(output)?;

    let matrix = pairwise_matrix(&dataset.curves(), &spec)?;
    let dendrogram = agglomerate(&matrix, linkage)?;
    let assignment = cut_dendrogram(&dendrogram, dataset.len(), cut)?;
    let purity_value = purity(&assignment, &dataset.labels())?;

    let doc = DendrogramDoc {
        merges: dendrogram
            .merges
            .iter()
            .map(|m| (m.step, m.cluster_a, m.cluster_b, m.distance, m.merged_size))
            .collect(),
        leaf_order: dendrogram.leaf_order.clone(),
    };
    write_json(&doc, &output.join("dendrogram.json"))?;

    let reordered = leaf_ordered_matrix(&matrix, &dendrogram);
    let ids = dataset.ids();
    let reordered_ids: Vec<String> = dendrogram
        .leaf_order
        .iter()
        .map(|&i| ids[i].clone())
        .collect();
    save_matrix(&reordered, &reordered_ids, &output.join("heatmap.csv"))?;

    write_json(
        &ClusterDoc {
            measure: spec.label(),
            linkage: format!("{linkage:?}").to_lowercase(),
            cut,
            purity: purity_value,
            ids,
            assignment,
        },
        &output.join("clusters.json"),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MeasureMetrics {
    measure: String,
    #[serde(flatten)]
    report: MetricsReport,
}

fn metrics_csv(rows: &[MeasureMetrics]) -> String {
    let mut out = String::from(
        "measure,auc_mean,auc_stderr,accuracy_mean,accuracy_stderr,f1_mean,f1_stderr\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.measure,
            fmt_opt(row.report.auc.mean),
            fmt_opt(row.report.auc.stderr),
            fmt_opt(row.report.accuracy.mean),
            fmt_opt(row.report.accuracy.stderr),
            fmt_opt(row.report.f1.mean),
            fmt_opt(row.report.f1.stderr),
        ));
    }
    out
}

pub fn knn(input: &InputArgs, measure: &MeasureArgs, cv: &CvArgs, output: &Path) -> Result<()> {
    let dataset = load(input)?;
    let specs = parse_measures(&measure.measure, &measure.params())?;
    if specs.is_empty() {
        bail!("no measures given");
    }
    ensure_dir(output)?;
    let config = CvConfig {
        folds: cv.folds,
        repeats: cv.repeats,
        l_neighbors: cv.l,
        seed: cv.seed,
        stratify: cv.stratify,
    };
    let labels = dataset.labels();
    let curves = dataset.curves();
    let mut rows = Vec::new();
    for spec in specs {
        let matrix = pairwise_matrix(&curves, &spec)?;
        let report = cross_validate(&matrix, &labels, &config)?;
        if report.auc.mean.is_none() {
            eprintln!(
                "warning: AUC undefined for {} (single-class dataset)",
                spec.label()
            );
        }
        rows.push(MeasureMetrics {
            measure: spec.label(),
            report,
        });
    }
    write_json(&rows, &output.join("metrics.json"))?;
    std::fs::write(output.join("metrics.csv"), metrics_csv(&rows))
        .with_context(|| format!("writing {}", output.join("metrics.csv").display()))?;
    Ok(())
}

fn default_candidates(m: usize) -> Vec<usize> {
    let m = m as f64;
    let mut ks: Vec<usize> = [m.ln().ceil(), m.sqrt().ceil(), (m / 10.0).ceil(), (m / 4.0).ceil()]
        .iter()
        .map(|&k| (k as usize).max(1))
        .collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

fn tune_csv(rows: &[kdtw::knn::TuneRow]) -> String {
    let mut out = String::from(
        "measure,auc_mean,auc_stderr,accuracy_mean,accuracy_stderr,f1_mean,f1_stderr\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.measure,
            fmt_opt(row.auc.mean),
            fmt_opt(row.auc.stderr),
            fmt_opt(row.accuracy.mean),
            fmt_opt(row.accuracy.stderr),
            fmt_opt(row.f1.mean),
            fmt_opt(row.f1.stderr),
        ));
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn tune(
    input: &InputArgs,
    cv: &CvArgs,
    split: f64,
    candidates: Option<&str>,
    baselines: &str,
    epsilon: Option<f64>,
    output: &Path,
) -> Result<()> {
    let dataset = load(input)?;
    ensure_dir(output)?;
    let curves = dataset.curves();
    let labels = dataset.labels();
    let max_complexity = curves.iter().map(Curve::len).max().unwrap_or(1);
    let ks = match candidates {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| anyhow!("candidate '{s}' is not an integer"))
            })
            .collect::<Result<Vec<usize>>>()?,
        None => default_candidates(max_complexity),
    };
    if ks.is_empty() {
        bail!("candidate list is empty");
    }

    let candidate_matrices = ks
        .iter()
        .map(|&k| {
            let measure = match epsilon {
                Some(eps) => Measure::KdtwApprox { k, epsilon: eps },
                None => Measure::Kdtw { k },
            };
            Ok((k, pairwise_matrix(&curves, &measure)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let params = crate::measure::MeasureParams {
        k: None,
        epsilon,
        q: 1.0,
        window: 50,
        segments: 10,
        gap: None,
    };
    let baseline_matrices = parse_measures(baselines, &params)?
        .into_iter()
        .map(|measure| Ok((measure.label(), pairwise_matrix(&curves, &measure)?)))
        .collect::<Result<Vec<_>>>()?;

    let config = CvConfig {
        folds: cv.folds,
        repeats: cv.repeats,
        l_neighbors: cv.l,
        seed: cv.seed,
        stratify: cv.stratify,
    };
    let report: TuneReport = tune_k_holdout(
        &candidate_matrices,
        &baseline_matrices,
        &labels,
        split,
        &config,
        cv.seed,
    )?;

    write_json(&report, &output.join("tune.json"))?;
    std::fs::write(output.join("tune_train.csv"), tune_csv(&report.train))?;
    std::fs::write(output.join("tune_test.csv"), tune_csv(&report.test))?;
    Ok(())
}

pub fn synth(
    m: usize,
    count: usize,
    epsilon: f64,
    peaks: usize,
    seed: u64,
    output: &Path,
) -> Result<()> {
    let mut params = SynthParams::default_for(m, count, seed)?;
    params.epsilon = epsilon;
    params.peaks = peaks;
    params.validate()?;
    let items: Vec<DatasetItem> = gen_ensemble(&params)?
        .into_iter()
        .map(|c| DatasetItem {
            id: c.id,
            label: c.label,
            curve: c.curve,
        })
        .collect();
    let dataset = LabeledDataset::new(items)?;
    save_json(&dataset, output)?;
    Ok(())
}

#[derive(Serialize)]
struct FixtureExpectation {
    name: String,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mhat: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<f64>,
    expected: serde_json::Value,
}

fn curve_items(named: Vec<(&str, i64, Curve)>) -> Result<LabeledDataset> {
    Ok(LabeledDataset::new(
        named
            .into_iter()
            .map(|(id, label, curve)| DatasetItem {
                id: id.to_string(),
                label,
                curve,
            })
            .collect(),
    )?)
}

pub fn fixtures(
    name: &str,
    m: Option<usize>,
    epsilon: Option<f64>,
    mhat: usize,
    height: f64,
    k: usize,
    output: &Path,
) -> Result<()> {
    ensure_dir(output)?;
    let (dataset, expectation) = match name {
        "triangle" => {
            let m = m.unwrap_or(5);
            let eps = epsilon.unwrap_or(0.2);
            let (sigma, tau, upsilon) = triangle_fixture(m, eps)?;
            let dataset = curve_items(vec![("sigma", 0, sigma), ("tau", 1, tau), ("upsilon", 2, upsilon)])?;
            if k > m - 2 {
                bail!("triangle expectations hold for k <= m-2 (got k={k}, m={m})");
            }
            let expected = serde_json::json!({
                "kdtw_sigma_tau": k as f64 * eps,
                "kdtw_sigma_upsilon": eps,
                "kdtw_upsilon_tau": 0.0,
            });
            (
                dataset,
                FixtureExpectation {
                    name: name.into(),
                    k,
                    m: Some(m),
                    epsilon: Some(eps),
                    mhat: None,
                    height: None,
                    expected,
                },
            )
        }
        "k-gadget" | "d-gadget" => {
            let eps = height / 10.0;
            let (sigma, tau, per_gadget_dtw, kdtw_terms, kdtw_len, dtw_len) = if name == "k-gadget"
            {
                let (sigma, tau) = k_gadget_curves(mhat, height)?;
                // Per gadget, the diagonal traversal matches distances
                // {L, L, eps, eps}; the optimal DTW traversal costs 2L + eps.
                (sigma, tau, 2.0 * height + eps, vec![height, height, eps, eps], 4 * mhat, 5 * mhat)
            } else {
                let (sigma, tau) = d_gadget_curves(mhat, height)?;
                // Per gadget, the k-DTW-optimal traversal matches
                // {L, L, 2eps, eps, eps}; DTW is realized diagonally.
                (sigma, tau, 2.0 * height + 3.5 * eps, vec![height, height, 2.0 * eps, eps, eps], 5 * mhat, 4 * mhat)
            };
            let dataset = curve_items(vec![("sigma", 0, sigma), ("tau", 1, tau)])?;
            // Top-k sum over the concatenated per-gadget profile.
            let mut profile: Vec<f64> = kdtw_terms
                .iter()
                .flat_map(|&v| std::iter::repeat(v).take(mhat))
                .collect();
            profile.sort_unstable_by(|a, b| b.total_cmp(a));
            let kdtw_expected: f64 = profile.iter().take(k).sum();
            let expected = serde_json::json!({
                "dtw": per_gadget_dtw * mhat as f64,
                "kdtw": kdtw_expected,
                "kdtw_traversal_len": kdtw_len,
                "dtw_traversal_len": dtw_len,
            });
            (
                dataset,
                FixtureExpectation {
                    name: name.into(),
                    k,
                    m: None,
                    epsilon: Some(eps),
                    mhat: Some(mhat),
                    height: Some(height),
                    expected,
                },
            )
        }
        "long-short" => {
            let m = m.unwrap_or(1000);
            let eps = epsilon.unwrap_or(0.1);
            if m < 1000 {
                eprintln!("warning: long-short expectations are guaranteed for m >= 1000");
            }
            let (sigma, tau) = long_short_fixture(m, eps)?;
            let dataset = curve_items(vec![("sigma", 0, sigma), ("tau", 1, tau)])?;
            let expected = serde_json::json!({
                "dtw": m as f64 - 3.0 + 2.0 * eps + eps * eps,
                "dtw_traversal_len": 2 * m - 5,
                "kdtw": k as f64 + eps * eps,
            });
            (
                dataset,
                FixtureExpectation {
                    name: name.into(),
                    k,
                    m: Some(m),
                    epsilon: Some(eps),
                    mhat: None,
                    height: None,
                    expected,
                },
            )
        }
        other => bail!("unknown fixture '{other}' (expected triangle|k-gadget|d-gadget|long-short)"),
    };
    save_json(&dataset, &output.join("dataset.json"))?;
    write_json(&expectation, &output.join("expected.json"))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn robust(
    input: Option<&Path>,
    n: usize,
    dim: usize,
    seed: u64,
    k: usize,
    magnitude: f64,
    magnitudes: &str,
    output: &Path,
) -> Result<()> {
    let points: Vec<Point> = match input {
        Some(path) => {
            let dataset = load_dataset(path)?;
            dataset.items()[0].curve.vertices().to_vec()
        }
        None => kdtw::median::unit_ball_points(n, dim, seed),
    };
    let mags: Vec<f64> = magnitudes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("magnitude '{s}' is not a number"))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = breakdown_experiment(&points, k, magnitude, &mags)?;
    write_json(&report, output)?;
    Ok(())
}
