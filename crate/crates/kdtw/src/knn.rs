//! l-nearest-neighbor classification with repeated k-fold cross validation,
//! rank-based AUC, and the hold-out tuning protocol for the k-DTW parameter.
//!
//! Every repeat derives its own RNG stream from `(seed, repeat)`, so reports
//! are bitwise reproducible regardless of how repeats are scheduled.

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::seeded::stream_rng;

/// Cross-validation configuration.
#[derive(Debug, Clone)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    /// Neighbor count; `None` selects `ceil(sqrt(n))` for an n-item dataset.
    pub l_neighbors: Option<usize>,
    pub seed: u64,
    /// Stratified fold assignment (per-class round robin) instead of a plain
    /// shuffle.
    pub stratify: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 6,
            repeats: 100,
            l_neighbors: None,
            seed: 0,
            stratify: false,
        }
    }
}

impl CvConfig {
    fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidParameter("folds must be >= 2".into()));
        }
        if self.repeats < 1 {
            return Err(Error::InvalidParameter("repeats must be >= 1".into()));
        }
        if self.l_neighbors == Some(0) {
            return Err(Error::InvalidParameter("l must be >= 1".into()));
        }
        Ok(())
    }

    fn neighbors_for(&self, n: usize) -> usize {
        self.l_neighbors
            .unwrap_or_else(|| (n as f64).sqrt().ceil() as usize)
            .max(1)
    }
}

/// Mean and standard error of a metric over repeats.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricStat {
    /// `None` when the metric was undefined in every repeat (e.g. AUC on a
    /// single-class dataset).
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
}

impl MetricStat {
    fn from_samples(samples: &[f64]) -> MetricStat {
        let valid: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
        if valid.is_empty() {
            return MetricStat {
                mean: None,
                stderr: None,
            };
        }
        let n = valid.len() as f64;
        let mean = valid.iter().sum::<f64>() / n;
        let stderr = if valid.len() > 1 {
            let var = valid.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        MetricStat {
            mean: Some(mean),
            stderr: Some(stderr),
        }
    }
}

/// AUC, accuracy and F1 aggregated over repeats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc: MetricStat,
    pub accuracy: MetricStat,
    pub f1: MetricStat,
    pub repeats: usize,
}

/// Classifies one query from its distances to the training items.
///
/// Neighbors are the `l` smallest distances (ties by smaller index); the
/// label is the majority vote (ties toward the numerically smaller label) and
/// the score is the fraction of neighbors labeled 1.
pub fn knn_classify(train_distances: &[f64], train_labels: &[i64], l: usize) -> Result<(i64, f64)> {
    if train_distances.len() != train_labels.len() {
        return Err(Error::InvalidParameter(
            "distances and labels must align".into(),
        ));
    }
    if l == 0 || l > train_distances.len() {
        return Err(Error::InvalidParameter(format!(
            "l must be in 1..={}, got {l}",
            train_distances.len()
        )));
    }
    let mut order: Vec<usize> = (0..train_distances.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        train_distances[a]
            .total_cmp(&train_distances[b])
            .then(a.cmp(&b))
    });
    let neighbors = &order[..l];
    let mut votes = std::collections::HashMap::new();
    let mut positives = 0usize;
    for &i in neighbors {
        *votes.entry(train_labels[i]).or_insert(0usize) += 1;
        if train_labels[i] == 1 {
            positives += 1;
        }
    }
    let label = votes
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(label, _)| label)
        .unwrap();
    Ok((label, positives as f64 / l as f64))
}

/// Mann-Whitney AUC with midrank tie correction. Positives are label 1.
/// Returns NaN when either class is absent.
pub fn rank_auc(scores: &[f64], labels: &[i64]) -> f64 {
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return f64::NAN;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Midrank of the tie block covering 1-based ranks i+1..=j.
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    u / (n_pos as f64 * n_neg as f64)
}

fn f1_score(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Fold assignment for one repeat: seeded shuffle into near-equal folds, or a
/// per-class round robin when stratifying.
fn assign_folds(labels: &[i64], folds: usize, rng: &mut impl Rng, stratify: bool) -> Vec<usize> {
    let n = labels.len();
    let mut fold_of = vec![0usize; n];
    if stratify {
        let mut classes: Vec<i64> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let mut counter = 0usize;
        for class in classes {
            let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            members.shuffle(rng);
            for idx in members {
                fold_of[idx] = counter % folds;
                counter += 1;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for (pos, idx) in order.into_iter().enumerate() {
            fold_of[idx] = pos % folds;
        }
    }
    fold_of
}

struct RepeatOutcome {
    auc: f64,
    accuracy: f64,
    f1: f64,
}

fn run_repeat(
    dist: &[Vec<f64>],
    labels: &[i64],
    fold_of: &[usize],
    folds: usize,
    l: usize,
) -> RepeatOutcome {
    let n = labels.len();
    let mut scores = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut correct = 0usize;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let train_labels: Vec<i64> = train.iter().map(|&i| labels[i]).collect();
        let l_eff = l.min(train.len());
        for test in (0..n).filter(|&i| fold_of[i] == fold) {
            let row: Vec<f64> = train.iter().map(|&i| dist[test][i]).collect();
            let (pred, score) = knn_classify(&row, &train_labels, l_eff).expect("valid fold");
            scores.push(score);
            truth.push(labels[test]);
            if pred == labels[test] {
                correct += 1;
            }
            match (pred == 1, labels[test] == 1) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    RepeatOutcome {
        auc: rank_auc(&scores, &truth),
        accuracy: correct as f64 / n as f64,
        f1: f1_score(tp, fp, fn_),
    }
}

/// Repeated k-fold cross validation of an l-NN classifier over a precomputed
/// symmetric distance matrix.
pub fn cross_validate(dist: &[Vec<f64>], labels: &[i64], cv: &CvConfig) -> Result<MetricsReport> {
    cv.validate()?;
    let n = labels.len();
    if dist.len() != n || n == 0 {
        return Err(Error::InvalidParameter(
            "distance matrix and labels must align".into(),
        ));
    }
    if n < cv.folds {
        return Err(Error::InvalidParameter(format!(
            "need at least {} items for {}-fold CV, got {n}",
            cv.folds, cv.folds
        )));
    }
    let l = cv.neighbors_for(n);

    let outcomes: Vec<RepeatOutcome> = parallel::map_indexed(cv.repeats, |r| {
        let mut rng = stream_rng(cv.seed, r as u64);
        let fold_of = assign_folds(labels, cv.folds, &mut rng, cv.stratify);
        run_repeat(dist, labels, &fold_of, cv.folds, l)
    });

    let aucs: Vec<f64> = outcomes.iter().map(|o| o.auc).collect();
    let accs: Vec<f64> = outcomes.iter().map(|o| o.accuracy).collect();
    let f1s: Vec<f64> = outcomes.iter().map(|o| o.f1).collect();
    Ok(MetricsReport {
        auc: MetricStat::from_samples(&aucs),
        accuracy: MetricStat::from_samples(&accs),
        f1: MetricStat::from_samples(&f1s),
        repeats: cv.repeats,
    })
}

/// Single train/test evaluation of l-NN on a hold-out split.
pub fn holdout_evaluate(
    dist: &[Vec<f64>],
    labels: &[i64],
    train: &[usize],
    test: &[usize],
    l: usize,
) -> Result<MetricsReport> {
    let train_labels: Vec<i64> = train.iter().map(|&i| labels[i]).collect();
    let l_eff = l.min(train.len()).max(1);
    let mut scores = Vec::with_capacity(test.len());
    let mut truth = Vec::with_capacity(test.len());
    let mut correct = 0usize;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for &t in test {
        let row: Vec<f64> = train.iter().map(|&i| dist[t][i]).collect();
        let (pred, score) = knn_classify(&row, &train_labels, l_eff)?;
        scores.push(score);
        truth.push(labels[t]);
        if pred == labels[t] {
            correct += 1;
        }
        match (pred == 1, labels[t] == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let auc = rank_auc(&scores, &truth);
    Ok(MetricsReport {
        auc: MetricStat::from_samples(&[auc]),
        accuracy: MetricStat::from_samples(&[correct as f64 / test.len().max(1) as f64]),
        f1: MetricStat::from_samples(&[f1_score(tp, fp, fn_)]),
        repeats: 1,
    })
}

/// Seeded split of `0..n` into (train, test) with the test set holding a
/// `split_fraction` share.
pub fn holdout_split(n: usize, split_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0 < split_fraction && split_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction must be in (0,1), got {split_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, u64::MAX);
    order.shuffle(&mut rng);
    let test_size = ((n as f64 * split_fraction).round() as usize).clamp(1, n - 1);
    let test: Vec<usize> = order[..test_size].to_vec();
    let train: Vec<usize> = order[test_size..].to_vec();
    Ok((train, test))
}

/// One table row of the tuning report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneRow {
    pub measure: String,
    pub auc: MetricStat,
    pub accuracy: MetricStat,
    pub f1: MetricStat,
}

/// Result of the hold-out k-tuning protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneReport {
    pub selected_k: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub train: Vec<TuneRow>,
    pub test: Vec<TuneRow>,
}

fn submatrix(dist: &[Vec<f64>], indices: &[usize]) -> Vec<Vec<f64>> {
    indices
        .iter()
        .map(|&i| indices.iter().map(|&j| dist[i][j]).collect())
        .collect()
}

fn row_from_report(measure: String, report: &MetricsReport) -> TuneRow {
    TuneRow {
        measure,
        auc: report.auc,
        accuracy: report.accuracy,
        f1: report.f1,
    }
}

/// k-tuning with hold-out evaluation: the dataset is split into train/test
/// once, every candidate k is cross-validated on the training part, and the
/// AUC-maximizing k (ties toward the smaller k) is evaluated on the test part
/// alongside the baseline measures.
///
/// `candidates` maps each k to the full-dataset k-DTW distance matrix;
/// `baselines` carries named full-dataset matrices of the reference measures.
pub fn tune_k_holdout(
    candidates: &[(usize, Vec<Vec<f64>>)],
    baselines: &[(String, Vec<Vec<f64>>)],
    labels: &[i64],
    split_fraction: f64,
    cv: &CvConfig,
    seed: u64,
) -> Result<TuneReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no k candidates".into()));
    }
    let n = labels.len();
    let (train, test) = holdout_split(n, split_fraction, seed)?;
    let train_labels: Vec<i64> = train.iter().map(|&i| labels[i]).collect();
    let l_train = (train.len() as f64).sqrt().ceil() as usize;
    let train_cv = CvConfig {
        l_neighbors: Some(l_train),
        ..cv.clone()
    };

    let mut train_rows = Vec::new();
    let mut best: Option<(usize, f64, usize)> = None; // (k, auc, row index)
    for (row_idx, (k, dist)) in candidates.iter().enumerate() {
        let sub = submatrix(dist, &train);
        let report = cross_validate(&sub, &train_labels, &train_cv)?;
        let auc = report.auc.mean.unwrap_or(f64::NEG_INFINITY);
        train_rows.push(row_from_report(format!("{k}-DTW"), &report));
        let better = match best {
            None => true,
            Some((bk, bauc, _)) => auc > bauc || (auc == bauc && *k < bk),
        };
        if better {
            best = Some((*k, auc, row_idx));
        }
    }
    let (selected_k, _, selected_row) = best.expect("at least one candidate");

    let mut test_rows = Vec::new();
    let winner_dist = &candidates[selected_row].1;
    test_rows.push(row_from_report(
        format!("{selected_k}-DTW"),
        &holdout_evaluate(winner_dist, labels, &train, &test, l_train)?,
    ));
    for (name, dist) in baselines {
        test_rows.push(row_from_report(
            name.clone(),
            &holdout_evaluate(dist, labels, &train, &test, l_train)?,
        ));
    }

    Ok(TuneReport {
        selected_k,
        train_size: train.len(),
        test_size: test.len(),
        train: train_rows,
        test: test_rows,
    })
}
