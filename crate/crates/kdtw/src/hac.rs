//! Hierarchical agglomerative clustering over a precomputed symmetric
//! distance matrix, with single and complete linkage.
//!
//! The implementation is the plain O(n^3) merge loop with Lance-Williams
//! updates (min for single linkage, max for complete); every pipeline here
//! clusters at most a few hundred items. Ties are broken by the smallest
//! cluster index pair, so dendrograms are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linkage function defining the dissimilarity of two clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    /// min over cross-cluster pairs.
    Single,
    /// max over cross-cluster pairs.
    Complete,
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Linkage> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::InvalidParameter(format!(
                "unknown linkage '{other}' (expected single|complete)"
            ))),
        }
    }
}

/// One agglomeration step. Leaves are clusters `0..n`; the cluster created by
/// step `s` gets index `n + s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Merge {
    pub step: usize,
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub distance: f64,
    pub merged_size: usize,
}

/// Stepwise dendrogram: `n - 1` merges plus the leaf order induced by the
/// merge tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<usize>,
}

/// Symmetric zero-diagonal distance matrix for clustering, stored dense.
pub fn validate_square(dist: &[Vec<f64>]) -> Result<usize> {
    let n = dist.len();
    if n == 0 {
        return Err(Error::InvalidMatrix("empty distance matrix".into()));
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidMatrix(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidMatrix(format!("diagonal entry {i} is not zero")));
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidMatrix(format!("entry ({i},{j}) is not finite")));
            }
            if (x - dist[j][i]).abs() > 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "matrix is asymmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(n)
}

/// Agglomerates `n` items into a dendrogram under the given linkage.
pub fn agglomerate(dist: &[Vec<f64>], linkage: Linkage) -> Result<Dendrogram> {
    let n = validate_square(dist)?;
    if n == 1 {
        return Ok(Dendrogram {
            merges: vec![],
            leaf_order: vec![0],
        });
    }

    // active[c] = Some(size); cluster-to-cluster distances kept in a mutable
    // square indexed by cluster id (leaves 0..n, merges n..2n-1).
    let total = 2 * n - 1;
    let mut size = vec![0usize; total];
    let mut active: Vec<bool> = vec![false; total];
    let mut d = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        size[i] = 1;
        active[i] = true;
        for j in 0..n {
            d[i][j] = dist[i][j];
        }
    }

    // children[c] for internal nodes, used to emit the leaf order.
    let mut children: Vec<Option<(usize, usize)>> = vec![None; total];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        // Find the closest active pair, ties by smallest (a, b).
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..total {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..total {
                if !active[b] {
                    continue;
                }
                let dd = d[a][b];
                if best.is_none_or(|(bd, _, _)| dd < bd) {
                    best = Some((dd, a, b));
                }
            }
        }
        let (distance, a, b) = best.expect("at least two active clusters");

        let new = n + step;
        size[new] = size[a] + size[b];
        children[new] = Some((a, b));
        active[a] = false;
        active[b] = false;

        // Lance-Williams update against every remaining cluster.
        for c in 0..total {
            if !active[c] {
                continue;
            }
            let dac = d[a][c];
            let dbc = d[b][c];
            let dnc = match linkage {
                Linkage::Single => dac.min(dbc),
                Linkage::Complete => dac.max(dbc),
            };
            d[new][c] = dnc;
            d[c][new] = dnc;
        }
        active[new] = true;

        merges.push(Merge {
            step,
            cluster_a: a,
            cluster_b: b,
            distance,
            merged_size: size[new],
        });
    }

    // Leaf order: in-order expansion of the final tree.
    let mut leaf_order = Vec::with_capacity(n);
    let mut stack = vec![total - 1];
    while let Some(c) = stack.pop() {
        match children[c] {
            Some((a, b)) => {
                stack.push(b);
                stack.push(a);
            }
            None => leaf_order.push(c),
        }
    }

    Ok(Dendrogram { merges, leaf_order })
}

/// Cluster assignment obtained by undoing the last `num_clusters - 1` merges.
/// Labels are normalized to `0..num_clusters` in order of first item.
pub fn cut(dendrogram: &Dendrogram, n: usize, num_clusters: usize) -> Result<Vec<usize>> {
    if num_clusters == 0 || num_clusters > n {
        return Err(Error::InvalidParameter(format!(
            "cut must be in 1..={n}, got {num_clusters}"
        )));
    }
    // Union-find over the first n - num_clusters merges.
    let total = 2 * n - 1;
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for merge in dendrogram.merges.iter().take(n - num_clusters) {
        let new = n + merge.step;
        let ra = find(&mut parent, merge.cluster_a);
        let rb = find(&mut parent, merge.cluster_b);
        parent[ra] = new;
        parent[rb] = new;
    }
    let mut label_of_root = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for item in 0..n {
        let root = find(&mut parent, item);
        let next = label_of_root.len();
        let label = *label_of_root.entry(root).or_insert(next);
        labels.push(label);
    }
    Ok(labels)
}

/// Fraction of items whose cluster's majority label matches their own:
/// `(1/n) * sum over clusters of the majority-label count`.
pub fn purity(assignment: &[usize], labels: &[i64]) -> Result<f64> {
    if assignment.len() != labels.len() || assignment.is_empty() {
        return Err(Error::InvalidParameter(
            "assignment and labels must be nonempty and equally long".into(),
        ));
    }
    let num_clusters = assignment.iter().max().unwrap() + 1;
    let mut majority = 0usize;
    for c in 0..num_clusters {
        let mut counts = std::collections::HashMap::new();
        for (&a, &l) in assignment.iter().zip(labels) {
            if a == c {
                *counts.entry(l).or_insert(0usize) += 1;
            }
        }
        majority += counts.values().copied().max().unwrap_or(0);
    }
    Ok(majority as f64 / assignment.len() as f64)
}

/// Distance matrix reordered by the dendrogram's leaf order, ready for
/// heatmap plotting.
pub fn leaf_ordered_matrix(dist: &[Vec<f64>], dendrogram: &Dendrogram) -> Vec<Vec<f64>> {
    dendrogram
        .leaf_order
        .iter()
        .map(|&i| dendrogram.leaf_order.iter().map(|&j| dist[i][j]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn from_points_1d(points: &[f64]) -> Vec<Vec<f64>> {
        points
            .iter()
            .map(|&a| points.iter().map(|&b| (a - b).abs()).collect())
            .collect()
    }

    #[test]
    fn two_items_single_merge() {
        let dist = from_points_1d(&[0.0, 3.0]);
        let dendro = agglomerate(&dist, Linkage::Single).unwrap();
        assert_eq!(dendro.merges.len(), 1);
        assert_eq!(dendro.merges[0].distance, 3.0);
        assert_eq!(dendro.merges[0].merged_size, 2);
    }

    #[test]
    fn three_points_single_vs_complete() {
        let dist = from_points_1d(&[0.0, 1.0, 10.0]);
        let single = agglomerate(&dist, Linkage::Single).unwrap();
        assert_eq!(single.merges[0].distance, 1.0);
        assert_eq!(single.merges[1].distance, 9.0);
        let complete = agglomerate(&dist, Linkage::Complete).unwrap();
        assert_eq!(complete.merges[0].distance, 1.0);
        assert_eq!(complete.merges[1].distance, 10.0);
    }

    /// Re-scan oracle: recompute every cluster-pair distance from the original
    /// matrix at each step instead of using Lance-Williams updates.
    fn rescan_merge_distances(dist: &[Vec<f64>], linkage: Linkage) -> Vec<f64> {
        let n = dist.len();
        let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let mut next_id = n;
        let mut out = Vec::new();
        while clusters.len() > 1 {
            let mut best: Option<(f64, usize, usize)> = None;
            for x in 0..clusters.len() {
                for y in (x + 1)..clusters.len() {
                    let mut dd = match linkage {
                        Linkage::Single => f64::INFINITY,
                        Linkage::Complete => f64::NEG_INFINITY,
                    };
                    for &a in &clusters[x].1 {
                        for &b in &clusters[y].1 {
                            dd = match linkage {
                                Linkage::Single => dd.min(dist[a][b]),
                                Linkage::Complete => dd.max(dist[a][b]),
                            };
                        }
                    }
                    let (ida, idb) = (clusters[x].0.min(clusters[y].0), clusters[x].0.max(clusters[y].0));
                    let better = match best {
                        None => true,
                        Some((bd, ba, bb)) => dd < bd || (dd == bd && (ida, idb) < (ba, bb)),
                    };
                    if better {
                        best = Some((dd, ida, idb));
                    }
                }
            }
            let (dd, ida, idb) = best.unwrap();
            out.push(dd);
            let ya = clusters.iter().position(|c| c.0 == ida).unwrap();
            let members_a = clusters.remove(ya).1;
            let yb = clusters.iter().position(|c| c.0 == idb).unwrap();
            let mut members = clusters.remove(yb).1;
            members.extend(members_a);
            clusters.push((next_id, members));
            next_id += 1;
        }
        out
    }

    #[test]
    fn merge_distances_match_rescan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = 8;
            let mut dist = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen_range(0.1..10.0);
                    dist[i][j] = v;
                    dist[j][i] = v;
                }
            }
            for linkage in [Linkage::Single, Linkage::Complete] {
                let dendro = agglomerate(&dist, linkage).unwrap();
                let oracle = rescan_merge_distances(&dist, linkage);
                for (m, o) in dendro.merges.iter().zip(&oracle) {
                    assert!((m.distance - o).abs() < 1e-12, "{linkage:?}");
                }
            }
        }
    }

    #[test]
    fn merge_heights_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10;
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(0.1..5.0);
                dist[i][j] = v;
                dist[j][i] = v;
            }
        }
        for linkage in [Linkage::Single, Linkage::Complete] {
            let dendro = agglomerate(&dist, linkage).unwrap();
            for w in dendro.merges.windows(2) {
                assert!(w[0].distance <= w[1].distance + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(agglomerate(&[], Linkage::Single).is_err());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(agglomerate(&asym, Linkage::Single).is_err());
        let diag = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        assert!(agglomerate(&diag, Linkage::Single).is_err());
        let inf = vec![vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]];
        assert!(agglomerate(&inf, Linkage::Single).is_err());
    }

    #[test]
    fn cut_and_purity_examples() {
        let dist = from_points_1d(&[0.0, 0.1, 5.0, 5.1, 10.0, 10.1]);
        let labels = vec![0, 0, 1, 1, 2, 2];
        let dendro = agglomerate(&dist, Linkage::Single).unwrap();
        // All singletons.
        let all = cut(&dendro, 6, 6).unwrap();
        assert_eq!(purity(&all, &labels).unwrap(), 1.0);
        // One cluster over balanced 3-class labels.
        let one = cut(&dendro, 6, 1).unwrap();
        assert!((purity(&one, &labels).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // The natural cut.
        let three = cut(&dendro, 6, 3).unwrap();
        assert_eq!(purity(&three, &labels).unwrap(), 1.0);
        assert!(cut(&dendro, 6, 0).is_err());
        assert!(cut(&dendro, 6, 7).is_err());
    }

    #[test]
    fn permutation_consistency_with_distinct_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 7;
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(0.1..10.0) + (i * n + j) as f64 * 1e-6;
                dist[i][j] = v;
                dist[j][i] = v;
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| dist[perm[i]][perm[j]]).collect())
            .collect();

        for linkage in [Linkage::Single, Linkage::Complete] {
            let base = cut(&agglomerate(&dist, linkage).unwrap(), n, 3).unwrap();
            let moved = cut(&agglomerate(&permuted, linkage).unwrap(), n, 3).unwrap();
            // Same partition up to relabeling: items in the same base cluster
            // must share a cluster in the permuted clustering.
            for i in 0..n {
                for j in 0..n {
                    let same_base = base[perm[i]] == base[perm[j]];
                    let same_moved = moved[i] == moved[j];
                    assert_eq!(same_base, same_moved);
                }
            }
        }
    }

    #[test]
    fn leaf_order_is_permutation() {
        let dist = from_points_1d(&[3.0, 1.0, 4.0, 1.5, 9.0]);
        let dendro = agglomerate(&dist, Linkage::Complete).unwrap();
        let mut sorted = dendro.leaf_order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..5).collect::<Vec<_>>());
        let reordered = leaf_ordered_matrix(&dist, &dendro);
        assert_eq!(reordered.len(), 5);
        for (r, &i) in dendro.leaf_order.iter().enumerate() {
            assert_eq!(reordered[r][r], 0.0);
            assert_eq!(reordered[r][0], dist[i][dendro.leaf_order[0]]);
        }
    }
}
