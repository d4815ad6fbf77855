//! Binary decision trees shared by the screening forest and the tree-based
//! learners.
//!
//! Targets are real numbers with per-sample weights. The split criterion is
//! weighted variance; for 0/1 targets the Gini impurity is exactly twice the
//! variance, so the same machinery grows classification trees.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Impurity measure reported on nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// `1 - p0^2 - p1^2` for 0/1 targets.
    Gini,
    Variance,
}

impl Criterion {
    fn scale(self) -> f64 {
        match self {
            Criterion::Gini => 2.0,
            Criterion::Variance => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowParams {
    pub max_depth: usize,
    /// Nodes whose sample weight is below this become leaves.
    pub min_samples_split: f64,
    /// Features drawn as split candidates at every node.
    pub features_per_split: usize,
    pub criterion: Criterion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Split feature; `None` for leaves.
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Weighted mean target of the samples reaching this node.
    pub value: f64,
    /// Total sample weight reaching this node.
    pub weight: f64,
    pub impurity: f64,
    /// `weight * impurity - left.weight * left.impurity - right.weight * right.impurity`.
    pub weighted_decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        while let Some(f) = self.nodes[i].feature {
            let node = &self.nodes[i];
            i = if row[f] <= node.threshold {
                node.left
            } else {
                node.right
            };
        }
        i
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.nodes[self.leaf_index(row)].value
    }

    pub fn set_value(&mut self, node: usize, value: f64) {
        self.nodes[node].value = value;
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i].feature {
                None => 0,
                Some(_) => 1 + walk(nodes, nodes[i].left).max(walk(nodes, nodes[i].right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Per-feature sum of `(node weight / root weight) * impurity decrease`.
    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        let total = self.root().weight;
        if total <= 0.0 {
            return out;
        }
        for node in &self.nodes {
            if let Some(f) = node.feature {
                out[f] += node.weighted_decrease / total;
            }
        }
        out
    }
}

/// For each feature, row indices sorted by that feature's value.
pub fn presort(columns: &[Vec<f64>]) -> Vec<Vec<usize>> {
    columns
        .iter()
        .map(|col| {
            let mut idx: Vec<usize> = (0..col.len()).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            idx
        })
        .collect()
}

#[derive(Clone, Copy, Default)]
struct Moments {
    w: f64,
    wy: f64,
    wy2: f64,
}

impl Moments {
    fn add(&mut self, w: f64, y: f64) {
        self.w += w;
        self.wy += w * y;
        self.wy2 += w * y * y;
    }

    fn sub(&self, other: &Moments) -> Moments {
        Moments {
            w: self.w - other.w,
            wy: self.wy - other.wy,
            wy2: self.wy2 - other.wy2,
        }
    }

    fn mean(&self) -> f64 {
        if self.w > 0.0 {
            self.wy / self.w
        } else {
            0.0
        }
    }

    /// Weight times variance.
    fn weighted_variance(&self) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        (self.wy2 - self.wy * self.wy / self.w).max(0.0)
    }

    fn variance(&self) -> f64 {
        if self.w <= 0.0 {
            0.0
        } else {
            self.weighted_variance() / self.w
        }
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    /// weight * variance removed by the split
    gain: f64,
}

struct Builder<'a, R> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    w: &'a [f64],
    params: GrowParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    goes_left: Vec<bool>,
}

impl<'a, R: Rng> Builder<'a, R> {
    fn moments(&self, rows: &[usize]) -> Moments {
        let mut m = Moments::default();
        for &r in rows {
            m.add(self.w[r], self.y[r]);
        }
        m
    }

    fn push_leaf(&mut self, m: &Moments) -> usize {
        self.nodes.push(Node {
            feature: None,
            threshold: 0.0,
            left: 0,
            right: 0,
            value: m.mean(),
            weight: m.w,
            impurity: self.params.criterion.scale() * m.variance(),
            weighted_decrease: 0.0,
        });
        self.nodes.len() - 1
    }

    fn can_split(&self, m: &Moments, depth: usize) -> bool {
        depth < self.params.max_depth
            && m.w >= self.params.min_samples_split
            && m.variance() > 1e-14
    }

    fn candidate_order(&mut self) -> Vec<usize> {
        let mut features: Vec<usize> = (0..self.columns.len()).collect();
        features.shuffle(self.rng);
        features
    }

    /// Best midpoint split on one feature from a sorted row list.
    fn best_threshold(&self, feature: usize, sorted: &[usize], total: &Moments) -> Option<SplitChoice> {
        let col = &self.columns[feature];
        let base = total.wy * total.wy / total.w;
        let mut left = Moments::default();
        let mut best: Option<SplitChoice> = None;
        for pair in sorted.windows(2) {
            let (r, next) = (pair[0], pair[1]);
            left.add(self.w[r], self.y[r]);
            let (a, b) = (col[r], col[next]);
            if a >= b || left.w <= 0.0 {
                continue;
            }
            let right = total.sub(&left);
            if right.w <= 0.0 {
                continue;
            }
            let gain = left.wy * left.wy / left.w + right.wy * right.wy / right.w - base;
            if best.as_ref().map_or(true, |s| gain > s.gain) {
                let mid = 0.5 * (a + b);
                let threshold = if mid < b { mid } else { a };
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    fn random_threshold(&mut self, feature: usize, rows: &[usize], total: &Moments) -> Option<SplitChoice> {
        let col = &self.columns[feature];
        let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(col[r]), hi.max(col[r]))
        });
        if lo >= hi {
            return None;
        }
        let threshold = self.rng.gen_range(lo..hi);
        let mut left = Moments::default();
        for &r in rows {
            if col[r] <= threshold {
                left.add(self.w[r], self.y[r]);
            }
        }
        let right = total.sub(&left);
        if left.w <= 0.0 || right.w <= 0.0 {
            return None;
        }
        let gain =
            left.wy * left.wy / left.w + right.wy * right.wy / right.w - total.wy * total.wy / total.w;
        Some(SplitChoice {
            feature,
            threshold,
            gain,
        })
    }

    /// Draw candidates in random order, evaluating at least
    /// `features_per_split` of them and continuing past features that are
    /// constant within the node until one valid split turns up.
    fn choose<F>(&mut self, mut evaluate: F) -> Option<SplitChoice>
    where
        F: FnMut(&mut Self, usize) -> Option<SplitChoice>,
    {
        let order = self.candidate_order();
        let wanted = self.params.features_per_split.max(1);
        let mut best: Option<SplitChoice> = None;
        for (i, f) in order.into_iter().enumerate() {
            if i >= wanted && best.is_some() {
                break;
            }
            if let Some(choice) = evaluate(self, f) {
                if best.as_ref().map_or(true, |b| choice.gain > b.gain) {
                    best = Some(choice);
                }
            }
        }
        best.filter(|b| b.gain > 1e-14)
    }

    fn finish_split(&mut self, id: usize, m: &Moments, choice: &SplitChoice, left: usize, right: usize) {
        let scale = self.params.criterion.scale();
        let left_wv = self.nodes[left].impurity * self.nodes[left].weight;
        let right_wv = self.nodes[right].impurity * self.nodes[right].weight;
        let node = &mut self.nodes[id];
        node.feature = Some(choice.feature);
        node.threshold = choice.threshold;
        node.left = left;
        node.right = right;
        node.weighted_decrease = (scale * m.weighted_variance() - left_wv - right_wv).max(0.0);
    }

    fn grow_sorted(&mut self, lists: Vec<Vec<usize>>, depth: usize) -> usize {
        let m = self.moments(&lists[0]);
        let id = self.push_leaf(&m);
        if !self.can_split(&m, depth) {
            return id;
        }
        let choice = self.choose(|b, f| b.best_threshold(f, &lists[f], &m));
        let Some(choice) = choice else {
            return id;
        };
        let col = &self.columns[choice.feature];
        for &r in &lists[0] {
            self.goes_left[r] = col[r] <= choice.threshold;
        }
        let (mut left_lists, mut right_lists) = (Vec::new(), Vec::new());
        for list in lists {
            let (l, r): (Vec<usize>, Vec<usize>) = list.into_iter().partition(|&r| self.goes_left[r]);
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = self.grow_sorted(left_lists, depth + 1);
        let right = self.grow_sorted(right_lists, depth + 1);
        self.finish_split(id, &m, &choice, left, right);
        id
    }

    fn grow_random(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let m = self.moments(&rows);
        let id = self.push_leaf(&m);
        if !self.can_split(&m, depth) {
            return id;
        }
        let choice = self.choose(|b, f| b.random_threshold(f, &rows, &m));
        let Some(choice) = choice else {
            return id;
        };
        let col = &self.columns[choice.feature];
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&r| col[r] <= choice.threshold);
        let left = self.grow_random(l, depth + 1);
        let right = self.grow_random(r, depth + 1);
        self.finish_split(id, &m, &choice, left, right);
        id
    }
}

/// Grow a tree choosing, at every node, the best midpoint threshold over a
/// random subset of features.
///
/// `presorted` holds, per feature, the participating rows ordered by that
/// feature (see [`presort`]); rows with zero weight may be left out.
pub fn grow_best<R: Rng>(
    columns: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    presorted: Vec<Vec<usize>>,
    params: GrowParams,
    rng: &mut R,
) -> Tree {
    let mut builder = Builder {
        columns,
        y,
        w,
        params,
        rng,
        nodes: Vec::new(),
        goes_left: vec![false; y.len()],
    };
    builder.grow_sorted(presorted, 0);
    Tree {
        nodes: builder.nodes,
    }
}

/// Grow an extremely randomized tree: one uniform random threshold per
/// candidate feature, the best of those taken.
pub fn grow_random<R: Rng>(
    columns: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    rows: Vec<usize>,
    params: GrowParams,
    rng: &mut R,
) -> Tree {
    let mut builder = Builder {
        columns,
        y,
        w,
        params,
        rng,
        nodes: Vec::new(),
        goes_left: Vec::new(),
    };
    builder.grow_random(rows, 0);
    Tree {
        nodes: builder.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(criterion: Criterion) -> GrowParams {
        GrowParams {
            max_depth: 8,
            min_samples_split: 2.0,
            features_per_split: 2,
            criterion,
        }
    }

    #[test]
    fn separable_feature_gives_pure_root_split() {
        let columns = vec![vec![0.0, 1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0, 5.0]];
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let w = vec![1.0; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = grow_best(&columns, &y, &w, presort(&columns), params(Criterion::Gini), &mut rng);
        assert_eq!(tree.root().feature, Some(0));
        assert_eq!(tree.root().threshold, 1.5);
        assert_eq!(tree.depth(), 1);
        assert!((tree.root().impurity - 0.5).abs() < 1e-12);
        // whole root impurity removed: 4 samples * 0.5
        assert!((tree.root().weighted_decrease - 2.0).abs() < 1e-12);
        assert_eq!(tree.importances(2), vec![0.5, 0.0]);
        assert_eq!(tree.predict(&[0.5, 0.0]), 0.0);
        assert_eq!(tree.predict(&[2.5, 0.0]), 1.0);
    }

    #[test]
    fn weights_act_as_multiplicities() {
        let columns = vec![vec![0.0, 1.0, 2.0]];
        let y = vec![0.0, 1.0, 1.0];
        let w = vec![2.0, 0.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sorted = vec![vec![0, 2]];
        let tree = grow_best(&columns, &y, &w, sorted, params(Criterion::Gini), &mut rng);
        assert_eq!(tree.root().weight, 3.0);
        assert_eq!(tree.root().threshold, 1.0);
    }

    #[test]
    fn random_tree_fits_training_data() {
        let columns = vec![(0..50).map(|i| i as f64).collect::<Vec<_>>()];
        let y: Vec<f64> = (0..50).map(|i| if i % 10 < 5 { 0.0 } else { 1.0 }).collect();
        let w = vec![1.0; 50];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = GrowParams {
            max_depth: 64,
            ..params(Criterion::Gini)
        };
        let tree = grow_random(&columns, &y, &w, (0..50).collect(), p, &mut rng);
        for i in 0..50 {
            assert_eq!(tree.predict(&[i as f64]), y[i]);
        }
    }

    #[test]
    fn depth_limit_respected() {
        let columns = vec![(0..64).map(|i| i as f64).collect::<Vec<_>>()];
        let y: Vec<f64> = (0..64).map(|i| (i % 2) as f64).collect();
        let w = vec![1.0; 64];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = GrowParams {
            max_depth: 3,
            ..params(Criterion::Variance)
        };
        let tree = grow_best(&columns, &y, &w, presort(&columns), p, &mut rng);
        assert!(tree.depth() <= 3);
    }
}
