use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, Rng};

#[derive(Clone, Debug, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// `None` means `ceil(sqrt(n_features))`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            max_depth: 12,
            min_leaf: 2,
            features_per_split: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Bootstrap class counts reaching this leaf.
    Leaf { counts: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    /// `nodes[0]` is the root.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    fn leaf_for(&self, row: &[f64]) -> &[usize] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    /// Normalized Gini importance per feature; sums to 1 unless every tree is a single leaf.
    pub importances: Vec<f64>,
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
}

impl ForestModel {
    /// Mean of the per-tree leaf class frequencies.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for tree in &self.trees {
            let counts = tree.leaf_for(row);
            let total: usize = counts.iter().sum();
            for (o, &c) in out.iter_mut().zip(counts) {
                *o += c as f64 / total as f64;
            }
        }
        let k = self.trees.len() as f64;
        out.iter_mut().for_each(|p| *p /= k);
        out
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let p = self.predict_proba(row);
        let mut best = 0;
        for (c, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = c;
            }
        }
        best
    }
}

struct Builder<'a> {
    /// Column-major copy of the training matrix.
    columns: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    max_depth: usize,
    min_leaf: usize,
    mtry: usize,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    pairs: Vec<(f64, usize)>,
    feature_pool: Vec<usize>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut Rng) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(idx);
        self.nodes.push(Node::Leaf {
            counts: counts.clone(),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return id;
        }

        // Partial Fisher-Yates draws `mtry` distinct features.
        let nf = self.feature_pool.len();
        for k in 0..self.mtry {
            let j = rng.random_range(k..nf);
            self.feature_pool.swap(k, j);
        }
        let candidates: Vec<usize> = self.feature_pool[..self.mtry].to_vec();

        let Some(best) = self.best_split(idx, &counts, &candidates) else {
            return id;
        };
        self.importance[best.feature] += best.decrease;

        let col = &self.columns[best.feature];
        let mut split = 0;
        for k in 0..idx.len() {
            if col[idx[k]] <= best.threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&mut self, idx: &[usize], parent: &[usize], features: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let nf = n as f64;
        let parent_sq: f64 = parent.iter().map(|&c| (c * c) as f64).sum();
        // n * gini = n - sum(c^2) / n
        let parent_imp = nf - parent_sq / nf;
        let mut best: Option<BestSplit> = None;
        let mut best_imp = parent_imp;

        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for &f in features {
            let col = &self.columns[f];
            self.pairs.clear();
            self.pairs.extend(idx.iter().map(|&i| (col[i], self.y[i])));
            self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if self.pairs[0].0 == self.pairs[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(parent);
            let mut left_sq = 0.0;
            let mut right_sq = parent_sq;
            for s in 0..n - 1 {
                let c = self.pairs[s].1;
                left_sq += (2 * left[c] + 1) as f64;
                right_sq -= (2 * right[c] - 1) as f64;
                left[c] += 1;
                right[c] -= 1;
                let (a, b) = (self.pairs[s].0, self.pairs[s + 1].0);
                if a == b {
                    continue;
                }
                let nl = s + 1;
                let nr = n - nl;
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let imp = (nl as f64 - left_sq / nl as f64) + (nr as f64 - right_sq / nr as f64);
                if imp < best_imp - 1e-12 {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best_imp = imp;
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        decrease: parent_imp - imp,
                    });
                }
            }
        }
        best
    }
}

/// Bagged Gini trees over a row-major matrix `x` (`y.len()` rows of
/// `n_features` values).
pub fn train_random_forest(
    x: &[f64],
    n_features: usize,
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
) -> Result<ForestModel> {
    let n = y.len();
    if n_features == 0 {
        return Err(Error::Parameter("forest needs at least one feature".into()));
    }
    if n < 2 {
        return Err(Error::Input(format!("forest needs at least 2 rows, got {n}")));
    }
    if x.len() != n * n_features {
        return Err(Error::Shape(format!(
            "{} values for {n} rows x {n_features} features",
            x.len()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::Input(format!("class index {bad} >= {n_classes}")));
    }
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(Error::Parameter("n_trees and min_leaf must be at least 1".into()));
    }
    let mtry = params
        .features_per_split
        .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
        .clamp(1, n_features);

    let columns: Vec<Vec<f64>> = (0..n_features)
        .map(|j| (0..n).map(|i| x[i * n_features + j]).collect())
        .collect();

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut importances = vec![0.0; n_features];
    for t in 0..params.n_trees {
        let mut rng = seeded(derive_seed(params.seed, t as u64));
        let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut builder = Builder {
            columns: &columns,
            y,
            n_classes,
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
            mtry,
            nodes: Vec::new(),
            importance: vec![0.0; n_features],
            pairs: Vec::with_capacity(n),
            feature_pool: (0..n_features).collect(),
        };
        builder.build(&mut idx, 0, &mut rng);
        for (acc, v) in importances.iter_mut().zip(&builder.importance) {
            *acc += v / n as f64;
        }
        trees.push(DecisionTree {
            nodes: builder.nodes,
        });
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }
    Ok(ForestModel {
        trees,
        importances,
        n_features,
        n_classes,
        seed: params.seed,
    })
}

#[cfg(test)]
mod tests {
    use rand::Rng as _;

    use super::*;

    /// Feature 0 separates the classes at 0.5; features 1..10 are noise.
    fn separable(n: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
        let mut rng = seeded(seed);
        let mut x = Vec::with_capacity(n * 10);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            x.push(class as f64 + rng.random_range(-0.4..0.4));
            for _ in 1..10 {
                x.push(rng.random::<f64>());
            }
            y.push(class);
        }
        (x, y)
    }

    /// Brute-force oracle: every single-feature threshold split (between
    /// consecutive sorted values) and whether it separates perfectly.
    fn separating_features(x: &[f64], y: &[usize], nf: usize) -> Vec<usize> {
        let n = y.len();
        (0..nf)
            .filter(|&f| {
                let mut vals: Vec<f64> = (0..n).map(|i| x[i * nf + f]).collect();
                vals.sort_by(f64::total_cmp);
                vals.windows(2).any(|w| {
                    let t = (w[0] + w[1]) / 2.0;
                    let side = |i: usize| x[i * nf + f] <= t;
                    (0..n).all(|i| side(i) == (y[i] == y[0]))
                        || (0..n).all(|i| side(i) != (y[i] == y[0]))
                })
            })
            .collect()
    }

    #[test]
    fn separating_feature_dominates() {
        let (x, y) = separable(400, 11);
        assert_eq!(separating_features(&x, &y, 10), vec![0]);
        let forest = train_random_forest(&x, 10, &y, 2, &ForestParams::default()).unwrap();
        assert!(forest.importances[0] >= 0.9, "{:?}", forest.importances);
        let sum: f64 = forest.importances.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        for tree in &forest.trees {
            for node in &tree.nodes {
                if let Node::Split { feature, .. } = node {
                    assert!(*feature < 10);
                }
            }
            assert!(tree.depth() <= 12);
        }
    }

    #[test]
    fn permuting_noise_does_not_beat_signal() {
        let (mut x, y) = separable(400, 5);
        let mut rng = seeded(99);
        let n = y.len();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            x.swap(i * 10 + 3, j * 10 + 3);
        }
        let forest = train_random_forest(&x, 10, &y, 2, &ForestParams::default()).unwrap();
        assert!(forest.importances[3] < forest.importances[0]);
    }

    #[test]
    fn single_class_gives_leaves_and_zero_importance() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let forest = train_random_forest(&x, 2, &[0, 0, 0], 1, &ForestParams::default()).unwrap();
        assert!(forest.trees.iter().all(|t| t.nodes.len() == 1));
        assert!(forest.importances.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = separable(200, 3);
        let p = ForestParams {
            seed: 7,
            n_trees: 10,
            ..ForestParams::default()
        };
        let a = train_random_forest(&x, 10, &y, 2, &p).unwrap();
        let b = train_random_forest(&x, 10, &y, 2, &p).unwrap();
        assert_eq!(a, b);
        let bits = |m: &ForestModel| m.importances.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(train_random_forest(&[1.0], 1, &[0], 1, &ForestParams::default()).is_err());
        assert!(train_random_forest(&[], 0, &[], 1, &ForestParams::default()).is_err());
    }

    #[test]
    fn predicts_training_signal() {
        let (x, y) = separable(200, 8);
        let forest = train_random_forest(&x, 10, &y, 2, &ForestParams::default()).unwrap();
        let correct = (0..200).filter(|&i| forest.predict(&x[i * 10..i * 10 + 10]) == y[i]).count();
        assert!(correct >= 195);
    }
}
