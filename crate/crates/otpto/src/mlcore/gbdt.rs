//! Gradient-boosted regression trees with exact greedy splits, leaf-wise
//! growth, logistic and squared losses, row/feature subsampling, and
//! early stopping on a validation slice.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, rmse, Metric};
use super::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Binary,
    Regression,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbdtParams {
    pub objective: Objective,
    pub metric: Metric,
    pub learning_rate: f64,
    pub num_leaves: usize,
    pub max_depth: usize,
    pub min_child_samples: usize,
    pub subsample: f64,
    pub subsample_freq: usize,
    pub colsample_bytree: f64,
    pub n_estimators: usize,
    pub reg_alpha: f64,
    pub reg_lambda: f64,
    pub early_stopping_rounds: usize,
    pub seed: u64,
}

impl GbdtParams {
    /// Selection classifier defaults.
    pub fn pm1() -> Self {
        GbdtParams {
            objective: Objective::Binary,
            metric: Metric::Auc,
            learning_rate: 0.05,
            num_leaves: 31,
            max_depth: 5,
            min_child_samples: 5,
            subsample: 0.8,
            subsample_freq: 1,
            colsample_bytree: 0.8,
            n_estimators: 600,
            reg_alpha: 0.0,
            reg_lambda: 0.0,
            early_stopping_rounds: 50,
            seed: 42,
        }
    }

    /// Quantity regressor defaults.
    pub fn pm2() -> Self {
        GbdtParams {
            objective: Objective::Regression,
            metric: Metric::Rmse,
            learning_rate: 0.1,
            reg_alpha: 0.1,
            reg_lambda: 0.1,
            ..GbdtParams::pm1()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    #[cfg(test)]
    fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    #[cfg(test)]
    fn max_depth(&self) -> usize {
        fn depth(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + depth(nodes, *left).max(depth(nodes, *right)),
            }
        }
        depth(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbdtModel {
    pub params: GbdtParams,
    pub objective: Objective,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Number of trees used at prediction time.
    pub best_iteration: usize,
    pub num_features: usize,
    /// Validation metric at the best iteration, when a usable validation set
    /// was provided.
    pub valid_metric: Option<f64>,
    /// True when the validation labels could not support the configured
    /// metric (e.g. single-class AUC); early stopping was disabled.
    pub degenerate_valid_metric: bool,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    features: &'a [usize],
    min_child: usize,
    alpha: f64,
    lambda: f64,
    shrinkage: f64,
    /// Scratch side markers indexed by global row id.
    side: Vec<u8>,
}

#[derive(Clone)]
struct SplitChoice {
    gain: f64,
    feature_pos: usize,
    threshold: f64,
}

struct BuildLeaf {
    node_id: usize,
    /// Per feature position: member rows sorted by that feature value.
    sorted: Vec<Vec<u32>>,
    g_sum: f64,
    h_sum: f64,
    depth: usize,
    best: Option<SplitChoice>,
}

impl<'a> TreeBuilder<'a> {
    fn leaf_weight(&self, g: f64, h: f64) -> f64 {
        let denom = h + self.lambda;
        if denom < 1e-12 {
            return 0.0;
        }
        -soft_threshold(g, self.alpha) / denom
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        let denom = h + self.lambda;
        if denom < 1e-12 {
            return 0.0;
        }
        let t = soft_threshold(g, self.alpha);
        t * t / denom
    }

    fn best_split(&self, leaf: &BuildLeaf, max_depth: usize) -> Option<SplitChoice> {
        if leaf.depth >= max_depth {
            return None;
        }
        let n = leaf.sorted[0].len();
        if n < 2 * self.min_child {
            return None;
        }
        let parent = self.score(leaf.g_sum, leaf.h_sum);
        let mut best: Option<SplitChoice> = None;
        for (fpos, rows) in leaf.sorted.iter().enumerate() {
            let f = self.features[fpos];
            let mut gl = 0.0;
            let mut hl = 0.0;
            for pos in 0..n - 1 {
                let row = rows[pos] as usize;
                gl += self.grad[row];
                hl += self.hess[row];
                let cur = self.x[row][f];
                let next = self.x[rows[pos + 1] as usize][f];
                if next == cur {
                    continue;
                }
                let left_n = pos + 1;
                let right_n = n - left_n;
                if left_n < self.min_child || right_n < self.min_child {
                    continue;
                }
                let gain = self.score(gl, hl)
                    + self.score(leaf.g_sum - gl, leaf.h_sum - hl)
                    - parent;
                let threshold = cur + (next - cur) / 2.0;
                let better = match &best {
                    None => gain > 1e-12,
                    Some(b) => {
                        gain > b.gain + 1e-15
                            || ((gain - b.gain).abs() <= 1e-15
                                && (fpos < b.feature_pos
                                    || (fpos == b.feature_pos && threshold < b.threshold)))
                    }
                };
                if better && gain > 1e-12 {
                    best = Some(SplitChoice {
                        gain,
                        feature_pos: fpos,
                        threshold,
                    });
                }
            }
        }
        best
    }

    fn split_leaf(&mut self, leaf: BuildLeaf, choice: &SplitChoice) -> (BuildLeaf, BuildLeaf) {
        let f = self.features[choice.feature_pos];
        for &row in &leaf.sorted[choice.feature_pos] {
            self.side[row as usize] = if self.x[row as usize][f] <= choice.threshold {
                0
            } else {
                1
            };
        }
        let mut left_sorted = Vec::with_capacity(leaf.sorted.len());
        let mut right_sorted = Vec::with_capacity(leaf.sorted.len());
        for rows in &leaf.sorted {
            let mut l = Vec::new();
            let mut r = Vec::new();
            for &row in rows {
                if self.side[row as usize] == 0 {
                    l.push(row);
                } else {
                    r.push(row);
                }
            }
            left_sorted.push(l);
            right_sorted.push(r);
        }
        let mut gl = 0.0;
        let mut hl = 0.0;
        for &row in &left_sorted[0] {
            gl += self.grad[row as usize];
            hl += self.hess[row as usize];
        }
        let left = BuildLeaf {
            node_id: 0,
            sorted: left_sorted,
            g_sum: gl,
            h_sum: hl,
            depth: leaf.depth + 1,
            best: None,
        };
        let right = BuildLeaf {
            node_id: 0,
            sorted: right_sorted,
            g_sum: leaf.g_sum - gl,
            h_sum: leaf.h_sum - hl,
            depth: leaf.depth + 1,
            best: None,
        };
        (left, right)
    }

    fn build(&mut self, rows: &[u32], num_leaves: usize, max_depth: usize) -> Tree {
        let mut tree = Tree {
            nodes: vec![Node::Leaf { value: 0.0 }],
        };
        let mut sorted = Vec::with_capacity(self.features.len());
        for &f in self.features {
            let mut idx: Vec<u32> = rows.to_vec();
            idx.sort_by(|&a, &b| {
                self.x[a as usize][f]
                    .total_cmp(&self.x[b as usize][f])
                    .then(a.cmp(&b))
            });
            sorted.push(idx);
        }
        let mut g_sum = 0.0;
        let mut h_sum = 0.0;
        for &row in rows {
            g_sum += self.grad[row as usize];
            h_sum += self.hess[row as usize];
        }
        let mut root = BuildLeaf {
            node_id: 0,
            sorted,
            g_sum,
            h_sum,
            depth: 0,
            best: None,
        };
        root.best = self.best_split(&root, max_depth);
        let mut leaves = vec![root];

        while leaves.len() < num_leaves {
            // pick the splittable leaf with the highest gain; ties go to the
            // earliest-created leaf
            let mut pick: Option<usize> = None;
            for (i, leaf) in leaves.iter().enumerate() {
                if let Some(choice) = &leaf.best {
                    let better = match pick {
                        None => true,
                        Some(p) => choice.gain > leaves[p].best.as_ref().unwrap().gain + 1e-15,
                    };
                    if better {
                        pick = Some(i);
                    }
                }
            }
            let Some(pick) = pick else { break };
            let leaf = leaves.swap_remove(pick);
            let choice = leaf.best.clone().unwrap();
            let node_id = leaf.node_id;
            let (mut left, mut right) = self.split_leaf(leaf, &choice);
            left.node_id = tree.nodes.len();
            tree.nodes.push(Node::Leaf { value: 0.0 });
            right.node_id = tree.nodes.len();
            tree.nodes.push(Node::Leaf { value: 0.0 });
            tree.nodes[node_id] = Node::Split {
                feature: self.features[choice.feature_pos],
                threshold: choice.threshold,
                left: left.node_id,
                right: right.node_id,
            };
            left.best = self.best_split(&left, max_depth);
            right.best = self.best_split(&right, max_depth);
            leaves.push(left);
            leaves.push(right);
        }

        for leaf in &leaves {
            let value = self.shrinkage * self.leaf_weight(leaf.g_sum, leaf.h_sum);
            tree.nodes[leaf.node_id] = Node::Leaf { value };
        }
        tree
    }
}

fn validate_features(x: &[Vec<f64>], cols: usize) -> Result<(), MlError> {
    for (row, r) in x.iter().enumerate() {
        if r.len() != cols {
            return Err(MlError::RaggedMatrix {
                row,
                expected: cols,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(MlError::NonFinite);
        }
    }
    Ok(())
}

fn metric_is_higher_better(metric: Metric) -> bool {
    matches!(metric, Metric::Auc)
}

fn compute_metric(
    metric: Metric,
    objective: Objective,
    labels: &[f64],
    raw: &[f64],
) -> Result<f64, MlError> {
    let scores: Vec<f64> = match objective {
        Objective::Binary => raw.iter().map(|&r| sigmoid(r)).collect(),
        Objective::Regression => raw.to_vec(),
    };
    match metric {
        Metric::Auc => auc(labels, &scores),
        Metric::Rmse => rmse(labels, &scores),
    }
}

/// Stage-wise boosting with exact greedy splits. Deterministic given the
/// seed. An empty validation set disables early stopping.
pub fn train_gbdt(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    valid_x: &[Vec<f64>],
    valid_y: &[f64],
    params: &GbdtParams,
) -> Result<GbdtModel, MlError> {
    if train_x.is_empty() {
        return Err(MlError::EmptyTrainingSet);
    }
    let cols = train_x[0].len();
    if cols == 0 {
        return Err(MlError::EmptyInput);
    }
    validate_features(train_x, cols)?;
    validate_features(valid_x, cols)?;
    if train_y.len() != train_x.len() || valid_y.len() != valid_x.len() {
        return Err(MlError::LengthMismatch {
            labels: train_y.len(),
            scores: train_x.len(),
        });
    }

    let n = train_x.len();
    let base_score = match params.objective {
        Objective::Regression => train_y.iter().sum::<f64>() / n as f64,
        Objective::Binary => {
            let p = (train_y.iter().sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
            (p / (1.0 - p)).ln()
        }
    };

    // A validation slice that cannot support the metric (single-class AUC)
    // disables early stopping rather than failing the whole training run.
    let valid_usable = !valid_x.is_empty()
        && !(params.metric == Metric::Auc
            && (valid_y.iter().all(|&y| y > 0.5) || valid_y.iter().all(|&y| y <= 0.5)));
    let degenerate = !valid_x.is_empty() && !valid_usable;

    let mut raw_train = vec![base_score; n];
    let mut raw_valid = vec![base_score; valid_x.len()];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let all_rows: Vec<u32> = (0..n as u32).collect();
    let mut sampled_rows = all_rows.clone();
    let mut trees: Vec<Tree> = Vec::new();
    let higher_better = metric_is_higher_better(params.metric);
    let mut best_metric = if higher_better { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut best_iteration = 0usize;
    let mut rounds_since_best = 0usize;

    for iter in 0..params.n_estimators {
        if params.subsample < 1.0 {
            let resample = if params.subsample_freq == 0 {
                iter == 0
            } else {
                iter % params.subsample_freq == 0
            };
            if resample {
                let k = ((params.subsample * n as f64).floor() as usize).max(1).min(n);
                let mut picked = rand::seq::index::sample(&mut rng, n, k).into_vec();
                picked.sort_unstable();
                sampled_rows = picked.into_iter().map(|i| i as u32).collect();
            }
        }
        let features: Vec<usize> = if params.colsample_bytree < 1.0 {
            let k = ((params.colsample_bytree * cols as f64).ceil() as usize)
                .max(1)
                .min(cols);
            let mut picked = rand::seq::index::sample(&mut rng, cols, k).into_vec();
            picked.sort_unstable();
            picked
        } else {
            (0..cols).collect()
        };

        match params.objective {
            Objective::Binary => {
                for &row in &sampled_rows {
                    let r = row as usize;
                    let p = sigmoid(raw_train[r]);
                    grad[r] = p - train_y[r];
                    hess[r] = (p * (1.0 - p)).max(1e-16);
                }
            }
            Objective::Regression => {
                for &row in &sampled_rows {
                    let r = row as usize;
                    grad[r] = raw_train[r] - train_y[r];
                    hess[r] = 1.0;
                }
            }
        }

        let mut builder = TreeBuilder {
            x: train_x,
            grad: &grad,
            hess: &hess,
            features: &features,
            min_child: params.min_child_samples,
            alpha: params.reg_alpha,
            lambda: params.reg_lambda,
            shrinkage: params.learning_rate,
            side: vec![0; n],
        };
        let tree = builder.build(&sampled_rows, params.num_leaves.max(2), params.max_depth.max(1));

        for (i, row) in train_x.iter().enumerate() {
            raw_train[i] += tree.predict_row(row);
        }
        for (i, row) in valid_x.iter().enumerate() {
            raw_valid[i] += tree.predict_row(row);
        }
        trees.push(tree);

        if valid_usable {
            let m = compute_metric(params.metric, params.objective, valid_y, &raw_valid)?;
            let improved = if higher_better { m > best_metric } else { m < best_metric };
            if improved {
                best_metric = m;
                best_iteration = trees.len();
                rounds_since_best = 0;
            } else {
                rounds_since_best += 1;
                if params.early_stopping_rounds > 0
                    && rounds_since_best >= params.early_stopping_rounds
                {
                    break;
                }
            }
        }
    }

    if !valid_usable {
        best_iteration = trees.len();
    }

    Ok(GbdtModel {
        params: params.clone(),
        objective: params.objective,
        base_score,
        trees,
        best_iteration,
        num_features: cols,
        valid_metric: if valid_usable { Some(best_metric) } else { None },
        degenerate_valid_metric: degenerate,
    })
}

/// Sum of tree outputs up to the best iteration plus the base score; binary
/// models apply the sigmoid link.
pub fn predict_gbdt(model: &GbdtModel, rows: &[Vec<f64>]) -> Result<Vec<f64>, MlError> {
    for r in rows {
        if r.len() != model.num_features {
            return Err(MlError::FeatureMismatch {
                expected: model.num_features,
                got: r.len(),
            });
        }
    }
    Ok(rows
        .iter()
        .map(|row| {
            let mut raw = model.base_score;
            for tree in &model.trees[..model.best_iteration] {
                raw += tree.predict_row(row);
            }
            match model.objective {
                Objective::Binary => sigmoid(raw),
                Objective::Regression => raw,
            }
        })
        .collect())
}

const MODEL_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: GbdtModel,
}

pub fn save_model<P: AsRef<Path>>(path: P, model: &GbdtModel) -> Result<(), MlError> {
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        model: model.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<GbdtModel, MlError> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.version != MODEL_FILE_VERSION {
        return Err(MlError::BadVersion(file.version));
    }
    Ok(file.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn separable_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let label = rng.gen_bool(0.5);
            let (cx, cy) = if label { (2.0, 2.0) } else { (-2.0, -2.0) };
            x.push(vec![cx + rng.gen::<f64>() * 0.5, cy + rng.gen::<f64>() * 0.5]);
            y.push(if label { 1.0 } else { 0.0 });
        }
        (x, y)
    }

    #[test]
    fn constant_regression_target_is_captured_by_base_score() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![4.0, 4.0, 4.0];
        let mut params = GbdtParams::pm2();
        params.n_estimators = 5;
        params.subsample = 1.0;
        let model = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        assert_eq!(model.base_score, 4.0);
        let preds = predict_gbdt(&model, &x).unwrap();
        assert!(rmse(&y, &preds).unwrap() < 1e-9);
    }

    #[test]
    fn separable_binary_data_reaches_high_auc() {
        let (x, y) = separable_data(200, 3);
        let mut params = GbdtParams::pm1();
        params.n_estimators = 50;
        let model = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        let preds = predict_gbdt(&model, &x).unwrap();
        assert!(auc(&y, &preds).unwrap() >= 0.99);
        assert!(preds.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn published_parameterizations_construct_and_respect_depth() {
        let (x, y) = separable_data(120, 11);
        let pm1 = GbdtParams::pm1();
        assert_eq!(pm1.learning_rate, 0.05);
        assert_eq!(pm1.num_leaves, 31);
        assert_eq!(pm1.max_depth, 5);
        assert_eq!(pm1.min_child_samples, 5);
        assert_eq!(pm1.n_estimators, 600);
        assert_eq!(pm1.early_stopping_rounds, 50);
        let pm2 = GbdtParams::pm2();
        assert_eq!(pm2.learning_rate, 0.1);
        assert_eq!(pm2.reg_alpha, 0.1);
        assert_eq!(pm2.reg_lambda, 0.1);
        let mut quick = pm1.clone();
        quick.n_estimators = 20;
        let model = train_gbdt(&x, &y, &[], &[], &quick).unwrap();
        for tree in &model.trees {
            assert!(tree.max_depth() <= 5);
            assert!(tree.leaf_count() <= 31);
        }
    }

    #[test]
    fn zero_tree_model_predicts_link_of_base() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0.0, 1.0];
        let mut params = GbdtParams::pm1();
        params.n_estimators = 1;
        let mut model = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        model.trees.clear();
        model.best_iteration = 0;
        let preds = predict_gbdt(&model, &x).unwrap();
        for &p in &preds {
            assert!((p - sigmoid(model.base_score)).abs() < 1e-12);
        }
    }

    #[test]
    fn feature_mismatch_errors() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = vec![0.0, 1.0];
        let mut params = GbdtParams::pm2();
        params.n_estimators = 2;
        let model = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        assert!(matches!(
            predict_gbdt(&model, &[vec![1.0]]),
            Err(MlError::FeatureMismatch { .. })
        ));
    }

    #[test]
    fn training_loss_is_monotone_in_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x: Vec<Vec<f64>> = (0..150)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r[0] - r[1] + rng.gen::<f64>() * 0.1).collect();
        let mut params = GbdtParams::pm2();
        params.subsample = 1.0;
        params.colsample_bytree = 1.0;
        params.n_estimators = 30;
        let model = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        // replay the staged predictions and check RMSE never increases
        let mut raw: Vec<f64> = vec![model.base_score; x.len()];
        let mut prev = rmse(&y, &raw).unwrap();
        for tree in &model.trees {
            for (i, row) in x.iter().enumerate() {
                raw[i] += tree.predict_row(row);
            }
            let cur = rmse(&y, &raw).unwrap();
            assert!(cur <= prev + 1e-9);
            prev = cur;
        }
    }

    #[test]
    fn early_stopping_records_best_iteration() {
        let (x, y) = separable_data(200, 5);
        let (vx, vy) = separable_data(80, 6);
        let mut params = GbdtParams::pm1();
        params.n_estimators = 200;
        params.early_stopping_rounds = 5;
        let model = train_gbdt(&x, &y, &vx, &vy, &params).unwrap();
        assert!(model.best_iteration >= 1);
        assert!(model.best_iteration <= model.trees.len());
        assert!(model.valid_metric.unwrap() > 0.99);
    }

    #[test]
    fn single_class_validation_flags_degenerate_metric() {
        let (x, y) = separable_data(60, 8);
        let vx = vec![vec![2.0, 2.0], vec![2.1, 2.2]];
        let vy = vec![1.0, 1.0];
        let mut params = GbdtParams::pm1();
        params.n_estimators = 5;
        let model = train_gbdt(&x, &y, &vx, &vy, &params).unwrap();
        assert!(model.degenerate_valid_metric);
        assert!(model.valid_metric.is_none());
    }

    #[test]
    fn determinism_given_seed() {
        let (x, y) = separable_data(100, 21);
        let mut params = GbdtParams::pm1();
        params.n_estimators = 10;
        let a = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        let b = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn model_json_round_trip() {
        let (x, y) = separable_data(50, 2);
        let mut params = GbdtParams::pm1();
        params.n_estimators = 3;
        let model = train_gbdt(&x, &y, &[], &[], &params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();
        let a = predict_gbdt(&model, &x).unwrap();
        let b = predict_gbdt(&loaded, &x).unwrap();
        assert_eq!(a, b);
    }
}
