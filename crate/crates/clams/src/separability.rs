//! The separability regressor: a gradient-boosted ensemble of depth-limited
//! regression trees mapping pair features to a human-judged separability
//! score in [0, 1], with cross-validation, the feature-ablation harness, a
//! Monte-Carlo surrogate label oracle, and versioned model files.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ClamsError, Result};
use crate::features::{feature_vector, FeatureId, FeatureMask};
use crate::types::{GaussianComponent, PairFeatures};
use crate::util::{derive_seed, par_map_range, positive};

const MIN_TRAIN_ROWS: usize = 20;
const MODEL_FORMAT_VERSION: u32 = 1;

/// Where a training set's labels came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "clustme")]
    Clustme,
    #[serde(rename = "synthetic-surrogate")]
    SyntheticSurrogate,
    #[serde(rename = "external")]
    External,
}

/// Labeled pair-feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    rows: Vec<(PairFeatures, f64)>,
    provenance: Provenance,
}

impl TrainingSet {
    /// Validates labels into [0, 1].
    pub fn new(rows: Vec<(PairFeatures, f64)>, provenance: Provenance) -> Result<Self> {
        for (i, (_, label)) in rows.iter().enumerate() {
            if !label.is_finite() {
                return Err(ClamsError::NonFinite(format!("label at row {i}")));
            }
            if !(0.0..=1.0).contains(label) {
                return Err(ClamsError::OutOfRange(*label));
            }
        }
        Ok(Self { rows, provenance })
    }

    pub fn rows(&self) -> &[(PairFeatures, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Writes the training-data CSV format `dc,dsr,dd,sd,ed,ac,label`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("dc,dsr,dd,sd,ed,ac,label\n");
        for (f, label) in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f.dc, f.dsr, f.dd, f.sd, f.ed, f.ac, label
            ));
        }
        out
    }

    /// Reads the training-data CSV format; provenance becomes `External`.
    pub fn from_csv_reader(reader: impl std::io::Read, path: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let expected = ["dc", "dsr", "dd", "sd", "ed", "ac", "label"];
        {
            let headers = rdr.headers().map_err(|e| ClamsError::ParseError {
                path: path.to_string(),
                line: 1,
                msg: e.to_string(),
            })?;
            let cols: Vec<&str> = headers.iter().collect();
            if cols != expected {
                return Err(ClamsError::ParseError {
                    path: path.to_string(),
                    line: 1,
                    msg: format!("expected header `{}`", expected.join(",")),
                });
            }
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| ClamsError::ParseError {
                path: path.to_string(),
                line: 0,
                msg: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let mut vals = [0.0f64; 7];
            for (i, v) in vals.iter_mut().enumerate() {
                *v = record[i].parse().map_err(|_| ClamsError::ParseError {
                    path: path.to_string(),
                    line,
                    msg: format!("bad value `{}` in column {}", &record[i], expected[i]),
                })?;
            }
            let label = vals[6];
            if !(0.0..=1.0).contains(&label) {
                return Err(ClamsError::RangeError {
                    path: path.to_string(),
                    line,
                    msg: format!("label {label} outside [0, 1]"),
                });
            }
            rows.push((
                PairFeatures {
                    dc: vals[0],
                    dsr: vals[1],
                    dd: vals[2],
                    sd: vals[3],
                    ed: vals[4],
                    ac: vals[5],
                    pair: (0, 1),
                },
                label,
            ));
        }
        Self::new(rows, Provenance::External)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| ClamsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn (without replacement) per tree.
    pub subsample: f64,
    pub min_leaf: usize,
    pub cv_folds: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_trees: 300,
            max_depth: 3,
            learning_rate: 0.05,
            subsample: 0.8,
            min_leaf: 5,
            cv_folds: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 || self.max_depth < 1 || self.min_leaf < 1 {
            return Err(ClamsError::InvalidConfig(
                "n_trees, max_depth, min_leaf must be >= 1".into(),
            ));
        }
        if !positive(self.learning_rate) {
            return Err(ClamsError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(ClamsError::InvalidConfig("subsample must be in (0, 1]".into()));
        }
        if self.cv_folds < 2 {
            return Err(ClamsError::InvalidConfig("cv_folds must be >= 2".into()));
        }
        Ok(())
    }
}

/// One node of a regression tree; `left == -1` marks a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature_index: usize,
    pub threshold: f64,
    pub left: i32,
    pub right: i32,
    pub leaf_value: f64,
}

/// A depth-limited regression tree over masked feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = self.nodes[idx];
            if node.left < 0 {
                return node.leaf_value;
            }
            idx = if x[node.feature_index] < node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    fn max_feature_index(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.left >= 0)
            .map(|n| n.feature_index)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub provenance: Provenance,
    pub cv_r2: f64,
    pub seed: u64,
}

/// A trained separability regressor. Predictions are clamped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityModel {
    trees: Vec<Tree>,
    tree_weights: Vec<f64>,
    base_score: f64,
    mask: FeatureMask,
    training_meta: TrainingMeta,
}

impl SeparabilityModel {
    pub fn mask(&self) -> &FeatureMask {
        &self.mask
    }

    pub fn training_meta(&self) -> &TrainingMeta {
        &self.training_meta
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Predicted separability for a feature row, clamped to [0, 1].
    pub fn predict(&self, f: &PairFeatures) -> f64 {
        self.predict_vec(&feature_vector(f, &self.mask))
    }

    fn predict_vec(&self, x: &[f64]) -> f64 {
        let mut s = self.base_score;
        for (tree, w) in self.trees.iter().zip(&self.tree_weights) {
            s += w * tree.predict(x);
        }
        s.clamp(0.0, 1.0)
    }

    #[cfg(test)]
    fn push_zero_weight_tree(&mut self) {
        self.trees.push(Tree {
            nodes: vec![TreeNode {
                feature_index: 0,
                threshold: 0.0,
                left: -1,
                right: -1,
                leaf_value: 123.0,
            }],
        });
        self.tree_weights.push(0.0);
    }
}

// --- tree construction -----------------------------------------------------

struct TreeBuilder<'a> {
    xs: &'a [Vec<f64>],
    targets: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, rows: &[usize], depth: usize) -> i32 {
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&r| self.targets[r]).sum();
        let mean = sum / n as f64;
        if depth >= self.max_depth || n < 2 * self.min_leaf {
            return self.push_leaf(mean);
        }
        let Some((feature, threshold)) = self.best_split(rows, sum) else {
            return self.push_leaf(mean);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.xs[r][feature] < threshold);
        let idx = self.nodes.len();
        self.nodes.push(TreeNode {
            feature_index: feature,
            threshold,
            left: 0,
            right: 0,
            leaf_value: 0.0,
        });
        let left = self.build(&left_rows, depth + 1);
        let right = self.build(&right_rows, depth + 1);
        self.nodes[idx].left = left;
        self.nodes[idx].right = right;
        idx as i32
    }

    fn push_leaf(&mut self, value: f64) -> i32 {
        self.nodes.push(TreeNode {
            feature_index: 0,
            threshold: 0.0,
            left: -1,
            right: -1,
            leaf_value: value,
        });
        (self.nodes.len() - 1) as i32
    }

    /// Exhaustive best squared-error split; deterministic tie-breaking by
    /// (feature order, threshold order).
    fn best_split(&self, rows: &[usize], total_sum: f64) -> Option<(usize, f64)> {
        let n = rows.len();
        let n_features = self.xs[rows[0]].len();
        let base = total_sum * total_sum / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(n);
        for feature in 0..n_features {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.xs[r][feature], self.targets[r])));
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += sorted[i].1;
                let left_n = i + 1;
                if left_n < self.min_leaf || n - left_n < self.min_leaf {
                    continue;
                }
                if sorted[i].0 == sorted[i + 1].0 {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let gain = left_sum * left_sum / left_n as f64
                    + right_sum * right_sum / (n - left_n) as f64
                    - base;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    let threshold = 0.5 * (sorted[i].0 + sorted[i + 1].0);
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn fit_ensemble(xs: &[Vec<f64>], ys: &[f64], cfg: &TrainConfig) -> (f64, Vec<Tree>, Vec<f64>) {
    let n = xs.len();
    let base = ys.iter().sum::<f64>() / n as f64;
    let mut preds = vec![base; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut weights = Vec::with_capacity(cfg.n_trees);
    let sample_size = ((cfg.subsample * n as f64).round() as usize).clamp(1, n);
    let mut index_pool: Vec<usize> = (0..n).collect();
    for t in 0..cfg.n_trees {
        for i in 0..n {
            residuals[i] = ys[i] - preds[i];
        }
        let rows: Vec<usize> = if sample_size == n {
            (0..n).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0x5u64, t as u64]));
            // Partial Fisher-Yates, then sort for order-independent splits.
            for i in 0..sample_size {
                let j = rng.random_range(i..n);
                index_pool.swap(i, j);
            }
            let mut chosen = index_pool[..sample_size].to_vec();
            chosen.sort_unstable();
            chosen
        };
        let mut builder = TreeBuilder {
            xs,
            targets: &residuals,
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
            nodes: Vec::new(),
        };
        builder.build(&rows, 0);
        let tree = Tree { nodes: builder.nodes };
        for i in 0..n {
            preds[i] += cfg.learning_rate * tree.predict(&xs[i]);
        }
        trees.push(tree);
        weights.push(cfg.learning_rate);
    }
    (base, trees, weights)
}

fn masked_matrix(data: &TrainingSet, mask: &FeatureMask) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs = data
        .rows()
        .iter()
        .map(|(f, _)| feature_vector(f, mask))
        .collect();
    let ys = data.rows().iter().map(|(_, y)| *y).collect();
    (xs, ys)
}

/// R² of predictions against actuals; zero target variance maps to 0.
fn r_squared(actual: &[f64], predicted: &[f64]) -> f64 {
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean) * (y - mean)).sum();
    // Labels live in [0, 1]; anything this small is summation roundoff of a
    // constant target, not variance.
    if ss_tot <= 1e-20 {
        return 0.0;
    }
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    1.0 - ss_res / ss_tot
}

/// Trains a gradient-boosted separability model on the masked features.
///
/// `training_meta.cv_r2` is filled from [`cross_validate`] with the same
/// configuration, so every trained model carries its own held-out estimate.
pub fn train(data: &TrainingSet, cfg: &TrainConfig, mask: FeatureMask) -> Result<SeparabilityModel> {
    cfg.validate()?;
    mask.validate()?;
    if data.len() < MIN_TRAIN_ROWS {
        return Err(ClamsError::TooFewRows {
            got: data.len(),
            min: MIN_TRAIN_ROWS,
        });
    }
    let cv_r2 = cross_validate(data, cfg, mask)?;
    let (xs, ys) = masked_matrix(data, &mask);
    let (base_score, trees, tree_weights) = fit_ensemble(&xs, &ys, cfg);
    Ok(SeparabilityModel {
        trees,
        tree_weights,
        base_score,
        mask,
        training_meta: TrainingMeta {
            provenance: data.provenance(),
            cv_r2,
            seed: cfg.seed,
        },
    })
}

/// Mean out-of-fold R² over `cfg.cv_folds` seeded folds.
pub fn cross_validate(data: &TrainingSet, cfg: &TrainConfig, mask: FeatureMask) -> Result<f64> {
    cfg.validate()?;
    mask.validate()?;
    let n = data.len();
    if n < MIN_TRAIN_ROWS {
        return Err(ClamsError::TooFewRows {
            got: n,
            min: MIN_TRAIN_ROWS,
        });
    }
    let folds = cfg.cv_folds.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[0xCFu64]));
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let (xs, ys) = masked_matrix(data, &mask);
    let scores = par_map_range(folds, |f| {
        let start = f * n / folds;
        let end = (f + 1) * n / folds;
        let test: &[usize] = &order[start..end];
        if test.is_empty() {
            return 0.0;
        }
        let train_rows: Vec<usize> = order[..start]
            .iter()
            .chain(order[end..].iter())
            .copied()
            .collect();
        let fold_xs: Vec<Vec<f64>> = train_rows.iter().map(|&i| xs[i].clone()).collect();
        let fold_ys: Vec<f64> = train_rows.iter().map(|&i| ys[i]).collect();
        let (base, trees, weights) = fit_ensemble(&fold_xs, &fold_ys, cfg);
        let model = SeparabilityModel {
            trees,
            tree_weights: weights,
            base_score: base,
            mask,
            training_meta: TrainingMeta {
                provenance: data.provenance(),
                cv_r2: f64::NAN,
                seed: cfg.seed,
            },
        };
        let predicted: Vec<f64> = test.iter().map(|&i| model.predict_vec(&xs[i])).collect();
        let actual: Vec<f64> = test.iter().map(|&i| ys[i]).collect();
        r_squared(&actual, &predicted)
    });
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// One row of an ablation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub removed: Vec<FeatureId>,
    pub r2: f64,
    /// Percent change of CV R² relative to the all-features baseline.
    pub pct_change: f64,
}

/// CV R² for the full mask, each single-feature removal, and each
/// pair removal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub full_r2: f64,
    pub singles: Vec<AblationRow>,
    pub pairs: Vec<AblationRow>,
}

impl AblationReport {
    /// Renders the table: baseline, single-removal row, and the pairwise
    /// lower triangle of percent changes.
    pub fn to_pretty_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("baseline (all features)  R2 = {:.4}\n\n", self.full_r2));
        out.push_str("single feature removed:\n        ");
        for row in &self.singles {
            out.push_str(&format!("{:>9}", row.removed[0].name().to_uppercase()));
        }
        out.push_str("\n  R2    ");
        for row in &self.singles {
            out.push_str(&format!("{:>9.4}", row.r2));
        }
        out.push_str("\n  change");
        for row in &self.singles {
            out.push_str(&format!("{:>8.2}%", row.pct_change));
        }
        out.push_str("\n\npair removed (percent change vs baseline):\n        ");
        let ids = FeatureId::ALL;
        for id in &ids[..ids.len() - 1] {
            out.push_str(&format!("{:>9}", id.name().to_uppercase()));
        }
        out.push('\n');
        for (i, row_id) in ids.iter().enumerate().skip(1) {
            out.push_str(&format!("  {:<6}", row_id.name().to_uppercase()));
            for col_id in ids.iter().take(i) {
                let cell = self
                    .pairs
                    .iter()
                    .find(|r| r.removed.contains(row_id) && r.removed.contains(col_id))
                    .map(|r| format!("{:>8.2}%", r.pct_change))
                    .unwrap_or_else(|| format!("{:>9}", "-"));
                out.push_str(&cell);
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the ablation harness: all features, minus each single feature,
/// minus each feature pair, reporting CV R² and percent change.
pub fn ablate(data: &TrainingSet, cfg: &TrainConfig) -> Result<AblationReport> {
    let full = FeatureMask::all();
    let full_r2 = cross_validate(data, cfg, full)?;
    let ids = FeatureId::ALL;
    let mut jobs: Vec<Vec<FeatureId>> = ids.iter().map(|&id| vec![id]).collect();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            jobs.push(vec![ids[i], ids[j]]);
        }
    }
    let results = par_map_range(jobs.len(), |j| {
        let removed = &jobs[j];
        let mask = full.without(removed);
        cross_validate(data, cfg, mask).map(|r2| AblationRow {
            removed: removed.clone(),
            r2,
            pct_change: (r2 - full_r2) / full_r2 * 100.0,
        })
    });
    let mut singles = Vec::new();
    let mut pairs = Vec::new();
    for row in results {
        let row = row?;
        if row.removed.len() == 1 {
            singles.push(row);
        } else {
            pairs.push(row);
        }
    }
    Ok(AblationReport {
        full_r2,
        singles,
        pairs,
    })
}

/// Monte-Carlo surrogate separability label: `1 − 2·ε̂`, where ε̂ estimates the
/// Bayes misclassification rate of the weighted two-component mixture.
///
/// This is a synthetic stand-in for pooled human judgments, not a claim about
/// perception; models trained on it carry `synthetic-surrogate` provenance.
/// Arguments are canonically ordered before sampling, so the value is exactly
/// symmetric.
pub fn surrogate_separability(
    c1: &GaussianComponent,
    c2: &GaussianComponent,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    if mc_samples < 100 {
        return Err(ClamsError::Precondition(format!(
            "mc_samples = {mc_samples} below 100"
        )));
    }
    let key = |c: &GaussianComponent| {
        (
            c.center()[0],
            c.center()[1],
            c.major_sd(),
            c.minor_sd(),
            c.angle(),
            c.soft_count(),
            c.weight(),
        )
    };
    let (a, b) = if key(c1) <= key(c2) { (c1, c2) } else { (c2, c1) };
    let wa = a.weight() / (a.weight() + b.weight());
    let wb = 1.0 - wa;
    let (lwa, lwb) = (wa.ln(), wb.ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors_a = 0usize;
    for _ in 0..mc_samples {
        let p = a.sample(&mut rng);
        if lwb + b.log_density(p) > lwa + a.log_density(p) {
            errors_a += 1;
        }
    }
    let mut errors_b = 0usize;
    for _ in 0..mc_samples {
        let p = b.sample(&mut rng);
        if lwa + a.log_density(p) >= lwb + b.log_density(p) {
            errors_b += 1;
        }
    }
    let eps = wa * errors_a as f64 / mc_samples as f64 + wb * errors_b as f64 / mc_samples as f64;
    Ok((1.0 - 2.0 * eps).clamp(0.0, 1.0))
}

// --- model files -------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    mask: FeatureMask,
    base_score: f64,
    trees: Vec<Tree>,
    tree_weights: Vec<f64>,
    training_meta: TrainingMeta,
    checksum: String,
}

fn payload_checksum(trees: &[Tree], weights: &[f64]) -> String {
    let bytes = serde_json::to_vec(&(trees, weights)).expect("tree payload serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes a model to versioned, checksummed JSON.
pub fn save_model(model: &SeparabilityModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        mask: model.mask,
        base_score: model.base_score,
        checksum: payload_checksum(&model.trees, &model.tree_weights),
        trees: model.trees.clone(),
        tree_weights: model.tree_weights.clone(),
        training_meta: model.training_meta,
    };
    let json = serde_json::to_string_pretty(&file).expect("model serializes");
    std::fs::write(path, json).map_err(|e| ClamsError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Loads a model file, verifying the format version and checksum.
pub fn load_model(path: impl AsRef<Path>) -> Result<SeparabilityModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ClamsError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| {
        ClamsError::FormatVersionMismatch(format!("{}: {e}", path.display()))
    })?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(ClamsError::FormatVersionMismatch(format!(
            "file version {} != supported {MODEL_FORMAT_VERSION}",
            file.format_version
        )));
    }
    let expected = payload_checksum(&file.trees, &file.tree_weights);
    if expected != file.checksum {
        return Err(ClamsError::ChecksumMismatch {
            expected,
            found: file.checksum,
        });
    }
    if file.trees.len() != file.tree_weights.len() {
        return Err(ClamsError::FormatVersionMismatch(
            "tree and weight counts differ".into(),
        ));
    }
    file.mask.validate()?;
    let arity = file.mask.count();
    for tree in &file.trees {
        if tree.max_feature_index() >= arity {
            return Err(ClamsError::FormatVersionMismatch(format!(
                "tree references feature index {} but mask has {arity} features",
                tree.max_feature_index()
            )));
        }
    }
    Ok(SeparabilityModel {
        trees: file.trees,
        tree_weights: file.tree_weights,
        base_score: file.base_score,
        mask: file.mask,
        training_meta: file.training_meta,
    })
}

/// Current on-disk model format version, echoed by the CLI.
pub fn model_format_version() -> u32 {
    MODEL_FORMAT_VERSION
}
