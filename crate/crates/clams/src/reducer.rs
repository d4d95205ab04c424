//! Accuracy-constrained ambiguity reduction over a pluggable parametric
//! embedder: phase 1 maximizes an embedding accuracy metric, phase 2
//! minimizes the ambiguity score subject to an accuracy-drift budget τ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambiguity::clams_score;
use crate::bench::{kmeans, Hyperparameters, ParamRange};
use crate::error::{ClamsError, Result};
use crate::gmm::GmmFitConfig;
use crate::separability::SeparabilityModel;
use crate::types::Scatterplot;
use crate::util::{derive_seed, positive};

/// A validated high-dimensional dataset (uniform row dimensionality ≥ 2,
/// finite values).
#[derive(Debug, Clone, PartialEq)]
pub struct HighDimDataset {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl HighDimDataset {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(ClamsError::EmptyInput(rows.len()));
        }
        let dim = rows[0].len();
        if dim < 2 {
            return Err(ClamsError::Precondition(format!(
                "dimensionality {dim} below 2"
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(ClamsError::LengthMismatch(row.len(), dim));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ClamsError::NonFinite(format!("row {i}")));
            }
        }
        Ok(Self { rows, dim })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reads a headerless CSV with d numeric columns per row. A first line
    /// that does not parse as numbers is treated as a header and skipped.
    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ClamsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let pathstr = path.display().to_string();
        let mut rows = Vec::new();
        for (li, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if li == 0 => continue, // header line
                Err(_) => {
                    return Err(ClamsError::ParseError {
                        path: pathstr,
                        line: li as u64 + 1,
                        msg: format!("bad numeric row `{line}`"),
                    })
                }
            }
        }
        Self::new(rows)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// A parametric 2-D embedder. Same (data, hyperparameters, seed) must give
/// an identical embedding.
pub trait Embedder: Sync {
    fn name(&self) -> &str;
    fn param_space(&self) -> Vec<ParamRange>;
    fn embed(
        &self,
        data: &HighDimDataset,
        params: &Hyperparameters,
        seed: u64,
    ) -> Result<Scatterplot>;
}

/// An embedding accuracy metric in [0, 1].
pub trait AccuracyMetric: Sync {
    fn name(&self) -> &str;
    fn eval(&self, data: &HighDimDataset, plot: &Scatterplot) -> Result<f64>;
}

/// Two-phase optimizer configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducerConfig {
    /// Accuracy-drift budget; |drift| = τ is accepted.
    pub tau: f64,
    pub budget_phase1: usize,
    pub budget_phase2: usize,
    pub seed: u64,
    /// GMM budget for the inner ambiguity scoring loop.
    pub gmm: GmmFitConfig,
}

impl Default for ReducerConfig {
    fn default() -> Self {
        Self {
            tau: 0.05,
            budget_phase1: 40,
            budget_phase2: 80,
            seed: 0,
            gmm: GmmFitConfig {
                k_max: 10,
                restarts: 2,
                max_iters: 100,
                ..Default::default()
            },
        }
    }
}

impl ReducerConfig {
    pub fn validate(&self) -> Result<()> {
        if !positive(self.tau) {
            return Err(ClamsError::InvalidConfig("tau must be > 0".into()));
        }
        if self.budget_phase1 < 1 || self.budget_phase2 < 1 {
            return Err(ClamsError::InvalidConfig("budgets must be >= 1".into()));
        }
        self.gmm.validate()
    }
}

/// Jacobi eigen-decomposition of a small symmetric matrix; returns
/// eigenvalues descending with matching eigenvectors (columns).
#[allow(clippy::needless_range_loop)]
fn symmetric_eigen(mut m: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = m.len();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        // Largest off-diagonal element.
        let mut off = 0.0;
        let (mut p, mut q) = (0, 1);
        for i in 0..d {
            for j in (i + 1)..d {
                if m[i][j].abs() > off {
                    off = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off < 1e-12 {
            break;
        }
        let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for i in 0..d {
            let (mip, miq) = (m[i][p], m[i][q]);
            m[i][p] = c * mip - s * miq;
            m[i][q] = s * mip + c * miq;
        }
        for j in 0..d {
            let (mpj, mqj) = (m[p][j], m[q][j]);
            m[p][j] = c * mpj - s * mqj;
            m[q][j] = s * mpj + c * mqj;
        }
        for i in 0..d {
            let (vip, viq) = (v[i][p], v[i][q]);
            v[i][p] = c * vip - s * viq;
            v[i][q] = s * vip + c * viq;
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| m[b][b].partial_cmp(&m[a][a]).unwrap().then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..d).map(|row| v[row][col]).collect();
            // Sign canonicalization: largest-magnitude entry positive.
            let lead = vec
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            if vec[lead] < 0.0 {
                for x in vec.iter_mut() {
                    *x = -*x;
                }
            }
            vec
        })
        .collect();
    (eigenvalues, eigenvectors)
}

/// Top-2 PCA projection of the dataset.
#[allow(clippy::needless_range_loop)]
fn pca_project(data: &HighDimDataset) -> Vec<[f64; 2]> {
    let n = data.len();
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for row in data.rows() {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x / n as f64;
        }
    }
    let mut cov = vec![vec![0.0; d]; d];
    for row in data.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[i][j] += di * (row[j] - mean[j]) / n as f64;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
    }
    let (_, vecs) = symmetric_eigen(cov);
    data.rows()
        .iter()
        .map(|row| {
            let mut p = [0.0, 0.0];
            for axis in 0..2 {
                for i in 0..d {
                    p[axis] += (row[i] - mean[i]) * vecs[axis][i];
                }
            }
            p
        })
        .collect()
}

/// The built-in embedder: per-axis scaled top-2 PCA with optional
/// contraction of each point toward its k-means(⌊√N⌋) centroid and seeded
/// Gaussian jitter.
///
/// Hyperparameters: `scale_x`, `scale_y`, `jitter` (sd of added noise),
/// `gamma` (contraction fraction in [0, 1]).
pub struct ToyEmbedder;

impl Embedder for ToyEmbedder {
    fn name(&self) -> &str {
        "pca-contract"
    }

    fn param_space(&self) -> Vec<ParamRange> {
        let real = |name: &str, lo: f64, hi: f64| ParamRange {
            name: name.into(),
            lo,
            hi,
            integer: false,
        };
        vec![
            real("gamma", 0.0, 0.9),
            real("jitter", 0.0, 1.0),
            real("scale_x", 0.5, 2.0),
            real("scale_y", 0.5, 2.0),
        ]
    }

    fn embed(
        &self,
        data: &HighDimDataset,
        params: &Hyperparameters,
        seed: u64,
    ) -> Result<Scatterplot> {
        let get = |name: &str, default: f64| params.get(name).copied().unwrap_or(default);
        let scale_x = get("scale_x", 1.0);
        let scale_y = get("scale_y", 1.0);
        let jitter = get("jitter", 0.0);
        let gamma = get("gamma", 0.0).clamp(0.0, 1.0);
        if jitter < 0.0 {
            return Err(ClamsError::InvalidConfig("jitter must be >= 0".into()));
        }
        let mut pts = pca_project(data);
        for p in &mut pts {
            p[0] *= scale_x;
            p[1] *= scale_y;
        }
        if gamma > 0.0 {
            let k = ((pts.len() as f64).sqrt().floor() as usize).max(1);
            let proj = Scatterplot::new("projection", pts.clone())?;
            let labels = kmeans(&proj, k, derive_seed(seed, &[0x6a]))?;
            let mut centroids = vec![[0.0f64; 2]; k];
            let mut counts = vec![0usize; k];
            for (p, &l) in pts.iter().zip(labels.labels()) {
                centroids[l as usize][0] += p[0];
                centroids[l as usize][1] += p[1];
                counts[l as usize] += 1;
            }
            for (c, &m) in centroids.iter_mut().zip(&counts) {
                if m > 0 {
                    c[0] /= m as f64;
                    c[1] /= m as f64;
                }
            }
            for (p, &l) in pts.iter_mut().zip(labels.labels()) {
                let c = centroids[l as usize];
                p[0] += gamma * (c[0] - p[0]);
                p[1] += gamma * (c[1] - p[1]);
            }
        }
        if jitter > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x71]));
            for p in &mut pts {
                let zx: f64 = rng.sample(rand_distr::StandardNormal);
                let zy: f64 = rng.sample(rand_distr::StandardNormal);
                p[0] += jitter * zx;
                p[1] += jitter * zy;
            }
        }
        Scatterplot::new("embedding", pts)
    }
}

/// k-nearest-neighbour preservation F1 between the high-dimensional data
/// and its embedding: harmonic mean of mean per-point precision and recall
/// of the two k-NN sets.
pub struct NeighborhoodF1 {
    pub k: usize,
}

fn knn_sets_highdim(data: &HighDimDataset, k: usize) -> Vec<Vec<usize>> {
    let n = data.len();
    let rows = data.rows();
    (0..n)
        .map(|i| {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d, j)
                })
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            dists.truncate(k);
            let mut set: Vec<usize> = dists.into_iter().map(|(_, j)| j).collect();
            set.sort_unstable();
            set
        })
        .collect()
}

fn knn_sets_2d(pts: &[[f64; 2]], k: usize) -> Vec<Vec<usize>> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let (dx, dy) = (pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
                    (dx * dx + dy * dy, j)
                })
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            dists.truncate(k);
            let mut set: Vec<usize> = dists.into_iter().map(|(_, j)| j).collect();
            set.sort_unstable();
            set
        })
        .collect()
}

/// Neighborhood-preservation F1 for an embedding; errors with `KTooLarge`
/// when `k >= N`.
pub fn neighborhood_f1(data: &HighDimDataset, plot: &Scatterplot, k: usize) -> Result<f64> {
    if data.len() != plot.len() {
        return Err(ClamsError::LengthMismatch(data.len(), plot.len()));
    }
    let n = data.len();
    if k >= n {
        return Err(ClamsError::KTooLarge { k, n });
    }
    if k == 0 {
        return Err(ClamsError::Precondition("k must be >= 1".into()));
    }
    let high = knn_sets_highdim(data, k);
    let low = knn_sets_2d(plot.points(), k);
    let mut precision = 0.0;
    let mut recall = 0.0;
    for i in 0..n {
        let overlap = intersection_size(&low[i], &high[i]) as f64;
        precision += overlap / low[i].len() as f64;
        recall += overlap / high[i].len() as f64;
    }
    precision /= n as f64;
    recall /= n as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

impl AccuracyMetric for NeighborhoodF1 {
    fn name(&self) -> &str {
        "neighborhood-f1"
    }

    fn eval(&self, data: &HighDimDataset, plot: &Scatterplot) -> Result<f64> {
        neighborhood_f1(data, plot, self.k)
    }
}

/// The two-phase loss: ambiguity of the candidate embedding when its
/// accuracy stays within τ of the phase-1 optimum, +∞ otherwise. Boundary
/// drift |m₁ − m| = τ is accepted.
#[allow(clippy::too_many_arguments)]
pub fn constrained_loss(
    h: &Hyperparameters,
    h1: &Hyperparameters,
    data: &HighDimDataset,
    embedder: &dyn Embedder,
    metric: &dyn AccuracyMetric,
    model: &SeparabilityModel,
    tau: f64,
    gmm: &GmmFitConfig,
    seed: u64,
) -> Result<f64> {
    let ref_embedding = embedder.embed(data, h1, derive_seed(seed, &[0x10]))?;
    let ref_accuracy = metric.eval(data, &ref_embedding)?;
    let embedding = embedder.embed(data, h, derive_seed(seed, &[0x11]))?;
    let accuracy = metric.eval(data, &embedding)?;
    if (ref_accuracy - accuracy).abs() > tau {
        return Ok(f64::INFINITY);
    }
    let mut cfg = *gmm;
    cfg.seed = derive_seed(seed, &[0x12]);
    Ok(clams_score(&embedding, model, &cfg)?.score())
}

/// Summary of one optimizer run.
#[derive(Debug, Clone, Serialize)]
pub struct ReducerReport {
    pub embedder: String,
    pub metric: String,
    pub tau: f64,
    pub h1: Hyperparameters,
    pub h2: Hyperparameters,
    pub accuracy_intermediate: f64,
    pub accuracy_final: f64,
    pub ambiguity_intermediate: f64,
    pub ambiguity_final: f64,
}

/// Full optimizer output, including both embeddings.
#[derive(Debug, Clone)]
pub struct ReducerRun {
    pub intermediate: Scatterplot,
    pub final_embedding: Scatterplot,
    pub report: ReducerReport,
}

/// Runs both phases: random search maximizing accuracy, then random search
/// minimizing the constrained ambiguity loss. The phase-1 optimum is always
/// a phase-2 candidate (with its embedding reused), so a finite optimum
/// exists, the τ constraint holds by construction, and the final ambiguity
/// never exceeds the intermediate one.
pub fn optimize(
    data: &HighDimDataset,
    embedder: &dyn Embedder,
    metric: &dyn AccuracyMetric,
    model: &SeparabilityModel,
    cfg: &ReducerConfig,
) -> Result<ReducerRun> {
    cfg.validate()?;
    let space = embedder.param_space();
    // Phase 1: maximize accuracy.
    let mut best1: Option<(f64, Hyperparameters, Scatterplot)> = None;
    for i in 0..cfg.budget_phase1 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[1, i as u64]));
        let h = draw(&space, &mut rng);
        let embedding = embedder.embed(data, &h, derive_seed(cfg.seed, &[2, i as u64]))?;
        let acc = metric.eval(data, &embedding)?;
        if best1.as_ref().is_none_or(|(a, _, _)| acc > *a) {
            best1 = Some((acc, h, embedding));
        }
    }
    let (acc1, h1, intermediate) = best1.expect("phase 1 budget >= 1");

    // Phase 2: minimize ambiguity subject to the drift budget. Candidate 0
    // is h1 itself, reusing the intermediate embedding.
    let score_of = |embedding: &Scatterplot, idx: usize| -> Result<f64> {
        let mut gmm = cfg.gmm;
        gmm.seed = derive_seed(cfg.seed, &[3, idx as u64]);
        Ok(clams_score(embedding, model, &gmm)?.score())
    };
    let ambiguity1 = score_of(&intermediate, 0)?;
    let mut best2 = (ambiguity1, h1.clone(), intermediate.clone(), acc1);
    for i in 1..cfg.budget_phase2 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[4, i as u64]));
        let h = draw(&space, &mut rng);
        let embedding = embedder.embed(data, &h, derive_seed(cfg.seed, &[5, i as u64]))?;
        let acc = metric.eval(data, &embedding)?;
        if (acc1 - acc).abs() > cfg.tau {
            continue; // loss is +∞
        }
        let loss = score_of(&embedding, i)?;
        if loss < best2.0 {
            best2 = (loss, h, embedding, acc);
        }
    }
    let (ambiguity2, h2, final_embedding, acc2) = best2;
    Ok(ReducerRun {
        report: ReducerReport {
            embedder: embedder.name().to_string(),
            metric: metric.name().to_string(),
            tau: cfg.tau,
            h1,
            h2,
            accuracy_intermediate: acc1,
            accuracy_final: acc2,
            ambiguity_intermediate: ambiguity1,
            ambiguity_final: ambiguity2,
        },
        intermediate,
        final_embedding,
    })
}

fn draw(space: &[ParamRange], rng: &mut ChaCha8Rng) -> Hyperparameters {
    let mut params = Hyperparameters::new();
    for range in space {
        let v = if range.integer {
            rng.random_range(range.lo as i64..=range.hi as i64) as f64
        } else {
            rng.random_range(range.lo..=range.hi)
        };
        params.insert(range.name.clone(), v);
    }
    params
}
