//! Clustering-benchmark machinery: internal metrics (silhouette,
//! Calinski-Harabasz), k-means and agglomerative techniques behind a plugin
//! trait, hyperparameter search by seeded random draws, and rank-stability
//! reports across dataset sets.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ClamsError, Result};
use crate::evm::spearman_rho;
use crate::types::{Clustering, Scatterplot};
use crate::util::{derive_seed, par_map_range};

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// Groups point indices by label, ignoring unassigned (−1) points.
fn cluster_members(labels: &[i64]) -> BTreeMap<i64, Vec<usize>> {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            groups.entry(l).or_default().push(i);
        }
    }
    groups
}

/// Mean silhouette coefficient over assigned points; singletons contribute 0.
pub fn silhouette(plot: &Scatterplot, clustering: &Clustering) -> Result<f64> {
    clustering.validate_for(plot)?;
    let pts = plot.points();
    let groups = cluster_members(clustering.labels());
    let assigned: usize = groups.values().map(|m| m.len()).sum();
    if assigned < 3 {
        return Err(ClamsError::Precondition(format!(
            "silhouette needs at least 3 assigned points, got {assigned}"
        )));
    }
    if groups.len() < 2 {
        return Err(ClamsError::SingleCluster);
    }
    let mut sum = 0.0;
    for (label, members) in &groups {
        for &i in members {
            if members.len() == 1 {
                continue; // singleton: s = 0
            }
            let a: f64 = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| dist(pts[i], pts[j]))
                .sum::<f64>()
                / (members.len() - 1) as f64;
            let b = groups
                .iter()
                .filter(|(other, _)| *other != label)
                .map(|(_, om)| {
                    om.iter().map(|&j| dist(pts[i], pts[j])).sum::<f64>() / om.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                sum += (b - a) / denom;
            }
        }
    }
    Ok(sum / assigned as f64)
}

/// Calinski-Harabasz index: between-cluster over within-cluster variance
/// ratio. Zero within-cluster scatter returns the +∞ sentinel.
pub fn calinski_harabasz(plot: &Scatterplot, clustering: &Clustering) -> Result<f64> {
    clustering.validate_for(plot)?;
    let pts = plot.points();
    let groups = cluster_members(clustering.labels());
    let n: usize = groups.values().map(|m| m.len()).sum();
    let k = groups.len();
    if k < 2 {
        return Err(ClamsError::SingleCluster);
    }
    if k >= n {
        return Err(ClamsError::Precondition(format!(
            "calinski-harabasz needs k < n, got k={k}, n={n}"
        )));
    }
    let mut grand = [0.0, 0.0];
    for members in groups.values() {
        for &i in members {
            grand[0] += pts[i][0];
            grand[1] += pts[i][1];
        }
    }
    grand[0] /= n as f64;
    grand[1] /= n as f64;
    let mut between = 0.0;
    let mut within = 0.0;
    for members in groups.values() {
        let m = members.len() as f64;
        let mut c = [0.0, 0.0];
        for &i in members {
            c[0] += pts[i][0];
            c[1] += pts[i][1];
        }
        c[0] /= m;
        c[1] /= m;
        between += m * dist2(c, grand);
        for &i in members {
            within += dist2(pts[i], c);
        }
    }
    if within == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

/// Lloyd k-means with k-means++ seeding. Deterministic given `seed`;
/// converges when no centroid moves more than 1e-6 or after 300 iterations.
pub fn kmeans(plot: &Scatterplot, k: usize, seed: u64) -> Result<Clustering> {
    Ok(kmeans_run(plot, k, seed)?.0)
}

/// Internal k-means returning the per-iteration within-cluster-SS trace.
fn kmeans_run(plot: &Scatterplot, k: usize, seed: u64) -> Result<(Clustering, Vec<f64>)> {
    let pts = plot.points();
    let n = pts.len();
    if k < 1 || k > n {
        return Err(ClamsError::Precondition(format!(
            "kmeans k = {k} outside 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // k-means++ seeding.
    let mut centroids: Vec<[f64; 2]> = vec![pts[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = pts.iter().map(|&p| dist2(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc >= target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.push(pts[idx]);
        for (i, &p) in pts.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, pts[idx]));
        }
    }

    let mut labels = vec![0usize; n];
    let mut wcss_trace = Vec::new();
    for _ in 0..300 {
        // Assignment; ties go to the lowest centroid index.
        let mut wcss = 0.0;
        for (i, &p) in pts.iter().enumerate() {
            let mut best = (f64::INFINITY, 0usize);
            for (c, &centroid) in centroids.iter().enumerate() {
                let d = dist2(p, centroid);
                if d < best.0 {
                    best = (d, c);
                }
            }
            labels[i] = best.1;
            wcss += best.0;
        }
        wcss_trace.push(wcss);
        // Update.
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, &p) in pts.iter().enumerate() {
            sums[labels[i]][0] += p[0];
            sums[labels[i]][1] += p[1];
            counts[labels[i]] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster with the point farthest from its
                // centroid (deterministic: max distance, then lowest index).
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(pts[a], centroids[labels[a]])
                            .partial_cmp(&dist2(pts[b], centroids[labels[b]]))
                            .unwrap()
                            .then(b.cmp(&a))
                    })
                    .unwrap();
                shift = f64::INFINITY;
                centroids[c] = pts[far];
                labels[far] = c;
                continue;
            }
            let next = [
                sums[c][0] / counts[c] as f64,
                sums[c][1] / counts[c] as f64,
            ];
            shift = shift.max(dist(centroids[c], next));
            centroids[c] = next;
        }
        if shift < 1e-6 {
            break;
        }
    }
    let labels: Vec<i64> = labels.into_iter().map(|l| l as i64).collect();
    Ok((Clustering::new(labels)?, wcss_trace))
}

/// Linkage criteria for agglomerative clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Linkage {
    Single,
    Average,
    Complete,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Average => "average",
            Linkage::Complete => "complete",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            other => Err(ClamsError::InvalidConfig(format!(
                "unknown linkage `{other}`"
            ))),
        }
    }
}

/// Exact agglomerative clustering cut at `k` clusters.
///
/// Merges the closest active pair under the linkage (Lance-Williams
/// updates), breaking distance ties by the lexicographically smallest
/// cluster indices, so successive cuts strictly refine each other.
pub fn agglomerative(plot: &Scatterplot, k: usize, linkage: Linkage) -> Result<Clustering> {
    let pts = plot.points();
    let n = pts.len();
    if k < 1 || k > n {
        return Err(ClamsError::Precondition(format!(
            "agglomerative k = {k} outside 1..={n}"
        )));
    }
    // Dense distance matrix between active clusters; entry None = inactive.
    let mut d: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dist(pts[i], pts[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut sizes: Vec<usize> = vec![1; n];
    let mut membership: Vec<usize> = (0..n).collect();
    let mut n_active = n;
    while n_active > k {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                if d[i][j] < best.0 {
                    best = (d[i][j], i, j);
                }
            }
        }
        let (_, i, j) = best;
        // Merge j into i.
        for x in 0..n {
            if !active[x] || x == i || x == j {
                continue;
            }
            d[i][x] = match linkage {
                Linkage::Single => d[i][x].min(d[j][x]),
                Linkage::Complete => d[i][x].max(d[j][x]),
                Linkage::Average => {
                    (sizes[i] as f64 * d[i][x] + sizes[j] as f64 * d[j][x])
                        / (sizes[i] + sizes[j]) as f64
                }
            };
            d[x][i] = d[i][x];
        }
        sizes[i] += sizes[j];
        active[j] = false;
        n_active -= 1;
        for m in membership.iter_mut() {
            if *m == j {
                *m = i;
            }
        }
    }
    // Compact labels in order of first occurrence.
    let mut remap: BTreeMap<usize, i64> = BTreeMap::new();
    let mut labels = Vec::with_capacity(n);
    for &m in &membership {
        let next = remap.len() as i64;
        labels.push(*remap.entry(m).or_insert(next));
    }
    Clustering::new(labels)
}

/// A named hyperparameter range; integer ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub integer: bool,
}

pub type Hyperparameters = BTreeMap<String, f64>;

/// A clustering technique with a searchable hyperparameter space.
pub trait ClusteringTechnique: Sync {
    fn name(&self) -> &str;
    /// Hyperparameter space; the default is `k` in [2, ⌊√n⌋].
    fn param_space(&self, n_points: usize) -> Vec<ParamRange> {
        let hi = ((n_points as f64).sqrt().floor() as usize).max(2);
        vec![ParamRange {
            name: "k".into(),
            lo: 2.0,
            hi: hi as f64,
            integer: true,
        }]
    }
    fn run(&self, plot: &Scatterplot, params: &Hyperparameters, seed: u64) -> Result<Clustering>;
}

/// K-means behind the technique interface.
pub struct KMeansTechnique;

impl ClusteringTechnique for KMeansTechnique {
    fn name(&self) -> &str {
        "kmeans"
    }

    fn run(&self, plot: &Scatterplot, params: &Hyperparameters, seed: u64) -> Result<Clustering> {
        let k = param_k(params, plot.len())?;
        kmeans(plot, k, seed)
    }
}

/// One agglomerative linkage behind the technique interface.
pub struct AgglomerativeTechnique {
    linkage: Linkage,
    name: String,
}

impl AgglomerativeTechnique {
    pub fn new(linkage: Linkage) -> Self {
        Self {
            linkage,
            name: format!("agglomerative-{}", linkage.name()),
        }
    }
}

impl ClusteringTechnique for AgglomerativeTechnique {
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&self, plot: &Scatterplot, params: &Hyperparameters, _seed: u64) -> Result<Clustering> {
        let k = param_k(params, plot.len())?;
        agglomerative(plot, k, self.linkage)
    }
}

fn param_k(params: &Hyperparameters, n: usize) -> Result<usize> {
    let k = params
        .get("k")
        .copied()
        .ok_or_else(|| ClamsError::InvalidConfig("missing hyperparameter `k`".into()))?;
    let k = k.round() as usize;
    if k < 1 || k > n {
        return Err(ClamsError::Precondition(format!("k = {k} outside 1..={n}")));
    }
    Ok(k)
}

/// The four shipped techniques: k-means plus the three agglomerative
/// linkages.
pub fn default_techniques() -> Vec<Box<dyn ClusteringTechnique>> {
    vec![
        Box::new(KMeansTechnique),
        Box::new(AgglomerativeTechnique::new(Linkage::Single)),
        Box::new(AgglomerativeTechnique::new(Linkage::Average)),
        Box::new(AgglomerativeTechnique::new(Linkage::Complete)),
    ]
}

/// Internal clustering metric selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricKind {
    Silhouette,
    CalinskiHarabasz,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Silhouette => "silhouette",
            MetricKind::CalinskiHarabasz => "calinski-harabasz",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "silhouette" => Ok(MetricKind::Silhouette),
            "ch" | "calinski-harabasz" => Ok(MetricKind::CalinskiHarabasz),
            other => Err(ClamsError::InvalidConfig(format!(
                "unknown metric `{other}` (use silhouette|ch)"
            ))),
        }
    }

    pub fn evaluate(self, plot: &Scatterplot, clustering: &Clustering) -> Result<f64> {
        match self {
            MetricKind::Silhouette => silhouette(plot, clustering),
            MetricKind::CalinskiHarabasz => calinski_harabasz(plot, clustering),
        }
    }
}

fn draw_params(space: &[ParamRange], rng: &mut ChaCha8Rng) -> Hyperparameters {
    let mut params = BTreeMap::new();
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

/// Best internal-metric value over `budget` seeded hyperparameter draws.
///
/// Draws that fail (for example a degenerate single-cluster cut) are
/// skipped; the score is non-decreasing in `budget` at a fixed seed.
pub fn best_metric_score(
    technique: &dyn ClusteringTechnique,
    plot: &Scatterplot,
    metric: MetricKind,
    budget: usize,
    seed: u64,
) -> Result<f64> {
    if budget < 1 {
        return Err(ClamsError::Precondition("budget must be >= 1".into()));
    }
    let space = technique.param_space(plot.len());
    let mut best: Option<f64> = None;
    for t in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xd4a3, t as u64]));
        let params = draw_params(&space, &mut rng);
        let run_seed = derive_seed(seed, &[0x4u64, t as u64]);
        let score = technique
            .run(plot, &params, run_seed)
            .and_then(|c| metric.evaluate(plot, &c));
        if let Ok(s) = score {
            if best.is_none_or(|b| s > b) {
                best = Some(s);
            }
        }
    }
    best.ok_or(ClamsError::AllRunsFailed(budget))
}

/// Technique scores and dense ranks for one dataset.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetRanking {
    pub dataset_id: String,
    /// Best metric score per technique, aligned to the report's
    /// `technique_names`.
    pub scores: Vec<f64>,
    /// 1 = best; ties broken by technique name so ranks are a permutation.
    pub ranks: Vec<usize>,
}

/// Rank-stability report over a dataset set.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub metric: String,
    pub technique_names: Vec<String>,
    pub per_dataset: Vec<DatasetRanking>,
    /// Mean pairwise Spearman ρ of technique rankings across datasets.
    pub mean_rho: f64,
}

/// Ranks techniques on every dataset by best metric score and reports the
/// mean pairwise Spearman correlation of the rankings.
pub fn rank_stability(
    datasets: &[Scatterplot],
    techniques: &[Box<dyn ClusteringTechnique>],
    metric: MetricKind,
    budget: usize,
    seed: u64,
) -> Result<BenchReport> {
    if datasets.len() < 2 {
        return Err(ClamsError::Precondition(format!(
            "rank stability needs >= 2 datasets, got {}",
            datasets.len()
        )));
    }
    if techniques.len() < 3 {
        return Err(ClamsError::Precondition(format!(
            "rank stability needs >= 3 techniques, got {}",
            techniques.len()
        )));
    }
    let technique_names: Vec<String> = techniques.iter().map(|t| t.name().to_string()).collect();
    let per_dataset: Result<Vec<DatasetRanking>> = par_map_range(datasets.len(), |di| {
        let plot = &datasets[di];
        // Seeds derive from the dataset id, so identical datasets get
        // identical search trajectories wherever they appear in the set.
        // All techniques share one draw sequence per dataset: paired
        // hyperparameter candidates make their scores comparable.
        let id_salt = fnv1a(plot.id().as_bytes());
        let search_seed = derive_seed(seed, &[id_salt]);
        let mut scores = Vec::with_capacity(techniques.len());
        for technique in techniques.iter() {
            let s = best_metric_score(technique.as_ref(), plot, metric, budget, search_seed)?;
            scores.push(s);
        }
        // Rank descending by score, ties by technique name. Scores within
        // 1e-9 relative are ties: techniques that produce the same
        // partition differ only by summation order in the metric.
        let tied = |a: f64, b: f64| {
            a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
        };
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            if tied(scores[a], scores[b]) {
                technique_names[a].cmp(&technique_names[b])
            } else {
                scores[b].partial_cmp(&scores[a]).unwrap()
            }
        });
        let mut ranks = vec![0usize; scores.len()];
        for (rank, &ti) in order.iter().enumerate() {
            ranks[ti] = rank + 1;
        }
        Ok(DatasetRanking {
            dataset_id: plot.id().to_string(),
            scores,
            ranks,
        })
    })
    .into_iter()
    .collect();
    let per_dataset = per_dataset?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..per_dataset.len() {
        for j in (i + 1)..per_dataset.len() {
            let a: Vec<f64> = per_dataset[i].ranks.iter().map(|&r| r as f64).collect();
            let b: Vec<f64> = per_dataset[j].ranks.iter().map(|&r| r as f64).collect();
            sum += spearman_rho(&a, &b)?;
            count += 1;
        }
    }
    Ok(BenchReport {
        metric: metric.name().to_string(),
        technique_names,
        per_dataset,
        mean_rho: sum / count as f64,
    })
}
