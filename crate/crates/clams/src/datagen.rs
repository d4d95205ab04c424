//! Synthetic stimulus generators (Gaussian pairs and multi-component scenes)
//! and the ingestion adapter for externally supplied pair-judgment exports.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ClamsError, Result};
use crate::features::pair_features;
use crate::separability::{surrogate_separability, Provenance, TrainingSet};
use crate::types::{canonicalize_angle, Clustering, GaussianComponent, Scatterplot};
use crate::util::{derive_seed, positive};

/// Parameters of one generating Gaussian component.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ComponentSpec {
    pub center: [f64; 2],
    pub major_sd: f64,
    pub minor_sd: f64,
    /// Major-axis direction; folded into [0, π) when realized.
    pub angle: f64,
    pub count: usize,
}

impl ComponentSpec {
    pub fn validate(&self) -> Result<()> {
        if !positive(self.minor_sd) || self.major_sd < self.minor_sd {
            return Err(ClamsError::InvalidConfig(format!(
                "need major_sd >= minor_sd > 0, got ({}, {})",
                self.major_sd, self.minor_sd
            )));
        }
        if self.count == 0 {
            return Err(ClamsError::InvalidConfig("component count is 0".into()));
        }
        Ok(())
    }

    /// The spec as a [`GaussianComponent`] with the given mixture weight;
    /// `soft_count` is the exact generating count.
    pub fn to_component(&self, weight: f64) -> Result<GaussianComponent> {
        GaussianComponent::new(
            self.center,
            self.major_sd,
            self.minor_sd,
            canonicalize_angle(self.angle),
            self.count as f64,
            weight,
        )
    }
}

/// A two-component stimulus specification.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PairSpec {
    pub a: ComponentSpec,
    pub b: ComponentSpec,
}

impl PairSpec {
    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.b.validate()?;
        if self.a.count < 10 || self.b.count < 10 {
            return Err(ClamsError::InvalidConfig(
                "pair components need at least 10 points each".into(),
            ));
        }
        Ok(())
    }

    pub fn total_points(&self) -> usize {
        self.a.count + self.b.count
    }

    /// Weighted components (weights proportional to counts).
    pub fn components(&self) -> Result<(GaussianComponent, GaussianComponent)> {
        let total = self.total_points() as f64;
        Ok((
            self.a.to_component(self.a.count as f64 / total)?,
            self.b.to_component(self.b.count as f64 / total)?,
        ))
    }
}

/// Samples the mixture described by `comps`, keeping per-point generating
/// labels. Points appear grouped by component, in component order.
pub fn sample_mixture(
    id: impl Into<String>,
    comps: &[ComponentSpec],
    seed: u64,
) -> Result<(Scatterplot, Clustering)> {
    if comps.is_empty() {
        return Err(ClamsError::InvalidConfig("no components to sample".into()));
    }
    let total: usize = comps.iter().map(|c| c.count).sum();
    let mut points = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for (ci, spec) in comps.iter().enumerate() {
        spec.validate()?;
        let comp = spec.to_component(1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[ci as u64]));
        for _ in 0..spec.count {
            points.push(comp.sample(&mut rng));
            labels.push(ci as i64);
        }
    }
    Ok((Scatterplot::new(id, points)?, Clustering::new(labels)?))
}

/// Draws a two-Gaussian stimulus scatterplot with exact per-component counts.
pub fn sample_pair(spec: &PairSpec, seed: u64) -> Result<Scatterplot> {
    spec.validate()?;
    let (plot, _) = sample_mixture("pair", &[spec.a, spec.b], seed)?;
    Ok(plot)
}

/// Uniform ranges the pair generator draws from.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PairRanges {
    /// Distance between the two centers.
    pub center_distance: (f64, f64),
    /// Minor-axis standard deviation of each component.
    pub sd: (f64, f64),
    /// Major/minor axis ratio (≥ 1).
    pub ellipticity: (f64, f64),
    /// Per-component point count.
    pub count: (usize, usize),
}

impl Default for PairRanges {
    fn default() -> Self {
        Self {
            center_distance: (0.0, 8.0),
            sd: (0.4, 2.0),
            ellipticity: (1.0, 3.0),
            count: (50, 200),
        }
    }
}

impl PairRanges {
    pub fn validate(&self) -> Result<()> {
        let ok = self.center_distance.0 >= 0.0
            && self.center_distance.1 >= self.center_distance.0
            && self.sd.0 > 0.0
            && self.sd.1 >= self.sd.0
            && self.ellipticity.0 >= 1.0
            && self.ellipticity.1 >= self.ellipticity.0
            && self.count.0 >= 10
            && self.count.1 >= self.count.0;
        if !ok {
            return Err(ClamsError::InvalidConfig(format!("bad pair ranges {self:?}")));
        }
        Ok(())
    }

    fn draw_component(&self, center: [f64; 2], rng: &mut ChaCha8Rng) -> ComponentSpec {
        let minor = rng.random_range(self.sd.0..=self.sd.1);
        let ratio = rng.random_range(self.ellipticity.0..=self.ellipticity.1);
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        let count = rng.random_range(self.count.0..=self.count.1);
        ComponentSpec {
            center,
            major_sd: minor * ratio,
            minor_sd: minor,
            angle,
            count,
        }
    }

    /// One pair spec: first component at the origin, second offset by a
    /// uniformly drawn distance and direction.
    pub fn draw_pair(&self, rng: &mut ChaCha8Rng) -> PairSpec {
        let d = rng.random_range(self.center_distance.0..=self.center_distance.1);
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let a = self.draw_component([0.0, 0.0], rng);
        let b = self.draw_component([d * phi.cos(), d * phi.sin()], rng);
        PairSpec { a, b }
    }
}

/// Generates a surrogate-labeled training set of `n_pairs` rows.
///
/// Features come from the TRUE generating parameters (no refitting); labels
/// from [`surrogate_separability`] with a per-row derived seed. The drawn
/// specs are returned alongside so labels can be recomputed and checked.
pub fn generate_training_set(
    n_pairs: usize,
    ranges: &PairRanges,
    mc_samples: usize,
    seed: u64,
) -> Result<(TrainingSet, Vec<PairSpec>)> {
    ranges.validate()?;
    if n_pairs < 20 {
        return Err(ClamsError::TooFewRows {
            got: n_pairs,
            min: 20,
        });
    }
    let specs: Vec<PairSpec> = {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x9a]));
        (0..n_pairs).map(|_| ranges.draw_pair(&mut rng)).collect()
    };
    let rows = crate::util::par_map_range(n_pairs, |i| -> Result<_> {
        let spec = &specs[i];
        let (ca, cb) = spec.components()?;
        let feats = pair_features(&ca, &cb)?;
        let label = surrogate_separability(&ca, &cb, mc_samples, label_seed(seed, i))?;
        Ok((feats, label))
    });
    let rows: Result<Vec<_>> = rows.into_iter().collect();
    let set = TrainingSet::new(rows?, Provenance::External)?.with_provenance(
        Provenance::SyntheticSurrogate,
    );
    Ok((set, specs))
}

/// Seed used for row `i`'s surrogate label; exposed so stored specs can be
/// re-labeled identically.
pub fn label_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, &[0x1abe1, i as u64])
}

/// Specification of a k-component evaluation scene.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SceneSpec {
    pub k: usize,
    /// Axis-aligned box the centers are drawn from: (min corner, max corner).
    pub center_box: ([f64; 2], [f64; 2]),
    /// Minor-axis standard deviation range.
    pub sd: (f64, f64),
    /// Major/minor ratio range (≥ 1).
    pub ellipticity: (f64, f64),
    /// Per-component count range.
    pub count: (usize, usize),
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k >= 1
            && self.center_box.1[0] >= self.center_box.0[0]
            && self.center_box.1[1] >= self.center_box.0[1]
            && self.sd.0 > 0.0
            && self.sd.1 >= self.sd.0
            && self.ellipticity.0 >= 1.0
            && self.ellipticity.1 >= self.ellipticity.0
            && self.count.0 >= 1
            && self.count.1 >= self.count.0;
        if !ok {
            return Err(ClamsError::InvalidConfig(format!("bad scene spec {self:?}")));
        }
        Ok(())
    }
}

/// Draws a k-component mixture scene with ground-truth generating labels.
pub fn generate_scene(spec: &SceneSpec) -> Result<(Scatterplot, Clustering)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[0x5ce]));
    let comps: Vec<ComponentSpec> = (0..spec.k)
        .map(|_| {
            let cx = rng.random_range(spec.center_box.0[0]..=spec.center_box.1[0]);
            let cy = rng.random_range(spec.center_box.0[1]..=spec.center_box.1[1]);
            let minor = rng.random_range(spec.sd.0..=spec.sd.1);
            let ratio = rng.random_range(spec.ellipticity.0..=spec.ellipticity.1);
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let count = rng.random_range(spec.count.0..=spec.count.1);
            ComponentSpec {
                center: [cx, cy],
                major_sd: minor * ratio,
                minor_sd: minor,
                angle,
                count,
            }
        })
        .collect();
    sample_mixture(format!("scene-{}", spec.seed), &comps, derive_seed(spec.seed, &[0x5a]))
}

/// Reads an externally supplied pair-judgment export.
///
/// Schema: params CSV `id,mx1,my1,a1,b1,theta1,n1,mx2,my2,a2,b2,theta2,n2`
/// and scores CSV `id,separability`. Rows with a < b are accepted by
/// swapping the axes and rotating theta by π/2 (the same Gaussian).
pub fn ingest_clustme(
    params_path: impl AsRef<Path>,
    scores_path: impl AsRef<Path>,
) -> Result<TrainingSet> {
    let scores_path = scores_path.as_ref();
    let scores = read_scores(scores_path)?;
    let params_path = params_path.as_ref();
    let file = std::fs::File::open(params_path).map_err(|e| ClamsError::Io {
        path: params_path.display().to_string(),
        source: e,
    })?;
    let path = params_path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let expected = [
        "id", "mx1", "my1", "a1", "b1", "theta1", "n1", "mx2", "my2", "a2", "b2", "theta2", "n2",
    ];
    {
        let headers = rdr.headers().map_err(|e| ClamsError::ParseError {
            path: path.clone(),
            line: 1,
            msg: e.to_string(),
        })?;
        let cols: Vec<&str> = headers.iter().collect();
        if cols != expected {
            return Err(ClamsError::ParseError {
                path,
                line: 1,
                msg: format!("expected header `{}`", expected.join(",")),
            });
        }
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| ClamsError::ParseError {
            path: path.clone(),
            line: 0,
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != expected.len() {
            return Err(ClamsError::ParseError {
                path: path.clone(),
                line,
                msg: format!("expected {} fields, got {}", expected.len(), record.len()),
            });
        }
        let id = record[0].to_string();
        let mut vals = [0.0f64; 12];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = record[i + 1].parse().map_err(|_| ClamsError::ParseError {
                path: path.clone(),
                line,
                msg: format!("bad value `{}` in column {}", &record[i + 1], expected[i + 1]),
            })?;
        }
        let score = *scores.get(&id).ok_or_else(|| ClamsError::ParseError {
            path: path.clone(),
            line,
            msg: format!("no separability score for id `{id}`"),
        })?;
        let build = |mx: f64, my: f64, a: f64, b: f64, theta: f64, n: f64, w: f64| {
            let (major, minor, theta) = if a >= b {
                (a, b, theta)
            } else {
                (b, a, theta + std::f64::consts::FRAC_PI_2)
            };
            GaussianComponent::new([mx, my], major, minor, canonicalize_angle(theta), n, w)
        };
        let n1 = vals[5];
        let n2 = vals[11];
        if !positive(n1) || !positive(n2) {
            return Err(ClamsError::RangeError {
                path: path.clone(),
                line,
                msg: format!("counts must be positive (n1={n1}, n2={n2})"),
            });
        }
        let total = n1 + n2;
        let c1 = build(vals[0], vals[1], vals[2], vals[3], vals[4], n1, n1 / total)
            .map_err(|e| ClamsError::ParseError {
                path: path.clone(),
                line,
                msg: format!("component 1 invalid: {e}"),
            })?;
        let c2 = build(vals[6], vals[7], vals[8], vals[9], vals[10], n2, n2 / total)
            .map_err(|e| ClamsError::ParseError {
                path: path.clone(),
                line,
                msg: format!("component 2 invalid: {e}"),
            })?;
        let feats = pair_features(&c1, &c2)?;
        rows.push((feats, score));
    }
    TrainingSet::new(rows, Provenance::Clustme)
}

fn read_scores(path: &Path) -> Result<HashMap<String, f64>> {
    let file = std::fs::File::open(path).map_err(|e| ClamsError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let pathstr = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    {
        let headers = rdr.headers().map_err(|e| ClamsError::ParseError {
            path: pathstr.clone(),
            line: 1,
            msg: e.to_string(),
        })?;
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["id", "separability"] {
            return Err(ClamsError::ParseError {
                path: pathstr,
                line: 1,
                msg: "expected header `id,separability`".into(),
            });
        }
    }
    let mut scores = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| ClamsError::ParseError {
            path: pathstr.clone(),
            line: 0,
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let s: f64 = record[1].parse().map_err(|_| ClamsError::ParseError {
            path: pathstr.clone(),
            line,
            msg: format!("bad separability `{}`", &record[1]),
        })?;
        if !(0.0..=1.0).contains(&s) {
            return Err(ClamsError::RangeError {
                path: pathstr.clone(),
                line,
                msg: format!("separability {s} outside [0, 1]"),
            });
        }
        scores.insert(record[0].to_string(), s);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_spec(center: [f64; 2], count: usize) -> ComponentSpec {
        ComponentSpec {
            center,
            major_sd: 1.0,
            minor_sd: 1.0,
            angle: 0.0,
            count,
        }
    }

    #[test]
    fn sample_pair_counts_and_determinism() {
        let spec = PairSpec {
            a: unit_spec([0.0, 0.0], 10),
            b: unit_spec([5.0, 0.0], 10),
        };
        let p1 = sample_pair(&spec, 42).unwrap();
        let p2 = sample_pair(&spec, 42).unwrap();
        assert_eq!(p1.len(), 20);
        assert_eq!(p1.points(), p2.points());
        let p3 = sample_pair(&spec, 43).unwrap();
        assert_ne!(p1.points(), p3.points());
    }

    #[test]
    fn sample_pair_mean_within_3_sigma_bound() {
        let spec = PairSpec {
            a: unit_spec([0.0, 0.0], 100),
            b: unit_spec([0.0, 0.0], 100),
        };
        let plot = sample_pair(&spec, 7).unwrap();
        let n = plot.len() as f64;
        let mean = plot
            .points()
            .iter()
            .fold([0.0, 0.0], |m, p| [m[0] + p[0] / n, m[1] + p[1] / n]);
        // 3·σ/√n with σ = 1, n = 200 per coordinate ⇒ 0.21; spec allows 0.35.
        assert!(mean[0].abs() < 0.35 && mean[1].abs() < 0.35, "mean {mean:?}");
    }

    #[test]
    fn training_set_labels_recompute_exactly() {
        let (set, specs) =
            generate_training_set(25, &PairRanges::default(), 200, 5).unwrap();
        assert_eq!(set.len(), 25);
        assert_eq!(set.provenance(), Provenance::SyntheticSurrogate);
        for (i, (spec, (_, label))) in specs.iter().zip(set.rows()).enumerate() {
            let (ca, cb) = spec.components().unwrap();
            let relabel = surrogate_separability(&ca, &cb, 200, label_seed(5, i)).unwrap();
            assert_eq!(*label, relabel);
        }
    }

    #[test]
    fn degenerate_ranges_identical_components_label_zero() {
        let ranges = PairRanges {
            center_distance: (0.0, 0.0),
            sd: (1.0, 1.0),
            ellipticity: (1.0, 1.0),
            count: (100, 100),
        };
        let (set, _) = generate_training_set(30, &ranges, 2000, 9).unwrap();
        for (_, label) in set.rows() {
            assert!(*label <= 0.05, "label {label}");
        }
    }

    #[test]
    fn far_separated_ranges_label_near_one() {
        let ranges = PairRanges {
            center_distance: (100.0, 120.0),
            sd: (0.5, 2.0),
            ellipticity: (1.0, 2.0),
            count: (50, 100),
        };
        let (set, _) = generate_training_set(30, &ranges, 2000, 10).unwrap();
        for (_, label) in set.rows() {
            assert!(*label >= 0.99, "label {label}");
        }
    }

    #[test]
    fn scene_single_component_all_zero_labels() {
        let spec = SceneSpec {
            k: 1,
            center_box: ([0.0, 0.0], [10.0, 10.0]),
            sd: (0.5, 1.5),
            ellipticity: (1.0, 2.0),
            count: (30, 60),
            seed: 3,
        };
        let (plot, labels) = generate_scene(&spec).unwrap();
        assert!(labels.labels().iter().all(|&l| l == 0));
        assert_eq!(plot.len(), labels.len());
    }

    #[test]
    fn scene_label_counts_match_points_and_are_deterministic() {
        let spec = SceneSpec {
            k: 4,
            center_box: ([0.0, 0.0], [30.0, 30.0]),
            sd: (0.5, 1.0),
            ellipticity: (1.0, 1.5),
            count: (20, 40),
            seed: 8,
        };
        let (p1, l1) = generate_scene(&spec).unwrap();
        let (p2, l2) = generate_scene(&spec).unwrap();
        assert_eq!(p1.points(), p2.points());
        assert_eq!(l1, l2);
        let distinct: std::collections::BTreeSet<i64> = l1.labels().iter().copied().collect();
        assert_eq!(distinct.len(), 4);
        assert_eq!(l1.len(), p1.len());
    }

    #[test]
    fn separated_corners_give_four_distinct_labels() {
        let comps: Vec<ComponentSpec> = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0], [20.0, 20.0]]
            .iter()
            .map(|&c| unit_spec(c, 25))
            .collect();
        let (plot, labels) = sample_mixture("corners", &comps, 99).unwrap();
        assert_eq!(plot.len(), 100);
        for ci in 0..4 {
            assert_eq!(labels.labels().iter().filter(|&&l| l == ci).count(), 25);
        }
    }

    #[test]
    fn clustme_ingest_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let params = dir.path().join("params.csv");
        let scores = dir.path().join("scores.csv");
        std::fs::write(
            &params,
            "id,mx1,my1,a1,b1,theta1,n1,mx2,my2,a2,b2,theta2,n2\n\
             s1,0,0,2,1,0.2,100,3,4,1,1,0,150\n\
             s2,0,0,1,2,0.2,80,5,0,1,0.5,1.0,80\n",
        )
        .unwrap();
        std::fs::write(&scores, "id,separability\ns1,0.75\ns2,0.3\n").unwrap();
        let set = ingest_clustme(&params, &scores).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.provenance(), Provenance::Clustme);
        assert_eq!(set.rows()[0].1, 0.75);
        // Row s2 has a < b; axes are swapped so dc stays the plain distance.
        assert_eq!(set.rows()[1].0.dc, 5.0);

        std::fs::write(&scores, "id,separability\ns1,0.75\ns2,1.2\n").unwrap();
        let err = ingest_clustme(&params, &scores).unwrap_err();
        assert!(matches!(err, ClamsError::RangeError { line: 3, .. }));

        std::fs::write(&scores, "id,sep\ns1,0.75\n").unwrap();
        let err = ingest_clustme(&params, &scores).unwrap_err();
        assert!(matches!(err, ClamsError::ParseError { line: 1, .. }));

        std::fs::write(&scores, "id,separability\ns1,0.75\n").unwrap();
        let err = ingest_clustme(&params, &scores).unwrap_err();
        // s2 has no score: the params row is named with its line number.
        assert!(matches!(err, ClamsError::ParseError { line: 3, .. }));
    }
}
