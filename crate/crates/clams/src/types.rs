//! Shared domain types: scatterplots, Gaussian components, decompositions,
//! pairwise features, ambiguity reports, and clusterings, plus their file
//! formats (CSV with `x,y` header, JSON `{"id", "points"}`, label CSV).

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ClamsError, Result};

/// An ordered set of 2-D points; the unit of scoring.
///
/// Point order is preserved: indices are the identity used by cluster
/// labelings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scatterplot {
    id: String,
    points: Vec<[f64; 2]>,
}

impl Scatterplot {
    /// Validates a raw point sequence into a `Scatterplot`.
    pub fn new(id: impl Into<String>, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(ClamsError::EmptyInput(points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(ClamsError::NonFinite(format!(
                    "point {} = ({}, {})",
                    i, p[0], p[1]
                )));
            }
        }
        Ok(Self {
            id: id.into(),
            points,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Copy with points sorted by (x, y, original index). Scoring uses this
    /// so results do not depend on input row order.
    pub fn canonically_sorted(&self) -> Scatterplot {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            let (pa, pb) = (self.points[a], self.points[b]);
            pa[0].partial_cmp(&pb[0])
                .unwrap()
                .then(pa[1].partial_cmp(&pb[1]).unwrap())
                .then(a.cmp(&b))
        });
        Scatterplot {
            id: self.id.clone(),
            points: idx.into_iter().map(|i| self.points[i]).collect(),
        }
    }

    /// Reads the CSV point format: header `x,y`, one point per row.
    pub fn from_csv_reader(id: impl Into<String>, reader: impl Read, path: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        {
            let headers = rdr
                .headers()
                .map_err(|e| csv_parse_error(path, &e))?
                .clone();
            let cols: Vec<&str> = headers.iter().collect();
            if cols != ["x", "y"] {
                return Err(ClamsError::ParseError {
                    path: path.to_string(),
                    line: 1,
                    msg: format!("expected header `x,y`, got `{}`", cols.join(",")),
                });
            }
        }
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| csv_parse_error(path, &e))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(ClamsError::ParseError {
                    path: path.to_string(),
                    line,
                    msg: format!("expected 2 fields, got {}", record.len()),
                });
            }
            let parse = |field: &str, name: &str| -> Result<f64> {
                field.parse::<f64>().map_err(|_| ClamsError::ParseError {
                    path: path.to_string(),
                    line,
                    msg: format!("bad {name} value `{field}`"),
                })
            };
            points.push([parse(&record[0], "x")?, parse(&record[1], "y")?]);
        }
        Self::new(id, points).map_err(|e| match e {
            ClamsError::NonFinite(msg) => ClamsError::ParseError {
                path: path.to_string(),
                line: 0,
                msg: format!("non-finite coordinate: {msg}"),
            },
            other => other,
        })
    }

    /// Reads a point CSV from disk; the file stem becomes the plot id.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scatterplot".to_string());
        let file = std::fs::File::open(path).map_err(|e| ClamsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_csv_reader(id, file, &path.display().to_string())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        out
    }

    /// Parses the JSON format `{"id": string, "points": [[x,y],...]}`.
    pub fn from_json_str(json: &str, path: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            id: String,
            points: Vec<[f64; 2]>,
        }
        let raw: Raw = serde_json::from_str(json).map_err(|e| ClamsError::ParseError {
            path: path.to_string(),
            line: e.line() as u64,
            msg: e.to_string(),
        })?;
        Self::new(raw.id, raw.points)
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ClamsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// Loads `.json` or `.csv` depending on the file extension.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_path(path),
            _ => Self::from_csv_path(path),
        }
    }
}

fn csv_parse_error(path: &str, e: &csv::Error) -> ClamsError {
    let line = match e.kind() {
        csv::ErrorKind::Utf8 { pos, .. } => pos.as_ref().map_or(0, |p| p.line()),
        csv::ErrorKind::UnequalLengths { pos, .. } => pos.as_ref().map_or(0, |p| p.line()),
        _ => 0,
    };
    ClamsError::ParseError {
        path: path.to_string(),
        line,
        msg: e.to_string(),
    }
}

/// Validates a raw point sequence; alias for [`Scatterplot::new`] with an
/// anonymous id.
pub fn validate_scatterplot(points: Vec<[f64; 2]>) -> Result<Scatterplot> {
    Scatterplot::new("scatterplot", points)
}

/// Folds any angle into the canonical principal-axis range [0, π).
pub fn canonicalize_angle(raw: f64) -> f64 {
    let mut a = raw.rem_euclid(PI);
    // rem_euclid can return exactly π through rounding when raw is just
    // below a multiple of π.
    if a >= PI {
        a -= PI;
    }
    a
}

/// A fitted Gaussian component summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    center: [f64; 2],
    major_sd: f64,
    minor_sd: f64,
    angle: f64,
    soft_count: f64,
    weight: f64,
}

impl GaussianComponent {
    /// Builds a component, canonicalizing `angle` into [0, π).
    ///
    /// `soft_count` is the sum of EM posterior responsibilities (real-valued),
    /// not a hard assignment count.
    pub fn new(
        center: [f64; 2],
        major_sd: f64,
        minor_sd: f64,
        angle: f64,
        soft_count: f64,
        weight: f64,
    ) -> Result<Self> {
        for v in [center[0], center[1], major_sd, minor_sd, angle, soft_count, weight] {
            if !v.is_finite() {
                return Err(ClamsError::NonFinite(format!("component field {v}")));
            }
        }
        if major_sd <= 0.0 || minor_sd <= 0.0 {
            return Err(ClamsError::Precondition(format!(
                "axis standard deviations must be positive (major={major_sd}, minor={minor_sd})"
            )));
        }
        if major_sd < minor_sd {
            return Err(ClamsError::Precondition(format!(
                "major_sd {major_sd} < minor_sd {minor_sd}"
            )));
        }
        if soft_count < 0.0 {
            return Err(ClamsError::Precondition(format!(
                "soft_count {soft_count} negative"
            )));
        }
        if weight <= 0.0 || weight > 1.0 {
            return Err(ClamsError::Precondition(format!(
                "weight {weight} outside (0, 1]"
            )));
        }
        Ok(Self {
            center,
            major_sd,
            minor_sd,
            angle: canonicalize_angle(angle),
            soft_count,
            weight,
        })
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    /// Standard deviation along the major principal axis.
    pub fn major_sd(&self) -> f64 {
        self.major_sd
    }

    /// Standard deviation along the minor principal axis.
    pub fn minor_sd(&self) -> f64 {
        self.minor_sd
    }

    /// Major-axis direction, canonicalized to [0, π).
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Sum of posterior responsibilities attributed to this component.
    pub fn soft_count(&self) -> f64 {
        self.soft_count
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Log-density of the component's Gaussian at `p`.
    pub fn log_density(&self, p: [f64; 2]) -> f64 {
        let (sin, cos) = self.angle.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        // Rotate into the principal frame.
        let u = cos * dx + sin * dy;
        let v = -sin * dx + cos * dy;
        let (a2, b2) = (self.major_sd * self.major_sd, self.minor_sd * self.minor_sd);
        -(2.0 * PI).ln() - 0.5 * (a2 * b2).ln() - 0.5 * (u * u / a2 + v * v / b2)
    }

    /// Draws one point from the component's Gaussian.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> [f64; 2] {
        use rand_distr::StandardNormal;
        let zu: f64 = rng.sample(StandardNormal);
        let zv: f64 = rng.sample(StandardNormal);
        let (sin, cos) = self.angle.sin_cos();
        let u = self.major_sd * zu;
        let v = self.minor_sd * zv;
        [
            self.center[0] + cos * u - sin * v,
            self.center[1] + sin * u + cos * v,
        ]
    }
}

/// Result of fitting and selecting a Gaussian mixture for a scatterplot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    components: Vec<GaussianComponent>,
    k_opt: usize,
    bic_curve: Vec<(usize, f64)>,
    log_likelihood: f64,
}

impl Decomposition {
    /// Validates that weights sum to 1 (±1e-9) and the BIC curve is a
    /// contiguous k range starting at 1.
    pub fn new(
        components: Vec<GaussianComponent>,
        bic_curve: Vec<(usize, f64)>,
        log_likelihood: f64,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(ClamsError::Precondition(
                "decomposition needs at least one component".into(),
            ));
        }
        let wsum: f64 = components.iter().map(|c| c.weight()).sum();
        if (wsum - 1.0).abs() > 1e-9 {
            return Err(ClamsError::Precondition(format!(
                "component weights sum to {wsum}, expected 1"
            )));
        }
        for (i, entry) in bic_curve.iter().enumerate() {
            if entry.0 != i + 1 {
                return Err(ClamsError::Precondition(format!(
                    "bic_curve not contiguous from k=1 at position {i}"
                )));
            }
        }
        Ok(Self {
            k_opt: components.len(),
            components,
            bic_curve,
            log_likelihood,
        })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Selected number of components; always equals `components().len()`.
    pub fn k_opt(&self) -> usize {
        self.k_opt
    }

    /// `(k, BIC)` for every k that was tried; +∞ marks degenerate fits.
    pub fn bic_curve(&self) -> &[(usize, f64)] {
        &self.bic_curve
    }

    /// Total log-likelihood of the selected fit.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }
}

/// The six pairwise features for one component pair, in data units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures {
    /// Distance between centers.
    pub dc: f64,
    /// Distance-size ratio.
    pub dsr: f64,
    /// Density difference.
    pub dd: f64,
    /// Size difference.
    pub sd: f64,
    /// Ellipticity difference.
    pub ed: f64,
    /// Angle between major axes.
    pub ac: f64,
    /// Indices of the two components in their decomposition.
    pub pair: (usize, usize),
}

/// Per-pair separability and ambiguity inside an [`AmbiguityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairAmbiguity {
    pub pair: (usize, usize),
    /// Predicted separability S ∈ [0, 1].
    pub separability: f64,
    /// Binary entropy of S, in [0, 1].
    pub ambiguity: f64,
}

/// The full scoring result for one scatterplot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguityReport {
    score: f64,
    pairs: Vec<PairAmbiguity>,
    decomposition: Decomposition,
}

impl AmbiguityReport {
    /// The score is recomputed from `pairs` (empty ⇒ 0) so the struct cannot
    /// carry an inconsistent aggregate.
    pub fn new(pairs: Vec<PairAmbiguity>, decomposition: Decomposition) -> Result<Self> {
        for p in &pairs {
            if !(0.0..=1.0).contains(&p.separability) {
                return Err(ClamsError::OutOfRange(p.separability));
            }
            if !(0.0..=1.0).contains(&p.ambiguity) {
                return Err(ClamsError::OutOfRange(p.ambiguity));
            }
        }
        let score = if pairs.is_empty() {
            0.0
        } else {
            pairs.iter().map(|p| p.ambiguity).sum::<f64>() / pairs.len() as f64
        };
        Ok(Self {
            score,
            pairs,
            decomposition,
        })
    }

    /// Aggregated ambiguity score in [0, 1]; 0 when there are no pairs.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn pairs(&self) -> &[PairAmbiguity] {
        &self.pairs
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }
}

/// A point labeling aligned to a scatterplot's point order; −1 means
/// unassigned/noise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clustering {
    labels: Vec<i64>,
}

impl Clustering {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l < -1) {
            return Err(ClamsError::Precondition(format!(
                "label {bad} below -1"
            )));
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks alignment with a scatterplot's point count.
    pub fn validate_for(&self, plot: &Scatterplot) -> Result<()> {
        if self.labels.len() != plot.len() {
            return Err(ClamsError::LengthMismatch(self.labels.len(), plot.len()));
        }
        Ok(())
    }

    /// Reads the label CSV format: header `label`, one integer per row.
    pub fn from_csv_reader(reader: impl Read, path: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        {
            let headers = rdr
                .headers()
                .map_err(|e| csv_parse_error(path, &e))?
                .clone();
            let cols: Vec<&str> = headers.iter().collect();
            if cols != ["label"] {
                return Err(ClamsError::ParseError {
                    path: path.to_string(),
                    line: 1,
                    msg: format!("expected header `label`, got `{}`", cols.join(",")),
                });
            }
        }
        let mut labels = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| csv_parse_error(path, &e))?;
            let line = record.position().map_or(0, |p| p.line());
            let field = &record[0];
            let v: i64 = field.parse().map_err(|_| ClamsError::ParseError {
                path: path.to_string(),
                line,
                msg: format!("bad label `{field}`"),
            })?;
            if v < -1 {
                return Err(ClamsError::RangeError {
                    path: path.to_string(),
                    line,
                    msg: format!("label {v} below -1"),
                });
            }
            labels.push(v);
        }
        Self::new(labels)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| ClamsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label\n");
        for l in &self.labels {
            out.push_str(&format!("{l}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_valid_scatterplot() {
        let p = validate_scatterplot(vec![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn rejects_nan_coordinate() {
        let err = validate_scatterplot(vec![[0.0, 0.0], [f64::NAN, 1.0]]).unwrap_err();
        assert!(matches!(err, ClamsError::NonFinite(_)));
    }

    #[test]
    fn rejects_single_point() {
        let err = validate_scatterplot(vec![[0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, ClamsError::EmptyInput(1)));
    }

    #[test]
    fn angle_canonicalization_mod_pi() {
        let a = GaussianComponent::new([0.0, 0.0], 2.0, 1.0, 0.3, 10.0, 1.0).unwrap();
        let b = GaussianComponent::new([0.0, 0.0], 2.0, 1.0, 0.3 + PI, 10.0, 1.0).unwrap();
        // Identical up to the roundoff of (0.3 + π) − π.
        assert!((a.angle() - b.angle()).abs() < 1e-12);
        assert!((0.0..PI).contains(&b.angle()));
        let c = GaussianComponent::new([0.0, 0.0], 2.0, 1.0, 0.3 - 2.0 * PI, 10.0, 1.0).unwrap();
        assert!((a.angle() - c.angle()).abs() < 1e-12);
    }

    #[test]
    fn component_rejects_major_below_minor() {
        let err = GaussianComponent::new([0.0, 0.0], 1.0, 2.0, 0.0, 10.0, 1.0).unwrap_err();
        assert!(matches!(err, ClamsError::Precondition(_)));
    }

    #[test]
    fn decomposition_checks_weight_sum() {
        let c = |w| GaussianComponent::new([0.0, 0.0], 1.0, 1.0, 0.0, 10.0, w).unwrap();
        let err = Decomposition::new(vec![c(0.5), c(0.4)], vec![(1, 0.0), (2, 0.0)], 0.0);
        assert!(err.is_err());
        let ok = Decomposition::new(vec![c(0.5), c(0.5)], vec![(1, 0.0), (2, 0.0)], 0.0);
        assert!(ok.is_ok());
        assert_eq!(ok.unwrap().k_opt(), 2);
    }

    #[test]
    fn report_score_is_mean_of_pairs_and_zero_when_empty() {
        let c = GaussianComponent::new([0.0, 0.0], 1.0, 1.0, 0.0, 10.0, 1.0).unwrap();
        let d = Decomposition::new(vec![c], vec![(1, 0.0)], 0.0).unwrap();
        let empty = AmbiguityReport::new(vec![], d.clone()).unwrap();
        assert_eq!(empty.score(), 0.0);

        let pairs = vec![
            PairAmbiguity { pair: (0, 1), separability: 0.5, ambiguity: 1.0 },
            PairAmbiguity { pair: (0, 2), separability: 1.0, ambiguity: 0.0 },
        ];
        let r = AmbiguityReport::new(pairs, d).unwrap();
        assert!((r.score() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip_and_header_check() {
        let plot = Scatterplot::new("t", vec![[0.5, -1.25], [3.0, 4.0]]).unwrap();
        let text = plot.to_csv_string();
        let back = Scatterplot::from_csv_reader("t", text.as_bytes(), "mem").unwrap();
        assert_eq!(plot.points(), back.points());

        let bad = Scatterplot::from_csv_reader("t", "a,b\n1,2\n".as_bytes(), "mem");
        assert!(matches!(bad, Err(ClamsError::ParseError { line: 1, .. })));

        let badval = Scatterplot::from_csv_reader("t", "x,y\n1,2\n3,zap\n".as_bytes(), "mem");
        assert!(matches!(badval, Err(ClamsError::ParseError { line: 3, .. })));
    }

    #[test]
    fn json_roundtrip() {
        let plot = Scatterplot::new("blob", vec![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let json = serde_json::to_string(&plot).unwrap();
        let back = Scatterplot::from_json_str(&json, "mem").unwrap();
        assert_eq!(plot, back);
    }

    #[test]
    fn clustering_csv_and_validation() {
        let c = Clustering::from_csv_reader("label\n0\n0\n-1\n".as_bytes(), "mem").unwrap();
        assert_eq!(c.labels(), &[0, 0, -1]);
        let plot = validate_scatterplot(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        c.validate_for(&plot).unwrap();
        let short = validate_scatterplot(vec![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(c.validate_for(&short).is_err());

        let bad = Clustering::from_csv_reader("label\n0\n-2\n".as_bytes(), "mem");
        assert!(matches!(bad, Err(ClamsError::RangeError { line: 3, .. })));
    }

    #[test]
    fn canonical_sort_is_row_order_invariant() {
        let a = Scatterplot::new("p", vec![[2.0, 0.0], [1.0, 5.0], [1.0, -1.0]]).unwrap();
        let b = Scatterplot::new("p", vec![[1.0, -1.0], [2.0, 0.0], [1.0, 5.0]]).unwrap();
        assert_eq!(a.canonically_sorted().points(), b.canonically_sorted().points());
    }
}
