//! Full-covariance 2-D Gaussian mixtures fitted by EM, component-count
//! selection by BIC plus the Kneedle elbow rule, and the resulting
//! [`Decomposition`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ClamsError, Result};
use crate::types::{canonicalize_angle, Decomposition, GaussianComponent, Scatterplot};
use crate::util::{derive_seed, par_map_range, positive};

/// Configuration for mixture fitting and model selection.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GmmFitConfig {
    /// Largest component count considered; clipped to the point count.
    pub k_max: usize,
    /// Independent EM restarts per k; the best log-likelihood wins.
    pub restarts: usize,
    /// Cap on EM update steps per restart.
    pub max_iters: usize,
    /// Convergence threshold on the change of per-point mean log-likelihood.
    pub loglik_tol: f64,
    /// Minimum covariance eigenvalue; fits are floored, not aborted.
    pub covariance_floor: f64,
    /// Kneedle sensitivity applied to the BIC curve.
    pub kneedle_sensitivity: f64,
    pub seed: u64,
}

impl Default for GmmFitConfig {
    fn default() -> Self {
        Self {
            k_max: 20,
            restarts: 5,
            max_iters: 200,
            loglik_tol: 1e-4,
            covariance_floor: 1e-6,
            kneedle_sensitivity: 1.0,
            seed: 0,
        }
    }
}

impl GmmFitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(ClamsError::InvalidConfig("k_max must be >= 1".into()));
        }
        if self.restarts < 1 || self.max_iters < 1 {
            return Err(ClamsError::InvalidConfig(
                "restarts and max_iters must be >= 1".into(),
            ));
        }
        if !positive(self.loglik_tol) || !positive(self.covariance_floor) {
            return Err(ClamsError::InvalidConfig("tolerances must be > 0".into()));
        }
        if !positive(self.kneedle_sensitivity) {
            return Err(ClamsError::InvalidConfig(
                "kneedle_sensitivity must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A fitted k-component mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    pub components: Vec<GaussianComponent>,
    /// Total log-likelihood of the data under the fit.
    pub log_likelihood: f64,
}

/// Symmetric 2x2 covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cov2 {
    xx: f64,
    xy: f64,
    yy: f64,
}

impl Cov2 {
    /// Eigenvalues (λ1 ≥ λ2) and the leading eigenvector.
    fn eigen(&self) -> (f64, f64, [f64; 2]) {
        let t = 0.5 * (self.xx + self.yy);
        let d = 0.5 * (self.xx - self.yy);
        let r = d.hypot(self.xy);
        let (l1, l2) = (t + r, t - r);
        let v = if self.xy.abs() > 1e-300 {
            // (xy, l1 - xx) is an eigenvector for l1; normalize.
            let raw = [self.xy, l1 - self.xx];
            let norm = raw[0].hypot(raw[1]);
            [raw[0] / norm, raw[1] / norm]
        } else if self.xx >= self.yy {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        (l1, l2, v)
    }

    /// Clamps eigenvalues to at least `floor`, reconstructing the matrix.
    fn floored(&self, floor: f64) -> Cov2 {
        let (l1, l2, v) = self.eigen();
        if l2 >= floor && l1.is_finite() {
            return *self;
        }
        let (l1, l2) = (l1.max(floor), l2.max(floor));
        let (c, s) = (v[0], v[1]);
        Cov2 {
            xx: l1 * c * c + l2 * s * s,
            xy: (l1 - l2) * c * s,
            yy: l1 * s * s + l2 * c * c,
        }
    }

    fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    /// Inverse entries and log-determinant.
    fn inverse_logdet(&self) -> ([f64; 3], f64) {
        let det = self.xx * self.yy - self.xy * self.xy;
        ([self.yy / det, -self.xy / det, self.xx / det], det.ln())
    }
}

#[derive(Debug, Clone)]
struct Mixture {
    weights: Vec<f64>,
    means: Vec<[f64; 2]>,
    covs: Vec<Cov2>,
}

/// Per-component sufficient statistics from one E-pass, with second moments
/// taken about the component's current mean.
#[derive(Debug, Clone, Copy, Default)]
struct CompStats {
    r: f64,
    dx: f64,
    dy: f64,
    xx: f64,
    xy: f64,
    yy: f64,
}

struct EPass {
    total_ll: f64,
    stats: Vec<CompStats>,
}

fn e_pass(points: &[[f64; 2]], mix: &Mixture, scratch: &mut Vec<f64>) -> EPass {
    let k = mix.weights.len();
    let mut prec = Vec::with_capacity(k);
    for j in 0..k {
        let (inv, logdet) = mix.covs[j].inverse_logdet();
        let logc = mix.weights[j].ln() - (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet;
        prec.push((inv, logc));
    }
    let mut stats = vec![CompStats::default(); k];
    let mut total_ll = 0.0;
    scratch.resize(k, 0.0);
    for p in points {
        let mut max_lp = f64::NEG_INFINITY;
        for j in 0..k {
            let dx = p[0] - mix.means[j][0];
            let dy = p[1] - mix.means[j][1];
            let ([p11, p12, p22], logc) = prec[j];
            let q = p11 * dx * dx + 2.0 * p12 * dx * dy + p22 * dy * dy;
            let lp = logc - 0.5 * q;
            scratch[j] = lp;
            if lp > max_lp {
                max_lp = lp;
            }
        }
        let mut sum = 0.0;
        for lp in scratch.iter_mut() {
            *lp = (*lp - max_lp).exp();
            sum += *lp;
        }
        total_ll += max_lp + sum.ln();
        for j in 0..k {
            let r = scratch[j] / sum;
            let dx = p[0] - mix.means[j][0];
            let dy = p[1] - mix.means[j][1];
            let s = &mut stats[j];
            s.r += r;
            s.dx += r * dx;
            s.dy += r * dy;
            s.xx += r * dx * dx;
            s.xy += r * dx * dy;
            s.yy += r * dy * dy;
        }
    }
    EPass { total_ll, stats }
}

fn kmeanspp_means(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = points.len();
    let mut means = Vec::with_capacity(k);
    means.push(points[rng.random_range(0..n)]);
    let d2 = |p: [f64; 2], q: [f64; 2]| {
        let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
        dx * dx + dy * dy
    };
    let mut dist: Vec<f64> = points.iter().map(|&p| d2(p, means[0])).collect();
    while means.len() < k {
        let total: f64 = dist.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in dist.iter().enumerate() {
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
        let c = points[idx];
        means.push(c);
        for (i, &p) in points.iter().enumerate() {
            let d = d2(p, c);
            if d < dist[i] {
                dist[i] = d;
            }
        }
    }
    means
}

fn pooled_covariance(points: &[[f64; 2]]) -> (Cov2, [f64; 2]) {
    let n = points.len() as f64;
    let mut mx = 0.0;
    let mut my = 0.0;
    for p in points {
        mx += p[0];
        my += p[1];
    }
    mx /= n;
    my /= n;
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        xx += dx * dx;
        xy += dx * dy;
        yy += dy * dy;
    }
    (
        Cov2 { xx: xx / n, xy: xy / n, yy: yy / n },
        [mx, my],
    )
}

struct EmOutcome {
    mix: Mixture,
    total_ll: f64,
    soft_counts: Vec<f64>,
    /// Per-point mean log-likelihood after each E-pass; the monotonicity
    /// tests read it.
    #[cfg_attr(not(test), allow(dead_code))]
    trace: Vec<f64>,
    degenerate: bool,
}

fn run_em(points: &[[f64; 2]], k: usize, seed: u64, cfg: &GmmFitConfig) -> EmOutcome {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pooled, _) = pooled_covariance(points);
    let pooled = pooled.floored(cfg.covariance_floor);
    let mut mix = Mixture {
        weights: vec![1.0 / k as f64; k],
        means: kmeanspp_means(points, k, &mut rng),
        covs: vec![pooled; k],
    };
    let weight_floor = 1.0 / (10.0 * n as f64);
    let mut scratch = Vec::new();
    let mut trace = Vec::new();
    let mut pass = e_pass(points, &mix, &mut scratch);
    trace.push(pass.total_ll / n as f64);
    let mut degenerate = !pass.total_ll.is_finite();
    if !degenerate {
        for _ in 0..cfg.max_iters {
            // M-step from the last pass's statistics.
            let mut bad = false;
            for j in 0..k {
                let s = pass.stats[j];
                if !positive(s.r) || (s.r / n as f64) < weight_floor {
                    bad = true;
                    break;
                }
                let ddx = s.dx / s.r;
                let ddy = s.dy / s.r;
                mix.weights[j] = s.r / n as f64;
                mix.means[j][0] += ddx;
                mix.means[j][1] += ddy;
                let cov = Cov2 {
                    xx: s.xx / s.r - ddx * ddx,
                    xy: s.xy / s.r - ddx * ddy,
                    yy: s.yy / s.r - ddy * ddy,
                };
                if !cov.is_finite() {
                    bad = true;
                    break;
                }
                mix.covs[j] = cov.floored(cfg.covariance_floor);
            }
            if bad {
                degenerate = true;
                break;
            }
            let next = e_pass(points, &mix, &mut scratch);
            trace.push(next.total_ll / n as f64);
            let delta = (next.total_ll - pass.total_ll) / n as f64;
            pass = next;
            if !pass.total_ll.is_finite() {
                degenerate = true;
                break;
            }
            if delta.abs() < cfg.loglik_tol {
                break;
            }
        }
    }
    // Weights from the final responsibilities keep soft counts and weights
    // consistent with the reported fit.
    let soft_counts: Vec<f64> = pass.stats.iter().map(|s| s.r).collect();
    if !degenerate {
        for (w, &count) in mix.weights.iter_mut().zip(&soft_counts) {
            *w = count / n as f64;
            if *w < weight_floor {
                degenerate = true;
            }
        }
    }
    EmOutcome {
        mix,
        total_ll: pass.total_ll,
        soft_counts,
        trace,
        degenerate,
    }
}

/// Closed-form single-Gaussian fit; EM with k = 1 converges here in one step
/// and has no seed dependence.
fn fit_single(points: &[[f64; 2]], cfg: &GmmFitConfig) -> EmOutcome {
    let n = points.len();
    let (cov, mean) = pooled_covariance(points);
    let mix = Mixture {
        weights: vec![1.0],
        means: vec![mean],
        covs: vec![cov.floored(cfg.covariance_floor)],
    };
    let mut scratch = Vec::new();
    let pass = e_pass(points, &mix, &mut scratch);
    let mean_ll = pass.total_ll / n as f64;
    EmOutcome {
        mix,
        total_ll: pass.total_ll,
        soft_counts: vec![n as f64],
        trace: vec![mean_ll],
        degenerate: !pass.total_ll.is_finite(),
    }
}

fn outcome_to_fit(out: &EmOutcome) -> Result<GmmFit> {
    let k = out.mix.weights.len();
    let mut components = Vec::with_capacity(k);
    for j in 0..k {
        let (l1, l2, v) = out.mix.covs[j].eigen();
        let angle = canonicalize_angle(v[1].atan2(v[0]));
        components.push(GaussianComponent::new(
            out.mix.means[j],
            l1.sqrt(),
            l2.sqrt(),
            angle,
            out.soft_counts[j],
            out.mix.weights[j],
        )?);
    }
    Ok(GmmFit {
        components,
        log_likelihood: out.total_ll,
    })
}

fn best_outcome(points: &[[f64; 2]], k: usize, cfg: &GmmFitConfig) -> Result<EmOutcome> {
    if k == 1 {
        let out = fit_single(points, cfg);
        if out.degenerate {
            return Err(ClamsError::DegenerateFit("single-component fit".into()));
        }
        return Ok(out);
    }
    let outcomes = par_map_range(cfg.restarts, |r| {
        run_em(points, k, derive_seed(cfg.seed, &[k as u64, r as u64]), cfg)
    });
    let best = outcomes
        .into_iter()
        .filter(|o| !o.degenerate)
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.total_ll
                .partial_cmp(&b.total_ll)
                .unwrap()
                .then(ib.cmp(ia))
        })
        .map(|(_, o)| o);
    best.ok_or_else(|| {
        ClamsError::DegenerateFit(format!("all {} restarts collapsed for k={k}", cfg.restarts))
    })
}

/// Fits a k-component mixture; the best of `cfg.restarts` k-means++-seeded
/// EM runs by log-likelihood. Deterministic given `cfg.seed`.
pub fn fit_gmm(plot: &Scatterplot, k: usize, cfg: &GmmFitConfig) -> Result<GmmFit> {
    cfg.validate()?;
    if k < 1 || k > plot.len() {
        return Err(ClamsError::Precondition(format!(
            "k = {k} outside 1..={}",
            plot.len()
        )));
    }
    outcome_to_fit(&best_outcome(plot.points(), k, cfg)?)
}

/// Bayesian information criterion: `p·ln(n) − 2·log_likelihood` with
/// `p = 6k − 1` free parameters (2 mean + 3 covariance per component, plus
/// k − 1 free weights).
pub fn bic(log_likelihood: f64, k: usize, n: f64) -> f64 {
    debug_assert!(k >= 1 && n >= 1.0);
    let p = (6 * k - 1) as f64;
    p * n.ln() - 2.0 * log_likelihood
}

/// Kneedle knee detection on a curve assumed decreasing-convex.
///
/// Both axes are min-max normalized, decreasing curves flipped, and local
/// maxima of the difference curve `y_d = y_norm − x_norm` qualify as knees
/// when `y_d` later drops more than `sensitivity · mean spacing` below the
/// candidate. Returns the curve's k at the first qualifying knee, or `None`.
pub fn kneedle_elbow(curve: &[(usize, f64)], sensitivity: f64) -> Result<Option<usize>> {
    let n = curve.len();
    if n < 3 {
        return Err(ClamsError::TooShort(n));
    }
    for w in curve.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(ClamsError::Precondition(
                "curve k values must be strictly increasing".into(),
            ));
        }
    }
    let (x0, x1) = (curve[0].0 as f64, curve[n - 1].0 as f64);
    let ys: Vec<f64> = curve.iter().map(|&(_, y)| y).collect();
    let (ymin, ymax) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    if !(ymax - ymin).is_finite() || ymax == ymin {
        return Ok(None);
    }
    let decreasing = ys[0] > ys[n - 1];
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let xn = (curve[i].0 as f64 - x0) / (x1 - x0);
        let yn = (ys[i] - ymin) / (ymax - ymin);
        let yhat = if decreasing { 1.0 - yn } else { yn };
        d.push(yhat - xn);
    }
    let candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1])
        .collect();
    let mean_spacing = 1.0 / (n as f64 - 1.0);
    for (ci, &c) in candidates.iter().enumerate() {
        let threshold = d[c] - sensitivity * mean_spacing;
        let stop = candidates.get(ci + 1).copied().unwrap_or(n);
        if d[(c + 1)..stop].iter().any(|&v| v < threshold) {
            return Ok(Some(curve[c].0));
        }
    }
    Ok(None)
}

/// Fits k = 1..K_max, scores each fit by BIC, and selects K_opt with the
/// Kneedle elbow (falling back to the BIC argmin when no knee qualifies).
///
/// A k whose every restart collapses is recorded as +∞ BIC and skipped, as
/// long as at least one k fits.
pub fn decompose(plot: &Scatterplot, cfg: &GmmFitConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let k_hi = cfg.k_max.min(plot.len());
    let results = par_map_range(k_hi, |i| best_outcome(plot.points(), i + 1, cfg));
    let mut bic_curve = Vec::with_capacity(k_hi);
    let mut fits: Vec<Option<EmOutcome>> = Vec::with_capacity(k_hi);
    for (i, res) in results.into_iter().enumerate() {
        let k = i + 1;
        match res {
            Ok(out) => {
                bic_curve.push((k, bic(out.total_ll, k, plot.len() as f64)));
                fits.push(Some(out));
            }
            Err(ClamsError::DegenerateFit(_)) => {
                bic_curve.push((k, f64::INFINITY));
                fits.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let valid: Vec<(usize, f64)> = bic_curve
        .iter()
        .copied()
        .filter(|&(_, b)| b.is_finite())
        .collect();
    if valid.is_empty() {
        return Err(ClamsError::DegenerateFit(
            "no component count produced a valid fit".into(),
        ));
    }
    let argmin = valid
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(k, _)| k)
        .unwrap();
    let k_opt = if valid.len() >= 3 {
        kneedle_elbow(&valid, cfg.kneedle_sensitivity)?.unwrap_or(argmin)
    } else {
        argmin
    };
    let out = fits[k_opt - 1].as_ref().expect("selected k has a valid fit");
    let fit = outcome_to_fit(out)?;
    Decomposition::new(fit.components, bic_curve, fit.log_likelihood)
}
