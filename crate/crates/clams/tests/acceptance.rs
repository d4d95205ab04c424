//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `--nocapture` to see them).

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clams::ambiguity::{clams_score, entropy_ambiguity};
use clams::bench::{default_techniques, rank_stability, MetricKind};
use clams::datagen::{generate_training_set, sample_mixture, ComponentSpec, PairRanges};
use clams::evm::{adjusted_mutual_info, adjusted_rand, homogeneity_completeness_v, spearman_rho};
use clams::features::{pair_features, size_of, FeatureMask};
use clams::gmm::{decompose, GmmFitConfig};
use clams::reducer::{optimize, HighDimDataset, NeighborhoodF1, ReducerConfig, ToyEmbedder};
use clams::separability::{ablate, cross_validate, train, SeparabilityModel, TrainConfig};
use clams::types::{Clustering, GaussianComponent, Scatterplot};

/// Surrogate-trained model shared by the end-to-end criteria.
fn shared_model() -> &'static SeparabilityModel {
    static MODEL: OnceLock<SeparabilityModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let (set, _) = generate_training_set(3000, &PairRanges::default(), 1000, 7)
            .expect("training set generates");
        train(
            &set,
            &TrainConfig {
                n_trees: 200,
                seed: 7,
                ..Default::default()
            },
            FeatureMask::default(),
        )
        .expect("surrogate model trains")
    })
}

fn blob(center: [f64; 2], sd: f64, count: usize) -> ComponentSpec {
    ComponentSpec {
        center,
        major_sd: sd,
        minor_sd: sd,
        angle: 0.0,
        count,
    }
}

#[test]
fn acceptance_01_entropy_suite() {
    let start = Instant::now();
    assert_eq!(entropy_ambiguity(0.0).unwrap(), 0.0);
    assert_eq!(entropy_ambiguity(1.0).unwrap(), 0.0);
    assert_eq!(entropy_ambiguity(0.5).unwrap(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut max_asym: f64 = 0.0;
    for _ in 0..1_000_000 {
        let s: f64 = rng.random();
        let asym = (entropy_ambiguity(s).unwrap() - entropy_ambiguity(1.0 - s).unwrap()).abs();
        max_asym = max_asym.max(asym);
    }
    assert!(max_asym <= 1e-12, "max asymmetry {max_asym}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[criterion 1] PASS: endpoints exact, peak exact, max |A(s)-A(1-s)| = {max_asym:.2e} over 1e6 draws in {elapsed:?}"
    );
}

#[test]
fn acceptance_02_gmm_model_selection() {
    let start = Instant::now();
    let corners = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0], [20.0, 20.0]];
    let cfg = GmmFitConfig {
        k_max: 10,
        ..Default::default()
    };
    let mut k4 = 0usize;
    let mut max_center_err: f64 = 0.0;
    for scene in 0..50u64 {
        let comps: Vec<ComponentSpec> = corners.iter().map(|&c| blob(c, 1.0, 250)).collect();
        let (plot, labels) = sample_mixture(format!("scene-{scene}"), &comps, 1000 + scene).unwrap();
        let d = decompose(&plot, &GmmFitConfig { seed: scene, ..cfg }).unwrap();
        if d.k_opt() != 4 {
            continue;
        }
        k4 += 1;
        // Oracle: per-blob sample means of the drawn points.
        let mut means = [[0.0f64; 2]; 4];
        let mut counts = vec![0usize; 4];
        for (p, &l) in plot.points().iter().zip(labels.labels()) {
            means[l as usize][0] += p[0];
            means[l as usize][1] += p[1];
            counts[l as usize] += 1;
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m[0] /= c as f64;
            m[1] /= c as f64;
        }
        // Order-free match over all 4! assignments.
        let centers: Vec<[f64; 2]> = d.components().iter().map(|c| c.center()).collect();
        let perms = permutations4();
        let best = perms
            .iter()
            .map(|perm| {
                (0..4)
                    .map(|i| {
                        let (a, b) = (centers[i], means[perm[i]]);
                        (a[0] - b[0]).hypot(a[1] - b[1])
                    })
                    .fold(0.0f64, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 0.2, "scene {scene}: worst center error {best}");
        max_center_err = max_center_err.max(best);
    }
    let elapsed = start.elapsed();
    assert!(k4 >= 48, "K_opt = 4 in only {k4}/50 scenes");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "[criterion 2] PASS: K_opt = 4 in {k4}/50 scenes, max center error {max_center_err:.3} in {elapsed:?}"
    );
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([a, b, c, d]);
            }
        }
    }
    out
}

#[test]
fn acceptance_03_feature_formulas() {
    let start = Instant::now();
    let unit = |center: [f64; 2]| {
        GaussianComponent::new(center, 1.0, 1.0, 0.0, 100.0, 0.5).unwrap()
    };
    // Identity pair: all features zero, DSR denominator strictly positive.
    let c = GaussianComponent::new([2.0, -1.0], 2.0, 0.5, 0.7, 80.0, 0.5).unwrap();
    let f = pair_features(&c, &c).unwrap();
    for v in [f.dc, f.dsr, f.dd, f.sd, f.ed, f.ac] {
        assert!(v.abs() <= 1e-9);
    }
    assert!(size_of(&c) + size_of(&c) > 0.0);

    // 3-4-5 case: DC exactly 5.
    let f = pair_features(&unit([0.0, 0.0]), &unit([3.0, 4.0])).unwrap();
    assert_eq!(f.dc, 5.0);
    assert!((f.dsr - 5.0 / (2.0 * 2f64.sqrt())).abs() <= 1e-9);

    // Scaling laws: scale both components by s.
    let c1 = GaussianComponent::new([0.0, 0.0], 1.5, 0.6, 0.4, 120.0, 0.5).unwrap();
    let c2 = GaussianComponent::new([3.0, 1.0], 0.9, 0.8, 1.3, 200.0, 0.5).unwrap();
    let base = pair_features(&c1, &c2).unwrap();
    for s in [0.25, 2.0, 7.5] {
        let scale = |c: &GaussianComponent| {
            GaussianComponent::new(
                [c.center()[0] * s, c.center()[1] * s],
                c.major_sd() * s,
                c.minor_sd() * s,
                c.angle(),
                c.soft_count(),
                c.weight(),
            )
            .unwrap()
        };
        let f = pair_features(&scale(&c1), &scale(&c2)).unwrap();
        assert!((f.dc - s * base.dc).abs() <= 1e-9 * (1.0 + s * base.dc));
        assert!((f.sd - s * base.sd).abs() <= 1e-9 * (1.0 + s * base.sd));
        assert!((f.dsr - base.dsr).abs() <= 1e-9);
        assert!((f.ed - base.ed).abs() <= 1e-9);
        assert!((f.ac - base.ac).abs() <= 1e-9);
        assert!((f.dd - base.dd / (s * s)).abs() <= 1e-9 * (1.0 + base.dd / (s * s)));
    }
    // Translation leaves everything unchanged.
    let shift = |c: &GaussianComponent, t: [f64; 2]| {
        GaussianComponent::new(
            [c.center()[0] + t[0], c.center()[1] + t[1]],
            c.major_sd(),
            c.minor_sd(),
            c.angle(),
            c.soft_count(),
            c.weight(),
        )
        .unwrap()
    };
    let f = pair_features(&shift(&c1, [7.0, -3.0]), &shift(&c2, [7.0, -3.0])).unwrap();
    for (a, b) in [
        (f.dc, base.dc),
        (f.dsr, base.dsr),
        (f.dd, base.dd),
        (f.sd, base.sd),
        (f.ed, base.ed),
        (f.ac, base.ac),
    ] {
        assert!((a - b).abs() <= 1e-9);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[criterion 3] PASS: closed-form feature oracle suite within 1e-9 in {elapsed:?}");
}

#[test]
fn acceptance_04_regressor_synthetic_path() {
    let start = Instant::now();
    let (set, _) = generate_training_set(5000, &PairRanges::default(), 2000, 11).unwrap();
    let cfg = TrainConfig {
        seed: 11,
        ..Default::default()
    };
    let r2 = cross_validate(&set, &cfg, FeatureMask::default()).unwrap();
    assert!(r2 >= 0.8, "CV R² = {r2}");

    let model = train(&set, &cfg, FeatureMask::default()).unwrap();
    let unit = |x: f64| GaussianComponent::new([x, 0.0], 1.0, 1.0, 0.0, 100.0, 0.5).unwrap();
    let origin = unit(0.0);
    let distances: Vec<f64> = (0..20).map(|i| 0.3 + i as f64 * 0.3).collect();
    let predictions: Vec<f64> = distances
        .iter()
        .map(|&d| model.predict(&pair_features(&origin, &unit(d)).unwrap()))
        .collect();
    let rho = spearman_rho(&distances, &predictions).unwrap();
    assert!(rho >= 0.9, "monotone-separation ρ = {rho}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 180.0, "took {elapsed:?}");
    println!(
        "[criterion 4] PASS: 5-fold CV R² = {r2:.4} on 5000 surrogate rows, DC-monotonicity ρ = {rho:.3} in {elapsed:?}"
    );
}

#[test]
fn acceptance_05_regressor_clustme_path() {
    let params = std::env::var("CLAMS_CLUSTME_PARAMS")
        .unwrap_or_else(|_| "data/clustme_params.csv".into());
    let scores = std::env::var("CLAMS_CLUSTME_SCORES")
        .unwrap_or_else(|_| "data/clustme_scores.csv".into());
    if !std::path::Path::new(&params).exists() || !std::path::Path::new(&scores).exists() {
        println!(
            "[criterion 5] SKIPPED: human-judgment export not available ({params}, {scores}); \
             set CLAMS_CLUSTME_PARAMS / CLAMS_CLUSTME_SCORES to run"
        );
        return;
    }
    let set = clams::datagen::ingest_clustme(&params, &scores).unwrap();
    let cfg = TrainConfig {
        seed: 5,
        ..Default::default()
    };
    let report = ablate(&set, &cfg).unwrap();
    assert!(
        (report.full_r2 - 0.9106).abs() <= 0.03,
        "all-features CV R² = {} vs expected 0.9106 ± 0.03",
        report.full_r2
    );
    let single = |name: &str| {
        report
            .singles
            .iter()
            .find(|r| r.removed[0].name() == name)
            .unwrap()
    };
    let dsr = single("dsr");
    assert!(dsr.pct_change < 0.0, "DSR removal change {}", dsr.pct_change);
    let worst_single = report
        .singles
        .iter()
        .map(|r| r.pct_change)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(dsr.pct_change, worst_single, "DSR is the largest single drop");
    assert!(single("dd").pct_change >= 0.0, "DD removal is non-negative");
    let worst_pair = report
        .pairs
        .iter()
        .min_by(|a, b| a.pct_change.partial_cmp(&b.pct_change).unwrap())
        .unwrap();
    let mut names: Vec<&str> = worst_pair.removed.iter().map(|f| f.name()).collect();
    names.sort_unstable();
    assert_eq!(names, ["dc", "dsr"], "largest pairwise drop is {{DC, DSR}}");
    println!(
        "[criterion 5] PASS: full R² {:.4}, DSR {:.2}%, DD {:+.2}%, worst pair {:?} {:.1}%",
        report.full_r2,
        dsr.pct_change,
        single("dd").pct_change,
        names,
        worst_pair.pct_change
    );
}

fn triangle_scene(side: f64, seed: u64) -> Scatterplot {
    // 1500 points per blob: at 2σ spacing the mixture's departure from a
    // single Gaussian must be statistically visible to BIC, which needs
    // roughly a thousand points per component at that overlap.
    let h = side * 3f64.sqrt() / 2.0;
    let comps = vec![
        blob([0.0, 0.0], 1.0, 1500),
        blob([side, 0.0], 1.0, 1500),
        blob([side / 2.0, h], 1.0, 1500),
    ];
    sample_mixture(format!("triangle-{side}-{seed}"), &comps, seed)
        .unwrap()
        .0
}

#[test]
fn acceptance_06_end_to_end_directionality() {
    let start = Instant::now();
    let model = shared_model();
    let mut wins = 0usize;
    let mut pairs = Vec::new();
    for i in 0..20u64 {
        let cfg = GmmFitConfig {
            k_max: 8,
            restarts: 3,
            seed: i,
            ..Default::default()
        };
        let separated = clams_score(&triangle_scene(20.0, 500 + i), model, &cfg)
            .unwrap()
            .score();
        let overlapping = clams_score(&triangle_scene(2.0, 500 + i), model, &cfg)
            .unwrap()
            .score();
        if separated < overlapping {
            wins += 1;
        }
        pairs.push((separated, overlapping));
    }
    let elapsed = start.elapsed();
    assert!(wins >= 19, "separated < overlapping in only {wins}/20: {pairs:?}");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("[criterion 6] PASS: score(20σ) < score(2σ) in {wins}/20 seeded scene pairs in {elapsed:?}");
}

#[test]
fn acceptance_07_evm_suite() {
    let start = Instant::now();
    let clustering = |labels: &[i64]| Clustering::new(labels.to_vec()).unwrap();

    // Brute-force pair-counting oracle over all 6 point pairs of the cross
    // case, with the standard expected-index adjustment.
    let a = [0i64, 0, 1, 1];
    let b = [0i64, 1, 0, 1];
    let mut same_same = 0.0f64;
    let mut same_a = 0.0;
    let mut same_b = 0.0;
    let mut total = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            total += 1.0;
            let (sa, sb) = (a[i] == a[j], b[i] == b[j]);
            same_a += sa as u8 as f64;
            same_b += sb as u8 as f64;
            same_same += (sa && sb) as u8 as f64;
        }
    }
    let oracle = (total * same_same - same_a * same_b)
        / (total * 0.5 * (same_a + same_b) - same_a * same_b);
    let ari = adjusted_rand(&clustering(&a), &clustering(&b)).unwrap();
    assert_eq!(ari, oracle, "ARI must equal the pair-counting oracle");
    assert_eq!(ari, -0.5);

    let ident = clustering(&[0, 0, 1, 1, 2, 2]);
    assert!((adjusted_rand(&ident, &ident).unwrap() - 1.0).abs() <= 1e-9);
    assert!((adjusted_mutual_info(&ident, &ident).unwrap() - 1.0).abs() <= 1e-9);
    let (_, _, v) = homogeneity_completeness_v(&ident, &ident).unwrap();
    assert!((v - 1.0).abs() <= 1e-9);

    let mut acc = 0.0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + trial);
        let x: Vec<i64> = (0..100).map(|_| rng.random_range(0..3)).collect();
        let y: Vec<i64> = (0..100).map(|_| rng.random_range(0..3)).collect();
        acc += adjusted_rand(&clustering(&x), &clustering(&y)).unwrap();
    }
    let mean_ari = acc / 100.0;
    assert!(mean_ari.abs() <= 0.05, "mean random ARI {mean_ari}");

    let rho = spearman_rho(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 3.0, 2.0, 5.0, 4.0]).unwrap();
    assert_eq!(rho, 0.8);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[criterion 7] PASS: cross-case ARI = {ari} (equals the brute-force pair-counting \
         oracle exactly), identity EVMs = 1, mean random ARI = {mean_ari:.4}, \
         ρ = 0.8 exact, in {elapsed:?}"
    );
}

fn highdim_mixture(seed: u64, dim: usize, n_clusters: usize, total: usize) -> HighDimDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(total);
    let centers: Vec<Vec<f64>> = (0..n_clusters)
        .map(|_| (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect())
        .collect();
    for i in 0..total {
        let c = &centers[i % n_clusters];
        let row: Vec<f64> = c
            .iter()
            .map(|&m| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                m + z
            })
            .collect();
        rows.push(row);
    }
    HighDimDataset::new(rows).unwrap()
}

#[test]
fn acceptance_08_ambiguity_reducer() {
    let start = Instant::now();
    let model = shared_model();
    let mut non_worse = 0usize;
    let mut strict = 0usize;
    let mut within_tau = 0usize;
    let mut rows = Vec::new();
    for i in 0..10u64 {
        let dim = if i % 2 == 0 { 3 } else { 5 };
        let n_clusters = 3 + (i as usize % 3);
        let total = 500 + (i as usize * 167) % 1501;
        let data = highdim_mixture(40 + i, dim, n_clusters, total);
        let cfg = ReducerConfig {
            tau: 0.05,
            budget_phase1: 40,
            budget_phase2: 80,
            seed: 70 + i,
            ..Default::default()
        };
        let run = optimize(&data, &ToyEmbedder, &NeighborhoodF1 { k: 10 }, model, &cfg).unwrap();
        let r = &run.report;
        if r.ambiguity_final <= r.ambiguity_intermediate {
            non_worse += 1;
        }
        if r.ambiguity_final < r.ambiguity_intermediate {
            strict += 1;
        }
        if (r.accuracy_final - r.accuracy_intermediate).abs() <= cfg.tau {
            within_tau += 1;
        }
        rows.push((
            r.ambiguity_intermediate,
            r.ambiguity_final,
            r.accuracy_intermediate,
            r.accuracy_final,
        ));
    }
    let elapsed = start.elapsed();
    assert_eq!(non_worse, 10, "ambiguity increased on some run: {rows:?}");
    assert!(strict >= 8, "strict reduction in only {strict}/10: {rows:?}");
    assert_eq!(within_tau, 10, "accuracy drift above τ: {rows:?}");
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "[criterion 8] PASS: ambiguity non-worse 10/10, strictly lower {strict}/10, |drift| <= 0.05 in 10/10, in {elapsed:?}"
    );
}

/// Bounds a technique's k search range; the benchmark uses a fixed
/// experiment range the way the search space of a published harness would
/// be pinned.
struct BoundedK {
    inner: Box<dyn clams::bench::ClusteringTechnique>,
    hi: usize,
}

impl clams::bench::ClusteringTechnique for BoundedK {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn param_space(&self, n_points: usize) -> Vec<clams::bench::ParamRange> {
        let mut space = self.inner.param_space(n_points);
        for range in &mut space {
            if range.name == "k" {
                range.hi = range.hi.min(self.hi as f64);
            }
        }
        space
    }

    fn run(
        &self,
        plot: &Scatterplot,
        params: &clams::bench::Hyperparameters,
        seed: u64,
    ) -> clams::Result<Clustering> {
        self.inner.run(plot, params, seed)
    }
}

#[test]
fn acceptance_09_benchmark_stability() {
    let start = Instant::now();
    let model = shared_model();
    // Elongated components with random orientations on a chain, spacing
    // measured in units of the mean component size (root sum square of the
    // axis sds). At 1.5σ the chain blends into a filament whose
    // near-degenerate cuts genuinely destabilize technique rankings; at
    // 15σ every technique recovers the same partition.
    let make_set = |spacing: f64, base_seed: u64| -> Vec<Scatterplot> {
        (0..10u64)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(base_seed + i);
                let k = 4usize;
                let specs: Vec<(f64, f64, f64, usize)> = (0..k)
                    .map(|_| {
                        let minor: f64 = rng.random_range(0.7..1.1);
                        let ratio: f64 = rng.random_range(2.0..4.0);
                        let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
                        let count = rng.random_range(60..110);
                        (minor, ratio, angle, count)
                    })
                    .collect();
                let mean_size = specs
                    .iter()
                    .map(|&(minor, ratio, _, _)| (minor * ratio).hypot(minor))
                    .sum::<f64>()
                    / k as f64;
                let step = spacing * mean_size;
                let comps: Vec<ComponentSpec> = specs
                    .iter()
                    .enumerate()
                    .map(|(j, &(minor, ratio, angle, count))| ComponentSpec {
                        center: [j as f64 * step, 0.0],
                        major_sd: minor * ratio,
                        minor_sd: minor,
                        angle,
                        count,
                    })
                    .collect();
                sample_mixture(format!("set{base_seed}-{i}"), &comps, base_seed + i)
                    .unwrap()
                    .0
            })
            .collect()
    };
    let low = make_set(15.0, 600);
    let high = make_set(1.5, 700);

    // The ambiguity score must order the two sets before stability is compared.
    let gmm = GmmFitConfig {
        k_max: 8,
        restarts: 3,
        seed: 3,
        ..Default::default()
    };
    let mean_score = |set: &[Scatterplot]| {
        set.iter()
            .map(|p| clams_score(p, model, &gmm).unwrap().score())
            .sum::<f64>()
            / set.len() as f64
    };
    let (score_low, score_high) = (mean_score(&low), mean_score(&high));
    assert!(
        score_low < score_high,
        "ambiguity ordering: low {score_low} >= high {score_high}"
    );

    let techniques: Vec<Box<dyn clams::bench::ClusteringTechnique>> = default_techniques()
        .into_iter()
        .map(|inner| Box::new(BoundedK { inner, hi: 4 }) as Box<dyn clams::bench::ClusteringTechnique>)
        .collect();
    let mut rhos = Vec::new();
    for metric in [MetricKind::Silhouette, MetricKind::CalinskiHarabasz] {
        let rho_low = rank_stability(&low, &techniques, metric, 20, 1).unwrap().mean_rho;
        let rho_high = rank_stability(&high, &techniques, metric, 20, 1).unwrap().mean_rho;
        assert!(
            rho_low > rho_high,
            "{}: low-set ρ {rho_low} <= high-set ρ {rho_high}",
            metric.name()
        );
        rhos.push((metric.name(), rho_low, rho_high));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 900.0, "took {elapsed:?}");
    println!(
        "[criterion 9] PASS: mean score low {score_low:.3} < high {score_high:.3}; rank stability {rhos:?} in {elapsed:?}"
    );
}

#[test]
fn acceptance_10_scalability() {
    let model = shared_model();
    let scene = |n_total: usize, seed: u64| {
        let per = n_total / 5;
        let comps = vec![
            blob([0.0, 0.0], 1.0, per),
            blob([12.0, 0.0], 1.0, per),
            blob([0.0, 12.0], 1.0, per),
            blob([12.0, 12.0], 1.0, per),
            blob([6.0, 6.0], 1.5, n_total - 4 * per),
        ];
        sample_mixture(format!("scale-{n_total}"), &comps, seed).unwrap().0
    };
    let time_score = |plot: &Scatterplot| {
        let cfg = GmmFitConfig {
            k_max: 10,
            seed: 9,
            ..Default::default()
        };
        let t = Instant::now();
        let report = clams_score(plot, model, &cfg).unwrap();
        (t.elapsed().as_secs_f64(), report.score())
    };
    let small = scene(10_000, 21);
    let large = scene(100_000, 22);
    let (t_small, s_small) = time_score(&small);
    let (t_large, s_large) = time_score(&large);
    let ratio = t_large / t_small;
    assert!(
        ratio <= 20.0,
        "10x points cost {ratio:.1}x time ({t_small:.2}s -> {t_large:.2}s)"
    );
    assert!(t_large < 60.0, "N = 100k took {t_large:.1}s");
    println!(
        "[criterion 10] PASS: N=1e4 in {t_small:.2}s (score {s_small:.3}), N=1e5 in {t_large:.2}s (score {s_large:.3}), ratio {ratio:.1}x"
    );
}
