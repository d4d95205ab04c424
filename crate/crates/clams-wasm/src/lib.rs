//! Browser demo bindings: train a surrogate separability model in the page,
//! then explore scene ambiguity and pairwise separability interactively.

use wasm_bindgen::prelude::*;

use clams::ambiguity::{clams_score, entropy_ambiguity};
use clams::datagen::{generate_training_set, sample_mixture, ComponentSpec, PairRanges};
use clams::error::Result;
use clams::features::{pair_features, FeatureMask};
use clams::gmm::GmmFitConfig;
use clams::separability::{train, SeparabilityModel, TrainConfig};
use clams::svg::render_report_svg;
use clams::types::{AmbiguityReport, Decomposition, PairAmbiguity};

/// Interactive scoring session holding one trained surrogate model.
#[wasm_bindgen]
pub struct Demo {
    model: SeparabilityModel,
}

#[wasm_bindgen]
impl Demo {
    /// Trains a small surrogate-labeled model; takes a moment on load.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> std::result::Result<Demo, JsValue> {
        build_demo(seed as u64).map_err(to_js)
    }

    /// Generates a ring scene, scores it, and returns JSON with the SVG
    /// rendering, the ambiguity score, and the per-pair breakdown.
    pub fn score_scene(
        &self,
        k: u32,
        spacing: f64,
        ellipticity: f64,
        points_per_component: u32,
        seed: u32,
    ) -> std::result::Result<String, JsValue> {
        score_scene_json(
            &self.model,
            k as usize,
            spacing,
            ellipticity,
            points_per_component as usize,
            seed as u64,
        )
        .map_err(to_js)
    }

    /// Scores a configurable two-component pair and returns JSON with the
    /// six features, predicted separability, its entropy, and an SVG.
    #[allow(clippy::too_many_arguments)]
    pub fn explore_pair(
        &self,
        distance: f64,
        size2: f64,
        ellipticity2: f64,
        angle2_deg: f64,
        count_ratio: f64,
        seed: u32,
    ) -> std::result::Result<String, JsValue> {
        explore_pair_json(
            &self.model,
            distance,
            size2,
            ellipticity2,
            angle2_deg.to_radians(),
            count_ratio,
            seed as u64,
        )
        .map_err(to_js)
    }
}

/// Samples the binary-entropy curve A(s) as JSON `[[s, a], ...]`.
#[wasm_bindgen]
pub fn entropy_curve(samples: u32) -> String {
    let n = samples.max(2);
    let pts: Vec<[f64; 2]> = (0..=n)
        .map(|i| {
            let s = i as f64 / n as f64;
            [s, entropy_ambiguity(s).unwrap()]
        })
        .collect();
    serde_json::to_string(&pts).expect("curve serializes")
}

fn to_js(e: clams::ClamsError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn build_demo(seed: u64) -> Result<Demo> {
    let (set, _) = generate_training_set(400, &PairRanges::default(), 500, seed)?;
    let model = train(
        &set,
        &TrainConfig {
            n_trees: 80,
            seed,
            ..Default::default()
        },
        FeatureMask::default(),
    )?;
    Ok(Demo { model })
}

fn score_scene_json(
    model: &SeparabilityModel,
    k: usize,
    spacing: f64,
    ellipticity: f64,
    points_per_component: usize,
    seed: u64,
) -> Result<String> {
    let k = k.clamp(1, 9);
    let points = points_per_component.clamp(20, 500);
    let ellipticity = ellipticity.clamp(1.0, 5.0);
    let spacing = spacing.clamp(0.0, 40.0);
    // Adjacent centers on a ring sit `spacing` apart (σ_minor = 1).
    let radius = if k > 1 {
        spacing / (2.0 * (std::f64::consts::PI / k as f64).sin())
    } else {
        0.0
    };
    let comps: Vec<ComponentSpec> = (0..k)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / k as f64;
            ComponentSpec {
                center: [radius * theta.cos(), radius * theta.sin()],
                major_sd: ellipticity,
                minor_sd: 1.0,
                angle: clams::types::canonicalize_angle(theta + std::f64::consts::FRAC_PI_2),
                count: points,
            }
        })
        .collect();
    let (plot, _) = sample_mixture("scene", &comps, seed)?;
    let cfg = GmmFitConfig {
        k_max: 9,
        restarts: 3,
        max_iters: 100,
        seed,
        ..Default::default()
    };
    let report = clams_score(&plot, model, &cfg)?;
    report_json(&plot, &report)
}

fn explore_pair_json(
    model: &SeparabilityModel,
    distance: f64,
    size2: f64,
    ellipticity2: f64,
    angle2: f64,
    count_ratio: f64,
    seed: u64,
) -> Result<String> {
    let distance = distance.clamp(0.0, 20.0);
    let size2 = size2.clamp(0.2, 4.0);
    let ellipticity2 = ellipticity2.clamp(1.0, 5.0);
    let count_ratio = count_ratio.clamp(0.1, 10.0);
    let n1 = 150usize;
    let n2 = ((n1 as f64 * count_ratio) as usize).clamp(10, 1500);
    let spec1 = ComponentSpec {
        center: [0.0, 0.0],
        major_sd: 1.0,
        minor_sd: 1.0,
        angle: 0.0,
        count: n1,
    };
    let spec2 = ComponentSpec {
        center: [distance, 0.0],
        major_sd: size2 * ellipticity2,
        minor_sd: size2,
        angle: clams::types::canonicalize_angle(angle2),
        count: n2,
    };
    let total = (n1 + n2) as f64;
    let c1 = spec1.to_component(n1 as f64 / total)?;
    let c2 = spec2.to_component(n2 as f64 / total)?;
    let mut feats = pair_features(&c1, &c2)?;
    feats.pair = (0, 1);
    let separability = model.predict(&feats);
    let ambiguity = entropy_ambiguity(separability)?;

    // Render the TRUE generating components over a sample drawn from them.
    let (plot, _) = sample_mixture("pair", &[spec1, spec2], seed)?;
    let decomposition = Decomposition::new(vec![c1, c2], vec![], 0.0)?;
    let report = AmbiguityReport::new(
        vec![PairAmbiguity {
            pair: (0, 1),
            separability,
            ambiguity,
        }],
        decomposition,
    )?;
    let svg = render_report_svg(&plot, &report, 420);
    let value = serde_json::json!({
        "features": {
            "dc": feats.dc,
            "dsr": feats.dsr,
            "dd": feats.dd,
            "sd": feats.sd,
            "ed": feats.ed,
            "ac": feats.ac,
        },
        "separability": separability,
        "ambiguity": ambiguity,
        "svg": svg,
    });
    Ok(round_to_string(value))
}

fn report_json(plot: &clams::types::Scatterplot, report: &AmbiguityReport) -> Result<String> {
    let svg = render_report_svg(plot, report, 420);
    let value = serde_json::json!({
        "score": report.score(),
        "k_opt": report.decomposition().k_opt(),
        "points": plot.len(),
        "pairs": report.pairs(),
        "svg": svg,
    });
    Ok(round_to_string(value))
}

fn round_to_string(mut value: serde_json::Value) -> String {
    clams::util::round_json_floats(&mut value, 6);
    serde_json::to_string(&value).expect("report serializes")
}
