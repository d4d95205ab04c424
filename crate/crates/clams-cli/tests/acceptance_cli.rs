//! Determinism acceptance: every subcommand, run twice with identical flags
//! and seed, writes byte-identical outputs.

use std::path::Path;
use std::process::Command;

fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_clams"))
        .args(args)
        .output()
        .expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(0),
        "args: {args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Runs one subcommand templated on an output directory, twice, and
/// compares stdout plus every written file byte by byte.
fn assert_deterministic(name: &str, args: impl Fn(&Path) -> Vec<String>, outputs: &[&str]) {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let argv_a: Vec<String> = args(dir_a.path());
    let argv_b: Vec<String> = args(dir_b.path());
    let stdout_a = run_ok(&argv_a.iter().map(String::as_str).collect::<Vec<_>>());
    let stdout_b = run_ok(&argv_b.iter().map(String::as_str).collect::<Vec<_>>());
    // The runs write to different temp dirs; reports may echo the output
    // path, which is the one legitimate difference.
    let normalize = |bytes: &[u8], dir: &Path| {
        String::from_utf8_lossy(bytes).replace(&dir.to_string_lossy().into_owned(), "OUT")
    };
    assert_eq!(
        normalize(&stdout_a, dir_a.path()),
        normalize(&stdout_b, dir_b.path()),
        "{name}: stdout differs between runs"
    );
    for rel in outputs {
        let a = read(&dir_a.path().join(rel));
        let b = read(&dir_b.path().join(rel));
        assert!(a == b, "{name}: output file `{rel}` differs between runs");
        assert!(!a.is_empty(), "{name}: output file `{rel}` is empty");
    }
    println!("[criterion 11] {name}: byte-identical across repeated runs");
}

/// Shared fixture: training data, a model, a scene, clusterings, a manifest,
/// and a high-dimensional CSV, all generated deterministically once.
struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
        run_ok(&[
            "generate", "--seed", "9", "--out", &p("train.csv"),
            "training", "--n", "60", "--mc-samples", "200",
        ]);
        run_ok(&[
            "train", "--training-csv", &p("train.csv"), "--trees", "30",
            "--seed", "4", "--out", &p("model.json"),
        ]);
        run_ok(&[
            "generate", "--seed", "5", "--out", &p("scenes"),
            "scene", "--k", "3", "--n-scenes", "2", "--count", "30,40", "--box-size", "24",
        ]);
        // Clustering fixtures for ground-truth.
        for (plot, votes) in [
            ("p1", ["label\n0\n0\n1\n1\n1\n", "label\n0\n0\n0\n1\n1\n"]),
            ("p2", ["label\n0\n1\n0\n1\n0\n", "label\n1\n1\n0\n0\n0\n"]),
        ] {
            let d = dir.path().join("gt").join(plot);
            std::fs::create_dir_all(&d).unwrap();
            for (i, v) in votes.iter().enumerate() {
                std::fs::write(d.join(format!("r{i}.csv")), v).unwrap();
            }
        }
        let manifest = serde_json::json!([
            {"path": "scenes/scene_000.csv", "group": "low"},
            {"path": "scenes/scene_001.csv", "group": "low"},
        ]);
        std::fs::write(
            dir.path().join("manifest.json"),
            serde_json::to_string(&manifest).unwrap(),
        )
        .unwrap();
        // Small 3-D dataset: three offset grids.
        let mut csv = String::new();
        for i in 0..48 {
            let c = (i % 3) as f64 * 6.0;
            csv.push_str(&format!(
                "{},{},{}\n",
                c + (i % 7) as f64 * 0.3,
                c + (i % 5) as f64 * 0.4,
                (i % 4) as f64 * 0.5
            ));
        }
        std::fs::write(dir.path().join("highdim.csv"), csv).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

#[test]
fn acceptance_11_cli_determinism() {
    let fx = Fixture::new();
    let scene = fx.path("scenes/scene_000.csv");

    assert_deterministic(
        "score",
        |out| {
            vec![
                "score".into(), scene.clone(),
                "--model".into(), fx.path("model.json"),
                "--k-max".into(), "4".into(), "--seed".into(), "2".into(),
                "--svg".into(),
                "--out".into(), out.join("report.json").to_string_lossy().into_owned(),
            ]
        },
        &["report.json", "report.svg"],
    );

    assert_deterministic(
        "train",
        |out| {
            vec![
                "train".into(), "--training-csv".into(), fx.path("train.csv"),
                "--trees".into(), "25".into(), "--seed".into(), "6".into(),
                "--out".into(), out.join("model.json").to_string_lossy().into_owned(),
            ]
        },
        &["model.json"],
    );

    assert_deterministic(
        "ablate",
        |out| {
            vec![
                "ablate".into(), "--training-csv".into(), fx.path("train.csv"),
                "--trees".into(), "10".into(), "--folds".into(), "3".into(),
                "--seed".into(), "8".into(),
                "--out".into(), out.join("ablation.csv").to_string_lossy().into_owned(),
            ]
        },
        &["ablation.csv"],
    );

    assert_deterministic(
        "generate",
        |out| {
            vec![
                "generate".into(), "--seed".into(), "11".into(),
                "--out".into(), out.join("stimuli").to_string_lossy().into_owned(),
                "scene".into(), "--k".into(), "3".into(),
                "--n-scenes".into(), "2".into(), "--count".into(), "20,30".into(),
            ]
        },
        &[
            "stimuli/scene_000.csv",
            "stimuli/scene_000_labels.csv",
            "stimuli/scene_001.csv",
            "stimuli/scene_001_labels.csv",
        ],
    );

    assert_deterministic(
        "ground-truth",
        |out| {
            vec![
                "ground-truth".into(), fx.path("gt"),
                "--out".into(), out.join("gt.json").to_string_lossy().into_owned(),
                "--ranking-csv".into(), out.join("gt.csv").to_string_lossy().into_owned(),
            ]
        },
        &["gt.json", "gt.csv"],
    );

    assert_deterministic(
        "bench",
        |out| {
            vec![
                "bench".into(), "--manifest".into(), fx.path("manifest.json"),
                "--metric".into(), "silhouette".into(),
                "--budget".into(), "4".into(), "--seed".into(), "3".into(),
                "--out".into(), out.join("bench.json").to_string_lossy().into_owned(),
                "--ranking-csv".into(), out.join("bench.csv").to_string_lossy().into_owned(),
            ]
        },
        &["bench.json", "bench.csv"],
    );

    assert_deterministic(
        "reduce",
        |out| {
            vec![
                "reduce".into(), fx.path("highdim.csv"),
                "--model".into(), fx.path("model.json"),
                "--budget1".into(), "4".into(), "--budget2".into(), "6".into(),
                "--knn".into(), "5".into(), "--seed".into(), "7".into(),
                "--out-dir".into(), out.to_string_lossy().into_owned(),
            ]
        },
        &["report.json", "intermediate.csv", "final.csv"],
    );
}
