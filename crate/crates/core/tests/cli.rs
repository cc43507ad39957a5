use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vv"))
        .args(args)
        .current_dir(dir)
        .env_remove("VV_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const SMALL: &[&str] = &["--no-inner", "--k", "3", "--models", "oracle,exact_memo"];

fn small_dataset(dir: &Path) {
    let out = vv(
        dir,
        &[
            "gen-synth",
            "--count",
            "60",
            "--num-nodes",
            "12",
            "--edge-prob",
            "0.4",
            "--out",
            "d.jsonl",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn truth() -> &'static str {
    r#"{"family":"er","num_nodes":12,"edge_prob":0.4}"#
}

#[test]
fn gen_synth_writes_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let graphs = vv::graph::read_jsonl(dir.path().join("d.jsonl")).unwrap();
    assert_eq!(graphs.len(), 60);
    assert!(graphs.iter().all(|g| g.num_nodes() == 12));

    let out = vv(
        dir.path(),
        &["gen-synth", "--family", "comm", "--count", "5"],
    );
    assert_eq!(code(&out), 0);
    let comm = vv::graph::read_jsonl_from(&out.stdout[..], Path::new("stdout")).unwrap();
    assert!(comm
        .iter()
        .all(|g| g.num_nodes() % 2 == 0 && (12..=20).contains(&g.num_nodes())));
}

#[test]
fn split_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let out = vv(
        dir.path(),
        &[
            "split",
            "--dataset",
            "d.jsonl",
            "--no-inner",
            "--k",
            "3",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows =
        vv::splitter::read_split_csv(fs::File::open(dir.path().join("s.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 60);
    assert!(rows
        .iter()
        .all(|(_, label, u)| (1..=3).contains(label) && *u > 0.0 && *u < 1.0));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("graph_id,label,u_value\n"));
}

#[test]
fn matrix_report_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let run = |out_dir: &str| {
        let mut args = vec![
            "matrix",
            "--dataset",
            "d.jsonl",
            "--ground-truth",
            truth(),
            "--output-dir",
            out_dir,
        ];
        args.extend_from_slice(SMALL);
        let out = vv(dir.path(), &args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(dir.path().join(out_dir).join("matrix.json")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    for f in [
        "oracle.cells.csv",
        "oracle.summary.csv",
        "exact_memo.cells.csv",
        "config.json",
    ] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let out = vv(dir.path(), &["report", "a/matrix.json", "--out", "r"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("model oracle"));
    assert!(dir.path().join("r/exact_memo.summary.csv").exists());
}

#[test]
fn seed_env_var_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let split_with = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vv"));
        cmd.args(["split", "--dataset", "d.jsonl", "--no-inner", "--k", "3"])
            .current_dir(dir.path());
        match seed {
            Some(s) => cmd.env("VV_SEED", s),
            None => cmd.env_remove("VV_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    assert_eq!(split_with(None), split_with(Some("0")));
    assert_ne!(split_with(None), split_with(Some("99")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    fs::write(dir.path().join("bad.json"), r#"{"dataset": 3}"#).unwrap();
    assert_eq!(
        code(&vv(dir.path(), &["evaluate", "--config", "bad.json"])),
        2
    );
    assert_eq!(code(&vv(dir.path(), &["matrix", "--k", "1"])), 2);
    // distributional model without a ground truth
    assert_eq!(
        code(&vv(
            dir.path(),
            &[
                "evaluate",
                "--dataset",
                "d.jsonl",
                "--no-inner",
                "--models",
                "oracle"
            ]
        )),
        2
    );
    assert_eq!(
        code(&vv(dir.path(), &["split", "--dataset", "missing.jsonl"])),
        3
    );
    fs::write(
        dir.path().join("broken.jsonl"),
        "{\"id\":\"x\",\"num_nodes\":2,\"edges\":[[0,5]]}\n",
    )
    .unwrap();
    assert_eq!(
        code(&vv(dir.path(), &["split", "--dataset", "broken.jsonl"])),
        3
    );

    // the far model cannot reach the tail in one batch
    let out = vv(
        dir.path(),
        &[
            "evaluate",
            "--dataset",
            "d.jsonl",
            "--ground-truth",
            truth(),
            "--no-inner",
            "--k",
            "3",
            "--models",
            "far",
            "--max-batches",
            "1",
            "--split-property",
            "triangle_count",
            "--output-dir",
            "stall",
        ],
    );
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("stall/cell.json").exists());
}

#[test]
fn config_file_with_flag_overrides_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let cfg = r#"{
        "dataset": {"file": "d.jsonl"},
        "properties": ["avg_degree", "triangle_count", "avg_clustering"],
        "split": {"k": 4, "psi": 10, "epsilon": 0.01, "split_property": "auto"},
        "models": [{"reference": {"kind": "oracle", "ground_truth": {"family": "er", "num_nodes": 12, "edge_prob": 0.4}}}],
        "metrics": ["ks", "wasserstein1"],
        "seed": 5
    }"#;
    fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let out = vv(
        dir.path(),
        &[
            "evaluate",
            "--config",
            "cfg.json",
            "--k",
            "3",
            "--held",
            "1",
            "--output-dir",
            "o",
            "--dump-intermediates",
        ],
    );
    assert!(
        matches!(code(&out), 0 | 4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let written: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/config.json")).unwrap())
            .unwrap();
    assert_eq!(written["split"]["k"], 3);
    assert_eq!(written["seed"], 5);
    let reports: Vec<vv::pipeline::EvalReport> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/cell.json")).unwrap()).unwrap();
    assert_eq!(reports[0].cells.len(), 2);
    assert!(reports[0]
        .cells
        .iter()
        .all(|c| c.split_index == 1 && c.metrics.contains_key("wasserstein1")));
    let dumps: Vec<String> = fs::read_dir(dir.path().join("o/intermediates"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for suffix in [".projection.json", ".weights.csv", ".ecdf.csv"] {
        assert!(
            dumps.iter().any(|d| d.ends_with(suffix)),
            "{suffix} in {dumps:?}"
        );
    }
}
