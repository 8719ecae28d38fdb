//! End-to-end tests of the `behavrank` binary.

use std::path::Path;
use std::process::{Command, Output};

fn behavrank(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_behavrank"))
        .args(args)
        .current_dir(cwd)
        .env_remove("BEHAVRANK_ARTIFACTS")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

const CONFIG: &str = r#"{
  "schema": "synthetic",
  "seed": 5,
  "models": "fit",
  "setups": [{"kind": "all_players"}],
  "synth": {"players": 40, "matches": 400, "seed": 9}
}"#;

#[test]
fn synth_run_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.json"), CONFIG).unwrap();

    ok(&behavrank(&["synth", "--config", "run.json", "-o", "log.jsonl"], d));
    for (out, arts) in [("a.json", "arts_a"), ("b.json", "arts_b")] {
        ok(&behavrank(
            &["run", "--config", "run.json", "--log", "log.jsonl", "--artifacts", arts, "-o", out],
            d,
        ));
        assert!(d.join(arts).join("factors.json").exists());
        assert!(d.join(arts).join("weights.json").exists());
    }
    let a = std::fs::read(d.join("a.json")).unwrap();
    let b = std::fs::read(d.join("b.json")).unwrap();
    assert_eq!(a, b, "reports differ between identical runs");

    let table = behavrank(&["report", "a.json"], d);
    ok(&table);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("all_players"));
    assert!(text.contains("weighted"));

    let machine = behavrank(&["report", "--format", "machine", "a.json"], d);
    ok(&machine);
    assert_eq!(machine.stdout, a);
}

#[test]
fn fit_subcommands_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.json"), CONFIG).unwrap();
    ok(&behavrank(&["synth", "--config", "run.json", "-o", "log.jsonl"], d));
    ok(&behavrank(&["fit", "factors", "--log", "log.jsonl", "-o", "m/factors.json"], d));
    ok(&behavrank(&["fit", "weights", "--log", "log.jsonl", "-o", "m/weights.json"], d));
    let weights: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("m/weights.json")).unwrap()).unwrap();
    assert_eq!(weights["kind"], "weight_model");
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("x.csv"), "match_id\n").unwrap();

    let bad_schema = behavrank(&["ingest", "--schema", "chess", "x.csv", "-o", "out.jsonl"], d);
    assert_eq!(bad_schema.status.code(), Some(2));

    let missing = behavrank(&["ingest", "--schema", "csgo", "nope.csv", "-o", "out.jsonl"], d);
    assert_eq!(missing.status.code(), Some(4));

    let missing_report = behavrank(&["report", "nope.json"], d);
    assert_eq!(missing_report.status.code(), Some(4));
}
