use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn contestq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contestq"))
        .args(args)
        .env_remove("CONTESTQ_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn emit(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["instance"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--emit", path.to_str().unwrap()]);
    let out = contestq(&all);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn counterexample_has_no_equilibrium() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce1.json", &["counterexample1"]);
    let out = contestq(&["solve", "--game", p(&game), "--method", "brute"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stdout(&out),
        "no pure Nash equilibrium (9 profiles scanned)\n"
    );
}

#[test]
fn all_at_lowest_verifies() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "g.json", &["fip-mandatory", "--n", "2", "--q", "3"]);
    let out = contestq(&["verify", "--game", p(&game), "--profile", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("pure Nash equilibrium (1,1)\n"));

    let out = contestq(&["verify", "--game", p(&game), "--profile", "2,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("player 1 gains"));
}

#[test]
fn anonymous_graph_dot_has_two_sinks() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "fip.json", &["fip-voluntary", "--n", "3", "--q", "3"]);
    let dot = dir.path().join("out.dot");
    let out = contestq(&["graph", "--game", p(&game), "--anonymous", "--dot", p(&dot)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("doublecircle").count(), 2);
    assert!(stdout(&out).contains("sinks (3,0,0) (2,1,0)"));
}

#[test]
fn cyclic_graph_exits_one() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce2.json", &["counterexample2", "--k", "2"]);
    let out = contestq(&["graph", "--game", p(&game)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("cyclic"));
}

#[test]
fn solve_json_round_trips_into_verify() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "g.json", &["fip-voluntary", "--n", "3", "--q", "2"]);
    for method in ["brute", "contiguous", "potential"] {
        let out = contestq(&[
            "--format",
            "json",
            "solve",
            "--game",
            p(&game),
            "--method",
            method,
            "--trust",
        ]);
        if method == "potential" {
            // Proportional allocation is not oblivious.
            assert_eq!(out.status.code(), Some(2));
            continue;
        }
        assert_eq!(out.status.code(), Some(0), "{method}");
        let value: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(value["found"], Value::Bool(true));
        let file = dir.path().join(format!("{method}.json"));
        std::fs::write(&file, &out.stdout).unwrap();
        let check = contestq(&["verify", "--game", p(&game), "--profile-file", p(&file)]);
        assert_eq!(check.status.code(), Some(0), "{method}");

        let bare = dir.path().join("bare.json");
        std::fs::write(&bare, value["profile"].to_string()).unwrap();
        let check = contestq(&["verify", "--game", p(&game), "--profile-file", p(&bare)]);
        assert_eq!(check.status.code(), Some(0));
    }
}

#[test]
fn text_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce2.json", &["counterexample2", "--k", "3"]);
    let run = || {
        stdout(&contestq(&[
            "dynamics",
            "--game",
            p(&game),
            "--start",
            "1,1",
            "--policy",
            "random",
            "--seed",
            "7",
        ]))
    };
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}

#[test]
fn best_response_dynamics_cycle() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "mp.json", &["matching-pennies"]);
    let out = contestq(&[
        "dynamics",
        "--game",
        p(&game),
        "--start",
        "1,2",
        "--policy",
        "best",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stdout(&out),
        "cycle of length 4: (1,2) -> (1,1) -> (2,1) -> (2,2) -> (1,2)\n"
    );
}

#[test]
fn load_vector_start() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "fip.json", &["fip-mandatory", "--n", "3", "--q", "3"]);
    let out = contestq(&["dynamics", "--game", p(&game), "--start", "L:0,1,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("converged to (1,1,1)"));
}

#[test]
fn instance_certificates_pass() {
    for args in [
        vec!["counterexample1"],
        vec!["counterexample2", "--k", "4"],
        vec!["matching-pennies"],
        vec!["fip-voluntary", "--n", "4", "--q", "3"],
        vec!["fip-mandatory", "--n", "4", "--q", "3"],
        vec!["lower-bounded", "--skills", "2,2", "--efforts", "1,2,3"],
    ] {
        let mut all = vec!["instance"];
        all.extend_from_slice(&args);
        all.push("--verify");
        let out = contestq(&all);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stdout(&out));
        assert!(!stdout(&out).contains("FAIL"));
    }
}

#[test]
fn instance_without_emit_prints_game_file() {
    let out = contestq(&["instance", "counterexample2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["skills"], serde_json::json!(["3/19", "3/31"]));
    assert_eq!(value["payment"]["type"], "proportional");
}

#[test]
fn concavity_verdicts() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce2.json", &["counterexample2", "--k", "2"]);
    let out = contestq(&["concavity", "--game", p(&game)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("not three-discrete concave"));
}

#[test]
fn classify_reports_classes() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce1.json", &["counterexample1"]);
    let out = contestq(&["--format", "json", "classify", "--game", p(&game)]);
    assert_eq!(out.status.code(), Some(0));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["oblivious"], Value::Bool(false));
    assert_eq!(value["player_invariant"], Value::Bool(true));
}

#[test]
fn errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce1.json", &["counterexample1"]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "Q": 2, "extra": true}"#).unwrap();

    assert_eq!(
        contestq(&["solve", "--game", p(&bad)]).status.code(),
        Some(2)
    );
    assert_eq!(
        contestq(&["solve", "--game", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        contestq(&["verify", "--game", p(&game), "--profile", "1,4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        contestq(&["verify", "--game", p(&game), "--profile", "1,x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        contestq(&["solve", "--game", p(&game), "--method", "all-at-one"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(contestq(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "ce1.json", &["counterexample1"]);
    let out = Command::new(env!("CARGO_BIN_EXE_contestq"))
        .args(["solve", "--game", p(&game)])
        .env("CONTESTQ_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn workers_flag_keeps_answers() {
    let dir = TempDir::new().unwrap();
    let game = emit(&dir, "fip.json", &["fip-voluntary", "--n", "5", "--q", "3"]);
    let one = contestq(&["--workers", "1", "solve", "--game", p(&game), "--all"]);
    let many = contestq(&["--workers", "4", "solve", "--game", p(&game), "--all"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&many));
}
