//! Command-line behavior: exit codes, report content, file resolution.

use tsorobust::cli::{run, Cli, EXIT_ERROR, EXIT_HOLDS, EXIT_REFUTED};
use tsorobust::corpus;

fn invoke(argv: &[&str]) -> (i32, String) {
    let cli = <Cli as clap::Parser>::try_parse_from(argv).expect("argv parses");
    run(cli)
}

fn corpus_path(name: &str) -> String {
    corpus::corpus_dir()
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn parse_roundtrips_through_the_cli() {
    let wsq = corpus_path("wsq.prog");
    let (code, printed) = invoke(&["tsorobust", "parse", &wsq]);
    assert_eq!(code, EXIT_HOLDS);
    // The canonical form parses back to the same canonical form.
    let reparsed = tsorobust::parse_program(&printed).unwrap();
    assert_eq!(tsorobust::print_program(&reparsed), printed);
}

#[test]
fn missing_file_is_a_usage_error() {
    let (code, out) = invoke(&["tsorobust", "parse", "/nonexistent/x.prog"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.starts_with("error:"), "{out}");
}

#[test]
fn parse_error_reports_position_and_exits_3() {
    let dir = tempdir();
    let bad = dir.join("bad.prog");
    std::fs::write(
        &bad,
        "program p vars x; thread t regs; init l0; begin l0: ; end",
    )
    .unwrap();
    let (code, out) = invoke(&["tsorobust", "parse", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.contains("syntax error"), "{out}");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn atomic_names_the_offending_read() {
    let wsq = corpus_path("wsq.prog");
    let (code, out) = invoke(&["tsorobust", "atomic", &wsq, "--steps", "14"]);
    assert_eq!(code, EXIT_REFUTED);
    assert!(out.contains("offending read: owner.t1 (h := H)"), "{out}");
}

#[test]
fn json_reports_are_valid_json() {
    let mp = corpus_path("mp.prog");
    for cmd in ["robust", "atomic", "explore", "compare-states", "parse"] {
        let (_, out) = invoke(&["tsorobust", cmd, &mp, "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap_or_else(|e| {
            panic!("{cmd} emits valid json: {e}\n{out}");
        });
        assert_eq!(v["command"], cmd, "{out}");
        assert_eq!(v["program"], "mp");
    }
}

#[test]
fn robust_json_carries_the_witness_actions() {
    let wsq = corpus_path("wsq.prog");
    let (code, out) = invoke(&[
        "tsorobust",
        "robust",
        &wsq,
        "--steps",
        "19",
        "--buf",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_REFUTED);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "not-robust");
    let witness = v["witness"].as_array().expect("witness action list");
    assert!(witness.iter().any(|a| a == "(owner,isu)"));
    assert_eq!(v["bounds"]["max_steps"], 19);
}

#[test]
fn corpus_env_var_resolves_bare_names() {
    // Run in a subprocess so the env var does not leak across tests.
    let exe = env!("CARGO_BIN_EXE_tsorobust");
    let out = std::process::Command::new(exe)
        .args(["robust", "mp.prog", "--steps", "10", "--buf", "2"])
        .env("TSOROBUST_CORPUS", corpus::corpus_dir())
        .current_dir(std::env::temp_dir())
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(EXIT_HOLDS), "{out:?}");
}

#[test]
fn invalid_abstraction_flag_is_rejected() {
    let wsq = corpus_path("wsq.prog");
    let (code, out) = invoke(&[
        "tsorobust",
        "robust",
        &wsq,
        "--abstract",
        "owner:nowhere:h<=H",
    ]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.contains("unknown label"), "{out}");
}

#[test]
fn abstract_command_refutes_non_weaker_predicates() {
    let wsq = corpus_path("wsq.prog");
    let (code, out) = invoke(&[
        "tsorobust",
        "abstract",
        &wsq,
        "--abstract",
        "owner:t1:h == H + 1",
    ]);
    assert_eq!(code, EXIT_REFUTED);
    assert!(out.contains("not weaker"), "{out}");
}

#[test]
fn trace_dot_emits_a_digraph() {
    let mp = corpus_path("mp.prog");
    let (code, out) = invoke(&[
        "tsorobust",
        "trace-dot",
        &mp,
        "--steps",
        "10",
        "--buf",
        "2",
        "--model",
        "sc",
    ]);
    assert_eq!(code, EXIT_HOLDS);
    assert!(out.starts_with("digraph trace {"), "{out}");
    assert!(out.contains("label=\"po\""));
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("tsorobust-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
