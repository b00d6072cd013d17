//! End-to-end tests of the `gfl` binary against the shipped corpus.

mod common;

use std::path::Path;
use std::process::{Command, Output};

fn gfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus(name: &str) -> String {
    common::corpus_path(name).to_string_lossy().into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn run_accepts_the_triangle() {
    let out = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", &corpus("triangle.gfg")]);
    assert_eq!(stdout(&out), "accepted\n");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn run_rejects_the_two_node_path() {
    let out = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", &corpus("path2.gfg")]);
    assert_eq!(stdout(&out), "rejected\n");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_matches_run_on_the_corpus() {
    for graph in ["triangle.gfg", "path2.gfg", "loop1.gfg", "empty.gfg", "star3.gfg"] {
        let run = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", &corpus(graph)]);
        let check = gfl(&[
            "check",
            "--system",
            &corpus("ham.gfs"),
            "--var",
            "u",
            "--graph",
            &corpus(graph),
        ]);
        assert_eq!(stdout(&run), stdout(&check), "{graph}");
        assert_eq!(run.status.code(), check.status.code(), "{graph}");
    }
}

#[test]
fn check_at_v_detects_leftover_nodes() {
    let acceptd = gfl(&["check", "--system", &corpus("ham.gfs"), "--var", "v", "--graph", &corpus("empty.gfg")]);
    assert_eq!(stdout(&acceptd), "accepted\n");
    let rejected = gfl(&["check", "--system", &corpus("ham.gfs"), "--var", "v", "--graph", &corpus("path2.gfg")]);
    assert_eq!(stdout(&rejected), "rejected\n");
}

#[test]
fn validate_corpus_files() {
    for file in ["ham.gfa", "ham.gfs", "cycle.gfe", "triangle.gfg"] {
        let out = gfl(&["validate", &corpus(file)]);
        assert_eq!(out.status.code(), Some(0), "{file}");
        assert_eq!(stdout(&out), "ok\n");
    }
}

#[test]
fn validate_reports_parse_errors_with_location() {
    let dir = std::env::temp_dir().join("gfl-cli-test-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.gfg");
    std::fs::write(&bad, "graph G (2,0) {\n  nodes a b;\n  front a a;\n  rear;\n}\n").unwrap();
    let out = gfl(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("3:"), "no location in: {err}");
    assert!(err.contains("repetition-free"), "{err}");
}

#[test]
fn indeterminate_verdicts_exit_2() {
    let dir = std::env::temp_dir().join("gfl-cli-test-indeterminate");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("spin.gfa");
    // a single existential state spinning on the empty identity graph: the
    // configuration graph is one self-loop, which never receives a value
    std::fs::write(
        &file,
        "alphabet { _/2 }\n\
         graph ID0 (0,0) { nodes; front; rear; }\n\
         automaton { state q:0 exists init; trans q -ID0-> q; }\n",
    )
    .unwrap();
    let out = gfl(&["run", "--automaton", file.to_str().unwrap(), "--graph", &corpus("path2.gfg")]);
    assert_eq!(stdout(&out), "indeterminate\n");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    let out = gfl(&["run", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn missing_file_exits_70() {
    let out = gfl(&["validate", "/no/such/file.gfs"]);
    assert_eq!(out.status.code(), Some(70));
}

#[test]
fn translated_automaton_agrees_with_the_original() {
    let dir = std::env::temp_dir().join("gfl-cli-test-translate");
    std::fs::create_dir_all(&dir).unwrap();
    let translated = dir.join("ham-as-system.gfs");
    let out = gfl(&[
        "translate",
        "a2f",
        "--automaton",
        &corpus("ham.gfa"),
        "-o",
        translated.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for graph in ["triangle.gfg", "path2.gfg", "loop1.gfg", "empty.gfg", "star3.gfg"] {
        let direct = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", &corpus(graph)]);
        let via_system = gfl(&[
            "check",
            "--system",
            translated.to_str().unwrap(),
            "--var",
            "q0",
            "--graph",
            &corpus(graph),
        ]);
        assert_eq!(stdout(&direct), stdout(&via_system), "{graph}");
    }
}

#[test]
fn normalize_then_translate_to_automaton() {
    let dir = std::env::temp_dir().join("gfl-cli-test-normalize");
    std::fs::create_dir_all(&dir).unwrap();
    let normalized = dir.join("ham-normal.gfs");
    let out = gfl(&[
        "normalize",
        "--system",
        &corpus("ham.gfs"),
        "-o",
        normalized.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // the emitted normal form is itself a valid file with shallow definitions
    let check = gfl(&["validate", normalized.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    let reparsed = gfl::format::SpecFile::parse(&std::fs::read_to_string(&normalized).unwrap())
        .expect("normalize output parses");
    let sys = reparsed.system.expect("normalize output declares a system");
    assert!(sys.var_ids().all(|x| sys.definition(x).is_shallow()));
    let automaton = dir.join("ham-from-system.gfa");
    let out = gfl(&[
        "translate",
        "f2a",
        "--system",
        &corpus("ham.gfs"),
        "--var",
        "u",
        "-o",
        automaton.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for graph in ["triangle.gfg", "path2.gfg", "loop1.gfg", "star3.gfg"] {
        let direct = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", &corpus(graph)]);
        let via = gfl(&["run", "--automaton", automaton.to_str().unwrap(), "--graph", &corpus(graph)]);
        assert_eq!(stdout(&direct), stdout(&via), "{graph}");
    }
}

#[test]
fn dot_outputs_are_wellformed_and_deterministic() {
    let cg1 = gfl(&["dot", "cg", "--automaton", &corpus("ham.gfa"), "--graph", &corpus("triangle.gfg")]);
    assert_eq!(cg1.status.code(), Some(0));
    common::check_dot(&stdout(&cg1)).expect("cg DOT is well-formed");
    let cg2 = gfl(&["dot", "cg", "--automaton", &corpus("ham.gfa"), "--graph", &corpus("triangle.gfg")]);
    assert_eq!(cg1.stdout, cg2.stdout, "repeated runs are byte-identical");

    let fcg = gfl(&[
        "dot", "fcg", "--system", &corpus("ham.gfs"), "--var", "u", "--graph", &corpus("loop1.gfg"),
    ]);
    assert_eq!(fcg.status.code(), Some(0));
    let text = stdout(&fcg);
    common::check_dot(&text).expect("fcg DOT is well-formed");
    // the root of the accepted input is filled green
    let root_line = text.lines().find(|l| l.trim_start().starts_with("n0 ")).unwrap();
    assert!(root_line.contains("palegreen"), "{root_line}");
}

#[test]
fn translate_output_is_deterministic() {
    let a = gfl(&["translate", "a2f", "--automaton", &corpus("ham.gfa")]);
    let b = gfl(&["translate", "a2f", "--automaton", &corpus("ham.gfa")]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn graph_name_selection() {
    let dir = std::env::temp_dir().join("gfl-cli-test-name");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("two.gfg");
    std::fs::write(
        &file,
        "graph a (0,0) { nodes n; front; rear; edge _(n,n); }\n\
         graph b (0,0) { nodes n; front; rear; }\n",
    )
    .unwrap();
    let f = file.to_str().unwrap();
    let ambiguous = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", f]);
    assert_eq!(ambiguous.status.code(), Some(65));
    let picked = gfl(&["run", "--automaton", &corpus("ham.gfa"), "--graph", f, "--name", "a"]);
    assert_eq!(stdout(&picked), "accepted\n");
}

#[test]
fn corpus_paths_exist() {
    assert!(Path::new(&corpus("ham.gfa")).exists());
}
