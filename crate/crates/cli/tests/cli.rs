use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qcheck::generators::pcp::projections_match;
use qcheck::generators::queue::{H1, H2};
use qcheck::membership::witness_equivalent;
use qcheck::{Action, Automaton, Mode, Run};
use serde_json::Value;
use tempfile::TempDir;

fn qcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcheck"))
        .args(args)
        .env_remove("QCHECK_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Queue spec and implementation for three enqueues and three dequeues.
fn queue_dir(dir: &TempDir) -> PathBuf {
    let out = dir.path().join("queue");
    let o = qcheck(&["gen-queue", "--enq", "3", "--deq", "3", "--values", "a,b,c", "--out", p(&out), "--histories", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

fn pcp_dir(dir: &TempDir, text: &str, name: &str) -> PathBuf {
    let inst = put(dir, &format!("{name}.pcp"), text);
    let out = dir.path().join(name);
    let o = qcheck(&["gen-pcp", "--instance", p(&inst), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

fn witness_line(text: &str, key: &str) -> Run {
    let mut lines = text.lines();
    lines.find(|l| *l == format!("# {key}:")).expect("witness header");
    lines.next().unwrap().parse().unwrap()
}

#[test]
fn member_h1_passes_with_equivalent_witness() {
    let dir = TempDir::new().unwrap();
    let q = queue_dir(&dir);
    let h1 = put(&dir, "h1.run", H1);
    let spec = q.join("spec.fa");
    let o = qcheck(&["member", "--mode", "qc", "--spec", p(&spec), "--history", p(&h1), "--witness"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("PASS\n"));
    assert!(out.contains("# quiescent: 0 12"));
    let w = witness_line(&out, "witness");
    let h1_run: Run = H1.parse().unwrap();
    assert!(witness_equivalent(&h1_run, &w, Mode::Qc));
    let spec_fa: Automaton<Action> = fs::read_to_string(&spec).unwrap().parse().unwrap();
    assert!(spec_fa.accepts(&w.actions()));

    let h2 = put(&dir, "h2.run", H2);
    let o = qcheck(&["member", "--spec", p(&spec), "--history", p(&h2)]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn empty_history_passes() {
    let dir = TempDir::new().unwrap();
    let q = queue_dir(&dir);
    let empty = put(&dir, "empty.run", "");
    let o = qcheck(&["member", "--mode", "qc", "--spec", p(&q.join("spec.fa")), "--history", p(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS"));
}

#[test]
fn generated_histories_pass() {
    let dir = TempDir::new().unwrap();
    let q = queue_dir(&dir);
    let mut n = 0;
    for entry in fs::read_dir(q.join("histories")).unwrap() {
        let h = entry.unwrap().path();
        let o = qcheck(&["member", "--spec", p(&q.join("spec.fa")), "--history", p(&h)]);
        assert_eq!(o.status.code(), Some(0), "{}", h.display());
        n += 1;
    }
    assert_eq!(n, 4);
}

#[test]
fn solvable_pcp_fails_with_solution() {
    let dir = TempDir::new().unwrap();
    let out = pcp_dir(&dir, "alphabet: a b\npair: a aa\npair: ab b\n", "solvable");
    let o = qcheck(&[
        "correct",
        "--mode",
        "qsc",
        "--spec",
        p(&out.join("spec.fa")),
        "--impl",
        p(&out.join("impl.fa")),
        "--bound",
        "14",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("FAIL\n"));
    assert!(text.contains("# bound: 14"));
    assert!(text.contains("# unmatched-segment: "));
    let w = witness_line(&text, "counterexample");
    assert_eq!(w.len(), 14);
    assert!(projections_match(&w));
}

#[test]
fn unsolvable_pcp_passes_when_truncated() {
    let dir = TempDir::new().unwrap();
    let out = pcp_dir(&dir, "alphabet: a b\npair: ab ba\n", "unsolvable");
    let args = |bound: &'static str, truncate: bool| {
        let mut v = vec![
            "correct".to_string(),
            "--mode".into(),
            "qsc".into(),
            "--spec".into(),
            p(&out.join("spec.fa")).into(),
            "--impl".into(),
            p(&out.join("impl.fa")).into(),
            "--bound".into(),
            bound.into(),
        ];
        if truncate {
            v.push("--truncate".into());
        }
        v
    };
    let run = |v: Vec<String>| qcheck(&v.iter().map(String::as_str).collect::<Vec<_>>());
    let o = run(args("20", true));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(args("20", false));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("BoundExceeded"));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = TempDir::new().unwrap();
    let bad = put(&dir, "bad.fa", "states: s\ninitial: s\ntrans: s inv:1 s\n");
    let h = put(&dir, "h.run", "");
    let o = qcheck(&["member", "--spec", p(&bad), "--history", p(&h)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("ParseError"), "{err}");
    assert!(err.contains("line 3, column 10"), "{err}");

    let spec = put(&dir, "s.fa", "states: s\ninitial: s\nfinal: s\n");
    let h = put(&dir, "bad.run", "inv:1:a\nres:1:a oops\n");
    let o = qcheck(&["member", "--spec", p(&spec), "--history", p(&h)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2, column 9"));

    let o = qcheck(&["member", "--spec", p(&dir.path().join("missing.fa")), "--history", p(&h)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn illegal_and_unbounded_inputs() {
    let dir = TempDir::new().unwrap();
    let spec = put(&dir, "s.fa", "states: s\ninitial: s\nfinal: s\n");
    let h = put(&dir, "h.run", "res:1:a");
    let o = qcheck(&["member", "--spec", p(&spec), "--history", p(&h)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NotLegal"));

    let h = put(&dir, "long.run", "inv:1:a inv:2:b res:1:a res:2:b");
    let o = qcheck(&["member", "--spec", p(&spec), "--history", p(&h), "--bound", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("BoundExceeded"));
}

#[test]
fn json_report_has_stable_fields() {
    let dir = TempDir::new().unwrap();
    let q = queue_dir(&dir);
    let h1 = put(&dir, "h1.run", H1);
    let o = qcheck(&["member", "--spec", p(&q.join("spec.fa")), "--history", p(&h1), "--witness", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verdict"], "PASS");
    assert_eq!(doc["quiescent_points"], serde_json::json!([0, 12]));
    assert!(doc["witness"].is_string());
    assert!(doc["unmatched_segment"].is_null());
    assert!(doc["stats"]["explored"].as_u64().unwrap() > 0);
    assert_eq!(doc["errors"], serde_json::json!([]));
    assert_eq!(doc["warnings"], serde_json::json!([]));

    let bad = put(&dir, "bad.run", "inv:x:a");
    let o = qcheck(&["member", "--spec", p(&q.join("spec.fa")), "--history", p(&bad), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["verdict"].is_null());
    assert_eq!(doc["errors"][0]["kind"], "ParseError");
}

#[test]
fn parallel_output_matches_sequential() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q22");
    let o = qcheck(&["gen-queue", "--enq", "2", "--deq", "2", "--values", "a,b", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (spec, imp) = (out.join("spec.fa"), out.join("impl.fa"));
    let base = [
        "correct",
        "--mode",
        "qc",
        "--spec",
        p(&spec),
        "--impl",
        p(&imp),
        "--bound",
        "8",
    ];
    let seq = qcheck(&base);
    let mut with = base.to_vec();
    with.push("--parallel");
    let par = qcheck(&with);
    assert_eq!(seq.status.code(), Some(0), "{}", stderr(&seq));
    assert_eq!(stdout(&seq), stdout(&par));

    let pcp = pcp_dir(&dir, "alphabet: a b\npair: a aa\npair: ab b\n", "pcp");
    let (spec, imp) = (pcp.join("spec.fa"), pcp.join("impl.fa"));
    let base = [
        "correct",
        "--mode",
        "qsc",
        "--spec",
        p(&spec),
        "--impl",
        p(&imp),
        "--bound",
        "14",
        "--truncate",
    ];
    let seq = qcheck(&base);
    let mut with = base.to_vec();
    with.push("--parallel");
    assert_eq!(stdout(&seq), stdout(&qcheck(&with)));
}

#[test]
fn pair_limit_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q22");
    qcheck(&["gen-queue", "--enq", "2", "--deq", "2", "--values", "a,b", "--out", p(&out)]);
    let (spec, imp) = (out.join("spec.fa"), out.join("impl.fa"));
    let args = [
        "correct",
        "--spec",
        p(&spec),
        "--impl",
        p(&imp),
        "--bound",
        "8",
    ];
    let o = Command::new(env!("CARGO_BIN_EXE_qcheck"))
        .args(args)
        .env("QCHECK_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ResourceLimit"));
    let mut with = args.to_vec();
    with.extend(["--limit", "1000"]);
    let o = Command::new(env!("CARGO_BIN_EXE_qcheck"))
        .args(with)
        .env("QCHECK_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn written_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let q = queue_dir(&dir);
    for name in ["spec.fa", "impl.fa"] {
        let text = fs::read_to_string(q.join(name)).unwrap();
        let fa: Automaton<Action> = text.parse().unwrap();
        assert_eq!(fa.to_string(), text);
    }
    for entry in fs::read_dir(q.join("histories")).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        let run: Run = text.parse().unwrap();
        assert_eq!(format!("{run}\n"), text);
    }
}

#[test]
fn gen_sat_worked_example_passes() {
    let dir = TempDir::new().unwrap();
    let inst = put(&dir, "ex.sat", "vars: 4\n1 2 -3\n1 -2 4\n2 3 -4\n");
    let out = dir.path().join("sat");
    let o = qcheck(&["gen-sat", "--instance", p(&inst), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("# duplicate-literals: false"));
    let o = qcheck(&["member", "--spec", p(&out.join("spec.fa")), "--history", p(&out.join("history.run"))]);
    assert_eq!(o.status.code(), Some(0));

    // (x1 x1 x1) makes zero or three literals true, never exactly one.
    let inst = put(&dir, "unsat.sat", "vars: 1\n1 1 1\n");
    let out = dir.path().join("unsat");
    let o = qcheck(&["gen-sat", "--instance", p(&inst), "--out", p(&out)]);
    assert!(stdout(&o).contains("# duplicate-literals: true"));
    let o = qcheck(&["member", "--spec", p(&out.join("spec.fa")), "--history", p(&out.join("history.run"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_parikh_matches_inclusion() {
    let dir = TempDir::new().unwrap();
    let a = put(&dir, "a.fa", "states: 0 1 2\ninitial: 0\nfinal: 2\ntrans: 0 x 1\ntrans: 1 y 2\n");
    let b = put(&dir, "b.fa", "states: 0 1 2\ninitial: 0\nfinal: 2\ntrans: 0 y 1\ntrans: 1 x 2\n");
    let out = dir.path().join("pk");
    let o = qcheck(&["gen-parikh", "--a", p(&a), "--b", p(&b), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("# bound: 6"));
    let check = |mode: &str| {
        qcheck(&[
            "correct",
            "--mode",
            mode,
            "--spec",
            p(&out.join("spec.fa")),
            "--impl",
            p(&out.join("impl.fa")),
            "--bound",
            "6",
        ])
        .status
        .code()
    };
    assert_eq!(check("qc"), Some(0));
    assert_eq!(check("qsc"), Some(1));

    let c = put(&dir, "c.fa", "states: 0 1\ninitial: 0\nfinal: 1\ntrans: 0 z 1\n");
    let o = qcheck(&["gen-parikh", "--a", p(&a), "--b", p(&c), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("AlphabetMismatch"));
}

#[test]
fn label_reports_pending_sets() {
    let dir = TempDir::new().unwrap();
    let fa = put(
        &dir,
        "x.fa",
        "states: s q r u\ninitial: s\nfinal: s\ntrans: s inv:1:op q\ntrans: q res:1:op s\ntrans: s inv:2:op r\n",
    );
    let o = qcheck(&["label", "--fa", p(&fa), "--stuck"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "s quiescent=true pending=[]\nq quiescent=false pending=[1:op]\n\
         r quiescent=false pending=[2:op]\nu unreachable\n# stuck: r\n"
    );
    let amb = put(&dir, "amb.fa", "states: s q\ninitial: s\ntrans: s inv:1:op q\ntrans: q res:1:op q\n");
    let o = qcheck(&["label", "--fa", p(&amb)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("AmbiguousQuiescence"));
}
