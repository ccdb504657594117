use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn models() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "models"]
        .iter()
        .collect()
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn resaware(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resaware"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn extent_both_engines() {
    for engine in ["generic", "recursive", "fig1"] {
        let o = resaware(&["extent", "--engine", engine, &model("a1.ram")]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "x=1\ny=1\ny1=0\ny2=0\n");
        let o = resaware(&["extent", "--engine", engine, &model("a2.ram")]);
        assert_eq!(stdout(&o), "x=2\ny1=1\ny2=0\n");
    }
}

#[test]
fn malformed_model_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ram");
    std::fs::write(
        &path,
        "semiring tropical-bounded 4\nsig s/1\nstate p parity one\n",
    )
    .unwrap();
    let o = resaware(&["extent", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let o = resaware(&["extent", "/nonexistent/model.ram"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_summary() {
    let o = resaware(&["check", &model("a2.ram")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("kind=game\n") && out.contains("buchi=true\n"),
        "{out}"
    );
}

#[test]
fn synth_then_simulate_a1() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("a1.strat");
    let strat = strat.to_str().unwrap();
    let o = resaware(&["synth", &model("a1.ram"), "--out", strat]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("y theta=6\n"));
    let file = std::fs::read_to_string(strat).unwrap();
    assert!(file.contains("y theta=6 acceptor=_y:step(x:1) base=_y:step(y1:0)"));

    let o = resaware(&[
        "simulate",
        &model("a1.ram"),
        strat,
        "--from",
        "y",
        "--mem",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let trace: String = out
        .lines()
        .filter_map(|l| l.split(" -> ").next().filter(|c| c.starts_with('(')))
        .collect();
    assert_eq!(
        trace,
        "(y,1)(y1,0)(y,2)(y1,1)(y,3)(y1,2)(y,4)(y1,3)(y,5)(y1,4)(y,6)(x,1)"
    );
    assert_eq!(out.lines().last(), Some("ACCEPTING value=1"));

    let o = resaware(&[
        "simulate",
        &model("a1.ram"),
        strat,
        "--from",
        "y",
        "--mem",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("(y,0)"));

    let o = resaware(&[
        "simulate",
        &model("a1.ram"),
        strat,
        "--from",
        "y",
        "--mem",
        "1",
        "--steps",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("INCONCLUSIVE"));
}

#[test]
fn a2_wins_from_two() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("a2.strat");
    let strat = strat.to_str().unwrap();
    assert_eq!(
        resaware(&["synth", &model("a2.ram"), "--out", strat])
            .status
            .code(),
        Some(0)
    );
    for adversary in ["worst", "random:1", "random:2", "random:3"] {
        let o = resaware(&[
            "simulate",
            &model("a2.ram"),
            strat,
            "--from",
            "x",
            "--mem",
            "2",
            "--adversary",
            adversary,
        ]);
        assert_eq!(o.status.code(), Some(0), "{adversary}");
        assert!(
            stdout(&o).lines().last().unwrap().starts_with("ACCEPTING"),
            "{adversary}"
        );
    }
    let o = resaware(&[
        "simulate",
        &model("a2.ram"),
        strat,
        "--from",
        "x",
        "--mem",
        "2",
        "--adversary",
        "best",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interactive_adversary_reprompts() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("a2.strat");
    let strat = strat.to_str().unwrap();
    resaware(&["synth", &model("a2.ram"), "--out", strat]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_resaware"))
        .args([
            "simulate",
            &model("a2.ram"),
            strat,
            "--from",
            "x",
            "--mem",
            "2",
            "--adversary",
            "interactive",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"7\nnope\n1\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("1) g"));
    assert!(stderr(&o).contains("enter a number"));
    assert!(
        stdout(&o).starts_with("(x,2) via g -> (x,2)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn synth_refuses_higher_parity() {
    let o = resaware(&["synth", &model("parity3.ram")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unsupported: parity synthesis"));
}

#[test]
fn value_of_run_files() {
    let o = resaware(&["value", &model("a1.ram"), &model("a1_optimal.run")]);
    assert_eq!(stdout(&o), "value=1\naccepting=true\n");
    let o = resaware(&["value", &model("a1.ram"), &model("a1_short.run")]);
    assert_eq!(stdout(&o), "value=inf\naccepting=true\n");
}

#[test]
fn oracle_check_ranges() {
    let o = resaware(&[
        "oracle-check",
        "--seeds",
        "1..100",
        "--profile",
        "buchi-automaton",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("100/100 ok"));
    let o = resaware(&[
        "oracle-check",
        "--seeds",
        "1..50",
        "--profile",
        "buchi-game",
    ]);
    assert_eq!(stdout(&o).lines().last(), Some("50/50 ok"));
    let o = resaware(&["oracle-check", "--seeds", "9..8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0/0 ok\n");
    let o = resaware(&["oracle-check", "--seeds", "1..3", "--profile", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn commands_are_deterministic() {
    let a = resaware(&[
        "oracle-check",
        "--seeds",
        "1..20",
        "--profile",
        "parity3-game",
    ]);
    let b = resaware(&[
        "oracle-check",
        "--seeds",
        "1..20",
        "--profile",
        "parity3-game",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn play_synthesizes_when_no_strategy_is_given() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_resaware"))
        .args(["play", &model("a2.ram"), "--from", "x", "--mem", "2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"0\n0\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).starts_with("(x,2) via f -> (y1,1)"),
        "{}",
        stdout(&o)
    );
    assert!(stdout(&o).lines().last().unwrap().starts_with("ACCEPTING"));
}
