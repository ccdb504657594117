use std::fs;
use std::path::PathBuf;

use resaware::examples::{A1, A2};
use resaware::extent::{extent_generic, extent_recursive};
use resaware::model::parse_model;
use resaware::runs::{is_accepting, parse_run, run_value};
use resaware::semiring::Value;
use resaware::strategy::{parse_strategy, synth_buchi};

fn model_file(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "models", name]
        .iter()
        .collect();
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn model_files_match_the_builtin_examples() {
    assert_eq!(
        parse_model(&model_file("a1.ram")).unwrap(),
        parse_model(A1).unwrap()
    );
    assert_eq!(
        parse_model(&model_file("a2.ram")).unwrap(),
        parse_model(A2).unwrap()
    );
}

#[test]
fn extents_of_the_model_files() {
    for (name, want) in [
        ("a1.ram", "x=1\ny=1\ny1=0\ny2=0\n"),
        ("a2.ram", "x=2\ny1=1\ny2=0\n"),
        ("tree.ram", "r=1\na=0\nb=0\n"),
        ("parity3.ram", "p=1\nq=0\ns=1\n"),
    ] {
        let m = parse_model(&model_file(name)).unwrap();
        assert_eq!(extent_generic(&m).render(&m), want, "{name}");
        assert_eq!(extent_recursive(&m).unwrap().0.render(&m), want, "{name}");
    }
    let m = parse_model(&model_file("reach.ram")).unwrap();
    assert_eq!(extent_generic(&m).render(&m), "start=0\ngoal=1\ntrap=0\n");
}

#[test]
fn a1_strategy_file() {
    let m = parse_model(A1).unwrap();
    let text = synth_buchi(&m).unwrap().reduced.render(&m);
    assert_eq!(
        text,
        "x sigma=_x:step(y:1)\n\
         y theta=6 acceptor=_y:step(x:1) base=_y:step(y1:0)\n\
         y1 theta=4 acceptor=_y1:step(y:6) base=_y1:step(y:2)\n\
         y2 theta=2 acceptor=_y2:step(y:6) base=_y2:step(y:4)\n"
    );
    assert_eq!(
        parse_strategy(&m, &text).unwrap(),
        synth_buchi(&m).unwrap().reduced
    );
}

#[test]
fn a2_strategy_file() {
    let m = parse_model(A2).unwrap();
    let text = synth_buchi(&m).unwrap().reduced.render(&m);
    assert_eq!(
        text,
        "x sigma=f:step(y1:1)+g:step(x:2)\n\
         y1 theta=5 acceptor=f:step(x:2)+g:step(x:2) base=f:step(y2:0)+g:step(x:2)\n\
         y2 theta=2 acceptor=f:step(x:2) base=f:step(y2:2)\n"
    );
}

#[test]
fn a1_run_files() {
    let m = parse_model(A1).unwrap();
    let (z, _) = parse_run(&m, &model_file("a1_optimal.run")).unwrap();
    assert_eq!(run_value(&m, &z), Value::nat(1));
    assert!(is_accepting(&m, &z));
    let (z, _) = parse_run(&m, &model_file("a1_short.run")).unwrap();
    assert_eq!(run_value(&m, &z), Value::INF);
}
