#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nagata"));
    c.env_remove("NAGATA_SEED");
    c
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn nagata")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

/// Scripted invocations with their exit codes without and with `--strict`.
pub struct Case {
    pub args: Vec<String>,
    pub code: i32,
    pub strict_code: i32,
}

fn case(args: &[&str], code: i32, strict_code: i32) -> Case {
    Case {
        args: args.iter().map(|s| s.to_string()).collect(),
        code,
        strict_code,
    }
}

pub fn matrix() -> Vec<Case> {
    let mosaic = fixture("mosaic_2x1.json").display().to_string();
    let cycle = fixture("mosaic_2x1_cycle.json").display().to_string();
    let batch = fixture("batch.jsonl").display().to_string();
    vec![
        case(&["profile", "14"], 0, 0),
        case(&["profile", "16"], 0, 0),
        case(&["profile", "10"], 0, 1),
        case(&["scan", "10", "16"], 0, 0),
        case(&["scan", "16", "10"], 2, 2),
        case(&["cremona", "(15:8; 4,4,4,4,4,4,4,4,4,4)@F1", "--rule", "2", "--s", "2"], 0, 0),
        case(&["cremona", "(4:2; 1,1)@F1", "--rule", "2", "--s", "2"], 2, 2),
        case(&["cremona", "(3; 1,1,1)", "--rule", "elem", "--indices", "0,1,2"], 0, 0),
        case(&["cremona", "(3; 1,1,1)", "--rule", "5"], 2, 2),
        case(&["reduce", "(4; 2,2,2,2,2)"], 0, 0),
        case(&["reduce", "(4; 2,2"], 2, 2),
        case(&["nef", "(3; 1,1,1,1,1,1,1,1)"], 0, 0),
        case(&["nef", "(1; 1,1)"], 0, 1),
        case(&["minus-one", "4"], 0, 0),
        case(&["h0", "(4; 2,2,2,2,2)", "--seed", "7"], 0, 1),
        case(&["h0", "(2; 1,1,1,1,1)"], 0, 0),
        case(&["hr", "6", "2", "5"], 0, 0),
        case(&["hr", "4", "2", "5"], 0, 1),
        case(&["batch", &batch], 0, 1),
        case(&["nef-cross", "(1; 1,1)", "--bound", "3"], 0, 0),
        case(&["trace", "step2", "14", "4", "3"], 0, 0),
        case(&["trace", "step3", "12", "5", "3"], 0, 1),
        case(&["trace", "step5", "33", "10", "8"], 0, 0),
        case(&["trace", "step3", "16", "4", "3"], 2, 2),
        case(&["mosaic-check", &mosaic], 0, 0),
        case(&["mosaic-check", &cycle], 0, 1),
        case(&["corollary", "14", "4", "10"], 0, 0),
        case(&["nef-target", "14", "4"], 0, 0),
        case(&["lemma", "3", "1", "2"], 0, 0),
    ]
}
