#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const FIXTURE_CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/synthetic/config.json");

pub const PIPELINE: [&str; 6] = ["sample", "weigh", "aggregate", "agree", "evaluate", "simulate"];

pub fn tg(dir: &Path, args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tg"));
    cmd.current_dir(dir).args(args);
    match threads {
        Some(n) => cmd.env("TG_THREADS", n.to_string()),
        None => cmd.env_remove("TG_THREADS"),
    };
    cmd.output().expect("tg runs")
}

pub fn ok(out: &Output) -> bool {
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.success()
}

/// Copy the bundled fixture config into `dir`, generate the campaign and
/// run every pipeline stage with `seed`.
pub fn run_pipeline(dir: &Path, seed: u64, threads: Option<usize>) -> bool {
    std::fs::copy(FIXTURE_CONFIG, dir.join("config.json")).expect("copy config");
    let seed = seed.to_string();
    std::iter::once("fixture")
        .chain(PIPELINE)
        .all(|c| ok(&tg(dir, &[c, "--config", "config.json", "--seed", &seed], threads)))
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("read dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                files.insert(rel, std::fs::read(&path).expect("read file"));
            }
        }
    }
    files
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).expect("read json")).expect("parse json")
}
