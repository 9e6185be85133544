#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_treeprobe"));
    cmd.env_remove("TREEPROBE_SEED").env("RUST_LOG", "error");
    cmd
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "treeprobe {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// ingest -> matrices -> decode -> features -> analyze on the fixture
/// corpus. Returns the analyze stdout.
pub fn full_pipeline(dir: &Path, seed: &str) -> String {
    let d = p(dir);
    let samples = dir.join("fx.test.jsonl");
    let s = p(&samples);
    ok(&[
        "ingest",
        "--format",
        "semeval",
        "--name",
        "fx",
        "--test",
        p(&fixture("restaurants_fixture.xml")),
        "--out",
        d,
    ]);
    ok(&["matrices", "--samples", s, "--out", d, "--seed", seed]);
    let matrices = dir.join("fx.test.matrices.jsonl");
    ok(&[
        "decode",
        "--samples",
        s,
        "--out",
        d,
        "--source",
        "left_chain",
        "--source",
        "right_chain",
        "--source",
        "induced",
        "--source",
        "dep_parser",
        "--matrices",
        p(&matrices),
        "--conllu",
        p(&fixture("restaurants_fixture.conllu")),
    ]);
    let trees: Vec<PathBuf> = ["left_chain", "right_chain", "induced", "dep_parser"]
        .iter()
        .map(|src| dir.join(format!("fx.test.{src}.conllu")))
        .collect();
    let mut args = vec!["features", "--samples", s, "--out", d];
    for t in &trees {
        args.extend(["--trees", p(t)]);
    }
    ok(&args);
    let mut args = vec!["analyze", "--samples", s, "--out", d];
    for t in &trees {
        args.extend(["--trees", p(t)]);
    }
    String::from_utf8(ok(&args).stdout).unwrap()
}
