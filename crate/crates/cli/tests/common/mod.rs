#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linkshroud::graph::write_edge_list;
use linkshroud::rng::stream;
use linkshroud::synth::{overlap_sequence, PlantedPartition};
use linkshroud::TemporalGraphSequence;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linkshroud"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

/// Writes each snapshot as `s<t>.txt` plus `manifest.txt`; returns the
/// manifest path.
pub fn write_sequence(dir: &Path, seq: &TemporalGraphSequence) -> PathBuf {
    let mut manifest = String::new();
    for (t, g) in seq.snapshots().iter().enumerate() {
        let name = format!("s{t}.txt");
        let file = fs::File::create(dir.join(&name)).unwrap();
        write_edge_list(g, &[], file).unwrap();
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).unwrap();
    path
}

/// Planted-partition sequence whose consecutive snapshots share 80% of
/// their edges.
pub fn overlap_fixture(seed: u64, blocks: usize, size: usize, snapshots: usize) -> TemporalGraphSequence {
    let model = PlantedPartition::new(blocks, size, 0.3, 0.01);
    overlap_sequence(&model, snapshots, 0.8, &mut stream(seed, &[1]))
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
