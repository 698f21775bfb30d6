#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

use vosbench_core::dataset::DatasetIndex;
use vosbench_core::mask::MaskSequence;
use vosbench_core::synth::{perturb, render_dataset, write_sequence, Perturbation, SynthSpec};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vosbench"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn mini30_spec_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mini30.json")
}

pub fn mini30_spec() -> SynthSpec {
    SynthSpec::from_json(&fs::read_to_string(mini30_spec_path()).unwrap()).unwrap()
}

/// Renders `spec` under `root` and returns the index.
pub fn render(spec: &SynthSpec, root: &Path) -> DatasetIndex {
    render_dataset(spec, root).unwrap()
}

/// Writes one prediction per sequence, made by `f` from the ground truth.
pub fn write_results(
    index: &DatasetIndex,
    out: &Path,
    mut f: impl FnMut(usize, &MaskSequence) -> MaskSequence,
) {
    for (i, e) in index.sequences().iter().enumerate() {
        let gt = index.load_ground_truth(&e.name, &Default::default()).unwrap();
        write_sequence(&out.join(&e.name), &f(i, &gt)).unwrap();
    }
}

/// A mix of perturbations so that scores are neither all 0 nor all 1.
pub fn mixed_prediction(i: usize, gt: &MaskSequence) -> MaskSequence {
    match i % 3 {
        0 => perturb(gt, &Perturbation::Shift(2), 0).unwrap_or_else(|_| gt.clone()),
        1 => perturb(gt, &Perturbation::Dropout(0.4), i as u64).unwrap(),
        _ => {
            let map = vosbench_core::synth::random_relabel(gt.ids(), i as u64);
            perturb(gt, &Perturbation::Relabel(map), 0).unwrap()
        }
    }
}

/// SHA-256 over relative paths and contents of every file under `root`.
pub fn tree_hash(root: &Path) -> String {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    files.sort();
    let mut h = Sha256::new();
    for p in files {
        h.update(p.strip_prefix(root).unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(fs::read(&p).unwrap());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// stderr parsed as JSON lines.
pub fn diagnostics(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|_| panic!("not JSON: {l}")))
        .collect()
}
