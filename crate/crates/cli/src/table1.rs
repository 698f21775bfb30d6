//! Split statistics and the published per-split values they are checked
//! against.

use rayon::prelude::*;
use serde::Serialize;

use vosbench_core::dataset::{DatasetIndex, LoadError, LoadOptions};

/// Counts of one split. `mean_*` are exact quotients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitStats {
    pub split: String,
    pub sequences: usize,
    pub frames: usize,
    pub objects: usize,
    pub mean_frames: f64,
    pub mean_objects: f64,
}

impl SplitStats {
    pub fn from_counts(split: &str, sequences: usize, frames: usize, objects: usize) -> Self {
        let div = |a: usize| if sequences == 0 { 0.0 } else { a as f64 / sequences as f64 };
        Self {
            split: split.to_string(),
            sequences,
            frames,
            objects,
            mean_frames: div(frames),
            mean_objects: div(objects),
        }
    }
}

/// Loads every ground-truth sequence and counts frames and objects.
pub fn collect(index: &DatasetIndex, load: &LoadOptions) -> Result<SplitStats, LoadError> {
    let per_seq = index
        .sequences()
        .par_iter()
        .map(|e| Ok((e.frames, index.load_ground_truth(&e.name, load)?.ids().len())))
        .collect::<Result<Vec<_>, LoadError>>()?;
    let frames = per_seq.iter().map(|p| p.0).sum();
    let objects = per_seq.iter().map(|p| p.1).sum();
    Ok(SplitStats::from_counts(index.split(), per_seq.len(), frames, objects))
}

/// A mean as printed: digits and the number of decimals, so `76.46` is
/// `(7646, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Printed {
    pub digits: u64,
    pub decimals: u32,
}

impl Printed {
    pub const fn new(digits: u64, decimals: u32) -> Self {
        Self { digits, decimals }
    }
}

impl std::fmt::Display for Printed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let scale = 10u64.pow(self.decimals);
        write!(
            f,
            "{}.{:0width$}",
            self.digits / scale,
            self.digits % scale,
            width = self.decimals as usize
        )
    }
}

/// Whether `num / den` shows as `printed`. The published table rounds
/// most means but truncates at least one, so either reading is accepted.
pub fn matches_printed(num: usize, den: usize, printed: Printed) -> bool {
    if den == 0 {
        return false;
    }
    let scaled = num as u128 * 10u128.pow(printed.decimals);
    let den = den as u128;
    let truncated = scaled / den;
    let rounded = (2 * scaled + den) / (2 * den);
    printed.digits as u128 == rounded || printed.digits as u128 == truncated
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpectedSplit {
    pub split: &'static str,
    pub sequences: usize,
    pub frames: usize,
    pub mean_frames: Printed,
    pub objects: usize,
    pub mean_objects: Printed,
}

/// Published statistics of the official unsupervised annotations.
pub const EXPECTED: [ExpectedSplit; 4] = [
    ExpectedSplit {
        split: "train",
        sequences: 60,
        frames: 4209,
        mean_frames: Printed::new(702, 1),
        objects: 150,
        mean_objects: Printed::new(24, 1),
    },
    ExpectedSplit {
        split: "val",
        sequences: 30,
        frames: 1999,
        mean_frames: Printed::new(666, 1),
        objects: 66,
        mean_objects: Printed::new(22, 1),
    },
    ExpectedSplit {
        split: "test-dev",
        sequences: 30,
        frames: 2294,
        mean_frames: Printed::new(7646, 2),
        objects: 115,
        mean_objects: Printed::new(383, 2),
    },
    ExpectedSplit {
        split: "test-challenge",
        sequences: 30,
        frames: 2229,
        mean_frames: Printed::new(743, 1),
        objects: 118,
        mean_objects: Printed::new(393, 2),
    },
];

/// Published totals over the four splits.
pub const EXPECTED_TOTAL: ExpectedSplit = ExpectedSplit {
    split: "total",
    sequences: 150,
    frames: 10731,
    mean_frames: Printed::new(7154, 2),
    objects: 449,
    mean_objects: Printed::new(299, 2),
};

pub fn expected(split: &str) -> Option<&'static ExpectedSplit> {
    EXPECTED.iter().find(|e| e.split == split)
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

/// Compares counted statistics against a published row.
pub fn compare(stats: &SplitStats, exp: &ExpectedSplit) -> Vec<Check> {
    let count = |field, e: usize, a: usize| Check {
        field,
        expected: e.to_string(),
        actual: a.to_string(),
        ok: e == a,
    };
    let mean = |field, p: Printed, num: usize| Check {
        field,
        expected: p.to_string(),
        actual: format!("{num}/{}", stats.sequences),
        ok: matches_printed(num, stats.sequences, p),
    };
    vec![
        count("sequences", exp.sequences, stats.sequences),
        count("frames", exp.frames, stats.frames),
        mean("mean_frames", exp.mean_frames, stats.frames),
        count("objects", exp.objects, stats.objects),
        mean("mean_objects", exp.mean_objects, stats.objects),
    ]
}
