//! Region similarity (J), boundary accuracy (F) and the mean / recall /
//! decay summary of a per-frame score series.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{BinaryMask, MaskError, ObjectId};

/// Default boundary tolerance as a fraction of the image diagonal.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 0.008;

/// Frames scoring strictly above this count toward recall.
pub const RECALL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error(transparent)]
    Dimensions(#[from] MaskError),
    #[error("boundary tolerance must be in (0, 1], got {0}")]
    Tolerance(f64),
    #[error("cannot summarize an empty score series")]
    EmptySeries,
    #[error("score {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// Intersection over union. Two empty masks score 1.0.
pub fn jaccard(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricError> {
    pred.check_dimensions(gt)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        inter += (p && g) as usize;
        union += (p || g) as usize;
    }
    Ok(ratio_or_one(inter, union))
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Dilation radius in pixels for a given image size and tolerance fraction.
pub fn dilation_radius(width: u32, height: u32, tolerance: f64) -> u32 {
    let diag = ((width as f64).powi(2) + (height as f64).powi(2)).sqrt();
    (tolerance * diag).ceil() as u32
}

/// Foreground pixels with at least one background 4-neighbor; pixels on the
/// image border count as touching background.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let d = mask.data();
    let wu = w as usize;
    BinaryMask::from_fn(w, h, |x, y| {
        let i = y as usize * wu + x as usize;
        if !d[i] {
            return false;
        }
        x == 0
            || y == 0
            || x + 1 == w
            || y + 1 == h
            || !d[i - 1]
            || !d[i + 1]
            || !d[i - wu]
            || !d[i + wu]
    })
}

/// Half-widths of the rasterized disk, indexed by `|dy|`: the largest `dx`
/// with `dx² + dy² <= r²`.
fn disk_half_widths(radius: u32) -> Vec<u32> {
    let r2 = (radius as u64).pow(2);
    (0..=radius as u64)
        .map(|dy| {
            let rem = r2 - dy * dy;
            let mut hw = (rem as f64).sqrt() as u64;
            while hw * hw > rem {
                hw -= 1;
            }
            while (hw + 1) * (hw + 1) <= rem {
                hw += 1;
            }
            hw as u32
        })
        .collect()
}

/// Dilates by a Euclidean disk: a pixel is set iff some set pixel lies at
/// center distance `<= radius`.
pub fn dilate_disk(mask: &BinaryMask, radius: u32) -> BinaryMask {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let hws = disk_half_widths(radius);
    let mut out = vec![false; mask.data().len()];
    let r = radius as i64;
    for (i, _) in mask.data().iter().enumerate().filter(|(_, &b)| b) {
        let (x, y) = (i as i64 % w, i as i64 / w);
        for dy in -r..=r {
            let yy = y + dy;
            if yy < 0 || yy >= h {
                continue;
            }
            let hw = hws[dy.unsigned_abs() as usize] as i64;
            let lo = (x - hw).max(0);
            let hi = (x + hw).min(w - 1);
            let row = (yy * w) as usize;
            out[row + lo as usize..=row + hi as usize].fill(true);
        }
    }
    BinaryMask::new(mask.width(), mask.height(), out).expect("same size")
}

/// Precomputed boundary and tolerance band of one binary mask.
#[derive(Clone, Debug)]
pub struct Contour {
    /// Row-major indices of boundary pixels.
    pixels: Vec<usize>,
    band: BinaryMask,
}

impl Contour {
    pub fn new(mask: &BinaryMask, radius: u32) -> Self {
        let edge = boundary(mask);
        let pixels = edge
            .data()
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        let band = dilate_disk(&edge, radius);
        Self { pixels, band }
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    fn hits(&self, other_band: &BinaryMask) -> usize {
        let d = other_band.data();
        self.pixels.iter().filter(|&&i| d[i]).count()
    }
}

/// Boundary F-measure from two precomputed contours of the same image size.
pub fn contour_f(pred: &Contour, gt: &Contour) -> f64 {
    match (pred.is_empty(), gt.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let precision = pred.hits(&gt.band) as f64 / pred.len() as f64;
    let recall = gt.hits(&pred.band) as f64 / gt.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Contour accuracy: F-measure of boundary precision and recall, each
/// boundary matched within a disk of radius `ceil(tolerance * diagonal)`.
pub fn boundary_f(pred: &BinaryMask, gt: &BinaryMask, tolerance: f64) -> Result<f64, MetricError> {
    pred.check_dimensions(gt)?;
    if !(tolerance > 0.0 && tolerance <= 1.0) {
        return Err(MetricError::Tolerance(tolerance));
    }
    let radius = dilation_radius(gt.width(), gt.height(), tolerance);
    Ok(contour_f(&Contour::new(pred, radius), &Contour::new(gt, radius)))
}

/// Mean of J and F at the default tolerance.
pub fn jf(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricError> {
    let j = jaccard(pred, gt)?;
    let f = boundary_f(pred, gt, DEFAULT_BOUNDARY_TOLERANCE)?;
    Ok((j + f) / 2.0)
}

/// Mean, recall and decay of a per-frame series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub mean: f64,
    pub recall: f64,
    pub decay: f64,
}

/// Per-frame scores of one object, ordered by frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameScoreSeries {
    pub object_id: ObjectId,
    pub scores: Vec<f64>,
}

impl FrameScoreSeries {
    pub fn new(object_id: ObjectId, scores: Vec<f64>) -> Result<Self, MetricError> {
        if scores.is_empty() {
            return Err(MetricError::EmptySeries);
        }
        if let Some(&bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(MetricError::OutOfRange(bad));
        }
        Ok(Self { object_id, scores })
    }

    pub fn summarize(&self) -> MetricTriple {
        summarize(&self.scores).expect("nonempty by construction")
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Quartile boundaries `round(n·k/4)` for k = 1..3.
fn quartile_bounds(n: usize) -> [usize; 3] {
    [1, 2, 3].map(|k| (n as f64 * k as f64 / 4.0).round() as usize)
}

/// Summarizes a series. Decay is the first-quartile mean minus the
/// last-quartile mean, and 0 for series shorter than 4.
pub fn summarize(scores: &[f64]) -> Result<MetricTriple, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptySeries);
    }
    let n = scores.len();
    let recall = scores.iter().filter(|&&s| s > RECALL_THRESHOLD).count() as f64 / n as f64;
    let decay = if n < 4 {
        0.0
    } else {
        let [q1, _, q3] = quartile_bounds(n);
        mean(&scores[..q1]) - mean(&scores[q3..])
    };
    Ok(MetricTriple {
        mean: mean(scores),
        recall,
        decay,
    })
}
