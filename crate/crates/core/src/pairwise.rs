//! Per-frame J and F for every (ground-truth object, proposal) pair of a
//! sequence, computed in one pass per frame.

use rayon::prelude::*;
use thiserror::Error;

use crate::mask::{BinaryMask, MaskSequence, ObjectId};
use crate::metrics::{contour_f, dilation_radius, Contour};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignmentError {
    #[error("frame count mismatch: ground truth has {gt}, results have {results}")]
    FrameCount { gt: usize, results: usize },
    #[error("size mismatch: ground truth is {gt_w}x{gt_h}, results are {w}x{h}")]
    Size { gt_w: u32, gt_h: u32, w: u32, h: u32 },
    #[error("frame index {index} out of range for {len} frames")]
    FrameIndex { index: usize, len: usize },
}

pub fn check_alignment(gt: &MaskSequence, pred: &MaskSequence) -> Result<(), AlignmentError> {
    if gt.len() != pred.len() {
        return Err(AlignmentError::FrameCount {
            gt: gt.len(),
            results: pred.len(),
        });
    }
    if gt.width() != pred.width() || gt.height() != pred.height() {
        return Err(AlignmentError::Size {
            gt_w: gt.width(),
            gt_h: gt.height(),
            w: pred.width(),
            h: pred.height(),
        });
    }
    Ok(())
}

/// Scores of one frame, `[gt][col]` where the last column is the empty
/// proposal.
#[derive(Clone, Debug)]
struct FrameTable {
    j: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
}

/// Per-frame J and F for all pairs over a list of evaluated frames.
#[derive(Clone, Debug)]
pub struct PairwiseScores {
    gt_ids: Vec<ObjectId>,
    pred_ids: Vec<ObjectId>,
    frames: Vec<usize>,
    tables: Vec<FrameTable>,
}

impl PairwiseScores {
    /// Scores `pred` against `gt` on `frames` (indices into both sequences).
    /// Pixels under the ground truth's void label are removed from every
    /// proposal before scoring.
    pub fn compute(
        gt: &MaskSequence,
        pred: &MaskSequence,
        frames: &[usize],
        tolerance: f64,
    ) -> Result<Self, AlignmentError> {
        let gt_ids: Vec<ObjectId> = gt.ids().iter().copied().collect();
        let pred_ids: Vec<ObjectId> = pred.ids().iter().copied().collect();
        Self::compute_for(gt, pred, &gt_ids, &pred_ids, frames, tolerance)
    }

    /// Like [`PairwiseScores::compute`] with explicit id lists.
    pub fn compute_for(
        gt: &MaskSequence,
        pred: &MaskSequence,
        gt_ids: &[ObjectId],
        pred_ids: &[ObjectId],
        frames: &[usize],
        tolerance: f64,
    ) -> Result<Self, AlignmentError> {
        check_alignment(gt, pred)?;
        if let Some(&index) = frames.iter().find(|&&i| i >= gt.len()) {
            return Err(AlignmentError::FrameIndex {
                index,
                len: gt.len(),
            });
        }
        let radius = dilation_radius(gt.width(), gt.height(), tolerance);
        let tables = frames
            .par_iter()
            .map(|&k| score_frame(gt, pred, gt_ids, pred_ids, k, radius))
            .collect();
        Ok(Self {
            gt_ids: gt_ids.to_vec(),
            pred_ids: pred_ids.to_vec(),
            frames: frames.to_vec(),
            tables,
        })
    }

    pub fn gt_ids(&self) -> &[ObjectId] {
        &self.gt_ids
    }

    pub fn pred_ids(&self) -> &[ObjectId] {
        &self.pred_ids
    }

    pub fn frames(&self) -> &[usize] {
        &self.frames
    }

    /// J series of gt row `l` against proposal column `col`; `None` is the
    /// empty proposal.
    pub fn j_series(&self, l: usize, col: Option<usize>) -> Vec<f64> {
        let c = col.unwrap_or(self.pred_ids.len());
        self.tables.iter().map(|t| t.j[l][c]).collect()
    }

    pub fn f_series(&self, l: usize, col: Option<usize>) -> Vec<f64> {
        let c = col.unwrap_or(self.pred_ids.len());
        self.tables.iter().map(|t| t.f[l][c]).collect()
    }

    /// Mean-of-frame-means J&F of one pair.
    pub fn pair_score(&self, l: usize, col: Option<usize>) -> f64 {
        let n = self.tables.len() as f64;
        let j = self.j_series(l, col).iter().sum::<f64>() / n;
        let f = self.f_series(l, col).iter().sum::<f64>() / n;
        (j + f) / 2.0
    }
}

fn score_frame(
    gt: &MaskSequence,
    pred: &MaskSequence,
    gt_ids: &[ObjectId],
    pred_ids: &[ObjectId],
    k: usize,
    radius: u32,
) -> FrameTable {
    let g = gt.frame(k);
    let p = pred.frame(k);
    let void = gt.void_id();

    let mut gt_slot = [usize::MAX; 256];
    for (i, &id) in gt_ids.iter().enumerate() {
        gt_slot[id as usize] = i;
    }
    let mut pred_slot = [usize::MAX; 256];
    for (i, &id) in pred_ids.iter().enumerate() {
        pred_slot[id as usize] = i;
    }

    let (nl, nn) = (gt_ids.len(), pred_ids.len());
    let mut inter = vec![vec![0usize; nn]; nl];
    let mut gt_area = vec![0usize; nl];
    let mut pred_area = vec![0usize; nn];
    for (&gl, &pl) in g.labels().iter().zip(p.labels()) {
        if Some(gl) == void {
            continue;
        }
        let (gs, ps) = (gt_slot[gl as usize], pred_slot[pl as usize]);
        if gs != usize::MAX {
            gt_area[gs] += 1;
        }
        if ps != usize::MAX {
            pred_area[ps] += 1;
            if gs != usize::MAX {
                inter[gs][ps] += 1;
            }
        }
    }

    let ignore = gt.ignore_region(k);
    let pred_binary = |id: ObjectId| -> BinaryMask {
        let mut b = p.binary(id);
        if let Some(ig) = &ignore {
            b.clear_where(ig);
        }
        b
    };
    let empty = Contour::new(&BinaryMask::empty(g.width(), g.height()), 0);
    let gt_contours: Vec<Contour> = gt_ids
        .iter()
        .map(|&id| Contour::new(&g.binary(id), radius))
        .collect();
    let pred_contours: Vec<Contour> = pred_ids
        .iter()
        .zip(&pred_area)
        .map(|(&id, &area)| {
            if area == 0 {
                empty.clone()
            } else {
                Contour::new(&pred_binary(id), radius)
            }
        })
        .collect();

    let mut j = vec![vec![0.0; nn + 1]; nl];
    let mut f = vec![vec![0.0; nn + 1]; nl];
    for l in 0..nl {
        for n in 0..nn {
            let union = gt_area[l] + pred_area[n] - inter[l][n];
            j[l][n] = if union == 0 {
                1.0
            } else {
                inter[l][n] as f64 / union as f64
            };
            f[l][n] = contour_f(&pred_contours[n], &gt_contours[l]);
        }
        j[l][nn] = if gt_area[l] == 0 { 1.0 } else { 0.0 };
        f[l][nn] = contour_f(&empty, &gt_contours[l]);
    }
    FrameTable { j, f }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{MultiObjectMask, SequenceRole};
    use crate::metrics::{boundary_f, jaccard};

    fn seq(frames: Vec<Vec<u8>>, w: u32, h: u32, role: SequenceRole) -> MaskSequence {
        let frames = frames
            .into_iter()
            .map(|l| MultiObjectMask::new(w, h, l).unwrap())
            .collect();
        MaskSequence::new("t", role, frames).unwrap()
    }

    #[test]
    fn matches_direct_metrics() {
        let (w, h) = (6, 4);
        let gt = seq(
            vec![
                vec![1, 1, 0, 0, 2, 2, 1, 1, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 1, 1, 0, 2, 2, 0, 1, 1, 0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            ],
            w,
            h,
            SequenceRole::GroundTruth,
        );
        let pred = seq(
            vec![
                vec![3, 3, 3, 0, 0, 7, 3, 3, 0, 0, 0, 7, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 3, 3, 7, 7, 0, 0, 0, 0, 7, 7, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            ],
            w,
            h,
            SequenceRole::Results,
        );
        let s = PairwiseScores::compute(&gt, &pred, &[0, 1], 0.1).unwrap();
        assert_eq!(s.pred_ids(), &[3, 7]);
        for (l, &gid) in [1u8, 2].iter().enumerate() {
            for (n, &pid) in [3u8, 7].iter().enumerate() {
                for (fi, k) in [0usize, 1].iter().enumerate() {
                    let g = gt.frame(*k).binary(gid);
                    let p = pred.frame(*k).binary(pid);
                    assert_eq!(s.j_series(l, Some(n))[fi], jaccard(&p, &g).unwrap());
                    assert_eq!(s.f_series(l, Some(n))[fi], boundary_f(&p, &g, 0.1).unwrap());
                }
            }
            for fi in 0..2 {
                assert_eq!(s.j_series(l, None)[fi], 0.0);
                assert_eq!(s.f_series(l, None)[fi], 0.0);
            }
        }
    }

    #[test]
    fn empty_column_scores_one_where_gt_absent() {
        let gt = seq(vec![vec![1, 0], vec![0, 0]], 2, 1, SequenceRole::GroundTruth);
        let pred = seq(vec![vec![0, 0], vec![0, 0]], 2, 1, SequenceRole::Results);
        let s = PairwiseScores::compute(&gt, &pred, &[0, 1], 0.008).unwrap();
        assert_eq!(s.j_series(0, None), vec![0.0, 1.0]);
        assert_eq!(s.f_series(0, None), vec![0.0, 1.0]);
    }

    #[test]
    fn frame_count_mismatch() {
        let gt = seq(vec![vec![1], vec![1], vec![1]], 1, 1, SequenceRole::GroundTruth);
        let pred = seq(vec![vec![1], vec![1]], 1, 1, SequenceRole::Results);
        assert_eq!(
            PairwiseScores::compute(&gt, &pred, &[0], 0.008).unwrap_err(),
            AlignmentError::FrameCount { gt: 3, results: 2 }
        );
    }

    #[test]
    fn void_pixels_excluded() {
        // gt: object 1 on pixel 0, void on pixel 1; pred covers both
        let frames = vec![
            MultiObjectMask::new(2, 1, vec![1, 255]).unwrap(),
            MultiObjectMask::new(2, 1, vec![1, 255]).unwrap(),
        ];
        let gt = MaskSequence::with_void("t", SequenceRole::GroundTruth, frames, Some(255)).unwrap();
        let pred = seq(vec![vec![4, 4], vec![4, 4]], 2, 1, SequenceRole::Results);
        let s = PairwiseScores::compute(&gt, &pred, &[0, 1], 0.5).unwrap();
        assert_eq!(s.j_series(0, Some(0)), vec![1.0, 1.0]);
        assert_eq!(s.f_series(0, Some(0)), vec![1.0, 1.0]);
    }
}
