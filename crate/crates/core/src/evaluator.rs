//! Semi-supervised and unsupervised evaluation of a split.
//!
//! Both tracks score every frame except the first and the last. The
//! unsupervised track matches ground-truth objects to proposals once per
//! sequence; the semi-supervised track uses the ground-truth ids directly.
//! Dataset figures average over objects, not over sequences.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{matrix_from_scores, solve_assignment};
use crate::dataset::{load_results, DatasetIndex, LoadError, LoadOptions};
use crate::mask::{MaskSequence, ObjectId};
use crate::metrics::{summarize, MetricTriple, DEFAULT_BOUNDARY_TOLERANCE};
use crate::pairwise::{check_alignment, AlignmentError, PairwiseScores};

/// Proposal cap per sequence unless configured otherwise.
pub const DEFAULT_MAX_PROPOSALS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    SemiSupervised,
    Unsupervised,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::SemiSupervised => "semi-supervised",
            Task::Unsupervised => "unsupervised",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "semi-supervised" => Ok(Task::SemiSupervised),
            "unsupervised" => Ok(Task::Unsupervised),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error("sequence {sequence}: {problem}")]
    Rejected { sequence: String, problem: Problem },
    #[error("sequence {0} has {1} frames; evaluation needs at least 3")]
    TooShort(String, usize),
    #[error("sequence {0} has no ground-truth objects")]
    NoObjects(String),
    #[error("no object rows to aggregate")]
    EmptyReport,
    #[error("results root {path} is not readable: {reason}")]
    ResultsRoot { path: String, reason: String },
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Frames that count toward scores: all but the first and the last.
pub fn evaluated_frames(frame_count: usize) -> Vec<usize> {
    if frame_count < 3 {
        Vec::new()
    } else {
        (1..frame_count - 1).collect()
    }
}

/// Scores of one ground-truth object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectRow {
    pub object_id: ObjectId,
    pub matched_id: Option<ObjectId>,
    pub j: MetricTriple,
    pub f: MetricTriple,
    pub jf_mean: f64,
}

impl ObjectRow {
    pub fn new(object_id: ObjectId, matched_id: Option<ObjectId>, j: MetricTriple, f: MetricTriple) -> Self {
        Self {
            object_id,
            matched_id,
            j,
            f,
            jf_mean: (j.mean + f.mean) / 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceResult {
    pub sequence: String,
    pub rows: Vec<ObjectRow>,
}

/// The seven headline columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalScores {
    pub jf_mean: f64,
    pub j_mean: f64,
    pub j_recall: f64,
    pub j_decay: f64,
    pub f_mean: f64,
    pub f_recall: f64,
    pub f_decay: f64,
}

impl GlobalScores {
    pub fn columns(&self) -> [f64; 7] {
        [
            self.jf_mean,
            self.j_mean,
            self.j_recall,
            self.j_decay,
            self.f_mean,
            self.f_recall,
            self.f_decay,
        ]
    }
}

pub const GLOBAL_HEADERS: [&str; 7] = [
    "J&F-Mean", "J-Mean", "J-Recall", "J-Decay", "F-Mean", "F-Recall", "F-Decay",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub split: String,
    pub task: Task,
    pub global: GlobalScores,
    pub sequences: Vec<SequenceResult>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub task: Task,
    pub max_proposals: usize,
    pub tolerance: f64,
    pub load: LoadOptions,
}

impl EvalConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            max_proposals: DEFAULT_MAX_PROPOSALS,
            tolerance: DEFAULT_BOUNDARY_TOLERANCE,
            load: LoadOptions::default(),
        }
    }
}

fn rows_from_columns(
    scores: &PairwiseScores,
    columns: &[Option<usize>],
) -> Vec<ObjectRow> {
    scores
        .gt_ids()
        .iter()
        .enumerate()
        .map(|(l, &gid)| {
            let col = columns[l];
            let j = summarize(&scores.j_series(l, col)).expect("evaluated frames nonempty");
            let f = summarize(&scores.f_series(l, col)).expect("evaluated frames nonempty");
            ObjectRow::new(gid, col.map(|c| scores.pred_ids()[c]), j, f)
        })
        .collect()
}

fn frames_for(gt: &MaskSequence) -> Result<Vec<usize>, EvalError> {
    let frames = evaluated_frames(gt.len());
    if frames.is_empty() {
        return Err(EvalError::TooShort(gt.name().to_string(), gt.len()));
    }
    if gt.ids().is_empty() {
        return Err(EvalError::NoObjects(gt.name().to_string()));
    }
    Ok(frames)
}

/// Matches proposals to ground-truth objects and scores each object against
/// its match (or against nothing when unmatched).
pub fn evaluate_unsupervised(
    gt: &MaskSequence,
    proposals: &MaskSequence,
    max_proposals: usize,
    tolerance: f64,
) -> Result<SequenceResult, EvalError> {
    check_alignment(gt, proposals)?;
    if proposals.ids().len() > max_proposals {
        return Err(EvalError::Rejected {
            sequence: gt.name().to_string(),
            problem: Problem::ProposalCap {
                count: proposals.ids().len(),
                cap: max_proposals,
            },
        });
    }
    let frames = frames_for(gt)?;
    let scores = PairwiseScores::compute(gt, proposals, &frames, tolerance)?;
    let assignment = solve_assignment(&matrix_from_scores(&scores));
    Ok(SequenceResult {
        sequence: gt.name().to_string(),
        rows: rows_from_columns(&scores, &assignment.columns),
    })
}

/// Scores results that share the ground truth's id space.
pub fn evaluate_semisupervised(
    gt: &MaskSequence,
    results: &MaskSequence,
    tolerance: f64,
) -> Result<SequenceResult, EvalError> {
    check_alignment(gt, results)?;
    let unknown: Vec<ObjectId> = results.ids().difference(gt.ids()).copied().collect();
    if !unknown.is_empty() {
        return Err(EvalError::Rejected {
            sequence: gt.name().to_string(),
            problem: Problem::UnknownIds(unknown),
        });
    }
    let frames = frames_for(gt)?;
    let ids: Vec<ObjectId> = gt.ids().iter().copied().collect();
    let scores = PairwiseScores::compute_for(gt, results, &ids, &ids, &frames, tolerance)?;
    let columns: Vec<Option<usize>> = (0..ids.len()).map(Some).collect();
    Ok(SequenceResult {
        sequence: gt.name().to_string(),
        rows: rows_from_columns(&scores, &columns),
    })
}

/// Object-weighted means over every row of every sequence.
pub fn aggregate(
    split: &str,
    task: Task,
    mut results: Vec<SequenceResult>,
) -> Result<DatasetReport, EvalError> {
    results.sort_by(|a, b| a.sequence.cmp(&b.sequence));
    let rows: Vec<&ObjectRow> = results.iter().flat_map(|s| &s.rows).collect();
    if rows.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    let avg = |f: &dyn Fn(&ObjectRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64;
    let global = GlobalScores {
        jf_mean: avg(&|r| r.jf_mean),
        j_mean: avg(&|r| r.j.mean),
        j_recall: avg(&|r| r.j.recall),
        j_decay: avg(&|r| r.j.decay),
        f_mean: avg(&|r| r.f.mean),
        f_recall: avg(&|r| r.f.recall),
        f_decay: avg(&|r| r.f.decay),
    };
    Ok(DatasetReport {
        split: split.to_string(),
        task,
        global,
        sequences: results,
    })
}

/// Reason a submitted sequence is rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Problem {
    MissingSequence,
    FrameGap { missing: Vec<usize> },
    ExtraFrames { extra: Vec<usize> },
    DimensionMismatch { expected: (u32, u32), got: (u32, u32) },
    ProposalCap { count: usize, cap: usize },
    UnknownIds(Vec<ObjectId>),
    Unreadable { detail: String },
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let frames = |v: &[usize]| v.iter().map(|k| format!("{k:05}")).collect::<Vec<_>>().join(", ");
        match self {
            Problem::MissingSequence => f.write_str("sequence folder missing"),
            Problem::FrameGap { missing } => write!(f, "missing frames {}", frames(missing)),
            Problem::ExtraFrames { extra } => write!(f, "unexpected frames {}", frames(extra)),
            Problem::DimensionMismatch { expected, got } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Problem::ProposalCap { count, cap } => {
                write!(f, "proposal cap exceeded ({count} > {cap})")
            }
            Problem::UnknownIds(ids) => write!(
                f,
                "ids not in ground truth: {}",
                ids.iter().map(u8::to_string).collect::<Vec<_>>().join(", ")
            ),
            Problem::Unreadable { detail } => write!(f, "unreadable: {detail}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceValidation {
    pub sequence: String,
    pub problems: Vec<Problem>,
}

impl SequenceValidation {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub split: String,
    pub task: Task,
    pub sequences: Vec<SequenceValidation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.sequences.iter().all(SequenceValidation::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SequenceValidation> {
        self.sequences.iter().filter(|s| !s.passed())
    }
}

fn problem_from_load(err: LoadError) -> Problem {
    match err {
        LoadError::Gap { missing, .. } => Problem::FrameGap { missing },
        LoadError::ExtraFrames { extra, .. } => Problem::ExtraFrames { extra },
        LoadError::Dimensions {
            width,
            height,
            got_w,
            got_h,
            ..
        } => Problem::DimensionMismatch {
            expected: (width, height),
            got: (got_w, got_h),
        },
        other => Problem::Unreadable {
            detail: other.to_string(),
        },
    }
}

/// Loads one submitted sequence and checks it against its ground truth.
fn check_sequence(
    gt: &MaskSequence,
    results_root: &Path,
    config: &EvalConfig,
) -> Result<MaskSequence, Vec<Problem>> {
    let name = gt.name();
    if !results_root.join(name).is_dir() {
        return Err(vec![Problem::MissingSequence]);
    }
    let first_optional = config.task == Task::SemiSupervised;
    let results = load_results(results_root, name, gt.len(), &config.load, first_optional)
        .map_err(|e| vec![problem_from_load(e)])?;
    let mut problems = Vec::new();
    if results.width() != gt.width() || results.height() != gt.height() {
        problems.push(Problem::DimensionMismatch {
            expected: (gt.width(), gt.height()),
            got: (results.width(), results.height()),
        });
    }
    match config.task {
        Task::Unsupervised => {
            if results.ids().len() > config.max_proposals {
                problems.push(Problem::ProposalCap {
                    count: results.ids().len(),
                    cap: config.max_proposals,
                });
            }
        }
        Task::SemiSupervised => {
            let unknown: Vec<ObjectId> = results.ids().difference(gt.ids()).copied().collect();
            if !unknown.is_empty() {
                problems.push(Problem::UnknownIds(unknown));
            }
        }
    }
    if problems.is_empty() {
        Ok(results)
    } else {
        Err(problems)
    }
}

fn check_results_root(results_root: &Path) -> Result<(), EvalError> {
    std::fs::read_dir(results_root)
        .map(|_| ())
        .map_err(|e| EvalError::ResultsRoot {
            path: results_root.display().to_string(),
            reason: e.to_string(),
        })
}

/// Per-sequence pass/fail for a submission.
pub fn validate_submission(
    index: &DatasetIndex,
    results_root: &Path,
    config: &EvalConfig,
) -> Result<ValidationReport, EvalError> {
    check_results_root(results_root)?;
    let sequences = index
        .sequences()
        .par_iter()
        .map(|entry| {
            let gt = index.load_ground_truth(&entry.name, &config.load)?;
            let problems = check_sequence(&gt, results_root, config).err().unwrap_or_default();
            Ok(SequenceValidation {
                sequence: entry.name.clone(),
                problems,
            })
        })
        .collect::<Result<Vec<_>, LoadError>>()?;
    Ok(ValidationReport {
        split: index.split().to_string(),
        task: config.task,
        sequences,
    })
}

/// Either a full report or the reasons the submission was refused.
#[derive(Clone, Debug, PartialEq)]
pub enum SplitOutcome {
    Evaluated(DatasetReport),
    Rejected(ValidationReport),
}

/// Validates and evaluates every sequence of a split. Sequences are
/// processed in parallel on the current rayon pool; output order is fixed.
pub fn evaluate_split(
    index: &DatasetIndex,
    results_root: &Path,
    config: &EvalConfig,
) -> Result<SplitOutcome, EvalError> {
    check_results_root(results_root)?;
    let per_sequence = index
        .sequences()
        .par_iter()
        .map(|entry| -> Result<(SequenceValidation, Option<SequenceResult>), EvalError> {
            let gt = index.load_ground_truth(&entry.name, &config.load)?;
            let checked = check_sequence(&gt, results_root, config);
            let validation = SequenceValidation {
                sequence: entry.name.clone(),
                problems: checked.as_ref().err().cloned().unwrap_or_default(),
            };
            let result = match checked {
                Ok(results) => Some(match config.task {
                    Task::Unsupervised => {
                        evaluate_unsupervised(&gt, &results, config.max_proposals, config.tolerance)?
                    }
                    Task::SemiSupervised => evaluate_semisupervised(&gt, &results, config.tolerance)?,
                }),
                Err(_) => None,
            };
            Ok((validation, result))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let validation = ValidationReport {
        split: index.split().to_string(),
        task: config.task,
        sequences: per_sequence.iter().map(|(v, _)| v.clone()).collect(),
    };
    if !validation.passed() {
        return Ok(SplitOutcome::Rejected(validation));
    }
    let results = per_sequence.into_iter().filter_map(|(_, r)| r).collect();
    Ok(SplitOutcome::Evaluated(aggregate(index.split(), config.task, results)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{MultiObjectMask, SequenceRole};
    use crate::metrics::{boundary_f, jaccard};

    const TOL: f64 = DEFAULT_BOUNDARY_TOLERANCE;

    /// Frames of size w×h with axis-aligned squares `(id, x, y, s)`.
    fn squares(w: u32, h: u32, n: usize, objs: &dyn Fn(usize) -> Vec<(u8, u32, u32, u32)>) -> Vec<MultiObjectMask> {
        (0..n)
            .map(|k| {
                let mut m = MultiObjectMask::empty(w, h).unwrap();
                for (id, x0, y0, s) in objs(k) {
                    for y in y0..y0 + s {
                        for x in x0..x0 + s {
                            m.set(x, y, id);
                        }
                    }
                }
                m
            })
            .collect()
    }

    fn seq(frames: Vec<MultiObjectMask>, role: SequenceRole) -> MaskSequence {
        MaskSequence::new("s", role, frames).unwrap()
    }

    fn two_objects(k: usize) -> Vec<(u8, u32, u32, u32)> {
        vec![(1, 5 + k as u32, 5, 10), (2, 40, 20 + k as u32, 12)]
    }

    #[test]
    fn frame_exclusion() {
        assert_eq!(evaluated_frames(5), vec![1, 2, 3]);
        assert!(evaluated_frames(2).is_empty());
    }

    #[test]
    fn relabeled_proposals_score_one() {
        let gt = seq(squares(64, 48, 6, &two_objects), SequenceRole::GroundTruth);
        let relabel = |k: usize| {
            two_objects(k)
                .into_iter()
                .map(|(id, x, y, s)| (if id == 1 { 9 } else { 4 }, x, y, s))
                .collect()
        };
        let pred = seq(squares(64, 48, 6, &relabel), SequenceRole::Results);
        let r = evaluate_unsupervised(&gt, &pred, 20, TOL).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].matched_id, Some(9));
        assert_eq!(r.rows[1].matched_id, Some(4));
        for row in &r.rows {
            assert_eq!((row.j.mean, row.f.mean, row.jf_mean), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn background_proposals_score_zero() {
        let gt = seq(squares(64, 48, 5, &two_objects), SequenceRole::GroundTruth);
        let pred = seq(squares(64, 48, 5, &|_| vec![]), SequenceRole::Results);
        let r = evaluate_unsupervised(&gt, &pred, 20, TOL).unwrap();
        for row in &r.rows {
            assert_eq!(row.matched_id, None);
            assert_eq!(row.jf_mean, 0.0);
        }
    }

    #[test]
    fn one_exact_proposal_one_missing() {
        let gt = seq(squares(64, 48, 6, &two_objects), SequenceRole::GroundTruth);
        // proposal 3 equals object 1; proposal 5 sits far from object 2
        let props = |k: usize| vec![(3, 5 + k as u32, 5, 10), (5, 2, 36, 4)];
        let pred = seq(squares(64, 48, 6, &props), SequenceRole::Results);
        let r = evaluate_unsupervised(&gt, &pred, 20, TOL).unwrap();
        assert_eq!(r.rows[0].matched_id, Some(3));
        assert_eq!(r.rows[0].jf_mean, 1.0);
        // oracle: object 2 against proposal 5 with the assignment fixed
        let frames = evaluated_frames(6);
        let mut js = vec![];
        let mut fs = vec![];
        for &k in &frames {
            let g = gt.frame(k).binary(2);
            let p = pred.frame(k).binary(5);
            js.push(jaccard(&p, &g).unwrap());
            fs.push(boundary_f(&p, &g, TOL).unwrap());
        }
        let row = &r.rows[1];
        assert_eq!(row.matched_id, Some(5));
        assert_eq!(row.j, summarize(&js).unwrap());
        assert_eq!(row.f, summarize(&fs).unwrap());
        assert_eq!(row.jf_mean, 0.0);
    }

    #[test]
    fn proposal_cap_enforced() {
        let gt = seq(squares(64, 48, 4, &two_objects), SequenceRole::GroundTruth);
        let many = |_k: usize| (0..21u8).map(|i| (i + 1, (i as u32 % 7) * 9, (i as u32 / 7) * 9, 3)).collect();
        let pred = seq(squares(64, 48, 4, &many), SequenceRole::Results);
        let err = evaluate_unsupervised(&gt, &pred, 20, TOL).unwrap_err();
        assert!(err.to_string().contains("proposal cap exceeded (21 > 20)"), "{err}");
    }

    #[test]
    fn semisupervised_identity_and_missing_object() {
        let gt = seq(squares(64, 48, 6, &two_objects), SequenceRole::GroundTruth);
        let r = evaluate_semisupervised(&gt, &gt, TOL).unwrap();
        assert!(r.rows.iter().all(|row| row.jf_mean == 1.0));

        let only_first = |k: usize| vec![two_objects(k)[0]];
        let pred = seq(squares(64, 48, 6, &only_first), SequenceRole::Results);
        let r = evaluate_semisupervised(&gt, &pred, TOL).unwrap();
        assert_eq!(r.rows[0].j.mean, 1.0);
        assert_eq!(r.rows[1].j.mean, 0.0);
        assert_eq!(r.rows[1].matched_id, Some(2));
    }

    #[test]
    fn semisupervised_shifted_square() {
        let gt = seq(squares(64, 48, 5, &|_| vec![(1, 10, 10, 10)]), SequenceRole::GroundTruth);
        let pred = seq(squares(64, 48, 5, &|_| vec![(1, 15, 10, 10)]), SequenceRole::Results);
        let r = evaluate_semisupervised(&gt, &pred, TOL).unwrap();
        assert!((r.rows[0].j.mean - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn semisupervised_unknown_id() {
        let gt = seq(squares(64, 48, 4, &two_objects), SequenceRole::GroundTruth);
        let pred = seq(squares(64, 48, 4, &|_| vec![(7, 1, 1, 3)]), SequenceRole::Results);
        let err = evaluate_semisupervised(&gt, &pred, TOL).unwrap_err();
        assert!(matches!(
            err,
            EvalError::Rejected { problem: Problem::UnknownIds(ref ids), .. } if ids == &vec![7]
        ));
    }

    #[test]
    fn first_and_last_frame_corruption_ignored() {
        let gt = seq(squares(64, 48, 6, &two_objects), SequenceRole::GroundTruth);
        let corrupt = |k: usize| if k == 0 || k == 5 { vec![(1, 0, 0, 30)] } else { two_objects(k) };
        let pred = seq(squares(64, 48, 6, &corrupt), SequenceRole::Results);
        let a = evaluate_semisupervised(&gt, &gt, TOL).unwrap();
        let b = evaluate_semisupervised(&gt, &pred, TOL).unwrap();
        assert_eq!(a, b);
        let c = evaluate_unsupervised(&gt, &pred, 20, TOL).unwrap();
        assert_eq!(c.rows.iter().map(|r| r.jf_mean).collect::<Vec<_>>(), vec![1.0, 1.0]);
    }

    #[test]
    fn too_short_sequence() {
        let gt = seq(squares(8, 8, 2, &|_| vec![(1, 1, 1, 2)]), SequenceRole::GroundTruth);
        assert!(matches!(
            evaluate_semisupervised(&gt, &gt, TOL),
            Err(EvalError::TooShort(_, 2))
        ));
    }

    fn row(id: u8, jf: f64) -> ObjectRow {
        let t = MetricTriple { mean: jf, recall: jf, decay: 0.0 };
        ObjectRow::new(id, Some(id), t, t)
    }

    #[test]
    fn aggregation_weights_objects() {
        let results = vec![
            SequenceResult { sequence: "a".into(), rows: vec![row(1, 1.0)] },
            SequenceResult { sequence: "b".into(), rows: vec![row(1, 0.0), row(2, 0.0), row(3, 0.0)] },
        ];
        let rep = aggregate("x", Task::Unsupervised, results).unwrap();
        assert_eq!(rep.global.jf_mean, 0.25);
    }

    #[test]
    fn aggregation_single_and_empty() {
        let r = row(4, 0.7);
        let rep = aggregate("x", Task::SemiSupervised, vec![SequenceResult { sequence: "a".into(), rows: vec![r.clone()] }]).unwrap();
        assert_eq!(rep.global.jf_mean, r.jf_mean);
        assert_eq!(rep.global.j_mean, r.j.mean);
        assert_eq!(rep.global.f_recall, r.f.recall);
        assert!(matches!(aggregate("x", Task::SemiSupervised, vec![]), Err(EvalError::EmptyReport)));
    }

    #[test]
    fn rounded_table_means_combine() {
        // val row: J 36.8, F 45.7 -> J&F 41.25 (printed 41.2)
        let t = |m: f64| MetricTriple { mean: m, recall: 0.0, decay: 0.0 };
        let rows = vec![ObjectRow::new(1, Some(1), t(0.368), t(0.457))];
        let rep = aggregate("val", Task::Unsupervised, vec![SequenceResult { sequence: "s".into(), rows }]).unwrap();
        assert!((rep.global.jf_mean * 100.0 - 41.25).abs() < 1e-9);
        assert!((rep.global.jf_mean * 100.0 - 41.2).abs() <= 0.05 + 1e-9);
    }

    #[test]
    fn task_parsing() {
        assert_eq!("unsupervised".parse::<Task>().unwrap(), Task::Unsupervised);
        assert_eq!("semi-supervised".parse::<Task>().unwrap(), Task::SemiSupervised);
        assert!("interactive".parse::<Task>().is_err());
    }
}
