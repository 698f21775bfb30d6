//! Session state machine of the interactive service.
//!
//! A session starts with the authored initial scribbles of a sequence and
//! then accepts up to [`MAX_ROUNDS`] mask submissions. Each submission is
//! scored per frame, the worst eligible frame is picked and the robot
//! returns correction scribbles for it. A submission arriving after the
//! per-round budget closes the session with the rounds completed so far.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scribble::{robot_scribble, Scribble, ScribbleError, ScribbleFile, INITIAL_SCRIBBLE_FILE};
use crate::dataset::{DatasetIndex, LoadError, LoadOptions};
use crate::mask::MaskSequence;
use crate::metrics::DEFAULT_BOUNDARY_TOLERANCE;
use crate::pairwise::{AlignmentError, PairwiseScores};

pub const MAX_ROUNDS: usize = 8;
pub const SECONDS_PER_OBJECT: f64 = 30.0;

/// Source of elapsed time since an arbitrary origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
}

#[derive(Debug)]
pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        Self(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(Mutex<Duration>);

impl ManualClock {
    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.0.lock().unwrap()
    }
}

impl<C: Clock + ?Sized> Clock for Arc<C> {
    fn now(&self) -> Duration {
        (**self).now()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    Open,
    Exhausted,
    Expired,
}

impl std::fmt::Display for SessionState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Open => "OPEN",
            Self::Exhausted => "EXHAUSTED",
            Self::Expired => "EXPIRED",
        })
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown sequence {0}")]
    UnknownSequence(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("session {0} is busy with another submission")]
    Conflict(String),
    #[error("session {id} is closed ({state})")]
    Closed { id: String, state: SessionState },
    #[error("submission rejected: {0}")]
    Rejected(String),
    #[error("candidate frame {index} out of range for {len} frames")]
    Candidate { index: usize, len: usize },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Scribbles(#[from] ScribbleError),
}

impl From<AlignmentError> for ServiceError {
    fn from(e: AlignmentError) -> Self {
        Self::Rejected(e.to_string())
    }
}

/// One scored interaction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub per_frame_jf: Vec<f64>,
    pub target_frame: usize,
    pub scribbles: Vec<Scribble>,
}

impl RoundRecord {
    /// Mean of the per-frame scores: this round's trajectory entry.
    pub fn score(&self) -> f64 {
        self.per_frame_jf.iter().sum::<f64>() / self.per_frame_jf.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubmitOutcome {
    Next {
        round: usize,
        per_frame_jf: Vec<f64>,
        target_frame: usize,
        scribbles: Vec<Scribble>,
    },
    Final {
        trajectory: Vec<f64>,
        state: SessionState,
    },
}

#[derive(Debug)]
struct Session {
    sequence: String,
    gt: Arc<MaskSequence>,
    state: SessionState,
    /// Clock reading when the last response was produced.
    last_response: Duration,
    history: Vec<RoundRecord>,
}

impl Session {
    fn round(&self) -> usize {
        self.history.len()
    }

    fn trajectory(&self) -> Vec<f64> {
        self.history.iter().map(RoundRecord::score).collect()
    }
}

/// Scores every frame of `pred` as the mean J&F over the ground-truth
/// objects.
pub fn per_frame_scores(gt: &MaskSequence, pred: &MaskSequence, tolerance: f64) -> Result<Vec<f64>, AlignmentError> {
    let ids: Vec<_> = gt.ids().iter().copied().collect();
    let frames: Vec<usize> = (0..gt.len()).collect();
    let scores = PairwiseScores::compute_for(gt, pred, &ids, &ids, &frames, tolerance)?;
    if ids.is_empty() {
        return Ok(vec![1.0; frames.len()]);
    }
    let mut sum = vec![0.0; frames.len()];
    for l in 0..ids.len() {
        let j = scores.j_series(l, Some(l));
        let f = scores.f_series(l, Some(l));
        for k in 0..frames.len() {
            sum[k] += (j[k] + f[k]) / 2.0;
        }
    }
    Ok(sum.into_iter().map(|s| s / ids.len() as f64).collect())
}

/// Lowest-index frame with the smallest score among `eligible`.
fn argmin(scores: &[f64], eligible: &[usize]) -> usize {
    let mut best = eligible[0];
    for &k in eligible {
        if scores[k] < scores[best] || (scores[k] == scores[best] && k < best) {
            best = k;
        }
    }
    best
}

/// Holds the sessions of one split.
pub struct InteractiveService {
    index: DatasetIndex,
    load: LoadOptions,
    /// Multiplies the per-round budget; 0 disables it.
    budget_scale: f64,
    clock: Arc<dyn Clock>,
    ground_truth: RwLock<HashMap<String, Arc<MaskSequence>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

impl InteractiveService {
    pub fn new(index: DatasetIndex, load: LoadOptions, budget_scale: f64, clock: Arc<dyn Clock>) -> Self {
        Self {
            index,
            load,
            budget_scale: budget_scale.max(0.0),
            clock,
            ground_truth: RwLock::default(),
            sessions: RwLock::default(),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn index(&self) -> &DatasetIndex {
        &self.index
    }

    pub fn budget_scale(&self) -> f64 {
        self.budget_scale
    }

    /// Seconds allowed between a response and the next submission.
    pub fn budget(&self, objects: usize) -> Option<Duration> {
        (self.budget_scale > 0.0)
            .then(|| Duration::from_secs_f64(SECONDS_PER_OBJECT * objects as f64 * self.budget_scale))
    }

    fn ground_truth(&self, sequence: &str) -> Result<Arc<MaskSequence>, ServiceError> {
        if let Some(gt) = self.ground_truth.read().unwrap().get(sequence) {
            return Ok(gt.clone());
        }
        if self.index.entry(sequence).is_none() {
            return Err(ServiceError::UnknownSequence(sequence.to_string()));
        }
        let gt = Arc::new(self.index.load_ground_truth(sequence, &self.load)?);
        self.ground_truth
            .write()
            .unwrap()
            .insert(sequence.to_string(), gt.clone());
        Ok(gt)
    }

    /// Opens a session and returns its id with the authored scribbles.
    pub fn start_session(&self, sequence: &str) -> Result<(String, Vec<Scribble>), ServiceError> {
        let gt = self.ground_truth(sequence)?;
        let file = ScribbleFile::load(&self.index.scribbles_dir(sequence).join(INITIAL_SCRIBBLE_FILE))?;
        for s in &file.scribbles {
            s.validate(gt.ids())?;
        }
        let id = format!("s{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let session = Session {
            sequence: sequence.to_string(),
            gt,
            state: SessionState::Open,
            last_response: self.clock.now(),
            history: Vec::new(),
        };
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok((id, file.scribbles))
    }

    /// Sequence, round and state of a session; a busy session is a
    /// conflict rather than a wait.
    pub fn status(&self, id: &str) -> Result<(String, usize, SessionState), ServiceError> {
        let handle = self.handle(id)?;
        let s = match handle.try_lock() {
            Ok(guard) => guard,
            Err(std::sync::TryLockError::WouldBlock) => return Err(ServiceError::Conflict(id.to_string())),
            Err(std::sync::TryLockError::Poisoned(p)) => p.into_inner(),
        };
        Ok((s.sequence.clone(), s.round(), s.state))
    }

    fn handle(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Scores one submission. A second submission racing on the same
    /// session gets [`ServiceError::Conflict`].
    pub fn submit_masks(
        &self,
        id: &str,
        masks: &MaskSequence,
        candidate_frames: Option<&[usize]>,
    ) -> Result<SubmitOutcome, ServiceError> {
        let received = self.clock.now();
        let handle = self.handle(id)?;
        let mut session = match handle.try_lock() {
            Ok(guard) => guard,
            Err(std::sync::TryLockError::WouldBlock) => return Err(ServiceError::Conflict(id.to_string())),
            Err(std::sync::TryLockError::Poisoned(p)) => p.into_inner(),
        };
        if session.state != SessionState::Open {
            return Err(ServiceError::Closed {
                id: id.to_string(),
                state: session.state,
            });
        }
        if let Some(budget) = self.budget(session.gt.ids().len()) {
            if received.saturating_sub(session.last_response) > budget {
                session.state = SessionState::Expired;
                return Ok(SubmitOutcome::Final {
                    trajectory: session.trajectory(),
                    state: SessionState::Expired,
                });
            }
        }

        let gt = session.gt.clone();
        let per_frame_jf = per_frame_scores(&gt, masks, DEFAULT_BOUNDARY_TOLERANCE)?;
        let eligible: Vec<usize> = match candidate_frames {
            Some(c) if !c.is_empty() => {
                if let Some(&index) = c.iter().find(|&&k| k >= gt.len()) {
                    return Err(ServiceError::Candidate { index, len: gt.len() });
                }
                c.to_vec()
            }
            _ => (0..gt.len()).collect(),
        };
        let target_frame = argmin(&per_frame_jf, &eligible);
        let (pred, truth) = (masks.frame(target_frame), gt.frame(target_frame));
        let mut scribbles = Vec::new();
        for &object_id in gt.ids() {
            let s = robot_scribble(pred, truth, object_id, target_frame).map_err(|e| ServiceError::Rejected(e.to_string()))?;
            if !s.is_empty() {
                scribbles.push(s);
            }
        }
        session.history.push(RoundRecord {
            per_frame_jf: per_frame_jf.clone(),
            target_frame,
            scribbles: scribbles.clone(),
        });
        session.last_response = self.clock.now();
        if session.round() >= MAX_ROUNDS {
            session.state = SessionState::Exhausted;
            return Ok(SubmitOutcome::Final {
                trajectory: session.trajectory(),
                state: SessionState::Exhausted,
            });
        }
        Ok(SubmitOutcome::Next {
            round: session.round(),
            per_frame_jf,
            target_frame,
            scribbles,
        })
    }

    /// Completed rounds of a session.
    pub fn history(&self, id: &str) -> Result<Vec<RoundRecord>, ServiceError> {
        Ok(self.handle(id)?.lock().unwrap().history.clone())
    }
}
