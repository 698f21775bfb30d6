//! JSON bodies of the interactive HTTP protocol.

use serde::{Deserialize, Serialize};

use super::scribble::Scribble;
use super::session::{SessionState, SubmitOutcome};
use crate::mask::{MaskSequence, SequenceRole};
use crate::rle::{decode_rle, encode_rle, RleError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartRequest {
    pub sequence: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartResponse {
    pub session_id: String,
    pub scribbles: Vec<Scribble>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRle {
    pub index: usize,
    pub rle: Vec<u32>,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub frames: Vec<FrameRle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_frames: Option<Vec<usize>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WireError {
    #[error("frame {index}: {source}")]
    Rle {
        index: usize,
        #[source]
        source: RleError,
    },
    #[error("frame indices must be 0..{expected} without gaps or repeats")]
    Indices { expected: usize },
    #[error("{0}")]
    Sequence(String),
}

impl SubmitRequest {
    /// Builds a request from a mask sequence.
    pub fn from_sequence(masks: &MaskSequence, candidate_frames: Option<Vec<usize>>) -> Self {
        let frames = masks
            .frames()
            .iter()
            .enumerate()
            .map(|(index, m)| FrameRle {
                index,
                rle: encode_rle(m),
                width: m.width(),
                height: m.height(),
            })
            .collect();
        Self {
            frames,
            candidate_frames,
        }
    }

    /// Decodes the frames; indices may arrive in any order but must cover
    /// `0..n` exactly once.
    pub fn to_sequence(&self, name: &str) -> Result<MaskSequence, WireError> {
        let n = self.frames.len();
        let mut slots = vec![None; n];
        for f in &self.frames {
            let slot = slots
                .get_mut(f.index)
                .filter(|s| s.is_none())
                .ok_or(WireError::Indices { expected: n })?;
            let mask = decode_rle(f.width, f.height, &f.rle).map_err(|source| WireError::Rle {
                index: f.index,
                source,
            })?;
            *slot = Some(mask);
        }
        let frames = slots.into_iter().map(|s| s.expect("all filled")).collect();
        MaskSequence::new(name, SequenceRole::Results, frames).map_err(|e| WireError::Sequence(e.to_string()))
    }
}

/// Response to a submission: either the next round or the final report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubmitResponse {
    Final {
        #[serde(rename = "final")]
        is_final: bool,
        trajectory: Vec<f64>,
        state: SessionState,
    },
    Next {
        round: usize,
        per_frame_jf: Vec<f64>,
        target_frame: usize,
        scribbles: Vec<Scribble>,
    },
}

impl From<SubmitOutcome> for SubmitResponse {
    fn from(o: SubmitOutcome) -> Self {
        match o {
            SubmitOutcome::Next {
                round,
                per_frame_jf,
                target_frame,
                scribbles,
            } => Self::Next {
                round,
                per_frame_jf,
                target_frame,
                scribbles,
            },
            SubmitOutcome::Final { trajectory, state } => Self::Final {
                is_final: true,
                trajectory,
                state,
            },
        }
    }
}

/// Body of every non-2xx response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub kind: String,
}
