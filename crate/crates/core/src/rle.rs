//! Run-length encoding of label masks for the interactive wire protocol.
//!
//! A frame is scanned row-major and written as alternating `(id, length)`
//! pairs: `[id0, len0, id1, len1, ...]`. Every length is at least 1, two
//! consecutive runs never share an id, and the lengths sum to
//! `width * height`. The encoding of a mask is therefore unique, and
//! decoding rejects anything that is not in that canonical form.

use thiserror::Error;

use crate::mask::{MaskError, MultiObjectMask, ObjectId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RleError {
    #[error("run list has odd length {0}")]
    OddLength(usize),
    #[error("run {0} has zero length")]
    ZeroRun(usize),
    #[error("run {index} carries id {id}, above 255")]
    IdRange { index: usize, id: u32 },
    #[error("run {0} repeats the id of the run before it")]
    NotCanonical(usize),
    #[error("runs cover {got} pixels, expected {expected}")]
    Length { expected: u64, got: u64 },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

pub fn encode_rle(mask: &MultiObjectMask) -> Vec<u32> {
    let mut out = Vec::new();
    let mut labels = mask.labels().iter();
    let Some(&first) = labels.next() else {
        return out;
    };
    let (mut id, mut len) = (first, 1u32);
    for &l in labels {
        if l == id {
            len += 1;
        } else {
            out.extend([id as u32, len]);
            id = l;
            len = 1;
        }
    }
    out.extend([id as u32, len]);
    out
}

pub fn decode_rle(width: u32, height: u32, runs: &[u32]) -> Result<MultiObjectMask, RleError> {
    if runs.len() % 2 != 0 {
        return Err(RleError::OddLength(runs.len()));
    }
    let expected = width as u64 * height as u64;
    let total: u64 = runs.chunks(2).map(|p| p[1] as u64).sum();
    if total != expected {
        return Err(RleError::Length {
            expected,
            got: total,
        });
    }
    let mut labels: Vec<ObjectId> = Vec::with_capacity(expected as usize);
    let mut prev: Option<u32> = None;
    for (index, pair) in runs.chunks(2).enumerate() {
        let (id, len) = (pair[0], pair[1]);
        if id > u8::MAX as u32 {
            return Err(RleError::IdRange { index, id });
        }
        if len == 0 {
            return Err(RleError::ZeroRun(index));
        }
        if prev == Some(id) {
            return Err(RleError::NotCanonical(index));
        }
        prev = Some(id);
        labels.extend(std::iter::repeat_n(id as ObjectId, len as usize));
    }
    Ok(MultiObjectMask::new(width, height, labels)?)
}
