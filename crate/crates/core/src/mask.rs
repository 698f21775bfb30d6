//! In-memory mask types.
//!
//! A [`MultiObjectMask`] stores exactly one object id per pixel, so two
//! objects can never claim the same pixel. Id `0` is background.

use std::collections::BTreeSet;

use thiserror::Error;

/// Object identifier as stored in a palette-indexed mask.
pub type ObjectId = u8;

/// Largest id accepted by default. 255 is reserved (often "void" in DAVIS
/// releases) and rejected unless explicitly mapped to an ignore region.
pub const DEFAULT_MAX_ID: ObjectId = 254;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("label buffer has {got} entries, expected {width}x{height} = {expected}")]
    BufferSize {
        width: u32,
        height: u32,
        expected: usize,
        got: usize,
    },
    #[error("mask dimensions must be nonzero, got {width}x{height}")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: u32,
        left_h: u32,
        right_w: u32,
        right_h: u32,
    },
    #[error("object id {id} exceeds the maximum id {max}")]
    IdOutOfRange { id: ObjectId, max: ObjectId },
    #[error("a sequence needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("frame {frame} is {got_w}x{got_h} but the sequence is {width}x{height}")]
    FrameDimensions {
        frame: usize,
        width: u32,
        height: u32,
        got_w: u32,
        got_h: u32,
    },
}

/// One frame's labeling: a row-major grid of object ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiObjectMask {
    width: u32,
    height: u32,
    labels: Vec<ObjectId>,
}

impl MultiObjectMask {
    pub fn new(width: u32, height: u32, labels: Vec<ObjectId>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::EmptyDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if labels.len() != expected {
            return Err(MaskError::BufferSize {
                width,
                height,
                expected,
                got: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// All-background mask.
    pub fn empty(width: u32, height: u32) -> Result<Self, MaskError> {
        Self::new(width, height, vec![0; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[ObjectId] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<ObjectId> {
        self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> ObjectId {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, id: ObjectId) {
        let w = self.width as usize;
        self.labels[y as usize * w + x as usize] = id;
    }

    pub fn same_dimensions(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_dimensions(&self, other: &Self) -> Result<(), MaskError> {
        if self.same_dimensions(other) {
            Ok(())
        } else {
            Err(MaskError::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    /// Nonzero ids present in this frame.
    pub fn ids(&self) -> BTreeSet<ObjectId> {
        let mut seen = [false; 256];
        for &l in &self.labels {
            seen[l as usize] = true;
        }
        (1..=255u8).filter(|&id| seen[id as usize]).collect()
    }

    pub fn max_id(&self) -> ObjectId {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Fails if any label is above `max` (ignoring `allowed`, typically a
    /// configured void id).
    pub fn check_ids(&self, max: ObjectId, allowed: Option<ObjectId>) -> Result<(), MaskError> {
        match self
            .labels
            .iter()
            .copied()
            .find(|&l| l > max && Some(l) != allowed)
        {
            Some(id) => Err(MaskError::IdOutOfRange { id, max }),
            None => Ok(()),
        }
    }

    /// Binary support of one object.
    pub fn binary(&self, id: ObjectId) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| l == id).collect(),
        }
    }

    /// Number of pixels carrying `id`.
    pub fn area(&self, id: ObjectId) -> usize {
        self.labels.iter().filter(|&&l| l == id).count()
    }
}

/// Foreground/background grid, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self, MaskError> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(MaskError::BufferSize {
                width,
                height,
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    /// Builds a mask from a predicate over `(x, y)`.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn check_dimensions(&self, other: &Self) -> Result<(), MaskError> {
        if self.width == other.width && self.height == other.height {
            Ok(())
        } else {
            Err(MaskError::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    /// Clears every pixel set in `ignore`.
    pub fn clear_where(&mut self, ignore: &BinaryMask) {
        for (d, &i) in self.data.iter_mut().zip(&ignore.data) {
            if i {
                *d = false;
            }
        }
    }
}

/// Whether a sequence holds ground truth or a method's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SequenceRole {
    GroundTruth,
    Results,
}

/// Ordered frames sharing one id space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSequence {
    name: String,
    role: SequenceRole,
    frames: Vec<MultiObjectMask>,
    ids: BTreeSet<ObjectId>,
    void_id: Option<ObjectId>,
}

impl MaskSequence {
    pub fn new(
        name: impl Into<String>,
        role: SequenceRole,
        frames: Vec<MultiObjectMask>,
    ) -> Result<Self, MaskError> {
        Self::with_void(name, role, frames, None)
    }

    /// Like [`MaskSequence::new`], with `void_id` treated as an ignore label
    /// rather than an object.
    pub fn with_void(
        name: impl Into<String>,
        role: SequenceRole,
        frames: Vec<MultiObjectMask>,
        void_id: Option<ObjectId>,
    ) -> Result<Self, MaskError> {
        if frames.len() < 2 {
            return Err(MaskError::TooFewFrames(frames.len()));
        }
        let (width, height) = (frames[0].width, frames[0].height);
        for (i, f) in frames.iter().enumerate() {
            if f.width != width || f.height != height {
                return Err(MaskError::FrameDimensions {
                    frame: i,
                    width,
                    height,
                    got_w: f.width,
                    got_h: f.height,
                });
            }
        }
        let mut ids = BTreeSet::new();
        for f in &frames {
            ids.extend(f.ids());
        }
        if let Some(v) = void_id {
            ids.remove(&v);
        }
        Ok(Self {
            name: name.into(),
            role,
            frames,
            ids,
            void_id,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn role(&self) -> SequenceRole {
        self.role
    }

    pub fn frames(&self) -> &[MultiObjectMask] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &MultiObjectMask {
        &self.frames[index]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height
    }

    /// Union of nonzero ids over all frames, minus the void id.
    pub fn ids(&self) -> &BTreeSet<ObjectId> {
        &self.ids
    }

    pub fn void_id(&self) -> Option<ObjectId> {
        self.void_id
    }

    /// Ignore region of one frame, if a void id is configured and present.
    pub fn ignore_region(&self, index: usize) -> Option<BinaryMask> {
        let v = self.void_id?;
        let frame = &self.frames[index];
        frame.labels.contains(&v).then(|| frame.binary(v))
    }
}
