//! On-disk dataset and results layout.
//!
//! ```text
//! <root>/ImageSets/2019/<split>.txt          one sequence name per line
//! <root>/Annotations_unsupervised/480p/<seq>/00000.png ...
//! <root>/JPEGImages/480p/<seq>/00000.jpg ...  counted, never decoded
//! <root>/Scribbles/<seq>/001.json             initial interactive scribbles
//! <results>/<seq>/00000.png ...
//! ```
//!
//! Frame order comes from the numeric file stem, never from directory order.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{decode_mask, CodecError};
use crate::mask::{MaskError, MaskSequence, MultiObjectMask, ObjectId, SequenceRole, DEFAULT_MAX_ID};

pub const ANNOTATIONS_DIR: &str = "Annotations_unsupervised/480p";
pub const IMAGES_DIR: &str = "JPEGImages/480p";
pub const IMAGE_SETS_DIR: &str = "ImageSets/2019";
pub const SCRIBBLES_DIR: &str = "Scribbles";

/// Official split names; other names are accepted for local datasets.
pub const OFFICIAL_SPLITS: [&str; 4] = ["train", "val", "test-dev", "test-challenge"];

/// `%05d.png`
pub fn frame_file_name(index: usize) -> String {
    format!("{index:05}.png")
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: CodecError,
    },
    #[error("sequence {sequence}: missing frames {}", FrameList(missing))]
    Gap {
        sequence: String,
        missing: Vec<usize>,
    },
    #[error("sequence {sequence}: unexpected frames {}", FrameList(extra))]
    ExtraFrames {
        sequence: String,
        extra: Vec<usize>,
    },
    #[error("sequence {sequence}: frame {frame:05} is {got_w}x{got_h}, expected {width}x{height}")]
    Dimensions {
        sequence: String,
        frame: usize,
        width: u32,
        height: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("sequence {sequence}: frame {frame:05} has id {id} above the maximum {max}")]
    IdOutOfRange {
        sequence: String,
        frame: usize,
        id: ObjectId,
        max: ObjectId,
    },
    #[error("sequence {sequence}: {source}")]
    Mask {
        sequence: String,
        #[source]
        source: MaskError,
    },
    #[error("sequence {0} is not part of the split")]
    UnknownSequence(String),
}

struct FrameList<'a>(&'a [usize]);

impl fmt::Display for FrameList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k:05}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid split name {0:?}")]
    SplitName(String),
    #[error("dataset layout has {} violation(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Layout(Vec<LayoutViolation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayoutViolation {
    MissingSplitFile(PathBuf),
    MissingAnnotations(String),
    MissingImages(String),
    FrameCountMismatch {
        sequence: String,
        annotations: usize,
        images: usize,
    },
    TooFewFrames {
        sequence: String,
        frames: usize,
    },
    DuplicateSequence(String),
}

impl fmt::Display for LayoutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingSplitFile(p) => write!(f, "split list {} not found", p.display()),
            Self::MissingAnnotations(s) => write!(f, "sequence {s}: annotations directory missing"),
            Self::MissingImages(s) => write!(f, "sequence {s}: images directory missing"),
            Self::FrameCountMismatch {
                sequence,
                annotations,
                images,
            } => write!(
                f,
                "sequence {sequence}: {annotations} annotation frames but {images} images"
            ),
            Self::TooFewFrames { sequence, frames } => {
                write!(f, "sequence {sequence}: {frames} frames, need at least 2")
            }
            Self::DuplicateSequence(s) => write!(f, "sequence {s} listed twice"),
        }
    }
}

/// How masks are validated on load.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub max_id: ObjectId,
    /// Label treated as an ignore region in ground truth. Without it, ids
    /// above `max_id` are rejected.
    pub void_id: Option<ObjectId>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            max_id: DEFAULT_MAX_ID,
            void_id: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceEntry {
    pub name: String,
    pub frames: usize,
}

/// A validated split: every listed sequence has annotations and images with
/// equal frame counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetIndex {
    root: PathBuf,
    split: String,
    sequences: Vec<SequenceEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Numeric frame indices found in a directory, by stem.
fn frame_indices(dir: &Path, extension: Option<&str>) -> io::Result<Vec<usize>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        let ext = path.extension().and_then(|e| e.to_str());
        if let Some(want) = extension {
            if ext != Some(want) {
                continue;
            }
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if !stem.is_empty() && stem.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(k) = stem.parse() {
                out.push(k);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Sequence statistics and layout problems of a split, without failing on
/// the first problem.
#[derive(Clone, Debug, Default)]
pub struct LayoutScan {
    pub sequences: Vec<SequenceEntry>,
    pub violations: Vec<LayoutViolation>,
}

impl DatasetIndex {
    pub fn split_file(root: &Path, split: &str) -> PathBuf {
        root.join(IMAGE_SETS_DIR).join(format!("{split}.txt"))
    }

    /// Reads the split list and checks the layout of each sequence.
    pub fn scan(root: &Path, split: &str) -> Result<LayoutScan, DatasetError> {
        if !valid_name(split) {
            return Err(DatasetError::SplitName(split.to_string()));
        }
        let list = Self::split_file(root, split);
        let text = match fs::read_to_string(&list) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Ok(LayoutScan {
                    sequences: vec![],
                    violations: vec![LayoutViolation::MissingSplitFile(list)],
                })
            }
            Err(e) => return Err(io_err(&list)(e)),
        };
        let mut scan = LayoutScan::default();
        let mut seen = std::collections::BTreeSet::new();
        for name in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if !seen.insert(name.to_string()) {
                scan.violations
                    .push(LayoutViolation::DuplicateSequence(name.to_string()));
                continue;
            }
            let ann = root.join(ANNOTATIONS_DIR).join(name);
            let img = root.join(IMAGES_DIR).join(name);
            let ann_frames = if ann.is_dir() {
                Some(frame_indices(&ann, Some("png")).map_err(io_err(&ann))?.len())
            } else {
                scan.violations
                    .push(LayoutViolation::MissingAnnotations(name.to_string()));
                None
            };
            let img_frames = if img.is_dir() {
                Some(frame_indices(&img, None).map_err(io_err(&img))?.len())
            } else {
                scan.violations
                    .push(LayoutViolation::MissingImages(name.to_string()));
                None
            };
            if let (Some(a), Some(i)) = (ann_frames, img_frames) {
                if a != i {
                    scan.violations.push(LayoutViolation::FrameCountMismatch {
                        sequence: name.to_string(),
                        annotations: a,
                        images: i,
                    });
                } else if a < 2 {
                    scan.violations.push(LayoutViolation::TooFewFrames {
                        sequence: name.to_string(),
                        frames: a,
                    });
                } else {
                    scan.sequences.push(SequenceEntry {
                        name: name.to_string(),
                        frames: a,
                    });
                }
            }
        }
        Ok(scan)
    }

    pub fn open(root: impl AsRef<Path>, split: &str) -> Result<Self, DatasetError> {
        let root = root.as_ref();
        let scan = Self::scan(root, split)?;
        if !scan.violations.is_empty() {
            return Err(DatasetError::Layout(scan.violations));
        }
        Ok(Self {
            root: root.to_path_buf(),
            split: split.to_string(),
            sequences: scan.sequences,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn split(&self) -> &str {
        &self.split
    }

    pub fn sequences(&self) -> &[SequenceEntry] {
        &self.sequences
    }

    pub fn entry(&self, name: &str) -> Option<&SequenceEntry> {
        self.sequences.iter().find(|s| s.name == name)
    }

    pub fn annotations_dir(&self, name: &str) -> PathBuf {
        self.root.join(ANNOTATIONS_DIR).join(name)
    }

    pub fn scribbles_dir(&self, name: &str) -> PathBuf {
        self.root.join(SCRIBBLES_DIR).join(name)
    }

    pub fn load_ground_truth(&self, name: &str, opts: &LoadOptions) -> Result<MaskSequence, LoadError> {
        let entry = self
            .entry(name)
            .ok_or_else(|| LoadError::UnknownSequence(name.to_string()))?;
        load_sequence_dir(
            &self.annotations_dir(name),
            name,
            entry.frames,
            SequenceRole::GroundTruth,
            opts,
            false,
        )
    }
}

/// Loads `<results_root>/<name>/`, expecting exactly `frames` frames. With
/// `first_optional`, a missing frame 0 is replaced by an empty mask.
pub fn load_results(
    results_root: &Path,
    name: &str,
    frames: usize,
    opts: &LoadOptions,
    first_optional: bool,
) -> Result<MaskSequence, LoadError> {
    let opts = LoadOptions {
        void_id: None,
        ..*opts
    };
    load_sequence_dir(
        &results_root.join(name),
        name,
        frames,
        SequenceRole::Results,
        &opts,
        first_optional,
    )
}

fn read_frame(path: &Path) -> Result<MultiObjectMask, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_mask(&bytes).map_err(|source| LoadError::Codec {
        path: path.to_path_buf(),
        source,
    })
}

fn load_sequence_dir(
    dir: &Path,
    name: &str,
    frames: usize,
    role: SequenceRole,
    opts: &LoadOptions,
    first_optional: bool,
) -> Result<MaskSequence, LoadError> {
    let found = frame_indices(dir, Some("png")).map_err(|source| LoadError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let present: std::collections::BTreeSet<usize> = found.iter().copied().collect();
    let missing: Vec<usize> = (0..frames)
        .filter(|k| !present.contains(k) && !(first_optional && *k == 0))
        .collect();
    if !missing.is_empty() {
        return Err(LoadError::Gap {
            sequence: name.to_string(),
            missing,
        });
    }
    let extra: Vec<usize> = found.iter().copied().filter(|&k| k >= frames).collect();
    if !extra.is_empty() {
        return Err(LoadError::ExtraFrames {
            sequence: name.to_string(),
            extra,
        });
    }

    let decoded: BTreeMap<usize, MultiObjectMask> = (0..frames)
        .into_par_iter()
        .filter(|k| present.contains(k))
        .map(|k| read_frame(&dir.join(frame_file_name(k))).map(|m| (k, m)))
        .collect::<Result<_, _>>()?;

    let (width, height) = {
        let first = decoded.values().next().expect("frames >= 1");
        (first.width(), first.height())
    };
    let mut masks = Vec::with_capacity(frames);
    for k in 0..frames {
        let mask = match decoded.get(&k) {
            Some(m) => m.clone(),
            None => MultiObjectMask::empty(width, height).expect("nonzero size"),
        };
        if mask.width() != width || mask.height() != height {
            return Err(LoadError::Dimensions {
                sequence: name.to_string(),
                frame: k,
                width,
                height,
                got_w: mask.width(),
                got_h: mask.height(),
            });
        }
        if let Err(MaskError::IdOutOfRange { id, max }) = mask.check_ids(opts.max_id, opts.void_id) {
            return Err(LoadError::IdOutOfRange {
                sequence: name.to_string(),
                frame: k,
                id,
                max,
            });
        }
        masks.push(mask);
    }
    MaskSequence::with_void(name, role, masks, opts.void_id).map_err(|source| LoadError::Mask {
        sequence: name.to_string(),
        source,
    })
}
