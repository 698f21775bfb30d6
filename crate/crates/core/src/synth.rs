//! Synthetic datasets with known scores.
//!
//! Scenes are axis-aligned rectangles and ellipses moving at constant
//! integer velocity, so overlaps and shifts have closed-form IoU. The
//! output tree has the same layout as a real split, plus gray placeholder
//! frames and authored initial scribbles.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{encode_mask, CodecError};
use crate::dataset::{frame_file_name, DatasetError, DatasetIndex, ANNOTATIONS_DIR, IMAGES_DIR, IMAGE_SETS_DIR};
use crate::interactive::scribble::{robot_scribble, ScribbleFile, INITIAL_SCRIBBLE_FILE};
use crate::mask::{MaskError, MaskSequence, MultiObjectMask, ObjectId, SequenceRole, DEFAULT_MAX_ID};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("perturbation out of range: {0}")]
    Range(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rectangle,
    Ellipse,
}

/// One moving object. `position` is the top-left corner of the bounding
/// box at frame 0; `size` is `[width, height]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: ObjectId,
    pub shape: Shape,
    pub size: [u32; 2],
    pub position: [i64; 2],
    #[serde(default)]
    pub velocity: [i64; 2],
}

impl ObjectSpec {
    fn corner(&self, frame: usize) -> (i64, i64) {
        let t = frame as i64;
        (self.position[0] + self.velocity[0] * t, self.position[1] + self.velocity[1] * t)
    }

    fn contains(&self, frame: usize, x: u32, y: u32) -> bool {
        let (x0, y0) = self.corner(frame);
        let (w, h) = (self.size[0] as i64, self.size[1] as i64);
        let (dx, dy) = (x as i64 - x0, y as i64 - y0);
        if dx < 0 || dy < 0 || dx >= w || dy >= h {
            return false;
        }
        match self.shape {
            Shape::Rectangle => true,
            Shape::Ellipse => {
                let u = (2 * dx + 1 - w) as f64 / w as f64;
                let v = (2 * dy + 1 - h) as f64 / h as f64;
                u * u + v * v <= 1.0
            }
        }
    }
}

/// One synthetic sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
    #[serde(default)]
    pub seed: u64,
    pub objects: Vec<ObjectSpec>,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Spec(format!("{}: {m}", self.name)));
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(SynthError::Spec(format!("bad sequence name {:?}", self.name)));
        }
        if self.width == 0 || self.height == 0 {
            return bad("zero image size".into());
        }
        if self.frame_count < 2 {
            return bad(format!("needs at least 2 frames, got {}", self.frame_count));
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if o.id == 0 || o.id > DEFAULT_MAX_ID {
                return bad(format!("object id {} outside 1..={DEFAULT_MAX_ID}", o.id));
            }
            if !ids.insert(o.id) {
                return bad(format!("object id {} repeated", o.id));
            }
            if o.size[0] == 0 || o.size[1] == 0 {
                return bad(format!("object {} has zero size", o.id));
            }
            // linear motion: checking both ends covers the trajectory
            for t in [0, self.frame_count - 1] {
                let (x, y) = o.corner(t);
                if x < 0
                    || y < 0
                    || x + o.size[0] as i64 > self.width as i64
                    || y + o.size[1] as i64 > self.height as i64
                {
                    return bad(format!("object {} leaves the image by frame {t}", o.id));
                }
            }
        }
        Ok(())
    }

    /// Frame `k`; later objects are painted over earlier ones.
    pub fn render_frame(&self, k: usize) -> MultiObjectMask {
        let mut m = MultiObjectMask::empty(self.width, self.height).expect("validated size");
        for o in &self.objects {
            let (x0, y0) = o.corner(k);
            for y in y0.max(0)..(y0 + o.size[1] as i64).min(self.height as i64) {
                for x in x0.max(0)..(x0 + o.size[0] as i64).min(self.width as i64) {
                    if o.contains(k, x as u32, y as u32) {
                        m.set(x as u32, y as u32, o.id);
                    }
                }
            }
        }
        m
    }

    pub fn render(&self) -> Result<MaskSequence, SynthError> {
        self.validate()?;
        let frames = (0..self.frame_count).map(|k| self.render_frame(k)).collect();
        Ok(MaskSequence::new(&self.name, SequenceRole::GroundTruth, frames)?)
    }
}

/// Parameters for randomly generated scenes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub count: usize,
    pub width: u32,
    pub height: u32,
    pub min_frames: usize,
    pub max_frames: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    /// When set, object counts are drawn so that they sum to this value.
    #[serde(default)]
    pub total_objects: Option<usize>,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_prefix() -> String {
    "synth".into()
}

/// Top-level spec file: explicit scenes, generated scenes, or both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub split: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sequences: Vec<SceneSpec>,
    #[serde(default)]
    pub generate: Option<GenerateSpec>,
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        serde_json::from_str(text).map_err(|e| SynthError::Spec(e.to_string()))
    }

    /// All scenes, explicit ones first.
    pub fn scenes(&self) -> Result<Vec<SceneSpec>, SynthError> {
        let mut scenes = self.sequences.clone();
        if let Some(g) = &self.generate {
            scenes.extend(generate_scenes(g, self.seed)?);
        }
        if scenes.is_empty() {
            return Err(SynthError::Spec("no sequences".into()));
        }
        let mut names = BTreeSet::new();
        for s in &scenes {
            s.validate()?;
            if !names.insert(&s.name) {
                return Err(SynthError::Spec(format!("sequence {} repeated", s.name)));
            }
        }
        Ok(scenes)
    }
}

fn object_counts(g: &GenerateSpec, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, SynthError> {
    let Some(total) = g.total_objects else {
        return Ok((0..g.count).map(|_| rng.random_range(g.min_objects..=g.max_objects)).collect());
    };
    if total < g.min_objects * g.count || total > g.max_objects * g.count {
        return Err(SynthError::Spec(format!(
            "total_objects {total} unreachable with {} sequences of {}..={} objects",
            g.count, g.min_objects, g.max_objects
        )));
    }
    let mut counts = vec![g.min_objects; g.count];
    let mut left = total - g.min_objects * g.count;
    while left > 0 {
        let open: Vec<usize> = (0..g.count).filter(|&i| counts[i] < g.max_objects).collect();
        counts[open[rng.random_range(0..open.len())]] += 1;
        left -= 1;
    }
    Ok(counts)
}

/// Draws `g.count` scenes. Objects live in disjoint horizontal bands and
/// move horizontally, so they never overlap.
pub fn generate_scenes(g: &GenerateSpec, seed: u64) -> Result<Vec<SceneSpec>, SynthError> {
    if g.min_frames < 2 || g.min_frames > g.max_frames {
        return Err(SynthError::Spec("need 2 <= min_frames <= max_frames".into()));
    }
    if g.min_objects == 0 || g.min_objects > g.max_objects || g.max_objects > DEFAULT_MAX_ID as usize {
        return Err(SynthError::Spec("need 1 <= min_objects <= max_objects <= 254".into()));
    }
    if g.width < 8 || g.height < 4 * g.max_objects as u32 {
        return Err(SynthError::Spec(format!(
            "{}x{} is too small for {} objects",
            g.width, g.height, g.max_objects
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = object_counts(g, &mut rng)?;
    let mut scenes = Vec::with_capacity(g.count);
    for (i, &k) in counts.iter().enumerate() {
        let frame_count = rng.random_range(g.min_frames..=g.max_frames);
        let band = g.height / k as u32;
        let mut ids: Vec<ObjectId> = (1..=k as ObjectId).collect();
        ids.shuffle(&mut rng);
        let mut objects = Vec::with_capacity(k);
        for (b, &id) in ids.iter().enumerate() {
            let h = rng.random_range((band / 2).max(1)..=(band - 2).max(1));
            let w = rng.random_range((g.width / 8).max(1)..=(g.width / 4).max(1));
            let y = b as u32 * band + rng.random_range(0..=band - h);
            let room = (g.width - w) as i64;
            // keep the whole trajectory inside: |v| * (frames - 1) <= room
            let vmax = (room / (frame_count as i64 - 1)).min(3);
            let v = rng.random_range(-vmax..=vmax);
            let travel = v.abs() * (frame_count as i64 - 1);
            let x0 = rng.random_range(0..=room - travel);
            let x = if v < 0 { x0 + travel } else { x0 };
            let shape = if rng.random_bool(0.5) { Shape::Rectangle } else { Shape::Ellipse };
            objects.push(ObjectSpec {
                id,
                shape,
                size: [w, h],
                position: [x, y as i64],
                velocity: [v, 0],
            });
        }
        scenes.push(SceneSpec {
            name: format!("{}-{i:03}", g.prefix),
            width: g.width,
            height: g.height,
            frame_count,
            seed: rng.random(),
            objects,
        });
    }
    Ok(scenes)
}

fn placeholder_jpeg(width: u32, height: u32) -> Result<Vec<u8>, SynthError> {
    let img = image::GrayImage::from_pixel(width, height, image::Luma([128]));
    let mut out = io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Jpeg)
        .map_err(|e| SynthError::Codec(CodecError::Encode(e.to_string())))?;
    Ok(out.into_inner())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), SynthError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), SynthError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Writes a sequence as `<dir>/00000.png, ...`, replacing stale frames.
pub fn write_sequence(dir: &Path, seq: &MaskSequence) -> Result<(), SynthError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    create_dir(dir)?;
    for (k, f) in seq.frames().iter().enumerate() {
        write(&dir.join(frame_file_name(k)), &encode_mask(f)?)?;
    }
    Ok(())
}

/// Initial scribbles: each object marked on the first frame it appears in,
/// as if the prediction were empty there.
pub fn initial_scribbles(gt: &MaskSequence) -> Result<ScribbleFile, SynthError> {
    let mut scribbles = Vec::new();
    for &id in gt.ids() {
        let k = gt
            .frames()
            .iter()
            .position(|f| f.area(id) > 0)
            .expect("id comes from some frame");
        let empty = MultiObjectMask::empty(gt.width(), gt.height())?;
        scribbles.push(robot_scribble(&empty, gt.frame(k), id, k)?);
    }
    Ok(ScribbleFile {
        sequence: gt.name().to_string(),
        scribbles,
    })
}

fn render_scene(scene: &SceneSpec, root: &Path, jpeg: &[u8]) -> Result<(), SynthError> {
    let gt = scene.render()?;
    write_sequence(&root.join(ANNOTATIONS_DIR).join(&scene.name), &gt)?;
    let img = root.join(IMAGES_DIR).join(&scene.name);
    if img.exists() {
        fs::remove_dir_all(&img).map_err(io_err(&img))?;
    }
    create_dir(&img)?;
    for k in 0..scene.frame_count {
        write(&img.join(format!("{k:05}.jpg")), jpeg)?;
    }
    let scr = root.join(crate::dataset::SCRIBBLES_DIR).join(&scene.name);
    create_dir(&scr)?;
    write(&scr.join(INITIAL_SCRIBBLE_FILE), initial_scribbles(&gt)?.to_json().as_bytes())
}

/// Writes every scene of `spec` under `out` and opens the resulting split.
pub fn render_dataset(spec: &SynthSpec, out: &Path) -> Result<DatasetIndex, SynthError> {
    let scenes = spec.scenes()?;
    let mut sizes: BTreeMap<(u32, u32), Vec<u8>> = BTreeMap::new();
    for s in &scenes {
        if let std::collections::btree_map::Entry::Vacant(e) = sizes.entry((s.width, s.height)) {
            e.insert(placeholder_jpeg(s.width, s.height)?);
        }
    }
    scenes
        .par_iter()
        .try_for_each(|s| render_scene(s, out, &sizes[&(s.width, s.height)]))?;
    let sets = out.join(IMAGE_SETS_DIR);
    create_dir(&sets)?;
    let list: String = scenes.iter().map(|s| format!("{}\n", s.name)).collect();
    write(&sets.join(format!("{}.txt", spec.split)), list.as_bytes())?;
    Ok(DatasetIndex::open(out, &spec.split)?)
}

/// Ways to corrupt a ground-truth sequence into a prediction.
#[derive(Clone, Debug, PartialEq)]
pub enum Perturbation {
    /// Move every object `d` pixels to the right.
    Shift(u32),
    /// Remove each object from all frames with probability `p`.
    Dropout(f64),
    /// Rename ids; unmapped ids keep theirs. Must stay injective.
    Relabel(BTreeMap<ObjectId, ObjectId>),
}

/// A seeded random relabeling of `ids` onto distinct ids in `1..=254`.
pub fn random_relabel(ids: &BTreeSet<ObjectId>, seed: u64) -> BTreeMap<ObjectId, ObjectId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<ObjectId> = (1..=DEFAULT_MAX_ID).collect();
    pool.shuffle(&mut rng);
    ids.iter().copied().zip(pool).collect()
}

pub fn perturb(gt: &MaskSequence, mode: &Perturbation, seed: u64) -> Result<MaskSequence, SynthError> {
    let (w, h) = (gt.width(), gt.height());
    let frames: Vec<MultiObjectMask> = match mode {
        Perturbation::Shift(d) => {
            let d = *d;
            let mut out = Vec::with_capacity(gt.len());
            for (k, f) in gt.frames().iter().enumerate() {
                let mut m = MultiObjectMask::empty(w, h)?;
                for y in 0..h {
                    for x in 0..w {
                        let id = f.get(x, y);
                        if id == 0 {
                            continue;
                        }
                        if x + d >= w {
                            return Err(SynthError::Range(format!(
                                "shift {d} pushes object {id} out of frame {k}"
                            )));
                        }
                        m.set(x + d, y, id);
                    }
                }
                out.push(m);
            }
            out
        }
        Perturbation::Dropout(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(SynthError::Range(format!("dropout probability {p}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dropped: BTreeSet<ObjectId> = gt.ids().iter().copied().filter(|_| rng.random_bool(*p)).collect();
            gt.frames()
                .iter()
                .map(|f| {
                    let labels = f.labels().iter().map(|&l| if dropped.contains(&l) { 0 } else { l }).collect();
                    MultiObjectMask::new(w, h, labels)
                })
                .collect::<Result<_, _>>()?
        }
        Perturbation::Relabel(map) => {
            let mut targets = BTreeSet::new();
            for &id in gt.ids() {
                let to = map.get(&id).copied().unwrap_or(id);
                if to == 0 || to > DEFAULT_MAX_ID || !targets.insert(to) {
                    return Err(SynthError::Range(format!("relabel of {id} to {to} is not injective onto 1..=254")));
                }
            }
            gt.frames()
                .iter()
                .map(|f| {
                    let labels = f
                        .labels()
                        .iter()
                        .map(|&l| if l == 0 { 0 } else { map.get(&l).copied().unwrap_or(l) })
                        .collect();
                    MultiObjectMask::new(w, h, labels)
                })
                .collect::<Result<_, _>>()?
        }
    };
    Ok(MaskSequence::new(gt.name(), SequenceRole::Results, frames)?)
}
