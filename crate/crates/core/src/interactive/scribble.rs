//! Scribbles and the simulated annotator that draws them.
//!
//! The robot picks the largest 4-connected error component of an object,
//! shrinks it by one pixel when that leaves anything, thins it to a
//! skeleton, follows the longest skeleton path and simplifies that path
//! into strokes whose segments stay inside the component.

use std::collections::VecDeque;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{BinaryMask, MaskError, MultiObjectMask, ObjectId};

/// Object id used for background-correction strokes.
pub const BACKGROUND: ObjectId = 0;

/// Points per stroke.
pub const MAX_STROKE_POINTS: usize = 50;

/// File name of the initial scribbles inside `Scribbles/<seq>/`.
pub const INITIAL_SCRIBBLE_FILE: &str = "001.json";

/// One object's strokes on one frame, in normalized `[0, 1]²` coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scribble {
    pub frame: usize,
    pub object_id: ObjectId,
    pub paths: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Error)]
pub enum ScribbleError {
    #[error(transparent)]
    Dimensions(#[from] MaskError),
    #[error("stroke {stroke} of object {object_id} has {points} point(s), need at least 2")]
    ShortStroke {
        object_id: ObjectId,
        stroke: usize,
        points: usize,
    },
    #[error("point ({x}, {y}) of object {object_id} is outside the unit square")]
    OutOfBounds { object_id: ObjectId, x: f64, y: f64 },
    #[error("object {0} is not annotated in this sequence")]
    UnknownObject(ObjectId),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Scribble {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Checks stroke length, coordinates and (unless background) the id.
    pub fn validate(&self, ids: &std::collections::BTreeSet<ObjectId>) -> Result<(), ScribbleError> {
        if self.object_id != BACKGROUND && !ids.contains(&self.object_id) {
            return Err(ScribbleError::UnknownObject(self.object_id));
        }
        for (stroke, path) in self.paths.iter().enumerate() {
            if path.len() < 2 {
                return Err(ScribbleError::ShortStroke {
                    object_id: self.object_id,
                    stroke,
                    points: path.len(),
                });
            }
            if let Some(&[x, y]) = path
                .iter()
                .find(|[x, y]| !(0.0..=1.0).contains(x) || !(0.0..=1.0).contains(y))
            {
                return Err(ScribbleError::OutOfBounds {
                    object_id: self.object_id,
                    x,
                    y,
                });
            }
        }
        Ok(())
    }

    /// Pixel under a normalized point.
    pub fn rasterize(point: [f64; 2], width: u32, height: u32) -> (u32, u32) {
        let x = ((point[0] * width as f64).floor() as i64).clamp(0, width as i64 - 1);
        let y = ((point[1] * height as f64).floor() as i64).clamp(0, height as i64 - 1);
        (x as u32, y as u32)
    }
}

/// Scribble set stored as `Scribbles/<seq>/001.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScribbleFile {
    pub sequence: String,
    pub scribbles: Vec<Scribble>,
}

impl ScribbleFile {
    pub fn load(path: &Path) -> Result<Self, ScribbleError> {
        let text = fs::read_to_string(path).map_err(|source| ScribbleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ScribbleError::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }
}

/// What a correction stroke is fixing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Object pixels the prediction missed; stroke labeled with the object.
    Missed,
    /// Pixels wrongly given to the object; stroke labeled as background.
    Spurious,
}

/// The region the robot will annotate for one object: false negatives if
/// there are any, else false positives. `None` when prediction is exact.
pub fn error_region(
    pred: &MultiObjectMask,
    gt: &MultiObjectMask,
    object_id: ObjectId,
) -> Result<Option<(ErrorKind, BinaryMask)>, MaskError> {
    pred.check_dimensions(gt)?;
    let (w, h) = (gt.width(), gt.height());
    let missed = BinaryMask::from_fn(w, h, |x, y| gt.get(x, y) == object_id && pred.get(x, y) != object_id);
    if !missed.is_empty() {
        return Ok(Some((ErrorKind::Missed, missed)));
    }
    let spurious = BinaryMask::from_fn(w, h, |x, y| pred.get(x, y) == object_id && gt.get(x, y) != object_id);
    if !spurious.is_empty() {
        return Ok(Some((ErrorKind::Spurious, spurious)));
    }
    Ok(None)
}

/// Simulated annotator: one scribble correcting `object_id` on a frame.
/// Empty when the prediction is exact for that object.
pub fn robot_scribble(
    pred: &MultiObjectMask,
    gt: &MultiObjectMask,
    object_id: ObjectId,
    frame: usize,
) -> Result<Scribble, MaskError> {
    let Some((kind, region)) = error_region(pred, gt, object_id)? else {
        return Ok(Scribble {
            frame,
            object_id,
            paths: vec![],
        });
    };
    let component = largest_component(&region);
    let (w, h) = (component.width(), component.height());
    let paths = stroke_pixels(&component)
        .into_iter()
        .map(|stroke| {
            stroke
                .into_iter()
                .map(|(x, y)| [(x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64])
                .collect()
        })
        .collect();
    Ok(Scribble {
        frame,
        object_id: match kind {
            ErrorKind::Missed => object_id,
            ErrorKind::Spurious => BACKGROUND,
        },
        paths,
    })
}

/// Largest 4-connected component; ties go to the one whose first pixel in
/// row-major order comes first.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let data = mask.data();
    let mut label = vec![0u32; w * h];
    let mut best: (usize, u32) = (0, 0);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !data[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if data[j] && label[j] == 0 {
                    label[j] = next;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if size > best.0 {
            best = (size, next);
        }
    }
    let keep = best.1;
    BinaryMask::new(mask.width(), mask.height(), label.iter().map(|&l| l != 0 && l == keep).collect())
        .expect("same size")
}

/// 4-neighborhood erosion; pixels outside the image count as unset.
fn erode(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    BinaryMask::from_fn(w, h, |x, y| {
        mask.get(x, y)
            && x > 0
            && y > 0
            && x + 1 < w
            && y + 1 < h
            && mask.get(x - 1, y)
            && mask.get(x + 1, y)
            && mask.get(x, y - 1)
            && mask.get(x, y + 1)
    })
}

/// Zhang-Suen thinning.
fn thin(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut img: Vec<bool> = mask.data().to_vec();
    let at = |img: &[bool], x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && img[(y * w + x) as usize];
    loop {
        let mut changed = false;
        for pass in 0..2 {
            let mut remove = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if !at(&img, x, y) {
                        continue;
                    }
                    // P2..P9 clockwise from north
                    let n = [
                        at(&img, x, y - 1),
                        at(&img, x + 1, y - 1),
                        at(&img, x + 1, y),
                        at(&img, x + 1, y + 1),
                        at(&img, x, y + 1),
                        at(&img, x - 1, y + 1),
                        at(&img, x - 1, y),
                        at(&img, x - 1, y - 1),
                    ];
                    let b = n.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                    let ok = if pass == 0 {
                        !(p2 && p4 && p6) && !(p4 && p6 && p8)
                    } else {
                        !(p2 && p4 && p8) && !(p2 && p6 && p8)
                    };
                    if ok {
                        remove.push((y * w + x) as usize);
                    }
                }
            }
            changed |= !remove.is_empty();
            for i in remove {
                img[i] = false;
            }
        }
        if !changed {
            break;
        }
    }
    BinaryMask::new(mask.width(), mask.height(), img).expect("same size")
}

/// BFS over 8-connected set pixels; returns (farthest pixel, parent map).
fn farthest(mask: &BinaryMask, start: usize) -> (usize, Vec<usize>) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let data = mask.data();
    let mut parent = vec![usize::MAX; data.len()];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(i) = queue.pop_front() {
        last = i;
        let (x, y) = (i as i64 % w, i as i64 / w);
        for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0), (1, -1), (1, 1), (-1, 1), (-1, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let j = (ny * w + nx) as usize;
            if data[j] && parent[j] == usize::MAX {
                parent[j] = i;
                queue.push_back(j);
            }
        }
    }
    (last, parent)
}

/// Longest path through the skeleton, approximated by a double BFS.
fn longest_path(skeleton: &BinaryMask) -> Vec<usize> {
    let Some(first) = skeleton.data().iter().position(|&b| b) else {
        return vec![];
    };
    let (a, _) = farthest(skeleton, first);
    let (b, parent) = farthest(skeleton, a);
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Pixels on the digital line between two points (Bresenham).
fn line(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = vec![(x, y)];
    while (x, y) != b {
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
        out.push((x, y));
    }
    out
}

/// Farthest look-ahead when simplifying a path.
const SIMPLIFY_WINDOW: usize = 256;

/// Stroke polylines (pixel coordinates) covering one component.
fn stroke_pixels(component: &BinaryMask) -> Vec<Vec<(u32, u32)>> {
    if component.is_empty() {
        return vec![];
    }
    let w = component.width() as usize;
    let inner = erode(component);
    let base = if inner.is_empty() { component.clone() } else { inner };
    let mut path = longest_path(&thin(&base));
    if path.is_empty() {
        path = longest_path(&base);
    }
    let xy = |i: usize| ((i % w) as i64, (i / w) as i64);
    let inside = |p: (i64, i64)| component.get(p.0 as u32, p.1 as u32);

    // keep the fewest vertices whose segments stay in the component
    let mut kept = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let limit = (i + SIMPLIFY_WINDOW).min(path.len() - 1);
        let j = (i + 1..=limit)
            .rev()
            .find(|&j| line(xy(path[i]), xy(path[j])).into_iter().all(inside))
            .unwrap_or(i + 1);
        kept.push(path[j]);
        i = j;
    }
    if kept.len() == 1 {
        kept.push(kept[0]);
    }

    let pts: Vec<(u32, u32)> = kept.iter().map(|&i| (xy(i).0 as u32, xy(i).1 as u32)).collect();
    let mut strokes = Vec::new();
    let mut start = 0;
    while start + 1 < pts.len() {
        let end = (start + MAX_STROKE_POINTS).min(pts.len());
        strokes.push(pts[start..end].to_vec());
        start = end - 1;
    }
    strokes
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect(w: u32, h: u32, id: u8, x0: u32, y0: u32, x1: u32, y1: u32) -> MultiObjectMask {
        let mut m = MultiObjectMask::empty(w, h).unwrap();
        for y in y0..y1 {
            for x in x0..x1 {
                m.set(x, y, id);
            }
        }
        m
    }

    fn assert_inside(s: &Scribble, region: &BinaryMask) {
        assert!(!s.paths.is_empty());
        for path in &s.paths {
            assert!(path.len() >= 2 && path.len() <= MAX_STROKE_POINTS);
            for &p in path {
                let (x, y) = Scribble::rasterize(p, region.width(), region.height());
                assert!(region.get(x, y), "point {p:?} -> ({x},{y}) outside region");
            }
            for pair in path.windows(2) {
                let a = Scribble::rasterize(pair[0], region.width(), region.height());
                let b = Scribble::rasterize(pair[1], region.width(), region.height());
                for (x, y) in line((a.0 as i64, a.1 as i64), (b.0 as i64, b.1 as i64)) {
                    assert!(region.get(x as u32, y as u32));
                }
            }
        }
    }

    #[test]
    fn missing_right_half() {
        let gt = rect(40, 30, 1, 10, 5, 30, 25);
        let pred = rect(40, 30, 1, 10, 5, 20, 25);
        let s = robot_scribble(&pred, &gt, 1, 3).unwrap();
        assert_eq!((s.frame, s.object_id), (3, 1));
        let missing = BinaryMask::from_fn(40, 30, |x, y| (20..30).contains(&x) && (5..25).contains(&y));
        assert_inside(&s, &missing);
    }

    #[test]
    fn perfect_prediction_is_empty() {
        let gt = rect(20, 20, 2, 3, 3, 12, 12);
        let s = robot_scribble(&gt, &gt, 2, 0).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn hallucinated_blob_gets_background_stroke() {
        let gt = rect(40, 40, 1, 2, 2, 10, 10);
        let mut pred = gt.clone();
        for y in 20..30 {
            for x in 25..35 {
                pred.set(x, y, 1);
            }
        }
        let s = robot_scribble(&pred, &gt, 1, 0).unwrap();
        assert_eq!(s.object_id, BACKGROUND);
        let blob = BinaryMask::from_fn(40, 40, |x, y| (25..35).contains(&x) && (20..30).contains(&y));
        assert_inside(&s, &blob);
    }

    #[test]
    fn largest_component_wins() {
        let mut gt = rect(30, 10, 1, 0, 0, 3, 3);
        for y in 5..10 {
            for x in 10..30 {
                gt.set(x, y, 1);
            }
        }
        let pred = MultiObjectMask::empty(30, 10).unwrap();
        let s = robot_scribble(&pred, &gt, 1, 0).unwrap();
        let big = BinaryMask::from_fn(30, 10, |x, y| x >= 10 && y >= 5);
        assert_inside(&s, &big);
    }

    #[test]
    fn single_pixel_error() {
        let gt = rect(5, 5, 1, 2, 2, 3, 3);
        let pred = MultiObjectMask::empty(5, 5).unwrap();
        let s = robot_scribble(&pred, &gt, 1, 0).unwrap();
        assert_eq!(s.paths.len(), 1);
        assert_eq!(s.paths[0].len(), 2);
        assert_eq!(Scribble::rasterize(s.paths[0][0], 5, 5), (2, 2));
    }

    #[test]
    fn spiral_region_stays_inside() {
        // U shape: segments must not cut across the gap
        let mut gt = MultiObjectMask::empty(30, 30).unwrap();
        for y in 2..28 {
            for x in 2..6 {
                gt.set(x, y, 1);
            }
            for x in 24..28 {
                gt.set(x, y, 1);
            }
        }
        for y in 24..28 {
            for x in 2..28 {
                gt.set(x, y, 1);
            }
        }
        let pred = MultiObjectMask::empty(30, 30).unwrap();
        let s = robot_scribble(&pred, &gt, 1, 0).unwrap();
        assert_inside(&s, &gt.binary(1));
    }

    #[test]
    fn long_paths_split_into_strokes() {
        // one-pixel serpentine: every turn needs its own vertex
        let mut gt = MultiObjectMask::empty(120, 120).unwrap();
        for r in 0..60u32 {
            for x in 0..120 {
                gt.set(x, 2 * r, 1);
            }
            if r < 59 {
                gt.set(if r % 2 == 0 { 119 } else { 0 }, 2 * r + 1, 1);
            }
        }
        let pred = MultiObjectMask::empty(120, 120).unwrap();
        let s = robot_scribble(&pred, &gt, 1, 0).unwrap();
        assert!(s.paths.len() > 1);
        let region = largest_component(&gt.binary(1));
        assert_inside(&s, &region);
    }

    #[test]
    fn scribble_validation() {
        let ids = [1u8, 2].into_iter().collect();
        let ok = Scribble { frame: 0, object_id: 1, paths: vec![vec![[0.1, 0.1], [0.2, 0.2]]] };
        assert!(ok.validate(&ids).is_ok());
        let bg = Scribble { object_id: BACKGROUND, ..ok.clone() };
        assert!(bg.validate(&ids).is_ok());
        let short = Scribble { paths: vec![vec![[0.1, 0.1]]], ..ok.clone() };
        assert!(matches!(short.validate(&ids), Err(ScribbleError::ShortStroke { .. })));
        let out = Scribble { paths: vec![vec![[0.1, 0.1], [1.2, 0.0]]], ..ok.clone() };
        assert!(matches!(out.validate(&ids), Err(ScribbleError::OutOfBounds { .. })));
        let unknown = Scribble { object_id: 9, ..ok };
        assert!(matches!(unknown.validate(&ids), Err(ScribbleError::UnknownObject(9))));
    }

    #[test]
    fn wire_shape() {
        let s = Scribble { frame: 4, object_id: 2, paths: vec![vec![[0.25, 0.5], [0.75, 0.5]]] };
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v, serde_json::json!({"frame": 4, "object_id": 2, "paths": [[[0.25, 0.5], [0.75, 0.5]]]}));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn points_lie_in_error_region(
            gt_cells in proptest::collection::vec(any::<bool>(), 64),
            pred_cells in proptest::collection::vec(any::<bool>(), 64),
        ) {
            // 8x8 grid of 4x4 cells
            let build = |cells: &[bool]| {
                let mut m = MultiObjectMask::empty(32, 32).unwrap();
                for y in 0..32u32 {
                    for x in 0..32u32 {
                        if cells[(y / 4 * 8 + x / 4) as usize] {
                            m.set(x, y, 1);
                        }
                    }
                }
                m
            };
            let (gt, pred) = (build(&gt_cells), build(&pred_cells));
            let s = robot_scribble(&pred, &gt, 1, 0).unwrap();
            match error_region(&pred, &gt, 1).unwrap() {
                None => prop_assert!(s.is_empty()),
                Some((kind, region)) => {
                    let expect = if kind == ErrorKind::Missed { 1 } else { BACKGROUND };
                    prop_assert_eq!(s.object_id, expect);
                    prop_assert!(!s.paths.is_empty());
                    for path in &s.paths {
                        prop_assert!(path.len() >= 2);
                        for &p in path {
                            let (x, y) = Scribble::rasterize(p, 32, 32);
                            prop_assert!(region.get(x, y));
                        }
                    }
                }
            }
        }
    }
}
