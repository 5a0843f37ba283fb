//! DOTA annotation parsing, tiling and cropping plans, patch merging, and
//! the submission and record file formats.
//!
//! Files use image space (x right, y down). Everything in memory uses the
//! y-up frame, so the flip `y_math = -y_image` happens only in the parse and
//! write functions of this module.
//!
//! # Record format
//!
//! A line-oriented text file, version 1:
//!
//! ```text
//! rotkit-records 1
//! classes plane ship ...
//! image <image_id> <source_id> <scale> <x_off> <y_off> <width> <height>
//! object <image_id> <x_off> <y_off> <x1> <y1> ... <x4> <y4> <class_id> <difficult>
//! ```
//!
//! Coordinates are image-space and patch-local, written in shortest
//! round-trip form, so a write/read cycle is lossless. Every `object` line
//! refers to a preceding `image` line and repeats its patch origin.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_convex, polygon_area, Point, Quad, ToQuad};
use crate::postprocess::{batched_rotated_nms, Detection};

pub const RECORD_MAGIC: &str = "rotkit-records";
pub const RECORD_VERSION: u32 = 1;

pub const DEFAULT_PATCH_SIZE: u32 = 600;
pub const DEFAULT_OVERLAP: u32 = 150;
pub const DEFAULT_KEEP_FRACTION: f64 = 0.5;

/// DOTA v1.0 categories in their customary order.
pub const DOTA_V1_CLASSES: [&str; 15] = [
    "plane",
    "baseball-diamond",
    "bridge",
    "ground-track-field",
    "small-vehicle",
    "large-vehicle",
    "ship",
    "tennis-court",
    "basketball-court",
    "storage-tank",
    "soccer-ball-field",
    "roundabout",
    "harbor",
    "swimming-pool",
    "helicopter",
];

pub fn dota_v1_classes() -> Vec<String> {
    DOTA_V1_CLASSES.iter().map(|s| s.to_string()).collect()
}

/// Id of `name` in `classes`, appending it when absent.
pub fn class_id(classes: &mut Vec<String>, name: &str) -> u32 {
    match classes.iter().position(|c| c == name) {
        Some(i) => i as u32,
        None => {
            classes.push(name.to_string());
            (classes.len() - 1) as u32
        }
    }
}

/// Image-space coordinates to a quad in the y-up frame.
pub fn quad_from_image_coords(c: [f64; 8]) -> Result<Quad> {
    Quad::new([
        Point::new(c[0], -c[1]),
        Point::new(c[2], -c[3]),
        Point::new(c[4], -c[5]),
        Point::new(c[6], -c[7]),
    ])
}

/// Image-space coordinates of `q`, in the quad's stored vertex order.
pub fn quad_to_image_coords(q: &Quad) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (i, p) in q.vertices().iter().enumerate() {
        out[2 * i] = p.x;
        out[2 * i + 1] = -p.y;
    }
    out
}

/// Image-space coordinates starting at the lexicographically smallest
/// image-space vertex, with positive image-space shoelace area (clockwise on
/// screen). This is the vertex order used in submission files.
pub fn quad_to_image_canonical(q: &Quad) -> [f64; 8] {
    image_canonical_order(q.vertices().map(|p| (p.x, -p.y)))
}

fn image_canonical_order(mut pts: [(f64, f64); 4]) -> [f64; 8] {
    let area2: f64 = (0..4)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % 4]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    if area2 < 0.0 {
        pts.reverse();
    }
    let start = (0..4)
        .min_by(|&i, &j| pts[i].0.total_cmp(&pts[j].0).then(pts[i].1.total_cmp(&pts[j].1)))
        .unwrap_or(0);
    pts.rotate_left(start);
    let mut out = [0.0; 8];
    for (i, (x, y)) in pts.into_iter().enumerate() {
        out[2 * i] = x;
        out[2 * i + 1] = y;
    }
    out
}

fn parse_f64(tok: &str, what: &str, source: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(source, line, format!("invalid {what} `{tok}`"))),
    }
}

fn parse_u32(tok: &str, what: &str, source: &str, line: usize) -> Result<u32> {
    tok.parse::<u32>()
        .map_err(|_| Error::parse(source, line, format!("invalid {what} `{tok}`")))
}

fn parse_flag(tok: &str, source: &str, line: usize) -> Result<bool> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::parse(source, line, format!("difficult flag must be 0 or 1, got `{tok}`"))),
    }
}

fn parse_coords(toks: &[&str], source: &str, line: usize) -> Result<[f64; 8]> {
    let mut c = [0.0; 8];
    for (slot, tok) in c.iter_mut().zip(toks) {
        *slot = parse_f64(tok, "coordinate", source, line)?;
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedObject {
    pub quad: Quad,
    pub class_name: String,
    pub difficult: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnotationFile {
    pub image_id: String,
    /// Leading `key:value` lines such as `imagesource:GoogleEarth`.
    pub metadata: Vec<String>,
    pub objects: Vec<AnnotatedObject>,
}

/// Parses a DOTA annotation document. Leading lines containing `:` are
/// metadata; every other non-blank line must be
/// `x1 y1 x2 y2 x3 y3 x4 y4 class difficult`.
pub fn parse_annotation(image_id: &str, text: &str) -> Result<AnnotationFile> {
    let mut ann = AnnotationFile {
        image_id: image_id.to_string(),
        ..Default::default()
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if ann.objects.is_empty() && trimmed.contains(':') {
            ann.metadata.push(trimmed.to_string());
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 10 {
            return Err(Error::parse(
                image_id,
                line,
                format!("expected 8 coordinates, class and difficult flag, found {} fields", toks.len()),
            ));
        }
        let coords = parse_coords(&toks[..8], image_id, line)?;
        ann.objects.push(AnnotatedObject {
            quad: quad_from_image_coords(coords).map_err(|e| Error::parse(image_id, line, e.to_string()))?,
            class_name: toks[8].to_string(),
            difficult: parse_flag(toks[9], image_id, line)?,
        });
    }
    Ok(ann)
}

/// Reads one annotation file; the image id is the file stem.
pub fn read_annotation_file(path: &Path) -> Result<AnnotationFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_annotation(&id, &text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            source_name: path.display().to_string(),
            line,
            message,
        },
        other => other,
    })
}

/// Every `*.txt` annotation in `dir`, sorted by file name.
pub fn read_annotation_dir(dir: &Path) -> Result<Vec<AnnotationFile>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "txt") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| read_annotation_file(p)).collect()
}

/// Smallest `(width, height)` in whole pixels containing every object.
pub fn annotation_extent(ann: &AnnotationFile) -> (u32, u32) {
    let (mut w, mut h) = (1.0f64, 1.0f64);
    for o in &ann.objects {
        for p in o.quad.vertices() {
            w = w.max(p.x.ceil());
            h = h.max((-p.y).ceil());
        }
    }
    (w as u32, h as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilePlan {
    pub width: u32,
    pub height: u32,
    pub patch_size: u32,
    pub overlap: u32,
    pub x_offsets: Vec<u32>,
    pub y_offsets: Vec<u32>,
}

impl TilePlan {
    /// Patch origins `(x_off, y_off)`, row by row.
    pub fn origins(&self) -> Vec<(u32, u32)> {
        self.y_offsets
            .iter()
            .flat_map(|&y| self.x_offsets.iter().map(move |&x| (x, y)))
            .collect()
    }
}

fn plan_axis(dim: u32, patch: u32, overlap: u32) -> Vec<u32> {
    if dim <= patch {
        return vec![0];
    }
    let stride = patch - overlap;
    let last = dim - patch;
    let mut offsets = Vec::new();
    let mut off = 0;
    loop {
        let o = off.min(last);
        if offsets.last() != Some(&o) {
            offsets.push(o);
        }
        if off >= last {
            break;
        }
        off += stride;
    }
    offsets
}

/// Sliding-window origins with stride `patch_size - overlap`; the last
/// window on each axis is shifted back to end at the image border.
pub fn plan_tiles(width: u32, height: u32, patch_size: u32, overlap: u32) -> Result<TilePlan> {
    if overlap >= patch_size {
        return Err(Error::Config(format!(
            "overlap {overlap} must be smaller than patch size {patch_size}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Range(format!("image size {width}x{height} is empty")));
    }
    Ok(TilePlan {
        width,
        height,
        patch_size,
        overlap,
        x_offsets: plan_axis(width, patch_size, overlap),
        y_offsets: plan_axis(height, patch_size, overlap),
    })
}

/// One plan per resize factor, for the image resized to
/// `round(dim * scale)`.
pub fn plan_multiscale(
    width: u32,
    height: u32,
    patch_size: u32,
    overlap: u32,
    scales: &[f64],
) -> Result<Vec<(f64, TilePlan)>> {
    scales
        .iter()
        .map(|&s| {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Range(format!("scale {s} must be positive")));
            }
            let dim = |d: u32| ((d as f64 * s).round() as u32).max(1);
            Ok((s, plan_tiles(dim(width), dim(height), patch_size, overlap)?))
        })
        .collect()
}

/// Scales all coordinates about the image origin.
pub fn scale_quad(q: &Quad, scale: f64) -> Result<Quad> {
    q.map_points(|p| p * scale)
}

/// `<source>__<scale>__<x>___<y>`, the usual DOTA patch naming.
pub fn patch_name(source_id: &str, scale: f64, x_off: u32, y_off: u32) -> String {
    format!("{source_id}__{scale}__{x_off}___{y_off}")
}

/// Inverse of [`patch_name`].
pub fn parse_patch_name(name: &str) -> Option<(String, f64, u32, u32)> {
    let (rest, y) = name.rsplit_once("___")?;
    let (rest, x) = rest.rsplit_once("__")?;
    let (source, scale) = rest.rsplit_once("__")?;
    Some((source.to_string(), scale.parse().ok()?, x.parse().ok()?, y.parse().ok()?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropOptions {
    /// Minimum `(object ∩ patch) / object` area ratio to keep an object.
    pub keep_fraction: f64,
    /// Clamp kept vertices to the patch instead of leaving them overhanging.
    pub clip: bool,
    /// Resize factor recorded in patch names.
    pub scale: f64,
}

impl Default for CropOptions {
    fn default() -> Self {
        Self {
            keep_fraction: DEFAULT_KEEP_FRACTION,
            clip: false,
            scale: 1.0,
        }
    }
}

impl CropOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::Range(format!("keep_fraction {} outside (0, 1]", self.keep_fraction)));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Range(format!("scale {} must be positive", self.scale)));
        }
        Ok(())
    }
}

/// Patch-local version of `q` if enough of it lies in the patch at
/// `(x_off, y_off)`.
fn crop_quad(q: &Quad, x_off: u32, y_off: u32, patch: u32, opts: &CropOptions) -> Option<Quad> {
    let (x0, x1) = (x_off as f64, (x_off + patch) as f64);
    let (y0, y1) = (-((y_off + patch) as f64), -(y_off as f64));
    let window = [
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ];
    let area = q.area();
    let kept = if area > 0.0 {
        let inside = polygon_area(&clip_convex(q.vertices(), &window)).max(0.0);
        inside / area >= opts.keep_fraction
    } else {
        q.vertices().iter().all(|p| p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1)
    };
    if !kept {
        return None;
    }
    let local = q.translate(-x0, -y1);
    if opts.clip {
        let p = patch as f64;
        local
            .map_points(|v| Point::new(v.x.clamp(0.0, p), v.y.clamp(-p, 0.0)))
            .ok()
    } else {
        Some(local)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchAnnotation {
    pub origin: (u32, u32),
    pub annotation: AnnotationFile,
}

/// Splits `ann` into the patches of `plan`. Patch ids follow
/// [`patch_name`].
pub fn crop_annotations(ann: &AnnotationFile, plan: &TilePlan, opts: &CropOptions) -> Result<Vec<PatchAnnotation>> {
    opts.validate()?;
    Ok(plan
        .origins()
        .into_iter()
        .map(|(x, y)| PatchAnnotation {
            origin: (x, y),
            annotation: AnnotationFile {
                image_id: patch_name(&ann.image_id, opts.scale, x, y),
                metadata: ann.metadata.clone(),
                objects: ann
                    .objects
                    .iter()
                    .filter_map(|o| {
                        crop_quad(&o.quad, x, y, plan.patch_size, opts).map(|quad| AnnotatedObject {
                            quad,
                            class_name: o.class_name.clone(),
                            difficult: o.difficult,
                        })
                    })
                    .collect(),
            },
        })
        .collect())
}

/// Moves patch detections back to image coordinates and removes the
/// duplicates produced by overlapping patches with per-image, per-class NMS.
/// Image ids written by [`patch_name`] are replaced by their source id.
pub fn merge_patch_detections(per_patch: &[((u32, u32), Vec<Detection>)], iou_threshold: f64) -> Result<Vec<Detection>> {
    let global: Vec<Detection> = per_patch
        .iter()
        .flat_map(|((x, y), dets)| {
            dets.iter().map(move |d| Detection {
                image_id: parse_patch_name(&d.image_id).map_or_else(|| d.image_id.clone(), |p| p.0),
                geometry: d.geometry.translate(*x as f64, -(*y as f64)),
                ..d.clone()
            })
        })
        .collect();
    batched_rotated_nms(&global, iou_threshold)
}

/// Maps a detection on a patch named by [`patch_name`] back to its source
/// image: undoes the patch offset and the resize factor. Detections whose
/// image id is not a patch name are returned unchanged.
pub fn restore_patch_detection(d: &Detection) -> Result<Detection> {
    let Some((source, scale, x, y)) = parse_patch_name(&d.image_id) else {
        return Ok(d.clone());
    };
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Range(format!("patch `{}` has scale {scale}", d.image_id)));
    }
    let quad = d.geometry.translate(x as f64, -(y as f64)).to_quad()?;
    Ok(Detection {
        image_id: source,
        geometry: scale_quad(&quad, 1.0 / scale)?.into(),
        ..d.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    /// Patch-local, y-up.
    pub quad: Quad,
    pub class_id: u32,
    pub difficult: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    /// Image the patch was cut from; equals `image_id` for whole images.
    pub source_id: String,
    pub scale: f64,
    pub x_off: u32,
    pub y_off: u32,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<ObjectRecord>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub classes: Vec<String>,
    pub images: Vec<ImageRecord>,
}

impl ImageRecord {
    /// Whole-image record for `ann`, registering its class names.
    pub fn from_annotation(ann: &AnnotationFile, width: u32, height: u32, classes: &mut Vec<String>) -> Self {
        Self {
            image_id: ann.image_id.clone(),
            source_id: ann.image_id.clone(),
            scale: 1.0,
            x_off: 0,
            y_off: 0,
            width,
            height,
            objects: ann
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    quad: o.quad,
                    class_id: class_id(classes, &o.class_name),
                    difficult: o.difficult,
                })
                .collect(),
        }
    }

    /// Patch records for every scale in `scales`. Objects are scaled
    /// exactly; pixel resampling is left to the caller.
    pub fn crop(&self, patch_size: u32, overlap: u32, scales: &[f64], keep_fraction: f64, clip: bool) -> Result<Vec<ImageRecord>> {
        let mut out = Vec::new();
        for (scale, plan) in plan_multiscale(self.width, self.height, patch_size, overlap, scales)? {
            let opts = CropOptions {
                keep_fraction,
                clip,
                scale,
            };
            opts.validate()?;
            let scaled = self
                .objects
                .iter()
                .map(|o| scale_quad(&o.quad, scale).map(|q| (q, o)))
                .collect::<Result<Vec<_>>>()?;
            for (x, y) in plan.origins() {
                out.push(ImageRecord {
                    image_id: patch_name(&self.source_id, scale, x, y),
                    source_id: self.source_id.clone(),
                    scale,
                    x_off: x,
                    y_off: y,
                    width: patch_size.min(plan.width - x),
                    height: patch_size.min(plan.height - y),
                    objects: scaled
                        .iter()
                        .filter_map(|(q, o)| {
                            crop_quad(q, x, y, patch_size, &opts).map(|quad| ObjectRecord {
                                quad,
                                class_id: o.class_id,
                                difficult: o.difficult,
                            })
                        })
                        .collect(),
                });
            }
        }
        Ok(out)
    }
}

fn check_token(kind: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        Err(Error::Config(format!("{kind} `{s}` must be a non-empty token without whitespace")))
    } else {
        Ok(())
    }
}

pub fn write_records(ds: &Dataset) -> Result<String> {
    let mut out = format!("{RECORD_MAGIC} {RECORD_VERSION}\nclasses");
    for c in &ds.classes {
        check_token("class name", c)?;
        out.push(' ');
        out.push_str(c);
    }
    out.push('\n');
    for img in &ds.images {
        check_token("image id", &img.image_id)?;
        check_token("source id", &img.source_id)?;
        let _ = writeln!(
            out,
            "image {} {} {} {} {} {} {}",
            img.image_id, img.source_id, img.scale, img.x_off, img.y_off, img.width, img.height
        );
        for o in &img.objects {
            let _ = write!(out, "object {} {} {}", img.image_id, img.x_off, img.y_off);
            for c in quad_to_image_coords(&o.quad) {
                let _ = write!(out, " {c}");
            }
            let _ = writeln!(out, " {} {}", o.class_id, u8::from(o.difficult));
        }
    }
    Ok(out)
}

pub fn read_records(source: &str, text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "missing record header"))?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [magic, version] if *magic == RECORD_MAGIC => {
            if *version != RECORD_VERSION.to_string() {
                return Err(Error::UnsupportedVersion {
                    found: version.to_string(),
                    expected: RECORD_VERSION,
                });
            }
        }
        _ => return Err(Error::parse(source, 1, format!("expected `{RECORD_MAGIC} {RECORD_VERSION}` header"))),
    }
    let mut ds = Dataset::default();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut saw_classes = false;
    for (line, text) in lines {
        if text.is_empty() {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks[0] {
            "classes" if !saw_classes => {
                saw_classes = true;
                ds.classes = toks[1..].iter().map(|s| s.to_string()).collect();
            }
            "image" => {
                if toks.len() != 8 {
                    return Err(Error::parse(source, line, "image record needs 7 fields"));
                }
                let scale = parse_f64(toks[3], "scale", source, line)?;
                if scale <= 0.0 {
                    return Err(Error::parse(source, line, "scale must be positive"));
                }
                if index.contains_key(toks[1]) {
                    return Err(Error::parse(source, line, format!("duplicate image `{}`", toks[1])));
                }
                index.insert(toks[1].to_string(), ds.images.len());
                ds.images.push(ImageRecord {
                    image_id: toks[1].to_string(),
                    source_id: toks[2].to_string(),
                    scale,
                    x_off: parse_u32(toks[4], "x offset", source, line)?,
                    y_off: parse_u32(toks[5], "y offset", source, line)?,
                    width: parse_u32(toks[6], "width", source, line)?,
                    height: parse_u32(toks[7], "height", source, line)?,
                    objects: vec![],
                });
            }
            "object" => {
                if toks.len() != 14 {
                    return Err(Error::parse(source, line, "object record needs 13 fields"));
                }
                let &i = index
                    .get(toks[1])
                    .ok_or_else(|| Error::parse(source, line, format!("object refers to unknown image `{}`", toks[1])))?;
                let img = &mut ds.images[i];
                let x_off = parse_u32(toks[2], "x offset", source, line)?;
                let y_off = parse_u32(toks[3], "y offset", source, line)?;
                if (x_off, y_off) != (img.x_off, img.y_off) {
                    return Err(Error::parse(source, line, "object origin disagrees with its image record"));
                }
                let coords = parse_coords(&toks[4..12], source, line)?;
                let class_id = parse_u32(toks[12], "class id", source, line)?;
                if class_id as usize >= ds.classes.len() {
                    return Err(Error::parse(source, line, format!("class id {class_id} not in class list")));
                }
                img.objects.push(ObjectRecord {
                    quad: quad_from_image_coords(coords).map_err(|e| Error::parse(source, line, e.to_string()))?,
                    class_id,
                    difficult: parse_flag(toks[13], source, line)?,
                });
            }
            other => return Err(Error::parse(source, line, format!("unknown record kind `{other}`"))),
        }
    }
    if !saw_classes {
        return Err(Error::parse(source, 2, "missing `classes` line"));
    }
    Ok(ds)
}

pub fn read_records_file(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_records(&path.display().to_string(), &text)
}

pub fn write_records_file(path: &Path, ds: &Dataset) -> Result<()> {
    fs::write(path, write_records(ds)?).map_err(|e| Error::io(path, e))
}

pub fn submission_file_name(class_name: &str) -> String {
    format!("Task1_{class_name}.txt")
}

/// `v` rounded to one decimal the way it is printed, without negative zero.
fn round_coord(v: f64) -> f64 {
    let r: f64 = format!("{v:.1}").parse().expect("formatted float parses");
    r + 0.0
}

/// Submission coordinates: rounded to 0.1 px first, then put in image
/// canonical order, so that rewriting a parsed file reproduces it.
fn submission_coords(q: &Quad) -> [f64; 8] {
    image_canonical_order(q.vertices().map(|p| (round_coord(p.x), round_coord(-p.y))))
}

/// One `(file name, contents)` document per class, in class order, empty
/// classes included. Lines are sorted by image id, then score descending,
/// then input index.
pub fn write_submission(dets: &[Detection], class_names: &[String]) -> Result<Vec<(String, String)>> {
    let mut per_class: Vec<Vec<usize>> = vec![vec![]; class_names.len()];
    for (i, d) in dets.iter().enumerate() {
        d.validate()?;
        check_token("image id", &d.image_id)?;
        per_class
            .get_mut(d.class_id as usize)
            .ok_or_else(|| Error::Config(format!("class id {} has no name", d.class_id)))?
            .push(i);
    }
    class_names
        .iter()
        .zip(per_class)
        .map(|(name, mut idx)| {
            check_token("class name", name)?;
            idx.sort_by(|&a, &b| {
                dets[a]
                    .image_id
                    .cmp(&dets[b].image_id)
                    .then(dets[b].score.total_cmp(&dets[a].score))
                    .then(a.cmp(&b))
            });
            let mut doc = String::new();
            for i in idx {
                let d = &dets[i];
                let _ = write!(doc, "{} {:.4}", d.image_id, d.score);
                for c in submission_coords(&d.geometry.to_quad()?) {
                    let _ = write!(doc, " {c:.1}");
                }
                doc.push('\n');
            }
            Ok((submission_file_name(name), doc))
        })
        .collect()
}

/// Parses submission documents, taking each class from its
/// `Task1_<class>.txt` name and registering it in `classes`.
pub fn read_submission(docs: &[(String, String)], classes: &mut Vec<String>) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (name, text) in docs {
        let class = Path::new(name)
            .file_name()
            .and_then(|f| f.to_str())
            .and_then(|f| f.strip_prefix("Task1_"))
            .and_then(|f| f.strip_suffix(".txt"))
            .filter(|c| !c.is_empty())
            .ok_or_else(|| Error::parse(name, 0, "submission file must be named Task1_<class>.txt"))?;
        let cid = class_id(classes, class);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() != 10 {
                return Err(Error::parse(
                    name,
                    line,
                    format!("expected image id, score and 8 coordinates, found {} fields", toks.len()),
                ));
            }
            let score = parse_f64(toks[1], "score", name, line)?;
            let coords = parse_coords(&toks[2..], name, line)?;
            let det = quad_from_image_coords(coords)
                .and_then(|q| Detection::new(toks[0], q, cid, score))
                .map_err(|e| Error::parse(name, line, e.to_string()))?;
            out.push(det);
        }
    }
    Ok(out)
}

/// Writes each document into `dir`, creating it if needed.
pub fn write_documents(dir: &Path, docs: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in docs {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// All `Task1_*.txt` documents in `dir`, sorted by name.
pub fn read_submission_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut docs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|f| f.to_str()).unwrap_or_default().to_string();
        if path.is_file() && name.starts_with("Task1_") && name.ends_with(".txt") {
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            docs.push((name, text));
        }
    }
    docs.sort();
    Ok(docs)
}
