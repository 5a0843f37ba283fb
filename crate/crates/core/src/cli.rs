//! The `rotkit` command line.
//!
//! Exit status is 0 on success, 2 for usage errors (bad flags, bad
//! configuration) and 1 for data errors. Results go to stdout, diagnostics
//! to stderr.
//!
//! Any flag may also come from a `--config` file of `key = value` lines.
//! A key is either `<subcommand>.<flag>` or a bare `<flag>` that applies to
//! every subcommand accepting it; `#` starts a comment. Flags given on the
//! command line win over the file.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dota_io::{self, Dataset, ImageRecord};
use crate::error::{Error, Result};
use crate::evaluation::{self, ApMode, EvalOptions, GroundTruth};
use crate::geometry::{self, canonicalize, iou_matrix, Convention, Quad, RBox, Shape, ToQuad};
use crate::postprocess::{self, Detection};

#[derive(Debug, Parser)]
#[command(name = "rotkit", version, about = "Rotated bounding box toolkit")]
struct Cli {
    /// Key/value configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoxMode {
    /// Keep the annotated quadrilateral.
    Quad,
    /// Replace each quad by its minimum-area rectangle (OpenCV angles).
    Oc,
    /// Replace each quad by its minimum-area rectangle (long-edge angles).
    Le,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    All,
    Eleven,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// IoU of two boxes given as `cx,cy,w,h,theta` or 8 quad coordinates.
    Iou {
        #[arg(long, value_parser = parse_box_values, allow_hyphen_values = true)]
        a: BoxValues,
        #[arg(long, value_parser = parse_box_values, allow_hyphen_values = true)]
        b: BoxValues,
        /// Angle convention of 5-value boxes.
        #[arg(long, default_value = "le", value_parser = parse_convention)]
        convention: Convention,
    },
    /// Convert a directory of DOTA annotations into a record file.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "quad")]
        boxes: BoxMode,
        /// Image width for every file; defaults to each file's object extent.
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
        /// `dota-v1`, `none`, or a comma-separated initial class list.
        #[arg(long, default_value = "dota-v1")]
        classes: String,
    },
    /// Cut records into patch records; prints the patch plan.
    Crop {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = dota_io::DEFAULT_PATCH_SIZE)]
        patch_size: u32,
        #[arg(long, default_value_t = dota_io::DEFAULT_OVERLAP)]
        overlap: u32,
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        scales: Vec<f64>,
        #[arg(long, default_value_t = dota_io::DEFAULT_KEEP_FRACTION)]
        keep_fraction: f64,
        /// Clamp kept objects to the patch.
        #[arg(long)]
        clip: bool,
    },
    /// Rotated NMS over a directory of submission files.
    Nms {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        iou_threshold: f64,
        #[arg(long, default_value_t = 0.0)]
        score_threshold: f64,
        /// Map patch-named detections back to their source images first.
        #[arg(long)]
        merge_patches: bool,
    },
    /// Score submission files against DOTA ground truth.
    Eval {
        /// Directory of Task1_<class>.txt files.
        #[arg(long)]
        det: PathBuf,
        /// Directory of DOTA annotation files.
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_enum, default_value = "eleven")]
        mode: ModeArg,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95")]
        thresholds: Vec<f64>,
        /// Also report precision/recall/F1 for detections at or above this score.
        #[arg(long)]
        f_score: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        f_iou: f64,
        /// Write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Evaluate on a single thread.
        #[arg(long)]
        serial: bool,
    },
    /// Draw boxes from a record file or a submission directory as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Canvas size for submission input; defaults to the detection extent.
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
    },
    /// Throughput of iou_matrix and rotated_nms on random boxes.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        iou_threshold: f64,
        /// Largest n for which the O(n²) reference NMS is run and compared.
        #[arg(long, default_value_t = 2000)]
        verify_limit: usize,
    },
}

fn parse_convention(s: &str) -> std::result::Result<Convention, String> {
    s.parse::<Convention>().map_err(|e| e.to_string())
}

/// Comma-separated `cx,cy,w,h,theta` or `x1,y1,...,x4,y4`.
#[derive(Debug, Clone)]
struct BoxValues(Vec<f64>);

fn parse_box_values(s: &str) -> std::result::Result<BoxValues, String> {
    let values = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        })
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    match values.len() {
        5 if values[2] > 0.0 && values[3] > 0.0 => Ok(BoxValues(values)),
        5 => Err("width and height must be positive".into()),
        8 => Ok(BoxValues(values)),
        n => Err(format!("expected 5 or 8 comma-separated values, got {n}")),
    }
}

fn shape_from_values(v: &[f64], convention: Convention) -> Result<Shape> {
    if v.len() == 5 {
        Ok(canonicalize(&RBox {
            cx: v[0],
            cy: v[1],
            w: v[2],
            h: v[3],
            theta: v[4],
            convention,
        })?
        .into())
    } else {
        let mut c = [0.0; 8];
        c.copy_from_slice(v);
        Ok(Quad::from_coords(c)?.into())
    }
}

/// `key = value` pairs from a configuration file.
fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(&path.display().to_string(), i + 1, "expected `key = value`"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Adds configuration values as flags after the subcommand name unless the
/// flag is already present.
fn apply_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut sub_pos = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if sub_pos.is_none() && !a.starts_with('-') {
            sub_pos = Some(i);
        }
        i += 1;
    }
    let (Some(config), Some(sub_pos)) = (config, sub_pos) else {
        return Ok(args);
    };
    let cmd = Cli::command();
    let sub_name = args[sub_pos].clone();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (key, value) in read_config(Path::new(&config))? {
        let flag = match key.split_once('.') {
            Some((scope, flag)) if scope == sub_name => flag.replace('_', "-"),
            Some(_) => continue,
            None => key.replace('_', "-"),
        };
        let arg = sub.get_arguments().find(|a| a.get_long() == Some(flag.as_str()));
        let Some(arg) = arg else {
            // unscoped keys may belong to another subcommand
            let known = cmd
                .get_subcommands()
                .any(|s| s.get_arguments().any(|a| a.get_long() == Some(flag.as_str())));
            if key.contains('.') || !known {
                return Err(Error::Config(format!("`{sub_name}` has no flag `--{flag}` (config key `{key}`)")));
            }
            continue;
        };
        let long = format!("--{flag}");
        let given = args[sub_pos + 1..]
            .iter()
            .any(|a| *a == long || a.starts_with(&format!("{long}=")));
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(format!("{long}={value}"));
        } else {
            match value.as_str() {
                "true" | "1" | "yes" => injected.push(long),
                "false" | "0" | "no" => {}
                other => return Err(Error::Config(format!("`{key}` expects true or false, got `{other}`"))),
            }
        }
    }
    let mut out = args;
    let tail = out.split_off(sub_pos + 1);
    out.extend(injected);
    out.extend(tail);
    Ok(out)
}

/// Runs the command line with `args` (including the program name).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|s| s.into().to_string_lossy().into_owned())
        .collect();
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Iou { a, b, convention } => {
            let a = shape_from_values(&a.0, convention)?;
            let b = shape_from_values(&b.0, convention)?;
            emit(out, &format!("{:.6}\n", geometry::rotated_iou(&a, &b)?))
        }
        Command::Convert {
            input,
            output,
            boxes,
            width,
            height,
            classes,
        } => convert(&input, &output, boxes, width.zip(height), &classes, err),
        Command::Crop {
            input,
            output,
            patch_size,
            overlap,
            scales,
            keep_fraction,
            clip,
        } => {
            let ds = dota_io::read_records_file(&input)?;
            let mut images = Vec::new();
            let mut manifest = String::new();
            for img in &ds.images {
                for (scale, plan) in dota_io::plan_multiscale(img.width, img.height, patch_size, overlap, &scales)? {
                    let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                    let _ = writeln!(
                        manifest,
                        "{} scale={} size={}x{} x_offsets={} y_offsets={} patches={}",
                        img.image_id,
                        scale,
                        plan.width,
                        plan.height,
                        join(&plan.x_offsets),
                        join(&plan.y_offsets),
                        plan.origins().len()
                    );
                }
                images.extend(img.crop(patch_size, overlap, &scales, keep_fraction, clip)?);
            }
            dota_io::write_records_file(
                &output,
                &Dataset {
                    classes: ds.classes,
                    images,
                },
            )?;
            emit(out, &manifest)
        }
        Command::Nms {
            input,
            output,
            iou_threshold,
            score_threshold,
            merge_patches,
        } => {
            let docs = dota_io::read_submission_dir(&input)?;
            let mut classes = Vec::new();
            let mut dets = dota_io::read_submission(&docs, &mut classes)?;
            if merge_patches {
                dets = dets
                    .iter()
                    .map(dota_io::restore_patch_detection)
                    .collect::<Result<_>>()?;
            }
            let kept = postprocess::batched_rotated_nms(&postprocess::score_filter(&dets, score_threshold), iou_threshold)?;
            dota_io::write_documents(&output, &dota_io::write_submission(&kept, &classes)?)?;
            emit(out, &format!("kept {} of {} detections\n", kept.len(), dets.len()))
        }
        Command::Eval {
            det,
            gt,
            mode,
            thresholds,
            f_score,
            f_iou,
            json,
            serial,
        } => {
            let mut classes = dota_io::dota_v1_classes();
            let mut gts = Vec::new();
            for ann in dota_io::read_annotation_dir(&gt)? {
                for o in ann.objects {
                    gts.push(GroundTruth {
                        image_id: ann.image_id.clone(),
                        geometry: o.quad,
                        class_id: dota_io::class_id(&mut classes, &o.class_name),
                        difficult: o.difficult,
                    });
                }
            }
            let dets = dota_io::read_submission(&dota_io::read_submission_dir(&det)?, &mut classes)?;
            let opts = EvalOptions {
                thresholds,
                mode: match mode {
                    ModeArg::All => ApMode::AllPoint,
                    ModeArg::Eleven => ApMode::ElevenPoint,
                },
                parallel: !serial,
                f_measure: f_score.map(|s| (f_iou, s)),
            };
            let report = evaluation::evaluate_with(&dets, &gts, &opts)?;
            if let Some(path) = json {
                std::fs::write(&path, report.to_json()).map_err(|e| Error::io(&path, e))?;
            }
            emit(out, &report.to_text(&classes))
        }
        Command::Render {
            input,
            output,
            width,
            height,
        } => render(&input, &output, width, height, out),
        Command::Bench {
            sizes,
            seed,
            iou_threshold,
            verify_limit,
        } => bench(&sizes, seed, iou_threshold, verify_limit, out),
    }
}

fn convert(
    input: &Path,
    output: &Path,
    boxes: BoxMode,
    size: Option<(u32, u32)>,
    class_spec: &str,
    err: &mut dyn Write,
) -> Result<()> {
    let mut classes = match class_spec {
        "dota-v1" => dota_io::dota_v1_classes(),
        "none" | "" => vec![],
        list => list.split(',').map(|s| s.trim().to_string()).collect(),
    };
    let anns = dota_io::read_annotation_dir(input)?;
    if anns.is_empty() {
        let _ = writeln!(err, "warning: no annotation files in {}", input.display());
    }
    let mut images = Vec::with_capacity(anns.len());
    for mut ann in anns {
        if let Some(conv) = match boxes {
            BoxMode::Quad => None,
            BoxMode::Oc => Some(Convention::Oc),
            BoxMode::Le => Some(Convention::Le),
        } {
            for o in &mut ann.objects {
                let rect = geometry::quad_to_rbox(&o.quad, conv)
                    .map_err(|e| Error::InvalidPolygon(format!("{}: {e}", ann.image_id)))?;
                o.quad = geometry::rbox_to_quad(&rect);
            }
        }
        let (w, h) = size.unwrap_or_else(|| dota_io::annotation_extent(&ann));
        images.push(ImageRecord::from_annotation(&ann, w, h, &mut classes));
    }
    dota_io::write_records_file(output, &Dataset { classes, images })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG overlay of labelled quads on a `width` x `height` frame. Vertices
/// outside the frame are clamped to it.
pub fn render_svg(width: u32, height: u32, items: &[(Quad, String)]) -> String {
    let (w, h) = (width as f64, height as f64);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"none\" stroke=\"black\"/>\n"
    );
    for (quad, label) in items {
        let c = dota_io::quad_to_image_canonical(quad);
        let pts: Vec<(f64, f64)> = c.chunks(2).map(|p| (p[0].clamp(0.0, w), p[1].clamp(0.0, h))).collect();
        let points = pts
            .iter()
            .map(|(x, y)| format!("{x:.1},{y:.1}"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(svg, "<polygon points=\"{points}\" fill=\"none\" stroke=\"red\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"red\">{}</text>",
            pts[0].0,
            pts[0].1,
            xml_escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Image id, frame size and labelled quads for one SVG.
type Page = (String, u32, u32, Vec<(Quad, String)>);

fn render(input: &Path, output: &Path, width: Option<u32>, height: Option<u32>, out: &mut dyn Write) -> Result<()> {
    let mut pages: Vec<Page> = Vec::new();
    if input.is_dir() {
        let mut classes = Vec::new();
        let dets = dota_io::read_submission(&dota_io::read_submission_dir(input)?, &mut classes)?;
        let mut by_image: std::collections::BTreeMap<&str, Vec<&Detection>> = Default::default();
        for d in &dets {
            by_image.entry(&d.image_id).or_default().push(d);
        }
        for (id, dets) in by_image {
            let mut items = Vec::new();
            let mut extent = (1.0f64, 1.0f64);
            for d in dets {
                let q = d.geometry.to_quad()?;
                for p in q.vertices() {
                    extent = (extent.0.max(p.x.ceil()), extent.1.max((-p.y).ceil()));
                }
                items.push((q, format!("{} {:.2}", classes[d.class_id as usize], d.score)));
            }
            let w = width.unwrap_or(extent.0 as u32);
            let h = height.unwrap_or(extent.1 as u32);
            pages.push((id.to_string(), w, h, items));
        }
    } else {
        let ds = dota_io::read_records_file(input)?;
        for img in &ds.images {
            let items = img
                .objects
                .iter()
                .map(|o| (o.quad, ds.classes[o.class_id as usize].clone()))
                .collect();
            pages.push((img.image_id.clone(), img.width, img.height, items));
        }
    }
    std::fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;
    for (id, w, h, items) in &pages {
        let path = output.join(format!("{id}.svg"));
        std::fs::write(&path, render_svg(*w, *h, items)).map_err(|e| Error::io(&path, e))?;
    }
    emit(out, &format!("rendered {} images\n", pages.len()))
}

/// `n` random long-edge boxes in a 2000 px square scene.
pub fn random_boxes(n: usize, seed: u64) -> Vec<RBox> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let w = rng.random_range(5.0..80.0);
            let h = rng.random_range(5.0..80.0);
            let b = RBox {
                cx: rng.random_range(0.0..2000.0),
                cy: rng.random_range(0.0..2000.0),
                w,
                h,
                theta: rng.random_range(-90.0..90.0),
                convention: Convention::Le,
            };
            canonicalize(&b).expect("positive extents")
        })
        .collect()
}

fn fingerprint(boxes: &[RBox]) -> u64 {
    // FNV-1a over the raw field bits
    let mut h: u64 = 0xcbf29ce484222325;
    for b in boxes {
        for v in [b.cx, b.cy, b.w, b.h, b.theta] {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    h
}

fn bench(sizes: &[usize], seed: u64, iou_threshold: f64, verify_limit: usize, out: &mut dyn Write) -> Result<()> {
    let mut text = format!(
        "{:>8} {:>18} {:>12} {:>14} {:>10} {:>8} {:>10}\n",
        "n", "inputs", "iou_pairs", "pairs_per_sec", "nms_secs", "kept", "reference"
    );
    for &n in sizes {
        let boxes = random_boxes(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let dets: Vec<Detection> = boxes
            .iter()
            .map(|b| Detection::new("bench", *b, 0, rng.random_range(0.0..1.0)))
            .collect::<Result<_>>()?;

        let cols = &boxes[..n.min(1000)];
        let t = Instant::now();
        let m = iou_matrix(&boxes, cols)?;
        let iou_secs = t.elapsed().as_secs_f64();
        let pairs = m.len() * cols.len();

        let t = Instant::now();
        let kept = postprocess::rotated_nms_indices(&dets, iou_threshold)?;
        let nms_secs = t.elapsed().as_secs_f64();

        let reference = if n <= verify_limit {
            if postprocess::nms_reference_indices(&dets, iou_threshold)? != kept {
                return Err(Error::Degenerate(format!(
                    "optimized NMS disagrees with the reference at n = {n}"
                )));
            }
            "match"
        } else {
            "skipped"
        };
        let _ = writeln!(
            text,
            "{:>8} {:>18} {:>12} {:>14.0} {:>10.4} {:>8} {:>10}",
            n,
            format!("{:016x}", fingerprint(&boxes)),
            pairs,
            pairs as f64 / iou_secs.max(1e-9),
            nms_secs,
            kept.len(),
            reference
        );
    }
    emit(out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn iou_examples() {
        let (code, out, _) = run_str(&["rotkit", "iou", "--a", "0,0,1,1,0", "--b", "0,0,1,1,0"]);
        assert_eq!((code, out.as_str()), (0, "1.000000\n"));
        let (code, out, _) = run_str(&["rotkit", "iou", "--a", "0,0,1,1,0", "--b", "0,0,1,1,45"]);
        assert_eq!((code, out.as_str()), (0, "0.707107\n"));
        let (code, _, err) = run_str(&["rotkit", "iou", "--a", "0,0,1,1,abc", "--b", "0,0,1,1,0"]);
        assert_eq!(code, 2);
        assert!(err.contains("not a finite number"));
    }

    #[test]
    fn negative_values_parse() {
        let (code, out, _) = run_str(&["rotkit", "iou", "--a", "-5,-5,2,1,-30", "--b", "-5,-5,2,1,150"]);
        assert_eq!((code, out.as_str()), (0, "1.000000\n"));
    }

    #[test]
    fn svg_counts_and_clips() {
        let empty = render_svg(100, 50, &[]);
        assert_eq!(empty.matches("<polygon").count(), 0);
        assert!(empty.contains("<rect"));
        let q = dota_io::quad_from_image_coords([-10.0, 5.0, 20.0, 5.0, 20.0, 80.0, -10.0, 80.0]).unwrap();
        let svg = render_svg(100, 50, &[(q, "a&b 0.90".into())]);
        assert!(svg.contains("points=\"0.0,5.0 20.0,5.0 20.0,50.0 0.0,50.0\""));
        assert!(svg.contains("a&amp;b 0.90"));
    }

    #[test]
    fn random_boxes_are_seeded() {
        assert_eq!(random_boxes(10, 3), random_boxes(10, 3));
        assert_ne!(random_boxes(10, 3), random_boxes(10, 4));
    }
}
