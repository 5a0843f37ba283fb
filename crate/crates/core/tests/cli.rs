use std::fs;
use std::path::{Path, PathBuf};

use rotkit::cli::run;
use rotkit::dota_io::read_records_file;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn rotkit(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("rotkit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const HEADER: &str = "imagesource:test\ngsd:0.5\n";

fn write_annotations(dir: &Path, files: &[(&str, &str)]) {
    fs::create_dir_all(dir).unwrap();
    for (name, body) in files {
        fs::write(dir.join(format!("{name}.txt")), format!("{HEADER}{body}")).unwrap();
    }
}

#[test]
fn iou_prints_overlap() {
    let (code, out, _) = rotkit(&["iou", "--a", "0,0,2,1,0", "--b", "0,0,2,1,0"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1.000000");
    let (code, out, _) = rotkit(&["iou", "--a", "0,0,1,1,0", "--b", "0,0,1,1,45"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "0.707107");
}

#[test]
fn convert_groups_one_record_per_file() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_annotations(
        &gt,
        &[
            ("A", "0 0 10 0 10 10 0 10 plane 0\n"),
            ("B", "0 0 10 0 10 10 0 10 ship 1\n20 0 30 0 30 10 20 10 ship 0\n"),
            ("C", ""),
        ],
    );
    let out = tmp.path().join("records.txt");
    let (code, _, err) = rotkit(&["convert", "--input", p(&gt), "--output", p(&out), "--boxes", "le"]);
    assert_eq!(code, 0, "{err}");
    let ds = read_records_file(&out).unwrap();
    let ids: Vec<&str> = ds.images.iter().map(|i| i.image_id.as_str()).collect();
    assert_eq!(ids, ["A", "B", "C"]);
    assert_eq!(ds.images[1].objects.len(), 2);
    assert!(ds.images[1].objects[0].difficult);
    assert_eq!(ds.images[2].objects.len(), 0);
}

#[test]
fn convert_of_empty_directory_writes_header_and_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("records.txt");
    let (code, _, err) = rotkit(&["convert", "--input", p(tmp.path()), "--output", p(&out)]);
    assert_eq!(code, 0);
    assert!(err.contains("warning"), "{err}");
    let ds = read_records_file(&out).unwrap();
    assert!(ds.images.is_empty());
}

#[test]
fn convert_reports_bad_bytes_with_file_name() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("broken.txt"), b"imagesource:x\n\xff\xfe 1 2\n").unwrap();
    let out = tmp.path().join("records.txt");
    let (code, _, err) = rotkit(&["convert", "--input", p(tmp.path()), "--output", p(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("broken.txt"), "{err}");
}

#[test]
fn crop_manifest_lists_offsets() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_annotations(&gt, &[("big", "100 100 140 100 140 130 100 130 plane 0\n")]);
    let records = tmp.path().join("records.txt");
    let (code, _, err) = rotkit(&[
        "convert", "--input", p(&gt), "--output", p(&records), "--width", "1000", "--height", "1000",
    ]);
    assert_eq!(code, 0, "{err}");
    let patches = tmp.path().join("patches.txt");
    let (code, out, err) = rotkit(&["crop", "--input", p(&records), "--output", p(&patches)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.trim(), "big scale=1 size=1000x1000 x_offsets=0,400 y_offsets=0,400 patches=4");
    let ds = read_records_file(&patches).unwrap();
    assert_eq!(ds.images.len(), 4);
    let with_plane: Vec<&str> = ds
        .images
        .iter()
        .filter(|i| !i.objects.is_empty())
        .map(|i| i.image_id.as_str())
        .collect();
    assert_eq!(with_plane, ["big__1__0___0"]);
}

#[test]
fn nms_suppresses_within_image_and_class() {
    let tmp = tempfile::tempdir().unwrap();
    let det = tmp.path().join("det");
    fs::create_dir_all(&det).unwrap();
    fs::write(
        det.join("Task1_plane.txt"),
        "I1 0.9 0 0 10 0 10 10 0 10\nI1 0.8 1 0 11 0 11 10 1 10\nI2 0.7 1 0 11 0 11 10 1 10\n",
    )
    .unwrap();
    fs::write(det.join("Task1_ship.txt"), "I1 0.6 0 0 10 0 10 10 0 10\n").unwrap();
    let out = tmp.path().join("out");
    let (code, stdout, err) = rotkit(&["nms", "--input", p(&det), "--output", p(&out), "--iou-threshold", "0.5"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.trim(), "kept 3 of 4 detections");
    let plane = fs::read_to_string(out.join("Task1_plane.txt")).unwrap();
    assert_eq!(plane.lines().count(), 2);
    assert!(plane.contains("I1 0.9000"));
    assert!(!plane.contains("I1 0.8000"));
}

#[test]
fn nms_merges_patch_detections_into_source_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let det = tmp.path().join("det");
    fs::create_dir_all(&det).unwrap();
    // the same object seen from two overlapping patches
    fs::write(
        det.join("Task1_plane.txt"),
        "P7__1__0___0 0.9 450 10 470 10 470 30 450 30\nP7__1__450___0 0.8 0 10 20 10 20 30 0 30\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let (code, stdout, err) = rotkit(&["nms", "--input", p(&det), "--output", p(&out), "--merge-patches"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(stdout.trim(), "kept 1 of 2 detections");
    let plane = fs::read_to_string(out.join("Task1_plane.txt")).unwrap();
    assert_eq!(plane.trim(), "P7 0.9000 450.0 10.0 470.0 10.0 470.0 30.0 450.0 30.0");
}

#[test]
fn eval_perfect_detections() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_annotations(&gt, &[("I1", "0 0 10 0 10 10 0 10 plane 0\n20 0 30 0 30 10 20 10 ship 0\n")]);
    let det = tmp.path().join("det");
    fs::create_dir_all(&det).unwrap();
    fs::write(det.join("Task1_plane.txt"), "I1 1.0 0 0 10 0 10 10 0 10\n").unwrap();
    fs::write(det.join("Task1_ship.txt"), "I1 0.5 20 0 30 0 30 10 20 10\n").unwrap();
    for mode in ["all", "eleven"] {
        let (code, out, err) = rotkit(&["eval", "--det", p(&det), "--gt", p(&gt), "--mode", mode]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("mAP50: 1.0000"), "{out}");
        assert!(out.contains("mAP50:95: 1.0000"), "{out}");
    }
}

#[test]
fn eval_three_class_fixture() {
    let root = fixtures().join("three_class");
    let json = tempfile::NamedTempFile::new().unwrap();
    let (code, out, err) = rotkit(&[
        "eval",
        "--det",
        p(&root.join("det")),
        "--gt",
        p(&root.join("gt")),
        "--json",
        p(json.path()),
        "--f-score",
        "0.5",
    ]);
    assert_eq!(code, 0, "{err}");
    // 27/44 and 3/10 from the exact-fraction oracle
    assert!(out.contains("mAP50: 0.6136"), "{out}");
    assert!(out.contains("mAP50:95: 0.3000"), "{out}");
    assert!(out.contains("note: no detections for class harbor"), "{out}");
    assert!(out.contains("bridge"), "{out}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json.path()).unwrap()).unwrap();
    assert!((report["map50"].as_f64().unwrap() - 27.0 / 44.0).abs() < 1e-12);
    assert!(report["f_measure"]["f1"].as_f64().is_some());

    let (code, out, _) = rotkit(&["eval", "--det", p(&root.join("det")), "--gt", p(&root.join("gt")), "--mode", "all", "--serial"]);
    assert_eq!(code, 0);
    assert!(out.contains("mAP50: 0.6111"), "{out}");
}

#[test]
fn render_draws_one_polygon_per_object() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    fs::create_dir_all(&gt).unwrap();
    fs::copy(fixtures().join("P0001.txt"), gt.join("P0001.txt")).unwrap();
    let records = tmp.path().join("records.txt");
    assert_eq!(rotkit(&["convert", "--input", p(&gt), "--output", p(&records)]).0, 0);
    let svg_dir = tmp.path().join("svg");
    let (code, out, err) = rotkit(&["render", "--input", p(&records), "--output", p(&svg_dir)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.trim(), "rendered 1 images");
    let svg = fs::read_to_string(svg_dir.join("P0001.svg")).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 3);
    assert!(svg.contains(">small-vehicle</text>"));
}

#[test]
fn render_accepts_submission_directories() {
    let root = fixtures().join("three_class");
    let tmp = tempfile::tempdir().unwrap();
    let (code, out, err) = rotkit(&["render", "--input", p(&root.join("det")), "--output", p(tmp.path())]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.trim(), "rendered 2 images");
    let svg = fs::read_to_string(tmp.path().join("I1.svg")).unwrap();
    assert!(svg.matches("<polygon").count() >= 4);
}

fn bench_rows(out: &str) -> Vec<Vec<String>> {
    out.lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

#[test]
fn bench_is_deterministic_per_seed() {
    let (code, a, err) = rotkit(&["bench", "--sizes", "50,200", "--seed", "7"]);
    assert_eq!(code, 0, "{err}");
    let (_, b, _) = rotkit(&["bench", "--sizes", "50,200", "--seed", "7"]);
    let (_, c, _) = rotkit(&["bench", "--sizes", "50,200", "--seed", "8"]);
    let (ra, rb, rc) = (bench_rows(&a), bench_rows(&b), bench_rows(&c));
    assert_eq!(ra.len(), 2);
    for i in 0..2 {
        assert_eq!(ra[i][1], rb[i][1]);
        assert_eq!(ra[i][5], rb[i][5]);
        assert_ne!(ra[i][1], rc[i][1]);
        assert_eq!(ra[i][6], "match");
    }
    let (_, d, _) = rotkit(&["bench", "--sizes", "50", "--verify-limit", "10"]);
    assert_eq!(bench_rows(&d)[0][6], "skipped");
}

#[test]
fn config_file_fills_flags_and_command_line_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("rotkit.conf");
    fs::write(&cfg, "# shared settings\nsizes = 30\nseed = 3\nbench.verify_limit = 10\nmode = all\n").unwrap();
    let (code, from_cfg, err) = rotkit(&["--config", p(&cfg), "bench"]);
    assert_eq!(code, 0, "{err}");
    let (_, direct, _) = rotkit(&["bench", "--sizes", "30", "--seed", "3"]);
    assert_eq!(bench_rows(&from_cfg)[0][1], bench_rows(&direct)[0][1]);
    assert_eq!(bench_rows(&from_cfg)[0][6], "skipped");

    let (_, overridden, _) = rotkit(&["bench", "--config", p(&cfg), "--seed", "4"]);
    let (_, seed4, _) = rotkit(&["bench", "--sizes", "30", "--seed", "4"]);
    assert_eq!(bench_rows(&overridden)[0][1], bench_rows(&seed4)[0][1]);

    fs::write(&cfg, "no_such_flag = 1\n").unwrap();
    let (code, _, err) = rotkit(&["--config", p(&cfg), "bench"]);
    assert_eq!(code, 2);
    assert!(err.contains("no_such_flag"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(rotkit(&["bench", "--bogus"]).0, 2);
    assert_eq!(rotkit(&["frobnicate"]).0, 2);
    assert_eq!(rotkit(&["iou", "--a", "1,2,3", "--b", "0,0,1,1,0"]).0, 2);
    assert_eq!(rotkit(&["eval", "--det", "x", "--gt", "y", "--mode", "sometimes"]).0, 2);
    let (code, _, err) = rotkit(&["crop", "--input", "missing.txt", "--output", "o.txt", "--overlap", "700"]);
    assert_ne!(code, 0);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn missing_inputs_are_data_errors() {
    let (code, _, err) = rotkit(&["eval", "--det", "/nonexistent/det", "--gt", "/nonexistent/gt"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent"), "{err}");
}
