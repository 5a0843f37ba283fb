//! Detection matching and the mAP / F-measure protocol.
//!
//! Matching follows the VOC rule: detections are visited by descending
//! score; a detection is a true positive when its best-IoU unmatched,
//! non-difficult ground truth of the same class and image reaches the IoU
//! threshold. Each ground truth matches at most once. A detection that only
//! reaches difficult ground truths is ignored (neither TP nor FP).
//!
//! Work is split per `(image, class)`, which can run in parallel; the
//! reduction into per-class PR curves is order-fixed, so parallel and serial
//! runs produce identical reports. Ordering ties are broken on
//! `(score desc, image_id, geometry, input index)`, which makes the report
//! independent of input order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PreparedPolygon, Quad, ToQuad};
use crate::postprocess::{score_filter, Detection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub geometry: Quad,
    pub class_id: u32,
    pub difficult: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchFlag {
    TruePositive,
    FalsePositive,
    Ignored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// One flag per input detection.
    pub flags: Vec<MatchFlag>,
    /// One entry per input ground truth.
    pub gt_matched: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ApMode {
    AllPoint,
    /// Mean of the interpolated precision at recall 0, 0.1, ..., 1.0.
    #[default]
    ElevenPoint,
}

impl std::str::FromStr for ApMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all_point" | "all-point" => Ok(ApMode::AllPoint),
            "eleven" | "11" | "eleven_point" | "eleven-point" => Ok(ApMode::ElevenPoint),
            other => Err(Error::Config(format!("unknown AP mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ApMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ApMode::AllPoint => "all_point",
            ApMode::ElevenPoint => "eleven_point",
        })
    }
}

/// Cumulative precision/recall after each scored (non-ignored) detection.
/// AP is computed from the integer counts, so `recall` and `precision` are
/// for display only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub scores: Vec<f64>,
    /// Cumulative true positives after each rank.
    pub true_positives: Vec<usize>,
    pub num_gt: usize,
}

impl PrCurve {
    /// `hits` in ranking order: `(score, is_true_positive)`.
    pub fn from_ranked(hits: &[(f64, bool)], num_gt: usize) -> PrCurve {
        let mut curve = PrCurve {
            num_gt,
            ..Default::default()
        };
        let mut tp = 0usize;
        for (k, &(score, is_tp)) in hits.iter().enumerate() {
            tp += usize::from(is_tp);
            curve.recall.push(if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 });
            curve.precision.push(tp as f64 / (k + 1) as f64);
            curve.scores.push(score);
            curve.true_positives.push(tp);
        }
        curve
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Non-negative fraction; arithmetic returns `None` on overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Ratio {
    num: u128,
    den: u128,
}

impl Ratio {
    fn new(num: u128, den: u128) -> Ratio {
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    fn add(self, o: Ratio) -> Option<Ratio> {
        let g = gcd(self.den, o.den);
        let den = (self.den / g).checked_mul(o.den)?;
        let num = self
            .num
            .checked_mul(den / self.den)?
            .checked_add(o.num.checked_mul(den / o.den)?)?;
        Some(Ratio::new(num, den))
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Sum of fractions, exact when it fits in 128 bits (then rounded once),
/// otherwise accumulated in floating point.
fn sum_ratios(terms: &[Ratio], divisor: u128) -> f64 {
    let exact = terms
        .iter()
        .try_fold(Ratio::new(0, 1), |acc, t| acc.add(*t))
        .and_then(|s| Some(Ratio::new(s.num, s.den.checked_mul(divisor)?)));
    match exact {
        Some(r) => r.to_f64(),
        None => terms.iter().map(|t| t.to_f64()).sum::<f64>() / divisor as f64,
    }
}

/// Average precision of a ranked list. Precision and recall are ratios of
/// counts, so the result is the exact rational AP rounded once to `f64`
/// unless the intermediate fractions outgrow 128 bits.
pub fn average_precision(curve: &PrCurve, mode: ApMode) -> f64 {
    let tps = &curve.true_positives;
    if tps.is_empty() || curve.num_gt == 0 {
        return 0.0;
    }
    let precision = |i: usize| Ratio::new(tps[i] as u128, i as u128 + 1);
    // envelope[i] = max precision at rank >= i, compared by cross products
    let mut envelope: Vec<Ratio> = (0..tps.len()).map(precision).collect();
    for i in (0..envelope.len() - 1).rev() {
        let (a, b) = (envelope[i], envelope[i + 1]);
        if b.num * a.den > a.num * b.den {
            envelope[i] = b;
        }
    }
    match mode {
        ApMode::AllPoint => {
            // recall rises by 1/num_gt exactly at each true positive
            let terms: Vec<Ratio> = (0..tps.len())
                .filter(|&i| tps[i] > if i == 0 { 0 } else { tps[i - 1] })
                .map(|i| envelope[i])
                .collect();
            sum_ratios(&terms, curve.num_gt as u128)
        }
        ApMode::ElevenPoint => {
            let npos = curve.num_gt;
            let terms: Vec<Ratio> = (0..=10usize)
                .map(|t| {
                    // first rank whose recall reaches t/10; the envelope there is
                    // the max precision over all ranks at or beyond it
                    tps.iter()
                        .position(|&tp| tp * 10 >= t * npos)
                        .map_or(Ratio::new(0, 1), |i| envelope[i])
                })
                .collect();
            sum_ratios(&terms, 11)
        }
    }
}

/// `0.50, 0.55, ..., 0.95`
pub fn coco_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FMeasure {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou_threshold: f64,
    pub score_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class_id: u32,
    /// Non-difficult ground truths.
    pub num_gt: usize,
    pub num_det: usize,
    /// One AP per evaluated IoU threshold.
    pub ap: Vec<f64>,
    pub curves: Vec<PrCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: ApMode,
    pub thresholds: Vec<f64>,
    /// Classes with at least one non-difficult ground truth, by id.
    pub classes: Vec<ClassReport>,
    /// Classes seen only in detections or difficult ground truth; excluded
    /// from every mean.
    pub no_gt_classes: Vec<u32>,
    /// mAP per threshold.
    pub map: Vec<f64>,
    pub map50: Option<f64>,
    pub map75: Option<f64>,
    pub map50_95: Option<f64>,
    pub f_measure: Option<FMeasure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub thresholds: Vec<f64>,
    pub mode: ApMode,
    pub parallel: bool,
    /// `(iou_threshold, score_threshold)` for an F-measure line.
    pub f_measure: Option<(f64, f64)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            thresholds: coco_thresholds(),
            mode: ApMode::ElevenPoint,
            parallel: true,
            f_measure: None,
        }
    }
}

fn check_iou_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("IoU threshold {t} outside (0, 1]")))
    }
}

fn cmp_coords(a: &[f64; 8], b: &[f64; 8]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

struct PreparedDet<'a> {
    index: usize,
    image_id: &'a str,
    score: f64,
    coords: [f64; 8],
    poly: PreparedPolygon,
}

struct PreparedGt {
    index: usize,
    coords: [f64; 8],
    difficult: bool,
    poly: PreparedPolygon,
}

fn rank(a: &PreparedDet, b: &PreparedDet) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.image_id.cmp(b.image_id))
        .then_with(|| cmp_coords(&a.coords, &b.coords))
        .then(a.index.cmp(&b.index))
}

/// Detections and ground truths of one `(image, class)` pair, both in
/// canonical order, with their IoU table.
struct Group<'a> {
    dets: Vec<PreparedDet<'a>>,
    gts: Vec<PreparedGt>,
    iou: Vec<Vec<f64>>,
}

impl Group<'_> {
    fn match_at(&self, threshold: f64) -> (Vec<MatchFlag>, Vec<bool>) {
        let mut matched = vec![false; self.gts.len()];
        let flags = self
            .iou
            .iter()
            .map(|row| {
                let mut best: Option<usize> = None;
                for (g, gt) in self.gts.iter().enumerate() {
                    if gt.difficult || matched[g] {
                        continue;
                    }
                    // gts are sorted, so strict > keeps the canonical winner on ties
                    if best.is_none_or(|b| row[g] > row[b]) {
                        best = Some(g);
                    }
                }
                match best {
                    Some(g) if row[g] >= threshold => {
                        matched[g] = true;
                        MatchFlag::TruePositive
                    }
                    _ => {
                        let hits_difficult = self
                            .gts
                            .iter()
                            .zip(row)
                            .any(|(gt, &v)| gt.difficult && v >= threshold);
                        if hits_difficult {
                            MatchFlag::Ignored
                        } else {
                            MatchFlag::FalsePositive
                        }
                    }
                }
            })
            .collect();
        (flags, matched)
    }
}

fn build_groups<'a>(
    dets: &'a [Detection],
    gts: &'a [GroundTruth],
) -> Result<BTreeMap<(&'a str, u32), Group<'a>>> {
    let mut groups: BTreeMap<(&str, u32), Group> = BTreeMap::new();
    for (index, d) in dets.iter().enumerate() {
        d.validate()?;
        let poly = PreparedPolygon::new(&d.geometry)?;
        groups
            .entry((d.image_id.as_str(), d.class_id))
            .or_insert_with(|| Group {
                dets: vec![],
                gts: vec![],
                iou: vec![],
            })
            .dets
            .push(PreparedDet {
                index,
                image_id: &d.image_id,
                score: d.score,
                coords: poly.quad.coords(),
                poly,
            });
    }
    for (index, g) in gts.iter().enumerate() {
        let poly = PreparedPolygon::new(&g.geometry.to_quad()?)?;
        groups
            .entry((g.image_id.as_str(), g.class_id))
            .or_insert_with(|| Group {
                dets: vec![],
                gts: vec![],
                iou: vec![],
            })
            .gts
            .push(PreparedGt {
                index,
                coords: poly.quad.coords(),
                difficult: g.difficult,
                poly,
            });
    }
    for group in groups.values_mut() {
        group.dets.sort_by(rank);
        group.gts.sort_by(|a, b| {
            cmp_coords(&a.coords, &b.coords)
                .then(a.difficult.cmp(&b.difficult))
                .then(a.index.cmp(&b.index))
        });
    }
    Ok(groups)
}

fn fill_iou(group: &mut Group) {
    group.iou = group
        .dets
        .iter()
        .map(|d| group.gts.iter().map(|g| d.poly.iou(&g.poly)).collect())
        .collect();
}

/// VOC matching at one IoU threshold.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruth], iou_threshold: f64) -> Result<MatchResult> {
    check_iou_threshold(iou_threshold)?;
    let mut groups = build_groups(dets, gts)?;
    let mut flags = vec![MatchFlag::FalsePositive; dets.len()];
    let mut gt_matched = vec![false; gts.len()];
    for group in groups.values_mut() {
        fill_iou(group);
        let (group_flags, matched) = group.match_at(iou_threshold);
        for (d, f) in group.dets.iter().zip(group_flags) {
            flags[d.index] = f;
        }
        for (g, m) in group.gts.iter().zip(matched) {
            gt_matched[g.index] = m;
        }
    }
    Ok(MatchResult { flags, gt_matched })
}

/// Precision, recall and F1 of the detections scoring at least
/// `score_threshold`, matched at `iou_threshold`, pooled over classes.
/// `0/0` is taken as 0.
pub fn f_measure(
    dets: &[Detection],
    gts: &[GroundTruth],
    iou_threshold: f64,
    score_threshold: f64,
) -> Result<FMeasure> {
    let kept = score_filter(dets, score_threshold);
    let m = match_detections(&kept, gts, iou_threshold)?;
    let tp = m.flags.iter().filter(|f| **f == MatchFlag::TruePositive).count();
    let fp = m.flags.iter().filter(|f| **f == MatchFlag::FalsePositive).count();
    let npos = gts.iter().filter(|g| !g.difficult).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, npos);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(FMeasure {
        precision,
        recall,
        f1,
        iou_threshold,
        score_threshold,
    })
}

/// Evaluation at each of `thresholds` with the default options otherwise.
pub fn evaluate(dets: &[Detection], gts: &[GroundTruth], thresholds: &[f64], mode: ApMode) -> Result<EvalReport> {
    evaluate_with(
        dets,
        gts,
        &EvalOptions {
            thresholds: thresholds.to_vec(),
            mode,
            ..Default::default()
        },
    )
}

struct Ranked<'a> {
    score: f64,
    image_id: &'a str,
    coords: [f64; 8],
    index: usize,
    flags: Vec<MatchFlag>,
}

fn rank_group<'a>(group: &mut Group<'a>, thresholds: &[f64]) -> Vec<Ranked<'a>> {
    fill_iou(group);
    let per_threshold: Vec<Vec<MatchFlag>> = thresholds.iter().map(|&t| group.match_at(t).0).collect();
    group
        .dets
        .iter()
        .enumerate()
        .map(|(i, d)| Ranked {
            score: d.score,
            image_id: d.image_id,
            coords: d.coords,
            index: d.index,
            flags: per_threshold.iter().map(|f| f[i]).collect(),
        })
        .collect()
}

pub fn evaluate_with<'a>(dets: &'a [Detection], gts: &'a [GroundTruth], opts: &EvalOptions) -> Result<EvalReport> {
    if opts.thresholds.is_empty() {
        return Err(Error::Config("no IoU thresholds given".into()));
    }
    for &t in &opts.thresholds {
        check_iou_threshold(t)?;
    }
    let mut groups = build_groups(dets, gts)?;

    let per_group = |(key, group): (&(&'a str, u32), &mut Group<'a>)| (key.1, rank_group(group, &opts.thresholds));
    let matched: Vec<(u32, Vec<Ranked>)> = if opts.parallel {
        groups.par_iter_mut().map(per_group).collect()
    } else {
        groups.iter_mut().map(per_group).collect()
    };

    let mut by_class: BTreeMap<u32, Vec<Ranked>> = BTreeMap::new();
    for (class_id, ranked) in matched {
        by_class.entry(class_id).or_default().extend(ranked);
    }
    let mut num_gt: BTreeMap<u32, usize> = BTreeMap::new();
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    for g in gts {
        seen.insert(g.class_id);
        if !g.difficult {
            *num_gt.entry(g.class_id).or_default() += 1;
        }
    }
    seen.extend(dets.iter().map(|d| d.class_id));

    let mut classes = Vec::new();
    let mut no_gt_classes = Vec::new();
    for class_id in seen {
        let npos = num_gt.get(&class_id).copied().unwrap_or(0);
        if npos == 0 {
            no_gt_classes.push(class_id);
            continue;
        }
        let mut ranked = by_class.remove(&class_id).unwrap_or_default();
        ranked.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.image_id.cmp(b.image_id))
                .then_with(|| cmp_coords(&a.coords, &b.coords))
                .then(a.index.cmp(&b.index))
        });
        let curves: Vec<PrCurve> = (0..opts.thresholds.len())
            .map(|t| {
                let hits: Vec<(f64, bool)> = ranked
                    .iter()
                    .filter(|r| r.flags[t] != MatchFlag::Ignored)
                    .map(|r| (r.score, r.flags[t] == MatchFlag::TruePositive))
                    .collect();
                PrCurve::from_ranked(&hits, npos)
            })
            .collect();
        classes.push(ClassReport {
            class_id,
            num_gt: npos,
            num_det: ranked.len(),
            ap: curves.iter().map(|c| average_precision(c, opts.mode)).collect(),
            curves,
        });
    }

    let map: Vec<f64> = (0..opts.thresholds.len())
        .map(|t| {
            if classes.is_empty() {
                0.0
            } else {
                classes.iter().map(|c| c.ap[t]).sum::<f64>() / classes.len() as f64
            }
        })
        .collect();
    let at = |target: f64| {
        opts.thresholds
            .iter()
            .position(|t| (t - target).abs() < 1e-9)
            .map(|i| map[i])
    };
    let ladder: Option<Vec<f64>> = coco_thresholds().into_iter().map(at).collect();
    let f = match opts.f_measure {
        Some((iou, score)) => Some(f_measure(dets, gts, iou, score)?),
        None => None,
    };

    Ok(EvalReport {
        mode: opts.mode,
        thresholds: opts.thresholds.clone(),
        map50: at(0.5),
        map75: at(0.75),
        map50_95: ladder.map(|v| v.iter().sum::<f64>() / v.len() as f64),
        classes,
        no_gt_classes,
        map,
        f_measure: f,
    })
}

impl EvalReport {
    /// Key/value summary followed by a per-class AP table.
    pub fn to_text(&self, class_names: &[String]) -> String {
        let name = |id: u32| {
            class_names
                .get(id as usize)
                .cloned()
                .unwrap_or_else(|| format!("class_{id}"))
        };
        let mut out = String::new();
        let fmt_opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(
            out,
            "thresholds: {}",
            self.thresholds.iter().map(|t| format!("{t:.2}")).collect::<Vec<_>>().join(" ")
        );
        let _ = writeln!(out, "mAP50: {}", fmt_opt(self.map50));
        let _ = writeln!(out, "mAP75: {}", fmt_opt(self.map75));
        let _ = writeln!(out, "mAP50:95: {}", fmt_opt(self.map50_95));
        if let Some(f) = &self.f_measure {
            let _ = writeln!(
                out,
                "f_measure@iou{:.2},score{:.2}: precision {:.4} recall {:.4} f1 {:.4}",
                f.iou_threshold, f.score_threshold, f.precision, f.recall, f.f1
            );
        }
        let _ = write!(out, "\n{:<24} {:>6} {:>6}", "class", "gt", "det");
        for t in &self.thresholds {
            let _ = write!(out, " {:>8}", format!("AP@{t:.2}"));
        }
        out.push('\n');
        for c in &self.classes {
            let _ = write!(out, "{:<24} {:>6} {:>6}", name(c.class_id), c.num_gt, c.num_det);
            for ap in &c.ap {
                let _ = write!(out, " {ap:>8.4}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<24} {:>6} {:>6}", "mean", "", "");
        for m in &self.map {
            let _ = write!(out, " {m:>8.4}");
        }
        out.push('\n');
        for c in self.classes.iter().filter(|c| c.num_det == 0) {
            let _ = writeln!(out, "note: no detections for class {}", name(c.class_id));
        }
        for id in &self.no_gt_classes {
            let _ = writeln!(out, "note: class {} has no ground truth; excluded from mAP", name(*id));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
