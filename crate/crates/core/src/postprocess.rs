//! Score filtering and greedy rotated non-maximum suppression.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotated_iou, PreparedPolygon, Shape, ToQuad};

/// Candidates per suppression sweep above which the sweep runs in parallel.
const PARALLEL_SWEEP: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub geometry: Shape,
    pub class_id: u32,
    pub score: f64,
}

impl Detection {
    pub fn new(image_id: impl Into<String>, geometry: impl Into<Shape>, class_id: u32, score: f64) -> Result<Self> {
        let d = Self {
            image_id: image_id.into(),
            geometry: geometry.into(),
            class_id,
            score,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::Range(format!("score {} outside [0, 1]", self.score)));
        }
        self.geometry.to_quad().map(|_| ())
    }
}

/// Detections with `score >= threshold`, in input order.
pub fn score_filter(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter().filter(|d| d.score >= threshold).cloned().collect()
}

fn check_threshold(iou_threshold: f64) -> Result<()> {
    if iou_threshold > 0.0 && iou_threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("IoU threshold {iou_threshold} outside (0, 1]")))
    }
}

/// Indices by descending score, ties by ascending index.
fn score_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    order
}

/// Greedy NMS returning kept input indices in keep order. A candidate is
/// suppressed when its IoU with a kept box is strictly above
/// `iou_threshold`.
///
/// Polygons, areas and bounds are computed once; pairs with disjoint bounds
/// skip clipping, and long sweeps fan out over rayon. The result is the same
/// as [`nms_reference_indices`].
pub fn rotated_nms_indices(dets: &[Detection], iou_threshold: f64) -> Result<Vec<usize>> {
    check_threshold(iou_threshold)?;
    let prepared = dets
        .iter()
        .map(|d| PreparedPolygon::new(&d.geometry))
        .collect::<Result<Vec<_>>>()?;
    let order = score_order(dets);
    let mut suppressed = vec![false; dets.len()];
    let mut keep = Vec::new();

    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(i);
        let top = &prepared[i];
        let hits = |&&j: &&usize| {
            !suppressed[j] && top.aabb.overlaps(&prepared[j].aabb) && top.iou(&prepared[j]) > iou_threshold
        };
        let rest = &order[pos + 1..];
        let doomed: Vec<usize> = if rest.len() >= PARALLEL_SWEEP {
            rest.par_iter().filter(hits).copied().collect()
        } else {
            rest.iter().filter(hits).copied().collect()
        };
        for j in doomed {
            suppressed[j] = true;
        }
    }
    Ok(keep)
}

pub fn rotated_nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    Ok(rotated_nms_indices(dets, iou_threshold)?
        .into_iter()
        .map(|i| dets[i].clone())
        .collect())
}

/// Plain O(n²) greedy NMS through [`rotated_iou`], kept as the oracle for
/// [`rotated_nms_indices`].
pub fn nms_reference_indices(dets: &[Detection], iou_threshold: f64) -> Result<Vec<usize>> {
    check_threshold(iou_threshold)?;
    for d in dets {
        d.geometry.to_quad()?;
    }
    let mut remaining = score_order(dets);
    let mut keep = Vec::new();
    while !remaining.is_empty() {
        let top = remaining.remove(0);
        keep.push(top);
        let mut survivors = Vec::with_capacity(remaining.len());
        for j in remaining {
            if rotated_iou(&dets[top].geometry, &dets[j].geometry)? <= iou_threshold {
                survivors.push(j);
            }
        }
        remaining = survivors;
    }
    Ok(keep)
}

pub fn nms_reference(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    Ok(nms_reference_indices(dets, iou_threshold)?
        .into_iter()
        .map(|i| dets[i].clone())
        .collect())
}

/// NMS applied independently per `(image_id, class_id)`; groups come out in
/// that key order, each in keep order.
pub fn batched_rotated_nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    let mut groups: BTreeMap<(&str, u32), Vec<usize>> = BTreeMap::new();
    for (i, d) in dets.iter().enumerate() {
        groups.entry((d.image_id.as_str(), d.class_id)).or_default().push(i);
    }
    let kept = groups
        .into_par_iter()
        .map(|(_, members)| {
            let subset: Vec<Detection> = members.iter().map(|&i| dets[i].clone()).collect();
            rotated_nms(&subset, iou_threshold)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kept.into_iter().flatten().collect())
}
