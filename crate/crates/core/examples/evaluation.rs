//! mAP over a ladder of IoU thresholds, with difficult ground truth.

use rotkit::evaluation::{evaluate_with, match_detections, ApMode, EvalOptions, GroundTruth};
use rotkit::geometry::rbox_to_quad;
use rotkit::postprocess::Detection;
use rotkit::RBox;

fn gt(image: &str, b: RBox, class_id: u32, difficult: bool) -> GroundTruth {
    GroundTruth {
        image_id: image.into(),
        geometry: rbox_to_quad(&b),
        class_id,
        difficult,
    }
}

fn main() -> rotkit::Result<()> {
    let gts = vec![
        gt("I1", RBox::le(10.0, 10.0, 20.0, 10.0, 0.0)?, 0, false),
        gt("I1", RBox::le(50.0, 10.0, 20.0, 10.0, 30.0)?, 0, false),
        gt("I1", RBox::le(90.0, 10.0, 8.0, 4.0, 0.0)?, 0, true),
        gt("I2", RBox::le(10.0, 10.0, 30.0, 12.0, -45.0)?, 1, false),
    ];
    let dets = vec![
        Detection::new("I1", RBox::le(10.5, 10.0, 20.0, 10.0, 0.0)?, 0, 0.9)?,
        Detection::new("I1", RBox::le(90.0, 10.0, 8.0, 4.0, 0.0)?, 0, 0.85)?,
        Detection::new("I1", RBox::le(10.0, 30.0, 20.0, 10.0, 0.0)?, 0, 0.8)?,
        Detection::new("I1", RBox::le(51.0, 11.0, 20.0, 10.0, 25.0)?, 0, 0.7)?,
        Detection::new("I2", RBox::le(10.0, 10.0, 30.0, 12.0, -40.0)?, 1, 0.6)?,
    ];

    let class0: Vec<Detection> = dets.iter().filter(|d| d.class_id == 0).cloned().collect();
    println!("flags at 0.5: {:?}", match_detections(&class0, &gts, 0.5)?.flags);

    let names = vec!["plane".to_string(), "ship".to_string()];
    for mode in [ApMode::AllPoint, ApMode::ElevenPoint] {
        let opts = EvalOptions {
            mode,
            f_measure: Some((0.5, 0.5)),
            ..EvalOptions::default()
        };
        let report = evaluate_with(&dets, &gts, &opts)?;
        println!("== {mode}\n{}", report.to_text(&names));
    }
    Ok(())
}
