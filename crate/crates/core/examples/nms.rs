//! Greedy rotated NMS, single class and batched per image and class.

use rotkit::cli::random_boxes;
use rotkit::postprocess::{batched_rotated_nms, rotated_nms, score_filter, Detection};
use rotkit::RBox;

fn main() -> rotkit::Result<()> {
    let dets = vec![
        Detection::new("a", RBox::le(10.0, 10.0, 20.0, 8.0, 0.0)?, 0, 0.9)?,
        Detection::new("a", RBox::le(11.0, 10.0, 20.0, 8.0, 5.0)?, 0, 0.8)?,
        Detection::new("a", RBox::le(11.0, 10.0, 20.0, 8.0, 5.0)?, 1, 0.7)?,
        Detection::new("b", RBox::le(10.0, 10.0, 20.0, 8.0, 0.0)?, 0, 0.6)?,
        Detection::new("a", RBox::le(60.0, 60.0, 20.0, 8.0, 0.0)?, 0, 0.05)?,
    ];
    let kept = batched_rotated_nms(&score_filter(&dets, 0.1), 0.5)?;
    for d in &kept {
        println!("{} class {} score {:.2}", d.image_id, d.class_id, d.score);
    }

    let crowd: Vec<Detection> = random_boxes(5000, 1)
        .into_iter()
        .enumerate()
        .map(|(i, b)| Detection::new("crowd", b, 0, 1.0 - i as f64 / 5000.0))
        .collect::<rotkit::Result<_>>()?;
    let start = std::time::Instant::now();
    let survivors = rotated_nms(&crowd, 0.3)?;
    println!("{} of {} kept in {:.3}s", survivors.len(), crowd.len(), start.elapsed().as_secs_f64());
    Ok(())
}
