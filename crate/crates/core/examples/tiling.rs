//! Tile a large image into overlapping patches, then merge patch
//! detections back into the source frame.

use rotkit::dota_io::{crop_annotations, merge_patch_detections, parse_annotation, plan_tiles, CropOptions};
use rotkit::postprocess::Detection;
use rotkit::geometry::ToQuad;
use rotkit::Shape;

const ANNOTATION: &str = "imagesource:GoogleEarth
gsd:0.146
100 100 160 100 160 130 100 130 plane 0
430 300 500 300 500 340 430 340 ship 0
900 900 940 900 940 960 900 960 harbor 1
";

fn main() -> rotkit::Result<()> {
    let ann = parse_annotation("P0042", ANNOTATION)?;
    let plan = plan_tiles(1000, 1000, 600, 150)?;
    println!("x offsets {:?}, y offsets {:?}", plan.x_offsets, plan.y_offsets);

    let patches = crop_annotations(&ann, &plan, &CropOptions::default())?;
    let mut per_patch = Vec::new();
    for p in &patches {
        let names: Vec<&str> = p.annotation.objects.iter().map(|o| o.class_name.as_str()).collect();
        println!("{} at {:?}: {:?}", p.annotation.image_id, p.origin, names);
        // pretend a detector found every kept object in this patch
        let dets = p
            .annotation
            .objects
            .iter()
            .map(|o| Detection::new(p.annotation.image_id.clone(), Shape::Quad(o.quad), 0, 0.9))
            .collect::<rotkit::Result<Vec<_>>>()?;
        per_patch.push((p.origin, dets));
    }

    let merged = merge_patch_detections(&per_patch, 0.5)?;
    println!("{} detections after merging", merged.len());
    for d in &merged {
        println!("  {} {:?}", d.image_id, rotkit::dota_io::quad_to_image_coords(&d.geometry.to_quad()?));
    }
    Ok(())
}
