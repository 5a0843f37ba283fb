//! Angle conventions, canonicalization and the minimum-area rectangle.

use rotkit::geometry::{canonicalize, convert_convention, min_area_rect, quad_to_rbox, rbox_to_quad};
use rotkit::{Convention, Point, RBox};

fn main() -> rotkit::Result<()> {
    // any angle is accepted and wrapped into the convention's range
    let raw = RBox::new(5.0, 5.0, 4.0, 10.0, 135.0, Convention::Le)?;
    let le = canonicalize(&raw)?;
    let oc = convert_convention(&le, Convention::Oc)?;
    println!("raw {raw:?}");
    println!("le  {le:?}");
    println!("oc  {oc:?}");

    let quad = rbox_to_quad(&oc);
    println!("corners {:?}", quad.coords());
    println!("back to le {:?}", quad_to_rbox(&quad, Convention::Le)?);

    let cloud: Vec<Point> = (0..12)
        .map(|i| {
            let t = i as f64 * 0.5;
            Point::new(3.0 * t.cos() + 0.2 * t, 1.0 * t.sin())
        })
        .collect();
    println!("min-area rect of a point cloud: {:?}", min_area_rect(&cloud, Convention::Le)?);
    Ok(())
}
