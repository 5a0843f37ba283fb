//! Rotated IoU between boxes, and a pairwise IoU matrix.

use rotkit::geometry::{iou_matrix, rotated_iou};
use rotkit::{Quad, RBox};

fn main() -> rotkit::Result<()> {
    let square = RBox::le(0.0, 0.0, 1.0, 1.0, 0.0)?;
    let diamond = RBox::le(0.0, 0.0, 1.0, 1.0, 45.0)?;
    println!("square vs diamond: {:.6}", rotated_iou(&square, &diamond)?);

    // boxes and quads mix freely
    let quad = Quad::from_coords([0.0, 0.0, 2.0, 0.0, 2.0, 1.0, 0.0, 1.0])?;
    let shifted = RBox::oc(1.5, 0.5, 2.0, 1.0, -90.0)?;
    println!("quad vs box: {:.6}", rotated_iou(&quad, &shifted)?);

    let boxes = [
        RBox::le(0.0, 0.0, 10.0, 4.0, 0.0)?,
        RBox::le(1.0, 0.0, 10.0, 4.0, 10.0)?,
        RBox::le(30.0, 0.0, 10.0, 4.0, -60.0)?,
    ];
    for row in iou_matrix(&boxes, &boxes)? {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("{}", cells.join("  "));
    }
    Ok(())
}
