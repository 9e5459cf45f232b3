//! 3D IoU, grounding accuracy and multi-object F1 on a few boxes.

use scenelang::metrics::{grounding_accuracy, iou3, multi_object_f1, Box3};
use scenelang::Vec3;

fn cube(x: f64, y: f64, side: f64) -> Box3 {
    Box3::new(Vec3::new(x, y, 0.5), Vec3::new(side, side, side)).expect("positive size")
}

fn main() -> scenelang::Result<()> {
    let gts = [cube(0.0, 0.0, 1.0), cube(3.0, 0.0, 1.0), cube(0.0, 3.0, 1.0)];
    let preds = [cube(0.1, 0.0, 1.0), cube(3.5, 0.0, 1.0), cube(5.0, 5.0, 1.0)];
    for (p, g) in preds.iter().zip(&gts) {
        println!("iou = {:.3}", iou3(p, g));
    }
    for t in [0.25, 0.5] {
        println!(
            "Acc@{t} = {:.3}   F1@{t} = {:.3}",
            grounding_accuracy(&preds, &gts, t)?,
            multi_object_f1(&preds[..2], &gts, t)
        );
    }
    Ok(())
}
