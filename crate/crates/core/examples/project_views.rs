//! Project every object into the posed frames and list the best crops.

use std::path::Path;

use scenelang::projection::select_views;
use scenelang::scene::load_scene;

fn main() -> scenelang::Result<()> {
    let scene = load_scene(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scene.json"))?;
    for obj in &scene.objects {
        let crops = select_views(obj, &scene.views, 2);
        if crops.is_empty() {
            println!("{}-{}: not visible", obj.label, obj.id);
        }
        for c in crops {
            let [x0, y0, x1, y1] = c.rect;
            println!(
                "{}-{}: {} [{x0:.0}, {y0:.0}, {x1:.0}, {y1:.0}] corners={} depth={:.2} m",
                obj.label, obj.id, c.frame_id, c.visible_corners, c.mean_depth_m
            );
        }
    }
    Ok(())
}
