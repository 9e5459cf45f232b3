//! Pinhole projection of object boxes into posed views, and the crop
//! manifest handed to the captioning stage.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io;
use crate::scene::{CameraPose, Scene, SceneObject, View};

pub const CROP_MARGIN: f64 = 0.10;
pub const MIN_VISIBLE_CORNERS: usize = 2;
pub const DEFAULT_MAX_VIEWS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropRegion {
    pub frame_id: String,
    /// `[x_min, y_min, x_max, y_max]` in pixels.
    pub rect: [f64; 4],
    pub visible_corners: usize,
    pub mean_depth_m: f64,
}

impl CropRegion {
    pub fn area(&self) -> f64 {
        (self.rect[2] - self.rect[0]) * (self.rect[3] - self.rect[1])
    }
}

/// Pixel coordinates and depth of `p`, or `None` behind the camera.
pub fn project_point(cam: &CameraPose, p: crate::Vec3) -> Option<(f64, f64, f64)> {
    let k = cam.intrinsics?;
    let c = cam.world_to_camera(p);
    if c.z <= 0.0 {
        return None;
    }
    Some((k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy, c.z))
}

/// Crop region of `obj` in `view`, or `None` when fewer than two box corners
/// land inside the image.
///
/// The rectangle spans every corner in front of the camera, so a box that
/// straddles the image border still gets a full-width crop; it is then grown
/// by [`CROP_MARGIN`] of its size per side and clipped to the image.
pub fn project_box(obj: &SceneObject, view: &View) -> Option<CropRegion> {
    let cam = &view.camera;
    let [w, h] = cam.image_size?;
    let (w, h) = (w as f64, h as f64);
    let projected: Vec<(f64, f64, f64)> = obj.corners().iter().filter_map(|&p| project_point(cam, p)).collect();
    let inside: Vec<&(f64, f64, f64)> = projected
        .iter()
        .filter(|(u, v, _)| (0.0..=w).contains(u) && (0.0..=h).contains(v))
        .collect();
    if inside.len() < MIN_VISIBLE_CORNERS {
        return None;
    }

    let clip = |r: [f64; 4]| {
        [
            r[0].clamp(0.0, w),
            r[1].clamp(0.0, h),
            r[2].clamp(0.0, w),
            r[3].clamp(0.0, h),
        ]
    };
    let mut r = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for &(u, v, _) in &projected {
        r = [r[0].min(u), r[1].min(v), r[2].max(u), r[3].max(v)];
    }
    let r = clip(r);
    let (mx, my) = ((r[2] - r[0]) * CROP_MARGIN, (r[3] - r[1]) * CROP_MARGIN);
    let rect = clip([r[0] - mx, r[1] - my, r[2] + mx, r[3] + my]);
    if !(rect[0] < rect[2] && rect[1] < rect[3]) {
        return None;
    }
    let mean_depth_m = inside.iter().map(|c| c.2).sum::<f64>() / inside.len() as f64;
    Some(CropRegion {
        frame_id: view.frame_id.clone(),
        rect,
        visible_corners: inside.len(),
        mean_depth_m,
    })
}

fn rank(a: &CropRegion, b: &CropRegion) -> Ordering {
    b.visible_corners
        .cmp(&a.visible_corners)
        .then(b.area().partial_cmp(&a.area()).unwrap_or(Ordering::Equal))
        .then_with(|| a.frame_id.cmp(&b.frame_id))
}

/// The best `max_views` crops of `obj`: most visible corners first, then
/// largest area, then frame id.
pub fn select_views(obj: &SceneObject, views: &[View], max_views: usize) -> Vec<CropRegion> {
    let mut regions: Vec<CropRegion> = views.iter().filter_map(|v| project_box(obj, v)).collect();
    regions.sort_by(rank);
    regions.truncate(max_views.max(1));
    regions
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropEntry {
    pub object_id: u32,
    pub frame_id: String,
    pub rect: [f64; 4],
    pub visible_corners: usize,
    pub image: String,
}

/// Crops for every object of `scene`, ordered by object id then rank.
pub fn crop_manifest(scene: &Scene, max_views: usize) -> Vec<CropEntry> {
    scene
        .objects
        .par_iter()
        .map(|o| {
            select_views(o, &scene.views, max_views)
                .into_iter()
                .map(|r| CropEntry {
                    object_id: o.id,
                    image: scene
                        .views
                        .iter()
                        .find(|v| v.frame_id == r.frame_id)
                        .map(|v| v.image.clone())
                        .unwrap_or_default(),
                    frame_id: r.frame_id,
                    rect: r.rect,
                    visible_corners: r.visible_corners,
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn save_manifest(path: &Path, manifest: &[CropEntry]) -> Result<()> {
    io::write_json(path, manifest)
}

pub fn load_manifest(path: &Path) -> Result<Vec<CropEntry>> {
    io::read_json(path)
}
