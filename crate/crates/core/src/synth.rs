//! Deterministic synthetic indoor scenes.
//!
//! Objects are non-overlapping axis-aligned boxes placed by rejection
//! sampling inside a room spanning `[0, extent]` on every axis. The reference
//! camera stands on one wall, looks horizontally at the room center, and has
//! `up = +z`. Four extra views look in from the corners so projection and
//! cropping can be exercised.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::{CameraPose, Intrinsics, PriorRule, PriorTable, Scene, SceneObject, View};

const ATTEMPTS_PER_OBJECT: usize = 1000;

/// Nominal extents (x, y, z) in meters for the label vocabulary.
const VOCABULARY: &[(&str, [f64; 3])] = &[
    ("chair", [0.5, 0.5, 0.9]),
    ("table", [1.2, 0.8, 0.75]),
    ("desk", [1.4, 0.7, 0.75]),
    ("lamp", [0.3, 0.3, 1.5]),
    ("sofa", [2.0, 0.9, 0.85]),
    ("bed", [2.0, 1.6, 0.6]),
    ("cabinet", [0.8, 0.5, 1.2]),
    ("bookshelf", [0.9, 0.35, 1.8]),
    ("monitor", [0.55, 0.2, 0.4]),
    ("plant", [0.4, 0.4, 0.8]),
    ("trash_can", [0.3, 0.3, 0.4]),
    ("pillow", [0.5, 0.35, 0.15]),
    ("box", [0.4, 0.3, 0.3]),
    ("tv", [1.1, 0.1, 0.65]),
    ("armchair", [0.8, 0.8, 0.9]),
    ("nightstand", [0.45, 0.4, 0.55]),
    ("dresser", [1.2, 0.5, 0.9]),
    ("whiteboard", [1.8, 0.05, 1.2]),
    ("backpack", [0.35, 0.2, 0.45]),
    ("stool", [0.35, 0.35, 0.45]),
];

pub const CAMERA_HEIGHT: f64 = 1.6;

/// A room extent that comfortably fits `n` furniture-sized objects.
pub fn default_room_extent(n_objects: usize) -> Vec3 {
    let w = 4.0 + 1.2 * (n_objects as f64).sqrt();
    Vec3::new(w, 0.8 * w, 3.0)
}

fn overlaps(a_min: Vec3, a_max: Vec3, b_min: Vec3, b_max: Vec3) -> bool {
    a_min.x < b_max.x
        && b_min.x < a_max.x
        && a_min.y < b_max.y
        && b_min.y < a_max.y
        && a_min.z < b_max.z
        && b_min.z < a_max.z
}

fn horizontal_look(from: Vec3, at: Vec3) -> Vec3 {
    Vec3::new(at.x - from.x, at.y - from.y, 0.0)
        .normalized()
        .unwrap_or(Vec3::Y)
}

fn default_intrinsics() -> Intrinsics {
    Intrinsics {
        fx: 525.0,
        fy: 525.0,
        cx: 320.0,
        cy: 240.0,
    }
}

pub fn generate_synthetic_scene(seed: u64, n_objects: usize, room_extent: Vec3) -> Result<Scene> {
    if n_objects == 0 {
        return Err(Error::Validation("n_objects must be at least 1".into()));
    }
    if !room_extent.is_finite() || room_extent.min_component() <= 0.0 {
        return Err(Error::Validation("room extent must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(Vec3, Vec3)> = Vec::with_capacity(n_objects);
    let mut objects = Vec::with_capacity(n_objects);
    let mut attempts = 0usize;
    let budget = ATTEMPTS_PER_OBJECT * n_objects;

    while objects.len() < n_objects {
        if attempts >= budget {
            return Err(Error::Placement {
                requested: n_objects,
                placed: objects.len(),
                attempts,
            });
        }
        attempts += 1;
        let (label, nominal) = VOCABULARY[rng.gen_range(0..VOCABULARY.len())];
        let size = Vec3::new(
            nominal[0] * rng.gen_range(0.8..1.2),
            nominal[1] * rng.gen_range(0.8..1.2),
            nominal[2] * rng.gen_range(0.8..1.2),
        );
        if size.x >= room_extent.x || size.y >= room_extent.y || size.z >= room_extent.z {
            continue;
        }
        let half = size * 0.5;
        let cx = rng.gen_range(half.x..room_extent.x - half.x);
        let cy = rng.gen_range(half.y..room_extent.y - half.y);
        // most furniture stands on the floor, the rest sits on something
        let cz = if rng.gen_bool(0.6) {
            half.z
        } else {
            rng.gen_range(half.z..room_extent.z - half.z)
        };
        let centroid = Vec3::new(cx, cy, cz);
        let (lo, hi) = (centroid - half, centroid + half);
        if placed.iter().any(|&(bl, bh)| overlaps(lo, hi, bl, bh)) {
            continue;
        }
        placed.push((lo, hi));
        objects.push(SceneObject::new(objects.len() as u32, label, centroid, size));
    }

    let center = Vec3::new(room_extent.x * 0.5, room_extent.y * 0.5, 0.0);
    let cam_z = CAMERA_HEIGHT.min(room_extent.z * 0.6);
    let walls = [
        Vec3::new(room_extent.x * 0.5, 0.0, cam_z),
        Vec3::new(room_extent.x, room_extent.y * 0.5, cam_z),
        Vec3::new(room_extent.x * 0.5, room_extent.y, cam_z),
        Vec3::new(0.0, room_extent.y * 0.5, cam_z),
    ];
    let position = *walls.choose(&mut rng).expect("non-empty");
    let camera = CameraPose::new(position, horizontal_look(position, center), Vec3::Z).with_intrinsics(
        default_intrinsics(),
        640,
        480,
    );

    let corners = [
        Vec3::new(0.0, 0.0, cam_z),
        Vec3::new(room_extent.x, 0.0, cam_z),
        Vec3::new(room_extent.x, room_extent.y, cam_z),
        Vec3::new(0.0, room_extent.y, cam_z),
    ];
    let views = corners
        .iter()
        .enumerate()
        .map(|(i, &p)| View {
            frame_id: format!("frame-{i:03}"),
            camera: CameraPose::new(p, horizontal_look(p, center), Vec3::Z).with_intrinsics(
                default_intrinsics(),
                640,
                480,
            ),
            image: format!("frames/frame-{i:03}.jpg"),
        })
        .collect();

    Scene::new(format!("synthetic-{seed}-{n_objects}"), camera, objects, views)
}

/// A small semantic prior table over the synthetic vocabulary.
pub fn default_priors() -> PriorTable {
    let rule = |s: &str, o: &str, r: &str, symmetric| PriorRule {
        subject_label: s.into(),
        object_label: o.into(),
        relation: r.into(),
        symmetric,
    };
    PriorTable::new(vec![
        rule("monitor", "desk", "on", false),
        rule("pillow", "bed", "on", false),
        rule("chair", "desk", "tucked under", false),
        rule("stool", "table", "tucked under", false),
        rule("nightstand", "bed", "beside", true),
    ])
    .expect("static prior table is valid")
}

/// Reference captions per object, for scoring generated captions.
pub fn synthetic_references(scene: &Scene, seed: u64) -> std::collections::BTreeMap<u32, Vec<String>> {
    const SHADES: &[&str] = &["white", "black", "gray", "brown", "wooden"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7265_6673);
    scene
        .objects
        .iter()
        .map(|o| {
            let label = o.display_label();
            let shade = SHADES[rng.gen_range(0..SHADES.len())];
            (
                o.id,
                vec![
                    format!("a {label}"),
                    format!("a {shade} {label}"),
                    format!("the {label} in the room"),
                ],
            )
        })
        .collect()
}
