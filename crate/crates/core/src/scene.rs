//! Scene domain types, ingestion and validation.
//!
//! A scene is a set of labelled, box-shaped instances (the output of an
//! upstream instance segmenter) plus the reference camera that defines the
//! viewpoint for every directional relation. Boxes are stored as centroid and
//! full extents along the local x/y/z axes; an optional quaternion rotates
//! the local frame and is only used when projecting into images.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Quat, Vec3};
use crate::io;

const UNIT_TOL: f64 = 1e-6;
const ORTHO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    pub label: String,
    pub centroid: Vec3,
    /// Full extents along the local x, y, z axes.
    pub size: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Quat>,
}

impl SceneObject {
    pub fn new(id: u32, label: &str, centroid: Vec3, size: Vec3) -> Self {
        Self {
            id,
            label: label.to_string(),
            centroid,
            size,
            orientation: None,
        }
    }

    pub fn rotation(&self) -> Quat {
        self.orientation.unwrap_or_default()
    }

    /// The eight box corners in the scene frame.
    pub fn corners(&self) -> [Vec3; 8] {
        let h = self.size * 0.5;
        let q = self.rotation();
        let mut out = [Vec3::ZERO; 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *c = self.centroid + q.rotate(Vec3::new(sx * h.x, sy * h.y, sz * h.z));
        }
        out
    }

    /// Label with underscores turned into spaces, for prose.
    pub fn display_label(&self) -> String {
        self.label.replace('_', " ")
    }

    fn validate(&mut self) -> Result<()> {
        self.label = normalize_label(&self.label)
            .ok_or_else(|| Error::Validation(format!("object {}: invalid label {:?}", self.id, self.label)))?;
        if !self.centroid.is_finite() {
            return Err(Error::Validation(format!("object {}: non-finite centroid", self.id)));
        }
        if !self.size.is_finite() || self.size.min_component() <= 0.0 {
            return Err(Error::Validation(format!(
                "object {}: non-positive size {:?}",
                self.id,
                self.size.to_array()
            )));
        }
        if let Some(q) = self.orientation {
            if (q.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::Validation(format!(
                    "object {}: orientation is not a unit quaternion",
                    self.id
                )));
            }
            self.orientation = Some(q.normalized());
        }
        Ok(())
    }
}

/// Lowercase ASCII token; inner whitespace collapses to `_`.
pub fn normalize_label(raw: &str) -> Option<String> {
    let joined = raw.split_whitespace().collect::<Vec<_>>().join("_");
    if joined.is_empty() || !joined.is_ascii() {
        return None;
    }
    Some(joined.to_ascii_lowercase())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<Intrinsics>,
    /// `[width, height]` in pixels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_size: Option<[u32; 2]>,
}

/// Orthonormal camera basis: `right`, `down`, `forward` (OpenCV convention).
#[derive(Debug, Clone, Copy)]
pub struct CameraBasis {
    pub right: Vec3,
    pub down: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
}

impl CameraPose {
    pub fn new(position: Vec3, forward: Vec3, up: Vec3) -> Self {
        Self {
            position,
            forward,
            up,
            intrinsics: None,
            image_size: None,
        }
    }

    pub fn with_intrinsics(mut self, k: Intrinsics, width: u32, height: u32) -> Self {
        self.intrinsics = Some(k);
        self.image_size = Some([width, height]);
        self
    }

    /// Basis with `up` re-orthogonalized against `forward`.
    pub fn basis(&self) -> CameraBasis {
        let forward = self.forward;
        let up = self.up.reject_from(forward).normalized().unwrap_or(self.up);
        let right = forward.cross(up);
        CameraBasis {
            right,
            down: forward.cross(right),
            forward,
            up,
        }
    }

    pub fn world_to_camera(&self, p: Vec3) -> Vec3 {
        let b = self.basis();
        let d = p - self.position;
        Vec3::new(d.dot(b.right), d.dot(b.down), d.dot(b.forward))
    }

    pub fn validate(&self) -> Result<()> {
        let what = |m: &str| Error::Validation(format!("camera: {m}"));
        if !(self.position.is_finite() && self.forward.is_finite() && self.up.is_finite()) {
            return Err(what("non-finite vector"));
        }
        if (self.forward.norm() - 1.0).abs() > UNIT_TOL {
            return Err(what("forward is not a unit vector"));
        }
        if (self.up.norm() - 1.0).abs() > UNIT_TOL {
            return Err(what("up is not a unit vector"));
        }
        if self.forward.dot(self.up).abs() >= ORTHO_TOL {
            return Err(what("forward and up are not orthogonal"));
        }
        match (&self.intrinsics, &self.image_size) {
            (Some(k), Some([w, h])) => {
                if !(k.fx > 0.0 && k.fy > 0.0 && k.cx.is_finite() && k.cy.is_finite()) {
                    return Err(what("focal lengths must be positive"));
                }
                if *w == 0 || *h == 0 {
                    return Err(what("image size must be positive"));
                }
            }
            (None, None) => {}
            _ => return Err(what("intrinsics and image_size must be given together")),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub frame_id: String,
    pub camera: CameraPose,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_id: String,
    pub camera: CameraPose,
    pub objects: Vec<SceneObject>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub views: Vec<View>,
}

impl Scene {
    /// Validate and canonicalize (labels normalized, objects sorted by id).
    pub fn new(
        scene_id: impl Into<String>,
        camera: CameraPose,
        objects: Vec<SceneObject>,
        views: Vec<View>,
    ) -> Result<Scene> {
        Scene {
            scene_id: scene_id.into(),
            camera,
            objects,
            views,
        }
        .validated()
    }

    pub fn validated(mut self) -> Result<Scene> {
        if self.objects.is_empty() {
            return Err(Error::Validation("scene has no objects".into()));
        }
        self.camera.validate()?;
        let mut seen = HashSet::new();
        for o in &mut self.objects {
            if !seen.insert(o.id) {
                return Err(Error::Validation(format!("duplicate id {}", o.id)));
            }
            o.validate()?;
        }
        self.objects.sort_by_key(|o| o.id);
        for v in &self.views {
            v.camera.validate()?;
            if v.camera.intrinsics.is_none() {
                return Err(Error::Validation(format!("view {}: intrinsics required", v.frame_id)));
            }
        }
        Ok(self)
    }

    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn labels(&self) -> BTreeMap<u32, String> {
        self.objects.iter().map(|o| (o.id, o.label.clone())).collect()
    }
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let raw: Scene = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    raw.validated()
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = io::read_to_string(path)?;
    parse_scene(&text).map_err(|e| match e {
        Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save_scene(path: &Path, scene: &Scene) -> Result<()> {
    io::write_json(path, scene)
}

/// A label-pair rule whose relation overrides geometric reasoning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorRule {
    #[serde(rename = "subject")]
    pub subject_label: String,
    #[serde(rename = "object")]
    pub object_label: String,
    pub relation: String,
    #[serde(default)]
    pub symmetric: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorTable {
    rules: Vec<PriorRule>,
}

impl PriorTable {
    pub fn new(rules: Vec<PriorRule>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(rules.len());
        for mut r in rules {
            r.subject_label = normalize_label(&r.subject_label)
                .ok_or_else(|| Error::Validation(format!("prior: bad subject label {:?}", r.subject_label)))?;
            r.object_label = normalize_label(&r.object_label)
                .ok_or_else(|| Error::Validation(format!("prior: bad object label {:?}", r.object_label)))?;
            r.relation = r.relation.trim().to_string();
            if r.relation.is_empty() {
                return Err(Error::Validation("prior: empty relation".into()));
            }
            if !seen.insert((r.subject_label.clone(), r.object_label.clone())) {
                return Err(Error::Validation(format!(
                    "prior: duplicate pair ({}, {})",
                    r.subject_label, r.object_label
                )));
            }
            out.push(r);
        }
        Ok(Self { rules: out })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rules(&self) -> &[PriorRule] {
        &self.rules
    }

    /// Relation text for `subject` relative to `object`, if a rule applies.
    /// Direct matches win over symmetric reverse matches.
    pub fn lookup(&self, subject: &str, object: &str) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| r.subject_label == subject && r.object_label == object)
            .or_else(|| {
                self.rules
                    .iter()
                    .find(|r| r.symmetric && r.subject_label == object && r.object_label == subject)
            })
            .map(|r| r.relation.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

pub fn load_priors(path: &Path) -> Result<PriorTable> {
    let rules: Vec<PriorRule> = io::read_json(path)?;
    PriorTable::new(rules)
}
