//! Pairwise spatial-relation inference and scene-graph assembly.
//!
//! For an ordered pair `(a, b)` the reasoner answers "where is `a` relative to
//! `b`, as seen from the reference camera". The decision cascade is:
//!
//! 1. a semantic prior matching `(a.label, b.label)` wins outright;
//! 2. otherwise, if the centroids are closer than `beta` times the largest
//!    extent of either box, the pair is `nearby` (and, by default, nothing
//!    else is said about it);
//! 3. otherwise the offset `r = a - b` is split into a vertical part (sign of
//!    `r · up`) and a horizontal part. The horizontal angle is measured
//!    clockwise from the camera forward axis, seen from above, and yields a
//!    coarse front/behind/left/right tag plus an o'clock sector.
//!
//! Directions are always camera-allocentric; object orientation is ignored.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::io;
use crate::scene::{CameraPose, PriorTable, Scene, SceneObject};

/// Projected horizontal norms at or below this are treated as straight up/down.
pub const DEGENERATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationTag {
    Prior(String),
    Nearby,
    Above,
    Below,
    InFrontOf,
    Behind,
    LeftOf,
    RightOf,
    /// Clock hour in `1..=12`; 12 is straight ahead along the camera axis.
    OClock(u8),
}

impl RelationTag {
    pub fn is_horizontal(&self) -> bool {
        matches!(
            self,
            RelationTag::InFrontOf | RelationTag::Behind | RelationTag::LeftOf | RelationTag::RightOf
        )
    }

    pub fn is_vertical(&self) -> bool {
        matches!(self, RelationTag::Above | RelationTag::Below)
    }
}

impl fmt::Display for RelationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationTag::Prior(t) => write!(f, "prior:{t}"),
            RelationTag::Nearby => f.write_str("nearby"),
            RelationTag::Above => f.write_str("above"),
            RelationTag::Below => f.write_str("below"),
            RelationTag::InFrontOf => f.write_str("in_front_of"),
            RelationTag::Behind => f.write_str("behind"),
            RelationTag::LeftOf => f.write_str("left_of"),
            RelationTag::RightOf => f.write_str("right_of"),
            RelationTag::OClock(h) => write!(f, "oclock_{h}"),
        }
    }
}

impl FromStr for RelationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nearby" => RelationTag::Nearby,
            "above" => RelationTag::Above,
            "below" => RelationTag::Below,
            "in_front_of" => RelationTag::InFrontOf,
            "behind" => RelationTag::Behind,
            "left_of" => RelationTag::LeftOf,
            "right_of" => RelationTag::RightOf,
            _ => {
                if let Some(text) = s.strip_prefix("prior:") {
                    if text.is_empty() {
                        return Err(Error::Schema("empty prior relation tag".into()));
                    }
                    RelationTag::Prior(text.to_string())
                } else if let Some(h) = s.strip_prefix("oclock_") {
                    match h.parse::<u8>() {
                        Ok(h @ 1..=12) => RelationTag::OClock(h),
                        _ => return Err(Error::Schema(format!("bad o'clock tag {s:?}"))),
                    }
                } else {
                    return Err(Error::Schema(format!("unknown relation tag {s:?}")));
                }
            }
        })
    }
}

impl Serialize for RelationTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RelationTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTriplet {
    pub subject: u32,
    pub object: u32,
    pub tags: BTreeSet<RelationTag>,
    pub distance_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
}

impl RelationTriplet {
    pub fn has(&self, tag: &RelationTag) -> bool {
        self.tags.contains(tag)
    }

    pub fn prior(&self) -> Option<&str> {
        self.tags.iter().find_map(|t| match t {
            RelationTag::Prior(p) => Some(p.as_str()),
            _ => None,
        })
    }

    pub fn oclock(&self) -> Option<u8> {
        self.tags.iter().find_map(|t| match t {
            RelationTag::OClock(h) => Some(*h),
            _ => None,
        })
    }

    /// Checks the structural invariants of a triplet.
    pub fn validate(&self) -> Result<()> {
        use RelationTag::*;
        let bad = |m: &str| Error::Validation(format!("triplet {}->{}: {m}", self.subject, self.object));
        if self.subject == self.object {
            return Err(bad("self relation"));
        }
        if self.tags.is_empty() {
            return Err(bad("no tags"));
        }
        for (x, y) in [(InFrontOf, Behind), (LeftOf, RightOf), (Above, Below)] {
            if self.has(&x) && self.has(&y) {
                return Err(bad("contradictory tags"));
            }
        }
        let directional = self.tags.iter().any(|t| t.is_horizontal() || matches!(t, OClock(_)));
        if directional && self.theta_deg.is_none() {
            return Err(bad("directional tag without angle"));
        }
        if let Some(t) = self.theta_deg {
            if !(0.0..360.0).contains(&t) {
                return Err(bad("angle out of range"));
            }
        }
        Ok(())
    }
}

/// Which axis decides above/below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VerticalAxis {
    /// The camera up vector.
    #[default]
    CameraUp,
    /// The configured world up axis (`ReasonerConfig::world_up`).
    WorldUp,
    /// The camera forward vector.
    CameraForward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReasonerConfig {
    pub beta: f64,
    pub theta_tol_deg: f64,
    pub n_sectors: u32,
    /// Nearest neighbors kept per object when pruning the graph.
    pub saliency_m: usize,
    /// When true a `nearby` pair gets no directional tags.
    pub nearby_exclusive: bool,
    pub vertical_axis: VerticalAxis,
    pub world_up: Vec3,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            theta_tol_deg: 30.0,
            n_sectors: 12,
            saliency_m: 5,
            nearby_exclusive: true,
            vertical_axis: VerticalAxis::CameraUp,
            world_up: Vec3::Z,
        }
    }
}

impl ReasonerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be > 0, got {}", self.beta));
        }
        if !(self.theta_tol_deg > 0.0 && self.theta_tol_deg < 90.0) {
            return bad(format!("theta_tol_deg must lie in (0, 90), got {}", self.theta_tol_deg));
        }
        if self.n_sectors < 4 {
            return bad(format!("n_sectors must be >= 4, got {}", self.n_sectors));
        }
        if self.saliency_m < 1 {
            return bad("saliency_m must be >= 1".into());
        }
        if self.world_up.normalized().is_none() {
            return bad("world_up must be non-zero".into());
        }
        Ok(())
    }

    fn up_axis(&self, cam: &CameraPose) -> Vec3 {
        match self.vertical_axis {
            VerticalAxis::CameraUp => cam.up,
            VerticalAxis::WorldUp => self.world_up.normalized().unwrap_or(Vec3::Z),
            VerticalAxis::CameraForward => cam.forward,
        }
    }
}

pub fn euclidean_distance(a: Vec3, b: Vec3) -> f64 {
    (a - b).norm()
}

/// Adaptive proximity test: closer than `beta` times the largest single
/// extent of either box.
pub fn is_nearby(a: &SceneObject, b: &SceneObject, beta: f64) -> bool {
    let largest = a.size.max_component().max(b.size.max_component());
    euclidean_distance(a.centroid, b.centroid) < beta * largest
}

/// Clockwise angle in degrees, `[0, 360)`, from the camera forward axis to
/// `r` after both are projected onto the plane orthogonal to the camera up
/// vector. Viewed from above, 90 is to the camera's right.
pub fn horizontal_angle(r: Vec3, cam: &CameraPose) -> Result<f64> {
    let basis = cam.basis();
    let up = basis.up;
    let forward = basis.forward.reject_from(up).normalized().unwrap_or(basis.forward);
    let right = forward.cross(up);
    let flat = r.reject_from(up);
    let n = flat.norm();
    if n <= DEGENERATE_TOL {
        return Err(Error::DegenerateDirection(n));
    }
    let mut deg = flat.dot(right).atan2(flat.dot(forward)).to_degrees();
    if deg < 0.0 {
        deg += 360.0;
    }
    if deg >= 360.0 {
        deg -= 360.0;
    }
    Ok(deg)
}

/// Map an angle to a clock hour. The angle is first snapped to the nearest of
/// `n_sectors` sector centers (sector 0 centred on straight ahead), then the
/// snapped angle is read on a 12-hour dial. 0 maps to 12.
pub fn sector_label(theta_deg: f64, n_sectors: u32) -> u8 {
    let width = 360.0 / n_sectors as f64;
    let snapped = (theta_deg / width).round() * width;
    let hour = ((snapped / 30.0).round() as i64).rem_euclid(12);
    if hour == 0 {
        12
    } else {
        hour as u8
    }
}

fn horizontal_tag(theta: f64, tol: f64) -> Option<RelationTag> {
    if theta.min(360.0 - theta) < tol {
        Some(RelationTag::InFrontOf)
    } else if (theta - 180.0).abs() < tol {
        Some(RelationTag::Behind)
    } else if theta > tol && theta < 180.0 - tol {
        Some(RelationTag::RightOf)
    } else if theta > 180.0 + tol && theta < 360.0 - tol {
        Some(RelationTag::LeftOf)
    } else {
        None
    }
}

/// Relation of `a` (subject) to `b` (object) from the camera viewpoint.
pub fn relate_pair(
    a: &SceneObject,
    b: &SceneObject,
    cam: &CameraPose,
    priors: &PriorTable,
    cfg: &ReasonerConfig,
) -> RelationTriplet {
    debug_assert_ne!(a.id, b.id);
    let distance_m = euclidean_distance(a.centroid, b.centroid);
    let mut tags = BTreeSet::new();
    let done = |tags, theta_deg| RelationTriplet {
        subject: a.id,
        object: b.id,
        tags,
        distance_m,
        theta_deg,
    };

    if let Some(rel) = priors.lookup(&a.label, &b.label) {
        tags.insert(RelationTag::Prior(rel.to_string()));
        return done(tags, None);
    }
    if is_nearby(a, b, cfg.beta) {
        tags.insert(RelationTag::Nearby);
        if cfg.nearby_exclusive {
            return done(tags, None);
        }
    }

    let r = a.centroid - b.centroid;
    let v = r.dot(cfg.up_axis(cam));
    if v > 0.0 {
        tags.insert(RelationTag::Above);
    } else if v < 0.0 {
        tags.insert(RelationTag::Below);
    }

    let theta = horizontal_angle(r, cam).ok();
    if let Some(theta) = theta {
        if let Some(h) = horizontal_tag(theta, cfg.theta_tol_deg) {
            tags.insert(h);
        }
        tags.insert(RelationTag::OClock(sector_label(theta, cfg.n_sectors)));
    }
    // r = 0 always lands in the nearby branch, so some tag was emitted
    debug_assert!(!tags.is_empty());
    done(tags, theta)
}

/// Unordered object-id pairs kept after saliency pruning: each object's
/// `m` nearest neighbors (ties by id), symmetrized, plus every pair a prior
/// rule applies to in either direction.
pub fn salient_pairs(scene: &Scene, priors: &PriorTable, m: usize) -> BTreeSet<(u32, u32)> {
    let objs = &scene.objects;
    let mut kept = BTreeSet::new();
    for a in objs {
        let mut others: Vec<(f64, u32)> = objs
            .iter()
            .filter(|b| b.id != a.id)
            .map(|b| (euclidean_distance(a.centroid, b.centroid), b.id))
            .collect();
        others.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)));
        for &(_, id) in others.iter().take(m) {
            kept.insert((a.id.min(id), a.id.max(id)));
        }
    }
    if !priors.is_empty() {
        for a in objs {
            for b in objs {
                if a.id != b.id && priors.lookup(&a.label, &b.label).is_some() {
                    kept.insert((a.id.min(b.id), a.id.max(b.id)));
                }
            }
        }
    }
    kept
}

/// Salient relation triplets of a scene, both directions per kept pair,
/// sorted by `(subject, object)`.
pub fn build_scene_graph(scene: &Scene, priors: &PriorTable, cfg: &ReasonerConfig) -> Vec<RelationTriplet> {
    let index: HashMap<u32, &SceneObject> = scene.objects.iter().map(|o| (o.id, o)).collect();
    let ordered: Vec<(u32, u32)> = salient_pairs(scene, priors, cfg.saliency_m)
        .into_iter()
        .flat_map(|(a, b)| [(a, b), (b, a)])
        .collect();
    let mut graph: Vec<RelationTriplet> = ordered
        .par_iter()
        .map(|&(s, o)| relate_pair(index[&s], index[&o], &scene.camera, priors, cfg))
        .collect();
    graph.sort_by_key(|t| (t.subject, t.object));
    graph
}

pub fn save_graph(path: &Path, graph: &[RelationTriplet]) -> Result<()> {
    io::write_json(path, graph)
}

pub fn load_graph(path: &Path) -> Result<Vec<RelationTriplet>> {
    let graph: Vec<RelationTriplet> = io::read_json(path)?;
    for t in &graph {
        t.validate()?;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::PriorRule;

    fn cam() -> CameraPose {
        CameraPose::new(Vec3::ZERO, Vec3::Y, Vec3::Z)
    }

    fn cube(id: u32, label: &str, c: [f64; 3]) -> SceneObject {
        SceneObject::new(id, label, c.into(), Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(
            euclidean_distance(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 2.0, 3.0)),
            0.0
        );
        // sqrt(1 + 4 + 16) = sqrt(21)
        let d = euclidean_distance(Vec3::new(1.0, 1.0, 1.0), Vec3::new(2.0, 3.0, 5.0));
        assert!((d - 4.5826).abs() < 1e-4);
    }

    #[test]
    fn nearby_examples() {
        let a = SceneObject::new(0, "a", Vec3::ZERO, Vec3::new(0.2, 3.0, 0.1));
        let b = SceneObject::new(1, "b", Vec3::ZERO, Vec3::new(0.5, 0.5, 0.5));
        assert!(is_nearby(&a, &b, 1.0));
        assert!(!is_nearby(
            &cube(0, "a", [0.0; 3]),
            &cube(1, "b", [10.0, 0.0, 0.0]),
            1.0
        ));
        let c = SceneObject::new(0, "a", Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
        let d = SceneObject::new(1, "b", Vec3::new(1.4, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.5));
        assert!(is_nearby(&c, &d, 1.0));
        assert!(is_nearby(&d, &c, 1.0));
        assert!(!is_nearby(&c, &d, 0.9));
    }

    #[test]
    fn horizontal_angle_examples() {
        let c = cam();
        assert_eq!(horizontal_angle(Vec3::Y, &c).unwrap(), 0.0);
        assert!((horizontal_angle(Vec3::X, &c).unwrap() - 90.0).abs() < 1e-12);
        assert!((horizontal_angle(Vec3::new(-1.0, 1.0, 0.0), &c).unwrap() - 315.0).abs() < 1e-12);
        assert!((horizontal_angle(Vec3::new(0.0, -2.0, 5.0), &c).unwrap() - 180.0).abs() < 1e-12);
        assert!(matches!(
            horizontal_angle(Vec3::new(0.0, 0.0, 3.0), &c),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_label(0.0, 12), 12);
        assert_eq!(sector_label(90.0, 12), 3);
        assert_eq!(sector_label(200.0, 12), 7);
        assert_eq!(sector_label(359.0, 12), 12);
        assert_eq!(sector_label(14.9, 12), 12);
        assert_eq!(sector_label(15.1, 12), 1);
        // 8 sectors: 100 snaps to 90 -> 3 o'clock
        assert_eq!(sector_label(100.0, 8), 3);
        // 4 sectors: everything in (45, 135) reads as 3 o'clock
        assert_eq!(sector_label(60.0, 4), 3);
        assert_eq!(sector_label(130.0, 4), 3);
    }

    #[test]
    fn prior_short_circuits() {
        let priors = PriorTable::new(vec![PriorRule {
            subject_label: "monitor".into(),
            object_label: "desk".into(),
            relation: "on".into(),
            symmetric: false,
        }])
        .unwrap();
        let a = cube(0, "monitor", [50.0, 50.0, 50.0]);
        let b = cube(1, "desk", [0.0; 3]);
        let t = relate_pair(&a, &b, &cam(), &priors, &ReasonerConfig::default());
        assert_eq!(t.tags, BTreeSet::from([RelationTag::Prior("on".into())]));
        assert!(t.theta_deg.is_none());
        let back = relate_pair(&b, &a, &cam(), &priors, &ReasonerConfig::default());
        assert!(back.prior().is_none());
    }

    #[test]
    fn straight_ahead_has_no_vertical_tag() {
        let a = cube(0, "a", [0.0, 5.0, 0.0]);
        let b = cube(1, "b", [0.0; 3]);
        let t = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &ReasonerConfig::default());
        assert!(t.has(&RelationTag::InFrontOf));
        assert!(t.has(&RelationTag::OClock(12)));
        assert!(!t.has(&RelationTag::Above) && !t.has(&RelationTag::Below));
        assert_eq!(t.theta_deg, Some(0.0));
    }

    #[test]
    fn above_right_three_oclock() {
        let a = cube(0, "a", [3.0, 0.0, 2.0]);
        let b = cube(1, "b", [0.0; 3]);
        let t = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &ReasonerConfig::default());
        for tag in [RelationTag::Above, RelationTag::RightOf, RelationTag::OClock(3)] {
            assert!(t.has(&tag), "{tag} missing from {:?}", t.tags);
        }
        t.validate().unwrap();
    }

    #[test]
    fn nearby_exclusive_switch() {
        let a = cube(0, "a", [0.5, 0.5, 0.0]);
        let b = cube(1, "b", [0.0; 3]);
        let excl = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &ReasonerConfig::default());
        assert_eq!(excl.tags, BTreeSet::from([RelationTag::Nearby]));
        let cfg = ReasonerConfig {
            nearby_exclusive: false,
            ..Default::default()
        };
        let both = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &cfg);
        assert!(both.has(&RelationTag::Nearby));
        assert!(both.oclock().is_some());
    }

    #[test]
    fn directly_above_only_vertical() {
        let a = cube(0, "a", [0.0, 0.0, 5.0]);
        let b = cube(1, "b", [0.0; 3]);
        let t = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &ReasonerConfig::default());
        assert_eq!(t.tags, BTreeSet::from([RelationTag::Above]));
        assert!(t.theta_deg.is_none());
    }

    #[test]
    fn vertical_axis_variants() {
        let a = cube(0, "a", [0.0, 5.0, -3.0]);
        let b = cube(1, "b", [0.0; 3]);
        let mut cfg = ReasonerConfig::default();
        let t = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &cfg);
        assert!(t.has(&RelationTag::Below));
        cfg.vertical_axis = VerticalAxis::CameraForward;
        let t = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &cfg);
        assert!(t.has(&RelationTag::Above));
        cfg.vertical_axis = VerticalAxis::WorldUp;
        cfg.world_up = Vec3::new(0.0, 0.0, -1.0);
        let t = relate_pair(&a, &b, &cam(), &PriorTable::empty(), &cfg);
        assert!(t.has(&RelationTag::Above));
    }

    #[test]
    fn config_bounds() {
        assert!(ReasonerConfig::default().validate().is_ok());
        for cfg in [
            ReasonerConfig {
                beta: 0.0,
                ..Default::default()
            },
            ReasonerConfig {
                theta_tol_deg: 90.0,
                ..Default::default()
            },
            ReasonerConfig {
                n_sectors: 3,
                ..Default::default()
            },
            ReasonerConfig {
                saliency_m: 0,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn tag_spellings_round_trip() {
        for s in [
            "nearby",
            "above",
            "below",
            "in_front_of",
            "behind",
            "left_of",
            "right_of",
            "oclock_7",
            "prior:tucked under",
        ] {
            assert_eq!(s.parse::<RelationTag>().unwrap().to_string(), s);
        }
        assert!("oclock_13".parse::<RelationTag>().is_err());
        assert!("sideways".parse::<RelationTag>().is_err());
    }

    fn scene(objs: Vec<SceneObject>) -> Scene {
        Scene::new("t", cam(), objs, vec![]).unwrap()
    }

    #[test]
    fn graph_sizes() {
        let one = scene(vec![cube(0, "a", [0.0; 3])]);
        assert!(build_scene_graph(&one, &PriorTable::empty(), &ReasonerConfig::default()).is_empty());
        let three = scene(vec![
            cube(0, "a", [0.0; 3]),
            cube(1, "b", [4.0, 0.0, 0.0]),
            cube(2, "c", [0.0, 4.0, 1.0]),
        ]);
        let g = build_scene_graph(&three, &PriorTable::empty(), &ReasonerConfig::default());
        assert_eq!(g.len(), 6);
        let keys: Vec<_> = g.iter().map(|t| (t.subject, t.object)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn priors_force_pairs_past_pruning() {
        let mut objs: Vec<_> = (0..6).map(|i| cube(i, "box", [i as f64 * 2.0, 0.0, 0.0])).collect();
        objs.push(cube(6, "lamp", [100.0, 0.0, 0.0]));
        let s = scene(objs);
        let priors = PriorTable::new(vec![PriorRule {
            subject_label: "lamp".into(),
            object_label: "box".into(),
            relation: "lights".into(),
            symmetric: false,
        }])
        .unwrap();
        let cfg = ReasonerConfig {
            saliency_m: 1,
            ..Default::default()
        };
        let g = build_scene_graph(&s, &priors, &cfg);
        let lamp_edges = g
            .iter()
            .filter(|t| t.subject == 6 && t.prior() == Some("lights"))
            .count();
        assert_eq!(lamp_edges, 6);
        // reverse direction is kept but resolved geometrically
        assert!(g.iter().any(|t| t.object == 6 && t.subject == 0 && t.prior().is_none()));
    }

    #[test]
    fn graph_file_round_trip() {
        let s = scene(vec![cube(0, "a", [0.0; 3]), cube(1, "b", [4.0, 3.0, 1.0])]);
        let g = build_scene_graph(&s, &PriorTable::empty(), &ReasonerConfig::default());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.json");
        save_graph(&p, &g).unwrap();
        assert_eq!(load_graph(&p).unwrap(), g);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"oclock_"));
    }
}
