//! Scene-to-language pipeline for 3D indoor scenes.
//!
//! The crate turns box-level instance data into a textual scene description
//! that a language model can consume, and scores what comes back:
//!
//! - [`scene`] / [`synth`]: domain types, scene files, synthetic scenes;
//! - [`reasoner`]: pairwise spatial relations and the pruned scene graph;
//! - [`projection`]: box-to-image projection and crop selection;
//! - [`caption`]: caption candidate ranking and fusion through providers;
//! - [`scene_info`]: the three-part scene description in three verbosity modes;
//! - [`reflection`]: judge-and-correct refinement of captions and relations;
//! - [`selection`]: token-level relevance scoring and top-k prompt assembly;
//! - [`metrics`]: grounding, QA, captioning and plan metrics;
//! - [`pipeline`]: the file-based stages behind the `scenelang` binary.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod caption;
pub mod config;
pub mod embed;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod provider;
pub mod reasoner;
pub mod reflection;
pub mod scene;
pub mod scene_info;
pub mod selection;
pub mod synth;

pub use error::{Error, ProviderError, Result};
pub use geometry::{Quat, Vec3};
pub use reasoner::{build_scene_graph, relate_pair, ReasonerConfig, RelationTag, RelationTriplet};
pub use scene::{load_scene, save_scene, CameraPose, PriorRule, PriorTable, Scene, SceneObject};
