//! Judge-and-correct refinement of a scene description.
//!
//! Every caption and relation sentence is scored by a [`Judge`]; items
//! scoring below `tau` are rewritten by a [`Corrector`]. All scores of a
//! round are collected before any replacement is applied, so the outcome
//! does not depend on evaluation order.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ProviderError, Result};
use crate::io;
use crate::projection::select_views;
use crate::provider::run_bounded;
use crate::reasoner::{relate_pair, ReasonerConfig, RelationTag};
use crate::scene::{PriorTable, Scene};
use crate::scene_info::{render_coordinate, render_relation, ExpressionMode, SceneInformation};

pub const DEFAULT_TAU: f64 = 0.5;
pub const MAX_ROUNDS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Caption,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    /// `"<id>"` for captions and coordinate sentences, `"<subject>-<object>"`
    /// for relations.
    pub item_id: String,
    pub kind: ItemKind,
    pub round: u32,
    pub score: f64,
    pub replaced: bool,
    pub old_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptionQuery {
    pub object_id: u32,
    pub label: String,
    pub text: String,
    pub prompt: String,
    /// Candidate labels, present when ground-truth labels are known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationQuery {
    pub subject: u32,
    pub object: Option<u32>,
    pub tags: BTreeSet<RelationTag>,
    pub text: String,
    pub images: Vec<String>,
}

pub trait Judge: Send + Sync {
    /// Index into `q.choices` of the object the caption describes.
    fn pick_object(&self, q: &CaptionQuery) -> std::result::Result<Option<usize>, ProviderError>;
    /// Direct caption quality in `[0, 1]`.
    fn score_caption(&self, q: &CaptionQuery) -> std::result::Result<f64, ProviderError>;
    fn score_relation(&self, q: &RelationQuery) -> std::result::Result<f64, ProviderError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub text: String,
    pub tags: Option<BTreeSet<RelationTag>>,
}

pub trait Corrector: Send + Sync {
    fn correct_caption(&self, q: &CaptionQuery) -> std::result::Result<String, ProviderError>;
    fn correct_relation(&self, q: &RelationQuery) -> std::result::Result<Correction, ProviderError>;
}

fn contains_phrase(text: &str, phrase: &str) -> bool {
    let hay = crate::embed::words(text);
    let needle = crate::embed::words(phrase);
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle.as_slice())
}

/// Offline judge and corrector backed by the scene itself.
///
/// Captions pass when they name the object's label. Relations pass when
/// their tags equal a fresh run of the spatial reasoner; coordinate
/// sentences pass when they equal a fresh rendering.
pub struct RuleBased<'a> {
    pub scene: &'a Scene,
    pub priors: &'a PriorTable,
    pub cfg: &'a ReasonerConfig,
    pub mode: ExpressionMode,
}

impl RuleBased<'_> {
    fn recompute(&self, q: &RelationQuery) -> std::result::Result<Correction, ProviderError> {
        let missing = |id| ProviderError::Malformed(format!("object {id} not in scene"));
        let a = self.scene.object(q.subject).ok_or_else(|| missing(q.subject))?;
        let Some(object) = q.object else {
            return Ok(Correction {
                text: render_coordinate(a),
                tags: None,
            });
        };
        let b = self.scene.object(object).ok_or_else(|| missing(object))?;
        let t = relate_pair(a, b, &self.scene.camera, self.priors, self.cfg);
        let text = render_relation(&t, &self.scene.labels(), self.mode)
            .map_err(|e| ProviderError::Malformed(e.to_string()))?;
        Ok(Correction {
            text,
            tags: Some(t.tags),
        })
    }
}

impl Judge for RuleBased<'_> {
    fn pick_object(&self, q: &CaptionQuery) -> std::result::Result<Option<usize>, ProviderError> {
        let choices = q.choices.as_deref().unwrap_or_default();
        Ok(choices
            .iter()
            .position(|c| contains_phrase(&q.text, &c.replace('_', " "))))
    }

    fn score_caption(&self, q: &CaptionQuery) -> std::result::Result<f64, ProviderError> {
        Ok(if contains_phrase(&q.text, &q.label.replace('_', " ")) {
            1.0
        } else {
            0.0
        })
    }

    fn score_relation(&self, q: &RelationQuery) -> std::result::Result<f64, ProviderError> {
        let fresh = self.recompute(q)?;
        let ok = match fresh.tags {
            Some(tags) => tags == q.tags,
            None => fresh.text == q.text,
        };
        Ok(if ok { 1.0 } else { 0.0 })
    }
}

impl Corrector for RuleBased<'_> {
    fn correct_caption(&self, q: &CaptionQuery) -> std::result::Result<String, ProviderError> {
        Ok(format!("A {}.", q.label.replace('_', " ")))
    }

    fn correct_relation(&self, q: &RelationQuery) -> std::result::Result<Correction, ProviderError> {
        self.recompute(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReflectConfig {
    pub tau: f64,
    pub rounds: u32,
    pub max_in_flight: usize,
}

impl Default for ReflectConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            rounds: 1,
            max_in_flight: 4,
        }
    }
}

impl ReflectConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        if !(1..=MAX_ROUNDS).contains(&self.rounds) {
            return Err(Error::Config(format!(
                "reflection rounds must be 1..={MAX_ROUNDS}, got {}",
                self.rounds
            )));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

enum Query {
    Caption(usize, CaptionQuery),
    Relation(usize, RelationQuery),
}

enum Outcome {
    Keep,
    Caption(String),
    Relation(Correction),
}

fn images_for(scene: &Scene, ids: &[u32]) -> Vec<String> {
    let mut out = Vec::new();
    for id in ids {
        if let Some(o) = scene.object(*id) {
            for r in select_views(o, &scene.views, 1) {
                if let Some(v) = scene.views.iter().find(|v| v.frame_id == r.frame_id) {
                    if !out.contains(&v.image) {
                        out.push(v.image.clone());
                    }
                }
            }
        }
    }
    out
}

/// Refine `info`. Returns the updated description and one report per item
/// per round. With `gt` labels, captions are judged by whether the judge can
/// pick the right label from the ground-truth label set.
pub fn reflect(
    info: &SceneInformation,
    scene: &Scene,
    judge: &dyn Judge,
    corrector: &dyn Corrector,
    cfg: &ReflectConfig,
    gt: Option<&BTreeMap<u32, String>>,
) -> Result<(SceneInformation, Vec<ReflectionReport>)> {
    cfg.validate()?;
    info.validate()?;
    let choices: Option<Vec<String>> = gt.map(|g| g.values().cloned().collect::<BTreeSet<_>>().into_iter().collect());
    let mut current = info.clone();
    let mut reports = Vec::new();

    for round in 1..=cfg.rounds {
        let mut queries: Vec<Query> = Vec::new();
        for (i, c) in current.captions.iter().enumerate() {
            queries.push(Query::Caption(
                i,
                CaptionQuery {
                    object_id: c.object_id,
                    label: c.label.clone(),
                    text: c.text.clone(),
                    prompt: "Which object does this caption describe?".into(),
                    choices: choices.clone(),
                    images: images_for(scene, &[c.object_id]),
                },
            ));
        }
        for (i, r) in current.relations.iter().enumerate() {
            let ids: Vec<u32> = std::iter::once(r.subject).chain(r.object).collect();
            queries.push(Query::Relation(
                i,
                RelationQuery {
                    subject: r.subject,
                    object: r.object,
                    tags: r.tags.clone(),
                    text: r.text.clone(),
                    images: images_for(scene, &ids),
                },
            ));
        }

        let scored: Vec<std::result::Result<f64, ProviderError>> =
            run_bounded(&queries, cfg.max_in_flight, |q| match q {
                Query::Caption(i, cq) => match (gt, &cq.choices) {
                    (Some(g), Some(ch)) => judge.pick_object(cq).map(|p| {
                        let want = g.get(&current.captions[*i].object_id);
                        let hit = p.and_then(|k| ch.get(k)).is_some_and(|l| Some(l) == want);
                        if hit {
                            1.0
                        } else {
                            0.0
                        }
                    }),
                    _ => judge.score_caption(cq),
                },
                Query::Relation(_, rq) => judge.score_relation(rq),
            });

        let corrected: Vec<std::result::Result<Outcome, ProviderError>> = run_bounded(
            &queries.iter().zip(&scored).collect::<Vec<_>>(),
            cfg.max_in_flight,
            |(q, s)| match s {
                Ok(s) if *s < cfg.tau => match q {
                    Query::Caption(_, cq) => corrector.correct_caption(cq).map(Outcome::Caption),
                    Query::Relation(_, rq) => corrector.correct_relation(rq).map(Outcome::Relation),
                },
                _ => Ok(Outcome::Keep),
            },
        );

        let mut changed = false;
        for ((q, s), outcome) in queries.iter().zip(scored).zip(corrected) {
            let (item_id, kind, old_text) = match q {
                Query::Caption(_, cq) => (cq.object_id.to_string(), ItemKind::Caption, cq.text.clone()),
                Query::Relation(_, rq) => (
                    match rq.object {
                        Some(o) => format!("{}-{o}", rq.subject),
                        None => rq.subject.to_string(),
                    },
                    ItemKind::Relation,
                    rq.text.clone(),
                ),
            };
            let mut report = ReflectionReport {
                item_id,
                kind,
                round,
                score: *s.as_ref().unwrap_or(&0.0),
                replaced: false,
                old_text: old_text.clone(),
                new_text: None,
                error: s.as_ref().err().map(|e| e.to_string()),
            };
            match outcome {
                Ok(Outcome::Keep) => {}
                Err(e) => report.error = Some(e.to_string()),
                Ok(Outcome::Caption(t)) | Ok(Outcome::Relation(Correction { text: t, .. }))
                    if t.trim().is_empty() || t.trim() == old_text =>
                {
                    report.error = Some("correction left the text unchanged".into());
                }
                Ok(Outcome::Caption(t)) => {
                    let Query::Caption(i, _) = q else { unreachable!() };
                    let c = &mut current.captions[*i];
                    c.text = t.trim().to_string();
                    c.refined = true;
                    report.replaced = true;
                    report.new_text = Some(c.text.clone());
                }
                Ok(Outcome::Relation(corr)) => {
                    let Query::Relation(i, _) = q else { unreachable!() };
                    let r = &mut current.relations[*i];
                    r.text = corr.text.trim().to_string();
                    if let Some(tags) = corr.tags {
                        r.tags = tags;
                    }
                    report.replaced = true;
                    report.new_text = Some(r.text.clone());
                }
            }
            changed |= report.replaced;
            reports.push(report);
        }
        if !changed {
            break;
        }
    }
    current.recount();
    Ok((current, reports))
}

pub fn save_reports(path: &Path, reports: &[ReflectionReport]) -> Result<()> {
    io::write_json(path, reports)
}
