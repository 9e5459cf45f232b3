//! Action-first step plans: parsing and plan accuracy.
//!
//! A plan is a list of steps, one per line or separated by inline `N.` /
//! `N)` numbering. Each step starts with its action verb and names objects
//! as `[label-id]`.
//!
//! Step `i` of a prediction matches step `i` of the reference when the
//! stemmed verbs agree and both steps reference the same set of objects.
//! Step accuracy (T_Acc) is the matched count over the longer plan's length.
//! Task accuracy (G_Acc) is 1 when every step matches and the plans
//! reference the same objects overall, else 0.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::text::stem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub index: usize,
    pub action_verb: String,
    pub target_refs: Vec<(String, u32)>,
    pub raw_text: String,
}

fn numbering() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|\s)\d+[.)](?:\s+|$)").expect("valid regex"))
}

fn reference() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[([^\[\]]+)-(\d+)\]").expect("valid regex"))
}

/// `[label-id]` mentions in order of appearance.
pub fn extract_refs(text: &str) -> Vec<(String, u32)> {
    reference()
        .captures_iter(text)
        .filter_map(|c| Some((c[1].to_string(), c[2].parse().ok()?)))
        .collect()
}

pub fn parse_plan(text: &str) -> Result<Vec<PlanStep>> {
    let mut steps = Vec::new();
    for line in text.lines() {
        for seg in numbering().split(line) {
            let seg = seg.trim().trim_start_matches(['-', '*', '•']).trim();
            if seg.is_empty() {
                continue;
            }
            let first = seg
                .split_whitespace()
                .next()
                .unwrap_or_default()
                .trim_matches(|c: char| !c.is_alphanumeric());
            if first.is_empty() || !first.chars().all(char::is_alphabetic) {
                return Err(Error::Parse(format!("step {:?} does not start with a verb", seg)));
            }
            steps.push(PlanStep {
                index: steps.len() + 1,
                action_verb: first.to_lowercase(),
                target_refs: extract_refs(seg),
                raw_text: seg.to_string(),
            });
        }
    }
    Ok(steps)
}

fn ref_set(step: &PlanStep) -> BTreeSet<&(String, u32)> {
    step.target_refs.iter().collect()
}

fn all_refs(steps: &[PlanStep]) -> BTreeSet<&(String, u32)> {
    steps.iter().flat_map(|x| x.target_refs.iter()).collect()
}

fn steps_match(a: &PlanStep, b: &PlanStep) -> bool {
    stem(&a.action_verb) == stem(&b.action_verb) && ref_set(a) == ref_set(b)
}

/// `(G_Acc, T_Acc)` contributions of one predicted plan.
pub fn plan_scores(pred: &[PlanStep], gt: &[PlanStep]) -> (f64, f64) {
    let longest = pred.len().max(gt.len());
    if longest == 0 {
        return (1.0, 1.0);
    }
    let matched = pred.iter().zip(gt).filter(|(p, g)| steps_match(p, g)).count();
    let task = matched == longest && all_refs(pred) == all_refs(gt);
    (if task { 1.0 } else { 0.0 }, matched as f64 / longest as f64)
}
