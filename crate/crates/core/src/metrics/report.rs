//! Predictions file evaluation.
//!
//! One JSON record per line: `{"id", "pred", "gt"}` with an optional
//! `"kind"`. Payload shapes:
//!
//! | kind    | pred                          | gt                                   |
//! |---------|-------------------------------|--------------------------------------|
//! | `text`  | string                        | string or array of strings           |
//! | `box`   | `[cx, cy, cz, w, h, l]`       | same                                 |
//! | `boxes` | array of boxes                | array of boxes                       |
//! | `dense` | `{"box", "caption"}`          | `{"box", "captions"}` or `"caption"` |
//! | `plan`  | `{"plan": text}`              | `{"plan": text}`                     |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io;
use crate::metrics::cider::cider_scores;
use crate::metrics::{
    bleu4, cider, em_refined, exact_match, grounding::iou3, meteor_simplified, multi_object_f1, parse_plan,
    plan_scores, rouge_l, Box3,
};

pub const METRICS: &[&str] = &[
    "acc@0.25", "acc@0.5", "f1@0.25", "f1@0.5", "em", "em_r", "bleu4", "rouge_l", "meteor_s", "cider", "c@0.5",
    "b4@0.5", "g_acc", "t_acc",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Text {
        pred: String,
        refs: Vec<String>,
    },
    Box {
        pred: Box3,
        gt: Box3,
    },
    Boxes {
        pred: Vec<Box3>,
        gt: Vec<Box3>,
    },
    Dense {
        pred_box: Box3,
        caption: String,
        gt_box: Box3,
        refs: Vec<String>,
    },
    Plan {
        pred: String,
        gt: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub sample: Sample,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Value,
    #[serde(default)]
    kind: Option<String>,
    pred: Value,
    gt: Value,
}

fn schema(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Schema(format!("predictions line {line}: {msg}"))
}

fn strings(v: &Value) -> Option<Vec<String>> {
    match v {
        Value::String(s) => Some(vec![s.clone()]),
        Value::Array(a) if !a.is_empty() => a.iter().map(|x| x.as_str().map(str::to_string)).collect(),
        _ => None,
    }
}

fn is_box(v: &Value) -> bool {
    matches!(v, Value::Array(a) if a.len() == 6 && a.iter().all(Value::is_number))
}

fn infer_kind(pred: &Value, gt: &Value) -> Option<&'static str> {
    if pred.is_string() {
        return Some("text");
    }
    if let Some(o) = pred.as_object() {
        if o.contains_key("plan") {
            return Some("plan");
        }
        if o.contains_key("box") {
            return Some("dense");
        }
    }
    if is_box(pred) && is_box(gt) {
        return Some("box");
    }
    if pred.is_array() && gt.is_array() {
        return Some("boxes");
    }
    None
}

fn parse_record(line: usize, raw: RawRecord) -> Result<Record> {
    let id = match raw.id {
        Value::String(s) => s,
        Value::Number(n) => n.to_string(),
        _ => return Err(schema(line, "`id` must be a string or number")),
    };
    let kind = match raw.kind.as_deref() {
        Some(k) => k,
        None => infer_kind(&raw.pred, &raw.gt).ok_or_else(|| schema(line, "cannot infer record kind"))?,
    };
    let as_box = |v: &Value| -> Result<Box3> {
        serde_json::from_value(v.clone()).map_err(|e| schema(line, format!("bad box: {e}")))
    };
    let text_of = |v: &Value, key: &str| -> Result<String> {
        v.get(key)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| schema(line, format!("missing string `{key}`")))
    };
    let sample = match kind {
        "text" => Sample::Text {
            pred: raw
                .pred
                .as_str()
                .ok_or_else(|| schema(line, "text pred must be a string"))?
                .to_string(),
            refs: strings(&raw.gt).ok_or_else(|| schema(line, "text gt must be a string or non-empty array"))?,
        },
        "box" => Sample::Box {
            pred: as_box(&raw.pred)?,
            gt: as_box(&raw.gt)?,
        },
        "boxes" => {
            let many = |v: &Value| -> Result<Vec<Box3>> {
                v.as_array()
                    .ok_or_else(|| schema(line, "boxes must be an array"))?
                    .iter()
                    .map(as_box)
                    .collect()
            };
            Sample::Boxes {
                pred: many(&raw.pred)?,
                gt: many(&raw.gt)?,
            }
        }
        "dense" => Sample::Dense {
            pred_box: as_box(raw.pred.get("box").unwrap_or(&Value::Null))?,
            caption: text_of(&raw.pred, "caption")?,
            gt_box: as_box(raw.gt.get("box").unwrap_or(&Value::Null))?,
            refs: raw
                .gt
                .get("captions")
                .or_else(|| raw.gt.get("caption"))
                .and_then(strings)
                .ok_or_else(|| schema(line, "dense gt needs `captions` or `caption`"))?,
        },
        "plan" => Sample::Plan {
            pred: text_of(&raw.pred, "plan")?,
            gt: text_of(&raw.gt, "plan")?,
        },
        other => return Err(schema(line, format!("unknown kind {other:?}"))),
    };
    Ok(Record { id, sample })
}

pub fn parse_predictions(text: &str) -> Result<Vec<Record>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let raw: RawRecord = serde_json::from_str(l).map_err(|e| schema(i + 1, e))?;
            parse_record(i + 1, raw)
        })
        .collect()
}

pub fn load_predictions(path: &Path) -> Result<Vec<Record>> {
    parse_predictions(&io::read_to_string(path)?)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Every applicable metric, or only those named in `only`. Metrics whose
/// record kind is absent are left out.
pub fn evaluate(records: &[Record], only: Option<&[String]>) -> Result<BTreeMap<String, f64>> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(names) = only {
        if let Some(bad) = names.iter().find(|n| !METRICS.contains(&n.as_str())) {
            return Err(Error::Config(format!(
                "unknown metric {bad:?}; known: {}",
                METRICS.join(", ")
            )));
        }
    }
    let wanted = |m: &str| only.is_none_or(|ns| ns.iter().any(|n| n == m));
    let mut out = BTreeMap::new();
    let mut put = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            if wanted(name) {
                out.insert(name.to_string(), v);
            }
        }
    };

    let (mut bp, mut bg) = (Vec::new(), Vec::new());
    let (mut f25, mut f50) = (Vec::new(), Vec::new());
    let (mut texts, mut text_refs) = (Vec::new(), Vec::new());
    let (mut dense_caps, mut dense_refs, mut dense_hit) = (Vec::new(), Vec::new(), Vec::new());
    let (mut g_acc, mut t_acc) = (Vec::new(), Vec::new());
    for r in records {
        match &r.sample {
            Sample::Box { pred, gt } => {
                bp.push(*pred);
                bg.push(*gt);
            }
            Sample::Boxes { pred, gt } => {
                f25.push(multi_object_f1(pred, gt, 0.25));
                f50.push(multi_object_f1(pred, gt, 0.5));
            }
            Sample::Text { pred, refs } => {
                texts.push(pred.clone());
                text_refs.push(refs.clone());
            }
            Sample::Dense {
                pred_box,
                caption,
                gt_box,
                refs,
            } => {
                dense_caps.push(caption.clone());
                dense_refs.push(refs.clone());
                dense_hit.push(iou3(pred_box, gt_box) >= 0.5);
            }
            Sample::Plan { pred, gt } => {
                let (g, t) = plan_scores(&parse_plan(pred)?, &parse_plan(gt)?);
                g_acc.push(g);
                t_acc.push(t);
            }
        }
    }

    if !bp.is_empty() {
        let acc = |th: f64| bp.iter().zip(&bg).filter(|(p, g)| iou3(p, g) >= th).count() as f64 / bp.len() as f64;
        put("acc@0.25", Some(acc(0.25)));
        put("acc@0.5", Some(acc(0.5)));
    }
    put("f1@0.25", mean(&f25));
    put("f1@0.5", mean(&f50));
    if !texts.is_empty() {
        let em: Vec<f64> = texts
            .iter()
            .zip(&text_refs)
            .map(|(p, rs)| rs.iter().any(|g| exact_match(p, g)) as u8 as f64)
            .collect();
        let emr: Vec<f64> = texts
            .iter()
            .zip(&text_refs)
            .map(|(p, rs)| rs.iter().any(|g| em_refined(p, g)) as u8 as f64)
            .collect();
        put("em", mean(&em));
        put("em_r", mean(&emr));
        if wanted("bleu4") {
            put("bleu4", Some(bleu4(&texts, &text_refs)?));
        }
        if wanted("rouge_l") {
            put("rouge_l", Some(rouge_l(&texts, &text_refs)?));
        }
        if wanted("meteor_s") {
            put("meteor_s", Some(meteor_simplified(&texts, &text_refs)?));
        }
        if wanted("cider") {
            put("cider", Some(cider(&texts, &text_refs)?));
        }
    }
    if !dense_caps.is_empty() {
        if wanted("c@0.5") {
            let per = cider_scores(&dense_caps, &dense_refs)?;
            let gated: Vec<f64> = per
                .iter()
                .zip(&dense_hit)
                .map(|(s, h)| if *h { *s } else { 0.0 })
                .collect();
            put("c@0.5", mean(&gated));
        }
        if wanted("b4@0.5") {
            let gated = dense_caps
                .iter()
                .zip(&dense_refs)
                .zip(&dense_hit)
                .map(|((c, rs), h)| {
                    Ok(if *h {
                        bleu4(std::slice::from_ref(c), std::slice::from_ref(rs))?
                    } else {
                        0.0
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            put("b4@0.5", mean(&gated));
        }
    }
    put("g_acc", mean(&g_acc));
    put("t_acc", mean(&t_acc));
    Ok(out)
}

/// Plain-text table with a header documenting the plan and METEOR
/// definitions.
pub fn render_table(report: &BTreeMap<String, f64>) -> String {
    let mut out = String::new();
    out.push_str("# G_Acc: a plan scores 1 when every index-aligned step matches (stemmed verb and object set)\n");
    out.push_str("#        and both plans reference the same objects overall.\n");
    out.push_str("# T_Acc: matched index-aligned steps / length of the longer plan.\n");
    out.push_str("# METEOR-s: exact and Porter-stem unigram matches only, no synonyms.\n");
    let width = report.keys().map(|k| display_name(k).len()).max().unwrap_or(6).max(6);
    let _ = writeln!(out, "{:<width$}  value", "metric");
    for (k, v) in report {
        let _ = writeln!(out, "{:<width$}  {v:.4}", display_name(k));
    }
    out
}

fn display_name(key: &str) -> &str {
    match key {
        "meteor_s" => "METEOR-s",
        "bleu4" => "BLEU-4",
        "rouge_l" => "ROUGE-L",
        "cider" => "CIDEr",
        "em" => "EM",
        "em_r" => "EM-R",
        "g_acc" => "G_Acc",
        "t_acc" => "T_Acc",
        "acc@0.25" => "Acc@0.25",
        "acc@0.5" => "Acc@0.5",
        "f1@0.25" => "F1@0.25",
        "f1@0.5" => "F1@0.5",
        "c@0.5" => "C@0.5",
        "b4@0.5" => "B-4@0.5",
        other => other,
    }
}
