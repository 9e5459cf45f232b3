//! Evaluation metrics: 3D grounding, question answering, captioning and
//! step plans, plus the predictions-file driver.

pub mod bleu;
pub mod cider;
pub mod grounding;
pub mod meteor;
pub mod plan;
pub mod report;
pub mod rouge;
pub mod text;

pub use bleu::bleu4;
pub use cider::cider;
pub use grounding::{grounding_accuracy, iou3, multi_object_f1, Box3};
pub use meteor::meteor_simplified;
pub use plan::{parse_plan, plan_scores, PlanStep};
pub use rouge::rouge_l;
pub use text::{em_refined, exact_match, normalize_answer, tokenize};
