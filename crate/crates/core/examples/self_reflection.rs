//! Corrupt a caption and a relation, then let the rule-based judge repair
//! them.

use std::path::Path;

use scenelang::caption::ObjectCaption;
use scenelang::reasoner::RelationTag;
use scenelang::reflection::{reflect, ReflectConfig, RuleBased};
use scenelang::scene::{load_priors, load_scene};
use scenelang::scene_info::{build_scene_information, ExpressionMode};
use scenelang::{build_scene_graph, ReasonerConfig};

fn main() -> scenelang::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let scene = load_scene(&data.join("scene.json"))?;
    let priors = load_priors(&data.join("priors.json"))?;
    let cfg = ReasonerConfig {
        saliency_m: 2,
        ..ReasonerConfig::default()
    };
    let graph = build_scene_graph(&scene, &priors, &cfg);
    let captions: Vec<ObjectCaption> = scene
        .objects
        .iter()
        .map(|o| ObjectCaption {
            object_id: o.id,
            label: o.label.clone(),
            text: format!("a {}", o.display_label()),
            candidates_used: 1,
            refined: false,
            score: None,
        })
        .collect();
    let mut info = build_scene_information(&scene, &graph, &captions, ExpressionMode::Simple)?;

    info.captions[3].text = "a tall green cactus".into();
    if let Some(r) = info
        .relations
        .iter_mut()
        .find(|r| r.tags.contains(&RelationTag::LeftOf))
    {
        r.tags.remove(&RelationTag::LeftOf);
        r.tags.insert(RelationTag::RightOf);
        r.text = r.text.replace("to the left of", "to the right of");
    }

    let judge = RuleBased {
        scene: &scene,
        priors: &priors,
        cfg: &cfg,
        mode: info.mode,
    };
    let (_, reports) = reflect(&info, &scene, &judge, &judge, &ReflectConfig::default(), None)?;
    for r in reports.iter().filter(|r| r.replaced) {
        println!("{:?} {} (score {:.1})", r.kind, r.item_id, r.score);
        println!("   was: {}", r.old_text);
        println!("   now: {}", r.new_text.as_deref().unwrap_or_default());
    }
    Ok(())
}
