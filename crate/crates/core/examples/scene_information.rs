//! Render the same scene in all three expression modes and compare sizes.

use std::path::Path;

use scenelang::caption::{caption_scene, load_candidates, CaptionSettings};
use scenelang::embed::HashingEmbedder;
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
    let emb = HashingEmbedder::default();
    let settings = CaptionSettings {
        embedder: &emb,
        refiner: None,
        crops: None,
        top_n: 5,
        max_in_flight: 2,
    };
    let captions = caption_scene(&scene, &load_candidates(&data.join("candidates.json"))?, &settings)?;

    for mode in [
        ExpressionMode::Coordinate,
        ExpressionMode::Simple,
        ExpressionMode::Complex,
    ] {
        let info = build_scene_information(&scene, &graph, &captions, mode)?;
        println!("== {mode}: {} tokens", info.token_estimate);
        for r in info.relations.iter().take(3) {
            println!("   {}", r.text);
        }
    }
    Ok(())
}
