//! Build the relation graph of the sample office scene and print it.

use std::path::Path;

use scenelang::reasoner::build_scene_graph;
use scenelang::scene::{load_priors, load_scene};
use scenelang::ReasonerConfig;

fn main() -> scenelang::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let scene = load_scene(&data.join("scene.json"))?;
    let priors = load_priors(&data.join("priors.json"))?;
    let cfg = ReasonerConfig {
        saliency_m: 3,
        ..ReasonerConfig::default()
    };
    let labels = scene.labels();
    for t in build_scene_graph(&scene, &priors, &cfg) {
        let tags: Vec<String> = t.tags.iter().map(|x| x.to_string()).collect();
        println!(
            "{:>12}-{} -> {:<12}-{}  {:5.2} m  {}",
            labels[&t.subject],
            t.subject,
            labels[&t.object],
            t.object,
            t.distance_m,
            tags.join(", ")
        );
    }
    Ok(())
}
