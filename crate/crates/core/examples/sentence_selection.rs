//! Keep the captions most relevant to a question on a 60-object synthetic
//! scene, in one and two rounds, and compare prompt sizes.

use scenelang::caption::{caption_scene, synthetic_candidates, CaptionSettings};
use scenelang::embed::HashingEmbedder;
use scenelang::pipeline::visible_label_text;
use scenelang::scene_info::{build_scene_information, ExpressionMode};
use scenelang::selection::{embed_inputs, select_top_k, select_two_round, unfiltered};
use scenelang::synth::{default_priors, default_room_extent, generate_synthetic_scene};
use scenelang::{build_scene_graph, ReasonerConfig};

fn main() -> scenelang::Result<()> {
    let scene = generate_synthetic_scene(11, 60, default_room_extent(60))?;
    let graph = build_scene_graph(&scene, &default_priors(), &ReasonerConfig::default());
    let emb = HashingEmbedder::default();
    let settings = CaptionSettings {
        embedder: &emb,
        refiner: None,
        crops: None,
        top_n: 10,
        max_in_flight: 4,
    };
    let captions = caption_scene(&scene, &synthetic_candidates(&scene, 11, 12, &emb)?, &settings)?;
    let info = build_scene_information(&scene, &graph, &captions, ExpressionMode::Complex)?;

    let question = "Is the lamp closer to the bed or to the sofa?";
    let m = embed_inputs(&info, question, Some(&visible_label_text(&scene)), &emb)?.matrices()?;
    let all = unfiltered(&info, question);
    let one = select_top_k(&info, &m.question, &m.captions, 20, question)?;
    let two = select_two_round(
        &info,
        &m.question,
        m.image.as_ref().expect("image rows"),
        &m.captions,
        20,
        12,
        question,
    )?;

    println!("unfiltered: {} tokens", all.token_count);
    println!("round one:  {} tokens, kept {:?}", one.token_count, one.kept_ids());
    println!("round two:  {} tokens, kept {:?}", two.token_count, two.kept_ids());
    for k in two.kept.iter().take(5) {
        let c = info.caption(k.object_id).expect("kept caption exists");
        println!("  {:.3}  [{}-{}] {}", k.weight, c.label, c.object_id, c.text);
    }
    Ok(())
}
