//! Rank caption candidates against a crop embedding and fuse them, once
//! offline and once through a toy refiner.

use scenelang::caption::{fuse_captions, rank_candidates, CaptionCandidate, Refiner};
use scenelang::embed::{Embedder, HashingEmbedder};
use scenelang::{ProviderError, SceneObject, Vec3};

struct Joiner;

impl Refiner for Joiner {
    fn refine(&self, label: &str, candidates: &[String]) -> Result<String, ProviderError> {
        Ok(format!("A {label}: {}.", candidates.join("; ")))
    }
}

fn main() -> scenelang::Result<()> {
    let emb = HashingEmbedder::default();
    let chair = SceneObject::new(2, "chair", Vec3::new(2.0, 2.3, 0.45), Vec3::new(0.5, 0.5, 0.9));
    let crop = emb.embed_text("a photo of a black office chair")?;
    let texts = [
        "a black office chair",
        "a rolling chair",
        "a gray stool",
        "a window with curtains",
    ];
    let candidates = texts
        .iter()
        .map(|t| Ok(CaptionCandidate::new(chair.id, *t, emb.embed_text(t)?)))
        .collect::<scenelang::Result<Vec<_>>>()?;

    let ranked = rank_candidates(&crop, candidates, 3)?;
    for c in &ranked {
        println!("{:.3}  {}", c.similarity.unwrap_or_default(), c.text);
    }
    println!("offline: {}", fuse_captions(&chair, &ranked, None)?.text);
    println!("refined: {}", fuse_captions(&chair, &ranked, Some(&Joiner))?.text);
    Ok(())
}
