//! Captioning and QA metrics on a handful of sentences.

use scenelang::metrics::{bleu4, cider, em_refined, exact_match, meteor_simplified, rouge_l};

fn main() -> scenelang::Result<()> {
    let cands: Vec<String> = [
        "a black office chair at the desk",
        "a wooden bookshelf with books",
        "a lamp standing in the corner",
    ]
    .map(String::from)
    .to_vec();
    let refs: Vec<Vec<String>> = vec![
        vec!["a black office chair at the desk".into(), "an office chair".into()],
        vec!["a bookshelf full of books".into()],
        vec!["a tall floor lamp".into(), "a lamp in the corner".into()],
    ];
    println!("BLEU-4   {:.4}", bleu4(&cands, &refs)?);
    println!("ROUGE-L  {:.4}", rouge_l(&cands, &refs)?);
    println!("METEOR-s {:.4}", meteor_simplified(&cands, &refs)?);
    println!("CIDEr    {:.4}", cider(&cands, &refs)?);

    for (pred, gt) in [("The chair.", "chair"), ("it is the black chair", "black chair")] {
        println!(
            "{pred:?} vs {gt:?}: EM={} EM-R={}",
            exact_match(pred, gt),
            em_refined(pred, gt)
        );
    }
    Ok(())
}
