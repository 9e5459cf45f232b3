//! Parse two step plans and score them.

use scenelang::metrics::{parse_plan, plan_scores};

fn main() -> scenelang::Result<()> {
    let gt =
        parse_plan("1. Go to the [desk-0]\n2. Pick up the [backpack-8]\n3. Put the [backpack-8] on the [chair-2]")?;
    let pred =
        parse_plan("1. Going to the [desk-0]. 2) Pick the [backpack-8]. 3) Place the [backpack-8] on the [chair-2].")?;
    for s in &pred {
        println!("{}: {} {:?}", s.index, s.action_verb, s.target_refs);
    }
    let (g, t) = plan_scores(&pred, &gt);
    println!("G_Acc = {g}  T_Acc = {t:.3}");
    Ok(())
}
