//! METEOR restricted to exact and stem unigram matches ("METEOR-s").

use crate::error::{Error, Result};
use crate::metrics::text::{stem, tokenize};

pub const ALPHA: f64 = 0.9;
pub const BETA: f64 = 3.0;
pub const GAMMA: f64 = 0.5;

/// Greedy alignment: exact matches first, then Porter-stem matches, each
/// candidate token taking the leftmost free reference token.
pub(crate) fn align(c: &[String], r: &[String]) -> Vec<(usize, usize)> {
    let mut used = vec![false; r.len()];
    let mut pair: Vec<Option<usize>> = vec![None; c.len()];
    for (i, w) in c.iter().enumerate() {
        if let Some(j) = (0..r.len()).find(|&j| !used[j] && r[j] == *w) {
            used[j] = true;
            pair[i] = Some(j);
        }
    }
    let (cs, rs): (Vec<String>, Vec<String>) =
        (c.iter().map(|w| stem(w)).collect(), r.iter().map(|w| stem(w)).collect());
    for i in 0..c.len() {
        if pair[i].is_some() {
            continue;
        }
        if let Some(j) = (0..r.len()).find(|&j| !used[j] && rs[j] == cs[i]) {
            used[j] = true;
            pair[i] = Some(j);
        }
    }
    pair.into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect()
}

fn chunks(matches: &[(usize, usize)]) -> usize {
    if matches.is_empty() {
        return 0;
    }
    1 + matches
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

pub fn meteor_pair(candidate: &str, reference: &str) -> f64 {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let m = align(&c, &r);
    if m.is_empty() {
        return 0.0;
    }
    let n = m.len() as f64;
    let (p, rc) = (n / c.len() as f64, n / r.len() as f64);
    let fmean = p * rc / (ALPHA * p + (1.0 - ALPHA) * rc);
    let penalty = GAMMA * (chunks(&m) as f64 / n).powf(BETA);
    fmean * (1.0 - penalty)
}

/// Mean over candidates of the best score against any reference.
pub fn meteor_simplified(candidates: &[String], references: &[Vec<String>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            preds: candidates.len(),
            gts: references.len(),
        });
    }
    if candidates.is_empty() || references.iter().any(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let total: f64 = candidates
        .iter()
        .zip(references)
        .map(|(c, refs)| refs.iter().map(|r| meteor_pair(c, r)).fold(0.0, f64::max))
        .sum();
    Ok(total / candidates.len() as f64)
}
