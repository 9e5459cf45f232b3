//! Answer normalization, exact match and shared tokenization.

/// Lowercased word tokens with punctuation removed. Apostrophes inside a
/// word are kept (`o'clock`).
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\''))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn stem(word: &str) -> String {
    porter_stemmer::stem(word)
}

const ARTICLES: &[&str] = &["a", "an", "the"];

/// Lowercase, strip punctuation, collapse whitespace and drop leading
/// articles.
pub fn normalize_answer(text: &str) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    let mut words: Vec<String> = cleaned.split_whitespace().map(str::to_string).collect();
    let lead = words.iter().take_while(|w| ARTICLES.contains(&w.as_str())).count();
    words.drain(..lead);
    words
}

pub fn exact_match(pred: &str, gt: &str) -> bool {
    normalize_answer(pred) == normalize_answer(gt)
}

/// Exact match, or the normalized answer appears in the normalized
/// prediction as a run of whole words.
pub fn em_refined(pred: &str, gt: &str) -> bool {
    let (p, g) = (normalize_answer(pred), normalize_answer(gt));
    if p == g {
        return true;
    }
    !g.is_empty() && p.windows(g.len()).any(|w| w == g.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_cases() {
        assert!(exact_match("The chair.", "chair"));
        assert!(!exact_match("it is a brown chair", "brown chair"));
        assert!(em_refined("it is a brown chair", "brown chair"));
        assert!(!exact_match("table", "chair"));
        assert!(!em_refined("table", "chair"));
    }

    #[test]
    fn substring_needs_word_boundaries() {
        assert!(!em_refined("armchair", "chair"));
        assert!(em_refined("an arm chair", "chair"));
    }

    #[test]
    fn empty_answers() {
        assert!(exact_match("The", ""));
        assert!(!em_refined("something", "the"));
    }

    #[test]
    fn tokens() {
        assert_eq!(
            tokenize("At 3 o'clock, a Lamp!"),
            vec!["at", "3", "o'clock", "a", "lamp"]
        );
        assert_eq!(stem("chairs"), "chair");
    }
}
