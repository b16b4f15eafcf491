//! The one tokenizer shared by indexing, bag-of-words scoring and embedding lookup.

/// Lowercases and splits on every non-alphanumeric character. No stemming, no stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}
