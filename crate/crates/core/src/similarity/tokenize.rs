/// Lowercases and splits on every non-alphanumeric character (Unicode
/// aware). No stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(tokenize("Net-neutrality, IS fair!"), ["net", "neutrality", "is", "fair"]);
        assert_eq!(tokenize("Über   café's"), ["über", "café", "s"]);
        assert!(tokenize(" .,; ").is_empty());
    }
}
