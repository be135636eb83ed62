//! Whitespace-and-punctuation tokenizer shared by feature extraction and the
//! neural encoders.

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits on whitespace, then peels leading and trailing punctuation off each
/// chunk as one-character tokens. Punctuation inside a word ("Hon'ble",
/// "302-A") stays attached.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut lo = 0;
        let mut hi = chars.len();
        while lo < hi && is_punct(chars[lo]) {
            lo += 1;
        }
        while hi > lo && is_punct(chars[hi - 1]) {
            hi -= 1;
        }
        out.extend(chars[..lo].iter().map(|c| c.to_string()));
        if lo < hi {
            out.push(chars[lo..hi].iter().collect());
        }
        out.extend(chars[hi..].iter().map(|c| c.to_string()));
    }
    out
}

/// Lowercases and collapses runs of whitespace to single spaces.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peels_punctuation() {
        assert_eq!(
            tokenize("(See Sec. 302-A, Hon'ble Court.)"),
            vec!["(", "See", "Sec", ".", "302-A", ",", "Hon'ble", "Court", ".", ")"]
        );
        assert!(tokenize("   ").is_empty());
        assert_eq!(tokenize("..."), vec![".", ".", "."]);
    }

    #[test]
    fn normalizes_whitespace_and_case() {
        assert_eq!(normalize("  Supreme\n\tCOURT  "), "supreme court");
    }
}
