use crate::docmodel::Token;

/// Bumped whenever tokenization output could change; part of label cache keys.
pub const TOKENIZER_VERSION: &str = "ws-punct-1";

/// Abbreviations that never end a sentence.
const ABBREVIATIONS: &[&str] = &["e.g.", "i.e.", "et al.", "fig.", "eq.", "cf.", "vs."];

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Space,
    Word,
    Punct,
}

fn class_of(c: char) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if c.is_alphanumeric() {
        CharClass::Word
    } else {
        CharClass::Punct
    }
}

/// Lowercases `text` and splits it on whitespace and at every boundary
/// between alphanumeric runs and punctuation runs.
pub fn tokenize(text: &str) -> Vec<Token> {
    let lowered = text.to_lowercase();
    let mut out = Vec::new();
    let mut current = String::new();
    let mut current_class = CharClass::Space;
    for c in lowered.chars() {
        let class = class_of(c);
        if class != current_class && !current.is_empty() {
            out.push(Token::from_normalized(std::mem::take(&mut current)));
        }
        if class != CharClass::Space {
            current.push(c);
        }
        current_class = class;
    }
    if !current.is_empty() {
        out.push(Token::from_normalized(current));
    }
    out
}

fn ends_with_abbreviation(prefix: &str) -> bool {
    let lowered = prefix.to_lowercase();
    ABBREVIATIONS.iter().any(|abbr| {
        lowered.ends_with(abbr) && {
            let start = lowered.len() - abbr.len();
            lowered[..start]
                .chars()
                .next_back()
                .is_none_or(|c| c.is_whitespace() || c == '(' || c == '[')
        }
    })
}

/// Splits running text into sentences at `.`, `!` or `?` followed by
/// whitespace and an uppercase letter or digit.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (byte, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let end = byte + c.len_utf8();
            let mut j = i + 1;
            let mut saw_space = false;
            while j < chars.len() && chars[j].1.is_whitespace() {
                saw_space = true;
                j += 1;
            }
            let boundary = saw_space
                && j < chars.len()
                && (chars[j].1.is_uppercase() || chars[j].1.is_ascii_digit())
                && !ends_with_abbreviation(&text[start..end]);
            if boundary {
                push_trimmed(&mut sentences, &text[start..end]);
                start = chars[j].0;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let trimmed = piece.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::tokens;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("The cat's mat."),
            tokens(&["the", "cat", "'", "s", "mat", "."])
        );
        assert!(tokenize("").is_empty());
        assert_eq!(
            tokenize("ROUGE-1 score: 45.93"),
            tokens(&["rouge", "-", "1", "score", ":", "45", ".", "93"])
        );
    }

    #[test]
    fn punctuation_runs_stay_together() {
        assert_eq!(tokenize("wait...!? ok"), tokens(&["wait", "...!?", "ok"]));
        assert_eq!(tokenize("h2o\tworks"), tokens(&["h2o", "works"]));
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_sentences("A runs. B walks."), vec!["A runs.", "B walks."]);
        assert_eq!(split_sentences("See Fig. 2 for details.").len(), 1);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn split_respects_abbreviations() {
        let s = "Prior work (e.g. Smith) helps. Results by Lee et al. Show gains. See Eq. 3 now! Done?";
        assert_eq!(
            split_sentences(s),
            vec![
                "Prior work (e.g. Smith) helps.",
                "Results by Lee et al. Show gains.",
                "See Eq. 3 now!",
                "Done?"
            ]
        );
    }

    #[test]
    fn split_requires_uppercase_or_digit_start() {
        assert_eq!(split_sentences("a b. c d."), vec!["a b. c d."]);
        assert_eq!(split_sentences("Top. 42 items."), vec!["Top.", "42 items."]);
        assert_eq!(split_sentences("x.Y"), vec!["x.Y"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "[a-zA-Z0-9 .,;:!?'()\\-éÀß]{0,40}") {
            let first = tokenize(&text);
            let joined = first.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(tokenize(&joined), first);
        }

        #[test]
        fn tokens_never_contain_whitespace(text in "\\PC{0,40}") {
            for t in tokenize(&text) {
                prop_assert!(!t.as_str().is_empty());
                prop_assert!(!t.as_str().chars().any(char::is_whitespace));
            }
        }
    }
}
