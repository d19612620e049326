/// A unit of the token stream fed to the phrase matcher.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Word(String),
    /// `.`, `?` or `!` followed by whitespace or the end of the text.
    SentenceEnd,
}

impl Token {
    pub fn word(&self) -> Option<&str> {
        match self {
            Token::Word(w) => Some(w),
            Token::SentenceEnd => None,
        }
    }
}

/// Splits text into lowercase word tokens and sentence-end markers.
///
/// Letters and digits form words; a hyphen joins two word characters and
/// is kept; every other character separates. A sentence end is never
/// emitted first or twice in a row.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let mut chars = text.chars().peekable();

    fn flush(word: &mut String, tokens: &mut Vec<Token>) {
        if !word.is_empty() {
            tokens.push(Token::Word(std::mem::take(word)));
        }
    }

    while let Some(c) = chars.next() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        let next = chars.peek().copied();
        match c {
            '-' if !word.is_empty() && next.is_some_and(char::is_alphanumeric) => word.push('-'),
            '.' | '?' | '!' => {
                flush(&mut word, &mut tokens);
                let boundary = next.is_none_or(char::is_whitespace);
                let after_word = matches!(tokens.last(), Some(Token::Word(_)));
                if boundary && after_word {
                    tokens.push(Token::SentenceEnd);
                }
            }
            _ => flush(&mut word, &mut tokens),
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

/// Strips a plural `s` when at least three characters remain.
pub fn stem(word: &str) -> &str {
    match word.strip_suffix('s') {
        Some(rest) if rest.chars().count() >= 3 => rest,
        _ => word,
    }
}
