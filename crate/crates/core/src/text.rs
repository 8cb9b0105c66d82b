//! Words, sentences, and the mapping between subword tokens and words.
//!
//! A word is a maximal run of non-whitespace characters. Punctuation stays
//! attached to the word it touches, so `"sat."` is one word of length 4.
//! A sentence ends after a word whose last character is `.`, `!` or `?`.
//! Abbreviations are not special-cased.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub surface: String,
    pub index: usize,
    /// `[start, end)` in characters (not bytes).
    pub char_span: (usize, usize),
    pub sentence_index: usize,
}

impl Word {
    /// Length in characters, punctuation included.
    pub fn char_len(&self) -> usize {
        self.char_span.1 - self.char_span.0
    }

    /// Lowercased form with leading/trailing punctuation removed. Internal
    /// hyphens and apostrophes are kept.
    pub fn clean(&self) -> String {
        clean_form(&self.surface)
    }
}

fn is_sentence_final(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

pub fn clean_form(surface: &str) -> String {
    surface
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

pub fn segment_words(text: &str) -> Vec<Word> {
    let mut words = Vec::new();
    let mut sentence = 0;
    let mut current = String::new();
    let mut start = 0;

    let mut flush = |current: &mut String, start: usize, end: usize, sentence: &mut usize| {
        if current.is_empty() {
            return;
        }
        let ends_sentence = current.chars().last().is_some_and(is_sentence_final);
        words.push(Word {
            surface: std::mem::take(current),
            index: words.len(),
            char_span: (start, end),
            sentence_index: *sentence,
        });
        if ends_sentence {
            *sentence += 1;
        }
    };

    let mut n_chars = 0;
    for (pos, c) in text.chars().enumerate() {
        n_chars = pos + 1;
        if c.is_whitespace() {
            flush(&mut current, start, pos, &mut sentence);
        } else {
            if current.is_empty() {
                start = pos;
            }
            current.push(c);
        }
    }
    flush(&mut current, start, n_chars, &mut sentence);
    words
}

/// Number of sentences in a segmented text. A trailing fragment without
/// final punctuation counts as a sentence.
pub fn sentence_count(words: &[Word]) -> usize {
    words.last().map_or(0, |w| w.sentence_index + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TokenAlignment {
    /// `None` marks a whitespace-only token.
    pub token_to_word: Vec<Option<usize>>,
    pub word_to_tokens: Vec<Vec<usize>>,
}

impl TokenAlignment {
    pub fn tokens_of(&self, word: usize) -> &[usize] {
        &self.word_to_tokens[word]
    }
}

/// Assigns each token to the word containing its first non-whitespace
/// character. The non-whitespace characters of the tokens, in order, must
/// spell out the words exactly.
pub fn align_tokens_to_words<S: AsRef<str>>(tokens: &[S], words: &[Word]) -> Result<TokenAlignment> {
    // (word index, char) for every non-whitespace character of the text
    let stream: Vec<(usize, char)> = words
        .iter()
        .flat_map(|w| w.surface.chars().map(move |c| (w.index, c)))
        .collect();

    let mut cursor = 0;
    let mut alignment = TokenAlignment {
        token_to_word: Vec::with_capacity(tokens.len()),
        word_to_tokens: vec![Vec::new(); words.len()],
    };
    for (token_index, token) in tokens.iter().enumerate() {
        let token = token.as_ref();
        let mut first_word = None;
        for c in token.chars().filter(|c| !c.is_whitespace()) {
            match stream.get(cursor) {
                Some(&(word, expected)) if expected == c => {
                    first_word.get_or_insert(word);
                    cursor += 1;
                }
                _ => {
                    return Err(Error::Alignment {
                        token_index,
                        piece: token.to_string(),
                    })
                }
            }
        }
        if let Some(word) = first_word {
            alignment.word_to_tokens[word].push(token_index);
        }
        alignment.token_to_word.push(first_word);
    }
    if cursor != stream.len() {
        return Err(Error::Alignment {
            token_index: tokens.len(),
            piece: String::new(),
        });
    }
    Ok(alignment)
}

/// Splits a word-level value uniformly over its subword tokens.
pub fn distribute_word_value(value: f64, n_subwords: usize) -> Result<Vec<f64>> {
    if n_subwords == 0 {
        return Err(Error::InvalidArgument(
            "cannot distribute a value over zero subwords".into(),
        ));
    }
    Ok(vec![value / n_subwords as f64; n_subwords])
}
