use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{TokenId, BOS, EOS, UNK};
use crate::error::{Error, Result};

/// Marks a piece that starts a new word.
pub const WORD_START: char = '▁';

const RESERVED: [&str; 3] = ["<s>", "</s>", "<unk>"];

/// Bijection between pieces and ids. Ids 0..3 are BOS, EOS, UNK; the
/// rest follow in sorted piece order so ids are reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pieces: Vec<String>,
    ids: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub fn new<I, S>(pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let sorted: BTreeSet<String> = pieces.into_iter().map(Into::into).collect();
        let mut all: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        for piece in sorted {
            if piece.is_empty() || piece == WORD_START.to_string() {
                return Err(Error::InvalidArgument("empty vocabulary piece".into()));
            }
            if piece.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("piece {piece:?} contains whitespace")));
            }
            if RESERVED.contains(&piece.as_str()) {
                return Err(Error::InvalidArgument(format!("piece {piece:?} is reserved")));
            }
            all.push(piece);
        }
        let ids = all
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as TokenId))
            .collect();
        Ok(Self { pieces: all, ids })
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece(&self, id: TokenId) -> &str {
        &self.pieces[id as usize]
    }

    pub fn id(&self, piece: &str) -> Option<TokenId> {
        self.ids.get(piece).copied()
    }

    /// Pieces after the reserved ids, in id order.
    pub fn regular_pieces(&self) -> &[String] {
        &self.pieces[RESERVED.len()..]
    }

    pub fn is_reserved(id: TokenId) -> bool {
        matches!(id, BOS | EOS | UNK)
    }

    pub fn starts_word(&self, id: TokenId) -> bool {
        !Self::is_reserved(id) && self.piece(id).starts_with(WORD_START)
    }

    /// Surface form of each token: word-initial pieces get a leading space
    /// unless they open the text, reserved tokens render as nothing.
    pub fn surface_pieces(&self, tokens: &[TokenId]) -> Vec<String> {
        let mut at_start = true;
        tokens
            .iter()
            .map(|&t| {
                if Self::is_reserved(t) {
                    return String::new();
                }
                let piece = self.piece(t);
                let s = match piece.strip_prefix(WORD_START) {
                    Some(rest) if at_start => rest.to_string(),
                    Some(rest) => format!(" {rest}"),
                    None => piece.to_string(),
                };
                at_start = false;
                s
            })
            .collect()
    }

    pub fn render(&self, tokens: &[TokenId]) -> String {
        self.surface_pieces(tokens).concat()
    }
}

#[derive(Clone, Debug)]
pub struct TokenizerConfig {
    /// Words seen at least this often become single tokens.
    pub min_word_count: usize,
    /// Number of pair merges learned for the subword fallback.
    pub merges: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            min_word_count: 2,
            merges: 200,
        }
    }
}

/// Whitespace words with a greedy longest-match subword fallback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tokenizer {
    vocab: Vocabulary,
    max_piece_chars: usize,
}

impl Tokenizer {
    pub fn new(vocab: Vocabulary) -> Self {
        let max_piece_chars = vocab
            .regular_pieces()
            .iter()
            .map(|p| p.chars().count())
            .max()
            .unwrap_or(1);
        Self {
            vocab,
            max_piece_chars,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        let mut out = Vec::new();
        for word in text.split_whitespace() {
            self.encode_word(word, &mut out)?;
        }
        Ok(out)
    }

    fn encode_word(&self, word: &str, out: &mut Vec<TokenId>) -> Result<()> {
        let chars: Vec<char> = word.chars().collect();
        let mut pos = 0;
        while pos < chars.len() {
            let longest = (pos + self.max_piece_chars).min(chars.len());
            let found = (pos + 1..=longest).rev().find_map(|end| {
                let body: String = chars[pos..end].iter().collect();
                let piece = if pos == 0 {
                    format!("{WORD_START}{body}")
                } else {
                    body
                };
                self.vocab.id(&piece).map(|id| (id, end))
            });
            match found {
                Some((id, end)) => {
                    out.push(id);
                    pos = end;
                }
                None => return Err(Error::Untokenizable(word.to_string())),
            }
        }
        Ok(())
    }
}

/// Builds a vocabulary from raw text: frequent whole words plus every seen
/// character and a fixed number of learned pair merges, each in a
/// word-initial and a continuation form.
pub fn train_tokenizer(text: &str, config: &TokenizerConfig) -> Result<Tokenizer> {
    let mut word_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for w in text.split_whitespace() {
        *word_counts.entry(w).or_default() += 1;
    }
    if word_counts.is_empty() {
        return Err(Error::EmptyInput("tokenizer corpus"));
    }

    let mut pieces: BTreeSet<String> = BTreeSet::new();
    for (&w, &c) in &word_counts {
        if c >= config.min_word_count {
            pieces.insert(format!("{WORD_START}{w}"));
        }
        for ch in w.chars() {
            pieces.insert(format!("{WORD_START}{ch}"));
            pieces.insert(ch.to_string());
        }
    }

    // Each word as a symbol sequence; the first symbol carries the marker.
    let mut words: Vec<(Vec<String>, usize)> = word_counts
        .iter()
        .map(|(&w, &c)| {
            let mut symbols: Vec<String> = w.chars().map(|ch| ch.to_string()).collect();
            symbols[0].insert(0, WORD_START);
            (symbols, c)
        })
        .collect();

    for _ in 0..config.merges {
        let mut pairs: BTreeMap<(String, String), usize> = BTreeMap::new();
        for (symbols, c) in &words {
            for pair in symbols.windows(2) {
                *pairs.entry((pair[0].clone(), pair[1].clone())).or_default() += c;
            }
        }
        // Most frequent pair; BTreeMap order breaks ties.
        let Some(((left, right), _)) = pairs
            .into_iter()
            .fold(None, |best: Option<((String, String), usize)>, (pair, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((pair, c)),
            })
        else {
            break;
        };
        let merged = format!("{left}{right}");
        for (symbols, _) in &mut words {
            let mut i = 0;
            while i + 1 < symbols.len() {
                if symbols[i] == left && symbols[i + 1] == right {
                    symbols[i] = merged.clone();
                    symbols.remove(i + 1);
                }
                i += 1;
            }
        }
        match merged.strip_prefix(WORD_START) {
            Some(body) => {
                pieces.insert(body.to_string());
            }
            None => {
                pieces.insert(format!("{WORD_START}{merged}"));
            }
        }
        pieces.insert(merged);
    }

    Ok(Tokenizer::new(Vocabulary::new(pieces)?))
}
