use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::tokenizer::{train_tokenizer, Tokenizer, TokenizerConfig, Vocabulary};
use super::{LanguageModel, TokenId, BOS, EOS};
use crate::error::{Error, Result};

const MAGIC: &str = "gazeguide-ngram v1";

#[derive(Clone, Debug)]
pub struct NGramConfig {
    pub order: usize,
    pub alpha: f64,
    pub tokenizer: TokenizerConfig,
}

impl Default for NGramConfig {
    fn default() -> Self {
        Self {
            order: 3,
            alpha: 0.01,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    next: HashMap<TokenId, u64>,
}

/// Add-alpha smoothed n-gram model. A context never seen in training backs
/// off to the next shorter context, down to the unigram table.
#[derive(Clone, Debug, PartialEq)]
pub struct NGramModel {
    tokenizer: Tokenizer,
    order: usize,
    alpha: f64,
    /// `tables[h]` holds contexts of length `h`.
    tables: Vec<HashMap<Vec<TokenId>, ContextCounts>>,
}

impl NGramModel {
    /// Trains on token sequences. Each sequence is left-padded with BOS;
    /// any EOS must already be part of the sequence.
    pub fn train(tokenizer: Tokenizer, corpus: &[Vec<TokenId>], order: usize, alpha: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("smoothing constant must be positive, got {alpha}")));
        }
        if corpus.iter().all(Vec::is_empty) {
            return Err(Error::EmptyInput("n-gram corpus"));
        }
        let vocab_size = tokenizer.vocabulary().len();
        let mut tables = vec![HashMap::new(); order];
        for seq in corpus {
            let mut padded = vec![BOS; order - 1];
            padded.extend_from_slice(seq);
            for pos in order - 1..padded.len() {
                let token = padded[pos];
                if token as usize >= vocab_size {
                    return Err(Error::InvalidArgument(format!("token id {token} outside the vocabulary")));
                }
                for (h, table) in tables.iter_mut().enumerate() {
                    let ctx = padded[pos - h..pos].to_vec();
                    let entry: &mut ContextCounts = table.entry(ctx).or_default();
                    entry.total += 1;
                    *entry.next.entry(token).or_default() += 1;
                }
            }
        }
        Ok(Self {
            tokenizer,
            order,
            alpha,
            tables,
        })
    }

    /// Trains tokenizer and model on raw text. Every non-blank line is one
    /// sequence terminated by EOS.
    pub fn train_on_text(text: &str, config: &NGramConfig) -> Result<Self> {
        let tokenizer = train_tokenizer(text, &config.tokenizer)?;
        let corpus = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let mut ids = tokenizer.encode(l)?;
                ids.push(EOS);
                Ok(ids)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::train(tokenizer, &corpus, config.order, config.alpha)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    /// Same counts, different smoothing.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("smoothing constant must be positive, got {alpha}")));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    pub fn next_token_probs(&self, context: &[TokenId]) -> Vec<f64> {
        let v = self.tokenizer.vocabulary().len();
        let h_max = self.order - 1;
        let mut padded = vec![BOS; h_max.saturating_sub(context.len())];
        padded.extend_from_slice(&context[context.len().saturating_sub(h_max)..]);

        let counts = (0..=h_max)
            .rev()
            .find_map(|h| self.tables[h].get(&padded[h_max - h..]))
            .expect("unigram table is never empty");
        let denom = counts.total as f64 + self.alpha * v as f64;
        let mut probs = vec![self.alpha / denom; v];
        for (&t, &c) in &counts.next {
            probs[t as usize] = (c as f64 + self.alpha) / denom;
        }
        probs
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Format { message, .. } => Error::format(path, message),
            other => other,
        })
    }

    pub fn to_text(&self) -> String {
        let vocab = self.tokenizer.vocabulary();
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "order {}", self.order).unwrap();
        writeln!(out, "alpha {:?}", self.alpha).unwrap();
        writeln!(out, "pieces {}", vocab.regular_pieces().len()).unwrap();
        for p in vocab.regular_pieces() {
            writeln!(out, "{p}").unwrap();
        }
        let sorted: BTreeMap<(usize, &Vec<TokenId>), BTreeMap<TokenId, u64>> = self
            .tables
            .iter()
            .enumerate()
            .flat_map(|(h, table)| {
                table
                    .iter()
                    .map(move |(ctx, c)| ((h, ctx), c.next.iter().map(|(&t, &n)| (t, n)).collect()))
            })
            .collect();
        let n_rows: usize = sorted.values().map(BTreeMap::len).sum();
        writeln!(out, "counts {n_rows}").unwrap();
        for ((_, ctx), next) in sorted {
            let ctx: Vec<String> = ctx.iter().map(|t| t.to_string()).collect();
            for (t, n) in next {
                writeln!(out, "{}\t{t}\t{n}", ctx.join(",")).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::format("<ngram model>", msg);
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad(format!("missing header {MAGIC:?}")));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing {name}")))?;
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(format!("expected {name}, got {line:?}")))
        };
        let order: usize = field("order")?.parse().map_err(|e| bad(format!("order: {e}")))?;
        let alpha: f64 = field("alpha")?.parse().map_err(|e| bad(format!("alpha: {e}")))?;
        let n_pieces: usize = field("pieces")?.parse().map_err(|e| bad(format!("pieces: {e}")))?;
        let mut pieces = Vec::with_capacity(n_pieces);
        for _ in 0..n_pieces {
            pieces.push(lines.next().ok_or_else(|| bad("truncated piece list".into()))?.to_string());
        }
        let vocab = Vocabulary::new(pieces.iter().cloned())?;
        if vocab.regular_pieces() != pieces.as_slice() {
            return Err(bad("piece list is not in canonical order".into()));
        }
        let n_rows: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("counts "))
            .ok_or_else(|| bad("missing counts".into()))?
            .parse()
            .map_err(|e| bad(format!("counts: {e}")))?;

        if order == 0 {
            return Err(bad("order must be at least 1".into()));
        }
        let mut tables: Vec<HashMap<Vec<TokenId>, ContextCounts>> = vec![HashMap::new(); order];
        for _ in 0..n_rows {
            let line = lines.next().ok_or_else(|| bad("truncated counts".into()))?;
            let mut cols = line.split('\t');
            let (Some(ctx), Some(tok), Some(n), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(bad(format!("malformed count row {line:?}")));
            };
            let ctx: Vec<TokenId> = if ctx.is_empty() {
                Vec::new()
            } else {
                ctx.split(',')
                    .map(|t| t.parse().map_err(|e| bad(format!("context id: {e}"))))
                    .collect::<Result<_>>()?
            };
            let tok: TokenId = tok.parse().map_err(|e| bad(format!("token id: {e}")))?;
            let n: u64 = n.parse().map_err(|e| bad(format!("count: {e}")))?;
            if ctx.len() >= order || tok as usize >= vocab.len() || ctx.iter().any(|&t| t as usize >= vocab.len()) {
                return Err(bad(format!("count row out of range {line:?}")));
            }
            let entry = tables[ctx.len()].entry(ctx).or_default();
            entry.total += n;
            entry.next.insert(tok, n);
        }
        if tables[0].is_empty() {
            return Err(bad("no unigram counts".into()));
        }
        Ok(Self {
            tokenizer: Tokenizer::new(vocab),
            order,
            alpha,
            tables,
        })
    }
}

impl LanguageModel for NGramModel {
    fn vocabulary(&self) -> &Vocabulary {
        self.tokenizer.vocabulary()
    }

    fn next_token_logprobs(&self, context: &[TokenId]) -> Vec<f64> {
        self.next_token_probs(context).into_iter().map(f64::ln).collect()
    }

    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>> {
        self.tokenizer.encode(text)
    }
}
