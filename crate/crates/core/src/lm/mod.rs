//! Language-model contract and the built-in n-gram model.

mod ngram;
mod tokenizer;

pub use ngram::{NGramConfig, NGramModel};
pub use tokenizer::{train_tokenizer, Tokenizer, TokenizerConfig, Vocabulary, WORD_START};

use crate::error::{Error, Result};

pub type TokenId = u32;

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const UNK: TokenId = 2;

/// Anything that can score the next token given a history.
///
/// `context` is the full token history (prompt plus generated tokens),
/// without a leading BOS; models pad on their own.
pub trait LanguageModel {
    fn vocabulary(&self) -> &Vocabulary;

    /// Natural-log probabilities indexed by token id. `exp` of the vector
    /// sums to one.
    fn next_token_logprobs(&self, context: &[TokenId]) -> Vec<f64>;

    fn eos(&self) -> TokenId {
        EOS
    }

    /// Whether the decoder may emit this token. BOS and UNK are never
    /// proposed.
    fn is_generatable(&self, token: TokenId) -> bool {
        token != BOS && token != UNK
    }

    /// Greedy longest-match encoding over the vocabulary.
    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>> {
        Tokenizer::new(self.vocabulary().clone()).encode(text)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn vocabulary(&self) -> &Vocabulary {
        (**self).vocabulary()
    }
    fn next_token_logprobs(&self, context: &[TokenId]) -> Vec<f64> {
        (**self).next_token_logprobs(context)
    }
    fn eos(&self) -> TokenId {
        (**self).eos()
    }
    fn is_generatable(&self, token: TokenId) -> bool {
        (**self).is_generatable(token)
    }
    fn tokenize(&self, text: &str) -> Result<Vec<TokenId>> {
        (**self).tokenize(text)
    }
}

/// Sum of log probabilities of `tokens` following an empty history.
pub fn sequence_logprob<M: LanguageModel + ?Sized>(model: &M, tokens: &[TokenId]) -> Result<f64> {
    sequence_logprob_given(model, &[], tokens)
}

/// Sum of `log P(token_t | prefix, tokens[..t])`.
pub fn sequence_logprob_given<M: LanguageModel + ?Sized>(
    model: &M,
    prefix: &[TokenId],
    tokens: &[TokenId],
) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput("token sequence"));
    }
    let mut history = prefix.to_vec();
    let mut total = 0.0;
    for &t in tokens {
        total += model.next_token_logprobs(&history)[t as usize];
        history.push(t);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fixed distribution regardless of context.
    struct Constant {
        vocab: Vocabulary,
        logprobs: Vec<f64>,
    }

    impl LanguageModel for Constant {
        fn vocabulary(&self) -> &Vocabulary {
            &self.vocab
        }
        fn next_token_logprobs(&self, _: &[TokenId]) -> Vec<f64> {
            self.logprobs.clone()
        }
    }

    #[test]
    fn sums_stepwise_logprobs() {
        let vocab = Vocabulary::new(["▁a", "▁b"]).unwrap();
        let lp = 0.5f64.ln();
        let lm = Constant {
            vocab,
            logprobs: vec![f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, lp, lp],
        };
        let score = sequence_logprob(&lm, &[3, 4]).unwrap();
        assert!((score - 2.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((score + 1.3863).abs() < 1e-4);
        assert!(sequence_logprob(&lm, &[]).is_err());
    }
}
