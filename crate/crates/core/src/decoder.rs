//! Beam search where candidates are ranked by
//! `token_score + gaze_weight * gaze_score`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaze_model::GazePredictor;
use crate::lm::{LanguageModel, TokenId};
use crate::text::{align_tokens_to_words, segment_words};

/// Weights beyond this are refused.
pub const MAX_GAZE_WEIGHT: f64 = 5.0;
/// Weights beyond this tend to produce repetitive text.
pub const WARN_GAZE_WEIGHT: f64 = 3.0;
/// Largest search space `exhaustive_generate` will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    /// Next-token candidates considered per beam.
    pub top_k: usize,
    pub beam_size: usize,
    pub gaze_weight: f64,
    pub max_tokens: usize,
    /// EOS is not proposed before this many tokens were generated.
    pub min_tokens: usize,
    pub prompt: String,
    /// Leave the last word of an unfinished candidate out of its gaze
    /// score, since it may still be extended.
    pub defer_partial_word: bool,
}

impl DecoderConfig {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self {
            top_k: 8,
            beam_size: 8,
            gaze_weight: 0.0,
            max_tokens: 60,
            min_tokens: 0,
            prompt: prompt.into(),
            defer_partial_word: false,
        }
    }

    /// Checks ranges; returns a warning for weights large enough to
    /// degrade the output.
    pub fn validate(&self) -> Result<Option<String>> {
        if self.top_k == 0 || self.beam_size == 0 || self.max_tokens == 0 {
            return Err(Error::InvalidArgument("top-k, beam size and max tokens must be at least 1".into()));
        }
        if self.min_tokens > self.max_tokens {
            return Err(Error::InvalidArgument("min tokens exceeds max tokens".into()));
        }
        let w = self.gaze_weight;
        if !w.is_finite() || w.abs() > MAX_GAZE_WEIGHT {
            return Err(Error::InvalidArgument(format!(
                "gaze weight {w} outside [-{MAX_GAZE_WEIGHT}, {MAX_GAZE_WEIGHT}]"
            )));
        }
        Ok((w.abs() > WARN_GAZE_WEIGHT).then(|| {
            format!("gaze weight {w} is beyond ±{WARN_GAZE_WEIGHT}; output may become repetitive")
        }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSequence {
    /// Generated tokens, EOS included when finished.
    pub tokens: Vec<TokenId>,
    /// Words containing generated tokens, in text order.
    pub words: Vec<String>,
    pub token_score: f64,
    pub gaze_score: f64,
    pub finished: bool,
}

impl CandidateSequence {
    pub fn empty() -> Self {
        Self {
            tokens: Vec::new(),
            words: Vec::new(),
            token_score: 0.0,
            gaze_score: 0.0,
            finished: false,
        }
    }
}

pub fn total_score(c: &CandidateSequence, gaze_weight: f64) -> f64 {
    c.token_score + gaze_weight * c.gaze_score
}

/// Best first: higher total, then the lexicographically smaller token
/// sequence.
fn rank(a: &CandidateSequence, b: &CandidateSequence, w: f64) -> Ordering {
    total_score(b, w)
        .total_cmp(&total_score(a, w))
        .then_with(|| a.tokens.cmp(&b.tokens))
}

/// Fixed inputs of one decoding run.
pub struct DecodeContext<'a, M: ?Sized, G: ?Sized> {
    pub lm: &'a M,
    pub gaze: Option<&'a G>,
    pub prompt_tokens: Vec<TokenId>,
    pub config: &'a DecoderConfig,
}

impl<'a, M: LanguageModel + ?Sized, G: GazePredictor + ?Sized> DecodeContext<'a, M, G> {
    pub fn new(lm: &'a M, gaze: Option<&'a G>, config: &'a DecoderConfig) -> Result<Self> {
        Ok(Self {
            lm,
            gaze,
            prompt_tokens: lm.tokenize(&config.prompt)?,
            config,
        })
    }

    /// Builds the candidate for `tokens`, recomputing its words and gaze
    /// score from scratch.
    pub fn candidate(&self, tokens: Vec<TokenId>, token_score: f64) -> CandidateSequence {
        let eos = self.lm.eos();
        let finished = tokens.last() == Some(&eos);
        let (all_words, first_generated) = self.words_of(&tokens);
        let words = all_words[first_generated..].to_vec();
        let gaze_score = match self.gaze {
            Some(g) => {
                let mut context = all_words;
                if self.config.defer_partial_word && !finished && !words.is_empty() {
                    context.pop();
                }
                g.score_from(&context, first_generated)
            }
            None => 0.0,
        };
        CandidateSequence {
            tokens,
            words,
            token_score,
            gaze_score,
            finished,
        }
    }

    /// Words of prompt plus `generated`, and the index of the first word
    /// holding a generated token.
    fn words_of(&self, generated: &[TokenId]) -> (Vec<String>, usize) {
        let all: Vec<TokenId> = self.prompt_tokens.iter().chain(generated).copied().collect();
        let pieces = self.lm.vocabulary().surface_pieces(&all);
        let text: String = pieces.concat();
        let words = segment_words(&text);
        let alignment = align_tokens_to_words(&pieces, &words).expect("rendered pieces spell their own text");
        let first = alignment.token_to_word[self.prompt_tokens.len()..]
            .iter()
            .flatten()
            .next()
            .copied()
            .unwrap_or(words.len());
        (words.into_iter().map(|w| w.surface).collect(), first)
    }

    /// Text produced by the generated tokens, without leading whitespace.
    pub fn continuation(&self, generated: &[TokenId]) -> String {
        let all: Vec<TokenId> = self.prompt_tokens.iter().chain(generated).copied().collect();
        let pieces = self.lm.vocabulary().surface_pieces(&all);
        pieces[self.prompt_tokens.len()..].concat().trim_start().to_string()
    }

    fn history(&self, c: &CandidateSequence) -> Vec<TokenId> {
        self.prompt_tokens.iter().chain(&c.tokens).copied().collect()
    }

    /// Top-k generatable tokens by log probability, ties to the lower id.
    fn top_tokens(&self, c: &CandidateSequence) -> Vec<(TokenId, f64)> {
        let logprobs = self.lm.next_token_logprobs(&self.history(c));
        let eos_allowed = c.tokens.len() >= self.config.min_tokens;
        let eos = self.lm.eos();
        let mut options: Vec<(TokenId, f64)> = logprobs
            .iter()
            .enumerate()
            .map(|(t, &lp)| (t as TokenId, lp))
            .filter(|&(t, lp)| lp > f64::NEG_INFINITY && self.lm.is_generatable(t) && (eos_allowed || t != eos))
            .collect();
        options.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        options.truncate(self.config.top_k);
        options
    }

    /// Expands every unfinished beam with its top-k tokens, carries
    /// finished beams along, and keeps the best `beam_size`.
    pub fn beam_step(&self, beams: &[CandidateSequence]) -> Vec<CandidateSequence> {
        let mut pool = Vec::new();
        for beam in beams {
            if beam.finished {
                pool.push(beam.clone());
                continue;
            }
            for (t, lp) in self.top_tokens(beam) {
                let mut tokens = beam.tokens.clone();
                tokens.push(t);
                pool.push(self.candidate(tokens, beam.token_score + lp));
            }
        }
        let w = self.config.gaze_weight;
        pool.sort_by(|a, b| rank(a, b, w));
        pool.truncate(self.config.beam_size);
        pool
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub token_score: f64,
    pub gaze_score: f64,
    pub total_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generation {
    pub best: CandidateSequence,
    pub text: String,
    /// Scores of the leading beam after each step.
    pub trace: Vec<TraceStep>,
}

impl Generation {
    pub fn total_score(&self, gaze_weight: f64) -> f64 {
        total_score(&self.best, gaze_weight)
    }
}

/// Best finished candidate, or the best unfinished one when nothing
/// finished.
fn pick(candidates: &[CandidateSequence], w: f64) -> Option<&CandidateSequence> {
    let best_of = |finished: bool| {
        candidates
            .iter()
            .filter(|c| c.finished == finished)
            .min_by(|a, b| rank(a, b, w))
    };
    best_of(true).or_else(|| best_of(false))
}

pub fn generate<M, G>(lm: &M, gaze: Option<&G>, config: &DecoderConfig) -> Result<Generation>
where
    M: LanguageModel + ?Sized,
    G: GazePredictor + ?Sized,
{
    config.validate()?;
    let ctx = DecodeContext::new(lm, gaze, config)?;
    let w = config.gaze_weight;
    let mut beams = vec![CandidateSequence::empty()];
    let mut trace = Vec::new();
    for step in 1..=config.max_tokens {
        if beams.iter().all(|b| b.finished) {
            break;
        }
        beams = ctx.beam_step(&beams);
        if beams.is_empty() {
            break;
        }
        let lead = &beams[0];
        trace.push(TraceStep {
            step,
            token_score: lead.token_score,
            gaze_score: lead.gaze_score,
            total_score: total_score(lead, w),
        });
    }
    let best = pick(&beams, w).cloned().unwrap_or_else(CandidateSequence::empty);
    Ok(Generation {
        text: ctx.continuation(&best.tokens),
        best,
        trace,
    })
}

/// Exact maximizer over every sequence of at most `max_tokens` generatable
/// tokens, with the same preference for finished sequences and the same
/// tie-break as beam search. Unfinished sequences count only at full
/// length.
pub fn exhaustive_generate<M, G>(lm: &M, gaze: Option<&G>, config: &DecoderConfig) -> Result<Generation>
where
    M: LanguageModel + ?Sized,
    G: GazePredictor + ?Sized,
{
    config.validate()?;
    let ctx = DecodeContext::new(lm, gaze, config)?;
    let vocab: Vec<TokenId> = (0..lm.vocabulary().len() as TokenId).filter(|&t| lm.is_generatable(t)).collect();
    let size = (vocab.len() as u128).checked_pow(config.max_tokens as u32).unwrap_or(u128::MAX);
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: EXHAUSTIVE_LIMIT,
        });
    }

    let w = config.gaze_weight;
    let eos = lm.eos();
    let mut best_finished: Option<CandidateSequence> = None;
    let mut best_open: Option<CandidateSequence> = None;
    let mut stack = vec![CandidateSequence::empty()];
    while let Some(node) = stack.pop() {
        let logprobs = lm.next_token_logprobs(&ctx.history(&node));
        for &t in &vocab {
            let lp = logprobs[t as usize];
            if lp == f64::NEG_INFINITY || (t == eos && node.tokens.len() < config.min_tokens) {
                continue;
            }
            let mut tokens = node.tokens.clone();
            tokens.push(t);
            let full = tokens.len() == config.max_tokens;
            let c = ctx.candidate(tokens, node.token_score + lp);
            let slot = if t == eos {
                &mut best_finished
            } else if full {
                &mut best_open
            } else {
                stack.push(c);
                continue;
            };
            if slot.as_ref().is_none_or(|b| rank(&c, b, w) == Ordering::Less) {
                *slot = Some(c);
            }
        }
    }
    let best = best_finished.or(best_open).unwrap_or_else(CandidateSequence::empty);
    Ok(Generation {
        text: ctx.continuation(&best.tokens),
        best,
        trace: Vec::new(),
    })
}

/// One line of the generation JSONL output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub prompt: String,
    pub gaze_weight: f64,
    pub k: usize,
    pub beam_size: usize,
    pub text: String,
    pub token_score: f64,
    pub gaze_score: f64,
    pub total_score: f64,
    pub trace: Vec<TraceStep>,
}

impl GenerationRecord {
    pub fn new(config: &DecoderConfig, g: &Generation) -> Self {
        Self {
            prompt: config.prompt.clone(),
            gaze_weight: config.gaze_weight,
            k: config.top_k,
            beam_size: config.beam_size,
            text: g.text.clone(),
            token_score: g.best.token_score,
            gaze_score: g.best.gaze_score,
            total_score: g.total_score(config.gaze_weight),
            trace: g.trace.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{Vocabulary, EOS};

    /// Next-token distribution keyed on the last token only.
    #[derive(Debug)]
    struct Bigram {
        vocab: Vocabulary,
        table: Vec<Vec<f64>>,
    }

    impl LanguageModel for Bigram {
        fn vocabulary(&self) -> &Vocabulary {
            &self.vocab
        }
        fn next_token_logprobs(&self, context: &[TokenId]) -> Vec<f64> {
            let last = context.last().map_or(0, |&t| t as usize);
            self.table[last].iter().map(|p| p.ln()).collect()
        }
    }

    /// Predicts word length minus 3.
    struct LengthGaze;

    impl GazePredictor for LengthGaze {
        fn predict(&self, words: &[String], i: usize) -> f64 {
            words[i].chars().count() as f64 - 3.0
        }
    }

    struct ConstantGaze(f64);

    impl GazePredictor for ConstantGaze {
        fn predict(&self, _: &[String], _: usize) -> f64 {
            self.0
        }
    }

    // ids: 0 <s>, 1 </s>, 2 <unk>, 3 ▁a, 4 ▁bbbbb, 5 ▁cc
    fn toy() -> Bigram {
        let vocab = Vocabulary::new(["▁a", "▁bbbbb", "▁cc"]).unwrap();
        let row = |eos: f64, a: f64, b: f64, c: f64| {
            let rest = 1.0 - eos - a - b - c;
            vec![rest / 2.0, eos, rest / 2.0, a, b, c]
        };
        Bigram {
            vocab,
            table: vec![
                row(0.01, 0.5, 0.3, 0.18),
                row(0.2, 0.2, 0.2, 0.2),
                row(0.2, 0.2, 0.2, 0.2),
                row(0.6, 0.1, 0.2, 0.09),
                row(0.7, 0.1, 0.1, 0.09),
                row(0.5, 0.2, 0.2, 0.09),
            ],
        }
    }

    const NO_GAZE: Option<&LengthGaze> = None;

    fn config(w: f64, k: usize, beam: usize, max: usize) -> DecoderConfig {
        DecoderConfig {
            top_k: k,
            beam_size: beam,
            gaze_weight: w,
            max_tokens: max,
            min_tokens: 0,
            prompt: String::new(),
            defer_partial_word: false,
        }
    }

    #[test]
    fn total_score_formula() {
        let c = CandidateSequence {
            tokens: vec![],
            words: vec![],
            token_score: -3.0,
            gaze_score: 1.5,
            finished: false,
        };
        assert_eq!(total_score(&c, -2.0), -6.0);
        assert_eq!(total_score(&c, 0.0), -3.0);
        let flat = CandidateSequence { gaze_score: 0.0, ..c };
        assert_eq!(total_score(&flat, 4.0), -3.0);
    }

    #[test]
    fn config_ranges() {
        assert_eq!(config(2.0, 8, 8, 10).validate().unwrap(), None);
        assert!(config(4.0, 8, 8, 10).validate().unwrap().is_some());
        assert!(config(-5.5, 8, 8, 10).validate().is_err());
        assert!(config(0.0, 0, 8, 10).validate().is_err());
    }

    #[test]
    fn greedy_when_beam_and_k_are_one() {
        let lm = toy();
        let g = generate(&lm, NO_GAZE, &config(0.0, 1, 1, 5)).unwrap();
        // a (0.5), then EOS (0.6)
        assert_eq!(g.best.tokens, vec![3, EOS]);
        assert_eq!(g.text, "a");
        assert!((g.best.token_score - (0.5f64.ln() + 0.6f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn one_step_ranking_by_hand() {
        let lm = toy();
        let cfg = config(1.0, 3, 2, 3);
        let gaze = ConstantGaze(0.25);
        let ctx = DecodeContext::new(&lm, Some(&gaze), &cfg).unwrap();
        let next = ctx.beam_step(&[CandidateSequence::empty()]);
        // token scores ln 0.5 > ln 0.3 > ln 0.18, same gaze for all
        let kept: Vec<_> = next.iter().map(|c| c.tokens.clone()).collect();
        assert_eq!(kept, vec![vec![3], vec![4]]);
        assert!(next.iter().all(|c| c.gaze_score == 0.25));
    }

    #[test]
    fn positive_weight_prefers_long_words() {
        let lm = toy();
        let plain = exhaustive_generate(&lm, Some(&LengthGaze), &config(0.0, 8, 8, 2)).unwrap();
        let long = exhaustive_generate(&lm, Some(&LengthGaze), &config(2.0, 8, 8, 2)).unwrap();
        assert_eq!(plain.text, "a");
        assert_eq!(long.text, "bbbbb");
        assert!(long.best.gaze_score > plain.best.gaze_score);
    }

    #[test]
    fn stored_gaze_matches_recomputation() {
        let lm = toy();
        let cfg = config(1.5, 4, 4, 4);
        let g = generate(&lm, Some(&LengthGaze), &cfg).unwrap();
        let words: Vec<String> = g.text.split_whitespace().map(String::from).collect();
        let manual = LengthGaze.score_from(&words, 0);
        assert!((g.best.gaze_score - manual).abs() < 1e-9);
        assert_eq!(g.best.words, words);
        assert_eq!(g.trace.len(), g.trace.last().unwrap().step);
    }

    #[test]
    fn full_beam_matches_exhaustive() {
        let lm = toy();
        for w in [-2.0, -0.5, 0.0, 1.0, 2.0] {
            let cfg = config(w, 6, 6usize.pow(3), 3);
            let beam = generate(&lm, Some(&LengthGaze), &cfg).unwrap();
            let exact = exhaustive_generate(&lm, Some(&LengthGaze), &cfg).unwrap();
            assert_eq!(beam.best, exact.best, "w = {w}");
        }
    }

    #[test]
    fn prompt_words_are_context_only() {
        // prompt words are not scored
        let vocab = Vocabulary::new(["▁a", "▁bbbbb", "▁cc", "x"]).unwrap();
        let mut lm = toy();
        lm.vocab = vocab;
        for row in &mut lm.table {
            row.push(0.0);
        }
        lm.table.push(lm.table[3].clone());
        let mut cfg = config(1.0, 1, 1, 1);
        cfg.prompt = "bbbbb cc".into();
        let c = DecodeContext::new(&lm, Some(&LengthGaze), &cfg).unwrap();
        let id = |p: &str| lm.vocab.id(p).unwrap();
        let cand = c.candidate(vec![id("▁a")], 0.0);
        assert_eq!(cand.words, vec!["a"]);
        assert_eq!(cand.gaze_score, -2.0);
        // a continuation piece extends the last prompt word, which is then scored
        let cand = c.candidate(vec![id("x")], 0.0);
        assert_eq!(cand.words, vec!["ccx"]);
        assert_eq!(cand.gaze_score, 0.0);
        assert_eq!(c.continuation(&[id("x")]), "x");
    }

    #[test]
    fn deferring_skips_the_open_word() {
        let lm = toy();
        let mut cfg = config(1.0, 1, 1, 3);
        cfg.defer_partial_word = true;
        let c = DecodeContext::new(&lm, Some(&LengthGaze), &cfg).unwrap();
        assert_eq!(c.candidate(vec![4, 5], 0.0).gaze_score, 2.0);
        assert_eq!(c.candidate(vec![4, 5, EOS], 0.0).gaze_score, 1.0);
    }

    #[test]
    fn min_tokens_holds_back_eos() {
        let lm = toy();
        let mut cfg = config(0.0, 1, 1, 5);
        cfg.min_tokens = 3;
        let g = generate(&lm, NO_GAZE, &cfg).unwrap();
        assert_eq!(g.best.tokens.len(), 4);
        assert_eq!(g.best.tokens.last(), Some(&EOS));
        let mut full = config(0.5, 6, 6usize.pow(3), 3);
        full.min_tokens = 2;
        let beam = generate(&lm, Some(&LengthGaze), &full).unwrap();
        let exact = exhaustive_generate(&lm, Some(&LengthGaze), &full).unwrap();
        assert_eq!(beam.best, exact.best);
        assert!(exact.best.tokens.len() >= 3 || !exact.best.finished);
    }

    #[test]
    fn exhaustive_guard() {
        let lm = toy();
        assert!(matches!(
            exhaustive_generate(&lm, NO_GAZE, &config(0.0, 1, 1, 12)),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn untokenizable_prompt() {
        let mut cfg = config(0.0, 1, 1, 3);
        cfg.prompt = "zzz".into();
        assert!(matches!(generate(&toy(), NO_GAZE, &cfg), Err(Error::Untokenizable(_))));
    }

    fn random_bigram() -> impl proptest::strategy::Strategy<Value = Bigram> {
        use proptest::prelude::*;
        prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 6).prop_map(|rows| {
            let table = rows
                .into_iter()
                .map(|r| {
                    let z: f64 = r.iter().sum();
                    let p: Vec<f64> = r.iter().map(|v| 0.9 * v / z).collect();
                    vec![0.05, p[0], 0.05, p[1], p[2], p[3]]
                })
                .collect();
            Bigram {
                vocab: Vocabulary::new(["▁a", "▁bbbbb", "▁cc"]).unwrap(),
                table,
            }
        })
    }

    proptest::proptest! {
        #[test]
        fn weight_zero_ignores_the_gaze_model(lm in random_bigram(), beam in 1usize..4) {
            let cfg = config(0.0, 4, beam, 3);
            let with = generate(&lm, Some(&LengthGaze), &cfg).unwrap();
            let without = generate(&lm, NO_GAZE, &cfg).unwrap();
            proptest::prop_assert_eq!(with.text, without.text);
            proptest::prop_assert_eq!(with.best.tokens, without.best.tokens);
        }

        #[test]
        fn exact_decoding_statics(lm in random_bigram()) {
            let weights = [-2.0, -1.0, 0.0, 1.0, 2.0];
            let runs: Vec<Generation> = weights
                .iter()
                .map(|&w| exhaustive_generate(&lm, Some(&LengthGaze), &config(w, 4, 1, 3)).unwrap())
                .collect();
            for pair in runs.windows(2) {
                proptest::prop_assert!(pair[1].best.gaze_score >= pair[0].best.gaze_score - 1e-9);
            }
            for r in &runs {
                proptest::prop_assert!(r.best.token_score <= runs[2].best.token_score + 1e-9);
            }
        }

        #[test]
        fn beam_never_beats_the_optimum(lm in random_bigram(), w in -2.0f64..2.0, beam in 1usize..4) {
            let exact = exhaustive_generate(&lm, Some(&LengthGaze), &config(w, 4, 1, 3)).unwrap();
            let narrow = generate(&lm, Some(&LengthGaze), &config(w, 4, beam, 3)).unwrap();
            if narrow.best.finished == exact.best.finished {
                proptest::prop_assert!(narrow.total_score(w) <= exact.total_score(w) + 1e-12);
            } else {
                proptest::prop_assert!(exact.best.finished);
            }
            let full = generate(&lm, Some(&LengthGaze), &config(w, 4, 4 + 16 + 64, 3)).unwrap();
            proptest::prop_assert_eq!(full.best, exact.best);
        }
    }
}
