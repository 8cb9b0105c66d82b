//! Predicting normalized first-pass reading time from a word and the two
//! words before it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gaze_processing::MeasureRecord;
use crate::metrics::FrequencyLexicon;
use crate::ols;
use crate::text::{distribute_word_value, TokenAlignment};

pub const FEATURE_NAMES: [&str; 6] = ["len_0", "len_1", "len_2", "zipf_0", "zipf_1", "zipf_2"];

/// Length (characters, punctuation included) and Zipf frequency of the
/// current word (`_0`) and the one (`_1`) and two (`_2`) words before it.
/// Missing predecessors have length 0 and the lexicon's mean Zipf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GazeFeatures {
    pub len_0: f64,
    pub len_1: f64,
    pub len_2: f64,
    pub zipf_0: f64,
    pub zipf_1: f64,
    pub zipf_2: f64,
}

impl GazeFeatures {
    /// In `FEATURE_NAMES` order.
    pub fn to_array(&self) -> [f64; 6] {
        [self.len_0, self.len_1, self.len_2, self.zipf_0, self.zipf_1, self.zipf_2]
    }
}

fn word_features(word: Option<&str>, lexicon: &FrequencyLexicon) -> (f64, f64) {
    match word {
        Some(w) if !w.is_empty() => (w.chars().count() as f64, lexicon.zipf(w).value),
        _ => (0.0, lexicon.mean_zipf()),
    }
}

/// Features of `words[i]`. Only `words[..=i]` is looked at; an empty
/// string counts as a missing word.
pub fn extract_features<S: AsRef<str>>(words: &[S], i: usize, lexicon: &FrequencyLexicon) -> GazeFeatures {
    assert!(i < words.len(), "word index {i} out of range for {} words", words.len());
    let at = |back: usize| i.checked_sub(back).map(|j| words[j].as_ref());
    let (len_0, zipf_0) = word_features(at(0), lexicon);
    let (len_1, zipf_1) = word_features(at(1), lexicon);
    let (len_2, zipf_2) = word_features(at(2), lexicon);
    GazeFeatures {
        len_0,
        len_1,
        len_2,
        zipf_0,
        zipf_1,
        zipf_2,
    }
}

/// Mean and population standard deviation of the training targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZScore {
    pub mean: f64,
    pub std: f64,
}

impl ZScore {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "z-scoring needs at least 2 values, got {}",
                values.len()
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if !(std > 0.0) || !std.is_finite() {
            return Err(Error::ZeroVariance("reading times"));
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

const MODEL_MAGIC: &str = "gazeguide-gaze-linear v1";

#[derive(Clone, Debug, PartialEq)]
pub struct LinearGazeModel {
    /// In `FEATURE_NAMES` order.
    pub weights: [f64; 6],
    pub intercept: f64,
    /// Normalization of the training FPRT, in milliseconds.
    pub zscore: ZScore,
}

impl LinearGazeModel {
    pub fn predict_features(&self, f: &GazeFeatures) -> f64 {
        self.intercept + self.weights.iter().zip(f.to_array()).map(|(w, x)| w * x).sum::<f64>()
    }

    /// Weights and intercept on the millisecond scale.
    pub fn raw_coefficients(&self) -> ([f64; 6], f64) {
        let s = self.zscore.std;
        (self.weights.map(|w| w * s), self.zscore.invert(self.intercept))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MODEL_MAGIC}").unwrap();
        writeln!(out, "features {}", FEATURE_NAMES.join(" ")).unwrap();
        let w: Vec<String> = self.weights.iter().map(|w| format!("{w:?}")).collect();
        writeln!(out, "weights {}", w.join(" ")).unwrap();
        writeln!(out, "intercept {:?}", self.intercept).unwrap();
        writeln!(out, "fprt_mean {:?}", self.zscore.mean).unwrap();
        writeln!(out, "fprt_std {:?}", self.zscore.std).unwrap();
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let bad = |m: String| Error::format(origin, m);
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_MAGIC) {
            return Err(bad(format!("expected header {MODEL_MAGIC:?}")));
        }
        let mut fields: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            fields.insert(key, parts.collect());
        }
        let field = |key: &str| fields.get(key).ok_or_else(|| bad(format!("missing `{key}` line")));
        if field("features")?.as_slice() != FEATURE_NAMES {
            return Err(bad("feature list does not match this version".into()));
        }
        let parse = |key: &str, s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?} in `{key}`")));
        let scalar = |key: &str| -> Result<f64> {
            match field(key)?.as_slice() {
                [v] => parse(key, v),
                _ => Err(bad(format!("`{key}` takes one value"))),
            }
        };
        let w = field("weights")?;
        if w.len() != 6 {
            return Err(bad(format!("expected 6 weights, found {}", w.len())));
        }
        let mut weights = [0.0; 6];
        for (slot, s) in weights.iter_mut().zip(w) {
            *slot = parse("weights", s)?;
        }
        let zscore = ZScore {
            mean: scalar("fprt_mean")?,
            std: scalar("fprt_std")?,
        };
        if !(zscore.std > 0.0) {
            return Err(bad("fprt_std must be positive".into()));
        }
        Ok(Self {
            weights,
            intercept: scalar("intercept")?,
            zscore,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, path)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GazeFit {
    pub model: LinearGazeModel,
    /// Standard errors of the six weights, then of the intercept.
    pub std_errors: [f64; 7],
    pub r_squared: f64,
    pub n: usize,
}

/// OLS of z-normalized FPRT on the six features plus an intercept.
pub fn fit_gaze_model(records: &[(GazeFeatures, f64)]) -> Result<GazeFit> {
    if records.len() < 7 {
        return Err(Error::InvalidArgument(format!(
            "need at least 7 training words, got {}",
            records.len()
        )));
    }
    let targets: Vec<f64> = records.iter().map(|r| r.1).collect();
    let zscore = ZScore::fit(&targets)?;
    let y: Vec<f64> = targets.iter().map(|&t| zscore.apply(t)).collect();
    let rows: Vec<Vec<f64>> = records
        .iter()
        .map(|(f, _)| f.to_array().into_iter().chain([1.0]).collect())
        .collect();
    let names: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).chain(["intercept".into()]).collect();
    let fit = ols::fit(&rows, &y, &names)?;
    let mut weights = [0.0; 6];
    weights.copy_from_slice(&fit.coefficients[..6]);
    let mut std_errors = [0.0; 7];
    std_errors.copy_from_slice(&fit.std_errors);
    Ok(GazeFit {
        model: LinearGazeModel {
            weights,
            intercept: fit.coefficients[6],
            zscore,
        },
        std_errors,
        r_squared: fit.r_squared,
        n: records.len(),
    })
}

pub fn predict_word_fprt<S: AsRef<str>>(
    model: &LinearGazeModel,
    words: &[S],
    i: usize,
    lexicon: &FrequencyLexicon,
) -> f64 {
    model.predict_features(&extract_features(words, i, lexicon))
}

/// Sum of predicted normalized FPRT over all words.
pub fn predict_sequence_gaze_score<S: AsRef<str>>(
    model: &LinearGazeModel,
    words: &[S],
    lexicon: &FrequencyLexicon,
) -> f64 {
    (0..words.len()).map(|i| predict_word_fprt(model, words, i, lexicon)).sum()
}

/// Predicts normalized FPRT of `words[i]` from `words[..=i]` only.
pub trait GazePredictor {
    fn predict(&self, words: &[String], i: usize) -> f64;

    /// Sum of predictions for `words[from..]`, with earlier words serving
    /// as context only.
    fn score_from(&self, words: &[String], from: usize) -> f64 {
        (from..words.len()).map(|i| self.predict(words, i)).sum()
    }
}

impl<T: GazePredictor + ?Sized> GazePredictor for &T {
    fn predict(&self, words: &[String], i: usize) -> f64 {
        (**self).predict(words, i)
    }
}

#[derive(Clone, Debug)]
pub struct LinearGazePredictor {
    pub model: LinearGazeModel,
    pub lexicon: FrequencyLexicon,
}

impl GazePredictor for LinearGazePredictor {
    fn predict(&self, words: &[String], i: usize) -> f64 {
        predict_word_fprt(&self.model, words, i, &self.lexicon)
    }
}

/// What to do with words nobody fixated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SkipPolicy {
    /// Leave them out of training.
    #[default]
    Exclude,
    /// Count them as 0 ms.
    Zero,
}

/// Words of one text with the reader-averaged FPRT of each word.
#[derive(Clone, Debug, PartialEq)]
pub struct TextTargets {
    pub text_id: String,
    /// Indexed by word position; empty where no record names the word.
    pub words: Vec<String>,
    pub fprt_ms: Vec<Option<f64>>,
}

/// Groups measure records by text and averages FPRT over readers. Words
/// with no usable reading time get `None`.
pub fn text_targets(records: &[MeasureRecord], skips: SkipPolicy) -> Vec<TextTargets> {
    let mut texts: BTreeMap<&str, BTreeMap<usize, (&str, f64, usize)>> = BTreeMap::new();
    for r in records {
        let slot = texts
            .entry(&r.text_id)
            .or_default()
            .entry(r.word_index)
            .or_insert((&r.word, 0.0, 0));
        let value = match (r.fprt_ms, skips) {
            (Some(v), _) => Some(v),
            (None, SkipPolicy::Zero) if r.skipped => Some(0.0),
            _ => None,
        };
        if let Some(v) = value {
            slot.1 += v;
            slot.2 += 1;
        }
    }
    texts
        .into_iter()
        .map(|(text_id, words)| {
            let n = words.keys().last().map_or(0, |&k| k + 1);
            let mut out = TextTargets {
                text_id: text_id.to_string(),
                words: vec![String::new(); n],
                fprt_ms: vec![None; n],
            };
            for (i, (w, sum, count)) in words {
                out.words[i] = w.to_string();
                out.fprt_ms[i] = (count > 0).then(|| sum / count as f64);
            }
            out
        })
        .collect()
}

/// One training row per word with a reading time: features from the
/// text's word sequence, target the mean FPRT over readers.
pub fn training_rows(
    records: &[MeasureRecord],
    lexicon: &FrequencyLexicon,
    skips: SkipPolicy,
) -> Vec<(GazeFeatures, f64)> {
    text_targets(records, skips)
        .iter()
        .flat_map(|t| {
            t.fprt_ms
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (extract_features(&t.words, i, lexicon), v)))
        })
        .collect()
}

/// Spreads each word's value evenly over its tokens. Tokens outside any
/// word get `None`.
pub fn token_targets(word_values: &[f64], alignment: &TokenAlignment) -> Result<Vec<Option<f64>>> {
    if word_values.len() != alignment.word_to_tokens.len() {
        return Err(Error::InvalidArgument(format!(
            "{} word values for {} aligned words",
            word_values.len(),
            alignment.word_to_tokens.len()
        )));
    }
    let mut out = vec![None; alignment.token_to_word.len()];
    for (w, tokens) in alignment.word_to_tokens.iter().enumerate() {
        if tokens.is_empty() {
            continue;
        }
        for (&t, v) in tokens.iter().zip(distribute_word_value(word_values[w], tokens.len())?) {
            out[t] = Some(v);
        }
    }
    Ok(out)
}
