//! Browser demo. The models are trained on the bundled corpus when the
//! page loads; `wasm` holds the JavaScript-facing wrappers, everything
//! else runs (and is tested) on the host as well.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gazeguide::decoder::{generate, DecoderConfig};
use gazeguide::gaze_model::{fit_gaze_model, training_rows, LinearGazePredictor, SkipPolicy};
use gazeguide::gaze_processing::{
    compute_measures, detect_fixations_idt, line_height, map_fixations_to_aois, AreaOfInterest, FixationEvent,
    IdtConfig, MeasureRecord,
};
use gazeguide::lm::{NGramConfig, NGramModel};
use gazeguide::metrics::{compute_text_stats, FrequencyLexicon, TextStats};
use gazeguide::simulate::{layout_text, reader_panel, simulate_page, PageLayout, SyntheticReader};
use gazeguide::Result;

pub const CORPUS: &str = include_str!("../../core/data/corpus.txt");
const PIXELS_PER_DEGREE: f64 = 35.0;

const FIXATION_TEXT: &str = "The lighthouse keeper climbed the narrow stairs \
    every evening and lit the enormous lamp before the storm arrived.";

#[derive(Clone, Debug, Serialize)]
pub struct GenerationView {
    pub text: String,
    pub token_score: f64,
    pub gaze_score: f64,
    pub total_score: f64,
    pub finished: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixationView {
    pub words: Vec<AreaOfInterest>,
    /// Valid gaze samples as `[x, y]`.
    pub samples: Vec<[f64; 2]>,
    pub fixations: Vec<FixationEvent>,
    /// Word index per fixation, if it landed on (or near) a word.
    pub assigned: Vec<Option<usize>>,
    pub threshold_px: f64,
    /// First-pass reading time per word.
    pub fprt_ms: Vec<Option<f64>>,
}

/// Synthetic readers feed the measurement pipeline in memory, without
/// the file round trip the command-line tool uses.
fn train_gaze(lexicon: &FrequencyLexicon) -> Result<LinearGazePredictor> {
    let lines: Vec<&str> = CORPUS.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut records = Vec::new();
    for (t, chunk) in lines.chunks(20).take(4).enumerate() {
        let text = chunk.join(" ");
        let aois = layout_text(&text, &PageLayout::default());
        for reader in reader_panel(2) {
            records.extend(read_text(&reader, &aois, lexicon, &format!("t{t}"), &mut rng)?);
        }
    }
    let fit = fit_gaze_model(&training_rows(&records, lexicon, SkipPolicy::Exclude))?;
    Ok(LinearGazePredictor {
        model: fit.model,
        lexicon: lexicon.clone(),
    })
}

fn read_text(
    reader: &SyntheticReader,
    aois: &[AreaOfInterest],
    lexicon: &FrequencyLexicon,
    text_id: &str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MeasureRecord>> {
    let pages = aois.last().map_or(0, |a| a.page + 1);
    let config = IdtConfig::new(PIXELS_PER_DEGREE);
    let mut scanpath = Vec::new();
    for page in 0..pages {
        let boxes: Vec<AreaOfInterest> = aois.iter().filter(|a| a.page == page).cloned().collect();
        let fixations = detect_fixations_idt(&simulate_page(reader, &boxes, lexicon, rng), &config)?;
        let mapped = map_fixations_to_aois(&fixations, &boxes, line_height(&boxes));
        scanpath.extend(mapped.iter().map(|(f, w)| (*w, f.duration_ms)));
    }
    let measures = compute_measures(&scanpath, aois.len(), Default::default());
    Ok(measures
        .into_iter()
        .zip(aois)
        .map(|(m, a)| MeasureRecord {
            reader_id: reader.id.clone(),
            text_id: text_id.to_string(),
            word_index: a.word_index,
            word: a.word.clone(),
            fprt_ms: m.fprt_ms,
            go_past_ms: m.go_past_ms,
            skipped: m.skipped,
            n_fixations: m.n_fixations,
        })
        .collect())
}

pub struct Demo {
    lm: NGramModel,
    gaze: LinearGazePredictor,
    lexicon: FrequencyLexicon,
}

impl Demo {
    pub fn new() -> Result<Self> {
        let lexicon = FrequencyLexicon::from_text(CORPUS)?;
        Ok(Self {
            lm: NGramModel::train_on_text(CORPUS, &NGramConfig::default())?,
            gaze: train_gaze(&lexicon)?,
            lexicon,
        })
    }

    pub fn generate(&self, prompt: &str, gaze_weight: f64, max_tokens: usize) -> Result<GenerationView> {
        let mut config = DecoderConfig::new(prompt);
        config.gaze_weight = gaze_weight;
        config.max_tokens = max_tokens;
        config.min_tokens = max_tokens / 2;
        let g = generate(&self.lm, Some(&self.gaze), &config)?;
        Ok(GenerationView {
            total_score: g.total_score(gaze_weight),
            text: g.text,
            token_score: g.best.token_score,
            gaze_score: g.best.gaze_score,
            finished: g.best.finished,
        })
    }

    pub fn stats(&self, text: &str) -> Result<TextStats> {
        compute_text_stats(text, &self.lexicon)
    }
}

/// One simulated reading of a fixed sentence, fixations detected at the
/// given dispersion threshold.
pub fn fixation_view(threshold_deg: f64, seed: u64) -> Result<FixationView> {
    let layout = PageLayout {
        max_line_width: 640.0,
        left: 20.0,
        top: 30.0,
        ..Default::default()
    };
    let words = layout_text(FIXATION_TEXT, &layout);
    let lexicon = FrequencyLexicon::from_text(CORPUS)?;
    let reader = SyntheticReader::new("demo", false);
    let samples = simulate_page(&reader, &words, &lexicon, &mut ChaCha8Rng::seed_from_u64(seed));
    let config = IdtConfig {
        dispersion_threshold_deg: threshold_deg,
        ..IdtConfig::new(PIXELS_PER_DEGREE)
    };
    let fixations = detect_fixations_idt(&samples, &config)?;
    let mapped = map_fixations_to_aois(&fixations, &words, line_height(&words));
    let scanpath: Vec<(Option<usize>, f64)> = mapped.iter().map(|(f, w)| (*w, f.duration_ms)).collect();
    let measures = compute_measures(&scanpath, words.len(), Default::default());
    Ok(FixationView {
        samples: samples.iter().filter(|s| s.valid).map(|s| [s.x, s.y]).collect(),
        assigned: mapped.iter().map(|(_, w)| *w).collect(),
        fixations,
        threshold_px: config.threshold_px(),
        fprt_ms: measures.iter().map(|m| m.fprt_ms).collect(),
        words,
    })
}

pub mod wasm {
    use wasm_bindgen::prelude::*;

    fn js(e: impl std::fmt::Display) -> JsError {
        JsError::new(&e.to_string())
    }

    fn json<T: serde::Serialize>(v: &T) -> Result<String, JsError> {
        serde_json::to_string(v).map_err(js)
    }

    #[wasm_bindgen]
    pub struct GazeguideDemo(super::Demo);

    #[wasm_bindgen]
    impl GazeguideDemo {
        #[wasm_bindgen(constructor)]
        pub fn new() -> Result<GazeguideDemo, JsError> {
            super::Demo::new().map(GazeguideDemo).map_err(js)
        }

        /// JSON with `text`, `token_score`, `gaze_score`, `total_score`.
        pub fn generate(&self, prompt: &str, gaze_weight: f64, max_tokens: usize) -> Result<String, JsError> {
            json(&self.0.generate(prompt, gaze_weight, max_tokens).map_err(js)?)
        }

        pub fn stats(&self, text: &str) -> Result<String, JsError> {
            json(&self.0.stats(text).map_err(js)?)
        }
    }

    #[wasm_bindgen]
    pub fn fixations(threshold_deg: f64, seed: u32) -> Result<String, JsError> {
        json(&super::fixation_view(threshold_deg, u64::from(seed)).map_err(js)?)
    }
}
