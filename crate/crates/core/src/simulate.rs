//! Synthetic readers for exercising the measurement pipeline: lays text
//! out on pages, then produces 1000 Hz gaze samples whose fixation
//! durations grow with word length and shrink with word frequency.

use std::fs;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::gaze_processing::{
    write_aois, write_samples, AreaOfInterest, GazeSample, TrialMetadata, TrialRemoval,
};
use crate::metrics::FrequencyLexicon;
use crate::text::segment_words;

/// Monospaced page geometry in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct PageLayout {
    pub char_width: f64,
    pub line_height: f64,
    pub line_spacing: f64,
    pub left: f64,
    pub top: f64,
    pub max_line_width: f64,
    pub lines_per_page: usize,
}

impl Default for PageLayout {
    fn default() -> Self {
        Self {
            char_width: 12.0,
            line_height: 30.0,
            line_spacing: 20.0,
            left: 60.0,
            top: 80.0,
            max_line_width: 1200.0,
            lines_per_page: 12,
        }
    }
}

/// One box per whitespace word, wrapped into lines and pages.
pub fn layout_text(text: &str, layout: &PageLayout) -> Vec<AreaOfInterest> {
    let step = layout.line_height + layout.line_spacing;
    let mut aois = Vec::new();
    let (mut line, mut x) = (0usize, layout.left);
    for w in segment_words(text) {
        let width = w.char_len() as f64 * layout.char_width;
        if x > layout.left && x + width > layout.left + layout.max_line_width {
            line += 1;
            x = layout.left;
        }
        let y = layout.top + (line % layout.lines_per_page) as f64 * step;
        aois.push(AreaOfInterest {
            word_index: w.index,
            page: (line / layout.lines_per_page) as u32,
            x_min: x,
            y_min: y,
            x_max: x + width,
            y_max: y + layout.line_height,
            word: w.surface,
        });
        x += width + layout.char_width;
    }
    aois
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticReader {
    pub id: String,
    pub group: String,
    /// First-pass time is `base + per_char * length - per_zipf * zipf`
    /// plus Gaussian noise, floored at `min_fixation_ms`.
    pub base_ms: f64,
    pub per_char_ms: f64,
    pub per_zipf_ms: f64,
    pub noise_ms: f64,
    pub min_fixation_ms: f64,
    /// Chance of skipping a word of at most three characters.
    pub skip_short: f64,
    /// Chance of looking back at the previous word after a fixation.
    pub regression: f64,
    /// Chance of a blink between two fixations.
    pub blink: f64,
    /// Chance of answering the comprehension question correctly.
    pub accuracy: f64,
}

impl SyntheticReader {
    /// A native (`L1`) or non-native (`L2`) reader; L2 readers are slower
    /// and more sensitive to length and frequency.
    pub fn new(id: impl Into<String>, native: bool) -> Self {
        let (base, per_char, per_zipf, group) = if native {
            (190.0, 18.0, 14.0, "L1")
        } else {
            (230.0, 26.0, 20.0, "L2")
        };
        Self {
            id: id.into(),
            group: group.into(),
            base_ms: base,
            per_char_ms: per_char,
            per_zipf_ms: per_zipf,
            noise_ms: 70.0,
            min_fixation_ms: 120.0,
            skip_short: 0.2,
            regression: 0.06,
            blink: 0.02,
            accuracy: 0.9,
        }
    }

    pub fn expected_fprt(&self, word: &str, lexicon: &FrequencyLexicon) -> f64 {
        self.base_ms + self.per_char_ms * word.chars().count() as f64 - self.per_zipf_ms * lexicon.zipf(word).value
    }
}

struct SampleWriter {
    samples: Vec<GazeSample>,
    t: u64,
    at: (f64, f64),
}

impl SampleWriter {
    fn fixate(&mut self, rng: &mut ChaCha8Rng, x: f64, y: f64, ms: u64) {
        for _ in 0..ms {
            let jx = rng.random_range(-2.0..=2.0);
            let jy = rng.random_range(-2.0..=2.0);
            self.samples.push(GazeSample::new(self.t as f64, x + jx, y + jy));
            self.t += 1;
        }
        self.at = (x, y);
    }

    fn saccade(&mut self, to: (f64, f64)) {
        let from = self.at;
        let dist = (to.0 - from.0).hypot(to.1 - from.1);
        let steps = (dist / 40.0).ceil().clamp(2.0, 12.0) as u64;
        for s in 1..steps {
            let f = s as f64 / steps as f64;
            self.samples.push(GazeSample::new(
                self.t as f64,
                from.0 + f * (to.0 - from.0),
                from.1 + f * (to.1 - from.1),
            ));
            self.t += 1;
        }
        self.at = to;
    }

    fn lose(&mut self, ms: u64) {
        for _ in 0..ms {
            self.samples.push(GazeSample::lost(self.t as f64));
            self.t += 1;
        }
    }
}

fn centre(a: &AreaOfInterest) -> (f64, f64) {
    // slightly left of centre, as readers tend to land
    (a.x_min + 0.4 * (a.x_max - a.x_min), 0.5 * (a.y_min + a.y_max))
}

/// Gaze samples of one reader reading the boxes of one page in order.
pub fn simulate_page(
    reader: &SyntheticReader,
    page: &[AreaOfInterest],
    lexicon: &FrequencyLexicon,
    rng: &mut ChaCha8Rng,
) -> Vec<GazeSample> {
    let noise = Normal::new(0.0, reader.noise_ms.max(0.0)).expect("finite noise");
    let mut out = SampleWriter {
        samples: Vec::new(),
        t: 0,
        at: (0.0, 0.0),
    };
    out.at = page.first().map_or((0.0, 0.0), centre);
    for (k, a) in page.iter().enumerate() {
        let short = a.word.chars().count() <= 3;
        if short && k > 0 && rng.random::<f64>() < reader.skip_short {
            continue;
        }
        if rng.random::<f64>() < reader.blink {
            out.lose(rng.random_range(60..140));
        }
        let target = centre(a);
        out.saccade(target);
        let ms = (reader.expected_fprt(&a.word, lexicon) + noise.sample(rng)).max(reader.min_fixation_ms);
        out.fixate(rng, target.0, target.1, ms.round() as u64);
        if k > 0 && rng.random::<f64>() < reader.regression {
            let back = centre(&page[k - 1]);
            out.saccade(back);
            let look = rng.random_range(130..200);
            out.fixate(rng, back.0, back.1, look);
            // return to the word before moving on
            out.saccade(target);
            let look = rng.random_range(120..160);
            out.fixate(rng, target.0, target.1, look);
        }
    }
    out.samples
}

/// A text to be read, optionally under an experimental gaze weight.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyText {
    pub text_id: String,
    pub text: String,
    pub gaze_weight: Option<f64>,
}

/// Writes AOI files, sample files and trial metadata for every reader and
/// text into `dir`. Returns the number of trial files written.
pub fn write_study(
    dir: &Path,
    texts: &[StudyText],
    readers: &[SyntheticReader],
    lexicon: &FrequencyLexicon,
    layout: &PageLayout,
    pixels_per_degree: f64,
    seed: u64,
) -> Result<usize> {
    fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = 0;
    for t in texts {
        let aois = layout_text(&t.text, layout);
        let aoi_file = format!("aoi_{}.csv", t.text_id);
        write_aois(&dir.join(&aoi_file), &aois)?;
        let pages = aois.last().map_or(0, |a| a.page + 1);
        for r in readers {
            let answered = rng.random::<f64>() < r.accuracy;
            for page in 0..pages {
                let boxes: Vec<AreaOfInterest> = aois.iter().filter(|a| a.page == page).cloned().collect();
                let samples = simulate_page(r, &boxes, lexicon, &mut rng);
                let stem = format!("{}_{}_p{page}", r.id, t.text_id);
                write_samples(&dir.join(format!("{stem}.csv")), &samples)?;
                let meta = TrialMetadata {
                    reader_id: r.id.clone(),
                    text_id: t.text_id.clone(),
                    page,
                    samples: format!("{stem}.csv").into(),
                    aois: aoi_file.clone().into(),
                    pixels_per_degree,
                    removal: TrialRemoval::None,
                    group: t.gaze_weight.map(|_| r.group.clone()),
                    gaze_weight: t.gaze_weight,
                    answered_correctly: Some(answered),
                };
                fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
                trials += 1;
            }
        }
    }
    Ok(trials)
}

/// Half the readers native, half not, with ids `r01`, `r02`, ...
pub fn reader_panel(n: usize) -> Vec<SyntheticReader> {
    (0..n).map(|i| SyntheticReader::new(format!("r{:02}", i + 1), i % 2 == 0)).collect()
}
