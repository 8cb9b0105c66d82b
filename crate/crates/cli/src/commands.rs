use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gazeguide::analysis::{
    fit_reader_intercept_ols, grouped_mean_sem, observations_from_measures, pearson_by_bucket, pearson_r,
    regression_metrics, Formula, ObservationRow,
};
use gazeguide::decoder::{generate, DecoderConfig, GenerationRecord};
use gazeguide::gaze_model::{
    fit_gaze_model, predict_word_fprt, text_targets, training_rows, LinearGazeModel, LinearGazePredictor, SkipPolicy,
};
use gazeguide::gaze_processing::{
    process_trial_dir, read_measures, write_measures, FirstPassRule, MeasureConfig,
};
use gazeguide::lm::{NGramConfig, NGramModel, TokenizerConfig};
use gazeguide::metrics::{compute_text_stats, FrequencyLexicon, ValueLexicon};
use gazeguide::simulate::{reader_panel, write_study, PageLayout, StudyText};

#[derive(Parser, Debug)]
#[command(name = "gazeguide", version, about = "Language generation guided by predicted reading times")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the tokenizer and n-gram language model on a text corpus.
    TrainLm(TrainLmArgs),
    /// Count word frequencies of a corpus into a Zipf lexicon.
    BuildLexicon(BuildLexiconArgs),
    /// Write synthetic gaze recordings of readers reading the given texts.
    SimulateReading(SimulateArgs),
    /// Detect fixations and compute per-word reading measures.
    ExtractMeasures(ExtractArgs),
    /// Fit the linear reading-time model on a measure CSV.
    TrainGaze(TrainGazeArgs),
    /// Beam search with the gaze score added at each weight.
    Generate(GenerateArgs),
    /// Length, frequency, diversity and readability statistics per text.
    Stats(StatsArgs),
    /// Reading-time regressions with per-reader intercepts.
    Analyze(AnalyzeArgs),
    /// Compare gaze-model predictions with observed reading times.
    EvalGaze(EvalGazeArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::TrainLm(a) => train_lm(a),
        Command::BuildLexicon(a) => build_lexicon(a),
        Command::SimulateReading(a) => simulate_reading(a),
        Command::ExtractMeasures(a) => extract_measures(a),
        Command::TrainGaze(a) => train_gaze(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Stats(a) => stats(a),
        Command::Analyze(a) => analyze(a),
        Command::EvalGaze(a) => eval_gaze(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn non_blank_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn load_lexicon(path: &Path) -> Result<FrequencyLexicon> {
    FrequencyLexicon::load(path).with_context(|| format!("loading lexicon {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_generations(path: &Path) -> Result<Vec<GenerationRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Args, Debug)]
struct TrainLmArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Add-alpha smoothing constant.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Words seen this often become single tokens.
    #[arg(long, default_value_t = 2)]
    min_word_count: usize,
    /// Subword merges learned for rarer words.
    #[arg(long, default_value_t = 200)]
    merges: usize,
    #[arg(long)]
    out: PathBuf,
}

fn train_lm(a: TrainLmArgs) -> Result<()> {
    let corpus = read_text(&a.corpus)?;
    let config = NGramConfig {
        order: a.order,
        alpha: a.alpha,
        tokenizer: TokenizerConfig {
            min_word_count: a.min_word_count,
            merges: a.merges,
        },
    };
    let model = NGramModel::train_on_text(&corpus, &config)?;
    model.save(&a.out)?;
    eprintln!(
        "trained order-{} model, {} tokens in vocabulary",
        model.order(),
        model.tokenizer().vocabulary().len()
    );
    Ok(())
}

#[derive(Args, Debug)]
struct BuildLexiconArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn build_lexicon(a: BuildLexiconArgs) -> Result<()> {
    let lexicon = FrequencyLexicon::from_text(&read_text(&a.corpus)?)?;
    fs::write(&a.out, lexicon.to_tsv()).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("{} word types, {} tokens", lexicon.len(), lexicon.total());
    Ok(())
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["texts", "generations"])))]
struct SimulateArgs {
    /// One text per non-blank line.
    #[arg(long)]
    texts: Option<PathBuf>,
    /// Generation JSONL; each record is read as prompt plus continuation
    /// under its gaze weight.
    #[arg(long)]
    generations: Option<PathBuf>,
    #[arg(long, env = "GAZEGUIDE_LEXICON", default_value = "lexicon.tsv")]
    lexicon: PathBuf,
    /// Number of readers, alternating native and non-native.
    #[arg(long, default_value_t = 8)]
    readers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 35.0)]
    pixels_per_degree: f64,
    /// Output directory for samples, AOIs and trial metadata.
    #[arg(long)]
    out: PathBuf,
}

fn simulate_reading(a: SimulateArgs) -> Result<()> {
    let lexicon = load_lexicon(&a.lexicon)?;
    let texts: Vec<StudyText> = if let Some(path) = &a.texts {
        non_blank_lines(path)?
            .into_iter()
            .enumerate()
            .map(|(i, text)| StudyText {
                text_id: format!("t{:02}", i + 1),
                text,
                gaze_weight: None,
            })
            .collect()
    } else {
        let path = a.generations.as_ref().expect("clap requires one source");
        read_generations(path)?
            .into_iter()
            .enumerate()
            .map(|(i, g)| StudyText {
                text_id: format!("g{:02}", i + 1),
                text: format!("{} {}", g.prompt, g.text).trim().to_string(),
                gaze_weight: Some(g.gaze_weight),
            })
            .collect()
    };
    if texts.is_empty() {
        bail!("no texts to read");
    }
    if a.readers == 0 {
        bail!("need at least one reader");
    }
    let n = write_study(
        &a.out,
        &texts,
        &reader_panel(a.readers),
        &lexicon,
        &PageLayout::default(),
        a.pixels_per_degree,
        a.seed,
    )?;
    eprintln!("wrote {n} trials for {} texts", texts.len());
    Ok(())
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FirstPass {
    /// The first visit counts whenever it happens.
    FirstVisit,
    /// A first visit after any word to the right was fixated does not count.
    BeforeRightward,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Directory of trial metadata (*.json) with their sample and AOI files.
    #[arg(long)]
    trials: PathBuf,
    /// Measure CSV.
    #[arg(long)]
    out: PathBuf,
    /// Data-quality report as JSON.
    #[arg(long)]
    quality: Option<PathBuf>,
    /// Observation rows for `analyze` (trials with a group and gaze weight).
    #[arg(long)]
    observations: Option<PathBuf>,
    /// I-DT dispersion threshold in degrees of visual angle.
    #[arg(long, default_value_t = 1.0)]
    dispersion_deg: f64,
    /// Shortest fixation in ms.
    #[arg(long, default_value_t = 100.0)]
    min_duration_ms: f64,
    #[arg(long, default_value_t = 1.0)]
    sample_interval_ms: f64,
    /// Fixations this close to a word box snap to it; defaults to the
    /// median box height.
    #[arg(long)]
    snap_radius_px: Option<f64>,
    #[arg(long, value_enum, default_value_t = FirstPass::FirstVisit)]
    first_pass: FirstPass,
}

fn extract_measures(a: ExtractArgs) -> Result<()> {
    let config = MeasureConfig {
        dispersion_threshold_deg: a.dispersion_deg,
        min_duration_ms: a.min_duration_ms,
        sample_interval_ms: a.sample_interval_ms,
        snap_radius_px: a.snap_radius_px,
        first_pass: match a.first_pass {
            FirstPass::FirstVisit => FirstPassRule::FirstVisit,
            FirstPass::BeforeRightward => FirstPassRule::BeforeRightward,
        },
    };
    let out = process_trial_dir(&a.trials, &config)?;
    write_measures(&a.out, &out.records)?;
    if let Some(path) = &a.quality {
        fs::write(path, serde_json::to_string_pretty(&out.quality)?)?;
    }
    if let Some(path) = &a.observations {
        write_rows(path, &observations_from_measures(&out.records, &out.design))?;
    }
    eprintln!(
        "{} records from {} trials, {:.2}% samples lost",
        out.records.len(),
        out.quality.trials,
        out.quality.loss_pct
    );
    Ok(())
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Skips {
    /// Leave skipped words out.
    Exclude,
    /// Count skipped words as 0 ms.
    Zero,
}

impl From<Skips> for SkipPolicy {
    fn from(s: Skips) -> Self {
        match s {
            Skips::Exclude => SkipPolicy::Exclude,
            Skips::Zero => SkipPolicy::Zero,
        }
    }
}

#[derive(Args, Debug)]
struct TrainGazeArgs {
    #[arg(long)]
    measures: PathBuf,
    #[arg(long, env = "GAZEGUIDE_LEXICON", default_value = "lexicon.tsv")]
    lexicon: PathBuf,
    #[arg(long, value_enum, default_value_t = Skips::Exclude)]
    skips: Skips,
    #[arg(long)]
    out: PathBuf,
}

fn train_gaze(a: TrainGazeArgs) -> Result<()> {
    let lexicon = load_lexicon(&a.lexicon)?;
    let records = read_measures(&a.measures)?;
    let rows = training_rows(&records, &lexicon, a.skips.into());
    let fit = fit_gaze_model(&rows)?;
    fit.model.save(&a.out)?;
    eprintln!("fitted on {} words, R² = {:.3}", fit.n, fit.r_squared);
    Ok(())
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("prompt_source").required(true).args(["prompt", "prompts"])))]
struct GenerateArgs {
    #[arg(long, env = "GAZEGUIDE_LM", default_value = "lm.txt")]
    lm: PathBuf,
    /// Gaze model; without it only weight 0 is allowed.
    #[arg(long, env = "GAZEGUIDE_GAZE")]
    gaze: Option<PathBuf>,
    #[arg(long, env = "GAZEGUIDE_LEXICON", default_value = "lexicon.tsv")]
    lexicon: PathBuf,
    /// May be repeated.
    #[arg(long)]
    prompt: Vec<String>,
    /// One prompt per non-blank line.
    #[arg(long)]
    prompts: Option<PathBuf>,
    /// Comma-separated list; every prompt is generated at every weight.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    gaze_weight: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    top_k: usize,
    #[arg(long, default_value_t = 8)]
    beam_size: usize,
    #[arg(long, default_value_t = 60)]
    max_tokens: usize,
    /// End of text is not allowed before this many tokens.
    #[arg(long, default_value_t = 0)]
    min_tokens: usize,
    /// Leave the possibly unfinished last word out of the gaze score.
    #[arg(long)]
    defer_partial_word: bool,
    /// JSONL output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn generate_cmd(a: GenerateArgs) -> Result<()> {
    let prompts = match &a.prompts {
        Some(path) => non_blank_lines(path)?,
        None => a.prompt.clone(),
    };
    if prompts.is_empty() {
        bail!("no prompts given");
    }
    let lm = NGramModel::load(&a.lm).with_context(|| format!("loading language model {}", a.lm.display()))?;
    let gaze = match &a.gaze {
        Some(path) => Some(LinearGazePredictor {
            model: LinearGazeModel::load(path).with_context(|| format!("loading gaze model {}", path.display()))?,
            lexicon: load_lexicon(&a.lexicon)?,
        }),
        None => None,
    };
    if gaze.is_none() && a.gaze_weight.iter().any(|&w| w != 0.0) {
        bail!("a nonzero gaze weight needs --gaze");
    }
    let mut out: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    for prompt in &prompts {
        for &w in &a.gaze_weight {
            let config = DecoderConfig {
                top_k: a.top_k,
                beam_size: a.beam_size,
                gaze_weight: w,
                max_tokens: a.max_tokens,
                min_tokens: a.min_tokens,
                prompt: prompt.clone(),
                defer_partial_word: a.defer_partial_word,
            };
            if let Some(warning) = config.validate()? {
                eprintln!("warning: {warning}");
            }
            let g = generate(&lm, gaze.as_ref(), &config)?;
            writeln!(out, "{}", serde_json::to_string(&GenerationRecord::new(&config, &g))?)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("stats_source").required(true).args(["texts", "generations"])))]
struct StatsArgs {
    /// Generation JSONL; statistics cover the continuation only.
    #[arg(long)]
    generations: Option<PathBuf>,
    /// One text per non-blank line.
    #[arg(long)]
    texts: Option<PathBuf>,
    #[arg(long, env = "GAZEGUIDE_LEXICON", default_value = "lexicon.tsv")]
    lexicon: PathBuf,
    /// One row per text.
    #[arg(long)]
    out: PathBuf,
    /// Mean and SEM of each statistic per gaze weight, long format.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Leave MTLD blank for texts too short for it instead of failing.
    #[arg(long)]
    lenient_mtld: bool,
}

#[derive(Serialize)]
struct StatsRow {
    text_id: String,
    prompt: Option<String>,
    gaze_weight: Option<f64>,
    word_count: usize,
    mean_word_length: f64,
    mean_zipf: f64,
    unknown_words: usize,
    mean_sentence_length: f64,
    mtld: Option<f64>,
    fkgl: f64,
}

/// Orders weights numerically; texts without a weight come first.
#[derive(Clone, Copy, Debug, PartialEq)]
struct WeightKey(Option<f64>);

impl Eq for WeightKey {}

impl PartialOrd for WeightKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WeightKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0, other.0) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            (a, b) => a.is_some().cmp(&b.is_some()),
        }
    }
}

#[derive(Serialize)]
struct SummaryRow {
    gaze_weight: Option<f64>,
    statistic: &'static str,
    n: usize,
    mean: f64,
    sem: Option<f64>,
}

fn stats(a: StatsArgs) -> Result<()> {
    let lexicon = load_lexicon(&a.lexicon)?;
    let inputs: Vec<(String, Option<String>, Option<f64>, String)> = if let Some(path) = &a.generations {
        read_generations(path)?
            .into_iter()
            .enumerate()
            .map(|(i, g)| (format!("g{:02}", i + 1), Some(g.prompt), Some(g.gaze_weight), g.text))
            .collect()
    } else {
        let path = a.texts.as_ref().expect("clap requires one source");
        non_blank_lines(path)?
            .into_iter()
            .enumerate()
            .map(|(i, t)| (format!("t{:02}", i + 1), None, None, t))
            .collect()
    };
    let mut rows = Vec::with_capacity(inputs.len());
    for (text_id, prompt, gaze_weight, text) in inputs {
        let s = compute_text_stats(&text, &lexicon).with_context(|| format!("text {text_id}"))?;
        if s.mtld.is_none() && !a.lenient_mtld {
            return Err(gazeguide::Error::InsufficientRepetition(format!(
                "text {text_id} is too short or too varied; pass --lenient-mtld to leave it blank"
            ))
            .into());
        }
        rows.push(StatsRow {
            text_id,
            prompt,
            gaze_weight,
            word_count: s.word_count,
            mean_word_length: s.mean_word_length,
            mean_zipf: s.mean_zipf,
            unknown_words: s.unknown_words,
            mean_sentence_length: s.mean_sentence_length,
            mtld: s.mtld,
            fkgl: s.fkgl,
        });
    }
    write_rows(&a.out, &rows)?;
    if let Some(path) = &a.summary {
        let statistics: [(&'static str, fn(&StatsRow) -> Option<f64>); 6] = [
            ("mean_word_length", |r| Some(r.mean_word_length)),
            ("mean_zipf", |r| Some(r.mean_zipf).filter(|v| v.is_finite())),
            ("mean_sentence_length", |r| Some(r.mean_sentence_length)),
            ("mtld", |r| r.mtld),
            ("fkgl", |r| Some(r.fkgl)),
            ("word_count", |r| Some(r.word_count as f64)),
        ];
        let mut summary = Vec::new();
        for (name, get) in statistics {
            let groups = grouped_mean_sem(rows.iter().filter_map(|r| Some((WeightKey(r.gaze_weight), get(r)?))));
            summary.extend(groups.into_iter().map(|g| SummaryRow {
                gaze_weight: g.key.0,
                statistic: name,
                n: g.n,
                mean: g.mean,
                sem: g.sem,
            }));
        }
        write_rows(path, &summary)?;
    }
    Ok(())
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Observation CSV written by `extract-measures --observations`.
    #[arg(long)]
    observations: PathBuf,
    /// Word prevalence TSV (word, value).
    #[arg(long)]
    prevalence: PathBuf,
    /// Coefficients of every formula per reader group, long format.
    #[arg(long)]
    out: PathBuf,
    /// Mean and SEM of FPRT per group and gaze weight.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Serialize)]
struct CoefficientRow<'a> {
    group: &'a str,
    formula: String,
    term: &'a str,
    estimate: f64,
    std_error: f64,
    ci_low: f64,
    ci_high: f64,
    n: usize,
    n_readers: usize,
    r_squared: f64,
    dropped: usize,
}

#[derive(Serialize)]
struct FprtSummaryRow<'a> {
    group: &'a str,
    gaze_weight: f64,
    n: usize,
    mean_fprt_ms: f64,
    sem: Option<f64>,
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let mut reader = csv::Reader::from_path(&a.observations)
        .with_context(|| format!("opening {}", a.observations.display()))?;
    let rows: Vec<ObservationRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .with_context(|| format!("reading {}", a.observations.display()))?;
    let prevalence = ValueLexicon::load(&a.prevalence)?;
    eprintln!("note: reader intercepts are fixed effects (effect-coded OLS), standing in for random intercepts");
    let groups: BTreeSet<&str> = rows.iter().map(|r| r.group.as_str()).collect();
    let mut fits = Vec::new();
    for &group in &groups {
        let subset: Vec<ObservationRow> = rows.iter().filter(|r| r.group == group).cloned().collect();
        for formula in Formula::ALL {
            let fit = fit_reader_intercept_ols(&subset, Some(&prevalence), formula)
                .with_context(|| format!("group {group}, {formula}"))?;
            fits.push((group, fit));
        }
    }
    let coefficients: Vec<CoefficientRow> = fits
        .iter()
        .flat_map(|(group, fit)| {
            fit.coefficients.iter().map(move |c| CoefficientRow {
                group,
                formula: fit.formula.to_string(),
                term: &c.term,
                estimate: c.estimate,
                std_error: c.std_error,
                ci_low: c.ci_low,
                ci_high: c.ci_high,
                n: fit.n,
                n_readers: fit.n_readers,
                r_squared: fit.r_squared,
                dropped: fit.dropped,
            })
        })
        .collect();
    write_rows(&a.out, &coefficients)?;
    if let Some(path) = &a.summary {
        let summary = grouped_mean_sem(
            rows.iter()
                .map(|r| ((r.group.as_str(), WeightKey(Some(r.gaze_weight))), r.fprt_ms)),
        );
        let out: Vec<FprtSummaryRow> = summary
            .iter()
            .map(|g| FprtSummaryRow {
                group: g.key.0,
                gaze_weight: g.key.1 .0.unwrap_or_default(),
                n: g.n,
                mean_fprt_ms: g.mean,
                sem: g.sem,
            })
            .collect();
        write_rows(path, &out)?;
    }
    Ok(())
}

#[derive(Args, Debug)]
struct EvalGazeArgs {
    #[arg(long, env = "GAZEGUIDE_GAZE", default_value = "gaze.txt")]
    gaze: PathBuf,
    #[arg(long, env = "GAZEGUIDE_LEXICON", default_value = "lexicon.tsv")]
    lexicon: PathBuf,
    /// Measure CSV with the observed reading times.
    #[arg(long)]
    measures: PathBuf,
    /// Word prevalence TSV; adds correlations per prevalence bucket.
    #[arg(long)]
    prevalence: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    buckets: usize,
    #[arg(long, value_enum, default_value_t = Skips::Exclude)]
    skips: Skips,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct EvalRow {
    scope: String,
    n: usize,
    mse: Option<f64>,
    mae: Option<f64>,
    r_squared: Option<f64>,
    pearson_r: f64,
    ci_low: f64,
    ci_high: f64,
    key_min: Option<f64>,
    key_max: Option<f64>,
}

fn eval_gaze(a: EvalGazeArgs) -> Result<()> {
    let model = LinearGazeModel::load(&a.gaze).with_context(|| format!("loading gaze model {}", a.gaze.display()))?;
    let lexicon = load_lexicon(&a.lexicon)?;
    let records = read_measures(&a.measures)?;
    let prevalence = a.prevalence.as_deref().map(ValueLexicon::load).transpose()?;
    // normalized scale: observations go through the model's own z-score
    let (mut pred, mut obs, mut keyed) = (Vec::new(), Vec::new(), Vec::new());
    for t in text_targets(&records, a.skips.into()) {
        for (i, v) in t.fprt_ms.iter().enumerate() {
            let Some(v) = v else { continue };
            let p = predict_word_fprt(&model, &t.words, i, &lexicon);
            let o = model.zscore.apply(*v);
            pred.push(p);
            obs.push(o);
            if let Some(key) = prevalence.as_ref().and_then(|lex| lex.get(&t.words[i])) {
                keyed.push((p, o, key));
            }
        }
    }
    let m = regression_metrics(&pred, &obs)?;
    let r = pearson_r(&pred, &obs)?;
    let mut rows = vec![EvalRow {
        scope: "all".into(),
        n: m.n,
        mse: Some(m.mse),
        mae: Some(m.mae),
        r_squared: Some(m.r_squared),
        pearson_r: r.r,
        ci_low: r.ci_low,
        ci_high: r.ci_high,
        key_min: None,
        key_max: None,
    }];
    if prevalence.is_some() {
        let p: Vec<f64> = keyed.iter().map(|k| k.0).collect();
        let o: Vec<f64> = keyed.iter().map(|k| k.1).collect();
        let key: Vec<f64> = keyed.iter().map(|k| k.2).collect();
        for b in pearson_by_bucket(&p, &o, &key, a.buckets)? {
            rows.push(EvalRow {
                scope: format!("prevalence_{}", b.bucket),
                n: b.correlation.n,
                mse: None,
                mae: None,
                r_squared: None,
                pearson_r: b.correlation.r,
                ci_low: b.correlation.ci_low,
                ci_high: b.correlation.ci_high,
                key_min: Some(b.key_min),
                key_max: Some(b.key_max),
            });
        }
    }
    write_rows(&a.out, &rows)?;
    eprintln!("R² = {:.3}, r = {:.3} over {} words", m.r_squared, r.r, m.n);
    Ok(())
}
