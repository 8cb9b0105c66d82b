//! Regressions of observed reading times, correlations between predicted
//! and observed values, and grouped summaries.
//!
//! Per-reader intercepts are fixed effects with effect coding, so the
//! reported intercept is the average reader's intercept. This stands in
//! for a random-intercept model; slopes are comparable, the variance
//! component is not estimated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaze_processing::{MeasureRecord, TrialDesign};
use crate::metrics::ValueLexicon;
use crate::ols;

/// Normal quantile for two-sided 95% intervals.
pub const Z_95: f64 = 1.959963984540054;

/// One fixated word of one reader; the word length counts punctuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub reader_id: String,
    pub group: String,
    pub gaze_weight: f64,
    pub text_id: String,
    pub word_index: usize,
    pub word: String,
    pub fprt_ms: f64,
}

impl ObservationRow {
    pub fn word_length(&self) -> usize {
        self.word.chars().count()
    }
}

/// Joins measure records with each trial's condition. Skipped words and
/// trials without a group or gaze weight are left out.
pub fn observations_from_measures(records: &[MeasureRecord], design: &[TrialDesign]) -> Vec<ObservationRow> {
    let conditions: BTreeMap<(&str, &str), (&str, f64)> = design
        .iter()
        .filter_map(|d| match (&d.group, d.gaze_weight) {
            (Some(g), Some(w)) => Some(((d.reader_id.as_str(), d.text_id.as_str()), (g.as_str(), w))),
            _ => None,
        })
        .collect();
    records
        .iter()
        .filter_map(|r| {
            let &(group, gaze_weight) = conditions.get(&(r.reader_id.as_str(), r.text_id.as_str()))?;
            Some(ObservationRow {
                reader_id: r.reader_id.clone(),
                group: group.to_string(),
                gaze_weight,
                text_id: r.text_id.clone(),
                word_index: r.word_index,
                word: r.word.clone(),
                fprt_ms: r.fprt_ms?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    /// `fprt ~ gaze_weight + (1|reader)`
    GazeWeight,
    /// `fprt ~ word_length + word_prevalence + (1|reader)`
    LengthPrevalence,
    /// `fprt ~ gaze_weight + word_length + word_prevalence + (1|reader)`
    Full,
}

impl Formula {
    pub const ALL: [Formula; 3] = [Formula::GazeWeight, Formula::LengthPrevalence, Formula::Full];

    pub fn uses_gaze_weight(self) -> bool {
        matches!(self, Formula::GazeWeight | Formula::Full)
    }

    pub fn uses_word_measures(self) -> bool {
        matches!(self, Formula::LengthPrevalence | Formula::Full)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formula::GazeWeight => "fprt ~ gaze_weight + (1|reader)",
            Formula::LengthPrevalence => "fprt ~ word_length + word_prevalence + (1|reader)",
            Formula::Full => "fprt ~ gaze_weight + word_length + word_prevalence + (1|reader)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionResult {
    pub formula: Formula,
    /// Intercept first, then the fixed effects; reader effects are left out.
    pub coefficients: Vec<Coefficient>,
    /// From the OLS fit with reader effects included.
    pub r_squared: f64,
    pub n: usize,
    pub n_readers: usize,
    /// Rows dropped because their word has no prevalence value.
    pub dropped: usize,
}

impl RegressionResult {
    pub fn get(&self, term: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == term)
    }
}

pub fn gaze_weight_term(level: f64) -> String {
    if level > 0.0 {
        format!("gaze_weight[+{level}]")
    } else {
        format!("gaze_weight[{level}]")
    }
}

/// OLS with effect-coded reader intercepts. Gaze weight is categorical
/// with level 0 as reference. With a prevalence lexicon, rows whose word
/// is missing from it are dropped for every formula, so all formulas see
/// the same rows.
pub fn fit_reader_intercept_ols(
    rows: &[ObservationRow],
    prevalence: Option<&ValueLexicon>,
    formula: Formula,
) -> Result<RegressionResult> {
    if formula.uses_word_measures() && prevalence.is_none() {
        return Err(Error::InvalidArgument(format!("`{formula}` needs word prevalence values")));
    }
    let mut kept: Vec<(&ObservationRow, f64)> = Vec::with_capacity(rows.len());
    for r in rows {
        match prevalence {
            Some(lex) => {
                if let Some(p) = lex.get(&r.word) {
                    kept.push((r, p));
                }
            }
            None => kept.push((r, f64::NAN)),
        }
    }
    let dropped = rows.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::EmptyInput("observations"));
    }

    let readers: Vec<&str> = kept
        .iter()
        .map(|(r, _)| r.reader_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if readers.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 readers, found {}",
            readers.len()
        )));
    }
    let mut levels: Vec<f64> = Vec::new();
    if formula.uses_gaze_weight() {
        let mut seen: Vec<f64> = kept.iter().map(|(r, _)| r.gaze_weight).collect();
        seen.sort_by(|a, b| b.total_cmp(a));
        seen.dedup();
        if !seen.contains(&0.0) {
            return Err(Error::InvalidArgument("no rows at the reference gaze weight 0".into()));
        }
        if seen.len() < 2 {
            return Err(Error::InvalidArgument("need rows at two or more gaze weights".into()));
        }
        levels = seen.into_iter().filter(|&w| w != 0.0).collect();
    }

    let mut names = vec!["Intercept".to_string()];
    names.extend(levels.iter().map(|&l| gaze_weight_term(l)));
    if formula.uses_word_measures() {
        names.push("word_length".into());
        names.push("word_prevalence".into());
    }
    let n_fixed = names.len();
    names.extend(readers[..readers.len() - 1].iter().map(|r| format!("reader[{r}]")));

    let last_reader = readers.len() - 1;
    let design: Vec<Vec<f64>> = kept
        .iter()
        .map(|&(r, prev)| {
            let mut row = vec![1.0];
            row.extend(levels.iter().map(|&l| f64::from(u8::from(r.gaze_weight == l))));
            if formula.uses_word_measures() {
                row.push(r.word_length() as f64);
                row.push(prev);
            }
            let idx = readers.binary_search(&r.reader_id.as_str()).expect("reader listed");
            row.extend((0..last_reader).map(|j| {
                if idx == last_reader {
                    -1.0
                } else {
                    f64::from(u8::from(idx == j))
                }
            }));
            row
        })
        .collect();
    let y: Vec<f64> = kept.iter().map(|(r, _)| r.fprt_ms).collect();
    let fit = ols::fit(&design, &y, &names)?;

    let coefficients = (0..n_fixed)
        .map(|j| {
            let (b, se) = (fit.coefficients[j], fit.std_errors[j]);
            Coefficient {
                term: names[j].clone(),
                estimate: b,
                std_error: se,
                ci_low: b - Z_95 * se,
                ci_high: b + Z_95 * se,
            }
        })
        .collect();
    Ok(RegressionResult {
        formula,
        coefficients,
        r_squared: fit.r_squared,
        n: kept.len(),
        n_readers: readers.len(),
        dropped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_pairs(pred: &[f64], obs: &[f64]) -> Result<()> {
    if pred.len() != obs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} observations",
            pred.len(),
            obs.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("paired values"));
    }
    Ok(())
}

/// Pearson's r with a Fisher-z 95% interval.
pub fn pearson_r(pred: &[f64], obs: &[f64]) -> Result<Correlation> {
    check_pairs(pred, obs)?;
    let n = pred.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 pairs, got {n}")));
    }
    let (mp, mo) = (mean(pred), mean(obs));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, o) in pred.iter().zip(obs) {
        sxy += (p - mp) * (o - mo);
        sxx += (p - mp).powi(2);
        syy += (o - mo).powi(2);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("predictions"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("observations"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let (ci_low, ci_high) = if r.abs() == 1.0 {
        (r, r)
    } else {
        let z = r.atanh();
        let half = Z_95 / ((n as f64) - 3.0).sqrt();
        ((z - half).tanh(), (z + half).tanh())
    };
    Ok(Correlation { r, ci_low, ci_high, n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketCorrelation {
    pub bucket: String,
    pub key_min: f64,
    pub key_max: f64,
    pub correlation: Correlation,
}

pub fn bucket_labels(n: usize) -> Vec<String> {
    if n == 3 {
        return vec!["low".into(), "medium".into(), "high".into()];
    }
    (1..=n).map(|i| format!("q{i}")).collect()
}

/// Correlation within equal-count quantile buckets of `key` (ties broken
/// by position). Earlier buckets take the remainder rows.
pub fn pearson_by_bucket(pred: &[f64], obs: &[f64], key: &[f64], buckets: usize) -> Result<Vec<BucketCorrelation>> {
    check_pairs(pred, obs)?;
    if key.len() != pred.len() {
        return Err(Error::InvalidArgument("bucket key length differs from the data".into()));
    }
    if buckets == 0 {
        return Err(Error::InvalidArgument("need at least one bucket".into()));
    }
    let mut order: Vec<usize> = (0..key.len()).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let (base, extra) = (order.len() / buckets, order.len() % buckets);
    let mut start = 0;
    bucket_labels(buckets)
        .into_iter()
        .enumerate()
        .map(|(b, bucket)| {
            let len = base + usize::from(b < extra);
            let idx = &order[start..start + len];
            start += len;
            let p: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
            let o: Vec<f64> = idx.iter().map(|&i| obs[i]).collect();
            Ok(BucketCorrelation {
                bucket,
                key_min: idx.first().map_or(f64::NAN, |&i| key[i]),
                key_max: idx.last().map_or(f64::NAN, |&i| key[i]),
                correlation: pearson_r(&p, &o)?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mse: f64,
    pub mae: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn regression_metrics(pred: &[f64], obs: &[f64]) -> Result<RegressionMetrics> {
    check_pairs(pred, obs)?;
    let n = pred.len() as f64;
    let mo = mean(obs);
    let ss_tot: f64 = obs.iter().map(|o| (o - mo).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance("observations"));
    }
    let ss_res: f64 = pred.iter().zip(obs).map(|(p, o)| (o - p).powi(2)).sum();
    Ok(RegressionMetrics {
        mse: ss_res / n,
        mae: pred.iter().zip(obs).map(|(p, o)| (o - p).abs()).sum::<f64>() / n,
        r_squared: 1.0 - ss_res / ss_tot,
        n: pred.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary<K> {
    pub key: K,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; missing for one value.
    pub sem: Option<f64>,
}

pub fn grouped_mean_sem<K: Ord + Clone>(items: impl IntoIterator<Item = (K, f64)>) -> Vec<GroupSummary<K>> {
    let mut groups: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in items {
        groups.entry(k).or_default().push(v);
    }
    groups
        .into_iter()
        .map(|(key, v)| {
            let n = v.len();
            let m = mean(&v);
            let sem = (n > 1).then(|| {
                let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                var.sqrt() / (n as f64).sqrt()
            });
            GroupSummary { key, n, mean: m, sem }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::collections::HashMap;

    const WORDS: [&str; 8] = ["a", "cat", "house", "together", "extraordinary", "of", "mountain", "sea."];

    fn prevalence() -> ValueLexicon {
        let values = [2.3, 2.2, 2.1, 1.9, 1.2, 2.4, 1.8, 2.0];
        ValueLexicon::new(WORDS.iter().map(|w| crate::text::clean_form(w)).zip(values).collect::<HashMap<_, _>>())
    }

    /// fprt = 100 + 30 [w=+2] - 10 [w=-2] + 20 len - 15 prev + reader offset + noise
    fn synthetic(seed: u64, readers: usize, per_reader: usize, noise: f64) -> Vec<ObservationRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let lex = prevalence();
        let mut rows = Vec::new();
        for r in 0..readers {
            let offset = 15.0 * normal.sample(&mut rng);
            for i in 0..per_reader {
                let w = [-2.0, 0.0, 2.0][i % 3];
                let word = WORDS[rng.random_range(0..WORDS.len())];
                let effect = match w {
                    2.0 => 30.0,
                    -2.0 => -10.0,
                    _ => 0.0,
                };
                let len = word.chars().count() as f64;
                let fprt = 100.0 + effect + 20.0 * len - 15.0 * lex.get(word).unwrap() + offset + noise * normal.sample(&mut rng);
                rows.push(ObservationRow {
                    reader_id: format!("r{r:02}"),
                    group: "L1".into(),
                    gaze_weight: w,
                    text_id: format!("t{}", i % 3),
                    word_index: i,
                    word: word.into(),
                    fprt_ms: fprt,
                });
            }
        }
        rows
    }

    #[test]
    fn zero_noise_recovers_exactly() {
        let rows = synthetic(1, 6, 90, 0.0);
        let r = fit_reader_intercept_ols(&rows, Some(&prevalence()), Formula::Full).unwrap();
        let want = [("gaze_weight[+2]", 30.0), ("gaze_weight[-2]", -10.0), ("word_length", 20.0), ("word_prevalence", -15.0)];
        for (term, v) in want {
            assert!((r.get(term).unwrap().estimate - v).abs() < 1e-6, "{term}");
        }
        assert_eq!(r.coefficients[0].term, "Intercept");
        assert_eq!(r.n_readers, 6);
        assert_eq!(r.dropped, 0);
    }

    #[test]
    fn intercept_is_the_mean_reader_intercept() {
        let mut rows = synthetic(2, 3, 30, 0.0);
        // reader offsets 0, 10, 50 on top of a base of 200
        for row in &mut rows {
            let off = match row.reader_id.as_str() {
                "r00" => 0.0,
                "r01" => 10.0,
                _ => 50.0,
            };
            row.fprt_ms = 200.0 + off + if row.gaze_weight == 2.0 { 5.0 } else { 0.0 };
        }
        let r = fit_reader_intercept_ols(&rows, None, Formula::GazeWeight).unwrap();
        assert!((r.get("Intercept").unwrap().estimate - 220.0).abs() < 1e-9);
        assert!((r.get("gaze_weight[+2]").unwrap().estimate - 5.0).abs() < 1e-9);
        assert!(r.get("gaze_weight[-2]").unwrap().estimate.abs() < 1e-9);
    }

    #[test]
    fn missing_prevalence_rows_are_dropped() {
        let mut rows = synthetic(3, 3, 30, 5.0);
        rows[0].word = "zyzzyva".into();
        rows[1].word = "qwerty".into();
        let r = fit_reader_intercept_ols(&rows, Some(&prevalence()), Formula::LengthPrevalence).unwrap();
        assert_eq!(r.dropped, 2);
        assert_eq!(r.n, rows.len() - 2);
        assert!(fit_reader_intercept_ols(&rows, None, Formula::Full).is_err());
    }

    #[test]
    fn input_errors() {
        let rows = synthetic(4, 1, 30, 5.0);
        assert!(fit_reader_intercept_ols(&rows, None, Formula::GazeWeight).is_err());
        let mut rows = synthetic(4, 3, 30, 5.0);
        rows.retain(|r| r.gaze_weight == 0.0);
        assert!(fit_reader_intercept_ols(&rows, None, Formula::GazeWeight).is_err());
        let mut rows = synthetic(4, 3, 30, 5.0);
        rows.retain(|r| r.gaze_weight != 0.0);
        assert!(fit_reader_intercept_ols(&rows, None, Formula::GazeWeight).is_err());
    }

    #[test]
    fn ci_brackets_estimate_and_monte_carlo_coverage() {
        let mut covered = [0usize; 2];
        let seeds = 60;
        for seed in 0..seeds {
            let rows = synthetic(100 + seed, 12, 90, 5.0);
            let r = fit_reader_intercept_ols(&rows, None, Formula::GazeWeight).unwrap();
            for c in &r.coefficients {
                assert!(c.ci_low <= c.estimate && c.estimate <= c.ci_high);
            }
            let r = fit_reader_intercept_ols(&rows, Some(&prevalence()), Formula::Full).unwrap();
            for (k, (term, v)) in [("gaze_weight[+2]", 30.0), ("gaze_weight[-2]", -10.0)].into_iter().enumerate() {
                let c = r.get(term).unwrap();
                covered[k] += usize::from(c.ci_low <= v && v <= c.ci_high);
            }
        }
        for c in covered {
            assert!(c as f64 >= 0.85 * seeds as f64, "{covered:?}");
        }
    }

    #[test]
    fn pearson_examples() {
        let p = [1.0, 2.0, 4.0, 7.0, 3.0];
        let twice: Vec<f64> = p.iter().map(|x| 2.0 * x + 1.0).collect();
        let neg: Vec<f64> = p.iter().map(|x| -x).collect();
        assert!((pearson_r(&p, &twice).unwrap().r - 1.0).abs() < 1e-15);
        assert!((pearson_r(&p, &neg).unwrap().r + 1.0).abs() < 1e-15);
        assert!(matches!(pearson_r(&p, &[1.0; 5]), Err(Error::ZeroVariance(_))));
        let c = pearson_r(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((c.r - 0.8).abs() < 1e-12);
        assert!(c.ci_low < c.r && c.r < c.ci_high);
    }

    #[test]
    fn buckets_split_evenly() {
        let key: Vec<f64> = (0..10).map(|i| (9 - i) as f64).collect();
        let pred: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let obs: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let b = pearson_by_bucket(&pred, &obs, &key, 3).unwrap();
        assert_eq!(b.iter().map(|x| x.correlation.n).collect::<Vec<_>>(), vec![4, 3, 3]);
        assert_eq!(b[0].bucket, "low");
        assert_eq!((b[0].key_min, b[0].key_max), (0.0, 3.0));
        assert_eq!((b[2].key_min, b[2].key_max), (7.0, 9.0));
    }

    #[test]
    fn metrics_examples() {
        let obs = [1.0, 3.0, 2.0, 6.0];
        let m = regression_metrics(&obs, &obs).unwrap();
        assert_eq!((m.mse, m.mae, m.r_squared), (0.0, 0.0, 1.0));
        let flat = regression_metrics(&[3.0; 4], &obs).unwrap();
        assert!(flat.r_squared.abs() < 1e-15);
        // residuals 1, -1, 0, 2
        let m = regression_metrics(&[0.0, 4.0, 2.0, 4.0], &obs).unwrap();
        assert!((m.mse - 1.5).abs() < 1e-15);
        assert!((m.mae - 1.0).abs() < 1e-15);
        assert!((m.r_squared - (1.0 - 6.0 / 14.0)).abs() < 1e-15);
        assert!(regression_metrics(&[1.0, 2.0], &[3.0, 3.0]).is_err());
    }

    #[test]
    fn mean_sem_examples() {
        let g = grouped_mean_sem([("a", 4.0), ("a", 6.0), ("b", 3.0)]);
        assert_eq!(g[0].mean, 5.0);
        assert!((g[0].sem.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(g[1].sem, None);
        let g = grouped_mean_sem([(1, 2.0), (1, 4.0), (1, 9.0)]);
        // mean 5, s^2 = (9 + 1 + 16) / 2 = 13
        assert!((g[0].sem.unwrap() - (13.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn observations_join_design() {
        let rec = |reader: &str, text: &str, fprt: Option<f64>| MeasureRecord {
            reader_id: reader.into(),
            text_id: text.into(),
            word_index: 0,
            word: "cat".into(),
            fprt_ms: fprt,
            go_past_ms: fprt,
            skipped: fprt.is_none(),
            n_fixations: 1,
        };
        let design = vec![
            TrialDesign {
                reader_id: "a".into(),
                text_id: "t".into(),
                group: Some("L2".into()),
                gaze_weight: Some(-2.0),
            },
            TrialDesign {
                reader_id: "b".into(),
                text_id: "t".into(),
                group: None,
                gaze_weight: Some(2.0),
            },
        ];
        let rows = observations_from_measures(&[rec("a", "t", Some(120.0)), rec("a", "t", None), rec("b", "t", Some(90.0))], &design);
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].group.as_str(), rows[0].gaze_weight, rows[0].fprt_ms), ("L2", -2.0, 120.0));
    }

    fn small_rows() -> impl Strategy<Value = Vec<ObservationRow>> {
        prop::collection::vec((0usize..4, 0usize..3, 0usize..WORDS.len(), 50.0f64..400.0), 30..80).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (r, w, word, fprt))| ObservationRow {
                    // every reader and level appears at least once
                    reader_id: format!("r{}", if i < 4 { i } else { r }),
                    group: "L1".into(),
                    gaze_weight: [-2.0, 0.0, 2.0][if i < 3 { i } else { w }],
                    text_id: "t".into(),
                    word_index: i,
                    word: WORDS[if i < WORDS.len() { i } else { word }].into(),
                    fprt_ms: fprt,
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 5..40),
            a in 0.1f64..10.0, b in -50.0f64..50.0,
        ) {
            let (p, o): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(base) = pearson_r(&p, &o) {
                let moved: Vec<f64> = p.iter().map(|x| a * x + b).collect();
                let neg: Vec<f64> = o.iter().map(|x| -x).collect();
                prop_assert!((pearson_r(&moved, &o).unwrap().r - base.r).abs() < 1e-9);
                prop_assert!((pearson_r(&p, &neg).unwrap().r + base.r).abs() < 1e-9);
            }
        }

        #[test]
        fn more_predictors_never_lower_r2(rows in small_rows()) {
            let lex = prevalence();
            let small = fit_reader_intercept_ols(&rows, Some(&lex), Formula::GazeWeight);
            let big = fit_reader_intercept_ols(&rows, Some(&lex), Formula::Full);
            if let (Ok(s), Ok(b)) = (small, big) {
                prop_assert!(b.r_squared >= s.r_squared - 1e-12);
                let lp = fit_reader_intercept_ols(&rows, Some(&lex), Formula::LengthPrevalence).unwrap();
                prop_assert!(b.r_squared >= lp.r_squared - 1e-12);
            }
        }

        #[test]
        fn constant_shift_moves_only_the_intercept(rows in small_rows(), c in -100.0f64..100.0) {
            let lex = prevalence();
            if let Ok(base) = fit_reader_intercept_ols(&rows, Some(&lex), Formula::Full) {
                let shifted: Vec<ObservationRow> = rows.iter().cloned().map(|mut r| { r.fprt_ms += c; r }).collect();
                let moved = fit_reader_intercept_ols(&shifted, Some(&lex), Formula::Full).unwrap();
                prop_assert!((moved.coefficients[0].estimate - base.coefficients[0].estimate - c).abs() < 1e-9);
                for (a, b) in base.coefficients.iter().zip(&moved.coefficients).skip(1) {
                    prop_assert!((a.estimate - b.estimate).abs() < 1e-9);
                }
            }
        }
    }
}
