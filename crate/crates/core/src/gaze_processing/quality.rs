use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::idt::GazeSample;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialRemoval {
    #[default]
    None,
    Partial,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialQuality {
    pub reader_id: String,
    pub n_samples: usize,
    pub n_invalid: usize,
    pub removal: TrialRemoval,
    /// Comprehension answer for the trial, when one was asked.
    pub answered_correctly: Option<bool>,
}

impl TrialQuality {
    pub fn from_samples(reader_id: impl Into<String>, samples: &[GazeSample], removal: TrialRemoval) -> Self {
        Self {
            reader_id: reader_id.into(),
            n_samples: samples.len(),
            n_invalid: samples.iter().filter(|s| !s.valid).count(),
            removal,
            answered_correctly: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReaderQuality {
    pub reader_id: String,
    pub trials: usize,
    pub loss_pct: f64,
    pub comprehension_pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataQualityReport {
    pub trials: usize,
    pub trials_removed: usize,
    pub trials_partially_removed: usize,
    /// Invalid samples over all samples, pooled across readers.
    pub loss_pct: f64,
    pub loss_range: Option<Range>,
    pub comprehension_pct: Option<f64>,
    pub comprehension_range: Option<Range>,
    pub readers: Vec<ReaderQuality>,
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn range(values: impl Iterator<Item = f64>) -> Option<Range> {
    values.fold(None, |acc, v| match acc {
        None => Some(Range { min: v, max: v }),
        Some(r) => Some(Range {
            min: r.min.min(v),
            max: r.max.max(v),
        }),
    })
}

/// Raw data loss and trial removal counts, overall and per reader. Loss
/// counts every recorded sample, removed trials included.
pub fn data_quality_report(trials: &[TrialQuality]) -> DataQualityReport {
    #[derive(Default)]
    struct Acc {
        trials: usize,
        samples: usize,
        invalid: usize,
        answered: usize,
        correct: usize,
    }
    let mut per_reader: BTreeMap<&str, Acc> = BTreeMap::new();
    for t in trials {
        let a = per_reader.entry(&t.reader_id).or_default();
        a.trials += 1;
        a.samples += t.n_samples;
        a.invalid += t.n_invalid;
        if let Some(ok) = t.answered_correctly {
            a.answered += 1;
            a.correct += usize::from(ok);
        }
    }
    let readers: Vec<ReaderQuality> = per_reader
        .iter()
        .map(|(id, a)| ReaderQuality {
            reader_id: id.to_string(),
            trials: a.trials,
            loss_pct: pct(a.invalid, a.samples),
            comprehension_pct: (a.answered > 0).then(|| pct(a.correct, a.answered)),
        })
        .collect();

    let samples: usize = trials.iter().map(|t| t.n_samples).sum();
    let invalid: usize = trials.iter().map(|t| t.n_invalid).sum();
    let answered = trials.iter().filter(|t| t.answered_correctly.is_some()).count();
    let correct = trials.iter().filter(|t| t.answered_correctly == Some(true)).count();

    DataQualityReport {
        trials: trials.len(),
        trials_removed: trials.iter().filter(|t| t.removal == TrialRemoval::Full).count(),
        trials_partially_removed: trials.iter().filter(|t| t.removal == TrialRemoval::Partial).count(),
        loss_pct: pct(invalid, samples),
        loss_range: range(readers.iter().map(|r| r.loss_pct)),
        comprehension_pct: (answered > 0).then(|| pct(correct, answered)),
        comprehension_range: range(readers.iter().filter_map(|r| r.comprehension_pct)),
        readers,
    }
}
