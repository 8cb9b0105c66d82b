use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::clean_form;

/// Zipf value assigned to words missing from the lexicon.
pub const UNKNOWN_ZIPF: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zipf {
    pub value: f64,
    pub known: bool,
}

/// Word counts keyed by clean form (lowercased, edge punctuation removed).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyLexicon {
    counts: HashMap<String, u64>,
    total: u64,
    unknown_floor: f64,
    mean_zipf: f64,
}

impl FrequencyLexicon {
    /// `total` may exceed the listed counts when the lexicon is a sample of
    /// a larger corpus.
    pub fn new(counts: HashMap<String, u64>, total: u64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("frequency lexicon"));
        }
        if counts.values().any(|&c| c == 0) {
            return Err(Error::InvalidArgument("lexicon counts must be at least 1".into()));
        }
        let listed: u64 = counts.values().sum();
        if total < listed {
            return Err(Error::InvalidArgument(format!(
                "lexicon total {total} is below the sum of its counts {listed}"
            )));
        }
        // sorted so the sum does not depend on hash order
        let mut sorted: Vec<u64> = counts.values().copied().collect();
        sorted.sort_unstable();
        let mean_zipf = sorted.iter().map(|&c| zipf_value(c, total)).sum::<f64>() / sorted.len() as f64;
        Ok(Self {
            counts,
            total,
            unknown_floor: UNKNOWN_ZIPF,
            mean_zipf,
        })
    }

    /// Counts every whitespace word of `text` by its clean form.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for w in text.split_whitespace() {
            let clean = clean_form(w);
            if !clean.is_empty() {
                *counts.entry(clean).or_default() += 1;
            }
        }
        let total = counts.values().sum();
        Self::new(counts, total)
    }

    pub fn with_unknown_floor(mut self, floor: f64) -> Self {
        self.unknown_floor = floor;
        self
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.counts.get(&clean_form(word)).copied()
    }

    /// `log10` of occurrences per billion tokens.
    pub fn zipf(&self, word: &str) -> Zipf {
        match self.count(word) {
            Some(c) => Zipf {
                value: zipf_value(c, self.total),
                known: true,
            },
            None => Zipf {
                value: self.unknown_floor,
                known: false,
            },
        }
    }

    /// Unweighted mean Zipf value over the listed words.
    pub fn mean_zipf(&self) -> f64 {
        self.mean_zipf
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut counts = HashMap::new();
        let mut total = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(t) = line.strip_prefix("#total:") {
                let t = t.trim().parse().map_err(|e| Error::format(origin, format!("line {}: total: {e}", n + 1)))?;
                total = Some(t);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(origin, format!("line {}: expected word<TAB>count", n + 1)))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|e| Error::format(origin, format!("line {}: count: {e}", n + 1)))?;
            *counts.entry(clean_form(word)).or_default() += count;
        }
        let total = total.unwrap_or_else(|| counts.values().sum());
        Self::new(counts, total).map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// TSV with the `#total:` header, words sorted for stable output.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.counts.iter().collect();
        rows.sort();
        let mut out = format!("#total:{}\n", self.total);
        for (w, c) in rows {
            writeln!(out, "{w}\t{c}").unwrap();
        }
        out
    }
}

pub fn zipf_value(count: u64, total: u64) -> f64 {
    (count as f64 / total as f64 * 1e9).log10()
}

/// Word-level values from an external list, e.g. prevalence norms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValueLexicon {
    values: HashMap<String, f64>,
}

impl ValueLexicon {
    pub fn new(values: HashMap<String, f64>) -> Self {
        Self { values }
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.values.get(&clean_form(word)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// TSV `word<TAB>value`; `#` lines are comments.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(origin, format!("line {}: expected word<TAB>value", n + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::format(origin, format!("line {}: value: {e}", n + 1)))?;
            values.insert(clean_form(word), value);
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }
}
