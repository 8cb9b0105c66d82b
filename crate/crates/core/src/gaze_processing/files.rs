//! On-disk formats: sample CSVs, AOI CSVs, trial metadata JSON, and the
//! directory-level pipeline from raw samples to measure records.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::aoi::{line_height, map_fixations_to_aois, validate_aois, AreaOfInterest};
use super::idt::{detect_fixations_idt, GazeSample, IdtConfig};
use super::measures::{compute_measures, FirstPassRule, MeasureRecord};
use super::quality::{data_quality_report, DataQualityReport, TrialQuality, TrialRemoval};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    t_ms: f64,
    x_px: Option<f64>,
    y_px: Option<f64>,
    valid: u8,
}

pub fn read_samples(path: &Path) -> Result<Vec<GazeSample>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: SampleRow = row?;
        let sample = match (row.valid, row.x_px, row.y_px) {
            (1, Some(x), Some(y)) => GazeSample::new(row.t_ms, x, y),
            (1, _, _) => return Err(Error::format(path, format!("valid sample at {} ms lacks coordinates", row.t_ms))),
            (0, _, _) => GazeSample::lost(row.t_ms),
            (v, _, _) => return Err(Error::format(path, format!("valid must be 0 or 1, got {v}"))),
        };
        out.push(sample);
    }
    Ok(out)
}

pub fn write_samples(path: &Path, samples: &[GazeSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in samples {
        w.serialize(SampleRow {
            t_ms: s.t_ms,
            x_px: s.valid.then_some(s.x),
            y_px: s.valid.then_some(s.y),
            valid: u8::from(s.valid),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aois(path: &Path) -> Result<Vec<AreaOfInterest>> {
    let mut reader = csv::Reader::from_path(path)?;
    let aois: Vec<AreaOfInterest> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    validate_aois(&aois).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(aois)
}

pub fn write_aois(path: &Path, aois: &[AreaOfInterest]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for a in aois {
        w.serialize(a)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measures(path: &Path) -> Result<Vec<MeasureRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows: Vec<MeasureRecord> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    for r in &rows {
        if r.skipped && (r.fprt_ms.is_some() || r.go_past_ms.is_some()) {
            return Err(Error::format(path, format!("word {} of {} is skipped but has durations", r.word_index, r.text_id)));
        }
    }
    Ok(rows)
}

pub fn write_measures(path: &Path, rows: &[MeasureRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One page of one text read by one reader. File paths are relative to
/// the metadata file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetadata {
    pub reader_id: String,
    pub text_id: String,
    #[serde(default)]
    pub page: u32,
    pub samples: PathBuf,
    pub aois: PathBuf,
    pub pixels_per_degree: f64,
    #[serde(default)]
    pub removal: TrialRemoval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaze_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answered_correctly: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureConfig {
    pub dispersion_threshold_deg: f64,
    pub min_duration_ms: f64,
    pub sample_interval_ms: f64,
    /// Defaults to the median AOI height.
    pub snap_radius_px: Option<f64>,
    pub first_pass: FirstPassRule,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            dispersion_threshold_deg: 1.0,
            min_duration_ms: 100.0,
            sample_interval_ms: 1.0,
            snap_radius_px: None,
            first_pass: FirstPassRule::FirstVisit,
        }
    }
}

/// Experimental condition attached to a (reader, text) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialDesign {
    pub reader_id: String,
    pub text_id: String,
    pub group: Option<String>,
    pub gaze_weight: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ProcessedTrials {
    pub records: Vec<MeasureRecord>,
    pub quality: DataQualityReport,
    pub design: Vec<TrialDesign>,
}

/// Reads every `*.json` trial file in `dir` (sorted by name) and computes
/// measure records per (reader, text). Pages are read in page order;
/// words on fully removed pages get no records.
pub fn process_trial_dir(dir: &Path, config: &MeasureConfig) -> Result<ProcessedTrials> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        return Err(Error::format(dir, "no trial metadata (*.json) found"));
    }

    let mut trials: BTreeMap<(String, String), Vec<(TrialMetadata, PathBuf)>> = BTreeMap::new();
    for f in &files {
        let meta: TrialMetadata =
            serde_json::from_str(&fs::read_to_string(f)?).map_err(|e| Error::format(f, e.to_string()))?;
        let base = f.parent().unwrap_or(Path::new(".")).to_path_buf();
        trials.entry((meta.reader_id.clone(), meta.text_id.clone())).or_default().push((meta, base));
    }

    let mut records = Vec::new();
    let mut quality = Vec::new();
    let mut design = Vec::new();
    let mut aoi_cache: BTreeMap<PathBuf, Vec<AreaOfInterest>> = BTreeMap::new();
    for ((reader_id, text_id), mut pages) in trials {
        pages.sort_by_key(|(m, _)| m.page);
        let first = &pages[0].0;
        if pages.iter().any(|(m, _)| m.group != first.group || m.gaze_weight != first.gaze_weight) {
            return Err(Error::InvalidArgument(format!(
                "pages of text {text_id} for reader {reader_id} disagree on group or gaze weight"
            )));
        }
        design.push(TrialDesign {
            reader_id: reader_id.clone(),
            text_id: text_id.clone(),
            group: first.group.clone(),
            gaze_weight: first.gaze_weight,
        });

        let mut scanpath = Vec::new();
        let mut all_aois: Vec<AreaOfInterest> = Vec::new();
        let mut removed_pages = Vec::new();
        for (meta, base) in &pages {
            let aoi_path = base.join(&meta.aois);
            if !aoi_cache.contains_key(&aoi_path) {
                aoi_cache.insert(aoi_path.clone(), read_aois(&aoi_path)?);
            }
            let text_aois = &aoi_cache[&aoi_path];
            if all_aois.is_empty() {
                all_aois = text_aois.clone();
            }
            let samples = read_samples(&base.join(&meta.samples))?;
            let mut q = TrialQuality::from_samples(&reader_id, &samples, meta.removal);
            q.answered_correctly = meta.answered_correctly;
            quality.push(q);
            if meta.removal == TrialRemoval::Full {
                removed_pages.push(meta.page);
                continue;
            }
            let page_aois: Vec<AreaOfInterest> = text_aois.iter().filter(|a| a.page == meta.page).cloned().collect();
            let idt = IdtConfig {
                dispersion_threshold_deg: config.dispersion_threshold_deg,
                min_duration_ms: config.min_duration_ms,
                pixels_per_degree: meta.pixels_per_degree,
                sample_interval_ms: config.sample_interval_ms,
            };
            let fixations = detect_fixations_idt(&samples, &idt)?;
            let snap = config.snap_radius_px.unwrap_or_else(|| line_height(&page_aois));
            scanpath.extend(
                map_fixations_to_aois(&fixations, &page_aois, snap)
                    .into_iter()
                    .map(|(f, w)| (w, f.duration_ms)),
            );
        }

        all_aois.sort_by_key(|a| a.word_index);
        let n_words = all_aois.last().map_or(0, |a| a.word_index + 1);
        let measures = compute_measures(&scanpath, n_words, config.first_pass);
        for a in &all_aois {
            if removed_pages.contains(&a.page) {
                continue;
            }
            let m = measures[a.word_index];
            records.push(MeasureRecord {
                reader_id: reader_id.clone(),
                text_id: text_id.clone(),
                word_index: a.word_index,
                word: a.word.clone(),
                fprt_ms: m.fprt_ms,
                go_past_ms: m.go_past_ms,
                skipped: m.skipped,
                n_fixations: m.n_fixations,
            });
        }
    }

    Ok(ProcessedTrials {
        records,
        quality: data_quality_report(&quality),
        design,
    })
}
