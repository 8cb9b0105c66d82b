//! From raw gaze samples to word-level reading measures.

mod aoi;
mod files;
mod idt;
mod measures;
mod quality;

pub use aoi::{line_height, map_fixations_to_aois, validate_aois, AreaOfInterest};
pub use files::{
    process_trial_dir, read_aois, read_measures, read_samples, write_aois, write_measures, write_samples,
    MeasureConfig, ProcessedTrials, TrialDesign, TrialMetadata,
};
pub use idt::{detect_fixations_idt, FixationEvent, GazeSample, IdtConfig};
pub use measures::{compute_measures, FirstPassRule, MeasureRecord, WordMeasures};
pub use quality::{data_quality_report, DataQualityReport, ReaderQuality, Range, TrialQuality, TrialRemoval};
