use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
    /// False during tracking loss or blinks; `x`/`y` are ignored then.
    pub valid: bool,
}

impl GazeSample {
    pub fn new(t_ms: f64, x: f64, y: f64) -> Self {
        Self { t_ms, x, y, valid: true }
    }

    pub fn lost(t_ms: f64) -> Self {
        Self {
            t_ms,
            x: f64::NAN,
            y: f64::NAN,
            valid: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixationEvent {
    pub onset_ms: f64,
    pub duration_ms: f64,
    pub x: f64,
    pub y: f64,
    /// Number of samples averaged into the centroid.
    pub n_samples: usize,
}

impl FixationEvent {
    pub fn offset_ms(&self) -> f64 {
        self.onset_ms + self.duration_ms
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdtConfig {
    pub dispersion_threshold_deg: f64,
    pub min_duration_ms: f64,
    pub pixels_per_degree: f64,
    /// A window covering samples `t_a..=t_b` lasts `t_b - t_a + sample_interval_ms`.
    pub sample_interval_ms: f64,
}

impl IdtConfig {
    /// 1 degree dispersion, 100 ms minimum duration, 1000 Hz sampling.
    pub fn new(pixels_per_degree: f64) -> Self {
        Self {
            dispersion_threshold_deg: 1.0,
            min_duration_ms: 100.0,
            pixels_per_degree,
            sample_interval_ms: 1.0,
        }
    }

    pub fn threshold_px(&self) -> f64 {
        self.dispersion_threshold_deg * self.pixels_per_degree
    }
}

#[derive(Clone, Copy)]
struct Extent {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Extent {
    fn of(s: &GazeSample) -> Self {
        Self {
            min_x: s.x,
            max_x: s.x,
            min_y: s.y,
            max_y: s.y,
        }
    }

    fn grow(&self, s: &GazeSample) -> Self {
        Self {
            min_x: self.min_x.min(s.x),
            max_x: self.max_x.max(s.x),
            min_y: self.min_y.min(s.y),
            max_y: self.max_y.max(s.y),
        }
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Dispersion-threshold fixation detection.
///
/// From each start sample the window grows while its dispersion
/// `(max x - min x) + (max y - min y)` stays within the threshold. A window
/// lasting at least the minimum duration becomes a fixation and scanning
/// resumes after it; otherwise the start moves one sample forward. Invalid
/// samples end any open window.
pub fn detect_fixations_idt(samples: &[GazeSample], config: &IdtConfig) -> Result<Vec<FixationEvent>> {
    if !(config.pixels_per_degree > 0.0) {
        return Err(Error::InvalidArgument("pixels per degree must be positive".into()));
    }
    if let Some(i) = samples.windows(2).position(|w| w[1].t_ms < w[0].t_ms) {
        return Err(Error::UnsortedSamples(i + 1));
    }
    let threshold = config.threshold_px();
    let mut fixations = Vec::new();
    let mut start = 0;
    while start < samples.len() {
        if !samples[start].valid {
            start += 1;
            continue;
        }
        let mut extent = Extent::of(&samples[start]);
        let mut end = start;
        while let Some(next) = samples.get(end + 1) {
            if !next.valid {
                break;
            }
            let grown = extent.grow(next);
            if grown.dispersion() > threshold {
                break;
            }
            extent = grown;
            end += 1;
        }
        let duration = samples[end].t_ms - samples[start].t_ms + config.sample_interval_ms;
        if duration >= config.min_duration_ms {
            let window = &samples[start..=end];
            let n = window.len() as f64;
            fixations.push(FixationEvent {
                onset_ms: samples[start].t_ms,
                duration_ms: duration,
                x: window.iter().map(|s| s.x).sum::<f64>() / n,
                y: window.iter().map(|s| s.y).sum::<f64>() / n,
                n_samples: window.len(),
            });
            start = end + 1;
        } else {
            start += 1;
        }
    }
    Ok(fixations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn still(t0: usize, n: usize, x: f64, y: f64) -> Vec<GazeSample> {
        (t0..t0 + n).map(|t| GazeSample::new(t as f64, x, y)).collect()
    }

    #[test]
    fn zero_dispersion_fixation() {
        let s = still(0, 200, 100.0, 100.0);
        let f = detect_fixations_idt(&s, &IdtConfig::new(40.0)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].duration_ms, 200.0);
        assert_eq!((f[0].x, f[0].y), (100.0, 100.0));
        assert_eq!(f[0].onset_ms, 0.0);
    }

    #[test]
    fn too_short_for_a_fixation() {
        let s = still(0, 80, 100.0, 100.0);
        assert!(detect_fixations_idt(&s, &IdtConfig::new(40.0)).unwrap().is_empty());
    }

    #[test]
    fn two_clusters() {
        let mut s = still(0, 150, 100.0, 100.0);
        s.extend(still(150, 150, 400.0, 100.0));
        let f = detect_fixations_idt(&s, &IdtConfig::new(25.0)).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!((f[0].onset_ms, f[0].duration_ms, f[0].x), (0.0, 150.0, 100.0));
        assert_eq!((f[1].onset_ms, f[1].duration_ms, f[1].x), (150.0, 150.0, 400.0));
    }

    #[test]
    fn blink_splits_a_window() {
        let mut s = still(0, 120, 50.0, 50.0);
        s.push(GazeSample::lost(120.0));
        s.extend(still(121, 60, 50.0, 50.0));
        let f = detect_fixations_idt(&s, &IdtConfig::new(40.0)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].duration_ms, 120.0);
    }

    #[test]
    fn jitter_inside_threshold_is_one_fixation() {
        // dispersion 10 + 10 = 20 <= 25
        let s: Vec<GazeSample> = (0..300)
            .map(|t| GazeSample::new(t as f64, 100.0 + (t % 11) as f64, 200.0 + (t % 7) as f64 * 10.0 / 6.0))
            .collect();
        let f = detect_fixations_idt(&s, &IdtConfig::new(25.0)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].n_samples, 300);
    }

    #[test]
    fn rejects_unsorted_samples() {
        let s = vec![GazeSample::new(5.0, 0.0, 0.0), GazeSample::new(4.0, 0.0, 0.0)];
        assert!(matches!(detect_fixations_idt(&s, &IdtConfig::new(40.0)), Err(Error::UnsortedSamples(1))));
        assert!(detect_fixations_idt(&s, &IdtConfig::new(0.0)).is_err());
    }

    fn stream() -> impl Strategy<Value = Vec<GazeSample>> {
        prop::collection::vec((0u32..12, 0u32..12, 0u8..40), 50..400).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(t, (x, y, lost))| {
                    if lost == 0 {
                        GazeSample::lost(t as f64)
                    } else {
                        // coarse clusters along x
                        GazeSample::new(t as f64, x as f64 + ((t / 90) as f64) * 80.0, y as f64)
                    }
                })
                .collect()
        })
    }

    /// Stationary points held for at least the minimum duration. A wider
    /// threshold can then only merge neighbouring points into one window.
    fn held_points() -> impl Strategy<Value = Vec<GazeSample>> {
        prop::collection::vec((0u32..200, 0u32..60, 100usize..250), 1..8).prop_map(|points| {
            let mut out = Vec::new();
            for (x, y, n) in points {
                for _ in 0..n {
                    out.push(GazeSample::new(out.len() as f64, x as f64, y as f64));
                }
            }
            out
        })
    }

    proptest! {
        #[test]
        fn doubling_ppd_never_adds_fixations(s in held_points(), ppd in 5.0f64..60.0) {
            let narrow = detect_fixations_idt(&s, &IdtConfig::new(ppd)).unwrap();
            let wide = detect_fixations_idt(&s, &IdtConfig::new(2.0 * ppd)).unwrap();
            prop_assert!(wide.len() <= narrow.len());
        }

        #[test]
        fn translation_and_time_shift_invariant(s in stream(), dx in -500.0f64..500.0, dy in -500.0f64..500.0, dt in 0.0f64..1e4) {
            let cfg = IdtConfig::new(30.0);
            // integer offsets keep the arithmetic exact
            let (dx, dy, dt) = (dx.round(), dy.round(), dt.round());
            let base = detect_fixations_idt(&s, &cfg).unwrap();
            let moved: Vec<GazeSample> = s.iter().map(|g| GazeSample { t_ms: g.t_ms + dt, x: g.x + dx, y: g.y + dy, valid: g.valid }).collect();
            let shifted = detect_fixations_idt(&moved, &cfg).unwrap();
            prop_assert_eq!(base.len(), shifted.len());
            for (a, b) in base.iter().zip(&shifted) {
                prop_assert_eq!(a.n_samples, b.n_samples);
                prop_assert!((a.onset_ms + dt - b.onset_ms).abs() < 1e-9);
                prop_assert!((a.duration_ms - b.duration_ms).abs() < 1e-9);
                prop_assert!((a.x + dx - b.x).abs() < 1e-9);
                prop_assert!((a.y + dy - b.y).abs() < 1e-9);
            }
        }

        #[test]
        fn fixations_are_ordered_and_disjoint(s in stream()) {
            let f = detect_fixations_idt(&s, &IdtConfig::new(30.0)).unwrap();
            for w in f.windows(2) {
                prop_assert!(w[0].offset_ms() <= w[1].onset_ms);
            }
            prop_assert!(f.iter().all(|x| x.duration_ms >= 100.0));
        }
    }
}
