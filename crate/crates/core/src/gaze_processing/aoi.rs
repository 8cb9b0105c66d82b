use serde::{Deserialize, Serialize};

use super::idt::FixationEvent;
use crate::error::{Error, Result};

/// Screen box of one word. Boxes on one page must not overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaOfInterest {
    pub word_index: usize,
    pub page: u32,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub word: String,
}

impl AreaOfInterest {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Euclidean distance from a point to the box; zero inside.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x_min - x).max(0.0).max(x - self.x_max);
        let dy = (self.y_min - y).max(0.0).max(y - self.y_max);
        dx.hypot(dy)
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    fn overlaps(&self, other: &Self) -> bool {
        self.page == other.page
            && self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.y_min < other.y_max
            && other.y_min < self.y_max
    }
}

/// Checks box sanity and that boxes on the same page do not overlap.
pub fn validate_aois(aois: &[AreaOfInterest]) -> Result<()> {
    for a in aois {
        if !(a.x_min <= a.x_max && a.y_min <= a.y_max) {
            return Err(Error::InvalidArgument(format!("AOI of word {} has an inverted box", a.word_index)));
        }
    }
    for (i, a) in aois.iter().enumerate() {
        if let Some(b) = aois[i + 1..].iter().find(|b| a.overlaps(b)) {
            return Err(Error::InvalidArgument(format!(
                "AOIs of words {} and {} overlap on page {}",
                a.word_index, b.word_index, a.page
            )));
        }
    }
    Ok(())
}

/// Word index per fixation: the box containing the centroid, else the
/// nearest box within `snap_radius`, else `None`. Distance ties go to the
/// lower word index.
pub fn map_fixations_to_aois(
    fixations: &[FixationEvent],
    aois: &[AreaOfInterest],
    snap_radius: f64,
) -> Vec<(FixationEvent, Option<usize>)> {
    fixations
        .iter()
        .map(|f| {
            let hit = aois.iter().find(|a| a.contains(f.x, f.y)).map(|a| a.word_index).or_else(|| {
                aois.iter()
                    .map(|a| (a.distance(f.x, f.y), a.word_index))
                    .filter(|&(d, _)| d <= snap_radius)
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .map(|(_, w)| w)
            });
            (*f, hit)
        })
        .collect()
}

/// Default snap radius: the typical line height of the page.
pub fn line_height(aois: &[AreaOfInterest]) -> f64 {
    let mut heights: Vec<f64> = aois.iter().map(AreaOfInterest::height).collect();
    if heights.is_empty() {
        return 0.0;
    }
    heights.sort_by(f64::total_cmp);
    heights[heights.len() / 2]
}
