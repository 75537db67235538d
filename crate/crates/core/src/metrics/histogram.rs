use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::types::{Box3D, Frame, TrackRecord};

use super::clear::match_frame;
use super::{align, ClassFilter, MetricsConfig};

/// Fixed-width histogram; `counts[k]` covers `[start + k w, start + (k+1) w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub start: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>, bin_width: f64) -> Self {
        let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
        for v in values {
            *bins.entry((v / bin_width).floor() as i64).or_default() += 1;
        }
        match (bins.keys().next().copied(), bins.keys().next_back().copied()) {
            (Some(lo), Some(hi)) => Self {
                bin_width,
                start: lo as f64 * bin_width,
                counts: (lo..=hi).map(|k| bins.get(&k).copied().unwrap_or(0)).collect(),
            },
            _ => Self {
                bin_width,
                start: 0.0,
                counts: Vec::new(),
            },
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(lower edge, upper edge, count)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.counts.iter().enumerate().map(|(k, &c)| {
            let lo = self.start + k as f64 * self.bin_width;
            (lo, lo + self.bin_width, c)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub boxes: u64,
    pub width: Histogram,
    pub length: Histogram,
}

/// Width and length histograms of the estimated boxes matched as true
/// positives at `cfg.alpha_clear`. Without ground truth every box counts.
pub fn tp_size_histogram(records: &[TrackRecord], frames: Option<&[Frame]>, cfg: &MetricsConfig, bin_width: f64) -> SizeHistogram {
    let boxes: Vec<Box3D> = match frames {
        None => records.iter().map(|r| r.bbox).collect(),
        Some(frames) => {
            let mut out = Vec::new();
            for seq in align(records, frames, ClassFilter::All, ClassFilter::All) {
                let mut last: HashMap<u64, u64> = HashMap::new();
                for f in &seq.frames {
                    let m = match_frame(&f.gt, &f.est, cfg.alpha_clear, cfg, &last);
                    for &(i, j, _) in &m.pairs {
                        last.insert(f.gt[i].id, f.est[j].id);
                        out.push(f.est[j].bbox);
                    }
                }
            }
            out
        }
    };
    SizeHistogram {
        boxes: boxes.len() as u64,
        width: Histogram::from_values(boxes.iter().map(|b| b.width), bin_width),
        length: Histogram::from_values(boxes.iter().map(|b| b.length), bin_width),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_values_fill_one_bin() {
        let h = Histogram::from_values([1.8; 7], 0.25);
        assert_eq!(h.counts, vec![7]);
        assert_eq!(h.start, 1.75);
    }

    #[test]
    fn gaps_are_zero_bins() {
        let h = Histogram::from_values([0.1, 0.9], 0.25);
        assert_eq!(h.counts, vec![1, 0, 0, 1]);
        assert_eq!(h.total(), 2);
    }
}
