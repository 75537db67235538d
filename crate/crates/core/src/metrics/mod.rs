//! BEV tracking evaluation: center-distance similarity, CLEAR metrics, HOTA,
//! localization-threshold sweeps, class-agnostic counts, box-size histograms
//! and throughput.

mod bench;
mod clear;
mod histogram;
mod hota;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::types::{Box3D, ClassLabel, Frame, TrackRecord};

pub use bench::{fps_benchmark, BenchResult};
pub use clear::{class_agnostic_counts, clear_metrics, match_frame, mota_sweep, ClearResult, FrameMatch};
pub use histogram::{tp_size_histogram, Histogram, SizeHistogram};
pub use hota::{hota, HotaAlpha, HotaResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// Distance (m) at which similarity reaches zero.
    pub d0: f64,
    /// Localization threshold for CLEAR metrics.
    pub alpha_clear: f64,
    pub alpha_grid: Vec<f64>,
    /// Match estimates to ground truth regardless of class.
    pub class_agnostic: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            d0: 4.0,
            alpha_clear: 0.5,
            alpha_grid: (1..20).map(|k| k as f64 / 20.0).collect(),
            class_agnostic: false,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.d0 > 0.0) {
            return Err("d0 must be positive".into());
        }
        let in_range = |a: f64| a > 0.0 && a < 1.0;
        if !in_range(self.alpha_clear) || self.alpha_grid.is_empty() || !self.alpha_grid.iter().all(|&a| in_range(a)) {
            return Err("localization thresholds must lie in (0, 1) and the grid must be non-empty".into());
        }
        Ok(())
    }
}

/// `max(0, 1 - d / d0)` for the BEV Euclidean distance `d`.
pub fn similarity(p: [f64; 2], q: [f64; 2], d0: f64) -> f64 {
    let d = (p[0] - q[0]).hypot(p[1] - q[1]);
    (1.0 - d / d0).max(0.0)
}

/// `1 - (FN + FP + IDS) / (TP + FN)`; a sequence without ground truth uses a
/// denominator of one.
pub fn mota(tp: u64, fn_: u64, fp: u64, ids: u64) -> f64 {
    let gt = (tp + fn_).max(1) as f64;
    1.0 - (fn_ + fp + ids) as f64 / gt
}

/// One ground-truth object or estimate in a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: u64,
    pub pos: [f64; 2],
    pub class_label: ClassLabel,
    pub bbox: Box3D,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalFrame {
    pub frame_idx: u64,
    pub gt: Vec<Item>,
    pub est: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSequence {
    pub seq_id: String,
    pub frames: Vec<EvalFrame>,
}

/// Which objects take part in an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassFilter {
    All,
    Only(ClassLabel),
}

impl ClassFilter {
    fn admits(&self, c: ClassLabel) -> bool {
        match self {
            ClassFilter::All => true,
            ClassFilter::Only(k) => *k == c,
        }
    }
}

/// Groups ground truth and estimates by sequence and frame. Records with an
/// empty sequence id belong to the only sequence when there is exactly one.
/// Frames that appear only in the records are evaluated as well.
pub fn align(records: &[TrackRecord], frames: &[Frame], gt_filter: ClassFilter, est_filter: ClassFilter) -> Vec<EvalSequence> {
    let mut order: Vec<String> = Vec::new();
    let mut table: HashMap<String, BTreeMap<u64, EvalFrame>> = HashMap::new();
    fn slot(order: &mut Vec<String>, table: &mut HashMap<String, BTreeMap<u64, EvalFrame>>, seq: &str, idx: u64) -> (String, u64) {
        if !table.contains_key(seq) {
            order.push(seq.to_string());
            table.insert(seq.to_string(), BTreeMap::new());
        }
        (seq.to_string(), idx)
    }
    let gt_entries: Vec<_> = frames
        .iter()
        .map(|f| (slot(&mut order, &mut table, &f.seq_id, f.frame_idx), f))
        .collect();
    let sole = if order.len() == 1 { Some(order[0].clone()) } else { None };
    let mut est_entries = Vec::new();
    for r in records {
        let seq = match (&sole, r.seq_id.is_empty()) {
            (Some(s), true) => s.clone(),
            _ => r.seq_id.clone(),
        };
        est_entries.push((slot(&mut order, &mut table, &seq, r.frame_idx), r));
    }
    for ((seq, idx), f) in gt_entries {
        let frame = table.get_mut(&seq).expect("slot created").entry(idx).or_default();
        frame.frame_idx = idx;
        frame.gt.extend(f.ground_truth().iter().filter(|g| gt_filter.admits(g.class_label)).map(|g| Item {
            id: g.gt_id,
            pos: [g.bbox.cx, g.bbox.cy],
            class_label: g.class_label,
            bbox: g.bbox,
        }));
    }
    for ((seq, idx), r) in est_entries {
        let frame = table.get_mut(&seq).expect("slot created").entry(idx).or_default();
        frame.frame_idx = idx;
        if est_filter.admits(r.class_label) {
            frame.est.push(Item {
                id: r.track_id,
                pos: [r.bbox.cx, r.bbox.cy],
                class_label: r.class_label,
                bbox: r.bbox,
            });
        }
    }
    order
        .into_iter()
        .map(|seq_id| {
            let frames = table.remove(&seq_id).expect("slot created").into_values().collect();
            EvalSequence { seq_id, frames }
        })
        .collect()
}

/// Filters for a per-class evaluation: class-agnostic matching keeps the
/// ground truth of `class` but estimates of every class.
pub fn class_filters(class: Option<ClassLabel>, class_agnostic: bool) -> (ClassFilter, ClassFilter) {
    match class {
        None => (ClassFilter::All, ClassFilter::All),
        Some(c) if class_agnostic => (ClassFilter::Only(c), ClassFilter::All),
        Some(c) => (ClassFilter::Only(c), ClassFilter::Only(c)),
    }
}
