//! Higher-order tracking accuracy.
//!
//! Matching per frame maximizes `alignment(gt, track) * S` over all pairs,
//! where `alignment` is a global association score accumulated over the
//! whole evaluation. The same matching is then thresholded at every `α` of
//! the grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::types::{ClassLabel, Frame, TrackRecord};

use super::{align, class_filters, similarity, EvalSequence, MetricsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotaAlpha {
    pub alpha: f64,
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub loc_a: f64,
    pub tp: u64,
    pub r#fn: u64,
    pub fp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotaResult {
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub loc_a: f64,
    pub per_alpha: Vec<HotaAlpha>,
}

type Key = (usize, u64);

/// Pairwise similarities of one frame, row-major over (gt, est).
fn frame_similarity(gt: &[[f64; 2]], est: &[[f64; 2]], d0: f64, class_ok: impl Fn(usize, usize) -> bool) -> Vec<f64> {
    let mut s = vec![0.0; gt.len() * est.len()];
    for (i, g) in gt.iter().enumerate() {
        for (j, e) in est.iter().enumerate() {
            if class_ok(i, j) {
                s[i * est.len() + j] = similarity(*g, *e, d0);
            }
        }
    }
    s
}

pub(super) fn hota_on(seqs: &[EvalSequence], cfg: &MetricsConfig) -> HotaResult {
    let sims: Vec<Vec<Vec<f64>>> = seqs
        .iter()
        .map(|seq| {
            seq.frames
                .iter()
                .map(|f| {
                    let gp: Vec<[f64; 2]> = f.gt.iter().map(|g| g.pos).collect();
                    let ep: Vec<[f64; 2]> = f.est.iter().map(|e| e.pos).collect();
                    frame_similarity(&gp, &ep, cfg.d0, |i, j| {
                        cfg.class_agnostic || f.gt[i].class_label == f.est[j].class_label
                    })
                })
                .collect()
        })
        .collect();

    // global alignment between every gt id and tracker id
    let mut potential: HashMap<(Key, Key), f64> = HashMap::new();
    let mut gt_count: HashMap<Key, f64> = HashMap::new();
    let mut tr_count: HashMap<Key, f64> = HashMap::new();
    for (si, seq) in seqs.iter().enumerate() {
        for (fi, f) in seq.frames.iter().enumerate() {
            let s = &sims[si][fi];
            let ne = f.est.len();
            let row_sum: Vec<f64> = (0..f.gt.len()).map(|i| (0..ne).map(|j| s[i * ne + j]).sum()).collect();
            let col_sum: Vec<f64> = (0..ne).map(|j| (0..f.gt.len()).map(|i| s[i * ne + j]).sum()).collect();
            for (i, g) in f.gt.iter().enumerate() {
                for (j, e) in f.est.iter().enumerate() {
                    let sij = s[i * ne + j];
                    let denom = row_sum[i] + col_sum[j] - sij;
                    if sij > 0.0 && denom > 0.0 {
                        *potential.entry(((si, g.id), (si, e.id))).or_default() += sij / denom;
                    }
                }
            }
            for g in &f.gt {
                *gt_count.entry((si, g.id)).or_default() += 1.0;
            }
            for e in &f.est {
                *tr_count.entry((si, e.id)).or_default() += 1.0;
            }
        }
    }
    let alignment = |g: Key, t: Key| -> f64 {
        match potential.get(&(g, t)) {
            Some(&p) => p / (gt_count[&g] + tr_count[&t] - p),
            None => 0.0,
        }
    };

    let na = cfg.alpha_grid.len();
    let mut tp = vec![0u64; na];
    let mut loc = vec![0.0f64; na];
    let mut matches: Vec<HashMap<(Key, Key), f64>> = vec![HashMap::new(); na];
    let (mut n_gt, mut n_est) = (0u64, 0u64);
    for (si, seq) in seqs.iter().enumerate() {
        for (fi, f) in seq.frames.iter().enumerate() {
            let (ng, ne) = (f.gt.len(), f.est.len());
            n_gt += ng as u64;
            n_est += ne as u64;
            if ng == 0 || ne == 0 {
                continue;
            }
            let s = &sims[si][fi];
            let mut costs = CostMatrix::forbidden(ng, ne + ng);
            for (i, g) in f.gt.iter().enumerate() {
                for (j, e) in f.est.iter().enumerate() {
                    let score = alignment((si, g.id), (si, e.id)) * s[i * ne + j];
                    if score > 0.0 {
                        costs.set(i, j, -score);
                    }
                }
                costs.set(i, ne + i, 0.0);
            }
            let a = solve_assignment(&costs).expect("unmatched columns keep the matching feasible");
            for (i, &j) in a.row_to_col.iter().enumerate() {
                if j >= ne {
                    continue;
                }
                let sij = s[i * ne + j];
                for (k, &alpha) in cfg.alpha_grid.iter().enumerate() {
                    if sij >= alpha {
                        tp[k] += 1;
                        loc[k] += sij;
                        *matches[k].entry(((si, f.gt[i].id), (si, f.est[j].id))).or_default() += 1.0;
                    }
                }
            }
        }
    }

    let per_alpha: Vec<HotaAlpha> = cfg
        .alpha_grid
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let t = tp[k];
            let fn_ = n_gt - t;
            let fp = n_est - t;
            let det_a = t as f64 / (t + fn_ + fp).max(1) as f64;
            let ass_sum: f64 = matches[k]
                .iter()
                .map(|(&(g, e), &m)| m * m / (gt_count[&g] + tr_count[&e] - m))
                .sum();
            let ass_a = if t > 0 { ass_sum / t as f64 } else { 0.0 };
            let loc_a = if t > 0 { loc[k] / t as f64 } else { 0.0 };
            HotaAlpha {
                alpha,
                hota: (det_a * ass_a).sqrt(),
                det_a,
                ass_a,
                loc_a,
                tp: t,
                r#fn: fn_,
                fp,
            }
        })
        .collect();
    let mean = |f: fn(&HotaAlpha) -> f64| per_alpha.iter().map(f).sum::<f64>() / na as f64;
    HotaResult {
        hota: mean(|a| a.hota),
        det_a: mean(|a| a.det_a),
        ass_a: mean(|a| a.ass_a),
        loc_a: mean(|a| a.loc_a),
        per_alpha,
    }
}

/// HOTA averaged over `cfg.alpha_grid` for one class (`None`: every object).
pub fn hota(records: &[TrackRecord], frames: &[Frame], class: Option<ClassLabel>, cfg: &MetricsConfig) -> HotaResult {
    let (g, e) = class_filters(class, cfg.class_agnostic);
    hota_on(&align(records, frames, g, e), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Box3D, GroundTruthObject};

    fn frames_with_gt(n: u64) -> Vec<Frame> {
        (0..n)
            .map(|i| {
                let mut f = Frame::new("s", i, i as f64);
                f.ground_truth = Some(vec![GroundTruthObject {
                    gt_id: 1,
                    bbox: Box3D::bev(i as f64, 0.0, 4.0, 2.0, 0.0),
                    class_label: ClassLabel::Car,
                }]);
                f
            })
            .collect()
    }

    fn rec(id: u64, i: u64, x: f64) -> TrackRecord {
        TrackRecord {
            seq_id: "s".into(),
            track_id: id,
            frame_idx: i,
            bbox: Box3D::bev(x, 0.0, 4.0, 2.0, 0.0),
            class_label: ClassLabel::Car,
            existence: 1.0,
        }
    }

    #[test]
    fn perfect_tracking() {
        let frames = frames_with_gt(10);
        let recs: Vec<TrackRecord> = (0..10).map(|i| rec(5, i, i as f64)).collect();
        let h = hota(&recs, &frames, Some(ClassLabel::Car), &MetricsConfig::default());
        for v in [h.hota, h.det_a, h.ass_a, h.loc_a] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn no_estimates() {
        let h = hota(&[], &frames_with_gt(4), None, &MetricsConfig::default());
        assert_eq!((h.hota, h.det_a, h.ass_a, h.loc_a), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn id_switch_halves_association() {
        let frames = frames_with_gt(10);
        let recs: Vec<TrackRecord> = (0..10).map(|i| rec(if i < 5 { 1 } else { 2 }, i, i as f64)).collect();
        let h = hota(&recs, &frames, None, &MetricsConfig::default());
        assert!((h.det_a - 1.0).abs() < 1e-12);
        // each half: 5 matches, gt 10 frames, track 5 frames -> 5 / 10
        assert!((h.ass_a - 0.5).abs() < 1e-12);
        assert!((h.hota - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
