use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::per_class::PerClass;
use crate::types::{ClassLabel, Frame, TrackRecord};

use super::{align, class_filters, mota, similarity, ClassFilter, EvalSequence, Item, MetricsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearResult {
    pub tp: u64,
    pub r#fn: u64,
    pub fp: u64,
    pub ids: u64,
    pub mota: f64,
    /// Mean similarity of the true positives.
    pub motp: f64,
}

impl ClearResult {
    pub fn from_counts(tp: u64, fn_: u64, fp: u64, ids: u64, similarity_sum: f64) -> Self {
        Self {
            tp,
            r#fn: fn_,
            fp,
            ids,
            mota: mota(tp, fn_, fp, ids),
            motp: if tp > 0 { similarity_sum / tp as f64 } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatch {
    /// `(ground-truth index, estimate index, similarity)`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_est: Vec<usize>,
}

/// Maximum-similarity matching over pairs with `S >= alpha`. Keeping a ground
/// truth object with the track it was last matched to outweighs any
/// similarity gain. Pairs of different classes are excluded unless the
/// evaluation is class-agnostic.
pub fn match_frame(
    gt: &[Item],
    est: &[Item],
    alpha: f64,
    cfg: &MetricsConfig,
    previous: &HashMap<u64, u64>,
) -> FrameMatch {
    let (ng, ne) = (gt.len(), est.len());
    let bonus = (ng.min(ne) + 1) as f64;
    // rows: ground truth; columns: estimates, then one "unmatched" column per row
    let mut costs = CostMatrix::forbidden(ng, ne + ng);
    let mut sims = vec![0.0; ng * ne];
    for (i, g) in gt.iter().enumerate() {
        for (j, e) in est.iter().enumerate() {
            if !cfg.class_agnostic && g.class_label != e.class_label {
                continue;
            }
            let s = similarity(g.pos, e.pos, cfg.d0);
            if s >= alpha {
                sims[i * ne + j] = s;
                let keep = previous.get(&g.id) == Some(&e.id);
                costs.set(i, j, -(s + if keep { bonus } else { 0.0 }));
            }
        }
        costs.set(i, ne + i, 0.0);
    }
    let mut out = FrameMatch::default();
    let mut est_used = vec![false; ne];
    if ng > 0 {
        let a = solve_assignment(&costs).expect("unmatched columns keep the matching feasible");
        for (i, &j) in a.row_to_col.iter().enumerate() {
            if j < ne {
                out.pairs.push((i, j, sims[i * ne + j]));
                est_used[j] = true;
            } else {
                out.unmatched_gt.push(i);
            }
        }
    }
    out.unmatched_est = (0..ne).filter(|&j| !est_used[j]).collect();
    out
}

pub(super) fn clear_on(seqs: &[EvalSequence], alpha: f64, cfg: &MetricsConfig) -> ClearResult {
    let (mut tp, mut fn_, mut fp, mut ids, mut sim) = (0u64, 0u64, 0u64, 0u64, 0.0f64);
    for seq in seqs {
        let mut last: HashMap<u64, u64> = HashMap::new();
        for f in &seq.frames {
            let m = match_frame(&f.gt, &f.est, alpha, cfg, &last);
            for &(i, j, s) in &m.pairs {
                let (g, e) = (f.gt[i].id, f.est[j].id);
                if let Some(prev) = last.insert(g, e) {
                    if prev != e {
                        ids += 1;
                    }
                }
                sim += s;
            }
            tp += m.pairs.len() as u64;
            fn_ += m.unmatched_gt.len() as u64;
            fp += m.unmatched_est.len() as u64;
        }
    }
    ClearResult::from_counts(tp, fn_, fp, ids, sim)
}

/// CLEAR metrics at `cfg.alpha_clear` for one class (`None`: every object).
pub fn clear_metrics(records: &[TrackRecord], frames: &[Frame], class: Option<ClassLabel>, cfg: &MetricsConfig) -> ClearResult {
    let (g, e) = class_filters(class, cfg.class_agnostic);
    clear_on(&align(records, frames, g, e), cfg.alpha_clear, cfg)
}

/// CLEAR metrics re-evaluated at each localization threshold.
pub fn mota_sweep(
    records: &[TrackRecord],
    frames: &[Frame],
    class: Option<ClassLabel>,
    alphas: &[f64],
    cfg: &MetricsConfig,
) -> Vec<(f64, ClearResult)> {
    let (g, e) = class_filters(class, cfg.class_agnostic);
    let seqs = align(records, frames, g, e);
    alphas.iter().map(|&a| (a, clear_on(&seqs, a, cfg))).collect()
}

/// Per ground-truth class `(TP, FN)` when any estimate within `radius`
/// metres may match regardless of class.
pub fn class_agnostic_counts(
    records: &[TrackRecord],
    frames: &[Frame],
    radius: f64,
    cfg: &MetricsConfig,
) -> PerClass<(u64, u64)> {
    let seqs = align(records, frames, ClassFilter::All, ClassFilter::All);
    let agnostic = MetricsConfig {
        class_agnostic: true,
        ..cfg.clone()
    };
    let alpha = 1.0 - radius / cfg.d0;
    let mut out = PerClass::uniform((0u64, 0u64));
    let empty = HashMap::new();
    for seq in &seqs {
        for f in &seq.frames {
            let m = match_frame(&f.gt, &f.est, alpha, &agnostic, &empty);
            for &(i, _, _) in &m.pairs {
                out.get_mut(f.gt[i].class_label).0 += 1;
            }
            for &i in &m.unmatched_gt {
                out.get_mut(f.gt[i].class_label).1 += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Box3D;

    fn item(id: u64, x: f64, y: f64) -> Item {
        Item {
            id,
            pos: [x, y],
            class_label: ClassLabel::Car,
            bbox: Box3D::bev(x, y, 4.0, 2.0, 0.0),
        }
    }

    #[test]
    fn threshold_decides_tp() {
        let cfg = MetricsConfig::default();
        let m = match_frame(&[item(1, 0.0, 0.0)], &[item(9, 1.0, 0.0)], 0.5, &cfg, &HashMap::new());
        assert_eq!(m.pairs.len(), 1);
        assert!((m.pairs[0].2 - 0.75).abs() < 1e-15);
        let m = match_frame(&[item(1, 0.0, 0.0)], &[item(9, 3.0, 0.0)], 0.5, &cfg, &HashMap::new());
        assert!(m.pairs.is_empty());
        assert_eq!((m.unmatched_gt.len(), m.unmatched_est.len()), (1, 1));
    }

    #[test]
    fn crossed_pairs_take_best_total() {
        let cfg = MetricsConfig::default();
        let gt = [item(1, 0.0, 0.0), item(2, 1.5, 0.0)];
        let est = [item(10, 1.4, 0.0), item(11, 0.1, 0.0)];
        let m = match_frame(&gt, &est, 0.5, &cfg, &HashMap::new());
        let mut pairs: Vec<(usize, usize)> = m.pairs.iter().map(|p| (p.0, p.1)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn continuity_outweighs_similarity() {
        let cfg = MetricsConfig::default();
        let gt = [item(1, 0.0, 0.0)];
        let est = [item(10, 1.0, 0.0), item(11, 0.0, 0.0)];
        let prev = HashMap::from([(1, 10)]);
        let m = match_frame(&gt, &est, 0.5, &cfg, &prev);
        assert_eq!(m.pairs[0].1, 0);
    }

    #[test]
    fn classes_kept_apart() {
        let mut cfg = MetricsConfig::default();
        let mut ped = item(9, 0.5, 0.0);
        ped.class_label = ClassLabel::Pedestrian;
        let m = match_frame(&[item(1, 0.0, 0.0)], &[ped.clone()], 0.5, &cfg, &HashMap::new());
        assert!(m.pairs.is_empty());
        cfg.class_agnostic = true;
        let m = match_frame(&[item(1, 0.0, 0.0)], &[ped], 0.5, &cfg, &HashMap::new());
        assert_eq!(m.pairs.len(), 1);
    }
}
