//! The three tracking frameworks, run frame by frame over a sequence.
//!
//! * `tbd-pot`: detection boxes into the GNN-PMB point tracker.
//! * `jdt-eot`: raw points, gated and clustered, into the GGIW-PMBM tracker.
//! * `tbd-eot`: only points inside confident detection boxes, clustered per
//!   detector class, into the GGIW-PMBM tracker.
//!
//! Frames are processed online; a change of `seq_id` restarts the tracker.

use thiserror::Error;

use crate::config::{Framework, PipelineConfig};
use crate::eot::{eot_extract, eot_predict, eot_update_with_partitions, PartitionedScan, PmbmDensity};
use crate::error::FilterError;
use crate::geometry::point_in_rotated_box;
use crate::linalg::Vec2;
use crate::partitioning::{cluster_with, gate_points, Cluster, Partition};
use crate::pot::{pot_extract, pot_predict, pot_update, PotDensity};
use crate::types::{ClassLabel, Detection, Frame, RadarPoint, TrackRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("frame {frame_idx} of sequence '{seq_id}' has no detections channel")]
    MissingDetections { seq_id: String, frame_idx: u64 },
    #[error("frame {frame_idx} of sequence '{seq_id}' has no points channel")]
    MissingPoints { seq_id: String, frame_idx: u64 },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
}

/// A tracker that consumes one frame at a time.
pub trait Tracker {
    /// Processes the next frame of the current sequence and returns the
    /// estimates for it.
    fn step(&mut self, frame: &Frame) -> Result<Vec<TrackRecord>, PipelineError>;
}

/// Time step from consecutive timestamps, or the nominal frame period when
/// the timestamps do not advance.
fn time_step(prev: Option<f64>, now: f64, nominal_rate: f64) -> f64 {
    match prev {
        Some(p) if now - p > 0.0 => now - p,
        _ => 1.0 / nominal_rate,
    }
}

fn confident_detections<'a>(frame: &'a Frame, cfg: &PipelineConfig) -> Result<Vec<&'a Detection>, PipelineError> {
    let dets = frame.detections.as_ref().ok_or_else(|| PipelineError::MissingDetections {
        seq_id: frame.seq_id.clone(),
        frame_idx: frame.frame_idx,
    })?;
    Ok(dets
        .iter()
        .filter(|d| d.score >= *cfg.score_threshold.get(d.class_label))
        .collect())
}

fn frame_points<'a>(frame: &'a Frame, cfg: &PipelineConfig) -> Result<Vec<&'a RadarPoint>, PipelineError> {
    let pts = frame.points.as_ref().ok_or_else(|| PipelineError::MissingPoints {
        seq_id: frame.seq_id.clone(),
        frame_idx: frame.frame_idx,
    })?;
    let vr = cfg.vr_prefilter;
    Ok(pts
        .iter()
        .filter(|p| !vr.enabled || p.vr.abs() >= vr.threshold)
        .collect())
}

fn stamp(mut records: Vec<TrackRecord>, frame: &Frame) -> Vec<TrackRecord> {
    for r in &mut records {
        r.seq_id = frame.seq_id.clone();
    }
    records
}

pub struct PotTracker {
    cfg: PipelineConfig,
    density: PotDensity,
    last_time: Option<f64>,
}

impl PotTracker {
    pub fn new(cfg: &PipelineConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            density: PotDensity::new(&cfg.pot),
            last_time: None,
        }
    }

    pub fn density(&self) -> &PotDensity {
        &self.density
    }
}

impl Tracker for PotTracker {
    fn step(&mut self, frame: &Frame) -> Result<Vec<TrackRecord>, PipelineError> {
        let dets: Vec<Detection> = confident_detections(frame, &self.cfg)?.into_iter().copied().collect();
        let dt = time_step(self.last_time, frame.timestamp, self.cfg.nominal_frame_rate);
        self.last_time = Some(frame.timestamp);
        let predicted = pot_predict(&self.density, dt, &self.cfg.pot)?;
        self.density = pot_update(&predicted, &dets, &self.cfg.pot);
        Ok(stamp(pot_extract(&self.density, frame.frame_idx, &self.cfg.pot), frame))
    }
}

/// BEV points with their detector class (`tbd-eot`) or without (`jdt-eot`).
pub struct SelectedPoints {
    pub points: Vec<RadarPoint>,
    pub classes: Option<Vec<ClassLabel>>,
}

/// Keeps the points inside at least one box; each kept point takes the class
/// of the highest-scoring box containing it (earlier box on equal scores).
pub fn select_points_in_boxes(points: &[&RadarPoint], boxes: &[&Detection]) -> SelectedPoints {
    let mut kept = Vec::new();
    let mut classes = Vec::new();
    for p in points {
        let owner = boxes
            .iter()
            .filter(|d| point_in_rotated_box(p.bev(), &d.bbox))
            .reduce(|best, d| if d.score > best.score { d } else { best });
        if let Some(d) = owner {
            kept.push(**p);
            classes.push(d.class_label);
        }
    }
    SelectedPoints {
        points: kept,
        classes: Some(classes),
    }
}

/// Partitions of the points, one per clustering setting (duplicates
/// removed). Points are grouped by gate membership and class, and each group
/// is clustered on its own.
pub fn build_scan(selected: &SelectedPoints, gates: &[(Vec2, f64)], cfg: &PipelineConfig) -> PartitionedScan {
    let pts = &selected.points;
    let (gated, ungated) = gate_points(pts, gates);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for side in [gated, ungated] {
        match &selected.classes {
            None => groups.push(side),
            Some(classes) => {
                for c in ClassLabel::ALL {
                    groups.push(side.iter().copied().filter(|&i| classes[i] == c).collect());
                }
            }
        }
    }
    groups.retain(|g| !g.is_empty());

    let mut partitions: Vec<Partition> = Vec::new();
    if pts.is_empty() {
        partitions.push(Partition::default());
    }
    for setting in &cfg.clustering.settings {
        if pts.is_empty() {
            break;
        }
        let mut clusters = Vec::new();
        for g in &groups {
            let sub: Vec<RadarPoint> = g.iter().map(|&i| pts[i]).collect();
            for c in cluster_with(&sub, setting).clusters {
                clusters.push(Cluster::from_indices(pts, c.indices.iter().map(|&k| g[k]).collect()));
            }
        }
        let p = Partition::canonical(clusters);
        if !partitions.contains(&p) {
            partitions.push(p);
        }
    }
    PartitionedScan {
        num_points: pts.len(),
        partitions,
        point_classes: selected.classes.clone(),
    }
}

pub struct EotTracker {
    cfg: PipelineConfig,
    classified: bool,
    density: PmbmDensity,
    last_time: Option<f64>,
}

impl EotTracker {
    /// `classified` selects the detection-guided mode.
    pub fn new(cfg: &PipelineConfig, classified: bool) -> Self {
        Self {
            cfg: cfg.clone(),
            classified,
            density: PmbmDensity::new(&cfg.eot),
            last_time: None,
        }
    }

    pub fn density(&self) -> &PmbmDensity {
        &self.density
    }

    fn gates(&self, density: &PmbmDensity) -> Vec<(Vec2, f64)> {
        let g = self.cfg.gating;
        let mut out = Vec::new();
        for t in &density.tracks {
            for h in &t.hyps {
                let mut radius = g.radius;
                if g.extent_adaptive {
                    let x = h.ggiw.extent.expected();
                    let lmax = x.symmetric_eigenvalues().max();
                    radius += self.cfg.eot.axis_scale * lmax.max(0.0).sqrt();
                }
                out.push((h.ggiw.kinematics.position(), radius));
            }
        }
        out
    }
}

impl Tracker for EotTracker {
    fn step(&mut self, frame: &Frame) -> Result<Vec<TrackRecord>, PipelineError> {
        let points = frame_points(frame, &self.cfg)?;
        let selected = if self.classified {
            let boxes = confident_detections(frame, &self.cfg)?;
            select_points_in_boxes(&points, &boxes)
        } else {
            SelectedPoints {
                points: points.into_iter().copied().collect(),
                classes: None,
            }
        };
        let dt = time_step(self.last_time, frame.timestamp, self.cfg.nominal_frame_rate);
        self.last_time = Some(frame.timestamp);
        let predicted = eot_predict(&self.density, dt, &self.cfg.eot)?;
        let scan = build_scan(&selected, &self.gates(&predicted), &self.cfg);
        self.density = eot_update_with_partitions(&predicted, &scan, &self.cfg.eot)?;
        Ok(stamp(eot_extract(&self.density, frame.frame_idx, &self.cfg.eot), frame))
    }
}

pub fn new_tracker(framework: Framework, cfg: &PipelineConfig) -> Box<dyn Tracker> {
    match framework {
        Framework::TbdPot => Box::new(PotTracker::new(cfg)),
        Framework::JdtEot => Box::new(EotTracker::new(cfg, false)),
        Framework::TbdEot => Box::new(EotTracker::new(cfg, true)),
    }
}

/// Runs `framework` over the frames, restarting at every new sequence id.
pub fn run_pipeline(framework: Framework, frames: &[Frame], cfg: &PipelineConfig) -> Result<Vec<TrackRecord>, PipelineError> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < frames.len() {
        let seq = &frames[start].seq_id;
        let end = frames[start..]
            .iter()
            .position(|f| &f.seq_id != seq)
            .map_or(frames.len(), |k| start + k);
        crate::types::validate_sequence(&frames[start..end]).map_err(PipelineError::InvalidSequence)?;
        let mut tracker = new_tracker(framework, cfg);
        for f in &frames[start..end] {
            out.extend(tracker.step(f)?);
        }
        start = end;
    }
    Ok(out)
}

pub fn run_tbd_pot(frames: &[Frame], cfg: &PipelineConfig) -> Result<Vec<TrackRecord>, PipelineError> {
    run_pipeline(Framework::TbdPot, frames, cfg)
}

pub fn run_jdt_eot(frames: &[Frame], cfg: &PipelineConfig) -> Result<Vec<TrackRecord>, PipelineError> {
    run_pipeline(Framework::JdtEot, frames, cfg)
}

pub fn run_tbd_eot(frames: &[Frame], cfg: &PipelineConfig) -> Result<Vec<TrackRecord>, PipelineError> {
    run_pipeline(Framework::TbdEot, frames, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Box3D;

    fn det(x: f64, y: f64, score: f64, class_label: ClassLabel) -> Detection {
        Detection {
            bbox: Box3D::bev(x, y, 4.0, 2.0, 0.0),
            class_label,
            score,
        }
    }

    #[test]
    fn empty_sequence() {
        let cfg = PipelineConfig::default();
        for f in Framework::ALL {
            assert!(run_pipeline(f, &[], &cfg).unwrap().is_empty());
        }
    }

    #[test]
    fn missing_channels() {
        let cfg = PipelineConfig::default();
        let frame = Frame::new("s", 0, 0.0);
        assert!(matches!(run_tbd_pot(&[frame.clone()], &cfg), Err(PipelineError::MissingDetections { .. })));
        assert!(matches!(run_jdt_eot(&[frame.clone()], &cfg), Err(PipelineError::MissingPoints { .. })));
        let mut with_points = frame;
        with_points.points = Some(Vec::new());
        assert!(matches!(run_tbd_eot(&[with_points], &cfg), Err(PipelineError::MissingDetections { .. })));
    }

    #[test]
    fn empty_clouds_give_no_tracks() {
        let cfg = PipelineConfig::default();
        let frames: Vec<Frame> = (0..5)
            .map(|i| {
                let mut f = Frame::new("s", i, i as f64 * 0.1);
                f.points = Some(Vec::new());
                f
            })
            .collect();
        assert!(run_jdt_eot(&frames, &cfg).unwrap().is_empty());
    }

    #[test]
    fn point_selection_prefers_higher_score() {
        let p = [RadarPoint::new(0.0, 0.0), RadarPoint::new(1.9, 0.0), RadarPoint::new(2.1, 0.0), RadarPoint::new(9.0, 0.0)];
        let refs: Vec<&RadarPoint> = p.iter().collect();
        let a = det(0.0, 0.0, 0.6, ClassLabel::Car);
        let b = det(1.0, 0.0, 0.9, ClassLabel::Cyclist);
        let sel = select_points_in_boxes(&refs, &[&a, &b]);
        assert_eq!(sel.points.len(), 3);
        assert_eq!(sel.classes.unwrap(), vec![ClassLabel::Cyclist; 3]);
        // a point 0.1 m outside the box edge is discarded
        let sel = select_points_in_boxes(&refs, &[&a]);
        assert_eq!(sel.points.len(), 2);
    }

    #[test]
    fn scans_cover_and_keep_classes_apart() {
        let cfg = PipelineConfig::default();
        let sel = SelectedPoints {
            points: vec![RadarPoint::new(0.0, 0.0), RadarPoint::new(0.2, 0.0), RadarPoint::new(0.4, 0.0)],
            classes: Some(vec![ClassLabel::Car, ClassLabel::Car, ClassLabel::Pedestrian]),
        };
        let scan = build_scan(&sel, &[], &cfg);
        for p in &scan.partitions {
            p.check_cover(3).unwrap();
            assert!(p.clusters.iter().all(|c| !(c.indices.contains(&1) && c.indices.contains(&2))));
        }
    }

    #[test]
    fn dt_fallback() {
        assert_eq!(time_step(None, 3.0, 10.0), 0.1);
        assert_eq!(time_step(Some(3.0), 3.0, 10.0), 0.1);
        assert!((time_step(Some(3.0), 3.05, 10.0) - 0.05).abs() < 1e-12);
    }
}
