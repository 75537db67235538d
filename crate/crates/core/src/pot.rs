//! Point-object tracker: a Poisson multi-Bernoulli density propagated with a
//! single best global association hypothesis (GNN-PMB).
//!
//! Each detection box contributes its BEV center as a point measurement.
//! Per frame a detection may belong to an existing Bernoulli, to a newly
//! detected object drawn from the Poisson (undetected) intensity, or to
//! clutter; the best joint association is found with a 2D assignment.

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::error::FilterError;
use crate::kinematics::{merge_gaussians, KinematicGaussian};
use crate::linalg::{chi2_2dof_quantile, log_normal2, mahalanobis2, Mat2, Vec2};
use crate::per_class::PerClass;
use crate::types::{Box3D, ClassLabel, Detection, TrackRecord};

/// Smallest probability used inside logarithms.
const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotBirth {
    /// Poisson birth intensity per m^2 per frame, spatially uniform.
    pub intensity: f64,
    /// Undetected-object intensity per m^2 before the first frame.
    pub initial_intensity: f64,
    /// Velocity standard deviation of a newborn object (m/s).
    pub velocity_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotClassOverride {
    pub detection_prob: Option<f64>,
    pub clutter_intensity: Option<f64>,
    pub measurement_noise: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotConfig {
    pub survival_prob: f64,
    pub detection_prob: f64,
    /// Clutter intensity per m^2.
    pub clutter_intensity: f64,
    /// White-acceleration spectral density (m^2/s^3).
    pub process_noise: f64,
    pub measurement_noise: [[f64; 2]; 2],
    /// Gate probability mass; the Mahalanobis threshold is its chi-square(2) quantile.
    pub gate_prob: f64,
    pub existence_extract_threshold: f64,
    /// Bernoullis below this existence are recycled into the Poisson intensity.
    pub existence_prune_threshold: f64,
    /// Poisson components below this weight are dropped.
    pub ppp_prune_weight: f64,
    pub birth: PotBirth,
    pub class_overrides: PerClass<PotClassOverride>,
    /// Multiply the detection likelihood by the detector score.
    pub score_weighted_detection: bool,
    /// Multiply the new-object weight by the detector score.
    pub score_weighted_birth: bool,
}

impl Default for PotConfig {
    fn default() -> Self {
        crate::config::PipelineConfig::default().pot
    }
}

fn mat2(m: &[[f64; 2]; 2]) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn is_prob(p: f64) -> bool {
    p > 0.0 && p <= 1.0
}

impl PotConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |msg: &str| Err(FilterError::InvalidConfig(format!("pot: {msg}")));
        if !is_prob(self.survival_prob) {
            return bad("survival_prob must be in (0, 1]");
        }
        if !is_prob(self.detection_prob) {
            return bad("detection_prob must be in (0, 1]");
        }
        if !(self.clutter_intensity > 0.0) {
            return bad("clutter_intensity must be positive");
        }
        if !(self.process_noise >= 0.0) {
            return bad("process_noise must be non-negative");
        }
        if !(self.gate_prob > 0.0 && self.gate_prob < 1.0) {
            return bad("gate_prob must be in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.existence_extract_threshold)
            || !(0.0..=1.0).contains(&self.existence_prune_threshold)
        {
            return bad("existence thresholds must be in [0, 1]");
        }
        if self.existence_prune_threshold > self.existence_extract_threshold {
            return bad("existence_prune_threshold must not exceed existence_extract_threshold");
        }
        if !(self.birth.intensity >= 0.0 && self.birth.initial_intensity >= 0.0 && self.birth.velocity_std > 0.0) {
            return bad("birth parameters out of range");
        }
        for class in ClassLabel::ALL {
            let r = self.measurement_noise(class);
            if !(r[(0, 0)] > 0.0 && r.determinant() > 0.0 && (r[(0, 1)] - r[(1, 0)]).abs() < 1e-12) {
                return bad("measurement_noise must be symmetric positive definite");
            }
            if !is_prob(self.detection_prob(class)) || !(self.clutter_intensity(class) > 0.0) {
                return bad("class override out of range");
            }
        }
        Ok(())
    }

    pub fn detection_prob(&self, class: ClassLabel) -> f64 {
        self.class_overrides.get(class).detection_prob.unwrap_or(self.detection_prob)
    }

    pub fn clutter_intensity(&self, class: ClassLabel) -> f64 {
        self.class_overrides
            .get(class)
            .clutter_intensity
            .unwrap_or(self.clutter_intensity)
    }

    pub fn measurement_noise(&self, class: ClassLabel) -> Mat2 {
        mat2(
            self.class_overrides
                .get(class)
                .measurement_noise
                .as_ref()
                .unwrap_or(&self.measurement_noise),
        )
    }

    pub fn gate_threshold(&self) -> f64 {
        chi2_2dof_quantile(self.gate_prob)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliPot {
    pub existence: f64,
    pub state: KinematicGaussian,
    pub track_id: u64,
    pub class_label: ClassLabel,
    pub last_score: f64,
    /// Geometry of the most recently associated detection.
    pub last_box: Box3D,
}

/// Poisson intensity of undetected objects: a spatially uniform part plus
/// Gaussian components (recycled Bernoullis).
#[derive(Debug, Clone, PartialEq)]
pub struct PppIntensity {
    pub uniform: f64,
    pub components: Vec<(f64, KinematicGaussian)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotDensity {
    pub ppp: PppIntensity,
    pub bernoullis: Vec<BernoulliPot>,
    next_track_id: u64,
}

impl PotDensity {
    pub fn new(cfg: &PotConfig) -> Self {
        Self {
            ppp: PppIntensity {
                uniform: cfg.birth.initial_intensity,
                components: Vec::new(),
            },
            bernoullis: Vec::new(),
            next_track_id: 1,
        }
    }

    pub fn with_bernoullis(cfg: &PotConfig, bernoullis: Vec<BernoulliPot>) -> Self {
        let next = bernoullis.iter().map(|b| b.track_id + 1).max().unwrap_or(1);
        Self {
            next_track_id: next,
            bernoullis,
            ..Self::new(cfg)
        }
    }
}

/// Prediction: survival thinning, constant-velocity motion, birth.
pub fn pot_predict(density: &PotDensity, dt: f64, cfg: &PotConfig) -> Result<PotDensity, FilterError> {
    if !(dt > 0.0) {
        return Err(FilterError::NonPositiveDt(dt));
    }
    let ps = cfg.survival_prob;
    let q = cfg.process_noise;
    let bernoullis = density
        .bernoullis
        .iter()
        .map(|b| BernoulliPot {
            existence: ps * b.existence,
            state: b.state.predict(dt, q),
            ..b.clone()
        })
        .collect();
    let ppp = PppIntensity {
        uniform: ps * density.ppp.uniform + cfg.birth.intensity,
        components: density
            .ppp
            .components
            .iter()
            .map(|(w, g)| (ps * w, g.predict(dt, q)))
            .collect(),
    };
    Ok(PotDensity {
        ppp,
        bernoullis,
        next_track_id: density.next_track_id,
    })
}

/// Missed-detection existence update `r (1 - Pd) / (1 - r Pd)`.
pub fn missed_existence(r: f64, pd: f64) -> f64 {
    let denom = 1.0 - r * pd;
    if denom <= LOG_FLOOR {
        return 0.0;
    }
    (r * (1.0 - pd) / denom).clamp(0.0, 1.0)
}

/// Negative log-weights of detection-to-Bernoulli pairs relative to the miss,
/// plus one new-object-or-clutter column per detection.
fn build_costs(density: &PotDensity, detections: &[Detection], cfg: &PotConfig) -> CostMatrix {
    let n = density.bernoullis.len();
    let m = detections.len();
    let gate = cfg.gate_threshold();
    let mut costs = CostMatrix::forbidden(m, n + m);
    let log_missed: Vec<f64> = density
        .bernoullis
        .iter()
        .map(|b| (1.0 - b.existence * cfg.detection_prob(b.class_label)).max(LOG_FLOOR).ln())
        .collect();
    for (j, det) in detections.iter().enumerate() {
        let z = Vec2::new(det.bbox.cx, det.bbox.cy);
        let r = cfg.measurement_noise(det.class_label);
        for (i, b) in density.bernoullis.iter().enumerate() {
            if b.class_label != det.class_label || b.existence <= 0.0 {
                continue;
            }
            let (nu, s) = b.state.innovation(&z, &r);
            match mahalanobis2(&nu, &s) {
                Some(d2) if d2 <= gate => {}
                _ => continue,
            }
            let Some(log_lik) = log_normal2(&nu, &s) else { continue };
            let mut log_w = b.existence.ln() + cfg.detection_prob(b.class_label).ln() + log_lik;
            if cfg.score_weighted_detection {
                log_w += det.score.max(LOG_FLOOR).ln();
            }
            costs.set(j, i, -(log_w - log_missed[i]));
        }
        let (e, _) = new_object_weight(density, det, cfg);
        let lc = cfg.clutter_intensity(det.class_label);
        costs.set(j, n + j, -(e + lc).ln());
    }
    costs
}

/// Weight `e` of the detection originating from a previously undetected
/// object, and the posterior components of that object (unnormalized).
fn new_object_weight(
    density: &PotDensity,
    det: &Detection,
    cfg: &PotConfig,
) -> (f64, Vec<(f64, KinematicGaussian)>) {
    let pd = cfg.detection_prob(det.class_label);
    let z = Vec2::new(det.bbox.cx, det.bbox.cy);
    let r = cfg.measurement_noise(det.class_label);
    let mut parts = Vec::with_capacity(density.ppp.components.len() + 1);
    if density.ppp.uniform > 0.0 {
        parts.push((
            pd * density.ppp.uniform,
            KinematicGaussian::at_position(z, &r, cfg.birth.velocity_std),
        ));
    }
    for (w, g) in &density.ppp.components {
        if let Some(u) = g.update(&z, &r) {
            if let Some(ll) = log_normal2(&u.innovation, &u.innovation_cov) {
                let wk = pd * w * ll.exp();
                if wk > 0.0 {
                    parts.push((wk, u.posterior));
                }
            }
        }
    }
    let mut e: f64 = parts.iter().map(|(w, _)| *w).sum();
    if cfg.score_weighted_birth {
        e *= det.score;
    }
    (e, parts)
}

/// Measurement update keeping only the best global hypothesis.
pub fn pot_update(density: &PotDensity, detections: &[Detection], cfg: &PotConfig) -> PotDensity {
    let n = density.bernoullis.len();
    let costs = build_costs(density, detections, cfg);
    // The new-object column is always finite, so the problem is feasible.
    let assignment = solve_assignment(&costs).expect("birth columns keep the association feasible");

    let mut detected_by: Vec<Option<usize>> = vec![None; n];
    let mut new_from: Vec<usize> = Vec::new();
    for (j, &c) in assignment.row_to_col.iter().enumerate() {
        if c < n {
            detected_by[c] = Some(j);
        } else {
            new_from.push(j);
        }
    }

    let mut next_id = density.next_track_id;
    let mut bernoullis = Vec::with_capacity(n + new_from.len());
    for (b, det) in density.bernoullis.iter().zip(&detected_by) {
        match det {
            Some(j) => {
                let d = &detections[*j];
                let z = Vec2::new(d.bbox.cx, d.bbox.cy);
                let upd = b
                    .state
                    .update(&z, &cfg.measurement_noise(d.class_label))
                    .expect("innovation covariance is SPD");
                bernoullis.push(BernoulliPot {
                    existence: 1.0,
                    state: upd.posterior,
                    track_id: b.track_id,
                    class_label: d.class_label,
                    last_score: d.score,
                    last_box: d.bbox,
                });
            }
            None => bernoullis.push(BernoulliPot {
                existence: missed_existence(b.existence, cfg.detection_prob(b.class_label)),
                ..b.clone()
            }),
        }
    }
    for j in new_from {
        let d = &detections[j];
        let (e, parts) = new_object_weight(density, d, cfg);
        if !(e > 0.0) {
            continue;
        }
        let lc = cfg.clutter_intensity(d.class_label);
        let Some(state) = merge_gaussians(&parts) else { continue };
        bernoullis.push(BernoulliPot {
            existence: (e / (e + lc)).clamp(0.0, 1.0),
            state,
            track_id: next_id,
            class_label: d.class_label,
            last_score: d.score,
            last_box: d.bbox,
        });
        next_id += 1;
    }

    let miss = 1.0 - cfg.detection_prob;
    let mut ppp = PppIntensity {
        uniform: miss * density.ppp.uniform,
        components: density
            .ppp
            .components
            .iter()
            .map(|(w, g)| (miss * w, g.clone()))
            .collect(),
    };

    // recycle weak Bernoullis into the Poisson intensity
    let (keep, recycle): (Vec<_>, Vec<_>) = bernoullis
        .into_iter()
        .partition(|b| b.existence >= cfg.existence_prune_threshold);
    ppp.components
        .extend(recycle.into_iter().map(|b| (b.existence, b.state)));
    ppp.components.retain(|(w, _)| *w >= cfg.ppp_prune_weight);

    PotDensity {
        ppp,
        bernoullis: keep,
        next_track_id: next_id,
    }
}

/// Reports every Bernoulli whose existence clears the extraction threshold.
pub fn pot_extract(density: &PotDensity, frame_idx: u64, cfg: &PotConfig) -> Vec<TrackRecord> {
    density
        .bernoullis
        .iter()
        .filter(|b| b.existence >= cfg.existence_extract_threshold)
        .map(|b| {
            let p = b.state.position();
            TrackRecord {
                seq_id: String::new(),
                track_id: b.track_id,
                frame_idx,
                bbox: Box3D {
                    cx: p.x,
                    cy: p.y,
                    ..b.last_box
                },
                class_label: b.class_label,
                existence: b.existence,
            }
        })
        .collect()
}

/// Convenience constructor for a Bernoulli at a known state, used by tests
/// and tools that seed the filter.
pub fn bernoulli_at(
    track_id: u64,
    existence: f64,
    mean: [f64; 4],
    cov: crate::linalg::Mat4,
    class_label: ClassLabel,
) -> BernoulliPot {
    BernoulliPot {
        existence,
        state: KinematicGaussian {
            mean: Vector4::from(mean),
            cov,
        },
        track_id,
        class_label,
        last_score: 1.0,
        last_box: Box3D::bev(mean[0], mean[1], 1.0, 1.0, 0.0),
    }
}
