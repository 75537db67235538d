//! Synthetic radar scenarios with known ground truth.
//!
//! Objects move at piecewise-constant velocity. Each live object returns a
//! Poisson number of points drawn from a Gaussian with its extent as
//! covariance (truncated at 4 standard deviations), optionally pushed toward
//! the sensor-facing side. Clutter is uniform over the field of view, plus
//! optional persistent roadside clutter along its lateral edges. Detections
//! emulate a detector: noisy ground-truth boxes with misses, and false boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{is_spd2, Mat2, Vec2};
use crate::types::{normalize_yaw, Box3D, ClassLabel, Detection, Frame, GroundTruthObject, RadarPoint};

/// Sampled points beyond this Mahalanobis radius are redrawn.
const TRUNCATION_SIGMA: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldOfView {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl FieldOfView {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityChange {
    /// From this frame on the object moves with `velocity`.
    pub frame: u64,
    pub velocity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub class: ClassLabel,
    pub birth_frame: u64,
    /// Last frame the object exists, inclusive; defaults to the scenario end.
    #[serde(default)]
    pub death_frame: Option<u64>,
    /// BEV position at the birth frame.
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    #[serde(default)]
    pub velocity_changes: Vec<VelocityChange>,
    pub length: f64,
    pub width: f64,
    #[serde(default = "default_height")]
    pub height: f64,
    /// Heading while stationary; a moving object faces its velocity.
    #[serde(default)]
    pub yaw: f64,
    /// Extent covariance in the object frame; defaults to
    /// `diag((length/4)^2, (width/4)^2)`.
    #[serde(default)]
    pub extent: Option<[[f64; 2]; 2]>,
    /// Mean number of points per frame.
    pub mean_points: f64,
}

fn default_height() -> f64 {
    1.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    /// Probability that a live object yields no box.
    pub fn_rate: f64,
    /// Expected false boxes per live object per frame.
    pub fp_rate: f64,
    /// Standard deviation of the box center (m).
    pub center_noise: f64,
    /// Standard deviation of box length and width (m).
    pub size_noise: f64,
    /// Standard deviation of the box heading (rad).
    pub yaw_noise: f64,
    /// Score range of true boxes.
    pub tp_score: [f64; 2],
    /// Score range of false boxes.
    pub fp_score: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadsideSpec {
    /// Stationary clutter sources per lateral edge of the field of view.
    pub anchors_per_edge: usize,
    /// Mean points per source per frame.
    pub points_per_anchor: f64,
    /// Spread of a source (m).
    pub spread: f64,
    /// Distance of the sources from the edge (m).
    pub inset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seq_id: String,
    pub frames: u64,
    pub frame_rate: f64,
    pub seed: u64,
    /// Expected uniform clutter points per frame.
    pub clutter_rate: f64,
    /// Fraction of far-side object points moved to the sensor-facing side.
    #[serde(default)]
    pub skew_factor: f64,
    #[serde(default)]
    pub sensor: [f64; 2],
    pub field_of_view: FieldOfView,
    pub detector: DetectorSpec,
    #[serde(default)]
    pub roadside: Option<RoadsideSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
}

pub const DEFAULT_SCENARIO_TOML: &str = include_str!("../scenarios/default.toml");
pub const ROADSIDE_SCENARIO_TOML: &str = include_str!("../scenarios/roadside.toml");
pub const DENSE_CLUTTER_SCENARIO_TOML: &str = include_str!("../scenarios/dense_clutter.toml");

/// The committed scenario presets by name.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let text = match name {
        "default" => DEFAULT_SCENARIO_TOML,
        "roadside" => ROADSIDE_SCENARIO_TOML,
        "dense_clutter" | "dense-clutter" => DENSE_CLUTTER_SCENARIO_TOML,
        _ => return None,
    };
    Some(ScenarioConfig::from_toml(text).expect("committed preset parses"))
}

fn check(ok: bool, msg: &str) -> Result<(), ScenarioError> {
    if ok {
        Ok(())
    } else {
        Err(ScenarioError::InvalidConfig(msg.to_string()))
    }
}

fn mat2(m: &[[f64; 2]; 2]) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn rotation(yaw: f64) -> Mat2 {
    let (s, c) = yaw.sin_cos();
    Mat2::new(c, -s, s, c)
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ScenarioError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        check(self.frame_rate > 0.0, "frame_rate must be positive")?;
        check(self.clutter_rate >= 0.0, "clutter_rate must be non-negative")?;
        check((0.0..=1.0).contains(&self.skew_factor), "skew_factor must be in [0, 1]")?;
        let f = &self.field_of_view;
        check(f.x_max > f.x_min && f.y_max > f.y_min, "field_of_view must have positive area")?;
        let d = &self.detector;
        check((0.0..=1.0).contains(&d.fn_rate), "detector.fn_rate must be in [0, 1]")?;
        check(d.fp_rate >= 0.0, "detector.fp_rate must be non-negative")?;
        check(
            d.center_noise >= 0.0 && d.size_noise >= 0.0 && d.yaw_noise >= 0.0,
            "detector noise must be non-negative",
        )?;
        for r in [d.tp_score, d.fp_score] {
            check(0.0 <= r[0] && r[0] <= r[1] && r[1] <= 1.0, "score ranges must lie in [0, 1]")?;
        }
        if let Some(r) = &self.roadside {
            check(r.points_per_anchor >= 0.0 && r.spread >= 0.0, "roadside rates must be non-negative")?;
        }
        for (i, o) in self.objects.iter().enumerate() {
            let bad = |m: &str| ScenarioError::InvalidConfig(format!("object {i}: {m}"));
            if !(o.mean_points > 0.0) {
                return Err(bad("mean_points must be positive"));
            }
            if !(o.length > 0.0 && o.width > 0.0 && o.height > 0.0) {
                return Err(bad("box dimensions must be positive"));
            }
            if o.death_frame.is_some_and(|d| d < o.birth_frame) {
                return Err(bad("death_frame precedes birth_frame"));
            }
            if let Some(e) = &o.extent {
                let m = mat2(e);
                if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 || !is_spd2(&m) {
                    return Err(bad("extent must be symmetric positive definite"));
                }
            }
        }
        Ok(())
    }
}

impl ObjectSpec {
    fn body_extent(&self) -> Mat2 {
        match &self.extent {
            Some(e) => mat2(e),
            None => Mat2::new((self.length / 4.0).powi(2), 0.0, 0.0, (self.width / 4.0).powi(2)),
        }
    }

    fn alive(&self, frame: u64, last: u64) -> bool {
        frame >= self.birth_frame && frame <= self.death_frame.unwrap_or(last)
    }

    fn velocity_at(&self, frame: u64) -> Vec2 {
        let v = self
            .velocity_changes
            .iter()
            .filter(|c| c.frame <= frame)
            .max_by_key(|c| c.frame)
            .map_or(self.velocity, |c| c.velocity);
        Vec2::new(v[0], v[1])
    }
}

/// Ground-truth state of an object in one frame.
#[derive(Debug, Clone, Copy)]
struct ObjectState {
    pos: Vec2,
    vel: Vec2,
    yaw: f64,
}

/// Exact trajectories, one entry per frame (`None` while not alive).
fn trajectories(cfg: &ScenarioConfig) -> Vec<Vec<Option<ObjectState>>> {
    let dt = 1.0 / cfg.frame_rate;
    let last = cfg.frames.saturating_sub(1);
    cfg.objects
        .iter()
        .map(|o| {
            let mut pos = Vec2::new(o.position[0], o.position[1]);
            let mut yaw = normalize_yaw(o.yaw);
            (0..cfg.frames)
                .map(|k| {
                    if !o.alive(k, last) {
                        return None;
                    }
                    if k > o.birth_frame {
                        pos += o.velocity_at(k - 1) * dt;
                    }
                    let vel = o.velocity_at(k);
                    if vel.norm() > 1e-9 {
                        yaw = normalize_yaw(vel.y.atan2(vel.x));
                    }
                    Some(ObjectState { pos, vel, yaw })
                })
                .collect()
        })
        .collect()
}

/// Moves each point on the far side of `center` (as seen from `sensor`) to
/// its mirror image through `center` with probability `skew_factor`.
/// `skew_factor = 0` leaves the points untouched; `1` puts every point on the
/// sensor-facing half.
pub fn skew_point_distribution<R: Rng + ?Sized>(
    points: &[RadarPoint],
    center: [f64; 2],
    sensor: [f64; 2],
    skew_factor: f64,
    rng: &mut R,
) -> Vec<RadarPoint> {
    if skew_factor <= 0.0 {
        return points.to_vec();
    }
    let toward = Vec2::new(sensor[0] - center[0], sensor[1] - center[1]);
    points
        .iter()
        .map(|p| {
            let d = Vec2::new(p.x - center[0], p.y - center[1]);
            let far = d.dot(&toward) < 0.0;
            // draw for every far point so the stream does not depend on the outcome
            if far && rng.random::<f64>() < skew_factor {
                RadarPoint {
                    x: 2.0 * center[0] - p.x,
                    y: 2.0 * center[1] - p.y,
                    ..*p
                }
            } else {
                *p
            }
        })
        .collect()
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

fn gauss<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("positive sigma").sample(rng)
}

fn uniform_in<R: Rng + ?Sized>(range: [f64; 2], rng: &mut R) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..range[1])
    } else {
        range[0]
    }
}

/// Offset drawn from N(0, extent) restricted to the 4-sigma ellipse.
fn truncated_offset<R: Rng + ?Sized>(chol: &Mat2, rng: &mut R) -> Vec2 {
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    loop {
        let u = Vec2::new(std.sample(rng), std.sample(rng));
        if u.norm() <= TRUNCATION_SIGMA {
            return chol * u;
        }
    }
}

fn radial_velocity(p: Vec2, sensor: Vec2, vel: Vec2) -> f64 {
    let r = p - sensor;
    let n = r.norm();
    if n > 0.0 {
        r.dot(&vel) / n
    } else {
        0.0
    }
}

fn typical_size(class: ClassLabel) -> (f64, f64) {
    match class {
        ClassLabel::Car => (4.5, 1.8),
        ClassLabel::Pedestrian => (0.8, 0.6),
        ClassLabel::Cyclist => (1.8, 0.7),
        ClassLabel::Other => (2.0, 2.0),
    }
}

/// Generates the frames of a scenario. Deterministic given the config.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Vec<Frame>, ScenarioError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let paths = trajectories(cfg);
    let fov = cfg.field_of_view;
    let sensor = Vec2::new(cfg.sensor[0], cfg.sensor[1]);
    let det = cfg.detector;

    let anchors: Vec<Vec2> = match &cfg.roadside {
        Some(r) => {
            let mut a = Vec::with_capacity(2 * r.anchors_per_edge);
            for y in [fov.y_min + r.inset, fov.y_max - r.inset] {
                for _ in 0..r.anchors_per_edge {
                    a.push(Vec2::new(rng.random_range(fov.x_min..fov.x_max), y));
                }
            }
            a
        }
        None => Vec::new(),
    };
    let fp_classes: Vec<ClassLabel> = {
        let mut c: Vec<ClassLabel> = cfg.objects.iter().map(|o| o.class).collect();
        c.sort_by_key(|c| c.as_str());
        c.dedup();
        if c.is_empty() {
            vec![ClassLabel::Car]
        } else {
            c
        }
    };

    let mut frames = Vec::with_capacity(cfg.frames as usize);
    for k in 0..cfg.frames {
        let mut frame = Frame::new(cfg.seq_id.clone(), k, k as f64 / cfg.frame_rate);
        let mut points = Vec::new();
        let mut gt = Vec::new();
        let mut dets = Vec::new();
        let mut live = 0usize;
        for (i, o) in cfg.objects.iter().enumerate() {
            let Some(s) = paths[i][k as usize] else { continue };
            live += 1;
            let bbox = Box3D {
                cx: s.pos.x,
                cy: s.pos.y,
                cz: 0.5 * o.height,
                length: o.length,
                width: o.width,
                height: o.height,
                yaw: s.yaw,
            };
            gt.push(GroundTruthObject {
                gt_id: i as u64 + 1,
                bbox,
                class_label: o.class,
            });

            let rot = rotation(s.yaw);
            let extent = rot * o.body_extent() * rot.transpose();
            let chol = extent.cholesky().expect("extent is SPD").l();
            let n = poisson(o.mean_points, &mut rng);
            let raw: Vec<RadarPoint> = (0..n)
                .map(|_| {
                    let p = s.pos + truncated_offset(&chol, &mut rng);
                    RadarPoint {
                        x: p.x,
                        y: p.y,
                        z: rng.random_range(0.0..o.height),
                        vr: 0.0,
                        rcs: None,
                    }
                })
                .collect();
            let skewed = skew_point_distribution(&raw, [s.pos.x, s.pos.y], cfg.sensor, cfg.skew_factor, &mut rng);
            points.extend(skewed.into_iter().map(|mut p| {
                p.vr = radial_velocity(Vec2::new(p.x, p.y), sensor, s.vel);
                p
            }));

            if rng.random::<f64>() >= det.fn_rate {
                let noisy = Box3D {
                    cx: bbox.cx + gauss(det.center_noise, &mut rng),
                    cy: bbox.cy + gauss(det.center_noise, &mut rng),
                    length: (bbox.length + gauss(det.size_noise, &mut rng)).max(0.1),
                    width: (bbox.width + gauss(det.size_noise, &mut rng)).max(0.1),
                    yaw: normalize_yaw(bbox.yaw + gauss(det.yaw_noise, &mut rng)),
                    ..bbox
                };
                dets.push(Detection {
                    bbox: noisy,
                    class_label: o.class,
                    score: uniform_in(det.tp_score, &mut rng),
                });
            }
        }

        for _ in 0..poisson(det.fp_rate * live as f64, &mut rng) {
            let class = fp_classes[rng.random_range(0..fp_classes.len())];
            let (l, w) = typical_size(class);
            dets.push(Detection {
                bbox: Box3D::bev(
                    rng.random_range(fov.x_min..fov.x_max),
                    rng.random_range(fov.y_min..fov.y_max),
                    l,
                    w,
                    rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                ),
                class_label: class,
                score: uniform_in(det.fp_score, &mut rng),
            });
        }

        for _ in 0..poisson(cfg.clutter_rate, &mut rng) {
            points.push(RadarPoint {
                x: rng.random_range(fov.x_min..fov.x_max),
                y: rng.random_range(fov.y_min..fov.y_max),
                z: rng.random_range(0.0..2.0),
                vr: gauss(0.3, &mut rng),
                rcs: None,
            });
        }
        if let Some(r) = &cfg.roadside {
            for a in &anchors {
                for _ in 0..poisson(r.points_per_anchor, &mut rng) {
                    points.push(RadarPoint {
                        x: a.x + gauss(r.spread, &mut rng),
                        y: a.y + gauss(r.spread, &mut rng),
                        z: rng.random_range(0.0..2.0),
                        vr: 0.0,
                        rcs: None,
                    });
                }
            }
        }

        frame.points = Some(points);
        frame.detections = Some(dets);
        frame.ground_truth = Some(gt);
        frames.push(frame);
    }
    Ok(frames)
}
