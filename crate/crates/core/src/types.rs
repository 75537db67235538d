//! Domain types shared by the trackers, the simulator and the evaluation suite.
//!
//! Tracking and evaluation happen on the bird's-eye-view plane: `x`, `y`,
//! `yaw`, `length` and `width` drive everything, while `z` and `height` are
//! carried through untouched.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One 4D radar return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarPoint {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
    /// Radial velocity in m/s.
    #[serde(default)]
    pub vr: f64,
    /// Reflectivity in dB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rcs: Option<f64>,
}

impl RadarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            z: 0.0,
            vr: 0.0,
            rcs: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.vr.is_finite()
    }

    #[inline]
    pub fn bev(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Oriented 3D box. `yaw` is kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub cx: f64,
    pub cy: f64,
    #[serde(default)]
    pub cz: f64,
    pub length: f64,
    pub width: f64,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default)]
    pub yaw: f64,
}

fn default_height() -> f64 {
    1.5
}

impl Box3D {
    pub fn bev(cx: f64, cy: f64, length: f64, width: f64, yaw: f64) -> Self {
        Self {
            cx,
            cy,
            cz: 0.0,
            length,
            width,
            height: default_height(),
            yaw: normalize_yaw(yaw),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.length > 0.0
            && self.width > 0.0
            && self.height > 0.0
            && [self.cx, self.cy, self.cz, self.yaw]
                .iter()
                .all(|v| v.is_finite())
    }

    #[inline]
    pub fn center(&self) -> [f64; 2] {
        [self.cx, self.cy]
    }

    /// BEV corners in counter-clockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        let local = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
        local.map(|[u, v]| [self.cx + c * u - s * v, self.cy + s * u + c * v])
    }
}

/// Maps any finite angle into `[-π, π)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    if (-PI..PI).contains(&yaw) {
        return yaw;
    }
    let two_pi = 2.0 * PI;
    let mut a = (yaw + PI).rem_euclid(two_pi) - PI;
    // rem_euclid may round up to exactly 2π for tiny negative inputs
    if a >= PI {
        a -= two_pi;
    }
    if a < -PI {
        a = -PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Car,
    Pedestrian,
    Cyclist,
    Other,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::Car,
        ClassLabel::Pedestrian,
        ClassLabel::Cyclist,
        ClassLabel::Other,
    ];

    /// The three classes reported in evaluation tables.
    pub const EVALUATED: [ClassLabel; 3] =
        [ClassLabel::Car, ClassLabel::Pedestrian, ClassLabel::Cyclist];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassLabel::Car => "car",
            ClassLabel::Pedestrian => "pedestrian",
            ClassLabel::Cyclist => "cyclist",
            ClassLabel::Other => "other",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "car" => Ok(ClassLabel::Car),
            "pedestrian" => Ok(ClassLabel::Pedestrian),
            "cyclist" => Ok(ClassLabel::Cyclist),
            "other" => Ok(ClassLabel::Other),
            _ => Err(format!("unknown class label '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: Box3D,
    #[serde(rename = "class")]
    pub class_label: ClassLabel,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub gt_id: u64,
    #[serde(rename = "box")]
    pub bbox: Box3D,
    #[serde(rename = "class")]
    pub class_label: ClassLabel,
}

/// Ego pose and velocity in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoInfo {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
}

/// One sensor scan.
///
/// A `None` channel means the source never provided it (as opposed to an
/// empty scan), which is what the pipelines check for their inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub seq_id: String,
    pub frame_idx: u64,
    pub timestamp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<RadarPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detections: Option<Vec<Detection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<GroundTruthObject>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego: Option<EgoInfo>,
}

impl Frame {
    pub fn new(seq_id: impl Into<String>, frame_idx: u64, timestamp: f64) -> Self {
        Self {
            seq_id: seq_id.into(),
            frame_idx,
            timestamp,
            points: None,
            detections: None,
            ground_truth: None,
            ego: None,
        }
    }

    pub fn points(&self) -> &[RadarPoint] {
        self.points.as_deref().unwrap_or(&[])
    }

    pub fn detections(&self) -> &[Detection] {
        self.detections.as_deref().unwrap_or(&[])
    }

    pub fn ground_truth(&self) -> &[GroundTruthObject] {
        self.ground_truth.as_deref().unwrap_or(&[])
    }
}

/// Checks frame ordering within one sequence: strictly increasing index,
/// non-decreasing timestamps, unique ground-truth ids per frame.
pub fn validate_sequence(frames: &[Frame]) -> Result<(), String> {
    for pair in frames.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.seq_id == b.seq_id {
            if b.frame_idx <= a.frame_idx {
                return Err(format!(
                    "sequence {}: frame index {} does not increase after {}",
                    b.seq_id, b.frame_idx, a.frame_idx
                ));
            }
            if b.timestamp < a.timestamp {
                return Err(format!(
                    "sequence {}: timestamp decreases at frame {}",
                    b.seq_id, b.frame_idx
                ));
            }
        }
    }
    for f in frames {
        let mut ids: Vec<u64> = f.ground_truth().iter().map(|g| g.gt_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!(
                "sequence {}: duplicate ground-truth id in frame {}",
                f.seq_id, f.frame_idx
            ));
        }
    }
    Ok(())
}

/// One identified estimate at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub seq_id: String,
    pub track_id: u64,
    pub frame_idx: u64,
    #[serde(rename = "box")]
    pub bbox: Box3D,
    #[serde(rename = "class")]
    pub class_label: ClassLabel,
    pub existence: f64,
}
