//! Browser bindings for the tracking demo page. Every function exchanges JSON
//! strings; the `*_json` functions are plain Rust so they can be tested natively.

use radar_mot::config::{Framework, PipelineConfig};
use radar_mot::eot::extract::extent_matrix_to_box;
use radar_mot::linalg::Mat2;
use radar_mot::metrics::{clear_metrics, hota, mota_sweep, MetricsConfig};
use radar_mot::pipelines::run_pipeline;
use radar_mot::scenario::{preset, simulate};
use radar_mot::types::{Box3D, ClassLabel, Frame, TrackRecord};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct BoxView {
    id: u64,
    class: String,
    corners: [[f64; 2]; 4],
}

#[derive(Serialize)]
struct FrameView {
    points: Vec<[f64; 2]>,
    ground_truth: Vec<BoxView>,
    detections: Vec<BoxView>,
    tracks: Vec<BoxView>,
}

#[derive(Serialize)]
struct ScoreRow {
    class: String,
    hota: f64,
    det_a: f64,
    ass_a: f64,
    loc_a: f64,
    mota: f64,
    ids: u64,
}

#[derive(Serialize)]
struct SweepPoint {
    alpha: f64,
    mota: f64,
}

fn view(id: u64, class: ClassLabel, b: &Box3D) -> BoxView {
    BoxView {
        id,
        class: class.to_string(),
        corners: b.corners(),
    }
}

/// A simulated sequence and the tracker output on it.
#[wasm_bindgen]
pub struct DemoRun {
    frames: Vec<Frame>,
    records: Vec<TrackRecord>,
}

impl DemoRun {
    pub fn create(preset_name: &str, framework: &str, seed: u64, skew: f64, max_frames: u64) -> Result<Self, String> {
        let mut scenario = preset(preset_name).ok_or_else(|| format!("unknown preset {preset_name:?}"))?;
        let framework: Framework = framework.parse().map_err(|e| format!("{e}"))?;
        scenario.seed = seed;
        scenario.skew_factor = skew;
        if max_frames > 0 {
            scenario.frames = scenario.frames.min(max_frames);
        }
        let frames = simulate(&scenario).map_err(|e| e.to_string())?;
        let cfg = PipelineConfig {
            framework,
            ..PipelineConfig::default()
        };
        let records = run_pipeline(framework, &frames, &cfg).map_err(|e| e.to_string())?;
        Ok(Self { frames, records })
    }

    pub fn frame_json(&self, k: usize) -> Result<String, String> {
        let f = self.frames.get(k).ok_or_else(|| format!("frame {k} out of range"))?;
        let v = FrameView {
            points: f.points.iter().flatten().map(|p| p.bev()).collect(),
            ground_truth: f.ground_truth().iter().map(|g| view(g.gt_id, g.class_label, &g.bbox)).collect(),
            detections: f.detections.iter().flatten().map(|d| view(0, d.class_label, &d.bbox)).collect(),
            tracks: self
                .records
                .iter()
                .filter(|r| r.frame_idx == f.frame_idx)
                .map(|r| view(r.track_id, r.class_label, &r.bbox))
                .collect(),
        };
        Ok(serde_json::to_string(&v).expect("views serialize"))
    }

    pub fn scores_json(&self) -> String {
        let cfg = MetricsConfig::default();
        let rows: Vec<ScoreRow> = ClassLabel::EVALUATED
            .iter()
            .map(|&c| {
                let h = hota(&self.records, &self.frames, Some(c), &cfg);
                let m = clear_metrics(&self.records, &self.frames, Some(c), &cfg);
                ScoreRow {
                    class: c.to_string(),
                    hota: h.hota,
                    det_a: h.det_a,
                    ass_a: h.ass_a,
                    loc_a: h.loc_a,
                    mota: m.mota,
                    ids: m.ids,
                }
            })
            .collect();
        serde_json::to_string(&rows).expect("rows serialize")
    }

    pub fn sweep_json(&self, class: &str) -> Result<String, String> {
        let class: ClassLabel = class.parse()?;
        let cfg = MetricsConfig::default();
        let points: Vec<SweepPoint> = mota_sweep(&self.records, &self.frames, Some(class), &cfg.alpha_grid, &cfg)
            .into_iter()
            .map(|(alpha, m)| SweepPoint { alpha, mota: m.mota })
            .collect();
        Ok(serde_json::to_string(&points).expect("sweep serializes"))
    }
}

#[wasm_bindgen]
impl DemoRun {
    /// Simulates a preset and tracks it. `max_frames = 0` keeps the preset length.
    #[wasm_bindgen(constructor)]
    pub fn new(preset_name: &str, framework: &str, seed: u64, skew: f64, max_frames: u64) -> Result<DemoRun, JsValue> {
        Self::create(preset_name, framework, seed, skew, max_frames).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Points, ground truth, detections and tracks of frame `k` in BEV.
    pub fn frame(&self, k: usize) -> Result<String, JsValue> {
        self.frame_json(k).map_err(|e| JsValue::from_str(&e))
    }

    pub fn scores(&self) -> String {
        self.scores_json()
    }

    /// MOTA over the localization threshold grid for one class.
    pub fn sweep(&self, class: &str) -> Result<String, JsValue> {
        self.sweep_json(class).map_err(|e| JsValue::from_str(&e))
    }
}

#[derive(Serialize)]
struct ExtentBox {
    length: f64,
    width: f64,
    yaw: f64,
    corners: [[f64; 2]; 4],
}

pub fn extent_box_json(xx: f64, xy: f64, yy: f64, axis_scale: f64) -> Result<String, String> {
    let b = extent_matrix_to_box(&Mat2::new(xx, xy, xy, yy), [0.0, 0.0], axis_scale).map_err(|e| e.to_string())?;
    let out = ExtentBox {
        length: b.length,
        width: b.width,
        yaw: b.yaw,
        corners: b.corners(),
    };
    Ok(serde_json::to_string(&out).expect("box serializes"))
}

/// Box read off a symmetric extent matrix `[[xx, xy], [xy, yy]]`.
#[wasm_bindgen]
pub fn extent_box(xx: f64, xy: f64, yy: f64, axis_scale: f64) -> Result<String, JsValue> {
    extent_box_json(xx, xy, yy, axis_scale).map_err(|e| JsValue::from_str(&e))
}
