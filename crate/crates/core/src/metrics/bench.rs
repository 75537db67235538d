use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{Framework, PipelineConfig};
use crate::pipelines::{new_tracker, PipelineError};
use crate::types::Frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub framework: Framework,
    pub frames: usize,
    pub repeats: usize,
    /// Frames processed per second of tracking time, over all repeats.
    pub mean_fps: f64,
    pub fps_per_repeat: Vec<f64>,
    pub latency_mean_ms: f64,
    pub latency_p50_ms: f64,
    pub latency_p90_ms: f64,
    pub latency_p99_ms: f64,
    pub latency_max_ms: f64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    // nearest rank
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Times the tracking loop alone, frame by frame. The tracker restarts at
/// every sequence boundary and at every repeat.
pub fn fps_benchmark(
    framework: Framework,
    frames: &[Frame],
    cfg: &PipelineConfig,
    repeats: usize,
) -> Result<BenchResult, PipelineError> {
    let repeats = repeats.max(1);
    let mut latencies = Vec::with_capacity(frames.len() * repeats);
    let mut fps_per_repeat = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let mut tracker = new_tracker(framework, cfg);
        let mut seq: Option<&str> = None;
        let mut elapsed = 0.0;
        for f in frames {
            if seq != Some(f.seq_id.as_str()) {
                tracker = new_tracker(framework, cfg);
                seq = Some(f.seq_id.as_str());
            }
            let t0 = Instant::now();
            let out = tracker.step(f)?;
            let dt = t0.elapsed().as_secs_f64();
            std::hint::black_box(out);
            latencies.push(dt);
            elapsed += dt;
        }
        fps_per_repeat.push(if elapsed > 0.0 { frames.len() as f64 / elapsed } else { 0.0 });
    }
    let total: f64 = latencies.iter().sum();
    let mut sorted = latencies.clone();
    sorted.sort_by(f64::total_cmp);
    let ms = 1e3;
    Ok(BenchResult {
        framework,
        frames: frames.len(),
        repeats,
        mean_fps: if total > 0.0 { latencies.len() as f64 / total } else { 0.0 },
        fps_per_repeat,
        latency_mean_ms: if latencies.is_empty() { 0.0 } else { total / latencies.len() as f64 * ms },
        latency_p50_ms: percentile(&sorted, 0.5) * ms,
        latency_p90_ms: percentile(&sorted, 0.9) * ms,
        latency_p99_ms: percentile(&sorted, 0.99) * ms,
        latency_max_ms: sorted.last().copied().unwrap_or(0.0) * ms,
    })
}
