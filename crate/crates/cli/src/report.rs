use std::fmt::Write as _;

use radar_mot::metrics::{
    class_agnostic_counts, clear_metrics, hota, mota_sweep, BenchResult, MetricsConfig, SizeHistogram,
};
use radar_mot::types::{ClassLabel, Frame, TrackRecord};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ClassRow {
    pub class: String,
    pub hota: f64,
    pub det_a: f64,
    pub ass_a: f64,
    pub loc_a: f64,
    pub mota: f64,
    pub motp: f64,
    pub tp: u64,
    pub r#fn: u64,
    pub fp: u64,
    pub ids: u64,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub class: String,
    pub alpha: f64,
    pub mota: f64,
    pub tp: u64,
    pub r#fn: u64,
    pub fp: u64,
    pub ids: u64,
}

#[derive(Debug, Serialize)]
pub struct AgnosticRow {
    pub class: String,
    pub radius_m: f64,
    pub tp: u64,
    pub r#fn: u64,
}

#[derive(Debug, Serialize)]
pub struct EvaluationReport {
    pub schema: &'static str,
    pub d0: f64,
    pub alpha_clear: f64,
    pub class_agnostic: bool,
    pub rows: Vec<ClassRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_sweep: Option<Vec<SweepRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_agnostic_counts: Option<Vec<AgnosticRow>>,
}

/// Classes reported: the three table classes plus any other class present.
fn report_classes(records: &[TrackRecord], frames: &[Frame]) -> Vec<ClassLabel> {
    let mut classes = ClassLabel::EVALUATED.to_vec();
    let other_present = frames
        .iter()
        .flat_map(|f| f.ground_truth())
        .any(|g| g.class_label == ClassLabel::Other)
        || records.iter().any(|r| r.class_label == ClassLabel::Other);
    if other_present {
        classes.push(ClassLabel::Other);
    }
    classes
}

pub fn evaluate(
    records: &[TrackRecord],
    frames: &[Frame],
    cfg: &MetricsConfig,
    sweep: Option<&[f64]>,
    agnostic_radius: Option<f64>,
) -> EvaluationReport {
    let classes = report_classes(records, frames);
    let rows = classes
        .iter()
        .map(|&c| {
            let h = hota(records, frames, Some(c), cfg);
            let m = clear_metrics(records, frames, Some(c), cfg);
            ClassRow {
                class: c.to_string(),
                hota: h.hota,
                det_a: h.det_a,
                ass_a: h.ass_a,
                loc_a: h.loc_a,
                mota: m.mota,
                motp: m.motp,
                tp: m.tp,
                r#fn: m.r#fn,
                fp: m.fp,
                ids: m.ids,
            }
        })
        .collect();
    let alpha_sweep = sweep.map(|alphas| {
        classes
            .iter()
            .flat_map(|&c| {
                mota_sweep(records, frames, Some(c), alphas, cfg)
                    .into_iter()
                    .map(move |(alpha, m)| SweepRow {
                        class: c.to_string(),
                        alpha,
                        mota: m.mota,
                        tp: m.tp,
                        r#fn: m.r#fn,
                        fp: m.fp,
                        ids: m.ids,
                    })
            })
            .collect()
    });
    let class_agnostic_counts = agnostic_radius.map(|radius| {
        let counts = class_agnostic_counts(records, frames, radius, cfg);
        classes
            .iter()
            .map(|&c| {
                let (tp, fn_) = *counts.get(c);
                AgnosticRow {
                    class: c.to_string(),
                    radius_m: radius,
                    tp,
                    r#fn: fn_,
                }
            })
            .collect()
    });
    EvaluationReport {
        schema: "radar-mot.evaluation.v1",
        d0: cfg.d0,
        alpha_clear: cfg.alpha_clear,
        class_agnostic: cfg.class_agnostic,
        rows,
        alpha_sweep,
        class_agnostic_counts,
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

/// Plain-text tables, scores in percent.
pub fn render_evaluation(r: &EvaluationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<11} {:>7} {:>7} {:>7} {:>7} {:>8} {:>7} {:>7} {:>7} {:>7} {:>5}",
        "class", "HOTA", "DetA", "AssA", "LocA", "MOTA", "MOTP", "TP", "FN", "FP", "IDS"
    );
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{:<11} {:>7} {:>7} {:>7} {:>7} {:>8} {:>7} {:>7} {:>7} {:>7} {:>5}",
            row.class,
            pct(row.hota),
            pct(row.det_a),
            pct(row.ass_a),
            pct(row.loc_a),
            pct(row.mota),
            pct(row.motp),
            row.tp,
            row.r#fn,
            row.fp,
            row.ids
        );
    }
    if let Some(sweep) = &r.alpha_sweep {
        let _ = writeln!(s, "\n{:<11} {:>6} {:>8} {:>7} {:>7} {:>7} {:>5}", "class", "alpha", "MOTA", "TP", "FN", "FP", "IDS");
        for row in sweep {
            let _ = writeln!(
                s,
                "{:<11} {:>6.2} {:>8} {:>7} {:>7} {:>7} {:>5}",
                row.class,
                row.alpha,
                pct(row.mota),
                row.tp,
                row.r#fn,
                row.fp,
                row.ids
            );
        }
    }
    if let Some(counts) = &r.class_agnostic_counts {
        let _ = writeln!(s, "\n{:<11} {:>8} {:>7} {:>7}", "class", "radius", "TP", "FN");
        for row in counts {
            let _ = writeln!(s, "{:<11} {:>8.2} {:>7} {:>7}", row.class, row.radius_m, row.tp, row.r#fn);
        }
    }
    s
}

/// `dimension,lower_m,upper_m,count` rows for both histograms.
pub fn histogram_csv(h: &SizeHistogram) -> String {
    let mut s = String::from("dimension,lower_m,upper_m,count\n");
    for (name, hist) in [("width", &h.width), ("length", &h.length)] {
        for (lo, hi, c) in hist.rows() {
            let _ = writeln!(s, "{name},{lo:.3},{hi:.3},{c}");
        }
    }
    s
}

pub fn render_bench(b: &BenchResult) -> String {
    format!(
        "framework {}: {} frames x {} repeats\nmean FPS {:.1}\nlatency ms: mean {:.3}, p50 {:.3}, p90 {:.3}, p99 {:.3}, max {:.3}\n",
        b.framework,
        b.frames,
        b.repeats,
        b.mean_fps,
        b.latency_mean_ms,
        b.latency_p50_ms,
        b.latency_p90_ms,
        b.latency_p99_ms,
        b.latency_max_ms
    )
}
