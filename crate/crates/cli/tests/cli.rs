use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use radar_mot::format::{tracks_to_string, write_frames};
use radar_mot::types::{Box3D, ClassLabel, Frame, GroundTruthObject, TrackRecord};
use serde_json::Value;
use tempfile::TempDir;

const MINIMAL_SCENARIO: &str = r#"
seq_id = "tiny"
frames = 20
frame_rate = 10.0
seed = 4
clutter_rate = 3.0

[field_of_view]
x_min = 0.0
x_max = 40.0
y_min = -20.0
y_max = 20.0

[detector]
fn_rate = 0.0
fp_rate = 0.0
center_noise = 0.1
size_noise = 0.05
yaw_noise = 0.02
tp_score = [0.8, 1.0]
fp_score = [0.3, 0.6]

[[objects]]
class = "car"
birth_frame = 0
position = [10.0, 0.0]
velocity = [2.0, 0.5]
length = 4.5
width = 1.8
mean_points = 10.0
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_radar-mot"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Writes the minimal scenario and simulates it into `dir/sim/tiny/`.
fn simulated(dir: &Path) -> PathBuf {
    let scenario = dir.join("tiny.toml");
    fs::write(&scenario, MINIMAL_SCENARIO).unwrap();
    let out = dir.join("sim");
    ok(&run(&["simulate", "--scenario", p(&scenario), "--seed", "4", "--out", p(&out)]));
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_frames_and_manifest_deterministically() {
    let tmp = TempDir::new().unwrap();
    let out = simulated(tmp.path());
    let frames = out.join("tiny/frames.jsonl");
    let manifest = read_json(&out.join("tiny/manifest.json"));
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let first = fs::read(&frames).unwrap();
    assert!(first.starts_with(b"{\"schema\":\"radar-mot.frames.v1\""));

    let again = tmp.path().join("again");
    ok(&run(&["simulate", "--scenario", p(&tmp.path().join("tiny.toml")), "--seed", "4", "--out", p(&again)]));
    assert_eq!(first, fs::read(again.join("tiny/frames.jsonl")).unwrap());
}

#[test]
fn missing_scenario_is_an_input_error_naming_the_path() {
    let out = run(&["simulate", "--scenario", "/nonexistent/scene.toml", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/scene.toml"));
}

#[test]
fn invalid_scenario_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, MINIMAL_SCENARIO.replace("mean_points = 10.0", "mean_points = 0.0")).unwrap();
    let out = run(&["simulate", "--scenario", p(&bad), "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn track_and_evaluate_every_framework() {
    let tmp = TempDir::new().unwrap();
    let sim = simulated(tmp.path());
    for fw in ["tbd-pot", "jdt-eot", "tbd-eot"] {
        let tracks = tmp.path().join(format!("{fw}.jsonl"));
        ok(&run(&["track", "--framework", fw, "--input", p(&sim), "--out", p(&tracks)]));
        let manifest = read_json(&tmp.path().join(format!("{fw}.jsonl.manifest.json")));
        assert_eq!(manifest["config"]["framework"], fw);
        assert!(!manifest["inputs"].as_array().unwrap().is_empty());

        let report = tmp.path().join(format!("{fw}.json"));
        let out = run(&["evaluate", "--gt", p(&sim), "--pred", p(&tracks), "--report", p(&report)]);
        ok(&out);
        assert!(String::from_utf8_lossy(&out.stdout).contains("HOTA"));
        let r = read_json(&report);
        let car = &r["rows"][0];
        assert_eq!(car["class"], "car");
        assert!(car["hota"].as_f64().unwrap() > 0.0, "{fw}: {car}");
    }
}

#[test]
fn tbd_pot_keeps_a_stable_identity() {
    let tmp = TempDir::new().unwrap();
    let sim = simulated(tmp.path());
    let tracks = tmp.path().join("t.jsonl");
    ok(&run(&["track", "--framework", "tbd-pot", "--input", p(&sim), "--out", p(&tracks)]));
    let text = fs::read_to_string(&tracks).unwrap();
    let records = radar_mot::format::read_tracks(text.as_bytes()).unwrap();
    let mut ids: Vec<u64> = records.iter().map(|r| r.track_id).collect();
    ids.dedup();
    assert_eq!(ids.len(), 1);
}

#[test]
fn track_output_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let sim = simulated(tmp.path());
    let a = tmp.path().join("a.jsonl");
    let b = tmp.path().join("b.jsonl");
    ok(&run(&["track", "--framework", "tbd-eot", "--input", p(&sim), "--out", p(&a)]));
    ok(&run(&["track", "--framework", "tbd-eot", "--input", p(&sim), "--out", p(&b)]));
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn jdt_eot_without_points_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let frames: Vec<Frame> = (0..3)
        .map(|i| {
            let mut f = Frame::new("s", i, i as f64 * 0.1);
            f.detections = Some(Vec::new());
            f
        })
        .collect();
    let path = tmp.path().join("frames.jsonl");
    write_frames(fs::File::create(&path).unwrap(), &frames).unwrap();
    let out = run(&["track", "--framework", "jdt-eot", "--input", p(&path), "--out", p(&tmp.path().join("t.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("points"));
}

#[test]
fn config_layers_and_overrides() {
    let tmp = TempDir::new().unwrap();
    let sim = simulated(tmp.path());
    let layer = tmp.path().join("layer.toml");
    fs::write(&layer, "framework = \"tbd-eot\"\n[eot]\nmax_hypotheses = 5\n").unwrap();
    let tracks = tmp.path().join("t.jsonl");
    ok(&run(&[
        "track", "--input", p(&sim), "--config", p(&layer), "--set", "eot.survival_prob=0.95", "--out", p(&tracks),
    ]));
    let m = read_json(&tmp.path().join("t.jsonl.manifest.json"));
    assert_eq!(m["config"]["framework"], "tbd-eot");
    assert_eq!(m["config"]["eot"]["max_hypotheses"], 5);
    assert_eq!(m["config"]["eot"]["survival_prob"], 0.95);

    let out = run(&["track", "--input", p(&sim), "--set", "eot.survival_prob=2.0", "--out", p(&tracks)]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["track", "--input", p(&sim), "--set", "eot.no_such_key=1", "--out", p(&tracks)]);
    assert_eq!(out.status.code(), Some(2));
}

fn car_box(x: f64, y: f64) -> Box3D {
    Box3D::bev(x, y, 4.5, 1.8, 0.0)
}

/// One car per frame; estimates reproduce the given CLEAR counts.
fn counted_sequence(tp: u64, fn_: u64, fp: u64, ids: u64) -> (Vec<Frame>, Vec<TrackRecord>) {
    let n = tp + fn_;
    let mut frames = Vec::new();
    let mut records = Vec::new();
    for k in 0..n {
        let mut f = Frame::new("t", k, k as f64 * 0.1);
        f.ground_truth = Some(vec![GroundTruthObject {
            gt_id: 1,
            bbox: car_box(0.0, 0.0),
            class_label: ClassLabel::Car,
        }]);
        frames.push(f);
        let rec = |id: u64, x: f64| TrackRecord {
            seq_id: "t".into(),
            track_id: id,
            frame_idx: k,
            bbox: car_box(x, 0.0),
            class_label: ClassLabel::Car,
            existence: 1.0,
        };
        if k < tp {
            records.push(rec(k * (ids + 1) / tp, 0.0));
        }
        if k < fp {
            records.push(rec(1_000_000, 50.0));
        }
    }
    (frames, records)
}

fn write_pair(dir: &Path, frames: &[Frame], records: &[TrackRecord]) -> (PathBuf, PathBuf) {
    let gt = dir.join("gt.jsonl");
    write_frames(fs::File::create(&gt).unwrap(), frames).unwrap();
    let pred = dir.join("pred.jsonl");
    fs::write(&pred, tracks_to_string(records)).unwrap();
    (gt, pred)
}

#[test]
fn evaluate_reproduces_a_reference_row() {
    let tmp = TempDir::new().unwrap();
    let (frames, records) = counted_sequence(2190, 2101, 593, 41);
    let (gt, pred) = write_pair(tmp.path(), &frames, &records);
    let report = tmp.path().join("r.json");
    let table = tmp.path().join("r.txt");
    ok(&run(&["evaluate", "--gt", p(&gt), "--pred", p(&pred), "--report", p(&report), "--table", p(&table)]));
    let r = read_json(&report);
    let car = &r["rows"][0];
    assert_eq!((car["tp"].as_u64(), car["fn"].as_u64(), car["fp"].as_u64(), car["ids"].as_u64()), (Some(2190), Some(2101), Some(593), Some(41)));
    assert!((car["mota"].as_f64().unwrap() * 100.0 - 36.26).abs() < 0.005);
    assert!(fs::read_to_string(table).unwrap().contains("36.26"));
}

#[test]
fn evaluate_empty_predictions_and_sweep() {
    let tmp = TempDir::new().unwrap();
    let (frames, _) = counted_sequence(0, 10, 0, 0);
    let (gt, pred) = write_pair(tmp.path(), &frames, &[]);
    let report = tmp.path().join("r.json");
    ok(&run(&[
        "evaluate", "--gt", p(&gt), "--pred", p(&pred), "--report", p(&report), "--alpha-sweep", "--class-agnostic",
    ]));
    let r = read_json(&report);
    let car = &r["rows"][0];
    assert_eq!(car["mota"], 0.0);
    assert_eq!(car["hota"], 0.0);
    assert_eq!(car["fn"], 10);
    let sweep = r["alpha_sweep"].as_array().unwrap();
    assert_eq!(sweep.iter().filter(|row| row["class"] == "car").count(), 4);
    let agnostic = r["class_agnostic_counts"].as_array().unwrap();
    assert_eq!(agnostic[0]["fn"], 10);
}

#[test]
fn extent_histogram_conserves_true_positives() {
    let tmp = TempDir::new().unwrap();
    let (frames, records) = counted_sequence(30, 5, 4, 0);
    let (gt, pred) = write_pair(tmp.path(), &frames, &records);
    let csv = tmp.path().join("h.csv");
    ok(&run(&["report", "--pred", p(&pred), "--histogram", "extent-size", "--gt", p(&gt), "--out", p(&csv)]));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // identical boxes: one bin per dimension holding every true positive
    assert_eq!(rows, vec!["width,1.750,2.000,30", "length,4.500,4.750,30"]);

    ok(&run(&["report", "--pred", p(&pred), "--histogram", "extent-size", "--out", p(&csv)]));
    assert!(fs::read_to_string(&csv).unwrap().contains("width,1.750,2.000,34"));
}

#[test]
fn bench_reports_throughput() {
    let tmp = TempDir::new().unwrap();
    let sim = simulated(tmp.path());
    let out_json = tmp.path().join("bench.json");
    let out = run(&["bench", "--framework", "tbd-eot", "--input", p(&sim), "--repeat", "2", "--out", p(&out_json)]);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean FPS"));
    let b = read_json(&out_json);
    assert_eq!(b["repeats"], 2);
    assert!(b["mean_fps"].as_f64().unwrap() > 0.0);
}

#[test]
fn wrong_schema_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("frames.jsonl");
    fs::write(&path, tracks_to_string(&[])).unwrap();
    let out = run(&["track", "--framework", "tbd-pot", "--input", p(&path), "--out", p(&tmp.path().join("x"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}
