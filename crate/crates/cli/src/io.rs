use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use radar_mot::format::{read_frames, read_tracks, write_frames, write_tracks};
use radar_mot::types::{Frame, TrackRecord};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FRAMES_FILE: &str = "frames.jsonl";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Frame files under `path`: the file itself, `path/frames.jsonl`, or
/// `path/<sequence>/frames.jsonl` for every sequence directory, sorted.
pub fn frame_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let meta = fs::metadata(path).map_err(|e| CliError::io(path, e))?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let direct = path.join(FRAMES_FILE);
    if direct.is_file() {
        return Ok(vec![direct]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| CliError::io(path, e))? {
        let entry = entry.map_err(|e| CliError::io(path, e))?;
        let candidate = entry.path().join(FRAMES_FILE);
        if candidate.is_file() {
            out.push(candidate);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Input(format!("{}: no {FRAMES_FILE} found", path.display())));
    }
    Ok(out)
}

pub fn load_frames(path: &Path) -> Result<(Vec<Frame>, Vec<PathBuf>), CliError> {
    let files = frame_files(path)?;
    let mut frames = Vec::new();
    for f in &files {
        let file = File::open(f).map_err(|e| CliError::io(f, e))?;
        frames.extend(read_frames(BufReader::new(file)).map_err(|e| CliError::format(f, e))?);
    }
    Ok((frames, files))
}

pub fn load_tracks(path: &Path) -> Result<Vec<TrackRecord>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_tracks(BufReader::new(file)).map_err(|e| CliError::format(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn save_frames(path: &Path, frames: &[Frame]) -> Result<(), CliError> {
    write_frames(create(path)?, frames).map_err(|e| CliError::io(path, e))
}

pub fn save_tracks(path: &Path, records: &[TrackRecord]) -> Result<(), CliError> {
    write_tracks(create(path)?, records).map_err(|e| CliError::io(path, e))
}

pub fn save_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    save_text(path, &(text + "\n"))
}

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct WallClock {
    pub started_unix_s: f64,
    pub elapsed_s: f64,
}

/// Provenance written next to every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub version: &'static str,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_clock: WallClock,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, started: SystemTime, elapsed: Duration) -> Self {
        let canonical = serde_json::to_string(&config).expect("JSON values serialize");
        Self {
            schema: "radar-mot.manifest.v1",
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: sha256_hex(canonical.as_bytes()),
            config,
            inputs: Vec::new(),
            seed: None,
            outputs: Vec::new(),
            wall_clock: WallClock {
                started_unix_s: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
                elapsed_s: elapsed.as_secs_f64(),
            },
        }
    }
}

/// `<file>.manifest.json` beside an output file.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
