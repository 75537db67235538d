//! Line-oriented JSON storage for frames and track records.
//!
//! A file starts with a header line naming its schema, followed by one
//! record per line:
//!
//! ```text
//! {"schema":"radar-mot.frames.v1","records":2}
//! {"seq_id":"a","frame_idx":0,"timestamp":0.0,"points":[...],...}
//! {"seq_id":"a","frame_idx":1,"timestamp":0.1,"points":[...],...}
//! ```
//!
//! Blank lines are ignored. `docs/file-formats.md` lists every field.

use std::io::{self, BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{Frame, TrackRecord};

pub const FRAMES_SCHEMA: &str = "radar-mot.frames.v1";
pub const TRACKS_SCHEMA: &str = "radar-mot.tracks.v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected schema '{expected}', found '{found}'")]
    Schema { expected: String, found: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    records: usize,
}

fn write_records<W: Write, T: Serialize>(mut w: W, schema: &str, records: &[T]) -> io::Result<()> {
    let header = Header {
        schema: schema.to_string(),
        records: records.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn read_records<R: BufRead, T: DeserializeOwned>(r: R, schema: &str) -> Result<Vec<T>, FormatError> {
    let mut header: Option<Header> = None;
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| FormatError::Parse {
            line: i + 1,
            message: e.to_string(),
        };
        match &header {
            None => {
                let h: Header = serde_json::from_str(&line).map_err(parse_err)?;
                if h.schema != schema {
                    return Err(FormatError::Schema {
                        expected: schema.to_string(),
                        found: h.schema,
                    });
                }
                header = Some(h);
            }
            Some(_) => out.push(serde_json::from_str(&line).map_err(parse_err)?),
        }
    }
    let h = header.ok_or(FormatError::Parse {
        line: 0,
        message: "missing header line".into(),
    })?;
    if h.records != out.len() {
        return Err(FormatError::Parse {
            line: 0,
            message: format!("header announces {} records, found {}", h.records, out.len()),
        });
    }
    Ok(out)
}

pub fn write_frames<W: Write>(w: W, frames: &[Frame]) -> io::Result<()> {
    write_records(w, FRAMES_SCHEMA, frames)
}

pub fn read_frames<R: BufRead>(r: R) -> Result<Vec<Frame>, FormatError> {
    read_records(r, FRAMES_SCHEMA)
}

pub fn write_tracks<W: Write>(w: W, records: &[TrackRecord]) -> io::Result<()> {
    write_records(w, TRACKS_SCHEMA, records)
}

pub fn read_tracks<R: BufRead>(r: R) -> Result<Vec<TrackRecord>, FormatError> {
    read_records(r, TRACKS_SCHEMA)
}

pub fn frames_to_string(frames: &[Frame]) -> String {
    let mut buf = Vec::new();
    write_frames(&mut buf, frames).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn tracks_to_string(records: &[TrackRecord]) -> String {
    let mut buf = Vec::new();
    write_tracks(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("JSON is UTF-8")
}
