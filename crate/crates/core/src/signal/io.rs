/*
Copyright 2026 The spikecs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Spike dataset file formats.
//!
//! CSV: an optional header line `# n=<int> labeled=<0|1>`, then one frame per
//! row with `n` sample fields and, when labeled, a trailing integer label.
//! Without a header every field is a sample and the dataset is unlabeled.
//!
//! Raw binary: the 8-byte magic `NSPK0001`, little-endian `u32` frame count
//! and `u32` frame length, then `count · n` little-endian `f32` samples.

use std::fs;
use std::path::Path;

use super::{Dataset, SpikeFrame};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"NSPK0001";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    RawBinary,
}

impl DatasetFormat {
    /// `.bin`/`.nspk` map to raw binary, anything else to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("nspk") => DatasetFormat::RawBinary,
            _ => DatasetFormat::Csv,
        }
    }
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "raw-binary" | "bin" | "binary" => Ok(DatasetFormat::RawBinary),
            other => Err(Error::InvalidArgument(format!("unknown dataset format `{other}`"))),
        }
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let frames = match format {
        DatasetFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_csv(&text, path)?
        }
        DatasetFormat::RawBinary => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_binary(&bytes, path)?
        }
    };
    Dataset::new(name, frames)
}

pub fn save_dataset(dataset: &Dataset, path: &Path, format: DatasetFormat) -> Result<()> {
    dataset.validate()?;
    let bytes = match format {
        DatasetFormat::Csv => to_csv(dataset)?.into_bytes(),
        DatasetFormat::RawBinary => to_binary(dataset)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct Header {
    n: usize,
    labeled: bool,
}

fn parse_header(line: &str, path: &Path) -> Result<Header> {
    let mut n = None;
    let mut labeled = false;
    for tok in line.trim_start_matches('#').split_whitespace() {
        let bad = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            msg,
        };
        match tok.split_once('=') {
            Some(("n", v)) => n = Some(v.parse().map_err(|_| bad(format!("bad n `{v}`")))?),
            Some(("labeled", "0")) => labeled = false,
            Some(("labeled", "1")) => labeled = true,
            Some(("labeled", v)) => return Err(bad(format!("labeled must be 0 or 1, got `{v}`"))),
            _ => {}
        }
    }
    let n = n.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        row: 1,
        msg: "header is missing n=<int>".into(),
    })?;
    Ok(Header { n, labeled })
}

fn parse_csv(text: &str, path: &Path) -> Result<Vec<SpikeFrame>> {
    let (header, body, line_offset) = match text.lines().next() {
        Some(first) if first.trim_start().starts_with('#') => {
            let rest = text.split_once('\n').map_or("", |(_, r)| r);
            (Some(parse_header(first, path)?), rest, 1)
        }
        _ => (None, text, 0),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());

    let mut frames = Vec::new();
    let mut expected_n = header.as_ref().map(|h| h.n);
    let labeled = header.as_ref().is_some_and(|h| h.labeled);
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: e.position().map_or(0, |p| p.line() as usize + line_offset),
            msg: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize) + line_offset;
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            msg,
        };
        let fields: Vec<&str> = record.iter().collect();
        let n_samples = if labeled { fields.len().saturating_sub(1) } else { fields.len() };
        match expected_n {
            Some(n) if n != n_samples => {
                return Err(err(format!(
                    "expected {n} samples{}, found {} fields",
                    if labeled { " plus a label" } else { "" },
                    fields.len()
                )))
            }
            None => expected_n = Some(n_samples),
            _ => {}
        }
        let samples = fields[..n_samples]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(format!("non-numeric sample `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let label = if labeled {
            let f = fields[n_samples];
            Some(f.parse::<u32>().map_err(|_| err(format!("bad label `{f}`")))?)
        } else {
            None
        };
        frames.push(SpikeFrame {
            samples,
            label,
            source_index: frames.len(),
        });
    }
    Ok(frames)
}

fn to_csv(dataset: &Dataset) -> Result<String> {
    let labeled = dataset.is_labeled();
    let mut out = format!(
        "# n={} labeled={}\n",
        dataset.frame_length(),
        u8::from(labeled)
    );
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for f in &dataset.frames {
        let mut fields: Vec<String> = f.samples.iter().map(|v| format!("{v:?}")).collect();
        if labeled {
            fields.push(f.label.expect("labeled dataset").to_string());
        }
        writer
            .write_record(&fields)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Format(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

fn parse_binary(bytes: &[u8], path: &Path) -> Result<Vec<SpikeFrame>> {
    let bad = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        row: 0,
        msg,
    };
    if bytes.len() < 16 || &bytes[..8] != BINARY_MAGIC {
        return Err(bad("missing NSPK0001 magic".into()));
    }
    let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    let expected = count
        .checked_mul(n)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| bad("header sizes overflow".into()))?;
    if body.len() != expected {
        return Err(bad(format!(
            "expected {expected} payload bytes for {count} frames of {n}, found {}",
            body.len()
        )));
    }
    let frames = body
        .chunks_exact(4 * n.max(1))
        .take(count)
        .enumerate()
        .map(|(i, chunk)| SpikeFrame {
            samples: chunk
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
                .collect(),
            label: None,
            source_index: i,
        })
        .collect();
    Ok(frames)
}

fn to_binary(dataset: &Dataset) -> Result<Vec<u8>> {
    let count = u32::try_from(dataset.len())
        .map_err(|_| Error::Format("too many frames for raw binary".into()))?;
    let n = u32::try_from(dataset.frame_length())
        .map_err(|_| Error::Format("frame too long for raw binary".into()))?;
    let mut out = Vec::with_capacity(16 + 4 * dataset.len() * dataset.frame_length());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for f in &dataset.frames {
        for &v in &f.samples {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}
