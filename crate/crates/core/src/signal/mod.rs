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

//! Spike frames, datasets, threshold-crossing detection and a synthetic
//! spike generator.

mod detect;
mod io;
mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use detect::{detect_spikes, robust_noise_level, DEFAULT_THRESHOLD_MULTIPLE};
pub use io::{load_dataset, save_dataset, DatasetFormat, BINARY_MAGIC};
pub use synth::{
    synthesize_dataset, synthesize_trace, SpikeTemplate, SynthParams, SynthTrace, TraceParams,
};

pub const DEFAULT_FRAME_LENGTH: usize = 128;
/// Index of the absolute peak inside an aligned frame.
pub const DEFAULT_PRE_PEAK: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeFrame {
    pub samples: Vec<f64>,
    pub label: Option<u32>,
    /// Position of the frame in its source (row index or trace sample offset).
    pub source_index: usize,
}

impl AsRef<[f64]> for SpikeFrame {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub frames: Vec<SpikeFrame>,
    pub name: String,
    pub sampling_rate: Option<f64>,
    pub difficulty_tag: Option<String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, frames: Vec<SpikeFrame>) -> Result<Self> {
        let ds = Dataset {
            frames,
            name: name.into(),
            sampling_rate: None,
            difficulty_tag: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_length(&self) -> usize {
        self.frames.first().map_or(0, |f| f.samples.len())
    }

    /// True when every frame carries a label.
    pub fn is_labeled(&self) -> bool {
        !self.frames.is_empty() && self.frames.iter().all(|f| f.label.is_some())
    }

    /// Sorted distinct labels.
    pub fn units(&self) -> Vec<u32> {
        let mut u: Vec<u32> = self.frames.iter().filter_map(|f| f.label).collect();
        u.sort_unstable();
        u.dedup();
        u
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.frame_length();
        for (i, f) in self.frames.iter().enumerate() {
            if f.samples.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "frame length",
                    expected: n,
                    got: f.samples.len(),
                }
                .context(format!("frame {i}")));
            }
            if f.samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("frame {i} has non-finite samples")));
            }
        }
        Ok(())
    }
}

/// A continuous single-channel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrace {
    pub samples: Vec<f64>,
    pub sampling_rate: f64,
}
