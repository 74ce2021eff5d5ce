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

use super::{RawTrace, SpikeFrame};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD_MULTIPLE: f64 = 4.0;

/// Median absolute amplitude scaled to a Gaussian standard deviation.
pub fn robust_noise_level(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut abs: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    let mid = abs.len() / 2;
    let (_, median, _) = abs.select_nth_unstable_by(mid, f64::total_cmp);
    let mut median = *median;
    if abs.len().is_multiple_of(2) {
        let lower = abs[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        median = 0.5 * (median + lower);
    }
    median / 0.6745
}

/// Threshold-crossing detection on `|trace|`.
///
/// Each crossing of `threshold_multiple · robust_noise_level` starts a search
/// for the absolute peak over the next `frame_length / 4` samples; the frame
/// is cut so the peak lands at `pre_peak`. Crossings within `frame_length / 2`
/// samples of the previous peak are treated as part of the same event, and
/// frames that would extend past either end of the trace are skipped.
pub fn detect_spikes(
    trace: &RawTrace,
    threshold_multiple: f64,
    frame_length: usize,
    pre_peak: usize,
) -> Result<Vec<SpikeFrame>> {
    let x = &trace.samples;
    if x.is_empty() {
        return Err(Error::Empty("trace"));
    }
    if frame_length == 0 || frame_length > x.len() {
        return Err(Error::InvalidShape(format!(
            "frame length {frame_length} must be in 1..={}",
            x.len()
        )));
    }
    if pre_peak >= frame_length {
        return Err(Error::InvalidArgument(format!(
            "pre_peak {pre_peak} must be < frame length {frame_length}"
        )));
    }
    if !(threshold_multiple > 0.0 && threshold_multiple.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "threshold multiple must be positive, got {threshold_multiple}"
        )));
    }
    let threshold = threshold_multiple * robust_noise_level(x);
    let search = (frame_length / 4).max(1);
    let dead_time = frame_length / 2;

    let mut frames = Vec::new();
    let mut last_peak: Option<usize> = None;
    let mut above = false;
    for i in 0..x.len() {
        let now_above = x[i].abs() > threshold;
        let crossing = now_above && !above;
        above = now_above;
        if !crossing {
            continue;
        }
        if let Some(p) = last_peak {
            if i < p + dead_time {
                continue;
            }
        }
        let end = (i + search).min(x.len());
        let peak = (i..end)
            .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(b.cmp(&a)))
            .expect("non-empty search window");
        last_peak = Some(peak);
        if peak < pre_peak || peak - pre_peak + frame_length > x.len() {
            continue;
        }
        let start = peak - pre_peak;
        frames.push(SpikeFrame {
            samples: x[start..start + frame_length].to_vec(),
            label: None,
            source_index: start,
        });
    }
    Ok(frames)
}
