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

//! Synthetic spike frames and traces with known ground truth.
//!
//! A unit's template is a biphasic pair of gamma-shaped lobes
//! `(t/t_p)^p · e^{-(t - t_p)/τ}`: a primary lobe starting at onset and a
//! slower, opposite-signed repolarization lobe starting a few samples later.
//! Each onset is a one-sided power singularity of non-integer degree `p`, so
//! templates are smooth except at two points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, RawTrace, SpikeFrame, DEFAULT_FRAME_LENGTH, DEFAULT_PRE_PEAK};
use crate::error::{Error, Result};

/// Minimum relative L2 distance between the templates of two units.
const MIN_TEMPLATE_SEPARATION: f64 = 0.35;
const SHAPE: (f64, f64) = (3.0, 4.0);
const PEAK_TIME: (f64, f64) = (14.0, 20.0);
const RDELAY: (f64, f64) = (18.0, 28.0);
const RPEAK_TIME: (f64, f64) = (20.0, 30.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeTemplate {
    pub amplitude: f64,
    /// Onset degree of the primary lobe.
    pub shape: f64,
    /// Samples from onset to the primary lobe's peak.
    pub peak_time: f64,
    /// Repolarization lobe amplitude relative to the primary lobe (opposite sign).
    pub repol_ratio: f64,
    pub repol_delay: f64,
    pub repol_shape: f64,
    pub repol_peak_time: f64,
}

/// Unit-peak gamma lobe with onset degree `p` peaking `t_p` samples after onset.
fn lobe(t: f64, p: f64, t_p: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let tau = t_p / p;
    (t / t_p).powf(p) * (-(t - t_p) / tau).exp()
}

impl SpikeTemplate {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let sign = if rng.random::<bool>() { -1.0 } else { 1.0 };
        SpikeTemplate {
            amplitude: sign * rng.random_range(0.6..1.6),
            shape: rng.random_range(SHAPE.0..SHAPE.1),
            peak_time: rng.random_range(PEAK_TIME.0..PEAK_TIME.1),
            repol_ratio: rng.random_range(0.15..0.6),
            repol_delay: rng.random_range(RDELAY.0..RDELAY.1),
            repol_shape: rng.random_range(SHAPE.0..SHAPE.1),
            repol_peak_time: rng.random_range(RPEAK_TIME.0..RPEAK_TIME.1),
        }
    }

    /// Value `t` samples after onset.
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude
            * (lobe(t, self.shape, self.peak_time)
                - self.repol_ratio * lobe(t - self.repol_delay, self.repol_shape, self.repol_peak_time))
    }

    /// Time after onset of the absolute peak, on a 1/64-sample grid.
    pub fn peak_offset(&self) -> f64 {
        (0..64 * 64)
            .map(|k| k as f64 / 64.0)
            .max_by(|&a, &b| self.eval(a).abs().total_cmp(&self.eval(b).abs()))
            .unwrap()
    }

    /// Samples of the template with its absolute peak at `pre_peak + shift`.
    pub fn render(&self, n: usize, pre_peak: usize, shift: f64) -> Vec<f64> {
        let onset = pre_peak as f64 + shift - self.peak_offset();
        (0..n).map(|i| self.eval(i as f64 - onset)).collect()
    }
}

fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / norm
}

/// Draws `units` templates that are pairwise at least
/// `MIN_TEMPLATE_SEPARATION` apart.
fn draw_templates(units: usize, n: usize, pre_peak: usize, rng: &mut ChaCha8Rng) -> Vec<SpikeTemplate> {
    let mut templates: Vec<SpikeTemplate> = Vec::with_capacity(units);
    let mut rendered: Vec<Vec<f64>> = Vec::with_capacity(units);
    let mut attempts = 0;
    while templates.len() < units {
        let t = SpikeTemplate::draw(rng);
        let r = t.render(n, pre_peak, 0.0);
        attempts += 1;
        let separated = rendered
            .iter()
            .all(|o| relative_distance(o, &r).min(relative_distance(&r, o)) >= MIN_TEMPLATE_SEPARATION);
        // give up on separation for very large unit counts rather than loop forever
        if separated || attempts > 1000 * units {
            templates.push(t);
            rendered.push(r);
        }
    }
    templates
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub units: usize,
    pub frames_per_unit: usize,
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Maximum alignment jitter in samples (uniform in `±jitter`).
    pub jitter: f64,
    /// Maximum relative amplitude change (uniform in `1 ± amplitude_spread`).
    pub amplitude_spread: f64,
    pub pre_peak: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            units: 3,
            frames_per_unit: 100,
            n: DEFAULT_FRAME_LENGTH,
            noise_sigma: 0.0,
            seed: 0,
            jitter: 2.0,
            amplitude_spread: 0.1,
            pre_peak: DEFAULT_PRE_PEAK,
        }
    }
}

/// Labeled synthetic spike frames; frame `i` belongs to unit `i % units`.
pub fn synthesize_dataset(params: &SynthParams) -> Result<Dataset> {
    if params.units == 0 {
        return Err(Error::InvalidArgument("at least one unit is required".into()));
    }
    if params.n == 0 || params.pre_peak >= params.n {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= pre_peak < n (got pre_peak={}, n={})",
            params.pre_peak, params.n
        )));
    }
    if !(params.noise_sigma >= 0.0 && params.jitter >= 0.0 && params.amplitude_spread >= 0.0) {
        return Err(Error::InvalidArgument(
            "noise, jitter and amplitude spread must be nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let templates = draw_templates(params.units, params.n, params.pre_peak, &mut rng);
    let noise = Normal::new(0.0, params.noise_sigma.max(f64::MIN_POSITIVE)).unwrap();

    let total = params.units * params.frames_per_unit;
    let frames = (0..total)
        .map(|i| {
            let unit = i % params.units;
            let shift = if params.jitter > 0.0 {
                rng.random_range(-params.jitter..=params.jitter)
            } else {
                0.0
            };
            let gain = if params.amplitude_spread > 0.0 {
                1.0 + rng.random_range(-params.amplitude_spread..=params.amplitude_spread)
            } else {
                1.0
            };
            let mut samples = templates[unit].render(params.n, params.pre_peak, shift);
            for v in samples.iter_mut() {
                *v *= gain;
                if params.noise_sigma > 0.0 {
                    *v += noise.sample(&mut rng);
                }
            }
            SpikeFrame {
                samples,
                label: Some(unit as u32),
                source_index: i,
            }
        })
        .collect();
    let mut ds = Dataset::new(
        format!(
            "synth-k{}-n{}-noise{}-seed{}",
            params.units, params.n, params.noise_sigma, params.seed
        ),
        frames,
    )?;
    ds.difficulty_tag = Some(if params.noise_sigma == 0.0 { "noiseless" } else { "noisy" }.into());
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub duration_s: f64,
    pub sampling_rate: f64,
    pub spikes: usize,
    pub units: usize,
    /// Ratio of each unit's peak amplitude to the noise standard deviation.
    pub snr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTrace {
    pub trace: RawTrace,
    /// Sample index of every planted spike's absolute peak, ascending.
    pub peaks: Vec<usize>,
    pub labels: Vec<u32>,
}

/// A continuous recording with `spikes` non-overlapping planted spikes.
pub fn synthesize_trace(params: &TraceParams) -> Result<SynthTrace> {
    let len = (params.duration_s * params.sampling_rate).round() as usize;
    let spacing = 2 * DEFAULT_FRAME_LENGTH;
    if params.units == 0 || params.snr <= 0.0 {
        return Err(Error::InvalidArgument("units >= 1 and snr > 0 required".into()));
    }
    if (params.spikes + 2) * spacing > len {
        return Err(Error::InvalidArgument(format!(
            "{} spikes do not fit in {len} samples",
            params.spikes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let templates = draw_templates(params.units, DEFAULT_FRAME_LENGTH, DEFAULT_PRE_PEAK, &mut rng);

    // Spread the slack randomly between fixed-spacing slots.
    let slack = len - (params.spikes + 2) * spacing;
    let mut gaps: Vec<usize> = (0..params.spikes).map(|_| rng.random_range(0..=slack)).collect();
    gaps.sort_unstable();
    let noise_sigma = 1.0 / params.snr;
    let noise = Normal::new(0.0, noise_sigma).unwrap();
    let mut samples: Vec<f64> = (0..len).map(|_| noise.sample(&mut rng)).collect();

    let mut peaks = Vec::with_capacity(params.spikes);
    let mut labels = Vec::with_capacity(params.spikes);
    for (k, gap) in gaps.into_iter().enumerate() {
        let unit = rng.random_range(0..params.units);
        let t = &templates[unit];
        let peak = spacing + k * spacing + gap;
        let start = peak - DEFAULT_PRE_PEAK;
        let shape = t.render(DEFAULT_FRAME_LENGTH, DEFAULT_PRE_PEAK, 0.0);
        let scale = 1.0 / t.amplitude.abs();
        for (i, v) in shape.iter().enumerate() {
            samples[start + i] += v * scale;
        }
        peaks.push(peak);
        labels.push(unit as u32);
    }
    Ok(SynthTrace {
        trace: RawTrace {
            samples,
            sampling_rate: params.sampling_rate,
        },
        peaks,
        labels,
    })
}
