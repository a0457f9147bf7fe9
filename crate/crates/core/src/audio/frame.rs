//! Framing, windowing and overlap-add reconstruction.
//!
//! The Hann window here is the half-sample-offset ("DFT-even") variant
//! 0.5 * (1 - cos(2*pi*(n + 0.5)/N)). It satisfies constant overlap-add
//! exactly at 50% hop and is nonzero at the frame edges, so the envelope
//! division in [`overlap_add`] can recover every sample of the input.

use super::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    pub frame_len_samples: usize,
    pub hop_samples: usize,
    pub window: Window,
}

impl FrameConfig {
    pub fn new(frame_len_samples: usize, hop_samples: usize, window: Window) -> Self {
        assert!(
            hop_samples > 0 && hop_samples <= frame_len_samples,
            "hop must satisfy 0 < hop <= frame_len"
        );
        FrameConfig {
            frame_len_samples,
            hop_samples,
            window,
        }
    }
}

/// Window taps for a frame of `len` samples.
pub fn window_values(window: Window, len: usize) -> Vec<f64> {
    match window {
        Window::Rectangular => vec![1.0; len],
        Window::Hann => (0..len)
            .map(|n| {
                let x = (n as f64 + 0.5) / len as f64;
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * x).cos())
            })
            .collect(),
    }
}

/// Number of analysis frames for a signal of `len` samples:
/// ceil(max(len - frame_len, 0) / hop) + 1, or 0 for an empty signal.
pub fn num_frames(len: usize, cfg: &FrameConfig) -> usize {
    if len == 0 {
        return 0;
    }
    let overhang = len.saturating_sub(cfg.frame_len_samples);
    overhang.div_ceil(cfg.hop_samples) + 1
}

/// Split a waveform into windowed frames at `hop` spacing, zero-padding the tail.
pub fn frame_signal(w: &Waveform, cfg: &FrameConfig) -> Vec<Vec<f64>> {
    let n = num_frames(w.len(), cfg);
    let win = window_values(cfg.window, cfg.frame_len_samples);
    (0..n)
        .map(|k| {
            let start = k * cfg.hop_samples;
            (0..cfg.frame_len_samples)
                .map(|i| {
                    let s = w.samples.get(start + i).copied().unwrap_or(0.0);
                    s * win[i]
                })
                .collect()
        })
        .collect()
}

/// Recombine frames produced at `hop` spacing, dividing by the summed window
/// envelope where it exceeds 1e-8, and truncating to `original_len`.
pub fn overlap_add(
    frames: &[Vec<f64>],
    cfg: &FrameConfig,
    original_len: usize,
    sample_rate_hz: u32,
) -> Waveform {
    const ENVELOPE_FLOOR: f64 = 1e-8;
    if frames.is_empty() {
        return Waveform::new(vec![], sample_rate_hz);
    }
    let total = (frames.len() - 1) * cfg.hop_samples + cfg.frame_len_samples;
    let mut acc = vec![0.0f64; total];
    let mut env = vec![0.0f64; total];
    let win = window_values(cfg.window, cfg.frame_len_samples);
    for (k, frame) in frames.iter().enumerate() {
        let start = k * cfg.hop_samples;
        for (i, &v) in frame.iter().enumerate() {
            acc[start + i] += v;
            env[start + i] += win[i];
        }
    }
    let mut samples: Vec<f64> = acc
        .iter()
        .zip(&env)
        .map(|(&a, &e)| if e > ENVELOPE_FLOOR { a / e } else { a })
        .collect();
    samples.truncate(original_len);
    samples.resize(original_len, 0.0);
    Waveform::new(samples, sample_rate_hz)
}
