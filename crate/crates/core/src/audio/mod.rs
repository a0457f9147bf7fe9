//! Audio primitives: waveforms, WAV file I/O, framing and overlap-add.

mod frame;
mod wav;

pub use frame::{frame_signal, num_frames, overlap_add, window_values, FrameConfig, Window};
pub use wav::{read_wav, write_wav};

/// Mono audio signal with its sample rate. Samples are nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        assert!(sample_rate_hz > 0, "sample rate must be positive");
        Waveform {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Peak absolute amplitude, 0 for an empty signal.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()))
    }
}

/// Signal-to-noise ratio of `test` against `reference`, in dB.
///
/// Returns +inf when the signals match exactly.
pub fn snr_db(reference: &[f64], test: &[f64]) -> f64 {
    assert_eq!(reference.len(), test.len());
    let sig: f64 = reference.iter().map(|x| x * x).sum();
    let noise: f64 = reference
        .iter()
        .zip(test)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if noise == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (sig / noise).log10()
    }
}
