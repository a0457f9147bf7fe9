//! The McAdams-coefficient anonymizer: frame-wise LPC analysis, pole phase
//! shifting, resynthesis, and per-speaker or per-utterance alpha sampling.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::audio::{frame_signal, overlap_add, read_wav, write_wav, FrameConfig, Waveform, Window};
use crate::error::{Error, Result};
use crate::harness::{Manifest, SubsetRole};
use crate::lpc::{lpc_analyze, synthesize_frame};
use crate::poles::{find_poles, mcadams_shift, poles_to_coeffs};

/// Whether one alpha is drawn per (subset role, speaker) or per utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnonLevel {
    SpeakerLevel,
    UtteranceLevel,
}

#[derive(Debug, Clone)]
pub struct McAdamsConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub lpc_order: usize,
    pub frame_cfg: FrameConfig,
    pub real_pole_epsilon: f64,
    pub stability_margin: f64,
    pub seed: u64,
}

impl McAdamsConfig {
    /// Defaults for 16 kHz audio: alpha ~ U(0.5, 0.9), order 20,
    /// 20 ms hann frames with 10 ms hop.
    pub fn new(seed: u64) -> Self {
        McAdamsConfig {
            alpha_min: 0.5,
            alpha_max: 0.9,
            lpc_order: 20,
            frame_cfg: FrameConfig::new(320, 160, Window::Hann),
            real_pole_epsilon: 1e-6,
            stability_margin: 0.999,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max) {
            return Err(Error::Config(format!(
                "alpha range must satisfy 0 < min <= max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            )));
        }
        if self.lpc_order == 0 {
            return Err(Error::Config("LPC order must be positive".into()));
        }
        Ok(())
    }

    /// Frame configuration scaled to a sample rate, keeping the same
    /// durations as the canonical 16 kHz setup.
    fn frame_cfg_for_rate(&self, sample_rate_hz: u32) -> FrameConfig {
        if sample_rate_hz == 16_000 {
            return self.frame_cfg;
        }
        let scale = sample_rate_hz as f64 / 16_000.0;
        FrameConfig::new(
            ((self.frame_cfg.frame_len_samples as f64 * scale).round() as usize).max(2),
            ((self.frame_cfg.hop_samples as f64 * scale).round() as usize).max(1),
            self.frame_cfg.window,
        )
    }
}

/// Deterministic alpha for a key: a stable hash of (seed, key) drives a
/// uniform draw from [alpha_min, alpha_max).
pub fn sample_alpha(key: &str, cfg: &McAdamsConfig) -> f64 {
    let u = hash_unit(cfg.seed, key);
    cfg.alpha_min + u * (cfg.alpha_max - cfg.alpha_min)
}

/// Uniform value in [0, 1) from SHA-256 of (seed, key).
fn hash_unit(seed: u64, key: &str) -> f64 {
    let digest = keyed_digest(seed, key);
    let x = u64::from_le_bytes(digest[..8].try_into().unwrap());
    x as f64 / 2.0f64.powi(64)
}

pub(crate) fn keyed_digest(seed: u64, key: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(key.as_bytes());
    hasher.finalize().into()
}

/// Anonymize a single utterance with a fixed alpha.
///
/// Pipeline per frame: LPC analysis, root finding, phase shift, coefficient
/// expansion, all-pole resynthesis from the original residual; frames are
/// recombined by overlap-add and the output is truncated to the input length.
pub fn anonymize_utterance(w: &Waveform, alpha: f64, cfg: &McAdamsConfig) -> Result<Waveform> {
    cfg.validate()?;
    let frame_cfg = cfg.frame_cfg_for_rate(w.sample_rate_hz);
    if cfg.lpc_order >= frame_cfg.frame_len_samples {
        return Err(Error::Config(format!(
            "LPC order {} must be below frame length {}",
            cfg.lpc_order, frame_cfg.frame_len_samples
        )));
    }
    let frames = frame_signal(w, &frame_cfg);
    let mut out_frames = Vec::with_capacity(frames.len());
    for (idx, frame) in frames.iter().enumerate() {
        let processed = process_frame(frame, alpha, cfg)
            .map_err(|e| Error::Numerical(format!("frame {idx}: {e}")))?;
        out_frames.push(processed);
    }
    let mut out = overlap_add(&out_frames, &frame_cfg, w.len(), w.sample_rate_hz);
    let peak = out.peak();
    if peak > 1.0 {
        for s in &mut out.samples {
            *s /= peak;
        }
    }
    Ok(out)
}

fn process_frame(frame: &[f64], alpha: f64, cfg: &McAdamsConfig) -> Result<Vec<f64>> {
    let lpc = lpc_analyze(frame, cfg.lpc_order)?;
    if lpc.degenerate {
        return Ok(frame.to_vec());
    }
    let poles = find_poles(&lpc)?;
    let shifted = mcadams_shift(&poles, alpha, cfg.real_pole_epsilon)?;
    let coeffs = poles_to_coeffs(&shifted, cfg.stability_margin);
    synthesize_frame(&lpc.residual, &coeffs)
}

/// One line of the alpha-assignment report.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaAssignment {
    pub utt_id: String,
    pub speaker_id: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    /// Assignments in manifest order.
    pub assignments: Vec<AlphaAssignment>,
    /// Per-utterance failures: (utt_id, message).
    pub failures: Vec<(String, String)>,
}

impl CorpusReport {
    /// Tab-separated `utt_id<TAB>speaker_id<TAB>alpha` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for a in &self.assignments {
            out.push_str(&format!("{}\t{}\t{:.12}\n", a.utt_id, a.speaker_id, a.alpha));
        }
        out
    }
}

/// Alpha key for a manifest record under the given anonymization level.
///
/// Speaker-level keys are qualified by subset role so that a speaker present
/// in both enrollment and trial subsets maps to two distinct pseudo-speakers.
pub fn alpha_key(utt_id: &str, speaker_id: &str, role: SubsetRole, level: AnonLevel) -> String {
    match level {
        AnonLevel::SpeakerLevel => {
            let role = match role {
                SubsetRole::Enrollment => "enrollment",
                SubsetRole::Trial => "trial",
            };
            format!("{role}|{speaker_id}")
        }
        AnonLevel::UtteranceLevel => utt_id.to_string(),
    }
}

/// Anonymize every utterance in a manifest, writing outputs under `out_dir`
/// with the same file names. Missing or unreadable audio is recorded as a
/// failure and processing continues.
pub fn anonymize_corpus(
    manifest: &Manifest,
    level: AnonLevel,
    cfg: &McAdamsConfig,
    out_dir: &Path,
) -> Result<CorpusReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut report = CorpusReport::default();
    for rec in &manifest.records {
        let key = alpha_key(&rec.utt_id, &rec.speaker_id, rec.subset_role, level);
        let alpha = sample_alpha(&key, cfg);
        report.assignments.push(AlphaAssignment {
            utt_id: rec.utt_id.clone(),
            speaker_id: rec.speaker_id.clone(),
            alpha,
        });
        let out_path = mirror_path(out_dir, &rec.audio_path);
        let outcome = read_wav(&rec.audio_path)
            .and_then(|w| anonymize_utterance(&w, alpha, cfg))
            .and_then(|anon| {
                if let Some(parent) = out_path.parent() {
                    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                write_wav(&anon, &out_path)
            });
        if let Err(e) = outcome {
            report.failures.push((rec.utt_id.clone(), e.to_string()));
        }
    }
    Ok(report)
}

/// Mirror a source path under `out_dir`: relative paths keep their directory
/// structure, absolute paths keep only the file name.
fn mirror_path(out_dir: &Path, audio_path: &Path) -> PathBuf {
    if audio_path.is_relative() {
        out_dir.join(audio_path)
    } else {
        out_dir.join(audio_path.file_name().unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::snr_db;
    use crate::harness::{Gender, ManifestRecord};

    fn default_cfg() -> McAdamsConfig {
        McAdamsConfig::new(7)
    }

    /// Synthetic vowel: pulse train through three resonators.
    pub(crate) fn synthetic_vowel(duration_s: f64, f0_hz: f64, sample_rate: u32) -> Waveform {
        let n = (duration_s * sample_rate as f64) as usize;
        let period = sample_rate as f64 / f0_hz;
        let mut excitation = vec![0.0f64; n];
        let mut t = 0.0;
        while (t as usize) < n {
            excitation[t as usize] = 1.0;
            t += period;
        }
        let mut x = excitation;
        for &(freq, bw) in &[(700.0, 80.0), (1200.0, 90.0), (2600.0, 120.0)] {
            x = resonator(&x, freq, bw, sample_rate);
        }
        let peak = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if peak > 0.0 {
            for v in &mut x {
                *v *= 0.5 / peak;
            }
        }
        Waveform::new(x, sample_rate)
    }

    fn resonator(x: &[f64], freq: f64, bandwidth: f64, sample_rate: u32) -> Vec<f64> {
        let r = (-std::f64::consts::PI * bandwidth / sample_rate as f64).exp();
        let theta = 2.0 * std::f64::consts::PI * freq / sample_rate as f64;
        let a1 = 2.0 * r * theta.cos();
        let a2 = -r * r;
        let mut y = vec![0.0f64; x.len()];
        for n in 0..x.len() {
            let mut acc = x[n];
            if n >= 1 {
                acc += a1 * y[n - 1];
            }
            if n >= 2 {
                acc += a2 * y[n - 2];
            }
            y[n] = acc;
        }
        y
    }

    #[test]
    fn alpha_is_deterministic() {
        let cfg = default_cfg();
        assert_eq!(sample_alpha("spk1", &cfg), sample_alpha("spk1", &cfg));
        assert_ne!(sample_alpha("spk1", &cfg), sample_alpha("spk2", &cfg));
    }

    #[test]
    fn degenerate_alpha_range() {
        let mut cfg = default_cfg();
        cfg.alpha_min = 0.8;
        cfg.alpha_max = 0.8;
        for key in ["a", "b", "c"] {
            assert_eq!(sample_alpha(key, &cfg), 0.8);
        }
    }

    #[test]
    fn alpha_distribution_is_uniform() {
        let cfg = default_cfg();
        let mut sum = 0.0;
        for i in 0..10_000 {
            let a = sample_alpha(&format!("key-{i}"), &cfg);
            assert!((0.5..0.9).contains(&a));
            sum += a;
        }
        let mean = sum / 10_000.0;
        assert!((mean - 0.7).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn alpha_one_is_near_identity() {
        let w = synthetic_vowel(1.0, 120.0, 16000);
        let cfg = default_cfg();
        let out = anonymize_utterance(&w, 1.0, &cfg).unwrap();
        assert_eq!(out.len(), w.len());
        let snr = snr_db(&w.samples, &out.samples);
        assert!(snr >= 30.0, "alpha=1 identity SNR {snr} dB");
    }

    #[test]
    fn silence_in_silence_out() {
        let w = Waveform::new(vec![0.0; 4000], 16000);
        let out = anonymize_utterance(&w, 0.8, &default_cfg()).unwrap();
        assert_eq!(out.len(), 4000);
        assert!(out.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn output_length_equals_input_length() {
        for len in [1, 100, 319, 320, 321, 5000] {
            let w = Waveform::new((0..len).map(|i| ((i as f64) * 0.1).sin() * 0.3).collect(), 16000);
            let out = anonymize_utterance(&w, 0.7, &default_cfg()).unwrap();
            assert_eq!(out.len(), len, "len {len}");
        }
    }

    #[test]
    fn corpus_keying_speaker_vs_utterance() {
        let dir = tempfile::tempdir().unwrap();
        let audio_dir = dir.path().join("in");
        std::fs::create_dir_all(&audio_dir).unwrap();
        let w = synthetic_vowel(0.2, 110.0, 16000);
        let mut records = Vec::new();
        for i in 0..3 {
            let path = audio_dir.join(format!("utt{i}.wav"));
            write_wav(&w, &path).unwrap();
            records.push(ManifestRecord {
                utt_id: format!("utt{i}"),
                speaker_id: "spkA".into(),
                gender: Gender::F,
                subset_role: SubsetRole::Trial,
                dataset_tag: "dev".into(),
                audio_path: path,
            });
        }
        let manifest = Manifest { records };
        let cfg = default_cfg();

        let rep = anonymize_corpus(&manifest, AnonLevel::SpeakerLevel, &cfg, &dir.path().join("spk")).unwrap();
        assert!(rep.failures.is_empty());
        let alphas: Vec<f64> = rep.assignments.iter().map(|a| a.alpha).collect();
        assert_eq!(alphas[0], alphas[1]);
        assert_eq!(alphas[1], alphas[2]);

        let rep = anonymize_corpus(&manifest, AnonLevel::UtteranceLevel, &cfg, &dir.path().join("utt")).unwrap();
        let alphas: Vec<f64> = rep.assignments.iter().map(|a| a.alpha).collect();
        assert_ne!(alphas[0], alphas[1]);
        assert_ne!(alphas[1], alphas[2]);
    }

    #[test]
    fn enrollment_and_trial_get_distinct_pseudo_speakers() {
        let cfg = default_cfg();
        let k_enroll = alpha_key("u1", "spkA", SubsetRole::Enrollment, AnonLevel::SpeakerLevel);
        let k_trial = alpha_key("u2", "spkA", SubsetRole::Trial, AnonLevel::SpeakerLevel);
        assert_ne!(k_enroll, k_trial);
        assert_ne!(sample_alpha(&k_enroll, &cfg), sample_alpha(&k_trial, &cfg));
    }

    #[test]
    fn missing_audio_is_recorded_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = Manifest {
            records: vec![ManifestRecord {
                utt_id: "gone".into(),
                speaker_id: "s".into(),
                gender: Gender::Unknown,
                subset_role: SubsetRole::Trial,
                dataset_tag: "dev".into(),
                audio_path: dir.path().join("missing.wav"),
            }],
        };
        let rep = anonymize_corpus(&manifest, AnonLevel::UtteranceLevel, &default_cfg(), dir.path()).unwrap();
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].0, "gone");
        assert_eq!(rep.assignments.len(), 1);
    }
}
