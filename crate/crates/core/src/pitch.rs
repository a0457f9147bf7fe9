//! Pitch tracking and the pitch-correlation utility metric.
//!
//! The estimator is a normalized-autocorrelation tracker standing in for an
//! external pYAAPT pipeline; tracks computed elsewhere can be ingested from
//! file with [`read_track_file`]. The correlation contract (linear
//! interpolation of the shorter track, integer-lag search, jointly-voiced
//! masking, per-dataset averaging, strict > 0.3 gate) is what matters.

use std::collections::BTreeMap;
use std::path::Path;

use crate::audio::Waveform;
use crate::error::{Error, Result};

/// Frames below this RMS are never marked voiced.
const NOISE_FLOOR_RMS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    /// Per-frame F0 in Hz; 0 encodes unvoiced.
    pub f0_hz: Vec<f64>,
    pub voiced: Vec<bool>,
    pub hop_seconds: f64,
}

impl PitchTrack {
    pub fn len(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0_hz.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PitchConfig {
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub frame_seconds: f64,
    pub hop_seconds: f64,
    pub voicing_threshold: f64,
    pub max_lag_frames: usize,
}

impl Default for PitchConfig {
    fn default() -> Self {
        PitchConfig {
            f0_min_hz: 60.0,
            f0_max_hz: 400.0,
            frame_seconds: 0.025,
            hop_seconds: 0.010,
            voicing_threshold: 0.45,
            max_lag_frames: 10,
        }
    }
}

/// Normalized-autocorrelation pitch estimate, uninterpolated (unvoiced
/// frames carry F0 = 0).
pub fn estimate_pitch(w: &Waveform, cfg: &PitchConfig) -> Result<PitchTrack> {
    let sr = w.sample_rate_hz as f64;
    if sr < 2.0 * cfg.f0_max_hz {
        return Err(Error::InvalidArgument(format!(
            "sample rate {sr} too low for f0_max {}",
            cfg.f0_max_hz
        )));
    }
    let frame_len = (cfg.frame_seconds * sr).round() as usize;
    let hop = ((cfg.hop_seconds * sr).round() as usize).max(1);
    if w.len() < frame_len {
        return Ok(PitchTrack {
            f0_hz: vec![],
            voiced: vec![],
            hop_seconds: cfg.hop_seconds,
        });
    }
    let lag_min = (sr / cfg.f0_max_hz).ceil() as usize;
    let lag_max = ((sr / cfg.f0_min_hz).floor() as usize).min(frame_len.saturating_sub(2));

    let n_frames = (w.len() - frame_len) / hop + 1;
    let mut f0_hz = Vec::with_capacity(n_frames);
    let mut voiced = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let frame = &w.samples[k * hop..k * hop + frame_len];
        let (f0, v) = analyze_frame(frame, sr, lag_min, lag_max, cfg);
        f0_hz.push(f0);
        voiced.push(v);
    }
    Ok(PitchTrack {
        f0_hz,
        voiced,
        hop_seconds: cfg.hop_seconds,
    })
}

fn analyze_frame(
    frame: &[f64],
    sr: f64,
    lag_min: usize,
    lag_max: usize,
    cfg: &PitchConfig,
) -> (f64, bool) {
    let energy: f64 = frame.iter().map(|x| x * x).sum();
    let rms = (energy / frame.len() as f64).sqrt();
    if rms < NOISE_FLOOR_RMS || lag_min > lag_max {
        return (0.0, false);
    }
    // Prefix sums of x^2 for the normalization terms.
    let mut sq_prefix = vec![0.0f64; frame.len() + 1];
    for (i, &x) in frame.iter().enumerate() {
        sq_prefix[i + 1] = sq_prefix[i] + x * x;
    }
    let corr = |lag: usize| -> f64 {
        let n = frame.len() - lag;
        let num: f64 = (0..n).map(|i| frame[i] * frame[i + lag]).sum();
        let e0 = sq_prefix[n];
        let e1 = sq_prefix[frame.len()] - sq_prefix[lag];
        if e0 <= 0.0 || e1 <= 0.0 {
            0.0
        } else {
            num / (e0 * e1).sqrt()
        }
    };
    let mut best_lag = lag_min;
    let mut best_val = f64::NEG_INFINITY;
    let values: Vec<f64> = (lag_min..=lag_max).map(corr).collect();
    for (i, &v) in values.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best_lag = lag_min + i;
        }
    }
    if best_val < cfg.voicing_threshold {
        return (0.0, false);
    }
    // Parabolic refinement around the peak.
    let mut lag = best_lag as f64;
    let i = best_lag - lag_min;
    if i > 0 && i + 1 < values.len() {
        let (ym, y0, yp) = (values[i - 1], values[i], values[i + 1]);
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() > 1e-12 {
            let delta = 0.5 * (ym - yp) / denom;
            if delta.abs() < 1.0 {
                lag += delta;
            }
        }
    }
    let f0 = (sr / lag).clamp(cfg.f0_min_hz, cfg.f0_max_hz);
    (f0, true)
}

/// Linearly stretch a track to `target_len` frames. A resampled frame is
/// voiced only when both bracketing source frames are voiced.
pub fn interpolate_track(track: &PitchTrack, target_len: usize) -> Result<PitchTrack> {
    if target_len == track.len() {
        return Ok(track.clone());
    }
    if track.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot stretch a track of {} frames",
            track.len()
        )));
    }
    if target_len < track.len() {
        return Err(Error::InvalidArgument(
            "target length must not be below the track length".into(),
        ));
    }
    let src_len = track.len();
    let mut f0_hz = Vec::with_capacity(target_len);
    let mut voiced = Vec::with_capacity(target_len);
    for t in 0..target_len {
        let pos = t as f64 * (src_len - 1) as f64 / (target_len - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        let v = track.voiced[lo] && track.voiced[hi];
        let f0 = if v {
            track.f0_hz[lo] * (1.0 - frac) + track.f0_hz[hi] * frac
        } else {
            0.0
        };
        voiced.push(v);
        f0_hz.push(f0);
    }
    Ok(PitchTrack {
        f0_hz,
        voiced,
        hop_seconds: track.hop_seconds * (src_len as f64 - 1.0) / (target_len as f64 - 1.0),
    })
}

/// A lag-maximized Pearson correlation between two tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchCorrelation {
    pub rho: f64,
    /// Integer frame lag at which the maximum was attained.
    pub lag: i64,
}

/// Lag-maximized Pearson correlation over jointly voiced frames, after the
/// shorter track is interpolated to the longer length. `None` when no lag
/// yields at least two jointly voiced frames with non-constant values.
pub fn pitch_correlation(
    orig: &PitchTrack,
    anon: &PitchTrack,
    cfg: &PitchConfig,
) -> Result<Option<PitchCorrelation>> {
    if orig.is_empty() || anon.is_empty() {
        return Err(Error::InvalidArgument("empty pitch track".into()));
    }
    let target = orig.len().max(anon.len());
    let a = interpolate_track(orig, target)?;
    let b = interpolate_track(anon, target)?;

    let max_lag = cfg.max_lag_frames as i64;
    let mut best: Option<PitchCorrelation> = None;
    for lag in -max_lag..=max_lag {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..target as i64 {
            let j = i + lag;
            if j < 0 || j >= target as i64 {
                continue;
            }
            let (i, j) = (i as usize, j as usize);
            if a.voiced[i] && b.voiced[j] {
                xs.push(a.f0_hz[i]);
                ys.push(b.f0_hz[j]);
            }
        }
        if let Some(rho) = pearson(&xs, &ys) {
            if best.is_none_or(|b| rho > b.rho) {
                best = Some(PitchCorrelation { rho, lag });
            }
        }
    }
    Ok(best)
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None; // constant sequence
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Dataset-level pitch correlation: mean over defined per-pair values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRho {
    pub rho: f64,
    pub defined_pairs: usize,
    pub undefined_pairs: usize,
}

/// Average correlation over waveform pairs; undefined pairs are excluded
/// from the mean and counted.
pub fn dataset_rho(pairs: &[(Waveform, Waveform)], cfg: &PitchConfig) -> Result<DatasetRho> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no utterance pairs".into()));
    }
    let mut tracks = Vec::with_capacity(pairs.len());
    for (orig, anon) in pairs {
        tracks.push((estimate_pitch(orig, cfg)?, estimate_pitch(anon, cfg)?));
    }
    dataset_rho_from_tracks(&tracks, cfg)
}

/// Same as [`dataset_rho`] but over precomputed tracks.
pub fn dataset_rho_from_tracks(
    pairs: &[(PitchTrack, PitchTrack)],
    cfg: &PitchConfig,
) -> Result<DatasetRho> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no track pairs".into()));
    }
    let mut sum = 0.0;
    let mut defined = 0usize;
    let mut undefined = 0usize;
    for (orig, anon) in pairs {
        let degenerate = orig.is_empty()
            || anon.is_empty()
            || (orig.len() != anon.len() && orig.len().min(anon.len()) < 2);
        let corr = if degenerate {
            None
        } else {
            pitch_correlation(orig, anon, cfg)?
        };
        match corr {
            Some(c) => {
                sum += c.rho;
                defined += 1;
            }
            None => undefined += 1,
        }
    }
    if defined == 0 {
        return Err(Error::MetricUndefined(
            "pitch correlation undefined for every pair in the dataset".into(),
        ));
    }
    Ok(DatasetRho {
        rho: sum / defined as f64,
        defined_pairs: defined,
        undefined_pairs: undefined,
    })
}

/// The validity gate: a dataset passes only with rho strictly above 0.3.
pub const RHO_GATE_THRESHOLD: f64 = 0.3;

pub fn rho_gate(rho_by_dataset: &BTreeMap<String, f64>) -> BTreeMap<String, bool> {
    rho_by_dataset
        .iter()
        .map(|(k, &v)| (k.clone(), v > RHO_GATE_THRESHOLD))
        .collect()
}

/// Parse `utt_id<TAB>hop_seconds<TAB>f0_1 f0_2 ...` lines; 0 means unvoiced.
pub fn read_track_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, PitchTrack>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tracks = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (id, hop, values) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(Error::parse(
                    path.display().to_string(),
                    lineno + 1,
                    "expected utt_id<TAB>hop_seconds<TAB>values",
                ))
            }
        };
        let hop_seconds: f64 = hop.parse().map_err(|_| {
            Error::parse(path.display().to_string(), lineno + 1, format!("bad hop {hop:?}"))
        })?;
        let f0_hz: Vec<f64> = values
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::parse(path.display().to_string(), lineno + 1, format!("bad f0 {t:?}"))
                })
            })
            .collect::<Result<_>>()?;
        let voiced = f0_hz.iter().map(|&f| f > 0.0).collect();
        tracks.insert(
            id.to_string(),
            PitchTrack {
                f0_hz,
                voiced,
                hop_seconds,
            },
        );
    }
    Ok(tracks)
}
