//! Voice similarity matrices and the gain of voice distinctiveness.
//!
//! Each matrix cell M(i,j) is the logistic of the mean LLR over all segment
//! pairs of speakers i and j. On the diagonal a segment is never compared
//! with itself, so speaker i contributes n_i(n_i - 1) terms there. The gain
//! of voice distinctiveness compares the diagonal dominance of the matrices
//! built from original and anonymized audio, in decibels.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

use super::trials::ScoreSet;

/// Square matrix of sigmoid-compressed mean LLRs between speakers.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub speaker_ids: Vec<String>,
    /// Row-major N x N values, each strictly inside (0, 1).
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.speaker_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Group segment ids by speaker from `speaker:segment` score keys, sorted for
/// deterministic iteration.
pub fn segments_by_speaker(scores: &ScoreSet) -> BTreeMap<String, Vec<String>> {
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (enroll, trial) in scores.scores.keys() {
        for id in [enroll, trial] {
            if let Some((spk, seg)) = id.split_once(':') {
                sets.entry(spk.to_string())
                    .or_default()
                    .insert(seg.to_string());
            }
        }
    }
    sets.into_iter()
        .map(|(spk, segs)| (spk, segs.into_iter().collect()))
        .collect()
}

fn lookup(scores: &ScoreSet, a: &str, b: &str) -> Option<f64> {
    // Segment-to-segment comparisons are symmetric; accept either key order.
    scores.get(a, b).or_else(|| scores.get(b, a))
}

/// Build the similarity matrix from per-segment LLR scores keyed by
/// `speaker:segment` identifiers.
pub fn similarity_matrix(
    scores: &ScoreSet,
    speakers: &[String],
    segments: &BTreeMap<String, Vec<String>>,
) -> Result<SimilarityMatrix> {
    let n = speakers.len();
    let mut values = vec![vec![0.0; n]; n];
    for (i, spk_i) in speakers.iter().enumerate() {
        let segs_i = segments
            .get(spk_i)
            .ok_or_else(|| Error::Data(format!("no segments for speaker {spk_i}")))?;
        for (j, spk_j) in speakers.iter().enumerate() {
            let segs_j = segments
                .get(spk_j)
                .ok_or_else(|| Error::Data(format!("no segments for speaker {spk_j}")))?;
            if i == j && segs_i.len() < 2 {
                return Err(Error::Data(format!(
                    "speaker {spk_i} has fewer than 2 segments; diagonal mean undefined"
                )));
            }
            let mut sum = 0.0;
            let mut count = 0usize;
            for (k, seg_k) in segs_i.iter().enumerate() {
                for (l, seg_l) in segs_j.iter().enumerate() {
                    if i == j && k == l {
                        continue;
                    }
                    let a = format!("{spk_i}:{seg_k}");
                    let b = format!("{spk_j}:{seg_l}");
                    let llr = lookup(scores, &a, &b).ok_or_else(|| {
                        Error::Data(format!("missing segment score for ({a}, {b})"))
                    })?;
                    sum += llr;
                    count += 1;
                }
            }
            values[i][j] = logistic(sum / count as f64);
        }
    }
    Ok(SimilarityMatrix {
        speaker_ids: speakers.to_vec(),
        values,
    })
}

/// Diagonal dominance: |mean(diagonal) - mean(off-diagonal)|.
pub fn diag_dominance(m: &SimilarityMatrix) -> Result<f64> {
    let n = m.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "diagonal dominance needs at least 2 speakers".into(),
        ));
    }
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                diag += m.get(i, j);
            } else {
                off += m.get(i, j);
            }
        }
    }
    diag /= n as f64;
    off /= (n * (n - 1)) as f64;
    Ok((diag - off).abs())
}

/// Gain of voice distinctiveness in dB:
/// 10 log10(D_diag(anonymized) / D_diag(original)).
pub fn gain_vd(m_orig: &SimilarityMatrix, m_anon: &SimilarityMatrix) -> Result<f64> {
    let d_orig = diag_dominance(m_orig)?;
    let d_anon = diag_dominance(m_anon)?;
    if d_orig == 0.0 || d_anon == 0.0 {
        return Err(Error::MetricUndefined(
            "gain of voice distinctiveness undefined: zero diagonal dominance".into(),
        ));
    }
    Ok(10.0 * (d_anon / d_orig).log10())
}
