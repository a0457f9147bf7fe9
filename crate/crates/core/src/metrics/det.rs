//! DET curve and equal error rate from LLR scores.
//!
//! The decision rule is accept iff score >= threshold. When the step
//! functions P_fa and P_miss have no exact crossing, the EER is the midpoint
//! (P_fa + P_miss) / 2 at the first point (scanning thresholds in ascending
//! order) that minimizes |P_fa - P_miss|.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::trials::{ScoreSet, TrialLabel, TrialList};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub p_fa: f64,
    pub p_miss: f64,
}

/// Miss/false-alarm rates sampled at every distinct score plus sentinels
/// beyond both extremes; thresholds strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub points: Vec<DetPoint>,
}

impl DetCurve {
    /// CSV export: `threshold,p_fa,p_miss` with a header line.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(out, "threshold,p_fa,p_miss").map_err(|e| Error::io(path, e))?;
        for p in &self.points {
            writeln!(out, "{:.6},{:.6},{:.6}", p.threshold, p.p_fa, p.p_miss)
                .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Build the DET curve for a scored trial list.
pub fn compute_det(scores: &ScoreSet, trials: &TrialList) -> Result<DetCurve> {
    let mut targets = Vec::new();
    let mut nontargets = Vec::new();
    for (enroll, trial, label) in &trials.entries {
        let s = scores
            .get(enroll, trial)
            .ok_or_else(|| Error::Data(format!("missing score for trial ({enroll}, {trial})")))?;
        match label {
            TrialLabel::Target => targets.push(s),
            TrialLabel::Nontarget => nontargets.push(s),
        }
    }
    if targets.is_empty() || nontargets.is_empty() {
        return Err(Error::Data(
            "EER needs at least one target and one nontarget trial".into(),
        ));
    }

    let mut thresholds: Vec<f64> = targets.iter().chain(&nontargets).copied().collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    // Sentinels outside the score range: everything accepted / rejected.
    let lo = thresholds[0] - 1.0;
    let hi = thresholds[thresholds.len() - 1] + 1.0;
    thresholds.insert(0, lo);
    thresholds.push(hi);

    let nt = targets.len() as f64;
    let nn = nontargets.len() as f64;
    let points = thresholds
        .iter()
        .map(|&theta| {
            let p_miss = targets.iter().filter(|&&s| s < theta).count() as f64 / nt;
            let p_fa = nontargets.iter().filter(|&&s| s >= theta).count() as f64 / nn;
            DetPoint {
                threshold: theta,
                p_fa,
                p_miss,
            }
        })
        .collect();
    Ok(DetCurve { points })
}

/// Equal error rate in [0, 1] from a DET curve.
pub fn compute_eer(det: &DetCurve) -> f64 {
    let mut best_gap = f64::INFINITY;
    let mut eer = 0.5;
    for p in &det.points {
        let gap = (p.p_fa - p.p_miss).abs();
        if gap < best_gap {
            best_gap = gap;
            eer = 0.5 * (p.p_fa + p.p_miss);
        }
    }
    eer
}

#[cfg(test)]
mod tests {
    use super::*;

    fn make(targets: &[f64], nontargets: &[f64]) -> (ScoreSet, TrialList) {
        let mut scores = ScoreSet::default();
        let mut trials = TrialList::default();
        for (i, &s) in targets.iter().enumerate() {
            let (e, t) = (format!("e{i}"), format!("tt{i}"));
            scores.scores.insert((e.clone(), t.clone()), s);
            trials.entries.push((e, t, TrialLabel::Target));
        }
        for (i, &s) in nontargets.iter().enumerate() {
            let (e, t) = (format!("e{i}"), format!("nt{i}"));
            scores.scores.insert((e.clone(), t.clone()), s);
            trials.entries.push((e, t, TrialLabel::Nontarget));
        }
        (scores, trials)
    }

    #[test]
    fn perfect_separation_has_zero_eer() {
        let (s, t) = make(&[1.0, 2.0], &[-1.0, -2.0]);
        let det = compute_det(&s, &t).unwrap();
        assert!(det
            .points
            .iter()
            .any(|p| p.p_fa == 0.0 && p.p_miss == 0.0));
        assert_eq!(compute_eer(&det), 0.0);
    }

    #[test]
    fn identical_distributions_give_half() {
        let (s, t) = make(&[0.0], &[0.0]);
        let det = compute_det(&s, &t).unwrap();
        assert_eq!(compute_eer(&det), 0.5);
    }

    #[test]
    fn hand_swept_three_by_three() {
        let (s, t) = make(&[0.9, 0.8, 0.7], &[0.1, 0.2, 0.75]);
        let det = compute_det(&s, &t).unwrap();
        let at = det
            .points
            .iter()
            .find(|p| p.threshold == 0.75)
            .expect("threshold 0.75 sampled");
        assert!((at.p_miss - 1.0 / 3.0).abs() < 1e-12);
        assert!((at.p_fa - 1.0 / 3.0).abs() < 1e-12);
        assert!((compute_eer(&det) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn curve_is_monotone() {
        let (s, t) = make(&[0.3, 0.5, 1.2, -0.4], &[0.1, -0.9, 0.6, 0.2]);
        let det = compute_det(&s, &t).unwrap();
        for w in det.points.windows(2) {
            assert!(w[0].threshold < w[1].threshold);
            assert!(w[0].p_fa >= w[1].p_fa);
            assert!(w[0].p_miss <= w[1].p_miss);
        }
    }

    #[test]
    fn missing_score_names_the_pair() {
        let (mut s, t) = make(&[1.0], &[-1.0]);
        s.scores.remove(&("e0".to_string(), "tt0".to_string()));
        let err = compute_det(&s, &t).unwrap_err();
        assert!(err.to_string().contains("e0"));
        assert!(err.to_string().contains("tt0"));
    }

    #[test]
    fn eer_invariant_under_monotone_transform() {
        let targets = [0.9, 0.8, 0.7, 0.55, 0.2];
        let nontargets = [0.1, 0.3, 0.75, 0.5, -0.2, 0.4];
        let (s1, t1) = make(&targets, &nontargets);
        let f = |x: f64| (3.0 * x).exp() + 0.5 * x; // strictly increasing
        let mapped_t: Vec<f64> = targets.iter().map(|&x| f(x)).collect();
        let mapped_n: Vec<f64> = nontargets.iter().map(|&x| f(x)).collect();
        let (s2, t2) = make(&mapped_t, &mapped_n);
        let e1 = compute_eer(&compute_det(&s1, &t1).unwrap());
        let e2 = compute_eer(&compute_det(&s2, &t2).unwrap());
        assert!((e1 - e2).abs() < 1e-12);
    }
}
