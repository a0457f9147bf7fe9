//! Evaluation orchestration: read a declarative config, compute every metric
//! whose inputs are present, and emit a summary plus machine-readable CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::{
    avg_wer, compute_det, compute_eer, corpus_wer, dataset_weights, gain_vd,
    gender_subset_weights, read_transcripts, segments_by_speaker, similarity_matrix,
    weighted_avg_eer, ScoreSet, TrialList, WordSequence,
};
use crate::pitch::{dataset_rho_from_tracks, read_track_file, PitchConfig, RHO_GATE_THRESHOLD};

use super::condition::assign_condition;

/// Input files for one dataset; any subset may be present. A metric is
/// computed iff all of its inputs are configured.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetInputs {
    /// Trial list (`enroll trial target|nontarget`) for EER.
    pub trials: Option<PathBuf>,
    /// LLR scores (`enroll trial llr`) for EER.
    pub scores: Option<PathBuf>,
    /// Reference transcripts (`utt w1 w2 ...`) for WER.
    pub ref_transcripts: Option<PathBuf>,
    /// Hypothesis transcripts for WER.
    pub hyp_transcripts: Option<PathBuf>,
    /// Pitch tracks of the original audio for the pitch correlation.
    pub pitch_original: Option<PathBuf>,
    /// Pitch tracks of the anonymized audio.
    pub pitch_anonymized: Option<PathBuf>,
    /// Segment-level LLRs (`spk:seg spk:seg llr`) on original audio.
    pub segment_scores_original: Option<PathBuf>,
    /// Segment-level LLRs on anonymized audio.
    pub segment_scores_anonymized: Option<PathBuf>,
}

/// Declarative evaluation config, loaded from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Named EER weight profile: "dataset" or "gender-subset". Ignored when
    /// `weights` is given explicitly.
    pub weight_profile: Option<String>,
    /// Explicit EER weights keyed by dataset tag; must sum to 1.
    pub weights: Option<BTreeMap<String, f64>>,
    pub datasets: BTreeMap<String, DatasetInputs>,
}

impl EvalConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: EvalConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.datasets.is_empty() {
            return Err(Error::Config("config lists no datasets".into()));
        }
        Ok(cfg)
    }

    /// EER aggregation weights: explicit table, named profile, or equal
    /// weights over the configured datasets when neither is given.
    pub fn eer_weights(&self) -> Result<BTreeMap<String, f64>> {
        if let Some(w) = &self.weights {
            return Ok(w.clone());
        }
        match self.weight_profile.as_deref() {
            Some("dataset") => Ok(dataset_weights().weights),
            Some("gender-subset") => Ok(gender_subset_weights().weights),
            Some(other) => Err(Error::Config(format!(
                "unknown weight profile {other:?} (expected \"dataset\" or \"gender-subset\")"
            ))),
            None => {
                let n = self.datasets.len() as f64;
                Ok(self
                    .datasets
                    .keys()
                    .map(|k| (k.clone(), 1.0 / n))
                    .collect())
            }
        }
    }
}

/// Metrics for one dataset; `None` means the inputs were not configured.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetMetrics {
    /// EER in percent.
    pub eer: Option<f64>,
    /// WER in percent.
    pub wer: Option<f64>,
    pub rho_f0: Option<f64>,
    /// Gain of voice distinctiveness in dB.
    pub g_vd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmissionReport {
    pub per_dataset: BTreeMap<String, DatasetMetrics>,
    /// Weighted EER in percent; requires an EER for every dataset.
    pub weighted_eer: Option<f64>,
    /// Unweighted mean WER in percent over datasets with a WER.
    pub avg_wer: Option<f64>,
    /// True iff every dataset has a pitch correlation and all exceed the gate.
    pub rho_pass: bool,
    pub condition: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineStatus {
    /// Every metric was computed for every dataset.
    Full,
    /// At least one metric was skipped for missing inputs.
    Partial,
}

fn eval_eer(inputs: &DatasetInputs) -> Result<Option<f64>> {
    let (Some(trials), Some(scores)) = (&inputs.trials, &inputs.scores) else {
        return Ok(None);
    };
    let trials = TrialList::from_file(trials)?;
    let scores = ScoreSet::from_file(scores)?;
    let det = compute_det(&scores, &trials)?;
    Ok(Some(100.0 * compute_eer(&det)))
}

fn eval_wer(inputs: &DatasetInputs) -> Result<Option<f64>> {
    let (Some(ref_path), Some(hyp_path)) = (&inputs.ref_transcripts, &inputs.hyp_transcripts)
    else {
        return Ok(None);
    };
    let refs = read_transcripts(ref_path)?;
    let hyps = read_transcripts(hyp_path)?;
    // An utterance absent from the hypothesis file counts as fully deleted.
    let pairs: Vec<(WordSequence, WordSequence)> = refs
        .iter()
        .map(|(utt, text)| {
            let hyp = hyps.get(utt).map(String::as_str).unwrap_or("");
            (WordSequence::from_text(text), WordSequence::from_text(hyp))
        })
        .collect();
    Ok(Some(100.0 * corpus_wer(&pairs)?.wer))
}

fn eval_rho(inputs: &DatasetInputs) -> Result<Option<f64>> {
    let (Some(orig_path), Some(anon_path)) = (&inputs.pitch_original, &inputs.pitch_anonymized)
    else {
        return Ok(None);
    };
    let orig = read_track_file(orig_path)?;
    let anon = read_track_file(anon_path)?;
    let mut pairs = Vec::new();
    for (utt, o) in &orig {
        let a = anon.get(utt).ok_or_else(|| {
            Error::Data(format!("no anonymized pitch track for utterance {utt}"))
        })?;
        pairs.push((o.clone(), a.clone()));
    }
    let cfg = PitchConfig::default();
    Ok(Some(dataset_rho_from_tracks(&pairs, &cfg)?.rho))
}

fn eval_gvd(inputs: &DatasetInputs) -> Result<Option<f64>> {
    let (Some(orig_path), Some(anon_path)) = (
        &inputs.segment_scores_original,
        &inputs.segment_scores_anonymized,
    ) else {
        return Ok(None);
    };
    let orig_scores = ScoreSet::from_file(orig_path)?;
    let anon_scores = ScoreSet::from_file(anon_path)?;
    let orig_segs = segments_by_speaker(&orig_scores);
    let anon_segs = segments_by_speaker(&anon_scores);
    let speakers: Vec<String> = orig_segs.keys().cloned().collect();
    let m_orig = similarity_matrix(&orig_scores, &speakers, &orig_segs)?;
    let m_anon = similarity_matrix(&anon_scores, &speakers, &anon_segs)?;
    Ok(Some(gain_vd(&m_orig, &m_anon)?))
}

/// Compute all configured metrics and aggregate them into a report.
pub fn evaluate(config: &EvalConfig) -> Result<(SubmissionReport, PipelineStatus)> {
    let mut per_dataset = BTreeMap::new();
    let mut status = PipelineStatus::Full;
    for (tag, inputs) in &config.datasets {
        let metrics = DatasetMetrics {
            eer: eval_eer(inputs).map_err(|e| dataset_err(tag, "eer", e))?,
            wer: eval_wer(inputs).map_err(|e| dataset_err(tag, "wer", e))?,
            rho_f0: eval_rho(inputs).map_err(|e| dataset_err(tag, "rho_f0", e))?,
            g_vd: eval_gvd(inputs).map_err(|e| dataset_err(tag, "g_vd", e))?,
        };
        if [metrics.eer, metrics.wer, metrics.rho_f0, metrics.g_vd]
            .iter()
            .any(Option::is_none)
        {
            status = PipelineStatus::Partial;
        }
        per_dataset.insert(tag.clone(), metrics);
    }

    let eers: BTreeMap<String, f64> = per_dataset
        .iter()
        .filter_map(|(k, m)| m.eer.map(|e| (k.clone(), e)))
        .collect();
    let weighted_eer = if eers.len() == per_dataset.len() {
        Some(weighted_avg_eer(&eers, &config.eer_weights()?)?)
    } else {
        None
    };

    let wers: BTreeMap<String, f64> = per_dataset
        .iter()
        .filter_map(|(k, m)| m.wer.map(|w| (k.clone(), w)))
        .collect();
    let avg = if wers.is_empty() {
        None
    } else {
        Some(avg_wer(&wers)?)
    };

    let rhos: Vec<f64> = per_dataset.values().filter_map(|m| m.rho_f0).collect();
    let rho_pass = rhos.len() == per_dataset.len()
        && rhos.iter().all(|&r| r > RHO_GATE_THRESHOLD);

    let condition = weighted_eer.and_then(|e| assign_condition(e, rho_pass));
    let report = SubmissionReport {
        per_dataset,
        weighted_eer,
        avg_wer: avg,
        rho_pass,
        condition,
    };
    Ok((report, status))
}

fn dataset_err(tag: &str, metric: &str, e: Error) -> Error {
    Error::Data(format!("dataset {tag}, metric {metric}: {e}"))
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.4}"),
        None => "missing".to_string(),
    }
}

/// Human-readable per-dataset table mirroring the report layout.
pub fn results_summary(report: &SubmissionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<20} {:>10} {:>10} {:>10} {:>10}\n",
        "dataset", "EER%", "WER%", "rho_F0", "G_VD_dB"
    ));
    for (tag, m) in &report.per_dataset {
        out.push_str(&format!(
            "{:<20} {:>10} {:>10} {:>10} {:>10}\n",
            tag,
            fmt_opt(m.eer),
            fmt_opt(m.wer),
            fmt_opt(m.rho_f0),
            fmt_opt(m.g_vd)
        ));
    }
    out.push('\n');
    out.push_str(&format!("weighted EER%: {}\n", fmt_opt(report.weighted_eer)));
    out.push_str(&format!("average WER%:  {}\n", fmt_opt(report.avg_wer)));
    out.push_str(&format!(
        "pitch gate:    {}\n",
        if report.rho_pass { "pass" } else { "fail" }
    ));
    out.push_str(&format!(
        "condition:     {}\n",
        report
            .condition
            .map(|c| c.to_string())
            .unwrap_or_else(|| "none".to_string())
    ));
    out
}

/// Machine-readable CSV; byte-identical across reruns on identical inputs.
pub fn results_csv(report: &SubmissionReport) -> String {
    let mut out = String::from("dataset,eer_pct,wer_pct,rho_f0,g_vd_db\n");
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for (tag, m) in &report.per_dataset {
        out.push_str(&format!(
            "{tag},{},{},{},{}\n",
            cell(m.eer),
            cell(m.wer),
            cell(m.rho_f0),
            cell(m.g_vd)
        ));
    }
    out.push_str(&format!(
        "__summary__,{},{},{},{}\n",
        cell(report.weighted_eer),
        cell(report.avg_wer),
        u8::from(report.rho_pass),
        report
            .condition
            .map(|c| c.to_string())
            .unwrap_or_default()
    ));
    out
}

/// Run the evaluation and write `results_summary.txt` and `results.csv` into
/// `out_dir`.
pub fn run_pipeline(
    config: &EvalConfig,
    out_dir: impl AsRef<Path>,
) -> Result<(SubmissionReport, PipelineStatus)> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (report, status) = evaluate(config)?;
    let summary_path = out_dir.join("results_summary.txt");
    let mut f = std::fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    f.write_all(results_summary(&report).as_bytes())
        .map_err(|e| Error::io(&summary_path, e))?;
    let csv_path = out_dir.join("results.csv");
    let mut f = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    f.write_all(results_csv(&report).as_bytes())
        .map_err(|e| Error::io(&csv_path, e))?;
    Ok((report, status))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, content).unwrap();
        p
    }

    /// Full inputs for one dataset with easy hand-checked metrics.
    fn full_inputs(dir: &Path) -> DatasetInputs {
        DatasetInputs {
            trials: Some(write(
                dir,
                "trials.txt",
                "e1 t1 target\ne1 t2 nontarget\ne2 t3 target\ne2 t4 nontarget\n",
            )),
            scores: Some(write(
                dir,
                "scores.txt",
                "e1 t1 2.0\ne1 t2 -2.0\ne2 t3 1.5\ne2 t4 -1.0\n",
            )),
            ref_transcripts: Some(write(dir, "ref.txt", "u1 the cat sat\nu2 hello world\n")),
            hyp_transcripts: Some(write(dir, "hyp.txt", "u1 the cat sat\nu2 hello word\n")),
            pitch_original: Some(write(
                dir,
                "pitch_o.txt",
                "u1\t0.010\t120 121 122 123 124 125 126 127\n",
            )),
            pitch_anonymized: Some(write(
                dir,
                "pitch_a.txt",
                "u1\t0.010\t121 122 123 124 125 126 127 128\n",
            )),
            segment_scores_original: Some(write(
                dir,
                "seg_o.txt",
                &segment_scores(4.0, -4.0),
            )),
            segment_scores_anonymized: Some(write(
                dir,
                "seg_a.txt",
                &segment_scores(2.0, -2.0),
            )),
        }
    }

    fn segment_scores(same: f64, cross: f64) -> String {
        let mut out = String::new();
        for a in ["x:1", "x:2", "y:1", "y:2"] {
            for b in ["x:1", "x:2", "y:1", "y:2"] {
                let llr = if a.as_bytes()[0] == b.as_bytes()[0] {
                    same
                } else {
                    cross
                };
                out.push_str(&format!("{a} {b} {llr}\n"));
            }
        }
        out
    }

    fn config_with(inputs: DatasetInputs) -> EvalConfig {
        EvalConfig {
            weight_profile: None,
            weights: None,
            datasets: [("dev".to_string(), inputs)].into(),
        }
    }

    #[test]
    fn full_inputs_give_all_four_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let (report, status) = evaluate(&config_with(full_inputs(dir.path()))).unwrap();
        assert_eq!(status, PipelineStatus::Full);
        let m = &report.per_dataset["dev"];
        assert_eq!(m.eer, Some(0.0)); // perfectly separated scores
        assert!((m.wer.unwrap() - 20.0).abs() < 1e-9); // 1 error / 5 ref words
        assert!(m.rho_f0.unwrap() > 0.9); // shifted copy of a ramp
        assert!(m.g_vd.unwrap() < 0.0); // dominance shrank
        assert!(report.rho_pass);
        assert_eq!(report.weighted_eer, Some(0.0));
        assert_eq!(report.condition, None); // EER below every minimum
    }

    #[test]
    fn missing_transcripts_mark_wer_missing() {
        let dir = tempfile::tempdir().unwrap();
        let mut inputs = full_inputs(dir.path());
        inputs.ref_transcripts = None;
        inputs.hyp_transcripts = None;
        let (report, status) = evaluate(&config_with(inputs)).unwrap();
        assert_eq!(status, PipelineStatus::Partial);
        let m = &report.per_dataset["dev"];
        assert_eq!(m.wer, None);
        assert!(m.eer.is_some() && m.rho_f0.is_some() && m.g_vd.is_some());
        assert_eq!(report.avg_wer, None);
        let summary = results_summary(&report);
        assert!(summary.contains("missing"));
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_with(full_inputs(dir.path()));
        let out1 = dir.path().join("run1");
        let out2 = dir.path().join("run2");
        run_pipeline(&cfg, &out1).unwrap();
        run_pipeline(&cfg, &out2).unwrap();
        for name in ["results_summary.txt", "results.csv"] {
            let a = std::fs::read(out1.join(name)).unwrap();
            let b = std::fs::read(out2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }

    #[test]
    fn explicit_weights_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config_with(full_inputs(dir.path()));
        cfg.weights = Some([("dev".to_string(), 0.7)].into());
        assert!(evaluate(&cfg).is_err());
        cfg.weights = Some([("dev".to_string(), 1.0)].into());
        assert!(evaluate(&cfg).is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "eval.toml",
            "weight_profile = \"dataset\"\n\n\
             [datasets.libri]\ntrials = \"t.txt\"\nscores = \"s.txt\"\n\n\
             [datasets.vctk_com]\n\n[datasets.vctk_dif]\n",
        );
        let cfg = EvalConfig::from_file(&path).unwrap();
        assert_eq!(cfg.datasets.len(), 3);
        let w = cfg.eer_weights().unwrap();
        assert_eq!(w["libri"], 0.5);
        assert!(EvalConfig::from_file(dir.path().join("nope.toml")).is_err());
    }

    #[test]
    fn unknown_profile_is_config_error() {
        let cfg = EvalConfig {
            weight_profile: Some("bogus".into()),
            weights: None,
            datasets: [("d".to_string(), DatasetInputs::default())].into(),
        };
        assert!(cfg.eer_weights().is_err());
    }
}
