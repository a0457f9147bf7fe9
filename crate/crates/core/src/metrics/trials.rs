//! Speaker-verification trial lists, LLR score sets, and transcript files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialLabel {
    Target,
    Nontarget,
}

/// Trial definitions: (enrollment id, trial id, same-speaker label).
#[derive(Debug, Clone, Default)]
pub struct TrialList {
    pub entries: Vec<(String, String, TrialLabel)>,
}

impl TrialList {
    /// Parse whitespace-separated `enroll_id trial_id target|nontarget` lines.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (e, t, l) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c), None) => (a, b, c),
                _ => {
                    return Err(Error::parse(
                        source,
                        lineno + 1,
                        "expected enroll_id trial_id target|nontarget",
                    ))
                }
            };
            let label = match l {
                "target" => TrialLabel::Target,
                "nontarget" => TrialLabel::Nontarget,
                other => {
                    return Err(Error::parse(
                        source,
                        lineno + 1,
                        format!("unknown label {other:?}"),
                    ))
                }
            };
            if !seen.insert((e.to_string(), t.to_string())) {
                return Err(Error::parse(
                    source,
                    lineno + 1,
                    format!("duplicate trial ({e}, {t})"),
                ));
            }
            entries.push((e.to_string(), t.to_string(), label));
        }
        Ok(TrialList { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// LLR scores keyed by (enrollment id, trial id).
#[derive(Debug, Clone, Default)]
pub struct ScoreSet {
    pub scores: HashMap<(String, String), f64>,
}

impl ScoreSet {
    /// Parse Kaldi-style `enroll_id trial_id llr` lines.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut scores = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (e, t, v) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c), None) => (a, b, c),
                _ => {
                    return Err(Error::parse(source, lineno + 1, "expected enroll_id trial_id llr"))
                }
            };
            let llr: f64 = v
                .parse()
                .map_err(|_| Error::parse(source, lineno + 1, format!("bad score {v:?}")))?;
            if !llr.is_finite() {
                return Err(Error::parse(source, lineno + 1, "non-finite score"));
            }
            scores.insert((e.to_string(), t.to_string()), llr);
        }
        Ok(ScoreSet { scores })
    }

    pub fn get(&self, enroll: &str, trial: &str) -> Option<f64> {
        self.scores
            .get(&(enroll.to_string(), trial.to_string()))
            .copied()
    }
}

/// Parse `utt_id word1 word2 ...` transcript lines into id -> text.
pub fn read_transcripts(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, char::is_whitespace);
        let id = parts.next().unwrap();
        if id.is_empty() {
            return Err(Error::parse(
                path.display().to_string(),
                lineno + 1,
                "missing utterance id",
            ));
        }
        let words = parts.next().unwrap_or("").trim().to_string();
        out.insert(id.to_string(), words);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_trials() {
        let t = TrialList::parse("e1 t1 target\ne1 t2 nontarget\n", "mem").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.entries[0].2, TrialLabel::Target);
    }

    #[test]
    fn rejects_duplicate_pairs() {
        let err = TrialList::parse("e1 t1 target\ne1 t1 nontarget\n", "mem").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn rejects_bad_label() {
        assert!(TrialList::parse("e1 t1 maybe\n", "mem").is_err());
    }

    #[test]
    fn parses_scores() {
        let s = ScoreSet::parse("e1 t1 1.5\ne2 t2 -0.25\n", "mem").unwrap();
        assert_eq!(s.get("e1", "t1"), Some(1.5));
        assert_eq!(s.get("e2", "t2"), Some(-0.25));
        assert_eq!(s.get("e1", "t2"), None);
    }

    #[test]
    fn rejects_non_finite_score() {
        assert!(ScoreSet::parse("e1 t1 nan\n", "mem").is_err());
        assert!(ScoreSet::parse("e1 t1 inf\n", "mem").is_err());
    }

    #[test]
    fn transcripts_split_on_first_whitespace() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.txt");
        std::fs::write(&path, "utt1 the cat sat\nutt2 hello\n").unwrap();
        let map = read_transcripts(&path).unwrap();
        assert_eq!(map["utt1"], "the cat sat");
        assert_eq!(map["utt2"], "hello");
    }
}
