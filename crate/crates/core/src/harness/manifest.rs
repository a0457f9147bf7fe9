//! Corpus manifests: one record per utterance, tab-separated.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    F,
    M,
    Unknown,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
            Gender::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetRole {
    Enrollment,
    Trial,
}

impl SubsetRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubsetRole::Enrollment => "enrollment",
            SubsetRole::Trial => "trial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub utt_id: String,
    pub speaker_id: String,
    pub gender: Gender,
    pub subset_role: SubsetRole,
    pub dataset_tag: String,
    pub audio_path: PathBuf,
}

/// Validated utterance list for one corpus. Audio paths are not checked for
/// existence at load time; a missing file surfaces when the utterance is
/// processed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    /// Load a 6-column TSV:
    /// `utt_id<TAB>speaker_id<TAB>gender<TAB>subset_role<TAB>dataset_tag<TAB>audio_path`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut records = Vec::new();
        let mut seen_ids = HashSet::new();
        let mut seen_paths = HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(Error::parse(
                    source,
                    lineno + 1,
                    format!("expected 6 tab-separated columns, got {}", cols.len()),
                ));
            }
            let gender = match cols[2] {
                "F" => Gender::F,
                "M" => Gender::M,
                "unknown" => Gender::Unknown,
                other => {
                    return Err(Error::parse(
                        source,
                        lineno + 1,
                        format!("unknown gender {other:?} (expected F, M, or unknown)"),
                    ))
                }
            };
            let subset_role = match cols[3] {
                "enrollment" => SubsetRole::Enrollment,
                "trial" => SubsetRole::Trial,
                other => {
                    return Err(Error::parse(
                        source,
                        lineno + 1,
                        format!("unknown subset role {other:?} (expected enrollment or trial)"),
                    ))
                }
            };
            if !seen_ids.insert(cols[0].to_string()) {
                return Err(Error::parse(
                    source,
                    lineno + 1,
                    format!("duplicate utterance id {:?}", cols[0]),
                ));
            }
            if !seen_paths.insert(cols[5].to_string()) {
                return Err(Error::parse(
                    source,
                    lineno + 1,
                    format!("duplicate audio path {:?}", cols[5]),
                ));
            }
            records.push(ManifestRecord {
                utt_id: cols[0].to_string(),
                speaker_id: cols[1].to_string(),
                gender,
                subset_role,
                dataset_tag: cols[4].to_string(),
                audio_path: PathBuf::from(cols[5]),
            });
        }
        Ok(Manifest { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "utt1\tspk1\tF\ttrial\tdev\t/audio/utt1.wav\n\
                          utt2\tspk2\tM\tenrollment\tdev\t/audio/utt2.wav\n";

    #[test]
    fn parses_two_records() {
        let m = Manifest::parse(SAMPLE, "mem").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.records[0].gender, Gender::F);
        assert_eq!(m.records[1].subset_role, SubsetRole::Enrollment);
        assert_eq!(m.records[1].audio_path, PathBuf::from("/audio/utt2.wav"));
    }

    #[test]
    fn duplicate_utt_id_names_the_id() {
        let text = "u1\ts\tF\ttrial\td\t/a.wav\nu1\ts\tF\ttrial\td\t/b.wav\n";
        let err = Manifest::parse(text, "mem").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("u1"), "{msg}");
        assert!(msg.contains("mem:2"), "{msg}");
    }

    #[test]
    fn duplicate_path_is_rejected() {
        let text = "u1\ts\tF\ttrial\td\t/a.wav\nu2\ts\tF\ttrial\td\t/a.wav\n";
        assert!(Manifest::parse(text, "mem").is_err());
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let err = Manifest::parse("u1\ts\tF\ttrial\td\n", "mem").unwrap_err();
        assert!(err.to_string().contains("mem:1"));
    }

    #[test]
    fn bad_gender_and_role_rejected() {
        assert!(Manifest::parse("u\ts\tX\ttrial\td\t/a.wav\n", "mem").is_err());
        assert!(Manifest::parse("u\ts\tF\ttest\td\t/a.wav\n", "mem").is_err());
    }

    #[test]
    fn missing_audio_file_is_accepted_at_load() {
        let m = Manifest::parse("u\ts\tF\ttrial\td\t/does/not/exist.wav\n", "mem").unwrap();
        assert_eq!(m.len(), 1);
    }
}
