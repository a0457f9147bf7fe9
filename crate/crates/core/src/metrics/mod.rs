//! Objective privacy and utility metrics: EER/DET from verification scores,
//! WER from transcripts, voice-similarity matrices and the gain of voice
//! distinctiveness, plus the challenge's weighted aggregations.

mod agg;
mod det;
mod trials;
mod vd;
mod wer;

pub use agg::{avg_wer, dataset_weights, gender_subset_weights, weighted_avg_eer, WeightProfile};
pub use det::{compute_det, compute_eer, DetCurve, DetPoint};
pub use trials::{read_transcripts, ScoreSet, TrialLabel, TrialList};
pub use vd::{diag_dominance, gain_vd, segments_by_speaker, similarity_matrix, SimilarityMatrix};
pub use wer::{compute_wer, corpus_wer, WerBreakdown, WordSequence};
