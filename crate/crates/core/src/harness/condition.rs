//! Evaluation-condition assignment and WER-based system ranking.
//!
//! Systems qualify for conditions by their weighted EER: the intervals are
//! [15, 20), [20, 25), [25, 30), and [30, 100), numbered 1 through 4. A
//! system is placed in the highest condition whose minimum it meets, and
//! within a condition systems are ranked by ascending average WER.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Minimum weighted EER (percent) for conditions 1..4.
pub const CONDITION_THRESHOLDS: [f64; 4] = [15.0, 20.0, 25.0, 30.0];

/// The condition a system competes in, or `None` when the pitch-correlation
/// gate failed or the weighted EER is below every minimum.
pub fn assign_condition(weighted_eer: f64, rho_pass: bool) -> Option<u8> {
    if !rho_pass {
        return None;
    }
    CONDITION_THRESHOLDS
        .iter()
        .rposition(|&min| weighted_eer >= min)
        .map(|i| (i + 1) as u8)
}

/// One system's headline numbers, as fed to the ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemEntry {
    pub system_id: String,
    pub weighted_eer: f64,
    pub avg_wer: f64,
    pub condition: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSystem {
    pub rank: usize,
    pub system_id: String,
    pub weighted_eer: f64,
    pub avg_wer: f64,
}

/// Per-condition rankings plus the systems that qualified for none.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionTable {
    /// Index 0 is condition 1, ..., index 3 is condition 4.
    pub conditions: [Vec<RankedSystem>; 4],
    pub unranked: Vec<String>,
}

impl ConditionTable {
    /// CSV rows: `system_id,weighted_eer,avg_wer,condition,rank,q1,q2,q3,q4`
    /// where `qN` flags whether the system's EER also meets condition N's
    /// minimum (so readers preferring "competes in every qualified condition"
    /// can reconstruct that view).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(
            out,
            "system_id,weighted_eer,avg_wer,condition,rank,q1,q2,q3,q4"
        )
        .map_err(|e| Error::io(path, e))?;
        for (ci, ranked) in self.conditions.iter().enumerate() {
            for r in ranked {
                let flags: Vec<String> = CONDITION_THRESHOLDS
                    .iter()
                    .map(|&min| u8::from(r.weighted_eer >= min).to_string())
                    .collect();
                writeln!(
                    out,
                    "{},{:.4},{:.4},{},{},{}",
                    r.system_id,
                    r.weighted_eer,
                    r.avg_wer,
                    ci + 1,
                    r.rank,
                    flags.join(",")
                )
                .map_err(|e| Error::io(path, e))?;
            }
        }
        for id in &self.unranked {
            writeln!(out, "{id},,,,,,,,").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Rank systems within each condition by ascending average WER, ties broken
/// by system id.
pub fn rank_systems(entries: &[SystemEntry]) -> ConditionTable {
    let mut table = ConditionTable::default();
    for e in entries {
        match e.condition {
            Some(c @ 1..=4) => table.conditions[(c - 1) as usize].push(RankedSystem {
                rank: 0,
                system_id: e.system_id.clone(),
                weighted_eer: e.weighted_eer,
                avg_wer: e.avg_wer,
            }),
            _ => table.unranked.push(e.system_id.clone()),
        }
    }
    for ranked in &mut table.conditions {
        ranked.sort_by(|a, b| {
            a.avg_wer
                .partial_cmp(&b.avg_wer)
                .unwrap()
                .then_with(|| a.system_id.cmp(&b.system_id))
        });
        for (i, r) in ranked.iter_mut().enumerate() {
            r.rank = i + 1;
        }
    }
    table.unranked.sort();
    table
}
