//! Weighted and unweighted metric aggregation across datasets and subsets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A named set of aggregation weights keyed by dataset or subset tag.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub name: String,
    pub weights: BTreeMap<String, f64>,
}

impl WeightProfile {
    pub fn new(name: impl Into<String>, weights: BTreeMap<String, f64>) -> Self {
        WeightProfile {
            name: name.into(),
            weights,
        }
    }
}

/// Default per-gender EER weights over the six evaluation subsets: the two
/// LibriSpeech genders at 0.25 each, the two VCTK "different" genders at 0.20,
/// and the two VCTK "common" genders at 0.05.
pub fn gender_subset_weights() -> WeightProfile {
    let weights = [
        ("libri_f", 0.25),
        ("libri_m", 0.25),
        ("vctk_dif_f", 0.20),
        ("vctk_dif_m", 0.20),
        ("vctk_com_f", 0.05),
        ("vctk_com_m", 0.05),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    WeightProfile::new("gender-subset", weights)
}

/// Default dataset-level EER weights: LibriSpeech 0.5, VCTK-common 0.1,
/// VCTK-different 0.4.
pub fn dataset_weights() -> WeightProfile {
    let weights = [("libri", 0.5), ("vctk_com", 0.1), ("vctk_dif", 0.4)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    WeightProfile::new("dataset", weights)
}

/// Weighted average of per-dataset values; weights must cover exactly the
/// same keys and sum to 1.
pub fn weighted_avg_eer(
    eers: &BTreeMap<String, f64>,
    weights: &BTreeMap<String, f64>,
) -> Result<f64> {
    if eers.is_empty() {
        return Err(Error::Config("no values to aggregate".into()));
    }
    let eer_keys: Vec<&String> = eers.keys().collect();
    let weight_keys: Vec<&String> = weights.keys().collect();
    if eer_keys != weight_keys {
        return Err(Error::Config(format!(
            "weight keys {weight_keys:?} do not match value keys {eer_keys:?}"
        )));
    }
    let sum: f64 = weights.values().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Config(format!("weights sum to {sum}, expected 1")));
    }
    Ok(eers.iter().map(|(k, v)| v * weights[k]).sum())
}

/// Unweighted mean over datasets.
pub fn avg_wer(wers: &BTreeMap<String, f64>) -> Result<f64> {
    if wers.is_empty() {
        return Err(Error::Config("no values to average".into()));
    }
    Ok(wers.values().sum::<f64>() / wers.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn default_profiles_sum_to_one() {
        for profile in [gender_subset_weights(), dataset_weights()] {
            let sum: f64 = profile.weights.values().sum();
            assert!((sum - 1.0).abs() < 1e-12, "{}: {sum}", profile.name);
        }
    }

    #[test]
    fn six_subset_weighted_average() {
        let weights = gender_subset_weights().weights;
        let eers = map(&[
            ("libri_f", 7.12),
            ("libri_m", 1.11),
            ("vctk_dif_f", 16.92),
            ("vctk_dif_m", 7.69),
            ("vctk_com_f", 10.98),
            ("vctk_com_m", 4.80),
        ]);
        let avg = weighted_avg_eer(&eers, &weights).unwrap();
        assert!((avg - 7.77).abs() <= 0.005);
    }

    #[test]
    fn all_equal_values_average_to_themselves() {
        let weights = dataset_weights().weights;
        let eers = map(&[("libri", 12.5), ("vctk_com", 12.5), ("vctk_dif", 12.5)]);
        assert!((weighted_avg_eer(&eers, &weights).unwrap() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn key_mismatch_is_config_error() {
        let weights = map(&[("a", 0.5), ("b", 0.5)]);
        let eers = map(&[("a", 1.0), ("c", 2.0)]);
        assert!(weighted_avg_eer(&eers, &weights).is_err());
    }

    #[test]
    fn bad_weight_sum_is_config_error() {
        let weights = map(&[("a", 0.5), ("b", 0.6)]);
        let eers = map(&[("a", 1.0), ("b", 2.0)]);
        assert!(weighted_avg_eer(&eers, &weights).is_err());
    }

    #[test]
    fn avg_wer_is_unweighted_mean() {
        let wers = map(&[("libri", 4.34), ("vctk", 11.54)]);
        assert!((avg_wer(&wers).unwrap() - 7.94).abs() <= 0.005);
        assert!(avg_wer(&BTreeMap::new()).is_err());
    }
}
