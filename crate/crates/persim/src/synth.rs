//! Synthetic two-session features with a controllable target ICC.
//!
//! Each feature starts as standard-normal session-1 draws; session 2 is a
//! copy; independent noise with standard deviation
//! `sqrt((1 - target) / target)` is then added to every cell of both
//! sessions, and the feature is z-scored over the concatenated vector of
//! both sessions. The resulting feature has theoretical intraclass
//! correlation equal to the target, unit variance, and is independent of
//! every other feature up to simulation noise.
//!
//! Normal deviates come from `rand_distr::StandardNormal` (ziggurat
//! sampling). Reproducibility is per-build: identical seeds give identical
//! datasets, but no bit-exactness is promised across toolchains.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureDataset, SESSION_COUNT};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::stats;

/// Noise standard deviation that yields the requested theoretical ICC.
pub fn noise_sd(icc_target: f64) -> f64 {
    ((1.0 - icc_target) / icc_target).sqrt()
}

fn validate_icc_target(icc_target: f64) -> Result<()> {
    if !icc_target.is_finite() || icc_target <= 0.0 || icc_target > 1.0 {
        return Err(Error::Domain(format!(
            "icc_target must lie in (0, 1], got {icc_target}"
        )));
    }
    Ok(())
}

fn validate_n_subjects(n_subjects: usize) -> Result<()> {
    if n_subjects < 2 {
        return Err(Error::InsufficientSubjects {
            required: 2,
            actual: n_subjects,
        });
    }
    Ok(())
}

/// Generates `n_features` independent features, all at one target ICC.
///
/// Feature names are `Feat01`, `Feat02`, ... (width grows with the count).
pub fn generate_feature_set(
    n_subjects: usize,
    n_features: usize,
    icc_target: f64,
    seed: RngSeed,
) -> Result<FeatureDataset> {
    if n_features == 0 {
        return Err(Error::Domain("n_features must be at least 1".into()));
    }
    let width = n_features.to_string().len().max(2);
    let targets: Vec<(f64, String)> = (1..=n_features)
        .map(|j| (icc_target, format!("Feat{j:0width$}")))
        .collect();
    generate_named_features(n_subjects, &targets, seed)
}

/// Generates one feature per `(icc_target, name)` pair.
///
/// Features are drawn from independent RNG sub-streams keyed by position, so
/// the output is identical whether features are generated in parallel or
/// serially.
pub fn generate_named_features(
    n_subjects: usize,
    targets: &[(f64, String)],
    seed: RngSeed,
) -> Result<FeatureDataset> {
    validate_n_subjects(n_subjects)?;
    for (t, _) in targets {
        validate_icc_target(*t)?;
    }
    let col_len = n_subjects * SESSION_COUNT;
    let columns: Vec<Vec<f64>> = targets
        .par_iter()
        .enumerate()
        .map(|(j, (target, name))| {
            let column = generate_column(n_subjects, *target, seed.child(j as u64));
            zscore_column(column).ok_or_else(|| Error::DegenerateFeature(name.clone()))
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(col_len * targets.len());
    for col in columns {
        values.extend_from_slice(&col);
    }
    let (subject_ids, session_ids) = FeatureDataset::default_ids(n_subjects);
    let feature_names = targets.iter().map(|(_, name)| name.clone()).collect();
    FeatureDataset::new(subject_ids, session_ids, feature_names, values)
}

fn generate_column(n_subjects: usize, icc_target: f64, seed: RngSeed) -> Vec<f64> {
    let mut rng = seed.rng();
    let mut col = vec![0.0; n_subjects * SESSION_COUNT];
    for i in 0..n_subjects {
        let z: f64 = rng.sample(StandardNormal);
        col[i] = z;
        col[n_subjects + i] = z;
    }
    let sd = noise_sd(icc_target);
    if sd > 0.0 {
        for cell in col.iter_mut() {
            let w: f64 = rng.sample(StandardNormal);
            *cell += sd * w;
        }
    }
    col
}

/// Z-scores one concatenated column in place; `None` if it has zero variance.
fn zscore_column(mut col: Vec<f64>) -> Option<Vec<f64>> {
    let mean = stats::mean(&col);
    let sd = stats::population_sd(&col, mean);
    if sd == 0.0 {
        return None;
    }
    for x in col.iter_mut() {
        *x = (*x - mean) / sd;
    }
    Some(col)
}

/// One decile band of features: targets spread across `[low, low + 0.1)`.
///
/// Deserializes either from a bare band index (expanding to the default
/// sub-targets) or from a `{ band_index, sub_targets }` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSpec {
    pub band_index: usize,
    pub icc_low: f64,
    pub icc_high: f64,
    /// `(icc_target, count)` pairs; the band holds the targets in order.
    pub sub_targets: Vec<(f64, usize)>,
}

impl<'de> Deserialize<'de> for BandSpec {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Index(usize),
            Full {
                band_index: usize,
                sub_targets: Vec<(f64, usize)>,
            },
        }
        let spec = match Repr::deserialize(deserializer)? {
            Repr::Index(i) => BandSpec::decile(i),
            Repr::Full {
                band_index,
                sub_targets,
            } => BandSpec::with_sub_targets(band_index, sub_targets),
        };
        spec.map_err(serde::de::Error::custom)
    }
}

impl BandSpec {
    /// The paper's default band layout: 10 targets at `low + 0.005, 0.015,
    /// ..., 0.095`, 5 features each, 50 features total.
    pub fn decile(band_index: usize) -> Result<Self> {
        let sub_targets = (0..10)
            .map(|k| (band_index as f64 / 10.0 + 0.005 + 0.01 * k as f64, 5))
            .collect();
        Self::with_sub_targets(band_index, sub_targets)
    }

    pub fn with_sub_targets(band_index: usize, sub_targets: Vec<(f64, usize)>) -> Result<Self> {
        if band_index > 9 {
            return Err(Error::Domain(format!(
                "band_index must lie in 0..=9, got {band_index}"
            )));
        }
        if sub_targets.is_empty() || sub_targets.iter().all(|(_, c)| *c == 0) {
            return Err(Error::Domain("band has no features".into()));
        }
        for (t, _) in &sub_targets {
            validate_icc_target(*t)?;
        }
        let icc_low = band_index as f64 / 10.0;
        Ok(Self {
            band_index,
            icc_low,
            icc_high: icc_low + 0.1,
            sub_targets,
        })
    }

    pub fn n_features(&self) -> usize {
        self.sub_targets.iter().map(|(_, c)| c).sum()
    }

    /// Flattened per-feature targets in generation order.
    pub fn feature_targets(&self) -> Vec<f64> {
        self.sub_targets
            .iter()
            .flat_map(|&(t, c)| std::iter::repeat_n(t, c))
            .collect()
    }
}

/// Generates one band's dataset. Feature names record the target ICC,
/// e.g. `icc0.305_f07`.
pub fn generate_band(band: &BandSpec, n_subjects: usize, seed: RngSeed) -> Result<FeatureDataset> {
    let targets: Vec<(f64, String)> = band
        .feature_targets()
        .iter()
        .enumerate()
        .map(|(j, &t)| (t, format!("icc{t:.3}_f{:02}", j + 1)))
        .collect();
    generate_named_features(n_subjects, &targets, seed)
}

/// Z-scores every feature over its concatenated two-session column
/// (population standard deviation). Rank order within a feature is
/// preserved; a zero-variance feature is an error naming the feature.
pub fn zscore_normalize(dataset: &FeatureDataset) -> Result<FeatureDataset> {
    let mut values = Vec::with_capacity(dataset.values().len());
    for j in 0..dataset.n_features() {
        let col = zscore_column(dataset.feature_column(j).to_vec())
            .ok_or_else(|| Error::DegenerateFeature(dataset.feature_names()[j].clone()))?;
        values.extend_from_slice(&col);
    }
    Ok(dataset.with_values(values))
}
