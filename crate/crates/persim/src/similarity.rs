//! Genuine/impostor similarity scoring and ROC analysis.
//!
//! For every ordered cross-session pair (subject `i` session 1 vs subject
//! `j` session 2) the cosine distance over the selected feature subset is
//! computed; `i == j` pairs are genuine (N scores), the rest impostors
//! (N(N-1) scores). Distances are scaled to `[0, 1]` and reflected into
//! similarities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureDataset;
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::stats;

/// How raw cosine distances are mapped onto `[0, 1]` before reflection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    /// Divide by the pooled observed maximum; the floor is cosine
    /// distance's analytic minimum of 0. This is the rule that reproduces
    /// the reference band-sweep tables, so it is the default.
    #[default]
    #[serde(rename = "empirical-max")]
    EmpiricalMax,
    /// Min-max over the pooled genuine+impostor distances of the run.
    #[serde(rename = "empirical-minmax")]
    EmpiricalMinMax,
    /// Divide by 2, the analytic range of cosine distance.
    #[serde(rename = "analytic-halfrange")]
    AnalyticHalfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRecord {
    pub observed_min_distance: f64,
    pub observed_max_distance: f64,
    pub mode: ScalingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityScores {
    /// One score per subject (self vs self across sessions).
    pub genuine: Vec<f64>,
    /// `N * (N - 1)` ordered cross-subject scores.
    pub impostor: Vec<f64>,
    pub scaling: ScalingRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub median: f64,
    pub iqr: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocResult {
    /// Ascending distinct pooled score values.
    pub thresholds: Vec<f64>,
    /// Fraction of impostor scores at or above each threshold.
    pub far: Vec<f64>,
    /// Fraction of genuine scores below each threshold.
    pub frr: Vec<f64>,
    pub eer: f64,
    pub eer_threshold: f64,
}

/// `1 - u.v / (|u| |v|)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "cosine distance needs equal nonzero lengths, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector("cosine distance operand".into()));
    }
    Ok(1.0 - dot / (nu.sqrt() * nv.sqrt()))
}

/// Scores all cross-session pairs over `feature_subset` with the default
/// scaling mode.
pub fn score_pairs(
    dataset: &FeatureDataset,
    feature_subset: &[String],
) -> Result<SimilarityScores> {
    score_pairs_with(dataset, feature_subset, ScalingMode::default())
}

pub fn score_pairs_with(
    dataset: &FeatureDataset,
    feature_subset: &[String],
    mode: ScalingMode,
) -> Result<SimilarityScores> {
    if feature_subset.is_empty() {
        return Err(Error::Domain("feature subset is empty".into()));
    }
    let n = dataset.n_subjects();
    if n < 2 {
        return Err(Error::InsufficientSubjects {
            required: 2,
            actual: n,
        });
    }
    let idx: Vec<usize> = feature_subset
        .iter()
        .map(|name| {
            dataset
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))
        })
        .collect::<Result<_>>()?;
    let k = idx.len();

    // Gather per-subject vectors row-major and normalize to unit length.
    let gather = |session: usize| -> Result<Vec<f64>> {
        let mut rows = vec![0.0; n * k];
        for (c, &j) in idx.iter().enumerate() {
            let col = dataset.session_slice(j, session);
            for i in 0..n {
                rows[i * k + c] = col[i];
            }
        }
        for i in 0..n {
            let row = &mut rows[i * k..(i + 1) * k];
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::DegenerateVector(format!(
                    "subject {} session {}",
                    dataset.subject_ids()[i],
                    dataset.session_ids()[session]
                )));
            }
            row.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(rows)
    };
    let probe = gather(0)?;
    let gallery = gather(1)?;

    // Distance matrix, probe subject i by gallery subject j.
    let mut distances = vec![0.0; n * n];
    distances
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            let u = &probe[i * k..(i + 1) * k];
            for (j, out) in row.iter_mut().enumerate() {
                let v = &gallery[j * k..(j + 1) * k];
                let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                // rounding on unit vectors can stray a hair outside [0, 2]
                *out = (1.0 - dot).clamp(0.0, 2.0);
            }
        });

    let mut dmin = f64::INFINITY;
    let mut dmax = f64::NEG_INFINITY;
    for &d in &distances {
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let (offset, range) = match mode {
        ScalingMode::EmpiricalMax => {
            if dmax <= dmin || dmax <= 0.0 {
                return Err(Error::DegenerateScaling);
            }
            (0.0, dmax)
        }
        ScalingMode::EmpiricalMinMax => {
            if dmax <= dmin {
                return Err(Error::DegenerateScaling);
            }
            (dmin, dmax - dmin)
        }
        ScalingMode::AnalyticHalfRange => (0.0, 2.0),
    };

    let mut genuine = Vec::with_capacity(n);
    let mut impostor = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            let s = 1.0 - (distances[i * n + j] - offset) / range;
            if i == j {
                genuine.push(s);
            } else {
                impostor.push(s);
            }
        }
    }
    Ok(SimilarityScores {
        genuine,
        impostor,
        scaling: ScalingRecord {
            observed_min_distance: dmin,
            observed_max_distance: dmax,
            mode,
        },
    })
}

/// Median and interquartile range under the type-7 quantile rule.
pub fn distribution_summary(scores: &[f64]) -> Result<DistributionSummary> {
    if scores.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let sorted = stats::sort_ascending(scores);
    Ok(DistributionSummary {
        median: stats::median_sorted(&sorted),
        iqr: stats::iqr_sorted(&sorted),
        count: sorted.len(),
    })
}

/// ROC sweep over the pooled distinct score values.
///
/// `FAR(t)` counts impostor scores `>= t`; `FRR(t)` counts genuine scores
/// `< t`. The EER sits where the linear interpolants of FAR and FRR between
/// the two thresholds bracketing the sign change of `FAR - FRR` meet. If no
/// sign change occurs within the sweep (possible only with heavy ties), the
/// threshold minimizing `|FAR - FRR|` is used and the EER is the midpoint
/// of the two rates there.
pub fn roc_eer(scores: &SimilarityScores) -> Result<RocResult> {
    if scores.genuine.is_empty() || scores.impostor.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let genuine = stats::sort_ascending(&scores.genuine);
    let impostor = stats::sort_ascending(&scores.impostor);

    let mut thresholds = Vec::with_capacity(genuine.len() + impostor.len());
    thresholds.extend_from_slice(&genuine);
    thresholds.extend_from_slice(&impostor);
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();

    let n_gen = genuine.len() as f64;
    let n_imp = impostor.len() as f64;
    let far: Vec<f64> = thresholds
        .iter()
        .map(|&t| (impostor.len() - impostor.partition_point(|&x| x < t)) as f64 / n_imp)
        .collect();
    let frr: Vec<f64> = thresholds
        .iter()
        .map(|&t| genuine.partition_point(|&x| x < t) as f64 / n_gen)
        .collect();

    let (eer, eer_threshold) = locate_eer(&thresholds, &far, &frr);
    Ok(RocResult {
        thresholds,
        far,
        frr,
        eer,
        eer_threshold,
    })
}

/// Shared between the fast path and the brute-force oracle in tests: the
/// interpolation rule applied to precomputed FAR/FRR curves.
pub fn locate_eer(thresholds: &[f64], far: &[f64], frr: &[f64]) -> (f64, f64) {
    for i in 0..thresholds.len() {
        let d = far[i] - frr[i];
        if d == 0.0 {
            return (far[i], thresholds[i]);
        }
        if d < 0.0 {
            // first sign change; i >= 1 because FAR(t_min) = 1, FRR(t_min) = 0
            if i == 0 {
                return ((far[0] + frr[0]) / 2.0, thresholds[0]);
            }
            let d_prev = far[i - 1] - frr[i - 1];
            let u = d_prev / (d_prev - d);
            let eer = frr[i - 1] + u * (frr[i] - frr[i - 1]);
            let thr = thresholds[i - 1] + u * (thresholds[i] - thresholds[i - 1]);
            return (eer, thr);
        }
    }
    // FAR stayed above FRR throughout: take the closest point.
    let mut best = 0;
    for i in 1..thresholds.len() {
        if (far[i] - frr[i]).abs() < (far[best] - frr[best]).abs() {
            best = i;
        }
    }
    ((far[best] + frr[best]) / 2.0, thresholds[best])
}

/// `n_repeats` independent without-replacement samples of `subset_size`
/// names. Each sample is returned in dataset order; repeats may overlap.
pub fn subset_sample(
    feature_names: &[String],
    subset_size: usize,
    n_repeats: usize,
    seed: RngSeed,
) -> Result<Vec<Vec<String>>> {
    if subset_size == 0 {
        return Err(Error::Domain("subset_size must be at least 1".into()));
    }
    if subset_size > feature_names.len() {
        return Err(Error::Domain(format!(
            "subset_size {subset_size} exceeds the {} available features",
            feature_names.len()
        )));
    }
    if n_repeats == 0 {
        return Err(Error::Domain("n_repeats must be at least 1".into()));
    }
    Ok((0..n_repeats)
        .map(|r| {
            let mut rng = seed.child(r as u64).rng();
            let mut picked =
                rand::seq::index::sample(&mut rng, feature_names.len(), subset_size).into_vec();
            picked.sort_unstable();
            picked
                .into_iter()
                .map(|i| feature_names[i].clone())
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::generate_feature_set;
    use proptest::prelude::*;

    #[test]
    fn cosine_distance_trivials() {
        let u = [1.0, 2.0, 3.0];
        assert!(cosine_distance(&u, &u).unwrap().abs() < 1e-12);
        let a = [1.0, 0.0];
        let b = [0.0, 5.0];
        assert!((cosine_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let neg = [-1.0, -2.0, -3.0];
        assert!((cosine_distance(&u, &neg).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            cosine_distance(&[0.0, 0.0], &[1.0, 1.0]),
            Err(Error::DegenerateVector(_))
        ));
        assert!(matches!(
            cosine_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn score_counts() {
        let ds = generate_feature_set(3, 4, 0.5, RngSeed::new(1)).unwrap();
        let scores = score_pairs(&ds, ds.feature_names()).unwrap();
        assert_eq!(scores.genuine.len(), 3);
        assert_eq!(scores.impostor.len(), 6);
    }

    #[test]
    fn zero_noise_genuine_scores_are_one() {
        let ds = generate_feature_set(20, 5, 1.0, RngSeed::new(2)).unwrap();
        for mode in [ScalingMode::EmpiricalMax, ScalingMode::EmpiricalMinMax] {
            let scores = score_pairs_with(&ds, ds.feature_names(), mode).unwrap();
            for g in &scores.genuine {
                assert!((g - 1.0).abs() < 1e-12, "genuine {g} under {mode:?}");
            }
        }
    }

    #[test]
    fn minmax_attains_both_extremes() {
        let ds = generate_feature_set(30, 5, 0.5, RngSeed::new(3)).unwrap();
        let scores =
            score_pairs_with(&ds, ds.feature_names(), ScalingMode::EmpiricalMinMax).unwrap();
        let all: Vec<f64> = scores
            .genuine
            .iter()
            .chain(&scores.impostor)
            .copied()
            .collect();
        let max = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((max - 1.0).abs() < 1e-12);
        assert!(min.abs() < 1e-12);
        for s in all {
            assert!((-1e-12..=1.0 + 1e-12).contains(&s));
        }
    }

    #[test]
    fn unknown_feature_rejected() {
        let ds = generate_feature_set(5, 2, 0.5, RngSeed::new(4)).unwrap();
        let err = score_pairs(&ds, &["nope".to_string()]);
        assert!(matches!(err, Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn summary_trivials() {
        let s = distribution_summary(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.median, 3.0);
        assert_eq!(s.count, 5);
        let c = distribution_summary(&[7.0; 9]).unwrap();
        assert_eq!(c.median, 7.0);
        assert_eq!(c.iqr, 0.0);
        // frozen regression under the type-7 rule
        let q = distribution_summary(&[4.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(q.median, 2.5);
        assert_eq!(q.iqr, 1.5);
        assert!(matches!(
            distribution_summary(&[]),
            Err(Error::EmptyDistribution)
        ));
    }

    fn manual_scores(genuine: Vec<f64>, impostor: Vec<f64>) -> SimilarityScores {
        SimilarityScores {
            genuine,
            impostor,
            scaling: ScalingRecord {
                observed_min_distance: 0.0,
                observed_max_distance: 1.0,
                mode: ScalingMode::EmpiricalMax,
            },
        }
    }

    #[test]
    fn eer_perfect_separation() {
        let s = manual_scores(vec![0.9; 10], vec![0.1; 20]);
        let roc = roc_eer(&s).unwrap();
        assert_eq!(roc.eer, 0.0);
    }

    #[test]
    fn eer_identical_distributions() {
        // FAR - FRR hits zero exactly at the middle of a symmetric grid
        let vals: Vec<f64> = (0..50).map(|i| i as f64 / 50.0).collect();
        let s = manual_scores(vals.clone(), vals);
        let roc = roc_eer(&s).unwrap();
        assert!((roc.eer - 0.5).abs() < 1e-12, "eer {}", roc.eer);
    }

    #[test]
    fn all_equal_distances_are_degenerate() {
        // single feature, same sign within a session: every cross-session
        // cosine is -1, so every distance is exactly 2
        let (subs, sess) = FeatureDataset::default_ids(2);
        let ds =
            FeatureDataset::new(subs, sess, vec!["f".into()], vec![1.0, 2.0, -1.0, -3.0]).unwrap();
        for mode in [ScalingMode::EmpiricalMax, ScalingMode::EmpiricalMinMax] {
            assert!(matches!(
                score_pairs_with(&ds, ds.feature_names(), mode),
                Err(Error::DegenerateScaling)
            ));
        }
        // the analytic range still yields scores (all zero similarity)
        let scores =
            score_pairs_with(&ds, ds.feature_names(), ScalingMode::AnalyticHalfRange).unwrap();
        assert!(scores.genuine.iter().all(|&s| s.abs() < 1e-12));
    }

    #[test]
    fn roc_curves_monotone() {
        let ds = generate_feature_set(40, 8, 0.6, RngSeed::new(6)).unwrap();
        let scores = score_pairs(&ds, ds.feature_names()).unwrap();
        let roc = roc_eer(&scores).unwrap();
        for w in roc.far.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        for w in roc.frr.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
        assert!(roc.thresholds.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn subset_sample_shapes() {
        let names: Vec<String> = (0..50).map(|i| format!("f{i}")).collect();
        let subsets = subset_sample(&names, 20, 10, RngSeed::new(7)).unwrap();
        assert_eq!(subsets.len(), 10);
        for s in &subsets {
            assert_eq!(s.len(), 20);
            let mut dedup = s.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), 20, "features must be distinct");
        }
        // full-size subset equals the whole set
        let full = subset_sample(&names, 50, 3, RngSeed::new(8)).unwrap();
        for s in full {
            assert_eq!(s, names);
        }
        assert!(matches!(
            subset_sample(&names, 51, 1, RngSeed::new(9)),
            Err(Error::Domain(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scores_invariant_under_common_positive_scale(
            seed in 0u64..500,
            factor in 0.01f64..100.0,
        ) {
            let ds = generate_feature_set(12, 4, 0.5, RngSeed::new(seed)).unwrap();
            let scaled = ds.with_values(ds.values().iter().map(|x| x * factor).collect());
            let a = score_pairs(&ds, ds.feature_names()).unwrap();
            let b = score_pairs(&scaled, ds.feature_names()).unwrap();
            for (x, y) in a.genuine.iter().zip(&b.genuine) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            for (x, y) in a.impostor.iter().zip(&b.impostor) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn eer_invariant_under_monotone_transform(seed in 0u64..500) {
            let ds = generate_feature_set(15, 5, 0.4, RngSeed::new(seed)).unwrap();
            let scores = score_pairs(&ds, ds.feature_names()).unwrap();
            let transform = |x: f64| x * x * x; // strictly increasing on [0, 1]
            let mapped = SimilarityScores {
                genuine: scores.genuine.iter().map(|&x| transform(x)).collect(),
                impostor: scores.impostor.iter().map(|&x| transform(x)).collect(),
                scaling: scores.scaling,
            };
            let a = roc_eer(&scores).unwrap();
            let b = roc_eer(&mapped).unwrap();
            prop_assert!((a.eer - b.eer).abs() < 1e-12, "{} vs {}", a.eer, b.eer);
        }
    }
}
