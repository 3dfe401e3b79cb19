//! Experiment drivers: the band sweep, the ICC-histogram validation run,
//! the intercorrelation vs impostor-IQR study, and the raw-vs-whitened
//! decorrelation comparison.
//!
//! Bands, repeats, and iterations all draw from RNG sub-streams derived
//! from the config seed, so reports are deterministic and independent of
//! parallel scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureDataset;
use crate::decorrelate::{
    center_columns, correlation_matrix, dataset_to_matrix, induce_correlation, matrix_to_dataset,
    whiten, CorrelationMatrix,
};
use crate::error::{Error, Result};
use crate::icc::estimate_icc;
use crate::rng::RngSeed;
use crate::similarity::{
    distribution_summary, roc_eer, score_pairs_with, subset_sample, ScalingMode, SimilarityScores,
};
use crate::stats;
use crate::synth::{generate_band, generate_named_features, BandSpec};

/// Configuration of the band sweep (medians/IQRs/EERs per ICC band).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_subjects: usize,
    pub bands: Vec<BandSpec>,
    pub subset_size: usize,
    pub n_repeats: usize,
    pub seed: RngSeed,
    pub scaling_mode: ScalingMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_subjects: 1000,
            bands: (0..10).map(|b| BandSpec::decile(b).unwrap()).collect(),
            subset_size: 20,
            n_repeats: 10,
            seed: RngSeed::default(),
            scaling_mode: ScalingMode::default(),
        }
    }
}

/// `(median, min, max)` of one statistic across repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggTriple {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl AggTriple {
    fn over(values: &[f64]) -> Self {
        let sorted = stats::sort_ascending(values);
        Self {
            median: stats::median_sorted(&sorted),
            min: sorted[0],
            max: *sorted.last().unwrap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub band: usize,
    pub repeat: usize,
    pub genuine_median: f64,
    pub impostor_median: f64,
    pub genuine_iqr: f64,
    pub impostor_iqr: f64,
    pub eer_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandAggregate {
    pub band: usize,
    pub genuine_median: AggTriple,
    pub impostor_median: AggTriple,
    pub genuine_iqr: AggTriple,
    pub impostor_iqr: AggTriple,
    pub eer_percent: AggTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSweepReport {
    pub rows: Vec<SweepRow>,
    pub per_band: Vec<BandAggregate>,
}

fn evaluate_subset(
    dataset: &FeatureDataset,
    subset: &[String],
    mode: ScalingMode,
) -> Result<(f64, f64, f64, f64, f64)> {
    let scores = score_pairs_with(dataset, subset, mode)?;
    let genuine = distribution_summary(&scores.genuine)?;
    let impostor = distribution_summary(&scores.impostor)?;
    let roc = roc_eer(&scores)?;
    Ok((
        genuine.median,
        impostor.median,
        genuine.iqr,
        impostor.iqr,
        roc.eer * 100.0,
    ))
}

/// For each band: generate the dataset, score `n_repeats` random feature
/// subsets, and aggregate each statistic to `(median, min, max)`.
pub fn run_band_sweep(config: &SweepConfig) -> Result<BandSweepReport> {
    let mut rows = Vec::with_capacity(config.bands.len() * config.n_repeats);
    let mut per_band = Vec::with_capacity(config.bands.len());
    for (pos, band) in config.bands.iter().enumerate() {
        let band_seed = config.seed.child(pos as u64);
        let band_rows = (|| -> Result<Vec<SweepRow>> {
            let dataset = generate_band(band, config.n_subjects, band_seed.child(0))?;
            let subsets = subset_sample(
                dataset.feature_names(),
                config.subset_size,
                config.n_repeats,
                band_seed.child(1),
            )?;
            subsets
                .par_iter()
                .enumerate()
                .map(|(repeat, subset)| {
                    let (gm, im, gq, iq, eer) =
                        evaluate_subset(&dataset, subset, config.scaling_mode)
                            .map_err(|e| e.with_context(format!("repeat {repeat}")))?;
                    Ok(SweepRow {
                        band: band.band_index,
                        repeat,
                        genuine_median: gm,
                        impostor_median: im,
                        genuine_iqr: gq,
                        impostor_iqr: iq,
                        eer_percent: eer,
                    })
                })
                .collect()
        })()
        .map_err(|e| e.with_context(format!("band {}", band.band_index)))?;

        per_band.push(BandAggregate {
            band: band.band_index,
            genuine_median: AggTriple::over(
                &band_rows
                    .iter()
                    .map(|r| r.genuine_median)
                    .collect::<Vec<_>>(),
            ),
            impostor_median: AggTriple::over(
                &band_rows
                    .iter()
                    .map(|r| r.impostor_median)
                    .collect::<Vec<_>>(),
            ),
            genuine_iqr: AggTriple::over(
                &band_rows.iter().map(|r| r.genuine_iqr).collect::<Vec<_>>(),
            ),
            impostor_iqr: AggTriple::over(
                &band_rows.iter().map(|r| r.impostor_iqr).collect::<Vec<_>>(),
            ),
            eer_percent: AggTriple::over(
                &band_rows.iter().map(|r| r.eer_percent).collect::<Vec<_>>(),
            ),
        });
        rows.extend(band_rows);
    }
    Ok(BandSweepReport { rows, per_band })
}

/// Histogram of empirical ICCs plus inter-feature correlation summaries for
/// one generated feature set (the Fig.-1-style validation run).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IccHistogramReport {
    /// `bins + 1` edges spanning `[0, 1]`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub mean_icc: f64,
    pub min_icc: f64,
    pub max_icc: f64,
    pub median_abs_corr: f64,
    pub max_abs_corr: f64,
}

pub fn run_icc_histogram_experiment(
    n_subjects: usize,
    n_features: usize,
    icc_target: f64,
    bins: usize,
    seed: RngSeed,
) -> Result<IccHistogramReport> {
    if bins < 1 {
        return Err(Error::Domain("need at least one histogram bin".into()));
    }
    let dataset = crate::synth::generate_feature_set(n_subjects, n_features, icc_target, seed)?;
    let estimates = estimate_icc(&dataset)?;
    let iccs: Vec<f64> = estimates.iter().map(|e| e.icc).collect();

    let mut counts = vec![0usize; bins];
    for &icc in &iccs {
        let bin = ((icc * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let bin_edges = (0..=bins).map(|b| b as f64 / bins as f64).collect();

    let corr = correlation_matrix(&dataset_to_matrix(&dataset))?;
    Ok(IccHistogramReport {
        bin_edges,
        counts,
        mean_icc: stats::mean(&iccs),
        min_icc: iccs.iter().cloned().fold(f64::INFINITY, f64::min),
        max_icc: iccs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        median_abs_corr: corr.median_abs_offdiag,
        max_abs_corr: corr.max_abs_offdiag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrIqrRow {
    pub iteration: usize,
    pub median_abs_corr: f64,
    pub impostor_iqr: f64,
}

/// Per-iteration subset statistics plus the rank correlation between the
/// two columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrIqrStudyReport {
    pub rows: Vec<CorrIqrRow>,
    pub spearman_rho: f64,
}

/// For `n_iterations` random subsets of `subset_size` features: the median
/// absolute intercorrelation of the subset, paired with the impostor IQR of
/// the subset's verification scores.
pub fn run_corr_vs_impostor_iqr(
    dataset: &FeatureDataset,
    n_iterations: usize,
    subset_size: usize,
    seed: RngSeed,
) -> Result<CorrIqrStudyReport> {
    let subsets = subset_sample(dataset.feature_names(), subset_size, n_iterations, seed)?;
    let matrix = dataset_to_matrix(dataset);
    let rows: Vec<CorrIqrRow> = subsets
        .par_iter()
        .enumerate()
        .map(|(iteration, subset)| {
            let corr = correlation_matrix(&matrix.select(subset)?)?;
            let scores = score_pairs_with(dataset, subset, ScalingMode::default())?;
            let impostor = distribution_summary(&scores.impostor)?;
            Ok(CorrIqrRow {
                iteration,
                median_abs_corr: corr.median_abs_offdiag,
                impostor_iqr: impostor.iqr,
            })
        })
        .collect::<Result<_>>()?;
    let spearman_rho = spearman_of_rows(&rows);
    Ok(CorrIqrStudyReport { rows, spearman_rho })
}

fn spearman_of_rows(rows: &[CorrIqrRow]) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let a: Vec<f64> = rows.iter().map(|r| r.median_abs_corr).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.impostor_iqr).collect();
    stats::spearman(&a, &b)
}

/// Configuration of the pooled correlation study: one driver dataset per
/// induced exchangeable correlation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrStudyConfig {
    pub n_subjects: usize,
    pub n_features: usize,
    /// Per-feature ICC targets are spread evenly over this closed range.
    pub icc_min: f64,
    pub icc_max: f64,
    pub rho_targets: Vec<f64>,
    pub n_iterations: usize,
    pub subset_size: usize,
    pub seed: RngSeed,
}

impl Default for CorrStudyConfig {
    fn default() -> Self {
        Self {
            n_subjects: 500,
            n_features: 38,
            icc_min: 0.605,
            icc_max: 0.795,
            rho_targets: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            n_iterations: 100,
            subset_size: 10,
            seed: RngSeed::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrStudyRow {
    pub rho: f64,
    pub iteration: usize,
    pub median_abs_corr: f64,
    pub impostor_iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrStudyReport {
    pub rows: Vec<CorrStudyRow>,
    /// Rank correlation over all rows pooled across rho levels.
    pub spearman_rho: f64,
}

fn spread_targets(low: f64, high: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![(low + high) / 2.0];
    }
    (0..count)
        .map(|i| low + (high - low) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Builds one near-uncorrelated dataset per rho, passes it through the
/// forward Cholesky induction, and runs the subset study on each; the
/// reported Spearman rho pools every row.
pub fn run_corr_study(config: &CorrStudyConfig) -> Result<CorrStudyReport> {
    if config.icc_min > config.icc_max {
        return Err(Error::Config("icc_min must not exceed icc_max".into()));
    }
    let targets: Vec<(f64, String)> =
        spread_targets(config.icc_min, config.icc_max, config.n_features)
            .into_iter()
            .enumerate()
            .map(|(j, t)| (t, format!("icc{t:.3}_f{:02}", j + 1)))
            .collect();
    let mut rows = Vec::with_capacity(config.rho_targets.len() * config.n_iterations);
    for (pos, &rho) in config.rho_targets.iter().enumerate() {
        let level_seed = config.seed.child(pos as u64);
        let level = (|| -> Result<Vec<CorrStudyRow>> {
            let base = generate_named_features(config.n_subjects, &targets, level_seed.child(0))?;
            let dataset = induce_exchangeable(&base, rho)?;
            let report = run_corr_vs_impostor_iqr(
                &dataset,
                config.n_iterations,
                config.subset_size,
                level_seed.child(1),
            )?;
            Ok(report
                .rows
                .into_iter()
                .map(|r| CorrStudyRow {
                    rho,
                    iteration: r.iteration,
                    median_abs_corr: r.median_abs_corr,
                    impostor_iqr: r.impostor_iqr,
                })
                .collect())
        })()
        .map_err(|e| e.with_context(format!("rho {rho}")))?;
        rows.extend(level);
    }
    let a: Vec<f64> = rows.iter().map(|r| r.median_abs_corr).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.impostor_iqr).collect();
    let spearman_rho = if rows.len() >= 2 {
        stats::spearman(&a, &b)
    } else {
        0.0
    };
    Ok(CorrStudyReport { rows, spearman_rho })
}

fn induce_exchangeable(dataset: &FeatureDataset, rho: f64) -> Result<FeatureDataset> {
    if rho == 0.0 {
        return Ok(dataset.clone());
    }
    let matrix = dataset_to_matrix(dataset);
    let target = CorrelationMatrix::exchangeable(dataset.n_features(), rho);
    let induced = induce_correlation(&matrix, &target)?;
    matrix_to_dataset(
        &induced,
        dataset.subject_ids().to_vec(),
        dataset.session_ids().to_vec(),
    )
}

/// Configuration of the decorrelation comparison. The induced correlation
/// ramps linearly from `rho_lo` at the first band to `rho_hi` at the last,
/// emulating the real-data pattern of intercorrelation rising with ICC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecorrCompareConfig {
    pub n_subjects: usize,
    pub band_indices: Vec<usize>,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub subset_size: usize,
    pub n_repeats: usize,
    pub seed: RngSeed,
}

impl Default for DecorrCompareConfig {
    fn default() -> Self {
        Self {
            n_subjects: 1000,
            band_indices: (0..10).collect(),
            rho_lo: 0.05,
            rho_hi: 0.30,
            subset_size: 20,
            n_repeats: 10,
            seed: RngSeed::new(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreVariant {
    Raw,
    Whitened,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecorrRow {
    pub band: usize,
    pub repeat: usize,
    pub variant: ScoreVariant,
    pub genuine_median: f64,
    pub impostor_median: f64,
    pub genuine_iqr: f64,
    pub impostor_iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecorrBandAggregate {
    pub band: usize,
    pub raw_genuine_iqr: AggTriple,
    pub raw_impostor_iqr: AggTriple,
    pub whitened_genuine_iqr: AggTriple,
    pub whitened_impostor_iqr: AggTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecorrelationComparison {
    pub rows: Vec<DecorrRow>,
    pub per_band: Vec<DecorrBandAggregate>,
}

/// Generates the banded driver datasets with the per-band correlation ramp.
pub fn build_correlated_bands(
    config: &DecorrCompareConfig,
) -> Result<Vec<(usize, FeatureDataset)>> {
    let count = config.band_indices.len();
    config
        .band_indices
        .iter()
        .enumerate()
        .map(|(pos, &band_index)| {
            let rho = if count == 1 {
                config.rho_hi
            } else {
                config.rho_lo + (config.rho_hi - config.rho_lo) * pos as f64 / (count - 1) as f64
            };
            let band = BandSpec::decile(band_index)?;
            let dataset = generate_band(&band, config.n_subjects, config.seed.child(pos as u64))?;
            let induced = induce_exchangeable(&dataset, rho)
                .map_err(|e| e.with_context(format!("band {band_index}")))?;
            Ok((band_index, induced))
        })
        .collect()
}

/// Scores every band twice — raw, then whitened over the band's full
/// concatenated matrix — with identical feature subsets, and aggregates the
/// IQR curves.
pub fn run_decorrelation_comparison(
    banded: &[(usize, FeatureDataset)],
    subset_size: usize,
    n_repeats: usize,
    seed: RngSeed,
) -> Result<DecorrelationComparison> {
    let mut rows = Vec::new();
    let mut per_band = Vec::new();
    for &(band, ref dataset) in banded {
        let band_seed = seed.child(band as u64);
        let band_result = (|| -> Result<Vec<DecorrRow>> {
            let whitened_matrix = whiten(&center_columns(&dataset_to_matrix(dataset)))?;
            let whitened = matrix_to_dataset(
                &whitened_matrix,
                dataset.subject_ids().to_vec(),
                dataset.session_ids().to_vec(),
            )?;
            let subsets = subset_sample(
                dataset.feature_names(),
                subset_size,
                n_repeats,
                band_seed.child(1),
            )?;
            let score = |ds: &FeatureDataset, variant: ScoreVariant| -> Result<Vec<DecorrRow>> {
                subsets
                    .par_iter()
                    .enumerate()
                    .map(|(repeat, subset)| {
                        let scores = score_pairs_with(ds, subset, ScalingMode::default())?;
                        let genuine = distribution_summary(&scores.genuine)?;
                        let impostor = distribution_summary(&scores.impostor)?;
                        Ok(DecorrRow {
                            band,
                            repeat,
                            variant,
                            genuine_median: genuine.median,
                            impostor_median: impostor.median,
                            genuine_iqr: genuine.iqr,
                            impostor_iqr: impostor.iqr,
                        })
                    })
                    .collect()
            };
            let mut out = score(dataset, ScoreVariant::Raw)?;
            out.extend(score(&whitened, ScoreVariant::Whitened)?);
            Ok(out)
        })()
        .map_err(|e| e.with_context(format!("band {band}")))?;

        let collect = |variant: ScoreVariant, f: fn(&DecorrRow) -> f64| -> Vec<f64> {
            band_result
                .iter()
                .filter(|r| r.variant == variant)
                .map(f)
                .collect()
        };
        per_band.push(DecorrBandAggregate {
            band,
            raw_genuine_iqr: AggTriple::over(&collect(ScoreVariant::Raw, |r| r.genuine_iqr)),
            raw_impostor_iqr: AggTriple::over(&collect(ScoreVariant::Raw, |r| r.impostor_iqr)),
            whitened_genuine_iqr: AggTriple::over(&collect(ScoreVariant::Whitened, |r| {
                r.genuine_iqr
            })),
            whitened_impostor_iqr: AggTriple::over(&collect(ScoreVariant::Whitened, |r| {
                r.impostor_iqr
            })),
        });
        rows.extend(band_result);
    }
    Ok(DecorrelationComparison { rows, per_band })
}

/// Binned score proportions for plotting a similarity-score figure, with
/// the EER threshold for the vertical marker line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreHistogram {
    /// `bins + 1` edges spanning `[0, 1]`.
    pub bin_edges: Vec<f64>,
    /// Per-bin proportion of genuine scores; sums to 1.
    pub genuine: Vec<f64>,
    /// Per-bin proportion of impostor scores; sums to 1.
    pub impostor: Vec<f64>,
    pub eer_threshold: f64,
}

pub fn export_score_histograms(scores: &SimilarityScores, bins: usize) -> Result<ScoreHistogram> {
    if bins < 2 {
        return Err(Error::Domain("need at least two histogram bins".into()));
    }
    let roc = roc_eer(scores)?;
    let bin_proportions = |values: &[f64]| -> Vec<f64> {
        let mut counts = vec![0usize; bins];
        for &v in values {
            let bin = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / values.len() as f64)
            .collect()
    };
    Ok(ScoreHistogram {
        bin_edges: (0..=bins).map(|b| b as f64 / bins as f64).collect(),
        genuine: bin_proportions(&scores.genuine),
        impostor: bin_proportions(&scores.impostor),
        eer_threshold: roc.eer_threshold,
    })
}
