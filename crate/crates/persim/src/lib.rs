//! Synthetic two-session biometric features with controllable temporal
//! persistence, and the analysis pipeline that turns them into
//! verification results.
//!
//! Temporal persistence of a feature is measured by the intraclass
//! correlation coefficient (ICC): the share of total variance carried by
//! stable between-subject differences. This crate generates feature sets
//! whose ICC is dialed in by construction, estimates ICC from any
//! two-session dataset, scores genuine/impostor similarity distributions
//! with ROC/EER analysis, and studies how inter-feature correlation
//! inflates the impostor distribution (and how whitening removes that
//! effect).
//!
//! # Quick start
//!
//! ```
//! use persim::prelude::*;
//!
//! # fn main() -> persim::Result<()> {
//! // 200 subjects x 20 features, all with target ICC 0.7
//! let dataset = generate_feature_set(200, 20, 0.7, RngSeed::new(7))?;
//!
//! // how persistent did they come out?
//! let estimates = estimate_icc(&dataset)?;
//! assert!(estimates.iter().all(|e| (e.icc - 0.7).abs() < 0.25));
//!
//! // verification performance over all features
//! let scores = score_pairs(&dataset, dataset.feature_names())?;
//! let roc = roc_eer(&scores)?;
//! assert!(roc.eer < 0.2);
//! # Ok(())
//! # }
//! ```
//!
//! The `examples/` directory has one runnable program per capability:
//! dataset generation, ICC estimation, verification scoring, the band
//! sweep, correlation induction, whitening, and the decorrelation
//! comparison. The `persim` binary wraps the same entry points as CLI
//! subcommands operating on CSV files.

pub mod dataset;
pub mod decorrelate;
pub mod error;
pub mod experiment;
pub mod icc;
pub mod io;
pub mod rng;
pub mod similarity;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

/// The commonly used names in one import.
pub mod prelude {
    pub use crate::dataset::FeatureDataset;
    pub use crate::decorrelate::{
        center_columns, correlation_matrix, dataset_to_matrix, induce_correlation,
        matrix_to_dataset, whiten, CorrelationMatrix, DataMatrix,
    };
    pub use crate::error::{Error, Result};
    pub use crate::experiment::{
        build_correlated_bands, export_score_histograms, run_band_sweep, run_corr_study,
        run_corr_vs_impostor_iqr, run_decorrelation_comparison, run_icc_histogram_experiment,
        CorrStudyConfig, DecorrCompareConfig, SweepConfig,
    };
    pub use crate::icc::{band_partition, decile_edges, estimate_icc, variance_components};
    pub use crate::rng::RngSeed;
    pub use crate::similarity::{
        cosine_distance, distribution_summary, roc_eer, score_pairs, score_pairs_with,
        subset_sample, ScalingMode,
    };
    pub use crate::synth::{generate_band, generate_feature_set, zscore_normalize, BandSpec};
}
