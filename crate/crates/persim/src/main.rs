//! Thin CLI over the persim library: each subcommand reads/writes CSV
//! datasets and report bundles.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use persim::decorrelate::{
    center_columns, correlation_matrix, dataset_to_matrix, induce_correlation, matrix_to_dataset,
    whiten, CorrelationMatrix,
};
use persim::error::{Error, Result};
use persim::experiment::{
    build_correlated_bands, export_score_histograms, run_band_sweep, run_corr_study,
    run_decorrelation_comparison, CorrStudyConfig, DecorrCompareConfig, SweepConfig,
};
use persim::icc::{band_partition, estimate_icc};
use persim::io;
use persim::rng::RngSeed;
use persim::similarity::{
    distribution_summary, roc_eer, score_pairs_with, subset_sample, ScalingMode,
};
use persim::synth::generate_feature_set;

#[derive(Parser)]
#[command(
    name = "persim",
    version,
    about = "Synthetic temporal-persistence feature simulation and verification analysis"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Master RNG seed (overrides any seed in a config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Output format for single-table reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalingArg {
    /// Divide distances by the pooled observed max (default).
    EmpiricalMax,
    /// Min-max over the pooled distances.
    EmpiricalMinmax,
    /// Divide by the analytic range of 2.
    AnalyticHalfrange,
}

impl From<ScalingArg> for ScalingMode {
    fn from(v: ScalingArg) -> Self {
        match v {
            ScalingArg::EmpiricalMax => ScalingMode::EmpiricalMax,
            ScalingArg::EmpiricalMinmax => ScalingMode::EmpiricalMinMax,
            ScalingArg::AnalyticHalfrange => ScalingMode::AnalyticHalfRange,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with one target ICC.
    Generate {
        #[arg(long)]
        subjects: usize,
        #[arg(long)]
        features: usize,
        /// Target ICC in (0, 1].
        #[arg(long)]
        icc: f64,
        /// Output CSV path (default: derived name inside --out-dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate per-feature variance components and ICC from a dataset.
    Icc {
        #[arg(long)]
        input: PathBuf,
        /// Band edges for an additional partition summary, e.g. "0,0.1,...,1".
        #[arg(long)]
        edges: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score genuine/impostor similarities and compute the ROC/EER.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated feature names (default: random subset or all).
        #[arg(long, conflicts_with = "subset_size")]
        features: Option<String>,
        /// Random subset size sampled with --seed.
        #[arg(long)]
        subset_size: Option<usize>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = ScalingArg::EmpiricalMax)]
        scaling: ScalingArg,
    },
    /// Whiten a dataset (center, then inverse-square-root transform).
    Decorrelate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Impose a correlation structure via the forward Cholesky transform.
    Correlate {
        #[arg(long)]
        input: PathBuf,
        /// Uniform off-diagonal correlation target.
        #[arg(long, conflicts_with = "target_corr")]
        rho: Option<f64>,
        /// CSV file holding a full K x K correlation matrix (no header).
        #[arg(long)]
        target_corr: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the band sweep (config file or "default").
    Sweep {
        #[arg(long, default_value = "default")]
        config: String,
    },
    /// Run the intercorrelation vs impostor-IQR study.
    CorrStudy {
        #[arg(long, default_value = "default")]
        config: String,
    },
    /// Compare raw vs whitened score distributions across bands.
    DecorrCompare {
        #[arg(long, default_value = "default")]
        config: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out_dir = &cli.global.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let seed = RngSeed::new(cli.global.seed.unwrap_or(42));

    match cli.command {
        Command::Generate {
            subjects,
            features,
            icc,
            out,
        } => {
            let dataset = generate_feature_set(subjects, features, icc, seed)?;
            let path = out.unwrap_or_else(|| {
                out_dir.join(format!("synthetic_n{subjects}_k{features}_icc{icc:.3}.csv"))
            });
            io::write_dataset(&dataset, &path)?;
            println!(
                "wrote {} ({} subjects x {} features x 2 sessions)",
                path.display(),
                subjects,
                features
            );
        }
        Command::Icc { input, edges, out } => {
            let dataset = io::load_dataset(&input)?;
            let estimates = estimate_icc(&dataset)?;
            let path = out.unwrap_or_else(|| match cli.global.format {
                Format::Csv => out_dir.join("icc_report.csv"),
                Format::Json => out_dir.join("icc_report.json"),
            });
            match cli.global.format {
                Format::Csv => io::atomic_write(&path, io::render_icc_csv(&estimates).as_bytes())?,
                Format::Json => {
                    let json = serde_json::to_string_pretty(&estimates)
                        .map_err(|e| Error::Format(e.to_string()))?;
                    io::atomic_write(&path, format!("{json}\n").as_bytes())?;
                }
            }
            println!("wrote {}", path.display());
            if let Some(edges) = edges {
                let edges = parse_floats(&edges)?;
                let partition = band_partition(&estimates, &edges)?;
                let ppath = out_dir.join("icc_band_counts.csv");
                io::atomic_write(&ppath, io::render_partition_csv(&partition).as_bytes())?;
                println!("wrote {}", ppath.display());
            }
        }
        Command::Evaluate {
            input,
            features,
            subset_size,
            bins,
            scaling,
        } => {
            let dataset = io::load_dataset(&input)?;
            let subset: Vec<String> = match (features, subset_size) {
                (Some(list), _) => list.split(',').map(|s| s.trim().to_string()).collect(),
                (None, Some(size)) => subset_sample(dataset.feature_names(), size, 1, seed)?
                    .pop()
                    .unwrap(),
                (None, None) => dataset.feature_names().to_vec(),
            };
            let scores = score_pairs_with(&dataset, &subset, scaling.into())?;
            let genuine = distribution_summary(&scores.genuine)?;
            let impostor = distribution_summary(&scores.impostor)?;
            let roc = roc_eer(&scores)?;
            let hist = export_score_histograms(&scores, bins)?;

            let summary = io::EvaluationSummary {
                feature_subset: subset,
                genuine,
                impostor,
                eer_percent: roc.eer * 100.0,
                eer_threshold: roc.eer_threshold,
                scaling: scores.scaling,
            };
            let spath = out_dir.join("evaluation_summary.json");
            io::atomic_write(
                &spath,
                io::render_summary_json("evaluation", &(), &summary)?.as_bytes(),
            )?;
            io::atomic_write(
                &out_dir.join("roc.csv"),
                io::render_roc_csv(&roc).as_bytes(),
            )?;
            io::atomic_write(
                &out_dir.join("histogram.csv"),
                io::render_histogram_csv(&hist).as_bytes(),
            )?;
            println!(
                "genuine median {:.3} iqr {:.3} | impostor median {:.3} iqr {:.3} | EER {:.2}% @ {:.4}",
                genuine.median, genuine.iqr, impostor.median, impostor.iqr,
                roc.eer * 100.0, roc.eer_threshold
            );
            println!("wrote {}", spath.display());
        }
        Command::Decorrelate { input, out } => {
            let dataset = io::load_dataset(&input)?;
            let matrix = dataset_to_matrix(&dataset);
            let before = correlation_matrix(&matrix)?;
            let whitened = whiten(&center_columns(&matrix))?;
            let after = correlation_matrix(&whitened)?;
            let result = matrix_to_dataset(
                &whitened,
                dataset.subject_ids().to_vec(),
                dataset.session_ids().to_vec(),
            )?;
            io::write_dataset(&result, &out)?;
            println!(
                "median |r| {:.4} -> {:.2e}; wrote {}",
                before.median_abs_offdiag,
                after.median_abs_offdiag,
                out.display()
            );
        }
        Command::Correlate {
            input,
            rho,
            target_corr,
            out,
        } => {
            let dataset = io::load_dataset(&input)?;
            let k = dataset.n_features();
            let target = match (rho, target_corr) {
                (Some(rho), None) => CorrelationMatrix::exchangeable(k, rho),
                (None, Some(path)) => load_correlation_csv(&path, k)?,
                _ => {
                    return Err(Error::Config(
                        "provide exactly one of --rho or --target-corr".into(),
                    ))
                }
            };
            let induced = induce_correlation(&dataset_to_matrix(&dataset), &target)?;
            let result = matrix_to_dataset(
                &induced,
                dataset.subject_ids().to_vec(),
                dataset.session_ids().to_vec(),
            )?;
            io::write_dataset(&result, &out)?;
            let summary = correlation_matrix(&dataset_to_matrix(&result))?;
            println!(
                "median |r| now {:.4}; wrote {}",
                summary.median_abs_offdiag,
                out.display()
            );
        }
        Command::Sweep { config } => {
            let mut cfg: SweepConfig = load_config_or_default(&config)?;
            if let Some(seed) = cli.global.seed {
                cfg.seed = RngSeed::new(seed);
            }
            let report = run_band_sweep(&cfg)?;
            let artifacts = io::write_sweep_report(&report, &cfg, out_dir)?;
            println!("band genuine_median impostor_median genuine_iqr impostor_iqr eer%");
            for b in &report.per_band {
                println!(
                    "{:>4} {:>14.3} {:>15.3} {:>11.3} {:>12.3} {:>5.2}",
                    b.band,
                    b.genuine_median.median,
                    b.impostor_median.median,
                    b.genuine_iqr.median,
                    b.impostor_iqr.median,
                    b.eer_percent.median
                );
            }
            report_written(&artifacts);
        }
        Command::CorrStudy { config } => {
            let mut cfg: CorrStudyConfig = load_config_or_default(&config)?;
            if let Some(seed) = cli.global.seed {
                cfg.seed = RngSeed::new(seed);
            }
            let report = run_corr_study(&cfg)?;
            let artifacts = io::write_corr_study_report(&report, &cfg, out_dir)?;
            println!(
                "{} rows pooled over rho targets {:?}; Spearman rho = {:.3}",
                report.rows.len(),
                cfg.rho_targets,
                report.spearman_rho
            );
            report_written(&artifacts);
        }
        Command::DecorrCompare { config } => {
            let mut cfg: DecorrCompareConfig = load_config_or_default(&config)?;
            if let Some(seed) = cli.global.seed {
                cfg.seed = RngSeed::new(seed);
            }
            let bands = build_correlated_bands(&cfg)?;
            let report =
                run_decorrelation_comparison(&bands, cfg.subset_size, cfg.n_repeats, cfg.seed)?;
            let artifacts = io::write_decorr_report(&report, &cfg, out_dir)?;
            println!("band raw_gen_iqr raw_imp_iqr white_gen_iqr white_imp_iqr");
            for b in &report.per_band {
                println!(
                    "{:>4} {:>11.3} {:>11.3} {:>13.3} {:>13.3}",
                    b.band,
                    b.raw_genuine_iqr.median,
                    b.raw_impostor_iqr.median,
                    b.whitened_genuine_iqr.median,
                    b.whitened_impostor_iqr.median
                );
            }
            report_written(&artifacts);
        }
    }
    Ok(())
}

fn report_written(artifacts: &io::WrittenArtifacts) {
    for file in &artifacts.files {
        println!("wrote {}", file.display());
    }
}

fn load_config_or_default<T: serde::de::DeserializeOwned + Default>(spec: &str) -> Result<T> {
    if spec == "default" {
        Ok(T::default())
    } else {
        io::load_toml_config(spec)
    }
}

fn parse_floats(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not a number: {s:?}")))
        })
        .collect()
}

/// Reads a K x K correlation matrix from a headerless CSV.
fn load_correlation_csv(path: &Path, expected_dim: usize) -> Result<CorrelationMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut n_rows = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row = parse_floats(line)?;
        if row.len() != expected_dim {
            return Err(Error::ShapeMismatch(format!(
                "correlation row has {} entries, expected {expected_dim}",
                row.len()
            )));
        }
        values.extend(row);
        n_rows += 1;
    }
    if n_rows != expected_dim {
        return Err(Error::ShapeMismatch(format!(
            "correlation matrix has {n_rows} rows, expected {expected_dim}"
        )));
    }
    CorrelationMatrix::from_values(expected_dim, values)
}
