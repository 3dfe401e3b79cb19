//! Dataset and report serialization.
//!
//! Datasets interchange as CSV with the header `Subject,Session,<features>`,
//! one row per (subject, session) pair. Reports are written as CSV tables
//! plus a versioned JSON summary that echoes the full resolved
//! configuration, so any report can be reproduced from its own metadata.
//! All file writes go through a temp file and an atomic rename; no partial
//! artifacts are left behind on error.

use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::dataset::FeatureDataset;
use crate::error::{Error, Result};
use crate::experiment::{
    BandSweepReport, CorrStudyConfig, CorrStudyReport, DecorrCompareConfig,
    DecorrelationComparison, ScoreHistogram, SweepConfig,
};
use crate::icc::{BandPartition, IccEstimate};
use crate::similarity::{DistributionSummary, RocResult, ScalingRecord};

pub const SCHEMA_VERSION: u32 = 1;

/// Parses a dataset CSV.
///
/// Subjects are ordered by first appearance; the two distinct session
/// labels are canonicalized to sessions 1 and 2 in ascending order
/// (numeric when both labels parse as numbers, lexicographic otherwise).
pub fn load_dataset(path: impl AsRef<Path>) -> Result<FeatureDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::Format(e.to_string()),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{display}: {e}")))?
        .clone();
    if headers.len() < 2 || &headers[0] != "Subject" || &headers[1] != "Session" {
        return Err(Error::Format(format!(
            "{display}: header must start with Subject,Session"
        )));
    }
    let feature_names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    if feature_names.is_empty() {
        return Err(Error::Format(format!("{display}: no feature columns")));
    }
    let k = feature_names.len();

    struct RawRow {
        subject: String,
        session: String,
        values: Vec<f64>,
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let file_row = idx + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::Parse {
            path: display.clone(),
            row: file_row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() != k + 2 {
            return Err(Error::Parse {
                path: display.clone(),
                row: file_row,
                column: record.len(),
                message: format!("expected {} fields, found {}", k + 2, record.len()),
            });
        }
        let mut values = Vec::with_capacity(k);
        for (c, field) in record.iter().skip(2).enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: display.clone(),
                row: file_row,
                column: c + 3,
                message: format!("not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: display.clone(),
                    row: file_row,
                    column: c + 3,
                    message: format!("non-finite value: {field:?}"),
                });
            }
            values.push(value);
        }
        rows.push(RawRow {
            subject: record[0].to_string(),
            session: record[1].to_string(),
            values,
        });
    }

    let mut session_labels: Vec<String> = Vec::new();
    for row in &rows {
        if !session_labels.contains(&row.session) {
            session_labels.push(row.session.clone());
        }
    }
    if session_labels.len() != 2 {
        return Err(Error::Unbalanced(format!(
            "expected exactly 2 distinct Session values, found {}",
            session_labels.len()
        )));
    }
    session_labels.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    });

    let mut subject_ids: Vec<String> = Vec::new();
    let mut subject_index: std::collections::HashMap<String, usize> = Default::default();
    for row in &rows {
        if !subject_index.contains_key(&row.subject) {
            subject_index.insert(row.subject.clone(), subject_ids.len());
            subject_ids.push(row.subject.clone());
        }
    }
    let n = subject_ids.len();

    // (subject, session) -> values, checking for duplicates
    let mut cells: Vec<Option<Vec<f64>>> = vec![None; n * 2];
    for row in rows {
        let i = subject_index[&row.subject];
        let s = session_labels
            .iter()
            .position(|s| *s == row.session)
            .unwrap();
        let slot = &mut cells[i * 2 + s];
        if slot.is_some() {
            return Err(Error::Unbalanced(format!(
                "subject {:?} appears more than once in session {:?}",
                row.subject, row.session
            )));
        }
        *slot = Some(row.values);
    }
    for (i, subject) in subject_ids.iter().enumerate() {
        for (s, label) in session_labels.iter().enumerate() {
            if cells[i * 2 + s].is_none() {
                return Err(Error::Unbalanced(format!(
                    "subject {subject:?} is missing session {label:?}"
                )));
            }
        }
    }

    let mut values = vec![0.0; n * 2 * k];
    for (i, cell) in cells.iter().enumerate() {
        let (subject, session) = (i / 2, i % 2);
        for (j, &v) in cell.as_ref().unwrap().iter().enumerate() {
            values[j * 2 * n + session * n + subject] = v;
        }
    }
    FeatureDataset::new(
        subject_ids,
        vec!["1".to_string(), "2".to_string()],
        feature_names,
        values,
    )
}

/// Writes the dataset in the interchange layout (full float precision:
/// values round-trip losslessly).
pub fn write_dataset(dataset: &FeatureDataset, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), render_dataset_csv(dataset).as_bytes())
}

pub fn render_dataset_csv(dataset: &FeatureDataset) -> String {
    let mut out = String::from("Subject,Session");
    for name in dataset.feature_names() {
        out.push(',');
        push_csv_field(&mut out, name);
    }
    out.push('\n');
    for session in 0..2 {
        for (i, subject) in dataset.subject_ids().iter().enumerate() {
            push_csv_field(&mut out, subject);
            let _ = write!(out, ",{}", session + 1);
            for j in 0..dataset.n_features() {
                let _ = write!(out, ",{}", dataset.value(i, j, session));
            }
            out.push('\n');
        }
    }
    out
}

fn push_csv_field(out: &mut String, field: &str) {
    if field.contains([',', '"', '\n']) {
        out.push('"');
        out.push_str(&field.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(field);
    }
}

/// Writes bytes via a sibling temp file and an atomic rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn render_icc_csv(estimates: &[IccEstimate]) -> String {
    let mut out = String::from("feature_name,var_subject,var_session,var_error,icc\n");
    for e in estimates {
        push_csv_field(&mut out, &e.feature_name);
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            e.components.var_subject, e.components.var_session, e.components.var_error, e.icc
        );
    }
    out
}

pub fn render_sweep_rows_csv(report: &BandSweepReport) -> String {
    let mut out = String::from(
        "band,repeat,genuine_median,impostor_median,genuine_iqr,impostor_iqr,eer_percent\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.band,
            r.repeat,
            r.genuine_median,
            r.impostor_median,
            r.genuine_iqr,
            r.impostor_iqr,
            r.eer_percent
        );
    }
    out
}

pub fn render_sweep_bands_csv(report: &BandSweepReport) -> String {
    let mut out = String::from("band");
    for metric in [
        "genuine_median",
        "impostor_median",
        "genuine_iqr",
        "impostor_iqr",
        "eer_percent",
    ] {
        for agg in ["median", "min", "max"] {
            let _ = write!(out, ",{metric}_{agg}");
        }
    }
    out.push('\n');
    for b in &report.per_band {
        let _ = write!(out, "{}", b.band);
        for t in [
            b.genuine_median,
            b.impostor_median,
            b.genuine_iqr,
            b.impostor_iqr,
            b.eer_percent,
        ] {
            let _ = write!(out, ",{},{},{}", t.median, t.min, t.max);
        }
        out.push('\n');
    }
    out
}

pub fn render_corr_study_csv(report: &CorrStudyReport) -> String {
    let mut out = String::from("rho,iteration,median_abs_corr,impostor_iqr\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.rho, r.iteration, r.median_abs_corr, r.impostor_iqr
        );
    }
    out
}

pub fn render_decorr_rows_csv(report: &DecorrelationComparison) -> String {
    let mut out = String::from(
        "band,repeat,variant,genuine_median,impostor_median,genuine_iqr,impostor_iqr\n",
    );
    for r in &report.rows {
        let variant = match r.variant {
            crate::experiment::ScoreVariant::Raw => "raw",
            crate::experiment::ScoreVariant::Whitened => "whitened",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.band,
            r.repeat,
            variant,
            r.genuine_median,
            r.impostor_median,
            r.genuine_iqr,
            r.impostor_iqr
        );
    }
    out
}

pub fn render_roc_csv(roc: &RocResult) -> String {
    let mut out = String::from("threshold,far,frr\n");
    for i in 0..roc.thresholds.len() {
        let _ = writeln!(out, "{},{},{}", roc.thresholds[i], roc.far[i], roc.frr[i]);
    }
    out
}

pub fn render_histogram_csv(hist: &ScoreHistogram) -> String {
    let mut out = String::from("bin_low,bin_high,genuine_proportion,impostor_proportion\n");
    for b in 0..hist.genuine.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            hist.bin_edges[b],
            hist.bin_edges[b + 1],
            hist.genuine[b],
            hist.impostor[b]
        );
    }
    out
}

/// Versioned JSON summary wrapper: every report embeds the resolved
/// configuration (including the seed), so `run_id` and the contents are a
/// pure function of the config.
#[derive(Debug, Serialize)]
pub struct ReportBundle<C: Serialize, S: Serialize> {
    pub schema_version: u32,
    pub run_id: String,
    pub kind: &'static str,
    pub config: C,
    pub summary: S,
}

pub fn render_summary_json<C: Serialize, S: Serialize>(
    kind: &'static str,
    config: &C,
    summary: &S,
) -> Result<String> {
    let config_value = serde_json::to_value(config).map_err(|e| Error::Format(e.to_string()))?;
    let run_id = format!("{:016x}", fnv1a64(config_value.to_string().as_bytes()));
    let bundle = ReportBundle {
        schema_version: SCHEMA_VERSION,
        run_id,
        kind,
        config: config_value,
        summary,
    };
    let mut json =
        serde_json::to_string_pretty(&bundle).map_err(|e| Error::Format(e.to_string()))?;
    json.push('\n');
    Ok(json)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1_0000_0000_01b3);
    }
    hash
}

/// Artifact paths written by a report-producing command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenArtifacts {
    pub files: Vec<PathBuf>,
}

pub fn write_sweep_report(
    report: &BandSweepReport,
    config: &SweepConfig,
    out_dir: &Path,
) -> Result<WrittenArtifacts> {
    let rows = out_dir.join("band_sweep_rows.csv");
    let bands = out_dir.join("band_sweep_bands.csv");
    let summary = out_dir.join("band_sweep_summary.json");
    atomic_write(&rows, render_sweep_rows_csv(report).as_bytes())?;
    atomic_write(&bands, render_sweep_bands_csv(report).as_bytes())?;
    atomic_write(
        &summary,
        render_summary_json("band_sweep", config, &report.per_band)?.as_bytes(),
    )?;
    Ok(WrittenArtifacts {
        files: vec![rows, bands, summary],
    })
}

pub fn write_corr_study_report(
    report: &CorrStudyReport,
    config: &CorrStudyConfig,
    out_dir: &Path,
) -> Result<WrittenArtifacts> {
    let rows = out_dir.join("corr_study_rows.csv");
    let summary = out_dir.join("corr_study_summary.json");
    #[derive(Serialize)]
    struct Summary {
        spearman_rho: f64,
        n_rows: usize,
    }
    atomic_write(&rows, render_corr_study_csv(report).as_bytes())?;
    atomic_write(
        &summary,
        render_summary_json(
            "corr_study",
            config,
            &Summary {
                spearman_rho: report.spearman_rho,
                n_rows: report.rows.len(),
            },
        )?
        .as_bytes(),
    )?;
    Ok(WrittenArtifacts {
        files: vec![rows, summary],
    })
}

pub fn write_decorr_report(
    report: &DecorrelationComparison,
    config: &DecorrCompareConfig,
    out_dir: &Path,
) -> Result<WrittenArtifacts> {
    let rows = out_dir.join("decorr_compare_rows.csv");
    let summary = out_dir.join("decorr_compare_summary.json");
    atomic_write(&rows, render_decorr_rows_csv(report).as_bytes())?;
    atomic_write(
        &summary,
        render_summary_json("decorr_compare", config, &report.per_band)?.as_bytes(),
    )?;
    Ok(WrittenArtifacts {
        files: vec![rows, summary],
    })
}

/// Summary block for a single `evaluate` run.
#[derive(Debug, Serialize)]
pub struct EvaluationSummary {
    pub feature_subset: Vec<String>,
    pub genuine: DistributionSummary,
    pub impostor: DistributionSummary,
    pub eer_percent: f64,
    pub eer_threshold: f64,
    pub scaling: ScalingRecord,
}

pub fn load_toml_config<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Band partition summary as CSV (band index, count).
pub fn render_partition_csv(partition: &BandPartition) -> String {
    let mut out = String::from("band,count\n");
    for (band, count) in &partition.counts {
        let _ = writeln!(out, "{band},{count}");
    }
    if !partition.unassigned.is_empty() {
        let _ = writeln!(out, "unassigned,{}", partition.unassigned.len());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use crate::synth::generate_feature_set;
    use tempfile::TempDir;

    #[test]
    fn roundtrip_is_lossless() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = generate_feature_set(17, 3, 0.37, RngSeed::new(99)).unwrap();
        write_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.n_subjects(), 17);
        assert_eq!(back.feature_names(), ds.feature_names());
        for j in 0..3 {
            for (a, b) in ds.feature_column(j).iter().zip(back.feature_column(j)) {
                assert_eq!(a, b, "round-trip must be exact");
            }
        }
    }

    #[test]
    fn header_layout() {
        let ds = generate_feature_set(2, 3, 0.5, RngSeed::new(1)).unwrap();
        let csv = render_dataset_csv(&ds);
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "Subject,Session,Feat01,Feat02,Feat03");
        assert_eq!(csv.lines().count(), 5); // header + 2 subjects x 2 sessions
    }

    #[test]
    fn empty_feature_dataset_writes_header_only() {
        let ds = FeatureDataset::new(vec![], vec!["1".into(), "2".into()], vec![], vec![]).unwrap();
        assert_eq!(render_dataset_csv(&ds), "Subject,Session\n");
    }

    fn write_tmp(content: &str) -> (TempDir, PathBuf) {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("in.csv");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn missing_header_rejected() {
        let (_d, path) = write_tmp("Subj,Sess,F1\n1,1,0.5\n");
        assert!(matches!(load_dataset(&path), Err(Error::Format(_))));
    }

    #[test]
    fn missing_session_rejected() {
        let (_d, path) = write_tmp("Subject,Session,F1\n1,1,0.5\n1,2,0.25\n2,1,0.125\n");
        match load_dataset(&path) {
            Err(Error::Unbalanced(msg)) => assert!(msg.contains("\"2\"")),
            other => panic!("expected balance error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_pair_rejected() {
        let (_d, path) = write_tmp("Subject,Session,F1\n1,1,0.5\n1,1,0.75\n1,2,0.25\n");
        assert!(matches!(load_dataset(&path), Err(Error::Unbalanced(_))));
    }

    #[test]
    fn bad_cell_reports_location() {
        let (_d, path) = write_tmp("Subject,Session,F1,F2\n1,1,0.5,oops\n1,2,0.25,0.5\n");
        match load_dataset(&path) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, 4);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn session_labels_canonicalized() {
        // numeric labels sort numerically: 9 before 10
        let (_d, path) = write_tmp("Subject,Session,F1\na,10,2.0\na,9,1.0\nb,9,3.0\nb,10,4.0\n");
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.session_ids(), &["1".to_string(), "2".to_string()]);
        // session "9" became session 1
        assert_eq!(ds.value(0, 0, 0), 1.0);
        assert_eq!(ds.value(0, 0, 1), 2.0);
        // subjects ordered by first appearance
        assert_eq!(ds.subject_ids(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn three_sessions_rejected() {
        let (_d, path) = write_tmp("Subject,Session,F1\n1,1,1.0\n1,2,2.0\n1,3,3.0\n");
        assert!(matches!(load_dataset(&path), Err(Error::Unbalanced(_))));
    }

    #[test]
    fn shape_example() {
        let (_d, path) =
            write_tmp("Subject,Session,F1,F2,F3\n1,1,1,2,3\n2,1,4,5,6\n1,2,7,8,9\n2,2,10,11,12\n");
        let ds = load_dataset(&path).unwrap();
        assert_eq!(ds.n_subjects(), 2);
        assert_eq!(ds.n_features(), 3);
        assert_eq!(ds.session_ids().len(), 2);
        assert_eq!(ds.value(1, 2, 1), 12.0);
    }

    #[test]
    fn summary_json_is_deterministic() {
        let config = SweepConfig::default();
        let a = render_summary_json("band_sweep", &config, &vec![1, 2, 3]).unwrap();
        let b = render_summary_json("band_sweep", &config, &vec![1, 2, 3]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"schema_version\": 1"));
        assert!(a.contains("\"run_id\""));
        assert!(a.contains("\"seed\""));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("x.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
    }
}
