//! Variance components and the intraclass correlation coefficient.
//!
//! The estimator is the ANOVA method of moments for the balanced two-way
//! random-effects design (subjects crossed with sessions, one observation
//! per cell). For balanced two-session data this coincides with the
//! REML-fitted mixed model up to truncation of negative component
//! estimates, which are clamped to zero so the ICC stays in `[0, 1]`.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::dataset::FeatureDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceComponents {
    pub var_subject: f64,
    pub var_session: f64,
    pub var_error: f64,
}

impl VarianceComponents {
    pub fn total(&self) -> f64 {
        self.var_subject + self.var_session + self.var_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IccEstimate {
    pub feature_name: String,
    pub components: VarianceComponents,
    /// `var_subject / total`, clamped to `[0, 1]`.
    pub icc: f64,
}

/// ANOVA sums of squares for one feature; exposed for the identity
/// `ss_total = ss_subject + ss_session + ss_error`.
#[derive(Debug, Clone, Copy)]
pub struct AnovaDecomposition {
    pub ss_subject: f64,
    pub ss_session: f64,
    pub ss_error: f64,
    pub ss_total: f64,
}

fn check_balanced(session1: &[f64], session2: &[f64]) -> Result<usize> {
    if session1.len() != session2.len() {
        return Err(Error::Unbalanced(format!(
            "session lengths differ: {} vs {}",
            session1.len(),
            session2.len()
        )));
    }
    let n = session1.len();
    if n < 2 {
        return Err(Error::InsufficientSubjects {
            required: 2,
            actual: n,
        });
    }
    for x in session1.iter().chain(session2) {
        if !x.is_finite() {
            return Err(Error::Unbalanced("non-finite measurement".into()));
        }
    }
    Ok(n)
}

pub fn anova_decomposition(session1: &[f64], session2: &[f64]) -> Result<AnovaDecomposition> {
    let n = check_balanced(session1, session2)? as f64;
    let mean1 = session1.iter().sum::<f64>() / n;
    let mean2 = session2.iter().sum::<f64>() / n;
    let grand = (mean1 + mean2) / 2.0;

    let mut ss_subject = 0.0;
    let mut ss_error = 0.0;
    let mut ss_total = 0.0;
    for (&x1, &x2) in session1.iter().zip(session2) {
        let subj_mean = (x1 + x2) / 2.0;
        ss_subject += (subj_mean - grand) * (subj_mean - grand);
        let r1 = x1 - subj_mean - mean1 + grand;
        let r2 = x2 - subj_mean - mean2 + grand;
        ss_error += r1 * r1 + r2 * r2;
        ss_total += (x1 - grand) * (x1 - grand) + (x2 - grand) * (x2 - grand);
    }
    ss_subject *= 2.0;
    let ss_session = n * ((mean1 - grand) * (mean1 - grand) + (mean2 - grand) * (mean2 - grand));
    Ok(AnovaDecomposition {
        ss_subject,
        ss_session,
        ss_error,
        ss_total,
    })
}

/// Method-of-moments variance components for one feature's two sessions.
///
/// `var_error = MS_error`, `var_session = max(0, (MS_session - MS_error)/N)`,
/// `var_subject = max(0, (MS_subject - MS_error)/2)`.
pub fn variance_components(session1: &[f64], session2: &[f64]) -> Result<VarianceComponents> {
    let n = check_balanced(session1, session2)? as f64;
    let ss = anova_decomposition(session1, session2)?;
    let ms_subject = ss.ss_subject / (n - 1.0);
    let ms_session = ss.ss_session; // df = S - 1 = 1
    let ms_error = ss.ss_error / (n - 1.0);
    Ok(VarianceComponents {
        var_subject: ((ms_subject - ms_error) / 2.0).max(0.0),
        var_session: ((ms_session - ms_error) / n).max(0.0),
        var_error: ms_error,
    })
}

/// One ICC estimate per feature, in feature order.
pub fn estimate_icc(dataset: &FeatureDataset) -> Result<Vec<IccEstimate>> {
    (0..dataset.n_features())
        .into_par_iter()
        .map(|j| {
            let name = dataset.feature_names()[j].clone();
            let components =
                variance_components(dataset.session_slice(j, 0), dataset.session_slice(j, 1))?;
            let total = components.total();
            if total <= 0.0 {
                return Err(Error::DegenerateFeature(name));
            }
            Ok(IccEstimate {
                feature_name: name,
                components,
                icc: (components.var_subject / total).clamp(0.0, 1.0),
            })
        })
        .collect()
}

/// Assignment of features to half-open ICC intervals `[edge_b, edge_{b+1})`.
///
/// A feature whose ICC is at or above the last edge goes to the top band
/// when the top edge is 1.0 (so a perfect ICC of 1.0 is still banded);
/// otherwise it is reported in `unassigned`, as is anything below the first
/// edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandPartition {
    pub edges: Vec<f64>,
    pub assignment: BTreeMap<String, usize>,
    pub counts: BTreeMap<usize, usize>,
    pub unassigned: Vec<String>,
}

pub fn band_partition(estimates: &[IccEstimate], edges: &[f64]) -> Result<BandPartition> {
    if edges.len() < 2 {
        return Err(Error::Domain("need at least two band edges".into()));
    }
    for w in edges.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain(format!(
                "band edges must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if edges[0] < 0.0 || *edges.last().unwrap() > 1.0 {
        return Err(Error::Domain("band edges must lie within [0, 1]".into()));
    }

    let top_edge = *edges.last().unwrap();
    let top_band = edges.len() - 2;
    let mut assignment = BTreeMap::new();
    let mut counts = BTreeMap::new();
    let mut unassigned = Vec::new();
    for est in estimates {
        let band = if est.icc >= top_edge {
            (top_edge == 1.0).then_some(top_band)
        } else if est.icc < edges[0] {
            None
        } else {
            Some(edges.partition_point(|e| *e <= est.icc) - 1)
        };
        match band {
            Some(b) => {
                assignment.insert(est.feature_name.clone(), b);
                *counts.entry(b).or_insert(0) += 1;
            }
            None => unassigned.push(est.feature_name.clone()),
        }
    }
    Ok(BandPartition {
        edges: edges.to_vec(),
        assignment,
        counts,
        unassigned,
    })
}

/// The paper's decile edges `0.0, 0.1, ..., 1.0`.
pub fn decile_edges() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}
