//! Two-session feature dataset.

use crate::error::{Error, Result};

/// Number of measurement sessions. Fixed at two: verification compares one
/// enrollment session against one probe session, and the variance-component
/// estimators assume a balanced two-session design.
pub const SESSION_COUNT: usize = 2;

/// N subjects x K features x 2 sessions of real-valued measurements.
///
/// Storage is feature-major: feature `j` occupies one contiguous column of
/// length `2N`, with the session-1 block (subjects `0..N`) followed by the
/// session-2 block. That column is exactly the "vertically concatenated
/// sessions" vector that z-scoring, ICC estimation, and correlation analysis
/// operate on.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    n_subjects: usize,
    subject_ids: Vec<String>,
    session_ids: Vec<String>,
    feature_names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureDataset {
    /// Builds a dataset from feature-major values (`feature_names.len()`
    /// columns of length `2 * subject_ids.len()`, session-1 block first).
    pub fn new(
        subject_ids: Vec<String>,
        session_ids: Vec<String>,
        feature_names: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if session_ids.len() != SESSION_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "expected exactly {SESSION_COUNT} session ids, got {}",
                session_ids.len()
            )));
        }
        let n = subject_ids.len();
        let expected = n * SESSION_COUNT * feature_names.len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} values for {n} subjects x {} features x {SESSION_COUNT} sessions, got {}",
                feature_names.len(),
                values.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &subject_ids {
            if !seen.insert(id) {
                return Err(Error::Unbalanced(format!("duplicate subject id {id:?}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for name in &feature_names {
            if !seen.insert(name) {
                return Err(Error::Format(format!("duplicate feature name {name:?}")));
            }
        }
        Ok(Self {
            n_subjects: n,
            subject_ids,
            session_ids,
            feature_names,
            values,
        })
    }

    /// Default labels for generated data: subjects "1".."N", sessions "1","2".
    pub fn default_ids(n_subjects: usize) -> (Vec<String>, Vec<String>) {
        let subjects = (1..=n_subjects).map(|i| i.to_string()).collect();
        let sessions = vec!["1".to_string(), "2".to_string()];
        (subjects, sessions)
    }

    pub fn n_subjects(&self) -> usize {
        self.n_subjects
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn session_ids(&self) -> &[String] {
        &self.session_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Full column of feature `j`: length `2N`, session-1 block first.
    pub fn feature_column(&self, feature: usize) -> &[f64] {
        let len = self.n_subjects * SESSION_COUNT;
        &self.values[feature * len..(feature + 1) * len]
    }

    /// One session's block of feature `j`: length `N`.
    pub fn session_slice(&self, feature: usize, session: usize) -> &[f64] {
        debug_assert!(session < SESSION_COUNT);
        let col = self.feature_column(feature);
        &col[session * self.n_subjects..(session + 1) * self.n_subjects]
    }

    pub fn value(&self, subject: usize, feature: usize, session: usize) -> f64 {
        self.session_slice(feature, session)[subject]
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    /// Replaces the raw value buffer, keeping all labels. Length must match.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            n_subjects: self.n_subjects,
            subject_ids: self.subject_ids.clone(),
            session_ids: self.session_ids.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Swaps the two session blocks of every feature.
    pub fn swap_sessions(&self) -> Self {
        let n = self.n_subjects;
        let mut values = self.values.clone();
        for j in 0..self.n_features() {
            let base = j * n * SESSION_COUNT;
            for i in 0..n {
                values.swap(base + i, base + n + i);
            }
        }
        let mut session_ids = self.session_ids.clone();
        session_ids.swap(0, 1);
        Self {
            n_subjects: n,
            subject_ids: self.subject_ids.clone(),
            session_ids,
            feature_names: self.feature_names.clone(),
            values,
        }
    }
}
