use crate::error::{CamaError, Result};
use crate::metrics::LabeledScores;

/// One sample's label and scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub id: u64,
    pub label: u8,
    /// Logit from the initially available modalities.
    pub s_avail: f64,
    /// Logit after the extra modality is acquired.
    pub s_acquired: f64,
    /// Imputed logits approximating `s_acquired`.
    pub s_imp: Vec<f64>,
}

/// A validated cohort. Records are kept sorted by id, so positions and ids
/// order identically and "lowest id" tie rules can work on positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    records: Vec<ScoreRecord>,
    labels: Vec<u8>,
    s_avail: Vec<f64>,
    s_acquired: Vec<f64>,
    k: usize,
    n_pos: usize,
}

impl Cohort {
    pub fn new(mut records: Vec<ScoreRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(CamaError::Precondition("cohort has no samples".into()));
        }
        records.sort_by_key(|r| r.id);
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CamaError::Precondition(format!(
                "duplicate sample id {}",
                w[0].id
            )));
        }
        let k = records[0].s_imp.len();
        for r in &records {
            if r.label > 1 {
                return Err(CamaError::Domain(format!(
                    "sample {}: label {} is not 0 or 1",
                    r.id, r.label
                )));
            }
            if r.s_imp.len() != k {
                return Err(CamaError::Precondition(format!(
                    "sample {} has {} imputations, expected {k}",
                    r.id,
                    r.s_imp.len()
                )));
            }
            let finite = r.s_avail.is_finite()
                && r.s_acquired.is_finite()
                && r.s_imp.iter().all(|v| v.is_finite());
            if !finite {
                return Err(CamaError::Domain(format!(
                    "sample {} has a non-finite score",
                    r.id
                )));
            }
        }
        Ok(Cohort {
            labels: records.iter().map(|r| r.label).collect(),
            s_avail: records.iter().map(|r| r.s_avail).collect(),
            s_acquired: records.iter().map(|r| r.s_acquired).collect(),
            n_pos: records.iter().filter(|r| r.label == 1).count(),
            records,
            k,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Imputation samples per record (0 when the cohort carries none).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn s_avail(&self) -> &[f64] {
        &self.s_avail
    }

    pub fn s_acquired(&self) -> &[f64] {
        &self.s_acquired
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.records.iter().map(|r| r.id)
    }

    pub fn n_positive(&self) -> usize {
        self.n_pos
    }

    pub fn n_negative(&self) -> usize {
        self.len() - self.n_pos
    }

    pub fn pre_acquisition(&self) -> LabeledScores<'_> {
        LabeledScores::new(&self.labels, &self.s_avail).expect("validated at construction")
    }

    pub fn post_acquisition(&self) -> LabeledScores<'_> {
        LabeledScores::new(&self.labels, &self.s_acquired).expect("validated at construction")
    }

    /// Score vector with the samples at `positions` switched to `s_acquired`.
    pub fn substituted(&self, positions: &[usize]) -> Vec<f64> {
        let mut scores = self.s_avail.clone();
        for &i in positions {
            scores[i] = self.s_acquired[i];
        }
        scores
    }
}
