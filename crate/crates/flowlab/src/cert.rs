//! Pass/fail record shared by the lemma certifier and the bound checks.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub id: String,
    /// Claimed constant or bound parameter.
    pub claimed: f64,
    /// Recomputed value compared against `claimed`.
    pub computed: f64,
    /// claimed − computed, or a ratio where stated in `domain`.
    pub margin: f64,
    pub domain: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CertReport {
    pub fn new(id: impl Into<String>, claimed: f64, computed: f64, domain: impl Into<String>, pass: bool) -> Self {
        CertReport {
            id: id.into(),
            claimed,
            computed,
            margin: claimed - computed,
            domain: domain.into(),
            pass,
            notes: Vec::new(),
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }
}
