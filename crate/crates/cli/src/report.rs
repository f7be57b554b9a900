//! Machine-readable run reports and their human rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use tenfold_core::IndexValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Index {
    Zero,
    KernelDim(usize),
    Sign(i8),
}

impl From<IndexValue> for Index {
    fn from(v: IndexValue) -> Self {
        match v {
            IndexValue::Zero => Index::Zero,
            IndexValue::KernelDim(k) => Index::KernelDim(k),
            IndexValue::Sign(s) => Index::Sign(s),
        }
    }
}

impl Index {
    /// Short form used in CSV cells.
    pub fn compact(self) -> String {
        match self {
            Index::Zero => "0".into(),
            Index::KernelDim(k) => k.to_string(),
            Index::Sign(s) => if s > 0 { "+1" } else { "-1" }.into(),
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Index::Zero => write!(f, "0"),
            Index::KernelDim(k) => write!(f, "dim ker(U-1) = {k}"),
            Index::Sign(s) => write!(f, "{}", if *s > 0 { "+1" } else { "-1" }),
        }
    }
}

/// One gapped bulk: both decaying planes and their indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkSummary {
    pub source: String,
    pub kind: String,
    pub n: usize,
    pub energy: f64,
    pub gap_margin: f64,
    pub membership_residual_plus: f64,
    pub membership_residual_minus: f64,
    pub index_plus: Index,
    pub index_minus: Index,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub verdict: String,
    pub localized_count: usize,
    pub localized_energies: Vec<f64>,
    pub eigenvalues_in_window: Vec<f64>,
    pub central_weights: Vec<f64>,
    pub energy_window: f64,
    pub matrix_dim: usize,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub class: String,
    /// One entry for `classify`, left then right for junctions.
    pub bulks: Vec<BulkSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_left: Option<Index>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_right: Option<Index>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protected_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_kernel_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
        serde_json::from_str(text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let ok = |b: bool| if b { "ok" } else { "VIOLATED" };
        let _ = writeln!(out, "class: {}", self.class);
        for (k, b) in self.bulks.iter().enumerate() {
            let side = match (self.bulks.len(), k) {
                (1, _) => "bulk",
                (_, 0) => "left",
                _ => "right",
            };
            let _ = writeln!(out, "{side}: {} ({}, N = {}, E = {})", b.source, b.kind, b.n, b.energy);
            let _ = writeln!(out, "  gap margin: {:.6e}", b.gap_margin);
            let _ = writeln!(
                out,
                "  membership residual: U+ {:.3e}, U- {:.3e}",
                b.membership_residual_plus, b.membership_residual_minus
            );
            let _ = writeln!(out, "  index U+: {}", b.index_plus);
            let _ = writeln!(out, "  index U-: {}", b.index_minus);
            let _ = writeln!(out, "  bulk consistency: {}", ok(b.consistent));
        }
        if let Some(bound) = self.protected_bound {
            let _ = writeln!(out, "protected bound: {bound}");
        }
        if let Some(p) = self.predicted_kernel_dim {
            let _ = writeln!(out, "predicted zero modes: {p}");
        }
        if let Some(c) = self.consistency {
            let _ = writeln!(out, "consistency: {}", ok(c));
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                out,
                "oracle: {} localized near-zero modes in |E| < {:.3e} (dimension {})",
                o.localized_count, o.energy_window, o.matrix_dim
            );
            for e in &o.localized_energies {
                let _ = writeln!(out, "  mode energy {e:.6e}");
            }
            for w in &o.warnings {
                let _ = writeln!(out, "  warning: {w}");
            }
            if let Some(f) = &o.spectra_file {
                let _ = writeln!(out, "  spectrum written to {f}");
            }
            let _ = writeln!(out, "verdict: {}", o.verdict);
        }
        out
    }
}
