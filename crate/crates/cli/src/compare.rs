//! Side-by-side comparison of two run directories.

use std::fmt::Write;

use sgqt_core::bench::{infidelity_reduction, ConditionSummary, SummaryStats};

use crate::output::SummaryFile;
use crate::CliError;

/// One table row: a condition at a checkpoint or at the end of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub condition: String,
    /// Iteration of the row; `None` for the final row.
    pub checkpoint: Option<usize>,
    pub photons_a: Option<f64>,
    pub fidelity_a: Option<f64>,
    pub photons_b: Option<f64>,
    pub fidelity_b: Option<f64>,
    /// Infidelity reduction of A relative to B.
    pub reduction: Option<f64>,
}

fn median(s: Option<SummaryStats>) -> Option<f64> {
    s.map(|s| s.median)
}

/// Median fidelity and mean photons of the leading estimator of a condition.
fn headline(c: &ConditionSummary) -> (Option<f64>, Option<f64>) {
    match c.sgqt_pooled {
        Some(s) => (c.sgqt_photons_mean, Some(s.median)),
        None => (c.sqt_photons_mean, median(c.sqt_pooled)),
    }
}

fn row(
    condition: &str,
    checkpoint: Option<usize>,
    a: (Option<f64>, Option<f64>),
    b: (Option<f64>, Option<f64>),
) -> CompareRow {
    let reduction = match (a.1, b.1) {
        (Some(fa), Some(fb)) => infidelity_reduction(fa, fb).ok(),
        _ => None,
    };
    CompareRow {
        condition: condition.to_string(),
        checkpoint,
        photons_a: a.0,
        fidelity_a: a.1,
        photons_b: b.0,
        fidelity_b: b.1,
        reduction,
    }
}

/// Pairs the conditions both runs share.
///
/// Runs of different Hilbert-space dimension are refused.
pub fn compare(a: &SummaryFile, b: &SummaryFile) -> Result<Vec<CompareRow>, CliError> {
    if a.dimension != b.dimension {
        return Err(CliError::Runtime(format!(
            "cannot compare a dimension-{} run ({}) with a dimension-{} run ({})",
            a.dimension, a.experiment, b.dimension, b.experiment
        )));
    }
    let mut rows = Vec::new();
    for ca in &a.conditions {
        let Some(cb) = b.conditions.iter().find(|c| c.condition == ca.condition) else {
            continue;
        };
        for pa in &ca.checkpoints {
            if let Some(pb) = cb.checkpoints.iter().find(|p| p.iteration == pa.iteration) {
                rows.push(row(
                    &ca.condition,
                    Some(pa.iteration),
                    (pa.sgqt_photons_mean, median(pa.sgqt)),
                    (pb.sgqt_photons_mean, median(pb.sgqt)),
                ));
            }
        }
        rows.push(row(&ca.condition, None, headline(ca), headline(cb)));
    }
    if rows.is_empty() {
        return Err(CliError::Runtime(format!(
            "runs {} and {} share no condition",
            a.experiment, b.experiment
        )));
    }
    Ok(rows)
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

pub fn format_table(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>10} {:>11} {:>10} {:>11} {:>10} {:>10}",
        "condition", "checkpoint", "photons_a", "fid_a", "photons_b", "fid_b", "reduction"
    );
    for r in rows {
        let checkpoint = r
            .checkpoint
            .map_or_else(|| "final".to_string(), |k| k.to_string());
        let _ = writeln!(
            out,
            "{:<24} {:>10} {:>11} {:>10} {:>11} {:>10} {:>10}",
            r.condition,
            checkpoint,
            cell(r.photons_a, 1),
            cell(r.fidelity_a, 6),
            cell(r.photons_b, 1),
            cell(r.fidelity_b, 6),
            cell(r.reduction, 4),
        );
    }
    out
}
