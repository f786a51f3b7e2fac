use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Location and spread of a sample of fidelities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    /// `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            n,
            mean,
            std,
            median: median_of_sorted(&sorted),
            min: sorted[0],
            max: sorted[n - 1],
        })
    }
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Median of an unsorted sample; NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    SummaryStats::from_values(values).map_or(f64::NAN, |s| s.median)
}

/// `(F_sgqt − F_sqt)/(1 − F_sqt)`, the fraction of the SQT infidelity removed.
pub fn infidelity_reduction(f_sgqt: f64, f_sqt: f64) -> Result<f64> {
    if !(f_sqt < 1.0) {
        return Err(Error::UndefinedMetric(format!(
            "infidelity reduction needs F_sqt < 1 (got {f_sqt})"
        )));
    }
    Ok((f_sgqt - f_sqt) / (1.0 - f_sqt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_values() {
        assert_eq!(infidelity_reduction(0.9, 0.9).unwrap(), 0.0);
        assert_eq!(infidelity_reduction(1.0, 0.5).unwrap(), 1.0);
        assert!((infidelity_reduction(0.996, 0.95).unwrap() - 0.92).abs() < 1e-12);
        assert!(matches!(
            infidelity_reduction(0.9, 1.0),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn stats() {
        let s = SummaryStats::from_values(&[3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert!(SummaryStats::from_values(&[]).is_none());
        assert_eq!(SummaryStats::from_values(&[0.7]).unwrap().std, 0.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
    }
}
