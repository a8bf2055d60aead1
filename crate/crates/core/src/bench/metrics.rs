//! Error metrics and boxplot statistics.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(y: &DVector<f64>, y_hat: &DVector<f64>) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::invalid(format!(
            "targets have {} entries, predictions {}",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::UndefinedMetric("no samples".into()));
    }
    Ok(())
}

/// `sum (y - y_hat)^2 / N`.
pub fn mse(y: &DVector<f64>, y_hat: &DVector<f64>) -> Result<f64> {
    check_pair(y, y_hat)?;
    Ok((y - y_hat).norm_squared() / y.len() as f64)
}

/// Unbiased sample variance.
pub fn variance(y: &DVector<f64>) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::UndefinedMetric(
            "variance needs at least two samples".into(),
        ));
    }
    let m = y.mean();
    Ok(y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64)
}

/// `MSE / Var(tau)`.
pub fn nmse(tau: &DVector<f64>, y_hat: &DVector<f64>) -> Result<f64> {
    check_pair(tau, y_hat)?;
    let var = variance(tau)?;
    if var == 0.0 {
        return Err(Error::UndefinedMetric("targets have zero variance".into()));
    }
    Ok(mse(tau, y_hat)? / var)
}

/// Sum of the per-joint MSEs.
pub fn gmse(per_joint_mse: &[f64]) -> f64 {
    per_joint_mse.iter().sum()
}

/// Boxplot summary: quartiles by linear interpolation, whiskers at the most
/// extreme data within 1.5 IQR of the box, everything beyond is an outlier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(quantile_sorted(&v, 0.5))
}

impl BoxStats {
    /// `None` for an empty sample; NaNs are ignored.
    pub fn from_values(values: &[f64]) -> Option<BoxStats> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&v, 0.25);
        let q3 = quantile_sorted(&v, 0.75);
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
        Some(BoxStats {
            count: v.len(),
            min: v[0],
            q1,
            median: quantile_sorted(&v, 0.5),
            q3,
            max: v[v.len() - 1],
            whisker_low: inside.first().copied().unwrap_or(q1),
            whisker_high: inside.last().copied().unwrap_or(q3),
            outliers: v.into_iter().filter(|x| *x < lo || *x > hi).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_mean_predictions() {
        let y = DVector::from_vec(vec![1.0, 2.0, 4.0, 7.0]);
        assert_eq!(nmse(&y, &y).unwrap(), 0.0);
        let m = DVector::from_element(4, y.mean());
        let n = 4.0;
        assert!((nmse(&y, &m).unwrap() - (n - 1.0) / n).abs() < 1e-14);
    }

    #[test]
    fn undefined_cases() {
        let c = DVector::from_element(3, 2.0);
        assert!(matches!(nmse(&c, &c), Err(Error::UndefinedMetric(_))));
        let one = DVector::from_element(1, 2.0);
        assert!(nmse(&one, &one).is_err());
        assert!(mse(&c, &one).is_err());
    }

    #[test]
    fn boxplot_statistics() {
        let v = [1.0, 2.0, 3.0, 4.0, 100.0];
        let b = BoxStats::from_values(&v).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 4.0));
        assert!(BoxStats::from_values(&[]).is_none());
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), Some(2.5));
    }
}
