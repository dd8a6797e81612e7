//! Error measures and log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Invalid("error measures need at least one value".into()));
    }
    Ok(())
}

/// Root-mean-square error normalized by the range of the reference `y`.
pub fn nrmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return Err(Error::ZeroRange);
    }
    let mse = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64;
    Ok(mse.sqrt() / (hi - lo))
}

/// Largest absolute difference.
pub fn linf(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Least-squares line through `(log h, log e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

pub fn fit_loglog(h: &[f64], e: &[f64]) -> Result<SlopeFit> {
    check_lengths(h, e)?;
    if h.len() < 2 {
        return Err(Error::Invalid("a slope needs at least two levels".into()));
    }
    if h.iter().chain(e).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Invalid("log-log fit needs positive finite values".into()));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("log-log fit needs distinct spacings".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}
