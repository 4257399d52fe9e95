//! Least-squares fits used to recover power laws in λ.

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::param("series", "x and y lengths differ"));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::param("series", "need at least two points"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NumericalDegeneracy("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let s2 = sse / (nf - 2.0);
        let se_slope = (s2 / sxx).sqrt();
        let se_int = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
        (se_slope, se_int)
    } else {
        (0.0, 0.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        r_squared,
    })
}

/// Power law `value ≈ prefactor·λ^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub exponent_stderr: f64,
    /// Standard error of the prefactor, propagated from the log intercept.
    pub prefactor_stderr: f64,
}

/// Fits `ln value = ln prefactor + exponent·ln λ` over `(λ, value)` rows.
pub fn fit_exponent(rows: &[(f64, f64)]) -> Result<ExponentFit> {
    if rows.len() < 4 {
        return Err(Error::param("series", "need at least 4 rows"));
    }
    let bad: Vec<String> = rows
        .iter()
        .enumerate()
        .filter(|(_, (l, v))| !(*l > 0.0 && *v > 0.0 && l.is_finite() && v.is_finite()))
        .map(|(i, (l, v))| format!("row {i} (lambda={l}, value={v})"))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Domain(format!(
            "power-law fit needs strictly positive values; offending: {}",
            bad.join(", ")
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let prefactor = fit.intercept.exp();
    Ok(ExponentFit {
        exponent: fit.slope,
        prefactor,
        exponent_stderr: fit.slope_stderr,
        prefactor_stderr: prefactor * fit.intercept_stderr,
    })
}
