//! Commensurate finite discretization of the Bogoliubov map between the
//! local site operators `b_m` and the band modes `a_k`:
//! `a_k = Σ_m (α_km b_m + β_km b_m†)`.
//!
//! `M` sites `x_m = πm/Λ` are paired with `M` momenta on the half-open grid
//! `k_j = −Λ + 2Λj/M`, so `F_jm = e^{−ik_j x_m}/√M` is unitary and `FFᵀ` is
//! the parity permutation `k ↦ −k`. With `α = diag(c₊)F`, `β = diag(c₋)F` both
//! validity conditions then hold to rounding.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{beta_density, bogoliubov_c, ModelParams};
use crate::fit::linear_fit;
use crate::gaussian::{log_negativity, CovarianceMatrix};
use crate::quadrature::{integrate_band, QuadratureOptions};

pub type CMatrix = DMatrix<Complex64>;

/// Threshold on `E_N` (nats) separating numerical zero from entanglement.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovPair {
    params: ModelParams,
    momenta: Vec<f64>,
    sites: Vec<f64>,
    pub alpha: CMatrix,
    pub beta: CMatrix,
}

pub fn build_pair(sites: usize, params: &ModelParams) -> Result<BogoliubovPair> {
    if sites < 2 {
        return Err(Error::param("sites", "must be at least 2"));
    }
    if params.dimension() != 1 {
        return Err(Error::param("dimension", "the discretized pair is one-dimensional"));
    }
    let c = params.cutoff();
    let m = sites as f64;
    let momenta: Vec<f64> = (0..sites).map(|j| -c + 2.0 * c * j as f64 / m).collect();
    let xs: Vec<f64> = (0..sites).map(|i| PI * i as f64 / c).collect();
    let norm = 1.0 / m.sqrt();
    // k_j x_m = π(2j/M − 1)m, reduced exactly in integer arithmetic
    let f = CMatrix::from_fn(sites, sites, |j, i| {
        let num = ((2 * j * i) as i128 - (sites * i) as i128).rem_euclid(2 * sites as i128);
        Complex64::from_polar(norm, -PI * num as f64 / m)
    });
    let cs: Vec<_> = momenta.iter().map(|&k| bogoliubov_c(&[k])).collect();
    let alpha = CMatrix::from_fn(sites, sites, |j, i| f[(j, i)] * cs[j].plus);
    let beta = CMatrix::from_fn(sites, sites, |j, i| f[(j, i)] * cs[j].minus);
    Ok(BogoliubovPair {
        params: *params,
        momenta,
        sites: xs,
        alpha,
        beta,
    })
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn inf_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖αα† − ββ† − 1‖∞` and `‖αβᵀ − βαᵀ‖∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityResiduals {
    pub canonical: f64,
    pub symmetric: f64,
}

impl BogoliubovPair {
    pub fn modes(&self) -> usize {
        self.momenta.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.params.lattice_spacing()
    }

    pub fn validity(&self) -> ValidityResiduals {
        let n = self.modes();
        let a = &self.alpha;
        let b = &self.beta;
        let canonical = a * a.adjoint() - b * b.adjoint() - CMatrix::identity(n, n);
        let symmetric = a * b.transpose() - b * a.transpose();
        ValidityResiduals {
            canonical: inf_norm(&canonical),
            symmetric: inf_norm(&symmetric),
        }
    }

    /// `Σ_jm |β_jm|²` of the discrete matrix.
    pub fn beta_hs_norm(&self) -> f64 {
        self.beta.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `α⁻¹β`, checked for conditioning and symmetry.
pub fn mixing_matrix(pair: &BogoliubovPair) -> Result<CMatrix> {
    let sv = pair.alpha.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > 1e8 {
        return Err(Error::NumericalDegeneracy(format!("α has condition number {cond:e}")));
    }
    let z = pair
        .alpha
        .clone()
        .lu()
        .solve(&pair.beta)
        .ok_or_else(|| Error::NumericalDegeneracy("α is singular".into()))?;
    let asym = max_abs(&(&z - z.transpose()));
    if asym > 1e-10 {
        return Err(Error::NumericalDegeneracy(format!("α⁻¹β is not symmetric (residual {asym:e})")));
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Entangled,
    Separable,
}

/// Two-mode Gaussian decision rule: entangled iff `E_N > 1e-12`.
pub fn separability_witness(cov: &CovarianceMatrix) -> Result<Verdict> {
    Ok(if log_negativity(cov)? > ENTANGLEMENT_THRESHOLD {
        Verdict::Entangled
    } else {
        Verdict::Separable
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequivalenceRow {
    pub sites: usize,
    /// `Σ_m ∫_band dk/2π |β^Λ(k, m)|²`.
    pub total: f64,
    /// `Σ_jm |β_jm|²` of the discrete pair.
    pub discrete_hs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequivalenceReport {
    pub rows: Vec<InequivalenceRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub beta_density: f64,
    /// `slope / beta_density`.
    pub slope_ratio: f64,
}

/// Total β-norm of the band-limited coefficients
/// `β^Λ(k, m) = √(π/Λ) c₋(k) e^{−ik x_m}` summed over the sites of each pair,
/// and its linear fit against the site count.
pub fn inequivalence_diagnostic(params: &ModelParams, site_counts: &[usize]) -> Result<InequivalenceReport> {
    if site_counts.len() < 2 || site_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("site_counts", "need at least two strictly increasing counts"));
    }
    let scale = params.lattice_spacing();
    let mut rows = Vec::with_capacity(site_counts.len());
    for &m in site_counts {
        let pair = build_pair(m, params)?;
        let mut total = 0.0;
        for &x in pair.sites() {
            total += integrate_band(
                |k| {
                    let c = bogoliubov_c(k);
                    let b = Complex64::from_polar(scale.sqrt() * c.minus, -k[0] * x);
                    b.norm_sqr()
                },
                params,
                QuadratureOptions::default(),
            )?;
        }
        rows.push(InequivalenceRow {
            sites: m,
            total,
            discrete_hs: pair.beta_hs_norm(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.sites as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.total).collect();
    let fit = linear_fit(&xs, &ys)?;
    let d = beta_density(params)?;
    Ok(InequivalenceReport {
        rows,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        beta_density: d,
        slope_ratio: fit.slope / d,
    })
}
