//! Pointwise field-model primitives: dispersion relation, Bogoliubov
//! coefficients between local and global modes, the non-local kernels `F±`,
//! and the per-site β-norm density.
//!
//! Internal units are `ħ = c = k_c = 1`: wavenumbers are measured in the
//! Compton wavenumber, positions in `1/k_c`, energies in `mc²`. The cutoff
//! `Λ` therefore coincides numerically with the ratio `λ = Λ/k_c`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::quadrature::{integrate_band, QuadratureOptions};

/// Shape of the momentum-space cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CutoffShape {
    /// `‖k‖∞ < Λ` (an interval in one dimension).
    #[default]
    Box,
    /// `‖k‖₂ < Λ`.
    Sphere,
}

impl fmt::Display for CutoffShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutoffShape::Box => "box",
            CutoffShape::Sphere => "sphere",
        })
    }
}

impl FromStr for CutoffShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "box" | "interval" => Ok(CutoffShape::Box),
            "sphere" | "ball" => Ok(CutoffShape::Sphere),
            other => Err(Error::param("shape", format!("must be box or sphere, got {other:?}"))),
        }
    }
}

/// Global model configuration: spatial dimension, cutoff ratio and shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    dimension: usize,
    lambda: f64,
    shape: CutoffShape,
}

impl ModelParams {
    pub fn new(dimension: usize, lambda: f64, shape: CutoffShape) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::param("dimension", "must be 1, 2 or 3"));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::param("lambda", "must lie in (0,1)"));
        }
        Ok(Self {
            dimension,
            lambda,
            shape,
        })
    }

    /// One-dimensional model with the interval cutoff.
    pub fn one_dim(lambda: f64) -> Result<Self> {
        Self::new(1, lambda, CutoffShape::Box)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Cutoff ratio `λ = Λ/k_c`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cutoff wavenumber `Λ` in internal units (equal to `λ`).
    pub fn cutoff(&self) -> f64 {
        self.lambda
    }

    pub fn shape(&self) -> CutoffShape {
        // The interval is the only cutoff in one dimension.
        if self.dimension == 1 {
            CutoffShape::Box
        } else {
            self.shape
        }
    }

    /// Sampling-lattice spacing `π/Λ`.
    pub fn lattice_spacing(&self) -> f64 {
        PI / self.cutoff()
    }

    /// Momentum-space volume of the band.
    pub fn band_volume(&self) -> f64 {
        let c = self.cutoff();
        match (self.shape(), self.dimension) {
            (CutoffShape::Box, n) => (2.0 * c).powi(n as i32),
            (CutoffShape::Sphere, 2) => PI * c * c,
            (CutoffShape::Sphere, _) => 4.0 / 3.0 * PI * c.powi(3),
        }
    }

    /// Whether `k` lies inside the (closed) band.
    pub fn in_band(&self, k: &[f64]) -> bool {
        let c = self.cutoff();
        match self.shape() {
            CutoffShape::Box => k.iter().all(|x| x.abs() <= c),
            CutoffShape::Sphere => norm_sq(k) <= c * c,
        }
    }
}

pub(crate) fn norm_sq(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum()
}

/// `sin(z)/z` with `sinc(0) = 1`.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Relativistic dispersion `ω(k) = √(‖k‖² + 1)`.
pub fn omega(k: &[f64]) -> f64 {
    (1.0 + norm_sq(k)).sqrt()
}

/// Non-relativistic expansion `1 + ‖k‖²/2`.
pub fn omega_nr(k: &[f64]) -> f64 {
    1.0 + 0.5 * norm_sq(k)
}

/// `ω(k) − 1` without cancellation.
pub fn omega_minus_one(k2: f64) -> f64 {
    k2 / ((1.0 + k2).sqrt() + 1.0)
}

/// Bogoliubov coefficients between the local and global ladder operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovCoefficients {
    pub plus: f64,
    pub minus: f64,
}

/// `c±(k) = ½[(1+‖k‖²)^{1/4} ± (1+‖k‖²)^{-1/4}]`.
pub fn bogoliubov_c(k: &[f64]) -> BogoliubovCoefficients {
    bogoliubov_c_sq(norm_sq(k))
}

pub(crate) fn bogoliubov_c_sq(k2: f64) -> BogoliubovCoefficients {
    let root = (1.0 + k2).sqrt();
    let a = root.sqrt();
    // a − 1/a = (√(1+k²) − 1)/a, evaluated without subtraction
    let minus = 0.5 * k2 / ((root + 1.0) * a);
    let plus = 0.5 * (a + 1.0 / a);
    BogoliubovCoefficients { plus, minus }
}

/// Second-order expansions `c₊ ≈ 1`, `c₋ ≈ ‖k‖²/4`.
pub fn bogoliubov_c_second_order(k: &[f64]) -> BogoliubovCoefficients {
    BogoliubovCoefficients {
        plus: 1.0,
        minus: 0.25 * norm_sq(k),
    }
}

/// Which of the two non-local kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSign {
    /// `F₊^Λ(r) = ∫ dk/(2π)ⁿ e^{ik·r}`, the reproducing kernel.
    Plus,
    /// `F₋^Λ(r) = ¼∫ dk/(2π)ⁿ e^{ik·r} ‖k‖²`.
    Minus,
}

/// Evaluates `F±^Λ(r)`. One dimension uses closed forms; higher dimensions
/// integrate over the box band.
pub fn kernel_f(sign: KernelSign, r: &[f64], params: &ModelParams) -> Result<f64> {
    if r.len() != params.dimension() {
        return Err(Error::param("r", "length must equal the model dimension"));
    }
    let cutoff = params.cutoff();
    if params.dimension() == 1 {
        return Ok(match sign {
            KernelSign::Plus => cutoff / PI * sinc(cutoff * r[0]),
            KernelSign::Minus => 0.25 * k2_cos_integral(cutoff, r[0]) / PI,
        });
    }
    if params.shape() == CutoffShape::Sphere {
        return Err(Error::UnsupportedShape("kernel_f in n >= 2"));
    }
    let half_periods = r.iter().map(|x| x.abs()).fold(0.0, f64::max) * cutoff / PI;
    let opts = QuadratureOptions::oscillatory(half_periods);
    // The band is symmetric, so only the cosine part survives.
    match sign {
        KernelSign::Plus => integrate_band(|k| dot(k, r).cos(), params, opts),
        KernelSign::Minus => integrate_band(|k| 0.25 * norm_sq(k) * dot(k, r).cos(), params, opts),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫_0^Λ k² cos(kr) dk`.
fn k2_cos_integral(cutoff: f64, r: f64) -> f64 {
    let z = cutoff * r;
    if z.abs() < 0.1 {
        // Λ³ Σ_j (−1)^j z^{2j} / ((2j)! (2j+3))
        let z2 = z * z;
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 0..12 {
            let jf = j as f64;
            sum += term / (2.0 * jf + 3.0);
            term *= -z2 / ((2.0 * jf + 1.0) * (2.0 * jf + 2.0));
        }
        cutoff.powi(3) * sum
    } else {
        let (s, c) = z.sin_cos();
        cutoff * cutoff * s / r + 2.0 * cutoff * c / (r * r) - 2.0 * s / (r * r * r)
    }
}

/// Result of fitting the polynomial decay envelope of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayEnvelope {
    /// Fitted exponent of `|F(r)| ~ r^exponent`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// Peak locations and magnitudes used in the fit.
    pub peaks: Vec<(f64, f64)>,
}

/// Fits the decay envelope of `|F±^Λ|` along the first axis over
/// `Λr ∈ [z_min, z_max]` using the oscillation peaks on a log-log scale.
pub fn fit_decay_envelope(
    sign: KernelSign,
    params: &ModelParams,
    z_min: f64,
    z_max: f64,
) -> Result<DecayEnvelope> {
    if !(z_min > 0.0 && z_max > z_min) {
        return Err(Error::param("range", "need 0 < z_min < z_max"));
    }
    let cutoff = params.cutoff();
    let n = params.dimension();
    // ~64 samples per oscillation period
    let steps = (((z_max - z_min) / (2.0 * PI)) * 64.0).ceil() as usize + 3;
    let mut samples = Vec::with_capacity(steps);
    let mut r = vec![0.0; n];
    for i in 0..steps {
        let z = z_min + (z_max - z_min) * i as f64 / (steps - 1) as f64;
        r[0] = z / cutoff;
        samples.push((r[0], kernel_f(sign, &r, params)?.abs()));
    }
    let peaks: Vec<(f64, f64)> = samples
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1 > 0.0)
        .map(|w| w[1])
        .collect();
    if peaks.len() < 3 {
        return Err(Error::Precondition("fewer than three envelope peaks in range".into()));
    }
    let xs: Vec<f64> = peaks.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = peaks.iter().map(|p| p.1.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(DecayEnvelope {
        exponent: fit.slope,
        exponent_stderr: fit.slope_stderr,
        peaks,
    })
}

/// Per-lattice-site β-norm density `d(λ) = (π/Λ)ⁿ ∫_band dk/(2π)ⁿ c₋(k)²`.
pub fn beta_density(params: &ModelParams) -> Result<f64> {
    let n = params.dimension() as i32;
    let integral = integrate_band(
        |k| {
            let c = bogoliubov_c(k);
            c.minus * c.minus
        },
        params,
        QuadratureOptions::default(),
    )?;
    Ok((PI / params.cutoff()).powi(n) * integral)
}
