//! Shannon sampling structure of the band: sampling lattices
//! `x_m = π(m − α)/Λ`, the sinc reconstruction kernel, the bandlimited
//! commutator and resampling between shifted lattices.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{sinc, CutoffShape, ModelParams};
use crate::quadrature::integrate_interval;

/// Default half-width of a sample window, in lattice spacings.
pub const DEFAULT_WINDOW_RADIUS: i64 = 512;

/// The point set `{π(m − α)/Λ : m ∈ Zⁿ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingLattice {
    params: ModelParams,
    offset: Vec<f64>,
}

impl SamplingLattice {
    pub fn new(params: ModelParams, offset: &[f64]) -> Result<Self> {
        if offset.len() != params.dimension() {
            return Err(Error::param("offset", "length must equal the model dimension"));
        }
        if offset.iter().any(|a| !(0.0..1.0).contains(a)) {
            return Err(Error::param("offset", "components must lie in [0,1)"));
        }
        Ok(Self {
            params,
            offset: offset.to_vec(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn spacing(&self) -> f64 {
        self.params.lattice_spacing()
    }

    pub fn point(&self, m: &[i64]) -> Vec<f64> {
        let a = self.spacing();
        m.iter().zip(&self.offset).map(|(&mi, al)| a * (mi as f64 - al)).collect()
    }
}

/// `K(x, x′) = Π_i sinc[Λ(xⁱ − x′ⁱ)]`.
pub fn reconstruction_kernel(x: &[f64], x_prime: &[f64], params: &ModelParams) -> Result<f64> {
    if params.shape() == CutoffShape::Sphere {
        return Err(Error::UnsupportedShape("sampling reconstruction"));
    }
    check_dims(x, x_prime, params)?;
    let c = params.cutoff();
    Ok(x.iter().zip(x_prime).map(|(a, b)| sinc(c * (a - b))).product())
}

fn check_dims(x: &[f64], y: &[f64], params: &ModelParams) -> Result<()> {
    if x.len() != params.dimension() || y.len() != params.dimension() {
        return Err(Error::param("position", "length must equal the model dimension"));
    }
    Ok(())
}

/// The c-number `[Φ(x), Π(x′)]/i = ∫_band dk/(2π)ⁿ e^{ik·(x−x′)}`.
pub fn field_commutator(x: &[f64], x_prime: &[f64], params: &ModelParams) -> Result<f64> {
    check_dims(x, x_prime, params)?;
    let c = params.cutoff();
    let n = params.dimension();
    match params.shape() {
        CutoffShape::Box => {
            let k = reconstruction_kernel(x, x_prime, params)?;
            Ok((c / PI).powi(n as i32) * k)
        }
        CutoffShape::Sphere => {
            let r = x.iter().zip(x_prime).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let z = c * r;
            if n == 3 {
                // (sin z − z cos z)/(2π² r³), with series near 0
                if z < 1e-2 {
                    let z2 = z * z;
                    Ok(c.powi(3) / (2.0 * PI * PI) * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0))
                } else {
                    Ok((z.sin() - z * z.cos()) / (2.0 * PI * PI * r.powi(3)))
                }
            } else {
                // Λ J₁(z)/(2πr) = Λ²/(4π)·(2J₁(z)/z)
                let j1_over_z = if z < 1e-6 {
                    0.5
                } else {
                    let j1 = integrate_interval(|t| (t - z * t.sin()).cos(), 0.0, PI, 32, 1e-14)? / PI;
                    j1 / z
                };
                Ok(c * c / (2.0 * PI) * j1_over_z)
            }
        }
    }
}

/// `⟨y′|y⟩` of the band-projected position kets, equal to the commutator
/// kernel; `Λ/π` at coincidence instead of a delta function.
pub fn frame_overlap(y_prime: &[f64], y: &[f64], params: &ModelParams) -> Result<f64> {
    field_commutator(y_prime, y, params)
}

/// Samples of a 1-D bandlimited function on a finite window
/// `m ∈ [lo, hi]` of a sampling lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedFunction {
    lattice: SamplingLattice,
    lo: i64,
    samples: Vec<Complex64>,
}

/// Reconstructed value with an estimate of the window-truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub value: Complex64,
    pub truncation_estimate: f64,
}

impl BandlimitedFunction {
    pub fn new(lattice: SamplingLattice, lo: i64, samples: Vec<Complex64>) -> Result<Self> {
        if lattice.params().dimension() != 1 {
            return Err(Error::param("lattice", "bandlimited functions are one-dimensional"));
        }
        if samples.is_empty() {
            return Err(Error::param("window", "sample window is empty"));
        }
        if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::param("samples", "must be finite"));
        }
        Ok(Self { lattice, lo, samples })
    }

    /// Samples `f` on `m ∈ [lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(lattice: SamplingLattice, lo: i64, hi: i64, f: F) -> Result<Self> {
        if hi < lo {
            return Err(Error::param("window", "sample window is empty"));
        }
        let samples = (lo..=hi).map(|m| f(lattice.point(&[m])[0])).collect();
        Self::new(lattice, lo, samples)
    }

    /// `√(Λ/π)·sinc[Λ(x − x₀)]`, the unit-norm sample-point wavefunction.
    pub fn sample_point_state(lattice: SamplingLattice, x0: f64, radius: i64) -> Result<Self> {
        let c = lattice.params().cutoff();
        let amp = (c / PI).sqrt();
        Self::from_fn(lattice, -radius, radius, |x| Complex64::new(amp * sinc(c * (x - x0)), 0.0))
    }

    pub fn lattice(&self) -> &SamplingLattice {
        &self.lattice
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.samples.len() as i64 - 1)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample(&self, m: i64) -> Option<Complex64> {
        let i = m.checked_sub(self.lo)?;
        usize::try_from(i).ok().and_then(|i| self.samples.get(i).copied())
    }

    pub fn point(&self, m: i64) -> f64 {
        self.lattice.point(&[m])[0]
    }

    /// `(π/Λ)Σ_m |f_m|²`, the exact `L²` norm² of the truncated expansion.
    pub fn norm_sq(&self) -> f64 {
        self.lattice.spacing() * self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Truncated sampling sum `Σ_m f_m K(x, x_m)`.
    pub fn reconstruct(&self, x: f64) -> Result<Reconstruction> {
        if self.samples.is_empty() {
            return Err(Error::param("window", "sample window is empty"));
        }
        let c = self.lattice.params().cutoff();
        let a = self.lattice.spacing();
        // x = a(t − α); a retained point (up to rounding of x) returns its sample
        let t = x / a + self.lattice.offset()[0];
        let m = t.round();
        if (t - m).abs() <= 1e-12 * m.abs().max(1.0) {
            if let Some(value) = self.sample(m as i64) {
                return Ok(Reconstruction {
                    value,
                    truncation_estimate: self.truncation_estimate(),
                });
            }
        }
        let mut value = Complex64::new(0.0, 0.0);
        for (i, f) in self.samples.iter().enumerate() {
            let xm = self.point(self.lo + i as i64);
            value += f * sinc(c * (x - xm));
        }
        Ok(Reconstruction {
            value,
            truncation_estimate: self.truncation_estimate(),
        })
    }

    /// Tail estimate assuming the samples continue with `1/|m|` decay past
    /// the window: `(|f_lo| + |f_hi|)/π`, which scales as `1/R` for sinc-like
    /// functions of window radius `R`.
    pub fn truncation_estimate(&self) -> f64 {
        let n = self.samples.len();
        let edge = |range: std::ops::Range<usize>| {
            self.samples[range].iter().map(|v| v.norm()).fold(0.0, f64::max)
        };
        let k = n.min(4);
        (edge(0..k) + edge(n - k..n)) / PI
    }

    /// Writes the line-oriented record described in the README.
    pub fn to_record(&self) -> String {
        let p = self.lattice.params();
        let (lo, hi) = self.window();
        let mut out = String::new();
        let _ = writeln!(out, "params dimension={} lambda={:?} shape={}", p.dimension(), p.lambda(), p.shape());
        let _ = writeln!(out, "offset {:?}", self.lattice.offset()[0]);
        let _ = writeln!(out, "window {lo} {hi}");
        for (i, v) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "sample {} {:?} {:?}", self.lo + i as i64, v.re, v.im);
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::param("record", msg);
        let mut params = None;
        let mut offset = None;
        let mut window = None;
        let mut samples: Vec<(i64, Complex64)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| bad(format!("line {}: bad number {s:?}", ln + 1)))
            };
            let int = |s: &str| -> Result<i64> {
                s.parse::<i64>().map_err(|_| bad(format!("line {}: bad integer {s:?}", ln + 1)))
            };
            match tag {
                "params" => {
                    let (mut dim, mut lambda, mut shape) = (None, None, CutoffShape::Box);
                    for kv in rest {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| bad(format!("line {}: expected key=value", ln + 1)))?;
                        match k {
                            "dimension" => dim = Some(int(v)? as usize),
                            "lambda" => lambda = Some(num(v)?),
                            "shape" => shape = v.parse()?,
                            other => return Err(bad(format!("line {}: unknown key {other:?}", ln + 1))),
                        }
                    }
                    let dim = dim.ok_or_else(|| bad("params line lacks dimension".into()))?;
                    let lambda = lambda.ok_or_else(|| bad("params line lacks lambda".into()))?;
                    params = Some(ModelParams::new(dim, lambda, shape)?);
                }
                "offset" if rest.len() == 1 => offset = Some(num(rest[0])?),
                "window" if rest.len() == 2 => window = Some((int(rest[0])?, int(rest[1])?)),
                "sample" if rest.len() == 3 => {
                    samples.push((int(rest[0])?, Complex64::new(num(rest[1])?, num(rest[2])?)))
                }
                _ => return Err(bad(format!("line {}: unrecognized record {line:?}", ln + 1))),
            }
        }
        let params = params.ok_or_else(|| bad("missing params line".into()))?;
        let offset = offset.ok_or_else(|| bad("missing offset line".into()))?;
        let (lo, hi) = window.ok_or_else(|| bad("missing window line".into()))?;
        if hi < lo {
            return Err(Error::param("window", "sample window is empty"));
        }
        let len = (hi - lo + 1) as usize;
        let mut values = vec![None; len];
        for (m, v) in samples {
            if m < lo || m > hi {
                return Err(bad(format!("sample index {m} outside window")));
            }
            let slot = &mut values[(m - lo) as usize];
            if slot.is_some() {
                return Err(bad(format!("duplicate sample index {m}")));
            }
            *slot = Some(v);
        }
        let values: Vec<Complex64> = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| bad(format!("missing sample {}", lo + i as i64))))
            .collect::<Result<_>>()?;
        Self::new(SamplingLattice::new(params, &[offset])?, lo, values)
    }
}

/// Resamples `f` onto the lattice with offset `new_offset` over the same
/// index window: `g_m′ = Σ_m f_m K(x′_m′, x_m)`.
pub fn interlattice_transform(f: &BandlimitedFunction, new_offset: f64) -> Result<BandlimitedFunction> {
    let params = *f.lattice.params();
    let target = SamplingLattice::new(params, &[new_offset])?;
    if new_offset == f.lattice.offset()[0] {
        return BandlimitedFunction::new(target, f.lo, f.samples.clone());
    }
    let c = params.cutoff();
    let a = target.spacing();
    let (lo, hi) = f.window();
    // K depends only on m′ − m, so tabulate it once.
    let span = hi - lo;
    let shift = f.lattice.offset()[0] - new_offset;
    let kernel: Vec<f64> = (-span..=span).map(|d| sinc(c * a * (d as f64 + shift))).collect();
    let samples = (lo..=hi)
        .map(|mp| {
            f.samples
                .iter()
                .enumerate()
                .map(|(i, v)| v * kernel[(mp - (lo + i as i64) + span) as usize])
                .sum()
        })
        .collect();
    BandlimitedFunction::new(target, lo, samples)
}
