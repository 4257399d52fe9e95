//! Single-particle localization in the band: the position POVM `P_Δ`, its
//! failure to be a projector, the position-momentum uncertainty of
//! bandlimited wavepackets and their Schrödinger-regime evolution.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{omega, omega_nr, sinc, ModelParams};
use crate::quadrature::{integrate_interval, GaussLegendre};
use crate::sampling::{BandlimitedFunction, SamplingLattice};

/// Region `Δ` of the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Empty,
    Interval { lo: f64, hi: f64 },
    WholeLine,
}

impl Region {
    /// `[lo, hi]`; empty when `lo == hi`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(Error::param("region", "need finite bounds with lo <= hi"));
        }
        Ok(if lo == hi { Region::Empty } else { Region::Interval { lo, hi } })
    }
}

const NORM_TOL: f64 = 1e-8;

/// `⟨ψ|P_Δ|ψ⟩ = ∫_Δ |ψ(y)|² dy` in the one-particle sector.
pub fn povm_expectation(psi: &BandlimitedFunction, region: &Region) -> Result<f64> {
    let norm = psi.norm_sq();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Precondition(format!("wavefunction is not normalized: ∫|ψ|² = {norm}")));
    }
    match *region {
        Region::Empty => Ok(0.0),
        Region::WholeLine => Ok(norm),
        Region::Interval { lo, hi } => {
            let a = psi.lattice().spacing();
            let panels = ((hi - lo) / (0.5 * a)).ceil().max(1.0) as usize;
            let h = (hi - lo) / panels as f64;
            let density = |y: f64| psi.reconstruct(y).map(|r| r.value.norm_sqr()).unwrap_or(f64::NAN);
            let mut total = 0.0;
            for p in 0..panels {
                let a0 = lo + h * p as f64;
                total += integrate_interval(density, a0, a0 + h, 16, 1e-12)?;
            }
            Ok(total)
        }
    }
}

/// Matrix `P_mm′ = ∫_Δ e_m(y) e_m′(y) dy` of the POVM element on the window
/// `[lo, hi]`, with `e_m = √(Λ/π) sinc[Λ(y − x_m)]` the orthonormal sampling
/// functions (equivalently `(Λ/π)∫_Δ K(x_m, y)K(y, x_m′)`).
pub fn povm_matrix(region: &Region, lattice: &SamplingLattice, window: (i64, i64)) -> Result<DMatrix<f64>> {
    let (lo, hi) = window;
    if hi < lo {
        return Err(Error::param("window", "sample window is empty"));
    }
    let size = (hi - lo + 1) as usize;
    let a = lattice.spacing();
    match *region {
        Region::Empty => Ok(DMatrix::zeros(size, size)),
        Region::WholeLine => Ok(DMatrix::identity(size, size)),
        Region::Interval { lo: y0, hi: y1 } => {
            let (x_lo, x_hi) = (lattice.point(&[lo])[0], lattice.point(&[hi])[0]);
            if x_lo > y0 - 2.0 * a || x_hi < y1 + 2.0 * a {
                return Err(Error::Precondition(
                    "sample window must enclose the region plus two lattice spacings".into(),
                ));
            }
            let c = lattice.params().cutoff();
            let amp = (c / PI).sqrt();
            let panels = ((y1 - y0) / (0.5 * a)).ceil().max(1.0) as usize;
            let rule = GaussLegendre::cached(24);
            let h = (y1 - y0) / panels as f64;
            let mut ys = Vec::with_capacity(panels * rule.len());
            let mut ws = Vec::with_capacity(panels * rule.len());
            for p in 0..panels {
                let mid = y0 + h * (p as f64 + 0.5);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    ys.push(mid + 0.5 * h * x);
                    ws.push(0.5 * h * w);
                }
            }
            // B_qm = √w_q e_m(y_q), P = BᵀB
            let b = DMatrix::from_fn(ys.len(), size, |q, m| {
                let xm = lattice.point(&[lo + m as i64])[0];
                ws[q].sqrt() * amp * sinc(c * (ys[q] - xm))
            });
            Ok(b.transpose() * b)
        }
    }
}

/// Operator norm `‖P_Δ² − P_Δ‖` on the window, i.e. `max |μ² − μ|` over
/// the eigenvalues of [`povm_matrix`].
pub fn povm_nonidempotency(region: &Region, lattice: &SamplingLattice, window: (i64, i64)) -> Result<f64> {
    if matches!(region, Region::Empty) {
        return Err(Error::param("region", "must be nonempty"));
    }
    let p = povm_matrix(region, lattice, window)?;
    let eig = p.symmetric_eigenvalues();
    Ok(eig.iter().map(|mu| (mu * mu - mu).abs()).fold(0.0, f64::max))
}

/// Single-particle momentum-space wavefunction on the band, held on a fixed
/// Gauss-Legendre grid together with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumWavefunction {
    params: ModelParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
    /// `ψ̃` at `k = −Λ` and `k = +Λ`.
    edges: [Complex64; 2],
}

const GRID_PANELS: usize = 16;
const GRID_NODES: usize = 32;

impl MomentumWavefunction {
    /// Tabulates `f` and its derivative `df`, normalized so that
    /// `∫ dk/2π |ψ̃|² = 1`.
    pub fn from_fn<F, D>(params: ModelParams, f: F, df: D) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
        D: Fn(f64) -> Complex64,
    {
        if params.dimension() != 1 {
            return Err(Error::param("params", "momentum wavefunctions are one-dimensional"));
        }
        let c = params.cutoff();
        let rule = GaussLegendre::cached(GRID_NODES);
        let h = 2.0 * c / GRID_PANELS as f64;
        let mut nodes = Vec::with_capacity(GRID_PANELS * GRID_NODES);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..GRID_PANELS {
            let mid = -c + h * (p as f64 + 0.5);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        let mut values: Vec<Complex64> = nodes.iter().map(|&k| f(k)).collect();
        let mut derivs: Vec<Complex64> = nodes.iter().map(|&k| df(k)).collect();
        let mut edges = [f(-c), f(c)];
        if values.iter().chain(&derivs).chain(&edges).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::param("psi", "values must be finite on the band"));
        }
        let norm2: f64 = weights.iter().zip(&values).map(|(w, v)| w * v.norm_sqr()).sum::<f64>() / (2.0 * PI);
        if !(norm2 > 0.0) {
            return Err(Error::param("psi", "wavefunction vanishes on the band"));
        }
        let s = 1.0 / norm2.sqrt();
        values.iter_mut().chain(derivs.iter_mut()).chain(edges.iter_mut()).for_each(|v| *v *= s);
        Ok(Self {
            params,
            nodes,
            weights,
            values,
            derivs,
            edges,
        })
    }

    /// `ψ̃ ∝ cos(πk/2Λ)`, vanishing at the band edges.
    pub fn cosine(params: ModelParams) -> Result<Self> {
        let q = PI / (2.0 * params.cutoff());
        Self::from_fn(
            params,
            |k| Complex64::new((q * k).cos(), 0.0),
            |k| Complex64::new(-q * (q * k).sin(), 0.0),
        )
    }

    /// Flat `ψ̃` over the band (the sample-point state at the origin).
    pub fn boxcar(params: ModelParams) -> Result<Self> {
        Self::from_fn(params, |_| Complex64::new(1.0, 0.0), |_| Complex64::new(0.0, 0.0))
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `∫ dk/2π |ψ̃|²`.
    pub fn norm_sq(&self) -> f64 {
        self.expect(|_, v, _| v.norm_sqr())
    }

    fn expect<F: Fn(f64, Complex64, Complex64) -> f64>(&self, f: F) -> f64 {
        let s: f64 = (0..self.nodes.len())
            .map(|i| self.weights[i] * f(self.nodes[i], self.values[i], self.derivs[i]))
            .sum();
        s / (2.0 * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainty {
    /// `ΔX`; `None` when the band-edge values make it divergent.
    pub delta_x: Option<f64>,
    pub delta_p: f64,
    pub product: Option<f64>,
    pub edge_divergent: bool,
}

/// `ΔX` from the weak form of `X = i d/dk` and `ΔP` from `k`, checking
/// `ΔP ≤ 2Λ` and `ΔXΔP ≥ ½`.
pub fn uncertainty_check(psi: &MomentumWavefunction) -> Result<Uncertainty> {
    let mean_p = psi.expect(|k, v, _| k * v.norm_sqr());
    let mean_p2 = psi.expect(|k, v, _| k * k * v.norm_sqr());
    let delta_p = (mean_p2 - mean_p * mean_p).max(0.0).sqrt();
    let bound = 2.0 * psi.params.cutoff();
    if delta_p > bound {
        return Err(Error::NumericalDegeneracy(format!("ΔP = {delta_p} exceeds 2Λ = {bound}")));
    }
    let peak = psi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge_divergent = psi.edges.iter().any(|v| v.norm() > 1e-8 * peak);
    if edge_divergent {
        return Ok(Uncertainty {
            delta_x: None,
            delta_p,
            product: None,
            edge_divergent,
        });
    }
    // ⟨X⟩ = ∫ ψ̃* i ψ̃′, ⟨X²⟩ = ∫ |ψ̃′|² (boundary terms vanish)
    let mean_x = psi.expect(|_, v, d| (v.conj() * Complex64::i() * d).re);
    let mean_x2 = psi.expect(|_, _, d| d.norm_sqr());
    let delta_x = (mean_x2 - mean_x * mean_x).max(0.0).sqrt();
    let product = delta_x * delta_p;
    if product < 0.5 - 1e-9 {
        return Err(Error::NumericalDegeneracy(format!("ΔXΔP = {product} below 1/2")));
    }
    Ok(Uncertainty {
        delta_x: Some(delta_x),
        delta_p,
        product: Some(product),
        edge_divergent,
    })
}

/// Dispersion used for time evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    /// `ω = √(1 + k²)`.
    Exact,
    /// `ω = 1 + k²/2`, the rest-energy-shifted Schrödinger Hamiltonian.
    NonRelativistic,
}

type Phase = fn(f64) -> f64;

/// `ψ̃(k) e^{−iω(k)t}` under the chosen dispersion.
pub fn evolve(psi: &MomentumWavefunction, t: f64, mode: Dispersion) -> MomentumWavefunction {
    let (w, dw): (Phase, Phase) = match mode {
        Dispersion::Exact => (|k| omega(&[k]), |k| k / omega(&[k])),
        Dispersion::NonRelativistic => (|k| omega_nr(&[k]), |k| k),
    };
    let mut out = psi.clone();
    for i in 0..out.nodes.len() {
        let k = out.nodes[i];
        let phase = Complex64::from_polar(1.0, -w(k) * t);
        // d/dk [ψ e^{−iωt}] = (ψ′ − i ω′ t ψ) e^{−iωt}
        out.derivs[i] = (psi.derivs[i] - Complex64::i() * dw(k) * t * psi.values[i]) * phase;
        out.values[i] = psi.values[i] * phase;
    }
    let c = psi.params.cutoff();
    out.edges = [
        psi.edges[0] * Complex64::from_polar(1.0, -w(-c) * t),
        psi.edges[1] * Complex64::from_polar(1.0, -w(c) * t),
    ];
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub exact: MomentumWavefunction,
    pub nonrelativistic: MomentumWavefunction,
    /// `|⟨ψ_exact(t)|ψ_NR(t)⟩|`.
    pub fidelity: f64,
    /// `max_k |ω − ω_NR|·t` over the grid.
    pub max_phase_error: f64,
}

/// Evolves `psi` under both dispersions and compares them.
pub fn evolve_wavepacket(psi: &MomentumWavefunction, t: f64) -> Evolution {
    let exact = evolve(psi, t, Dispersion::Exact);
    let nonrelativistic = evolve(psi, t, Dispersion::NonRelativistic);
    let overlap: Complex64 = (0..psi.nodes.len())
        .map(|i| exact.values[i].conj() * nonrelativistic.values[i] * psi.weights[i])
        .sum::<Complex64>()
        / (2.0 * PI);
    let max_phase_error = psi
        .nodes
        .iter()
        .map(|&k| (omega(&[k]) - omega_nr(&[k])).abs() * t.abs())
        .fold(0.0, f64::max);
    Evolution {
        exact,
        nonrelativistic,
        fidelity: overlap.norm(),
        max_phase_error,
    }
}
