//! Zero-mean Gaussian states: covariance matrices, symplectic spectra,
//! partial transposition and the entropic and entanglement measures built on
//! them. Logarithms are natural throughout.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::moments::VacuumMoments;

/// Noise floor below ½ tolerated (and clamped) in physical spectra.
pub const CLAMP_TOL: f64 = 1e-10;
/// Maximum mismatch between the moduli of an eigenvalue pair `±iν`.
pub const PAIRING_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Covariance `Σ_ij = ½⟨r_i r_j + r_j r_i⟩` in the ordering
/// `(Φ₁, Π₁, …, Φ_M, Π_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    sigma: DMatrix<f64>,
    /// Modes whose momentum has been reflected an odd number of times.
    transposed: Vec<bool>,
}

impl CovarianceMatrix {
    /// Wraps a symmetric `2M×2M` matrix without the bona-fide check; see
    /// [`CovarianceMatrix::state_check`].
    pub fn from_matrix(sigma: DMatrix<f64>) -> Result<Self> {
        let (r, c) = sigma.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::param("sigma", "must be square with even, nonzero size"));
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("sigma", "entries must be finite"));
        }
        let scale = sigma.amax().max(1.0);
        for i in 0..r {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::param("sigma", "must be symmetric"));
                }
            }
        }
        Ok(Self {
            transposed: vec![false; r / 2],
            sigma,
        })
    }

    /// Wraps `sigma` and rejects it unless it describes a physical state.
    pub fn physical(sigma: DMatrix<f64>) -> Result<Self> {
        let cov = Self::from_matrix(sigma)?;
        cov.state_check()?;
        Ok(cov)
    }

    pub fn mode_count(&self) -> usize {
        self.transposed.len()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Block-diagonal symplectic form with blocks `[[0, 1], [−1, 0]]`.
    pub fn symplectic_form(&self) -> DMatrix<f64> {
        symplectic_form(self.mode_count())
    }

    pub fn is_partially_transposed(&self) -> bool {
        self.transposed.iter().any(|&t| t)
    }

    /// Bona-fide check `Σ + (i/2)Ω ≥ 0`, via the symplectic spectrum.
    pub fn state_check(&self) -> Result<()> {
        let s = raw_spectrum(self)?;
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.5 - CLAMP_TOL {
            return Err(Error::InvalidState(format!(
                "smallest symplectic eigenvalue {min} lies below 1/2"
            )));
        }
        Ok(())
    }

    /// Covariance of the given modes (0-based), in the listed order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() || modes.iter().any(|&m| m >= self.mode_count()) {
            return Err(Error::param("modes", "indices must be nonempty and in range"));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let sigma = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.sigma[(idx[i], idx[j])]);
        Ok(Self {
            sigma,
            transposed: modes.iter().map(|&m| self.transposed[m]).collect(),
        })
    }
}

pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Builds the single-mode `diag(ΔΦ², ΔΠ²)` or the two-mode matrix with cross
/// terms `Φ₁₂`, `Π₁₂`.
pub fn assemble_covariance(moments: &VacuumMoments, modes: usize) -> Result<CovarianceMatrix> {
    let (p, q) = (moments.d_phi2, moments.d_pi2);
    let sigma = match modes {
        1 => DMatrix::from_row_slice(2, 2, &[p, 0.0, 0.0, q]),
        2 => {
            let (Some(x), Some(y)) = (moments.phi12, moments.pi12) else {
                return Err(Error::param("moments", "two-mode covariance needs cross terms"));
            };
            #[rustfmt::skip]
            let s = DMatrix::from_row_slice(4, 4, &[
                p,   0.0, x,   0.0,
                0.0, q,   0.0, y,
                x,   0.0, p,   0.0,
                0.0, y,   0.0, q,
            ]);
            s
        }
        _ => return Err(Error::param("modes", "must be 1 or 2")),
    };
    CovarianceMatrix::physical(sigma)
}

/// Symplectic eigenvalues, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub nus: Vec<f64>,
    pub pairing_residual: f64,
}

/// Eigenvalue moduli of `Ω⁻¹Σ`, paired as `±iν`. Physical spectra have
/// sub-½ noise up to [`CLAMP_TOL`] clamped; partially transposed spectra are
/// returned as computed.
pub fn symplectic_spectrum(cov: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let (mut nus, residual) = paired_eigenvalues(cov)?;
    if !cov.is_partially_transposed() {
        for nu in &mut nus {
            if *nu < 0.5 && 0.5 - *nu <= CLAMP_TOL {
                *nu = 0.5;
            }
        }
    }
    nus.sort_by(|a, b| b.total_cmp(a));
    Ok(SymplecticSpectrum {
        nus,
        pairing_residual: residual,
    })
}

fn raw_spectrum(cov: &CovarianceMatrix) -> Result<Vec<f64>> {
    Ok(paired_eigenvalues(cov)?.0)
}

fn paired_eigenvalues(cov: &CovarianceMatrix) -> Result<(Vec<f64>, f64)> {
    let m = cov.mode_count();
    // Ω⁻¹ = −Ω
    let product = -cov.symplectic_form() * &cov.sigma;
    let eig = product.complex_eigenvalues();
    let scale = cov.sigma.amax().max(f64::MIN_POSITIVE);

    let mut pending: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    let mut nus = Vec::with_capacity(m);
    let mut residual: f64 = 0.0;
    while let Some(pos) = pending
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
    {
        let (re, im) = pending.swap_remove(pos);
        let Some(partner) = pending
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .1 + im).abs().total_cmp(&(b.1 .1 + im).abs()))
            .map(|(i, _)| i)
        else {
            return Err(Error::NumericalDegeneracy("odd number of eigenvalues".into()));
        };
        let (re2, im2) = pending.swap_remove(partner);
        let mismatch = (im + im2).abs().max(re.abs()).max(re2.abs()) / scale;
        residual = residual.max(mismatch);
        nus.push(0.5 * (im - im2));
    }
    if residual > PAIRING_TOL {
        return Err(Error::NumericalDegeneracy(format!(
            "eigenvalues of Ω⁻¹Σ do not pair as ±iν (residual {residual:e})"
        )));
    }
    Ok((nus, residual))
}

/// Reflects the momentum of `mode` (0-based): `Π ↦ −Π` in its row and column.
pub fn partial_transpose(cov: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    if mode >= cov.mode_count() {
        return Err(Error::param("mode", "index out of range"));
    }
    let mut out = cov.clone();
    let j = 2 * mode + 1;
    let n = out.sigma.nrows();
    for i in 0..n {
        if i != j {
            out.sigma[(i, j)] = -out.sigma[(i, j)];
            out.sigma[(j, i)] = -out.sigma[(j, i)];
        }
    }
    out.transposed[mode] = !out.transposed[mode];
    Ok(out)
}

/// Entropy in nats of one thermal mode with occupancy `x = ν − ½`.
pub fn mode_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (1.0 + x) * x.ln_1p() - x * x.ln()
    }
}

fn check_physical(nus: &[f64]) -> Result<()> {
    if let Some(nu) = nus.iter().find(|&&nu| nu < 0.5 - CLAMP_TOL) {
        return Err(Error::Domain(format!("symplectic eigenvalue {nu} below 1/2")));
    }
    Ok(())
}

/// Von Neumann entropy `Σ_j [(ν_j+½)ln(ν_j+½) − (ν_j−½)ln(ν_j−½)]`.
pub fn entropy(spec: &SymplecticSpectrum) -> Result<f64> {
    check_physical(&spec.nus)?;
    Ok(spec.nus.iter().map(|nu| mode_entropy(nu - 0.5)).sum())
}

/// `E_N = Σ_j max(0, −ln 2ν̃_j)` over the spectrum of the partial transpose
/// (first mode reflected).
pub fn log_negativity(cov: &CovarianceMatrix) -> Result<f64> {
    if cov.mode_count() != 2 {
        return Err(Error::Precondition("log_negativity needs a two-mode covariance".into()));
    }
    let pt = partial_transpose(cov, 0)?;
    let spec = symplectic_spectrum(&pt)?;
    Ok(spec.nus.iter().map(|nu| (-(2.0 * nu).ln()).max(0.0)).sum())
}

/// Per-mode thermal parameters of the Williamson normal form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMode {
    /// Mean occupancy `ν − ½`.
    pub occupancy: f64,
    /// `(ν − ½)/(ν + ½) = e^{−ω/T}`.
    pub boltzmann_ratio: f64,
}

pub fn thermal_decomposition(spec: &SymplecticSpectrum) -> Result<Vec<ThermalMode>> {
    check_physical(&spec.nus)?;
    Ok(spec.nus.iter().map(|&nu| thermal_mode(nu - 0.5)).collect())
}

pub fn thermal_mode(x: f64) -> ThermalMode {
    let x = x.max(0.0);
    ThermalMode {
        occupancy: x,
        boltzmann_ratio: x / (1.0 + x),
    }
}

/// Frequency assigned to a reduced mode when extracting a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyChoice {
    /// `ω_f = ΔΠ_f/ΔΦ_f`.
    #[default]
    MomentRatio,
    /// Rest energy `ω = 1`.
    Compton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTemperature {
    /// `k_BT` in units of `mc²`; zero for a pure state.
    pub temperature: f64,
    pub omega_f: f64,
    pub pure_state: bool,
}

/// `k_BT = ω_f / ln((ν+½)/(ν−½))` of a single reduced mode, evaluated from
/// the cancellation-free excess `ν − ½`.
pub fn effective_temperature(moments: &VacuumMoments, choice: FrequencyChoice) -> Result<EffectiveTemperature> {
    if !(moments.d_phi2 > 0.0 && moments.d_pi2 > 0.0) {
        return Err(Error::Domain("variances must be positive".into()));
    }
    let omega_f = match choice {
        FrequencyChoice::MomentRatio => (moments.d_pi2 / moments.d_phi2).sqrt(),
        FrequencyChoice::Compton => 1.0,
    };
    let x = moments.nu_excess();
    if x < -CLAMP_TOL {
        return Err(Error::Domain(format!("symplectic excess {x} is negative")));
    }
    if !(x > 0.0) {
        return Ok(EffectiveTemperature {
            temperature: 0.0,
            omega_f,
            pure_state: true,
        });
    }
    // ln((1+x)/x)
    let beta_omega = x.ln_1p() - x.ln();
    Ok(EffectiveTemperature {
        temperature: omega_f / beta_omega,
        omega_f,
        pure_state: false,
    })
}
