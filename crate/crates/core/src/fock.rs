//! Truncated Fock-space check of the vacuum relation
//! `|0⟩_a ∝ exp(−½ Σ (α⁻¹β)_mm′ b_m† b_m′†)|0⟩_b` for a few modes.

use num_complex::Complex64;

use crate::bogoliubov::{mixing_matrix, BogoliubovPair, CMatrix};
use crate::error::{Error, Result};

pub const MAX_MODES: usize = 3;
pub const DEFAULT_CAP: usize = 12;

/// Dense state over the product occupation basis `|n_1 … n_M⟩`, `n_i ≤ cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFockState {
    modes: usize,
    cap: usize,
    coeffs: Vec<Complex64>,
}

impl TruncatedFockState {
    pub fn vacuum(modes: usize, cap: usize) -> Result<Self> {
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::param("modes", format!("must lie in 1..={MAX_MODES}")));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (cap + 1).pow(modes as u32)];
        coeffs[0] = Complex64::new(1.0, 0.0);
        Ok(Self { modes, cap, coeffs })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cap + 1).pow(mode as u32)
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % (self.cap + 1)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.coeffs.iter_mut().for_each(|c| *c /= n);
        }
    }

    /// `b_mode†`, dropping amplitude pushed above the cap.
    pub fn create(&self, mode: usize) -> Self {
        let mut out = self.zeroed();
        let s = self.stride(mode);
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = self.occupation(i, mode);
            if n < self.cap && *c != Complex64::new(0.0, 0.0) {
                out.coeffs[i + s] += c * ((n + 1) as f64).sqrt();
            }
        }
        out
    }

    /// `b_mode`.
    pub fn annihilate(&self, mode: usize) -> Self {
        let mut out = self.zeroed();
        let s = self.stride(mode);
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = self.occupation(i, mode);
            if n > 0 {
                out.coeffs[i - s] += c * (n as f64).sqrt();
            }
        }
        out
    }

    fn zeroed(&self) -> Self {
        Self {
            modes: self.modes,
            cap: self.cap,
            coeffs: vec![Complex64::new(0.0, 0.0); self.coeffs.len()],
        }
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        for (y, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += a * v;
        }
    }

    /// Same state in a basis with a larger cap.
    pub fn with_cap(&self, cap: usize) -> Result<Self> {
        if cap < self.cap {
            return Err(Error::param("cap", "cannot shrink the occupation cap"));
        }
        let mut out = Self::vacuum(self.modes, cap)?;
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut j = 0;
            for m in 0..self.modes {
                j += self.occupation(i, m) * out.stride(m);
            }
            out.coeffs[j] = *c;
        }
        Ok(out)
    }

    /// `exp(−½ b†Z b†)|0⟩` in the truncated space. Creation operators only
    /// raise occupations, so discarding overflow at every step leaves the
    /// retained coefficients exact.
    pub fn squeezed_vacuum(z: &CMatrix, cap: usize) -> Result<Self> {
        let modes = z.nrows();
        let mut state = Self::vacuum(modes, cap)?;
        let mut term = state.clone();
        // each power of the quadratic form raises the total occupation by 2
        let max_order = modes * cap / 2 + 1;
        for order in 1..=max_order {
            let mut next = term.zeroed();
            for m in 0..modes {
                let cm = term.create(m);
                for mp in 0..modes {
                    let zz = z[(m, mp)];
                    if zz != Complex64::new(0.0, 0.0) {
                        next.axpy(-0.5 * zz / order as f64, &cm.create(mp));
                    }
                }
            }
            term = next;
            if term.norm() == 0.0 {
                break;
            }
            state.axpy(Complex64::new(1.0, 0.0), &term);
        }
        Ok(state)
    }
}

/// Builds `|0⟩_a` in the cap-`n_max` space, normalizes it, and returns
/// `max_i ‖a_i|0⟩_a‖` with `a_i = Σ_j (α_ij b_j + β_ij b_j†)` applied in a
/// space one occupation larger.
pub fn fock_vacuum_check(pair: &BogoliubovPair, n_max: usize) -> Result<f64> {
    let modes = pair.modes();
    if modes > MAX_MODES {
        return Err(Error::Precondition(format!("Fock check supports at most {MAX_MODES} modes")));
    }
    if n_max < 4 {
        return Err(Error::param("n_max", "must be at least 4"));
    }
    let z = mixing_matrix(pair)?;
    let norm = z.clone().singular_values().max();
    if norm >= 1.0 {
        return Err(Error::DivergentSqueezing { norm });
    }
    let mut state = TruncatedFockState::squeezed_vacuum(&z, n_max)?;
    state.normalize();
    let state = state.with_cap(n_max + 1)?;
    let lowered: Vec<_> = (0..modes).map(|j| state.annihilate(j)).collect();
    let raised: Vec<_> = (0..modes).map(|j| state.create(j)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..modes {
        let mut out = state.zeroed();
        for j in 0..modes {
            out.axpy(pair.alpha[(i, j)], &lowered[j]);
            out.axpy(pair.beta[(i, j)], &raised[j]);
        }
        worst = worst.max(out.norm());
    }
    Ok(worst)
}
