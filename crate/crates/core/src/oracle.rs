//! Brute-force reference: the exact ground state of a periodic harmonic chain
//! discretizing the Klein-Gordon Hamiltonian,
//! `H = Σ_j [½p_j² + ½q_j²] + Σ_j (q_{j+1} − q_j)²/(2a²)` with canonical site
//! variables `q_j = √a Φ(x_j)`, `p_j = √a Π(x_j)`.
//!
//! The stiffness matrix is circulant, so `⟨qq⟩ = ½K^{−1/2}` and
//! `⟨pp⟩ = ½K^{1/2}` are circulant too and their first rows come from one FFT.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{sinc, ModelParams};
use crate::fit::linear_fit;
use crate::gaussian::CovarianceMatrix;
use crate::moments::{Smearing, SmearingForm, VacuumMoments};

/// Periodic chain with `K_jj = 2/a² + 1`, `K_{j,j±1} = −1/a²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeChain {
    sites: usize,
    spacing: f64,
    coupled: bool,
}

impl LatticeChain {
    pub fn new(sites: usize, spacing: f64) -> Result<Self> {
        if sites == 0 {
            return Err(Error::param("sites", "must be positive"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::param("spacing", "must be positive and finite"));
        }
        Ok(Self {
            sites,
            spacing,
            coupled: true,
        })
    }

    /// Chain without the gradient term: independent unit-frequency sites.
    pub fn decoupled(sites: usize, spacing: f64) -> Result<Self> {
        Ok(Self {
            coupled: false,
            ..Self::new(sites, spacing)?
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn length(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    /// Circulant eigenvalue `1 + (4/a²) sin²(πl/M)`.
    pub fn eigenvalue(&self, l: usize) -> f64 {
        if !self.coupled {
            return 1.0;
        }
        let s = (PI * l as f64 / self.sites as f64).sin();
        1.0 + 4.0 * s * s / (self.spacing * self.spacing)
    }

    /// Dense stiffness matrix (for small chains and cross-checks).
    pub fn stiffness(&self) -> DMatrix<f64> {
        let m = self.sites;
        let g = if self.coupled { 1.0 / (self.spacing * self.spacing) } else { 0.0 };
        let mut k = DMatrix::from_diagonal_element(m, m, 1.0 + 2.0 * g);
        for j in 0..m {
            k[(j, (j + 1) % m)] -= g;
            k[(j, (j + m - 1) % m)] -= g;
        }
        k
    }
}

/// First rows of the circulant ground-state correlators.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCovariance {
    chain: LatticeChain,
    /// `⟨q_0 q_d⟩`.
    qq: Vec<f64>,
    /// `⟨p_0 p_d⟩`.
    pp: Vec<f64>,
}

pub fn ground_covariance(chain: &LatticeChain) -> ChainCovariance {
    let m = chain.sites;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(m);
    let row = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut buf: Vec<Complex64> = (0..m).map(|l| Complex64::new(f(chain.eigenvalue(l)), 0.0)).collect();
        fft.process(&mut buf);
        buf.iter().map(|z| z.re / m as f64).collect()
    };
    ChainCovariance {
        chain: *chain,
        qq: row(&|mu| 0.5 / mu.sqrt()),
        pp: row(&|mu| 0.5 * mu.sqrt()),
    }
}

impl ChainCovariance {
    pub fn chain(&self) -> &LatticeChain {
        &self.chain
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let m = self.chain.sites;
        (j % m + m - i % m) % m
    }

    pub fn qq(&self, i: usize, j: usize) -> f64 {
        self.qq[self.offset(i, j)]
    }

    pub fn pp(&self, i: usize, j: usize) -> f64 {
        self.pp[self.offset(i, j)]
    }

    pub fn qq_row(&self) -> &[f64] {
        &self.qq
    }

    pub fn pp_row(&self) -> &[f64] {
        &self.pp
    }

    /// Covariance of the listed sites in `(q, p)` ordering.
    pub fn reduced(&self, sites: &[usize]) -> Result<CovarianceMatrix> {
        if sites.is_empty() || sites.iter().any(|&s| s >= self.chain.sites) {
            return Err(Error::param("sites", "indices must be nonempty and in range"));
        }
        let n = sites.len();
        let sigma = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let (i, j) = (sites[r / 2], sites[c / 2]);
            match (r % 2, c % 2) {
                (0, 0) => self.qq(i, j),
                (1, 1) => self.pp(i, j),
                _ => 0.0,
            }
        });
        CovarianceMatrix::from_matrix(sigma)
    }

    /// The full `2M × 2M` covariance; quadratic in `M`, meant for small chains.
    pub fn full(&self) -> Result<CovarianceMatrix> {
        self.reduced(&(0..self.chain.sites).collect::<Vec<_>>())
    }

    /// `Tr⟨qq⟩` from the computed row.
    pub fn trace_qq(&self) -> f64 {
        self.chain.sites as f64 * self.qq[0]
    }

    /// `½ Σ_l μ_l^{−1/2}`, the spectral value of the same trace.
    pub fn trace_qq_spectral(&self) -> f64 {
        (0..self.chain.sites).map(|l| 0.5 / self.chain.eigenvalue(l).sqrt()).sum()
    }
}

/// Real-space window for sampling continuum smearings on chain sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Half-width of the window around each smearing center (`1/k_c`).
    pub half_width: f64,
    /// Width of the cos² taper at the window edges (`1/k_c`).
    pub taper: f64,
    /// Minimum chain length `L = Ma`.
    pub min_length: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            half_width: 5000.0,
            taper: 500.0,
            min_length: 50.0,
        }
    }
}

/// Vacuum moments of two sample-point smearings on the chain.
///
/// The smearings are sampled on chain sites over a window of half-width `W`
/// around each center, weighted by `√a`, tapered and ℓ²-normalized, then
/// contracted against the chain correlators taken as minimum-image kernels.
/// Because the correlation length (`1/k_c`) is far below `L/2`, these kernels
/// are the infinite-chain ones up to `O(e^{−L/2})`, so the window may exceed
/// the ring. The variances are averaged over the two smearings.
pub fn smeared_moments_on_chain(
    cov: &ChainCovariance,
    f1: &Smearing,
    f2: &Smearing,
    opts: &OracleOptions,
) -> Result<VacuumMoments> {
    let chain = cov.chain;
    let params = f1.params();
    if params != f2.params() {
        return Err(Error::Precondition("smearings belong to different models".into()));
    }
    if params.dimension() != 1 {
        return Err(Error::param("dimension", "the chain oracle is one-dimensional"));
    }
    let nyquist = PI / chain.spacing;
    if params.cutoff() >= nyquist {
        return Err(Error::Aliasing {
            cutoff: params.cutoff(),
            nyquist,
        });
    }
    if chain.length() < opts.min_length {
        return Err(Error::Precondition(format!(
            "chain length {} is below the minimum {}",
            chain.length(),
            opts.min_length
        )));
    }
    if !(opts.half_width > 0.0 && opts.taper >= 0.0 && opts.taper < opts.half_width) {
        return Err(Error::param("window", "need 0 <= taper < half_width"));
    }
    let center = |f: &Smearing| match f.form() {
        SmearingForm::SamplePoint { center } => Ok(center[0]),
        SmearingForm::Tabulated { .. } => Err(Error::Precondition(
            "the chain oracle supports sample-point smearings only".into(),
        )),
    };
    let (c1, c2) = (center(f1)?, center(f2)?);
    let a = chain.spacing;
    let lo = ((c1.min(c2) - opts.half_width) / a).floor() as i64;
    let hi = ((c1.max(c2) + opts.half_width) / a).ceil() as i64;
    let len = (hi - lo + 1) as usize;

    let mut g1 = sampled_smearing(params, c1, lo, len, a, opts);
    let mut g2 = sampled_smearing(params, c2, lo, len, a, opts);
    if c1 != c2 {
        symmetric_orthogonalize(&mut g1, &mut g2)?;
    }

    let m = chain.sites;
    let n_fft = (len + m).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_fft);
    let transform = |data: &[f64]| -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        for (b, v) in buf.iter_mut().zip(data) {
            b.re = *v;
        }
        fft.process(&mut buf);
        buf
    };
    let kernel = |row: &[f64]| -> Vec<Complex64> {
        // each circulant offset once, as a signed minimum-image distance
        let mut buf = vec![0.0; n_fft];
        let neg = (m - 1) / 2;
        buf[..=m / 2].copy_from_slice(&row[..=m / 2]);
        for d in 1..=neg {
            buf[n_fft - d] = row[m - d];
        }
        transform(&buf)
    };
    let (kq, kp) = (kernel(&cov.qq), kernel(&cov.pp));
    let (h1, h2) = (transform(&g1), transform(&g2));
    // ⟨g, K h⟩ = (1/n) Σ conj(ĝ) K̂ ĥ for real g, h and a symmetric kernel
    let form = |x: &[Complex64], k: &[Complex64], y: &[Complex64]| -> f64 {
        let s: Complex64 = x.iter().zip(k).zip(y).map(|((x, k), y)| x.conj() * k * y).sum();
        s.re / n_fft as f64
    };
    let d_phi2 = 0.5 * (form(&h1, &kq, &h1) + form(&h2, &kq, &h2));
    let d_pi2 = 0.5 * (form(&h1, &kp, &h1) + form(&h2, &kp, &h2));
    let phi12 = form(&h1, &kq, &h2);
    let pi12 = form(&h1, &kp, &h2);
    Ok(VacuumMoments::from_variances(d_phi2, d_pi2, Some(phi12), Some(pi12)))
}

/// Löwdin orthogonalization `(g1, g2) ← (g1, g2)·S^{−1/2}`. Window truncation
/// leaves the sampled modes slightly non-orthogonal, which breaks the
/// canonical commutators the two-mode covariance assumes.
fn symmetric_orthogonalize(g1: &mut [f64], g2: &mut [f64]) -> Result<()> {
    let s: f64 = g1.iter().zip(g2.iter()).map(|(x, y)| x * y).sum();
    if s.abs() >= 0.5 {
        return Err(Error::Precondition(format!("sampled smearings overlap by {s}")));
    }
    let (cp, cm) = (1.0 / (1.0 + s).sqrt(), 1.0 / (1.0 - s).sqrt());
    let (d, o) = (0.5 * (cp + cm), 0.5 * (cp - cm));
    for (x, y) in g1.iter_mut().zip(g2.iter_mut()) {
        (*x, *y) = (d * *x + o * *y, o * *x + d * *y);
    }
    Ok(())
}

/// `√a · √(Λ/π) sinc[Λ(x_j − c)]` on sites `lo..lo+len`, tapered to zero
/// outside `|x − c| ≤ W` and normalized to unit ℓ² norm.
fn sampled_smearing(params: &ModelParams, c: f64, lo: i64, len: usize, a: f64, opts: &OracleOptions) -> Vec<f64> {
    let lam = params.cutoff();
    let flat = opts.half_width - opts.taper;
    let mut g: Vec<f64> = (0..len)
        .map(|i| {
            let r = (lo + i as i64) as f64 * a - c;
            let d = r.abs();
            let w = if d <= flat {
                1.0
            } else if d <= opts.half_width {
                let t = (d - flat) / opts.taper;
                (0.5 * PI * t).cos().powi(2)
            } else {
                0.0
            };
            w * sinc(lam * r)
        })
        .collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    g.iter_mut().for_each(|v| *v /= norm);
    g
}

/// Oracle moments for a pair of sample points `separation` lattice spacings
/// apart on a chain of `sites` sites with spacing `a`.
pub fn oracle_pair(
    params: &ModelParams,
    separation: i64,
    sites: usize,
    a: f64,
    opts: &OracleOptions,
) -> Result<VacuumMoments> {
    let chain = LatticeChain::new(sites, a)?;
    let cov = ground_covariance(&chain);
    let f1 = Smearing::lattice_site(*params, 0)?;
    let f2 = Smearing::lattice_site(*params, separation)?;
    smeared_moments_on_chain(&cov, &f1, &f2, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub spacing: f64,
    pub sites: usize,
    pub d_phi2: f64,
    pub d_pi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `ln|ΔΦ²(a) − ΔΦ²(a/2)|` against `ln a`.
    pub phi_order: f64,
    /// Same for `ΔΠ²`.
    pub pi_order: f64,
}

/// Convergence order in the spacing at fixed chain length, fitted on
/// successive differences so that the `a`-independent window error cancels.
pub fn convergence_order(
    params: &ModelParams,
    spacings: &[f64],
    length: f64,
    opts: &OracleOptions,
) -> Result<ConvergenceReport> {
    if spacings.len() < 3 {
        return Err(Error::param("spacings", "need at least three spacings"));
    }
    let mut rows = Vec::with_capacity(spacings.len());
    for &a in spacings {
        let sites = (length / a).round();
        if (sites * a - length).abs() > 1e-9 * length {
            return Err(Error::param("spacings", format!("length {length} is not a multiple of {a}")));
        }
        let m = oracle_pair(params, 0, sites as usize, a, opts)?;
        rows.push(ConvergenceRow {
            spacing: a,
            sites: sites as usize,
            d_phi2: m.d_phi2,
            d_pi2: m.d_pi2,
        });
    }
    let order = |get: &dyn Fn(&ConvergenceRow) -> f64| -> Result<f64> {
        let xs: Vec<f64> = rows.windows(2).map(|w| w[0].spacing.ln()).collect();
        let ys: Vec<f64> = rows.windows(2).map(|w| (get(&w[0]) - get(&w[1])).abs().ln()).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::NumericalDegeneracy("successive oracle values coincide".into()));
        }
        Ok(linear_fit(&xs, &ys)?.slope)
    };
    let phi_order = order(&|r| r.d_phi2)?;
    let pi_order = order(&|r| r.d_pi2)?;
    Ok(ConvergenceReport {
        rows,
        phi_order,
        pi_order,
    })
}

#[cfg(test)]
fn dense_sqrt(k: &DMatrix<f64>, power: f64) -> DMatrix<f64> {
    let eig = k.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.powf(power)));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{log_negativity, symplectic_spectrum};
    use crate::moments::moments_pair;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rows_match_dense_square_roots() {
        let chain = LatticeChain::new(12, 0.7).unwrap();
        let cov = ground_covariance(&chain);
        let k = chain.stiffness();
        let qq = dense_sqrt(&k, -0.5) * 0.5;
        let pp = dense_sqrt(&k, 0.5) * 0.5;
        for i in 0..12 {
            for j in 0..12 {
                assert_relative_eq!(cov.qq(i, j), qq[(i, j)], epsilon = 1e-13);
                assert_relative_eq!(cov.pp(i, j), pp[(i, j)], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn decoupled_and_single_site() {
        let cov = ground_covariance(&LatticeChain::decoupled(16, 0.5).unwrap());
        assert_relative_eq!(cov.qq(3, 3), 0.5, epsilon = 1e-15);
        assert!(cov.qq(3, 4).abs() < 1e-15);
        let s = symplectic_spectrum(&cov.reduced(&[5]).unwrap()).unwrap();
        assert_relative_eq!(s.nus[0], 0.5, epsilon = 1e-15);

        let one = LatticeChain::new(1, 0.3).unwrap();
        assert_eq!(one.stiffness()[(0, 0)], 1.0);
        let s = symplectic_spectrum(&ground_covariance(&one).reduced(&[0]).unwrap()).unwrap();
        assert_relative_eq!(s.nus[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn neighbouring_sites_are_entangled() {
        let cov = ground_covariance(&LatticeChain::new(64, 1.0).unwrap());
        let r = cov.reduced(&[10, 11]).unwrap();
        r.state_check().unwrap();
        assert!(log_negativity(&r).unwrap() > 0.0);
    }

    #[test]
    fn full_covariance_is_a_pure_state() {
        let cov = ground_covariance(&LatticeChain::new(24, 0.5).unwrap()).full().unwrap();
        let s = symplectic_spectrum(&cov).unwrap();
        assert!(s.nus.iter().all(|nu| (nu - 0.5).abs() < 1e-10), "{:?}", s.nus);
    }

    #[test]
    fn trace_sum_rule() {
        let cov = ground_covariance(&LatticeChain::new(257, 0.1).unwrap());
        assert_relative_eq!(cov.trace_qq(), cov.trace_qq_spectral(), max_relative = 1e-12);
    }

    #[test]
    fn preconditions() {
        let p = ModelParams::one_dim(0.5).unwrap();
        let opts = OracleOptions::default();
        let f = Smearing::lattice_site(p, 0).unwrap();
        let coarse = ground_covariance(&LatticeChain::new(64, 7.0).unwrap());
        assert!(matches!(
            smeared_moments_on_chain(&coarse, &f, &f, &opts),
            Err(Error::Aliasing { .. })
        ));
        let short = ground_covariance(&LatticeChain::new(16, 1.0).unwrap());
        assert!(matches!(
            smeared_moments_on_chain(&short, &f, &f, &opts),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn coarse_oracle_tracks_continuum() {
        let p = ModelParams::one_dim(0.2).unwrap();
        let opts = OracleOptions {
            half_width: 2000.0,
            taper: 200.0,
            ..OracleOptions::default()
        };
        let chain = oracle_pair(&p, 1, 1024, 0.1, &opts).unwrap();
        let cont = moments_pair(&Smearing::lattice_site(p, 0).unwrap(), &Smearing::lattice_site(p, 1).unwrap()).unwrap();
        assert_relative_eq!(chain.d_phi2, cont.d_phi2, max_relative = 1e-3);
        assert_relative_eq!(chain.d_pi2, cont.d_pi2, max_relative = 1e-3);
    }

    #[test]
    fn pair_covariance_is_physical() {
        let p = ModelParams::one_dim(0.2).unwrap();
        let opts = OracleOptions {
            half_width: 2000.0,
            taper: 200.0,
            ..OracleOptions::default()
        };
        let m = oracle_pair(&p, 1, 1024, 0.1, &opts).unwrap();
        let cov = crate::gaussian::assemble_covariance(&m, 2).unwrap();
        assert!(log_negativity(&cov).unwrap() > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn site_pairs_depend_on_separation_only(m in 8usize..200, a in 0.05f64..2.0, i in 0usize..1000, j in 0usize..1000, s in 0usize..1000) {
            let cov = ground_covariance(&LatticeChain::new(m, a).unwrap());
            let (i, j, s) = (i % m, j % m, s % m);
            prop_assert_eq!(cov.qq(i, j), cov.qq((i + s) % m, (j + s) % m));
            prop_assert_eq!(cov.pp(i, j), cov.pp((i + s) % m, (j + s) % m));
            let r = cov.reduced(&[i, (i + 1) % m]).unwrap();
            let spec = symplectic_spectrum(&r).unwrap();
            prop_assert!(spec.nus.iter().all(|&nu| nu >= 0.5 - 1e-10));
        }
    }
}
