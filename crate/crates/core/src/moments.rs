//! Smearing functions and the smeared vacuum second moments.
//!
//! A [`Smearing`] `f̃(k)` defines one local oscillator `(Φ_f, Π_f)`. Its vacuum
//! moments are band integrals of `|f̃|²` against `1/2ω` and `ω/2`. Because
//! `ν − ½ ~ λ⁴` the variances are also carried as their deviations from ½,
//! computed from integrands that vanish at `k = 0`, so the symplectic excess
//! stays accurate down to `λ ~ 1e-6`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{norm_sq, omega_minus_one, CutoffShape, ModelParams};
use crate::quadrature::{integrate_band, integrate_interval, QuadratureOptions};

/// Shape of a smearing function.
#[derive(Debug, Clone, PartialEq)]
pub enum SmearingForm {
    /// `f(x) = (Λ/π)^{n/2} Π sinc[Λ(xⁱ − x₀ⁱ)]`, i.e. `f̃(k) ∝ e^{−ik·x₀}`
    /// flat over the band.
    SamplePoint { center: Vec<f64> },
    /// One-dimensional momentum-space table, cubic-interpolated.
    Tabulated { nodes: Vec<f64>, values: Vec<Complex64> },
}

/// A normalized bandlimited smearing function, `∫dk/(2π)ⁿ |f̃|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Smearing {
    params: ModelParams,
    form: SmearingForm,
}

const TABLE_ZERO_TOL: f64 = 1e-12;

impl Smearing {
    /// Smearing for the sampling point at `center`.
    pub fn sample_point(params: ModelParams, center: &[f64]) -> Result<Self> {
        if center.len() != params.dimension() {
            return Err(Error::param("center", "length must equal the model dimension"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(Self {
            params,
            form: SmearingForm::SamplePoint {
                center: center.to_vec(),
            },
        })
    }

    /// Sample-point smearing on the `α = 0` lattice: center `m·π/Λ` on the
    /// first axis.
    pub fn lattice_site(params: ModelParams, m: i64) -> Result<Self> {
        let mut center = vec![0.0; params.dimension()];
        center[0] = m as f64 * params.lattice_spacing();
        Self::sample_point(params, &center)
    }

    /// Tabulated 1-D smearing. Values at nodes outside the band must vanish;
    /// the interpolant is renormalized.
    pub fn tabulated(params: ModelParams, nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if params.dimension() != 1 {
            return Err(Error::param("smearing", "tabulated smearings are one-dimensional"));
        }
        if nodes.len() != values.len() {
            return Err(Error::param("smearing", "node and value counts differ"));
        }
        if nodes.len() < 4 {
            return Err(Error::param("smearing", "need at least 4 tabulated nodes"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("smearing", "nodes must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::param("smearing", "values must be finite"));
        }
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::param("smearing", "all tabulated values vanish"));
        }
        let cutoff = params.cutoff();
        if let Some((k, _)) = nodes
            .iter()
            .zip(&values)
            .find(|(k, v)| k.abs() > cutoff && v.norm() > TABLE_ZERO_TOL * scale)
        {
            return Err(Error::param(
                "smearing",
                format!("support leaves the band: nonzero value at k = {k}"),
            ));
        }
        let mut s = Self {
            params,
            form: SmearingForm::Tabulated { nodes, values },
        };
        let norm2 = s.pair_integral(&s, |_| 1.0)?;
        if !(norm2 > 0.0) {
            return Err(Error::param("smearing", "interpolant has zero norm on the band"));
        }
        let inv = 1.0 / norm2.sqrt();
        if let SmearingForm::Tabulated { values, .. } = &mut s.form {
            values.iter_mut().for_each(|v| *v *= inv);
        }
        Ok(s)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn form(&self) -> &SmearingForm {
        &self.form
    }

    /// `f̃(k)`; zero outside the band.
    pub fn value(&self, k: &[f64]) -> Complex64 {
        if !self.params.in_band(k) {
            return Complex64::new(0.0, 0.0);
        }
        match &self.form {
            SmearingForm::SamplePoint { center } => {
                let amp = self.flat_amplitude();
                let phase: f64 = k.iter().zip(center).map(|(a, b)| a * b).sum();
                Complex64::from_polar(amp, -phase)
            }
            SmearingForm::Tabulated { nodes, values } => lagrange_cubic(nodes, values, k[0]),
        }
    }

    /// `|f̃|` of the flat sample-point smearing, `((2π)ⁿ/band volume)^{1/2}`.
    fn flat_amplitude(&self) -> f64 {
        let n = self.params.dimension() as i32;
        ((2.0 * PI).powi(n) / self.params.band_volume()).sqrt()
    }

    /// `∫ dk/(2π)ⁿ w(‖k‖²) Re[f̃*(k) g̃(k)]`.
    fn pair_integral<W: Fn(f64) -> f64>(&self, other: &Smearing, weight: W) -> Result<f64> {
        let params = &self.params;
        match (&self.form, &other.form) {
            (SmearingForm::SamplePoint { center: c1 }, SmearingForm::SamplePoint { center: c2 }) => {
                let d: Vec<f64> = c2.iter().zip(c1).map(|(a, b)| a - b).collect();
                let amp2 = self.flat_amplitude().powi(2);
                let separated = d.iter().any(|x| *x != 0.0);
                if separated && params.shape() == CutoffShape::Sphere && params.dimension() >= 2 {
                    return Err(Error::UnsupportedShape("separated smearings with a sphere cutoff"));
                }
                let half_periods = d.iter().map(|x| x.abs()).fold(0.0, f64::max) * params.cutoff() / PI;
                let opts = if separated {
                    QuadratureOptions::oscillatory(half_periods)
                } else {
                    QuadratureOptions::default()
                };
                integrate_band(
                    |k| {
                        let phase: f64 = k.iter().zip(&d).map(|(a, b)| a * b).sum();
                        amp2 * weight(norm_sq(k)) * phase.cos()
                    },
                    params,
                    opts,
                )
            }
            _ => {
                if params.dimension() != 1 {
                    return Err(Error::param("smearing", "tabulated smearings are one-dimensional"));
                }
                let cutoff = params.cutoff();
                let mut breaks = vec![-cutoff];
                for f in [self, other] {
                    if let SmearingForm::Tabulated { nodes, .. } = &f.form {
                        breaks.extend(nodes.iter().copied().filter(|x| x.abs() < cutoff));
                    }
                }
                breaks.push(cutoff);
                breaks.sort_by(|a, b| a.total_cmp(b));
                breaks.dedup();
                let mut total = 0.0;
                for w in breaks.windows(2) {
                    total += integrate_interval(
                        |k| {
                            let v = self.value(&[k]).conj() * other.value(&[k]);
                            weight(k * k) * v.re
                        },
                        w[0],
                        w[1],
                        8,
                        1e-13,
                    )?;
                }
                Ok(total / (2.0 * PI))
            }
        }
    }

    /// Maximum of `||f̃| − |g̃||` over a probe grid of the band.
    fn modulus_mismatch(&self, other: &Smearing) -> f64 {
        if let (SmearingForm::SamplePoint { .. }, SmearingForm::SamplePoint { .. }) = (&self.form, &other.form) {
            return 0.0;
        }
        let cutoff = self.params.cutoff();
        (0..=512)
            .map(|i| {
                let k = [-cutoff + 2.0 * cutoff * i as f64 / 512.0];
                (self.value(&k).norm() - other.value(&k).norm()).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Local cubic Lagrange interpolation on the four nearest nodes; zero outside
/// the tabulated range.
fn lagrange_cubic(nodes: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let n = nodes.len();
    if x < nodes[0] || x > nodes[n - 1] {
        return Complex64::new(0.0, 0.0);
    }
    // interval [x_i, x_{i+1}] containing x
    let i = match nodes.partition_point(|&v| v <= x) {
        0 => 0,
        p => (p - 1).min(n - 2),
    };
    let start = i.saturating_sub(1).min(n - 4);
    let stencil = start..start + 4;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in stencil.clone() {
        let mut l = 1.0;
        for m in stencil.clone() {
            if m != j {
                l *= (x - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
        acc += values[j] * l;
    }
    acc
}

/// Smeared vacuum second moments in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumMoments {
    /// `ΔΦ_f²`.
    pub d_phi2: f64,
    /// `ΔΠ_f²`.
    pub d_pi2: f64,
    /// `Φ₁₂` for a pair.
    pub phi12: Option<f64>,
    /// `Π₁₂` for a pair.
    pub pi12: Option<f64>,
    /// `1 − 2ΔΦ² = ∫|f̃|²(ω−1)/ω`.
    pub phi_deficit: f64,
    /// `2ΔΠ² − 1 = ∫|f̃|²(ω−1)`.
    pub pi_excess: f64,
    /// `∫|f̃|²(ω−1)²/ω`.
    pub split: f64,
}

impl VacuumMoments {
    /// Moments from variances alone (the stable excess fields are derived by
    /// subtraction and carry its rounding).
    pub fn from_variances(d_phi2: f64, d_pi2: f64, phi12: Option<f64>, pi12: Option<f64>) -> Self {
        let phi_deficit = 1.0 - 2.0 * d_phi2;
        let pi_excess = 2.0 * d_pi2 - 1.0;
        Self {
            d_phi2,
            d_pi2,
            phi12,
            pi12,
            phi_deficit,
            pi_excess,
            split: pi_excess - phi_deficit,
        }
    }

    pub fn uncertainty_product(&self) -> f64 {
        self.d_phi2 * self.d_pi2
    }

    /// `ν = √(ΔΦ²ΔΠ²)` of the single mode.
    pub fn nu(&self) -> f64 {
        self.uncertainty_product().sqrt()
    }

    /// `ν − ½` evaluated without cancellation.
    pub fn nu_excess(&self) -> f64 {
        let nu2_excess = 0.25 * (self.split - self.phi_deficit * self.pi_excess);
        nu2_excess / (self.nu() + 0.5)
    }

    /// Drops the cross terms.
    pub fn single(&self) -> Self {
        Self {
            phi12: None,
            pi12: None,
            ..*self
        }
    }
}

/// Vacuum variances of the oscillator defined by `f`.
pub fn moments_single(f: &Smearing) -> Result<VacuumMoments> {
    let norm = f.pair_integral(f, |_| 1.0)?;
    let phi_deficit = f.pair_integral(f, |k2| {
        let wm1 = omega_minus_one(k2);
        wm1 / (1.0 + wm1)
    })?;
    let pi_excess = f.pair_integral(f, omega_minus_one)?;
    let split = f.pair_integral(f, |k2| {
        let wm1 = omega_minus_one(k2);
        wm1 * wm1 / (1.0 + wm1)
    })?;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "smearing is not normalized: ∫|f̃|² = {norm}"
        )));
    }
    Ok(VacuumMoments {
        d_phi2: 0.5 * (1.0 - phi_deficit),
        d_pi2: 0.5 * (1.0 + pi_excess),
        phi12: None,
        pi12: None,
        phi_deficit,
        pi_excess,
        split,
    })
}

/// Variances and cross-correlations of two oscillators with equal `|f̃|`.
pub fn moments_pair(f1: &Smearing, f2: &Smearing) -> Result<VacuumMoments> {
    if f1.params != f2.params {
        return Err(Error::Precondition("smearings belong to different models".into()));
    }
    let mismatch = f1.modulus_mismatch(f2);
    if mismatch > 1e-10 {
        return Err(Error::Precondition(format!(
            "pair smearings must have equal modulus |f̃₁| = |f̃₂| (max mismatch {mismatch:e})"
        )));
    }
    let single = moments_single(f1)?;
    let phi12 = f1.pair_integral(f2, |k2| 0.5 / (1.0 + k2).sqrt())?;
    let pi12 = f1.pair_integral(f2, |k2| 0.5 * (1.0 + k2).sqrt())?;
    Ok(VacuumMoments {
        phi12: Some(phi12),
        pi12: Some(pi12),
        ..single
    })
}

/// `f̃_p = ∫ dk/(2π)ⁿ (‖k‖/Λ)^p |f̃|²`.
pub fn f_moment(f: &Smearing, p: u32) -> Result<f64> {
    let c2 = f.params.cutoff().powi(2);
    f.pair_integral(f, |k2| (k2 / c2).powf(p as f64 / 2.0))
}

/// `F̃₁₂^(2) = ∫ dk/(2π)ⁿ (‖k‖/Λ)² Re[f̃₁* f̃₂]`.
pub fn cross_moment2(f1: &Smearing, f2: &Smearing) -> Result<f64> {
    let c2 = f1.params.cutoff().powi(2);
    f1.pair_integral(f2, |k2| k2 / c2)
}

/// Leading coefficient `C = (f̃₄ − f̃₂²)/16` of `ν − ½ ≈ Cλ⁴`.
pub fn excess_constant(f: &Smearing) -> Result<f64> {
    let f2 = f_moment(f, 2)?;
    let f4 = f_moment(f, 4)?;
    Ok((f4 - f2 * f2) / 16.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sp(lambda: f64, x: f64) -> Smearing {
        Smearing::sample_point(ModelParams::one_dim(lambda).unwrap(), &[x]).unwrap()
    }

    #[test]
    fn sample_point_moments_closed_form() {
        let m = moments_single(&sp(0.1, 0.0)).unwrap();
        let l: f64 = 0.1;
        let phi = l.asinh() / (2.0 * l);
        let pi = 0.25 * ((1.0 + l * l).sqrt() + l.asinh() / l);
        assert_relative_eq!(m.d_phi2, phi, max_relative = 1e-13);
        assert_relative_eq!(m.d_pi2, pi, max_relative = 1e-13);
        assert_relative_eq!(m.d_phi2, 0.499_170_39, epsilon = 1e-8);
        assert_relative_eq!(m.d_pi2, 0.500_832_09, epsilon = 1e-8);
        assert_relative_eq!(m.uncertainty_product(), 0.250_000_55, epsilon = 1e-8);
        assert!(m.phi12.is_none());
    }

    #[test]
    fn excess_from_variances_matches_direct_route() {
        let m = VacuumMoments::from_variances(0.49, 0.52, None, None);
        assert_relative_eq!(m.nu_excess(), m.nu() - 0.5, max_relative = 1e-12);
        let exact = moments_single(&sp(0.3, 0.0)).unwrap();
        let rebuilt = VacuumMoments::from_variances(exact.d_phi2, exact.d_pi2, None, None);
        assert_relative_eq!(rebuilt.split, exact.split, max_relative = 1e-10);
    }

    #[test]
    fn stable_excess_agrees_with_direct_route() {
        let m = moments_single(&sp(0.3, 1.0)).unwrap();
        assert_relative_eq!(m.nu_excess(), m.nu() - 0.5, max_relative = 1e-8);
    }

    #[test]
    fn excess_small_lambda_tracks_constant() {
        for l in [1e-3, 1e-5] {
            let m = moments_single(&sp(l, 0.0)).unwrap();
            let r = m.nu_excess() / (l.powi(4) / 180.0);
            assert!((r - 1.0).abs() < 1e-4, "λ={l}: ratio {r}");
        }
    }

    #[test]
    fn f_moments_and_constant() {
        let f = sp(0.2, 3.0);
        assert_relative_eq!(f_moment(&f, 0).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(f_moment(&f, 2).unwrap(), 1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(f_moment(&f, 4).unwrap(), 0.2, max_relative = 1e-13);
        assert_relative_eq!(excess_constant(&f).unwrap(), 1.0 / 180.0, max_relative = 1e-12);
    }

    #[test]
    fn pair_moments_nearest_neighbour() {
        let p = ModelParams::one_dim(0.1).unwrap();
        let f1 = Smearing::lattice_site(p, 0).unwrap();
        let f2 = Smearing::lattice_site(p, 1).unwrap();
        let m = moments_pair(&f1, &f2).unwrap();
        let phi12 = m.phi12.unwrap();
        let pi12 = m.pi12.unwrap();
        assert_relative_eq!(phi12, 5.036_5e-4, max_relative = 1e-4);
        assert_relative_eq!(pi12, -5.056_2e-4, max_relative = 1e-4);
        let lead = 0.01 / (2.0 * PI * PI);
        assert!((phi12 / lead - 1.0).abs() < 0.01);
        assert!((pi12 / lead + 1.0).abs() < 0.01);
        assert_relative_eq!(cross_moment2(&f1, &f2).unwrap(), -2.0 / (PI * PI), max_relative = 1e-12);
    }

    #[test]
    fn coincident_pair_equals_variances() {
        let f = sp(0.1, 2.0);
        let m = moments_pair(&f, &f).unwrap();
        assert_relative_eq!(m.phi12.unwrap(), m.d_phi2, max_relative = 1e-13);
        assert_relative_eq!(m.pi12.unwrap(), m.d_pi2, max_relative = 1e-13);
    }

    #[test]
    fn tabulated_flat_matches_sample_point() {
        let p = ModelParams::one_dim(0.4).unwrap();
        let nodes: Vec<f64> = (0..=40).map(|i| -0.4 + 0.02 * i as f64).collect();
        let values = vec![Complex64::new(3.0, 0.0); nodes.len()];
        let tab = Smearing::tabulated(p, nodes, values).unwrap();
        let a = moments_single(&tab).unwrap();
        let b = moments_single(&Smearing::sample_point(p, &[0.0]).unwrap()).unwrap();
        assert_relative_eq!(a.d_phi2, b.d_phi2, max_relative = 1e-12);
        assert_relative_eq!(a.d_pi2, b.d_pi2, max_relative = 1e-12);
        // the tabulated mode has the sample point's modulus, so pairing is allowed
        assert!(moments_pair(&tab, &Smearing::sample_point(p, &[1.0]).unwrap()).is_ok());
    }

    #[test]
    fn tabulated_cosine_is_renormalized() {
        let l = 0.5;
        let p = ModelParams::one_dim(l).unwrap();
        let nodes: Vec<f64> = (0..=200).map(|i| -l + l * i as f64 / 100.0).collect();
        let values = nodes
            .iter()
            .map(|k| Complex64::new((PI * k / (2.0 * l)).cos(), 0.0))
            .collect();
        let tab = Smearing::tabulated(p, nodes, values).unwrap();
        assert_relative_eq!(f_moment(&tab, 0).unwrap(), 1.0, max_relative = 1e-12);
        // f̃₂ = ∫u² cos²(πu/2) du / ∫cos²(πu/2) du = 1/3 − 2/π²
        let f2 = f_moment(&tab, 2).unwrap();
        assert_relative_eq!(f2, 1.0 / 3.0 - 2.0 / (PI * PI), max_relative = 1e-6);
    }

    #[test]
    fn tabulated_rejects_out_of_band_support() {
        let p = ModelParams::one_dim(0.1).unwrap();
        let nodes = vec![-0.2, -0.05, 0.0, 0.05, 0.2];
        let values = vec![Complex64::new(1.0, 0.0); 5];
        assert!(Smearing::tabulated(p, nodes, values).is_err());
    }

    #[test]
    fn unequal_modulus_pair_rejected() {
        let p = ModelParams::one_dim(0.5).unwrap();
        let nodes: Vec<f64> = (0..=50).map(|i| -0.5 + 0.02 * i as f64).collect();
        let values = nodes.iter().map(|k| Complex64::new(1.0 + k, 0.0)).collect();
        let tab = Smearing::tabulated(p, nodes, values).unwrap();
        let err = moments_pair(&tab, &Smearing::sample_point(p, &[0.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn sphere_single_mode_in_three_dimensions() {
        let p = ModelParams::new(3, 0.2, CutoffShape::Sphere).unwrap();
        let m = moments_single(&Smearing::sample_point(p, &[0.0; 3]).unwrap()).unwrap();
        assert!(m.uncertainty_product() > 0.25);
        // ball average of k²/Λ² is 3/5
        let f2 = f_moment(&Smearing::sample_point(p, &[0.0; 3]).unwrap(), 2).unwrap();
        assert_relative_eq!(f2, 0.6, max_relative = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn uncertainty_relation(l in 1e-3f64..0.99, x in -50.0f64..50.0) {
            let m = moments_single(&sp(l, x)).unwrap();
            prop_assert!(m.uncertainty_product() >= 0.25);
            prop_assert!(m.nu_excess() > 0.0);
        }

        #[test]
        fn translation_invariance(l in 0.01f64..0.9, shift in -100.0f64..100.0, n in 1i64..5) {
            let p = ModelParams::one_dim(l).unwrap();
            let d = n as f64 * p.lattice_spacing();
            let a = moments_pair(&sp(l, 0.0), &sp(l, d)).unwrap();
            let b = moments_pair(&sp(l, shift), &sp(l, shift + d)).unwrap();
            prop_assert!((a.phi12.unwrap() - b.phi12.unwrap()).abs() < 1e-13);
            prop_assert!((a.pi12.unwrap() - b.pi12.unwrap()).abs() < 1e-13);
        }

        #[test]
        fn pair_cauchy_schwarz_and_sign(l in 1e-3f64..0.5, n in 1i64..6) {
            let p = ModelParams::one_dim(l).unwrap();
            let m = moments_pair(&Smearing::lattice_site(p, 0).unwrap(), &Smearing::lattice_site(p, n).unwrap()).unwrap();
            let (phi12, pi12) = (m.phi12.unwrap(), m.pi12.unwrap());
            prop_assert!(phi12.abs() <= m.d_phi2 && pi12.abs() <= m.d_pi2);
            prop_assert!(phi12 * pi12 < 0.0);
        }
    }
}
