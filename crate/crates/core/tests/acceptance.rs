//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p kgband --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;

use kgband::bogoliubov::{build_pair, inequivalence_diagnostic, separability_witness, Verdict};
use kgband::field::{beta_density, bogoliubov_c};
use kgband::fit::fit_exponent;
use kgband::fock::fock_vacuum_check;
use kgband::gaussian::{
    assemble_covariance, effective_temperature, log_negativity, mode_entropy, partial_transpose,
    symplectic_spectrum, CovarianceMatrix, FrequencyChoice,
};
use kgband::moments::{moments_pair, moments_single, Smearing, VacuumMoments};
use kgband::oracle::{convergence_order, oracle_pair, OracleOptions};
use kgband::povm::{evolve, povm_expectation, povm_nonidempotency, Dispersion, MomentumWavefunction, Region};
use kgband::sampling::{field_commutator, interlattice_transform, BandlimitedFunction, SamplingLattice};
use kgband::{ModelParams, Result};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SI_2PI: f64 = 1.418_151_576_132_628_4;

/// Sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<(bool, String)>);

impl Checks {
    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.0.push((ok, detail.into()));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|(ok, _)| *ok)
    }
}

fn p1(lambda: f64) -> ModelParams {
    ModelParams::one_dim(lambda).unwrap()
}

fn site(lambda: f64, m: i64) -> Smearing {
    Smearing::lattice_site(p1(lambda), m).unwrap()
}

fn pair_moments(lambda: f64, n: i64) -> Result<VacuumMoments> {
    moments_pair(&site(lambda, 0), &site(lambda, n))
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (r * i as f64).exp()).collect()
}

fn single_oscillator(c: &mut Checks) -> Result<()> {
    let l: f64 = 0.1;
    let m = moments_single(&site(l, 0))?;
    let spec = symplectic_spectrum(&assemble_covariance(&m, 1)?)?;
    let nu = spec.nus[0];
    c.check((nu - 0.500_000_55).abs() <= 1e-9, format!("nu={nu:.12}"));
    let closed = (l.asinh() / (2.0 * l) * 0.25 * ((1.0 + l * l).sqrt() + l.asinh() / l)).sqrt();
    c.check((nu - closed).abs() <= 1e-9, format!("closed form {closed:.12}"));
    let ratio = m.nu_excess() / (l.powi(4) / 180.0);
    c.check((0.97..=1.00).contains(&ratio), format!("(nu-1/2)/(l^4/180)={ratio:.6}"));
    Ok(())
}

fn exponent_recovery(c: &mut Checks) -> Result<()> {
    let rows = geometric(1e-3, 1e-1, 13)
        .into_iter()
        .map(|l| Ok((l, moments_single(&site(l, 0))?.nu_excess())))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&rows)?;
    c.check((fit.exponent - 4.0).abs() <= 0.05, format!("exponent={:.5}", fit.exponent));
    let rel = fit.prefactor * 180.0 - 1.0;
    c.check(rel.abs() <= 0.02, format!("prefactor*180-1={rel:.2e}"));
    Ok(())
}

fn entropy_asymptotic(c: &mut Checks) -> Result<()> {
    let l: f64 = 0.01;
    let s = mode_entropy(moments_single(&site(l, 0))?.nu_excess());
    let x = l.powi(4) / 180.0;
    let approx = x * (1.0 - x.ln());
    let rel = s / approx - 1.0;
    c.check(rel.abs() <= 0.1, format!("S={s:.6e} asymptote={approx:.6e} rel={rel:.2e}"));
    Ok(())
}

fn negativity(c: &mut Checks) -> Result<()> {
    let l = 0.1;
    let mut values = Vec::new();
    for n in 1..=3 {
        let e = log_negativity(&assemble_covariance(&pair_moments(l, n)?, 2)?)?;
        values.push(e);
        let rel = e / (l * l / (PI * PI * (n * n) as f64)) - 1.0;
        c.check(rel.abs() <= 0.05, format!("N={n} E_N={e:.6e} rel={rel:+.3e}"));
    }
    for n in 2..=3 {
        let scaled = values[n - 1] * (n * n) as f64 / values[0];
        c.check((scaled - 1.0).abs() <= 0.05, format!("N={n} N^2 E_N/E_1={scaled:.4}"));
    }
    Ok(())
}

fn effective_temperature_decay(c: &mut Checks) -> Result<()> {
    let t = |l: f64| -> Result<f64> {
        Ok(effective_temperature(&moments_single(&site(l, 0))?, FrequencyChoice::MomentRatio)?.temperature)
    };
    let t01 = t(0.1)?;
    c.check((t01 / 0.0695 - 1.0).abs() <= 0.01, format!("k_BT(0.1)={t01:.6}"));
    let lambdas = geometric(1e-1, 1e-6, 21);
    let temps = lambdas.iter().map(|&l| t(l)).collect::<Result<Vec<_>>>()?;
    for p in [1, 2, 4] {
        let ratios: Vec<f64> = lambdas.iter().zip(&temps).map(|(l, t)| l.powi(p) / t).collect();
        let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
        let last = *ratios.last().unwrap();
        c.check(monotone, format!("p={p} monotone"));
        c.check(last < 1e-6, format!("p={p} ratio at 1e-6 = {last:.3e}"));
    }
    Ok(())
}

fn bogoliubov_validity(c: &mut Checks) -> Result<()> {
    for m in [16, 64, 256] {
        let v = build_pair(m, &p1(0.1))?.validity();
        c.check(
            v.canonical <= 1e-10 && v.symmetric <= 1e-10,
            format!("M={m} canonical={:.1e} symmetric={:.1e}", v.canonical, v.symmetric),
        );
    }
    Ok(())
}

fn vacuum_relation(c: &mut Checks) -> Result<()> {
    let pair = build_pair(2, &p1(0.3))?;
    let r12 = fock_vacuum_check(&pair, 12)?;
    c.check(r12 <= 1e-8, format!("residual(n_max=12)={r12:.2e}"));
    let rs = (4..=16).map(|n| fock_vacuum_check(&pair, n)).collect::<Result<Vec<_>>>()?;
    c.check(rs.windows(2).all(|w| w[1] <= w[0]), "non-increasing in n_max over 4..=16");
    Ok(())
}

fn non_separability(c: &mut Checks) -> Result<()> {
    let mut all = true;
    for l in [1e-2, 1e-1] {
        for n in 1..=5 {
            let v = separability_witness(&assemble_covariance(&pair_moments(l, n)?, 2)?)?;
            all &= v == Verdict::Entangled;
        }
    }
    c.check(all, "sample-point pairs entangled for N in 1..=5, lambda in {1e-2, 1e-1}");
    let y_scheme = VacuumMoments::from_variances(0.5, 0.5, Some(0.0), Some(0.0));
    let v = separability_witness(&assemble_covariance(&y_scheme, 2)?)?;
    c.check(v == Verdict::Separable, "zero-cross-term covariance separable");
    Ok(())
}

fn inequivalence(c: &mut Checks) -> Result<()> {
    let l: f64 = 0.1;
    let r = inequivalence_diagnostic(&p1(l), &[16, 32, 64, 128, 256])?;
    c.check(r.r_squared >= 1.0 - 1e-12, format!("R^2-1={:.1e}", r.r_squared - 1.0));
    c.check((r.slope_ratio - 1.0).abs() <= 1e-6, format!("slope/density-1={:.1e}", r.slope_ratio - 1.0));
    let d = beta_density(&p1(l))?;
    let series = l.powi(4) / 80.0 - l.powi(6) / 112.0;
    c.check((d / series - 1.0).abs() <= 1e-4, format!("density={d:.6e} series={series:.6e}"));
    c.check((d / 1.2411e-6 - 1.0).abs() <= 1e-4, "density golden 1.2411e-6");
    Ok(())
}

fn oracle_equivalence(c: &mut Checks) -> Result<()> {
    let l = 0.2;
    let opts = OracleOptions::default();
    let chain = oracle_pair(&p1(l), 1, 8192, 0.02, &opts)?;
    let cont = pair_moments(l, 1)?;
    let rel = |a: f64, b: f64| (a / b - 1.0).abs();
    for (name, a, b) in [
        ("dPhi2", chain.d_phi2, cont.d_phi2),
        ("dPi2", chain.d_pi2, cont.d_pi2),
        ("nu", chain.nu(), cont.nu()),
    ] {
        c.check(rel(a, b) <= 1e-3, format!("{name} rel={:.1e}", rel(a, b)));
    }
    let e_chain = log_negativity(&assemble_covariance(&chain, 2)?)?;
    let e_cont = log_negativity(&assemble_covariance(&cont, 2)?)?;
    c.check(rel(e_chain, e_cont) <= 1e-2, format!("E_N rel={:.1e}", rel(e_chain, e_cont)));
    let conv = convergence_order(&p1(l), &[0.16, 0.08, 0.04, 0.02], 163.84, &opts)?;
    c.check((conv.phi_order - 2.0).abs() <= 0.2, format!("order={:.3}", conv.phi_order));
    Ok(())
}

fn sampling_povm(c: &mut Checks) -> Result<()> {
    let params = p1(0.1);
    let a = params.lattice_spacing();
    let lat = SamplingLattice::new(params, &[0.0])?;
    let psi = BandlimitedFunction::sample_point_state(lat.clone(), 0.0, 256)?;
    let f = BandlimitedFunction::sample_point_state(lat.clone(), 3.7, 256)?;
    let exact = (-256..=256).all(|m| f.reconstruct(f.point(m)).map(|r| r.value) == Ok(f.sample(m).unwrap()));
    c.check(exact, "interpolation exact at retained samples");
    let p = povm_expectation(&psi, &Region::interval(-a, a)?)?;
    c.check((p - 0.9028).abs() <= 1e-4, format!("central cell P={p:.6}"));
    c.check((p - 2.0 / PI * SI_2PI).abs() <= 1e-10, "equals (2/pi)Si(2pi)");
    let d = povm_nonidempotency(&Region::interval(-0.5 * a, 0.5 * a)?, &lat, (-40, 40))?;
    c.check(d > 0.01, format!("|P^2-P|={d:.4}"));
    let k0 = field_commutator(&[2.0], &[2.0], &params)?;
    let k1 = field_commutator(&[2.0], &[2.0 + a], &params)?;
    c.check((k0 - 0.1 / PI).abs() <= 1e-15 && k1.abs() <= 1e-15, format!("commutator {k0:.6e}, {k1:.1e}"));
    Ok(())
}

fn invariants(c: &mut Checks) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(0x6b67);
    let worst = (0..1000)
        .map(|_| {
            let b = bogoliubov_c(&[rng.random_range(-1.0..1.0)]);
            (b.plus * b.plus - b.minus * b.minus - 1.0).abs()
        })
        .fold(0.0, f64::max);
    c.check(worst <= 1e-14, format!("c+^2-c-^2-1 worst={worst:.1e}"));

    let mut min_nu = f64::INFINITY;
    for _ in 0..200 {
        let l = rng.random_range(1e-3..0.99);
        let n = rng.random_range(1..8);
        let spec = symplectic_spectrum(&assemble_covariance(&pair_moments(l, n)?, 2)?)?;
        min_nu = min_nu.min(spec.nus[1]);
    }
    c.check(min_nu >= 0.5 - 1e-10, format!("min physical nu={min_nu:.15}"));

    let psi = MomentumWavefunction::cosine(p1(0.3))?;
    let drift = [-400.0, 7.0, 1e3]
        .iter()
        .flat_map(|&t| [Dispersion::Exact, Dispersion::NonRelativistic].map(|d| evolve(&psi, t, d).norm_sq()))
        .map(|n| (n - psi.norm_sq()).abs())
        .fold(0.0, f64::max);
    c.check(drift <= 1e-12, format!("evolution norm drift={drift:.1e}"));

    let cov = assemble_covariance(&pair_moments(0.4, 2)?, 2)?;
    let twice = partial_transpose(&partial_transpose(&cov, 0)?, 0)?;
    c.check(twice == cov, "partial transpose is an involution");
    let sigma = DMatrix::from_diagonal_element(4, 4, 0.5);
    let vac = CovarianceMatrix::physical(sigma)?;
    c.check(partial_transpose(&vac, 1)?.is_partially_transposed(), "transpose flag toggles");

    let lat = SamplingLattice::new(p1(0.2), &[0.0])?;
    let f = BandlimitedFunction::sample_point_state(lat, 1.3, 600)?;
    let g = interlattice_transform(&f, 0.37)?;
    let back = interlattice_transform(&g, 0.0)?;
    let err = (-50..=50)
        .map(|m| (back.sample(m).unwrap() - f.sample(m).unwrap()).norm())
        .fold(0.0, f64::max);
    let tol = f.truncation_estimate() + g.truncation_estimate();
    c.check(err <= tol, format!("round trip err={err:.1e} tol={tol:.1e}"));
    Ok(())
}

type Criterion = fn(&mut Checks) -> Result<()>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 12] = [
        ("single-oscillator symplectic eigenvalue", single_oscillator),
        ("exponent recovery", exponent_recovery),
        ("entropy asymptotic", entropy_asymptotic),
        ("logarithmic negativity", negativity),
        ("effective temperature", effective_temperature_decay),
        ("Bogoliubov validity", bogoliubov_validity),
        ("truncated-Fock vacuum relation", vacuum_relation),
        ("non-separability of the local scheme", non_separability),
        ("inequivalence diagnostic", inequivalence),
        ("lattice oracle equivalence", oracle_equivalence),
        ("sampling and POVM", sampling_povm),
        ("invariants", invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let mut checks = Checks::default();
        let outcome = run(&mut checks);
        let ok = outcome.is_ok() && checks.passed();
        if !ok {
            failed += 1;
        }
        println!("{} {:>2} {name}", if ok { "PASS" } else { "FAIL" }, i + 1);
        for (sub_ok, detail) in &checks.0 {
            println!("       {} {detail}", if *sub_ok { "ok  " } else { "FAIL" });
        }
        if let Err(e) = outcome {
            println!("       FAIL error: {e}");
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
