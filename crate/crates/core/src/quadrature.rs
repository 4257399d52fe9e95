//! Gauss-Legendre integration over the momentum band.
//!
//! Every band integral in the crate goes through [`integrate_band`], which
//! applies the `(2π)⁻ⁿ` measure and converges by doubling the node count of a
//! tensor-product Gauss-Legendre rule until two successive estimates agree.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::field::{CutoffShape, ModelParams};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, lazily built rule of the given size.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("quadrature cache poisoned");
        map.entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]` split into `panels` equal subintervals.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            let half = 0.5 * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + half * x);
            }
            total += s * half;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pnm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
    (pn, d)
}

/// Convergence controls for band integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Requested relative tolerance.
    pub rel_tol: f64,
    /// Nodes per panel per axis for the first estimate.
    pub initial_nodes: usize,
    /// Panels per axis.
    pub panels: usize,
    /// Number of node doublings before giving up.
    pub max_doublings: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            initial_nodes: 16,
            panels: 1,
            max_doublings: 8,
        }
    }
}

impl QuadratureOptions {
    /// Options for an integrand carrying the phase `k·r` with `‖r‖Λ/π`
    /// half-periods across the band: at least `40·(N+1)` starting nodes.
    pub fn oscillatory(half_periods: f64) -> Self {
        let n = half_periods.abs().ceil().max(0.0) as usize;
        Self {
            initial_nodes: 40 * (n + 1),
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Integrates `integrand(k)` over the band of `params` with the measure
/// `dk/(2π)ⁿ`.
///
/// For the sphere cutoff in `n ≥ 2` the integrand must be rotationally
/// invariant: it is evaluated on the first axis only and weighted by the
/// surface area of the `(n-1)`-sphere.
pub fn integrate_band<F>(integrand: F, params: &ModelParams, opts: QuadratureOptions) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = params.dimension();
    let cutoff = params.cutoff();
    let radial = params.shape() == CutoffShape::Sphere && n >= 2;
    let measure = (2.0 * PI).powi(n as i32);

    let estimate = |nodes: usize| -> (f64, f64) {
        let rule = GaussLegendre::cached(nodes);
        if radial {
            let surface = if n == 2 { 2.0 * PI } else { 4.0 * PI };
            let mut k = vec![0.0; n];
            let mut signed = 0.0;
            let mut abs = 0.0;
            let h = cutoff / opts.panels as f64;
            for p in 0..opts.panels {
                let mid = h * (p as f64 + 0.5);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let r = mid + 0.5 * h * x;
                    k[0] = r;
                    let v = integrand(&k) * r.powi(n as i32 - 1) * w * 0.5 * h;
                    signed += v;
                    abs += v.abs();
                }
            }
            (signed * surface / measure, abs * surface / measure)
        } else {
            tensor_sum(&integrand, n, cutoff, &rule, opts.panels, measure)
        }
    };

    let max_nodes_per_axis = match n {
        1 => usize::MAX,
        2 => 2048,
        _ => 256,
    };
    let mut nodes = opts.initial_nodes.max(1);
    let (mut prev, _) = estimate(nodes);
    let mut achieved = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        if nodes.saturating_mul(2) > max_nodes_per_axis {
            break;
        }
        nodes *= 2;
        let (next, scale) = estimate(nodes);
        let diff = (next - prev).abs();
        let reference = next.abs().max(scale * 1e-3).max(f64::MIN_POSITIVE);
        achieved = diff / reference;
        prev = next;
        if achieved <= opts.rel_tol || diff == 0.0 {
            return Ok(next);
        }
    }
    Err(Error::Accuracy {
        estimate: prev,
        achieved,
        requested: opts.rel_tol,
    })
}

fn tensor_sum<F: Fn(&[f64]) -> f64>(
    integrand: &F,
    n: usize,
    cutoff: f64,
    rule: &GaussLegendre,
    panels: usize,
    measure: f64,
) -> (f64, f64) {
    // 1-D abscissae/weights covering [-Λ, Λ] with all panels.
    let h = 2.0 * cutoff / panels as f64;
    let mut xs = Vec::with_capacity(rule.len() * panels);
    let mut ws = Vec::with_capacity(rule.len() * panels);
    for p in 0..panels {
        let mid = -cutoff + h * (p as f64 + 0.5);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + 0.5 * h * x);
            ws.push(w * 0.5 * h);
        }
    }
    let m = xs.len();
    let mut k = vec![0.0; n];
    let mut idx = vec![0usize; n];
    let mut signed = 0.0;
    let mut abs = 0.0;
    loop {
        let mut w = 1.0;
        for d in 0..n {
            k[d] = xs[idx[d]];
            w *= ws[idx[d]];
        }
        let v = integrand(&k) * w;
        signed += v;
        abs += v.abs();
        // odometer increment
        let mut d = 0;
        loop {
            if d == n {
                return (signed / measure, abs / measure);
            }
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Integrates `f` over `[a, b]` by node doubling to relative tolerance.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_nodes: usize,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut nodes = initial_nodes.max(1);
    let eval = |nodes: usize| {
        let rule = GaussLegendre::cached(nodes);
        let s = rule.integrate(a, b, 1, &f);
        let abs = rule.integrate(a, b, 1, |x| f(x).abs());
        (s, abs)
    };
    let (mut prev, _) = eval(nodes);
    let mut achieved = f64::INFINITY;
    for _ in 0..12 {
        nodes *= 2;
        let (next, scale) = eval(nodes);
        let diff = (next - prev).abs();
        achieved = diff / next.abs().max(scale * 1e-3).max(f64::MIN_POSITIVE);
        prev = next;
        if achieved <= rel_tol || diff == 0.0 {
            return Ok(next);
        }
    }
    Err(Error::Accuracy {
        estimate: prev,
        achieved,
        requested: rel_tol,
    })
}
