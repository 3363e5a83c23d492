//! One-dimensional quadrature: Gauss–Legendre and symmetric Gauss–Jacobi rules
//! (computed at runtime from the three-term recurrences) plus an adaptive
//! integrator built on nested Gauss panels.

use crate::special::{factorial, gamma_half};

/// Nodes and weights of a quadrature rule on [-1, 1] (or the interval handed
/// to [`adaptive`]).
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluates the symmetric Jacobi polynomial P_n^{(μ,μ)}(x) with 2μ = `two_mu`.
fn jacobi_sym(n: usize, two_mu: i32, x: f64) -> f64 {
    let mu = two_mu as f64 / 2.0;
    if n == 0 {
        return 1.0;
    }
    let mut pm1 = 1.0;
    let mut p = (mu + 1.0) * x;
    for j in 2..=n {
        let jf = j as f64;
        let a = 2.0 * jf * (jf + 2.0 * mu) * (2.0 * jf + 2.0 * mu - 2.0);
        let b = (2.0 * jf + 2.0 * mu - 1.0) * (2.0 * jf + 2.0 * mu) * (2.0 * jf + 2.0 * mu - 2.0);
        let c = 2.0 * (jf + mu - 1.0) * (jf + mu - 1.0) * (2.0 * jf + 2.0 * mu);
        let next = (b * x * p - c * pm1) / a;
        pm1 = p;
        p = next;
    }
    p
}

/// d/dx P_n^{(μ,μ)} via the shift identity P' = (n + 2μ + 1)/2 · P_{n-1}^{(μ+1,μ+1)}.
fn jacobi_sym_deriv(n: usize, two_mu: i32, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (n as f64 + two_mu as f64 + 1.0) / 2.0 * jacobi_sym(n - 1, two_mu + 2, x)
}

/// Gauss–Jacobi rule for the weight (1 - x²)^μ on [-1, 1], with 2μ = `two_mu`
/// an integer ≥ -1. `two_mu = 0` is Gauss–Legendre.
///
/// Exact for polynomial integrands of degree ≤ 2n - 1 against the weight.
pub fn gauss_jacobi_sym(n: usize, two_mu: i32) -> GaussRule {
    assert!(n >= 1);
    assert!(two_mu >= -1, "weight exponent must be >= -1/2");
    // Bracket the roots by dense sampling with Chebyshev spacing, then bisect.
    let samples = 8 * n + 32;
    let eval = |x: f64| jacobi_sym(n, two_mu, x);
    let mut roots = Vec::with_capacity(n);
    let grid: Vec<f64> = (0..=samples)
        .map(|i| -(std::f64::consts::PI * i as f64 / samples as f64).cos())
        .collect();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(a), eval(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = eval(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    assert_eq!(roots.len(), n, "failed to bracket all Jacobi roots");
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // w_i = 2^{2μ+1} Γ(n+μ+1)² / (Γ(n+2μ+1) n!) / ((1-x²) P'ₙ(x)²)
    let gnum = gamma_half((2 * n as i32 + two_mu + 2) as u32);
    let gden = {
        let arg = n as i32 + two_mu + 1;
        assert!(arg >= 1);
        gamma_half(2 * arg as u32)
    };
    let lead = 2f64.powf(two_mu as f64 + 1.0) * gnum * gnum / (gden * factorial(n as u32));
    let weights = roots
        .iter()
        .map(|&x| {
            let d = jacobi_sym_deriv(n, two_mu, x);
            lead / ((1.0 - x * x) * d * d)
        })
        .collect();
    GaussRule {
        nodes: roots,
        weights,
    }
}

/// Gauss–Legendre rule with `n` nodes on [-1, 1].
pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_jacobi_sym(n, 0)
}

/// Adaptive integration of `f` over [a, b] with nested 8/16-point Gauss panels.
///
/// Terminates when the per-panel error estimate sums below
/// `max(tol_abs, tol_rel · |I|)`.
pub fn adaptive<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol_abs: f64, tol_rel: f64) -> f64 {
    let coarse = gauss_legendre(8);
    let fine = gauss_legendre(16);
    let panel = |lo: f64, hi: f64| -> (f64, f64) {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let map = |x: f64| mid + half * x;
        let ic: f64 = coarse.integrate(|x| f(map(x))) * half;
        let i_f: f64 = fine.integrate(|x| f(map(x))) * half;
        (i_f, (i_f - ic).abs())
    };
    // Worklist bisection. A panel is accepted when its error estimate meets
    // the width-proportional tolerance share or is at the f64 rounding floor
    // of the panel value (otherwise steep integrands split without bound).
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let (i0, _) = panel(a, b);
    let scale = i0.abs().max(1.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = panel(lo, hi);
        let local_tol = (tol_abs.max(tol_rel * scale)) * (hi - lo) / (b - a);
        if err < local_tol || err < 1e-14 * val.abs() || depth >= 40 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}
