//! Renormalized volumes and energies.
//!
//! The volume form of g⁺ = u⁻²g near Σ factors as ϑ(t) dt dV_{h₀} dV_b̊ with
//! `ϑ = u^{-n-k} t^{k-1} √(det h det α / det h₀ det b̊)`; the Laurent
//! coefficients ϑ₀…ϑ_n of t^{n+1}ϑ drive the tube-volume expansion
//!
//! ```text
//! vol{t > ε} = c₀ ε^{-n} + … + c_{n-1} ε^{-1} + ℰ log(1/ε) + V + o(1),
//! ```
//!
//! with c_j = 0 for odd j (parity) and ℰ carried entirely by the fiber average
//! of ϑ_n. This module assembles ϑ for both the symmetric models (scalar
//! series, exact callables) and the order-two surface pipeline (fiber-valued
//! coefficients with the closed-form cross-checks), extracts (c, ℰ, V) from
//! tail-volume samples by least squares, and evaluates the closed-form
//! equatorial values and the n = 2 energy functionals.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expansion::symmetric::SymmetricExpansion;
use crate::expansion::{ExpandError, JetSeries};
use crate::fiber::{FiberError, FiberFunction};
use crate::geometry::models::WarpedModel;
use crate::geometry::surface::SurfaceGrid;
use crate::geometry::{FermiPointData, GeometryError, MetricJet};
use crate::quad::adaptive;
use crate::series::Series;
use crate::special::{gamma_half, sphere_area};

#[derive(Debug, Error)]
pub enum RenormError {
    #[error("fit is ill-conditioned (condition number {cond:.3e}); widen the ε window")]
    IllConditioned { cond: f64 },
    #[error("the n = 2 energy is undefined at the critical codimension k = 4 (use the anomaly field)")]
    CriticalCodimension,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
}

// ---------------------------------------------------------------------------
// ϑ profiles
// ---------------------------------------------------------------------------

/// ϑ data for a rotationally symmetric model.
#[derive(Debug, Clone)]
pub struct SymmetricTheta {
    pub n: usize,
    pub k: usize,
    /// Coefficients of t^{n+1} ϑ (index j is ϑ_j).
    pub coeffs: Series,
}

/// Scalar coefficients ϑ₀…ϑ_n of the symmetric model: t^{n+1}ϑ = v^{-n-k} φⁿ ψ̃^{k-1}.
pub fn theta_symmetric(model: &WarpedModel, expansion: &SymmetricExpansion) -> SymmetricTheta {
    let len = expansion.coeffs.len().max(model.n + 2);
    let v = expansion.coeffs.truncate(len);
    let phi = model.phi.jet(len);
    let psi_t = model.psi.jet(len).shift_down(1, 1e-13);
    let theta = &(&v.powi(-((model.n + model.k) as i64)) * &phi.powi(model.n as i64))
        * &psi_t.powi(model.k as i64 - 1);
    SymmetricTheta {
        n: model.n,
        k: model.k,
        coeffs: theta,
    }
}

/// ϑ data for the order-two surface pipeline at one point.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    /// ϑ₀, ϑ₁, ϑ₂ by direct series composition of u^{-n-k} √(det ratio).
    pub coeffs: Vec<FiberFunction>,
    /// ϑ₂ by the closed-form assembly; must match `coeffs[2]` to ~1e-9.
    pub theta2_closed: FiberFunction,
}

/// Builds ϑ₀…ϑ₂ from the jet series at a point (composition route) together
/// with the closed-form ϑ₂ (dual route).
pub fn theta_n2(point: &FermiPointData, series: &JetSeries) -> Result<ThetaJet, RenormError> {
    let k = point.jet.k as f64;
    let basis = point.gamma1.basis().clone();
    let one = FiberFunction::constant(&basis, 1.0);
    let g1 = &point.gamma1;
    let g1_sq = g1.multiply(g1)?;
    // γ₂ = (combo + γ₁²)/2
    let gamma2 = point.gamma2_combo.add(&g1_sq).scale(0.5);
    let v1 = &series.v[1];
    let v2 = &series.v[2];
    let p = k + 2.0; // n + k with n = 2

    // √(1 + tγ₁ + t²γ₂) = 1 + t γ₁/2 + t² (γ₂/2 - γ₁²/8)
    let s1 = g1.scale(0.5);
    let s2 = gamma2.scale(0.5).sub(&g1_sq.scale(1.0 / 8.0));
    // v^{-(n+k)} = 1 - p(t v₁ + t² v₂) + p(p+1)/2 t² v₁²
    let w1 = v1.scale(-p);
    let w2 = v2
        .scale(-p)
        .add(&v1.multiply(v1)?.scale(p * (p + 1.0) / 2.0));
    // product by t-order
    let theta0 = one.clone();
    let theta1 = s1.add(&w1);
    let theta2 = s2.add(&w2).add(&w1.multiply(&s1)?);

    // closed form: ϑ₂ = (1/8)[v₀²(4γ₂ - 2γ₁²) + v₀²γ₁² - 4(k+2)v₀(γ₁v₁ + 2v₂)
    //                      + 4(k+2)(k+3)v₁²]
    let theta2_closed = {
        let mut acc = gamma2.scale(4.0).sub(&g1_sq.scale(2.0));
        acc = acc.add(&g1_sq);
        let gv = g1.multiply(v1)?;
        acc = acc.sub(&gv.add(&v2.scale(2.0)).scale(4.0 * (k + 2.0)));
        acc = acc.add(&v1.multiply(v1)?.scale(4.0 * (k + 2.0) * (k + 3.0)));
        acc.scale(1.0 / 8.0)
    };
    Ok(ThetaJet {
        coeffs: vec![theta0, theta1, theta2],
        theta2_closed,
    })
}

/// π₀(ϑ₂) from the jet's curvature data (the fiber-average formula):
/// `(1/(8(k-4)))[k(10-k)/4 π₀(γ₁²) + 6k π₀(2γ₂-γ₁²) + 4(k+2)/(k+1) π₀(R_g)]`.
pub fn pi0_theta2_curvature(jet: &MetricJet) -> f64 {
    let k = jet.k as f64;
    assert!(jet.k != 4);
    (k * (10.0 - k) / 4.0 * jet.gamma1_sq_average()
        + 6.0 * k * jet.gamma2_combo_average()
        + 4.0 * (k + 2.0) / (k + 1.0) * jet.scalar)
        / (8.0 * (k - 4.0))
}

/// π₀(ϑ₂) from surface invariants (the reduced local form):
/// `[k(|𝔥|² + 4 tr P) + 4|𝔏̊|² - 8 R_h] / (8(4-k))`.
pub fn pi0_theta2_invariants(k: usize, mean_sq: f64, tr_p: f64, ltf_sq: f64, r_h: f64) -> f64 {
    let kf = k as f64;
    (kf * (mean_sq + 4.0 * tr_p) + 4.0 * ltf_sq - 8.0 * r_h) / (8.0 * (4.0 - kf))
}

// ---------------------------------------------------------------------------
// tail volumes and fitting
// ---------------------------------------------------------------------------

/// Tail volumes vol{t > ε} for a symmetric model at the given ε values,
/// with the fiber and cross-section areas folded in. Uses the exact u when the
/// model carries one, the truncated jet otherwise.
pub fn tail_volume_samples(model: &WarpedModel, v: &Series, eps: &[f64]) -> Vec<(f64, f64)> {
    let area = model.area_sigma * sphere_area(model.k);
    let theta = |t: f64| model.theta_pointwise(v, t);
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[b].partial_cmp(&eps[a]).unwrap());
    let mut out = vec![(0.0, 0.0); eps.len()];
    let mut acc = 0.0;
    let mut upper = model.t_max;
    for &idx in &order {
        let e = eps[idx];
        acc += adaptive(theta, e, upper, 1e-12, 1e-13);
        upper = e;
        out[idx] = (e, area * acc);
    }
    out
}

/// Fitted volume-expansion coefficients with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct VolumeExpansion {
    pub n: usize,
    pub k: usize,
    /// c₀ … c_{n-1}.
    pub c: Vec<f64>,
    pub energy: f64,
    pub v: f64,
    pub fit_residual: f64,
    pub condition_number: f64,
    pub eps_window: (f64, f64),
    /// Coefficient drift between sub-window fits (stability diagnostic).
    pub energy_drift: f64,
    pub v_drift: f64,
    /// Odd n with k ≥ n+2: the fitted V is formal only (no canonical global
    /// solution selects it).
    pub formal_only: bool,
}

/// Least-squares extraction of (c_j, ℰ, V) from tail-volume samples.
///
/// The fit basis is `{ε^{j-n}}_{j<n} ∪ {log(1/ε), 1}` plus the guard columns
/// `{ε, ε²}` that absorb the analytic o(1) tail of exact models; the guard
/// coefficients are not reported. Errors with [`RenormError::IllConditioned`]
/// when the (column-equilibrated) design matrix has condition number above
/// 1e10, the signature of a too-narrow ε window.
pub fn fit_expansion(
    samples: &[(f64, f64)],
    n: usize,
    k: usize,
) -> Result<VolumeExpansion, RenormError> {
    let full = fit_once(samples, n)?;
    // stability probe: refit on the lower and upper two-thirds of the window
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let two_thirds = samples.len() * 2 / 3;
    let lo = fit_once(&sorted[..two_thirds], n);
    let hi = fit_once(&sorted[samples.len() - two_thirds..], n);
    let (mut energy_drift, mut v_drift) = (f64::NAN, f64::NAN);
    if let (Ok(lo), Ok(hi)) = (&lo, &hi) {
        energy_drift = (lo.energy - hi.energy).abs();
        v_drift = (lo.v - hi.v).abs();
    }
    let eps_min = sorted.first().unwrap().0;
    let eps_max = sorted.last().unwrap().0;
    Ok(VolumeExpansion {
        n,
        k,
        c: full.c,
        energy: full.energy,
        v: full.v,
        fit_residual: full.fit_residual,
        condition_number: full.condition_number,
        eps_window: (eps_min, eps_max),
        energy_drift,
        v_drift,
        formal_only: n % 2 == 1 && k >= n + 2,
    })
}

struct RawFit {
    c: Vec<f64>,
    energy: f64,
    v: f64,
    fit_residual: f64,
    condition_number: f64,
}

fn fit_once(samples: &[(f64, f64)], n: usize) -> Result<RawFit, RenormError> {
    let m = samples.len();
    let ncols = n + 4; // n divergent columns + log + const + 2 guards
    assert!(m >= ncols + 2, "need at least {} samples", ncols + 2);
    let mut a = DMatrix::zeros(m, ncols);
    let mut b = DVector::zeros(m);
    for (row, &(e, t)) in samples.iter().enumerate() {
        for j in 0..n {
            a[(row, j)] = e.powi(j as i32 - n as i32);
        }
        a[(row, n)] = (1.0 / e).ln();
        a[(row, n + 1)] = 1.0;
        a[(row, n + 2)] = e;
        a[(row, n + 3)] = e * e;
        b[row] = t;
    }
    // column equilibration
    let scales: Vec<f64> = (0..ncols).map(|j| a.column(j).norm().max(1e-300)).collect();
    for (j, &s) in scales.iter().enumerate() {
        let mut col = a.column_mut(j);
        col /= s;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin;
    if cond > 1e10 {
        return Err(RenormError::IllConditioned { cond });
    }
    let mut xh = svd
        .solve(&b, 0.0)
        .expect("SVD solve cannot fail with computed factors");
    // one step of iterative refinement: the divergent columns span several
    // orders of magnitude and the small coefficients (V, the odd c_j) would
    // otherwise carry the rounding of the large ones.
    let r = &b - &a * &xh;
    if let Ok(dx) = svd.solve(&r, 0.0) {
        xh += dx;
    }
    let residual = (&a * &xh - &b).norm() / (m as f64).sqrt();
    let x: Vec<f64> = xh.iter().zip(&scales).map(|(v, s)| v / s).collect();
    Ok(RawFit {
        c: x[..n].to_vec(),
        energy: x[n],
        v: x[n + 1],
        fit_residual: residual,
        condition_number: cond,
    })
}

/// Log-spaced ε grid.
pub fn log_spaced(eps_min: f64, eps_max: f64, count: usize) -> Vec<f64> {
    assert!(eps_min > 0.0 && eps_min < eps_max && count >= 2);
    (0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            eps_min * (eps_max / eps_min).powf(f)
        })
        .collect()
}

/// CSV of (ε, tail volume) samples.
pub fn samples_to_csv(samples: &[(f64, f64)]) -> String {
    let mut s = String::from("epsilon,tail_volume\n");
    for &(e, t) in samples {
        s.push_str(&format!("{e:.12e},{t:.12e}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// closed forms and energies
// ---------------------------------------------------------------------------

/// Closed-form equatorial value: the energy ℰ_{n,k} for even n, the
/// renormalized volume V_{n,k} for odd n.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum ClosedFormValue {
    Energy(f64),
    Volume(f64),
}

impl ClosedFormValue {
    pub fn value(self) -> f64 {
        match self {
            ClosedFormValue::Energy(v) | ClosedFormValue::Volume(v) => v,
        }
    }
}

/// Closed-form renormalized energy/volume of the equatorial Sⁿ ⊂ S^{n+k}.
pub fn closed_form_equatorial(n: usize, k: usize) -> ClosedFormValue {
    assert!(n >= 1 && k >= 1);
    let pi = std::f64::consts::PI;
    if n % 2 == 0 {
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let val = sign * 4.0 * pi.powf((n + k) as f64 / 2.0)
            / (crate::special::factorial((n / 2) as u32) * gamma_half(k as u32));
        ClosedFormValue::Energy(val)
    } else {
        let sign = if ((n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let val = sign * 2.0 * pi.powf(1.0 + (n + k) as f64 / 2.0)
            / (gamma_half((n + 2) as u32) * gamma_half(k as u32));
        ClosedFormValue::Volume(val)
    }
}

/// Energy of a symmetric model straight from the ϑ coefficients:
/// ℰ = area(Σ) · area(S^{k-1}) · ϑ_n.
pub fn energy_from_theta(model: &WarpedModel, theta: &SymmetricTheta) -> f64 {
    model.area_sigma * sphere_area(model.k) * theta.coeffs.coeff(theta.n)
}

/// Expansion coefficients c_j = area(Σ)·area(S^{k-1})·ϑ_j/(n-j) predicted by
/// the ϑ series (for cross-checking fits against exact models).
pub fn coefficients_from_theta(model: &WarpedModel, theta: &SymmetricTheta) -> Vec<f64> {
    (0..theta.n)
        .map(|j| {
            model.area_sigma * sphere_area(model.k) * theta.coeffs.coeff(j)
                / (theta.n as f64 - j as f64)
        })
        .collect()
}

/// ℰ_{2,k} of a surface for k ≠ 4:
/// `vol(S^{k-1})/(8(4-k)) ∫_Σ (k(|𝔥|² + 4 tr P) + 4|𝔏̊|² - 8 R_h) dA`.
pub fn energy_n2(surface: &SurfaceGrid) -> Result<f64, RenormError> {
    let k = surface.codim;
    if k == 4 {
        return Err(RenormError::CriticalCodimension);
    }
    let kf = k as f64;
    let inv = surface.invariants()?;
    let integral: f64 = inv
        .par_iter()
        .map(|p| {
            (kf * (p.mean_sq + 4.0 * p.tr_p) + 4.0 * p.l_tracefree_sq - 8.0 * p.r_h)
                * p.area_weight
        })
        .sum();
    Ok(sphere_area(k) / (8.0 * (4.0 - kf)) * integral)
}

/// ℰ_{2,1} in the reduced codimension-one form `½ ∫ (|𝔏̊|² - R_h) dA`.
pub fn energy_codim1(surface: &SurfaceGrid) -> Result<f64, RenormError> {
    assert_eq!(surface.codim, 1, "reduced form is for hypersurfaces");
    let inv = surface.invariants()?;
    Ok(0.5
        * inv
            .iter()
            .map(|p| (p.l_tracefree_sq - p.r_h) * p.area_weight)
            .sum::<f64>())
}

/// The k = 4 pointwise conformal invariant: the energy integrand
/// `k(|𝔥|² + 4 tr P) + 4|𝔏̊|² - 8 R_h` per grid point (equal to 96·A).
pub fn anomaly_k4(surface: &SurfaceGrid) -> Result<Vec<f64>, RenormError> {
    assert_eq!(surface.codim, 4, "the anomaly field lives at k = 4");
    let inv = surface.invariants()?;
    Ok(inv
        .iter()
        .map(|p| 4.0 * (p.mean_sq + 4.0 * p.tr_p) + 4.0 * p.l_tracefree_sq - 8.0 * p.r_h)
        .collect())
}

/// Route-B energy: runs the full spectral pipeline per point (jet → v-series →
/// ϑ₂ composition → fiber average) and integrates. Agrees with [`energy_n2`]
/// on real surfaces; used as the internal consistency check.
pub fn energy_n2_via_theta(surface: &SurfaceGrid) -> Result<f64, RenormError> {
    let k = surface.codim;
    if k == 4 {
        return Err(RenormError::CriticalCodimension);
    }
    let basis = crate::fiber::FiberBasis::full(k, 6);
    let data = surface.fermi_data(&basis)?;
    let contributions: Vec<f64> = data
        .par_iter()
        .map(|point| -> Result<f64, RenormError> {
            let series = crate::expansion::n2::expand_n2(point)?;
            let theta = theta_n2(point, &series)?;
            Ok(theta.coeffs[2].fiber_average() * point.area_weight)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(sphere_area(k) * contributions.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::n2::expand_n2;
    use crate::expansion::symmetric::expand_symmetric;
    use crate::fiber::{parity_degree_check, FiberBasis};
    use crate::geometry::random::random_jet;
    use crate::geometry::surface;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn theta_flat_is_delta() {
        let m = WarpedModel::flat(2, 3);
        let e = expand_symmetric(&m, 3).unwrap();
        let th = theta_symmetric(&m, &e);
        assert_relative_eq!(th.coeffs.coeff(0), 1.0, epsilon = 1e-13);
        for j in 1..=3 {
            assert!(th.coeffs.coeff(j).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_equatorial_2_2() {
        // t³ϑ = cos²t (sin t/t)^{-3}: ϑ₀ = 1, ϑ₁ = 0, ϑ₂ = -1/2
        let m = WarpedModel::equatorial(2, 2);
        let e = expand_symmetric(&m, 3).unwrap();
        let th = theta_symmetric(&m, &e);
        assert_relative_eq!(th.coeffs.coeff(0), 1.0, epsilon = 1e-12);
        assert!(th.coeffs.coeff(1).abs() < 1e-12);
        assert_relative_eq!(th.coeffs.coeff(2), -0.5, epsilon = 1e-11);
        // matches the Taylor expansion of the exact integrand
        let t = 0.05;
        let exact = m.theta_pointwise(&e.coeffs, t);
        let series = th.coeffs.eval(t) / t.powi(3);
        assert_relative_eq!(exact, series, max_relative = 1e-6);
    }

    #[test]
    fn theta_parity_on_models() {
        // odd ϑ coefficients of symmetric models vanish
        for (n, k) in [(2usize, 2usize), (3, 2), (4, 3)] {
            let m = WarpedModel::equatorial(n, k);
            let e = expand_symmetric(&m, n + 1).unwrap();
            let th = theta_symmetric(&m, &e);
            for j in (1..=n).step_by(2) {
                assert!(
                    th.coeffs.coeff(j).abs() < 1e-11,
                    "({n},{k}) ϑ_{j} = {}",
                    th.coeffs.coeff(j)
                );
            }
        }
    }

    #[test]
    fn energy_from_theta_matches_closed_form() {
        for (n, k) in [(2usize, 2usize), (2, 3)] {
            let m = WarpedModel::equatorial(n, k);
            let e = expand_symmetric(&m, n + 1).unwrap();
            let th = theta_symmetric(&m, &e);
            let energy = energy_from_theta(&m, &th);
            assert_relative_eq!(
                energy,
                closed_form_equatorial(n, k).value(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn closed_form_anchors() {
        assert_relative_eq!(
            closed_form_equatorial(2, 2).value(),
            -4.0 * PI * PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            closed_form_equatorial(1, 2).value(),
            -4.0 * PI * PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            closed_form_equatorial(3, 2).value(),
            8.0 / 3.0 * PI.powi(3),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            closed_form_equatorial(2, 3).value(),
            -8.0 * PI * PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn synthetic_fit_roundtrip() {
        // exact model data -> coefficients recovered to 1e-8
        let n = 2;
        let (c0, c1, energy, v) = (3.0, 0.0, -39.478, 12.5);
        let eps = log_spaced(1e-3, 1e-2, 30);
        let samples: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| {
                (
                    e,
                    c0 * e.powi(-2) + c1 * e.powi(-1) + energy * (1.0 / e).ln() + v,
                )
            })
            .collect();
        let fit = fit_expansion(&samples, n, 2).unwrap();
        assert_relative_eq!(fit.c[0], c0, max_relative = 1e-9);
        assert!(fit.c[1].abs() < 1e-8);
        assert_relative_eq!(fit.energy, energy, max_relative = 1e-8);
        assert_relative_eq!(fit.v, v, max_relative = 1e-8);
        assert!(!fit.formal_only);
    }

    #[test]
    fn narrow_window_is_ill_conditioned() {
        let eps = log_spaced(1e-3, 1.02e-3, 12);
        let samples: Vec<(f64, f64)> = eps.iter().map(|&e| (e, e.powi(-2))).collect();
        match fit_expansion(&samples, 2, 2) {
            Err(RenormError::IllConditioned { cond }) => assert!(cond > 1e10),
            other => panic!("expected ill-conditioned fit, got {other:?}"),
        }
    }

    #[test]
    fn equatorial_fit_2_2() {
        let m = WarpedModel::equatorial(2, 2);
        let e = expand_symmetric(&m, 3).unwrap();
        let eps = log_spaced(1e-3, 1e-2, 28);
        let samples = tail_volume_samples(&m, &e.coeffs, &eps);
        let fit = fit_expansion(&samples, 2, 2).unwrap();
        assert_relative_eq!(fit.energy, -4.0 * PI * PI, max_relative = 1e-5);
        assert!(fit.c[1].abs() < 1e-6, "c1 = {}", fit.c[1]);
        // c0 = area·ϑ₀/n = 8π²/2
        assert_relative_eq!(fit.c[0], 4.0 * PI * PI, max_relative = 1e-6);
        let th = theta_symmetric(&m, &e);
        let pred = coefficients_from_theta(&m, &th);
        assert_relative_eq!(fit.c[0], pred[0], max_relative = 1e-6);
    }

    #[test]
    fn equatorial_fit_1_2_volume() {
        let m = WarpedModel::equatorial(1, 2);
        let e = expand_symmetric(&m, 2).unwrap();
        let eps = log_spaced(1e-3, 1e-2, 28);
        let samples = tail_volume_samples(&m, &e.coeffs, &eps);
        let fit = fit_expansion(&samples, 1, 2).unwrap();
        assert_relative_eq!(fit.v, -4.0 * PI * PI, max_relative = 1e-6);
        assert!(fit.energy.abs() < 1e-5, "odd n energy = {}", fit.energy);
        assert!(!fit.formal_only);
    }

    #[test]
    fn equatorial_fit_3_2_volume_and_parity() {
        let m = WarpedModel::equatorial(3, 2);
        let e = expand_symmetric(&m, 4).unwrap();
        let eps = log_spaced(1e-3, 1e-2, 28);
        let samples = tail_volume_samples(&m, &e.coeffs, &eps);
        let fit = fit_expansion(&samples, 3, 2).unwrap();
        assert_relative_eq!(fit.v, 8.0 / 3.0 * PI.powi(3), max_relative = 1e-5);
        // odd n: energy vanishes; odd coefficient c1 vanishes; c2 = -(5/6)·4π³
        assert!(fit.energy.abs() < 1e-5, "energy = {}", fit.energy);
        assert!(fit.c[1].abs() < 1e-6, "c1 = {}", fit.c[1]);
        assert_relative_eq!(fit.c[2], -10.0 * PI.powi(3) / 3.0, max_relative = 1e-6);
        assert_relative_eq!(fit.c[0], 4.0 * PI.powi(3) / 3.0, max_relative = 1e-8);
    }

    #[test]
    fn formal_only_flag() {
        let eps = log_spaced(1e-3, 1e-2, 24);
        let samples: Vec<(f64, f64)> = eps
            .iter()
            .map(|&e| (e, e.powi(-3) + 2.0 * e.powi(-1) + 5.0))
            .collect();
        let fit = fit_expansion(&samples, 3, 7).unwrap();
        assert!(fit.formal_only);
    }

    #[test]
    fn energy_equatorial_s2_in_s4() {
        let g = surface::equatorial_sphere(2, 16, 32);
        let e = energy_n2(&g).unwrap();
        assert_relative_eq!(e, -4.0 * PI * PI, max_relative = 1e-12);
    }

    #[test]
    fn energy_codim1_values() {
        // Clifford torus: ½ (2 - 0) · 2π² = 2π²
        let g = surface::clifford_torus(16);
        assert_relative_eq!(energy_codim1(&g).unwrap(), 2.0 * PI * PI, max_relative = 1e-10);
        // equatorial S² ⊂ S³: ½ (0 - 2) · 4π = -4π
        let s = surface::equatorial_sphere(1, 16, 32);
        assert_relative_eq!(energy_codim1(&s).unwrap(), -4.0 * PI, max_relative = 1e-10);
        // the general formula agrees with the reduced one at k = 1
        assert_relative_eq!(
            energy_n2(&g).unwrap(),
            energy_codim1(&g).unwrap(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            energy_n2(&s).unwrap(),
            energy_codim1(&s).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn critical_codimension_guard() {
        let g = surface::graph_perturbation(4, 1.0, 2.0, 0.02, 3, 8);
        match energy_n2(&g) {
            Err(RenormError::CriticalCodimension) => {}
            other => panic!("expected critical codimension error, got {other:?}"),
        }
        let field = anomaly_k4(&g).unwrap();
        assert_eq!(field.len(), 64);
    }

    #[test]
    fn anomaly_field_is_96_times_log_coefficient() {
        let g = surface::graph_perturbation(4, 1.0, 2.0, 0.05, 11, 8);
        let basis = FiberBasis::full(4, 6);
        let data = g.fermi_data(&basis).unwrap();
        let field = anomaly_k4(&g).unwrap();
        for (point, &f) in data.iter().zip(&field) {
            let a = crate::expansion::n2::log_anomaly(&point.jet);
            assert_relative_eq!(f, 96.0 * a, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_n2_dual_route_agreement() {
        for (seed, k) in [(1u64, 2usize), (2, 3), (3, 2)] {
            let jet = random_jet(seed, 2, k, 0.3);
            let basis = FiberBasis::full(k, 6);
            let p = FermiPointData::from_jet(jet, &basis, 0.1, 1.0);
            let series = expand_n2(&p).unwrap();
            let th = theta_n2(&p, &series).unwrap();
            let diff = th.coeffs[2].sub(&th.theta2_closed).l2_norm();
            assert!(diff < 1e-11, "seed {seed} k {k}: route gap {diff}");
            // ϑ parity
            let report = parity_degree_check(&th.coeffs, 1e-9);
            assert!(report.ok, "violations {:?}", report.violations);
        }
    }

    #[test]
    fn pi0_theta2_routes_agree_on_surfaces() {
        // curvature route vs invariant route: equal on real geometry
        let g = surface::graph_perturbation(2, 1.0, 2.0, 0.08, 5, 16);
        let basis = FiberBasis::full(2, 6);
        let data = g.fermi_data(&basis).unwrap();
        let inv = g.invariants().unwrap();
        for (p, q) in data.iter().zip(&inv) {
            let via_curv = pi0_theta2_curvature(&p.jet);
            let via_inv = pi0_theta2_invariants(2, q.mean_sq, q.tr_p, q.l_tracefree_sq, q.r_h);
            assert_relative_eq!(via_curv, via_inv, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn route_b_energy_matches_route_a() {
        let g = surface::graph_perturbation(2, 1.0, 2.0, 0.08, 5, 16);
        let a = energy_n2(&g).unwrap();
        let b = energy_n2_via_theta(&g).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
        // and on a sphere-ambient surface
        let g = surface::clifford_torus(16);
        let a = energy_n2(&g).unwrap();
        let b = energy_n2_via_theta(&g).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn surface_series_parity_end_to_end() {
        // jet series and ϑ coefficients of a generic codim-3 torus stay in
        // their parity classes
        let g = surface::graph_perturbation(3, 1.0, 2.0, 0.06, 9, 8);
        let basis = FiberBasis::full(3, 6);
        for point in g.fermi_data(&basis).unwrap() {
            let series = expand_n2(&point).unwrap();
            let rep = series.parity_report(1e-8);
            assert!(rep.ok, "series violations {:?}", rep.violations);
            let th = theta_n2(&point, &series).unwrap();
            let rep = parity_degree_check(&th.coeffs, 1e-8);
            assert!(rep.ok, "theta violations {:?}", rep.violations);
        }
    }

    #[test]
    fn csv_and_grid_helpers() {
        let eps = log_spaced(1e-2, 1e-1, 5);
        assert_eq!(eps.len(), 5);
        assert!(eps.windows(2).all(|w| w[0] < w[1]));
        let csv = samples_to_csv(&[(0.01, 5.0)]);
        assert!(csv.contains("epsilon"));
        assert!(csv.lines().count() == 2);
    }
}
