//! Model geometries: rotationally symmetric warped-product tubes with exact
//! profiles, and the catalog front-end used by the CLI.
//!
//! A warped model is the metric `dt² + φ(t)² g_Σ + ψ(t)² b̊` on
//! `Σⁿ × S^{k-1} × (0, t_max)`, with φ even, ψ odd, ψ'(0) = 1. The equatorial
//! Sⁿ ⊂ S^{n+k} is (cos, sin); the flat model is (1, t).

use crate::series::Series;
use crate::special::sphere_area;

/// Analytic radial profile with closed-form derivatives and Taylor jet.
#[derive(Debug, Clone)]
pub enum Profile {
    Cos,
    Sin,
    One,
    Ident,
    /// cos t + p(t) for an even polynomial p (coefficients by power).
    CosPlus(Vec<f64>),
    /// sin t + p(t) for an odd polynomial p.
    SinPlus(Vec<f64>),
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Cos => t.cos(),
            Profile::Sin => t.sin(),
            Profile::One => 1.0,
            Profile::Ident => t,
            Profile::CosPlus(p) => t.cos() + horner(p, t),
            Profile::SinPlus(p) => t.sin() + horner(p, t),
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match self {
            Profile::Cos => -t.sin(),
            Profile::Sin => t.cos(),
            Profile::One => 0.0,
            Profile::Ident => 1.0,
            Profile::CosPlus(p) => -t.sin() + horner(&poly_deriv(p), t),
            Profile::SinPlus(p) => t.cos() + horner(&poly_deriv(p), t),
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match self {
            Profile::Cos => -t.cos(),
            Profile::Sin => -t.sin(),
            Profile::One | Profile::Ident => 0.0,
            Profile::CosPlus(p) => -t.cos() + horner(&poly_deriv(&poly_deriv(p)), t),
            Profile::SinPlus(p) => -t.sin() + horner(&poly_deriv(&poly_deriv(p)), t),
        }
    }

    /// Taylor jet at t = 0 of the given length.
    pub fn jet(&self, len: usize) -> Series {
        match self {
            Profile::Cos => Series::cos(len),
            Profile::Sin => Series::sin(len),
            Profile::One => Series::constant(1.0, len),
            Profile::Ident => Series::identity(len),
            Profile::CosPlus(p) => &Series::cos(len) + &poly_series(p, len),
            Profile::SinPlus(p) => &Series::sin(len) + &poly_series(p, len),
        }
    }
}

fn horner(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

fn poly_series(p: &[f64], len: usize) -> Series {
    let mut c = vec![0.0; len];
    for (i, &ci) in p.iter().enumerate().take(len) {
        c[i] = ci;
    }
    Series::new(c)
}

/// Rotationally symmetric tube model `dt² + φ² g_Σ + ψ² b̊`.
#[derive(Debug, Clone)]
pub struct WarpedModel {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub phi: Profile,
    pub psi: Profile,
    /// Scalar curvature of the cross-section (Σ, g_Σ).
    pub r_sigma: f64,
    /// Volume of (Σ, g_Σ).
    pub area_sigma: f64,
    /// Upper end of the tube coordinate (focal distance or formal cutoff).
    pub t_max: f64,
    /// Exact singular Yamabe factor u(t) when known in closed form.
    pub exact_u: Option<Profile>,
}

impl WarpedModel {
    /// Equatorial Sⁿ ⊂ S^{n+k} (unit round): φ = cos, ψ = sin, u = sin.
    pub fn equatorial(n: usize, k: usize) -> Self {
        WarpedModel {
            name: format!("equatorial({n},{k})"),
            n,
            k,
            phi: Profile::Cos,
            psi: Profile::Sin,
            r_sigma: (n * (n - 1)) as f64,
            area_sigma: sphere_area(n + 1),
            t_max: std::f64::consts::FRAC_PI_2,
            exact_u: Some(Profile::Sin),
        }
    }

    /// Flat ℝⁿ ⊂ ℝ^{n+k} around a unit-volume cross-section: φ = 1, ψ = t,
    /// u = t. The tube is cut off formally at t = 1.
    pub fn flat(n: usize, k: usize) -> Self {
        WarpedModel {
            name: format!("flat({n},{k})"),
            n,
            k,
            phi: Profile::One,
            psi: Profile::Ident,
            r_sigma: 0.0,
            area_sigma: 1.0,
            t_max: 1.0,
            exact_u: Some(Profile::Ident),
        }
    }

    /// Equatorial model with even/odd polynomial perturbations of the
    /// profiles: φ = cos t + a₂ t², ψ = sin t + a₃ t³. Used to drive the
    /// indicial machinery off the exact solution (and into obstructions for
    /// exceptional codimensions).
    pub fn perturbed_equatorial(n: usize, k: usize, a2: f64, a3: f64) -> Self {
        WarpedModel {
            name: format!("perturbed({n},{k};{a2},{a3})"),
            n,
            k,
            phi: Profile::CosPlus(vec![0.0, 0.0, a2]),
            psi: Profile::SinPlus(vec![0.0, 0.0, 0.0, a3]),
            r_sigma: (n * (n - 1)) as f64,
            area_sigma: sphere_area(n + 1),
            t_max: 1.0,
            exact_u: None,
        }
    }

    /// Ambient scalar curvature of the warped product at radius t.
    pub fn scalar_curvature(&self, t: f64) -> f64 {
        let n = self.n as f64;
        let km1 = self.k as f64 - 1.0;
        let (phi, dphi, ddphi) = (self.phi.eval(t), self.phi.d1(t), self.phi.d2(t));
        let (psi, dpsi, ddpsi) = (self.psi.eval(t), self.psi.d1(t), self.psi.d2(t));
        self.r_sigma / (phi * phi) + km1 * (km1 - 1.0) / (psi * psi)
            - 2.0 * n * ddphi / phi
            - 2.0 * km1 * ddpsi / psi
            - n * (n - 1.0) * (dphi / phi).powi(2)
            - km1 * (km1 - 1.0) * (dpsi / psi).powi(2)
            - 2.0 * n * km1 * (dphi * dpsi) / (phi * psi)
    }

    /// Pointwise 2L[u] for a radial u(t) with supplied derivatives.
    pub fn two_l_radial(&self, t: f64, u: f64, du: f64, ddu: f64) -> f64 {
        let n = self.n as f64;
        let k = self.k as f64;
        let lap = ddu
            + (n * self.phi.d1(t) / self.phi.eval(t)
                + (k - 1.0) * self.psi.d1(t) / self.psi.eval(t))
                * du;
        (n + 2.0 - k) - (n + k) * du * du
            + 2.0 * u * lap
            + self.scalar_curvature(t) * u * u / (n + k - 1.0)
    }

    /// The volume-form profile ϑ(t) = u^{-n-k} t^{k-1} √(det h det α / det h₀ det b̊)
    /// of the exact model: u^{-n-k} φⁿ ψ^{k-1}.
    ///
    /// Uses the exact u when the model carries one, else the truncated jet v.
    pub fn theta_pointwise(&self, v_jet: &Series, t: f64) -> f64 {
        let u = match &self.exact_u {
            Some(p) => p.eval(t),
            None => t * v_jet.eval(t),
        };
        let phi = self.phi.eval(t);
        let psi = self.psi.eval(t);
        u.powi(-((self.n + self.k) as i32)) * phi.powi(self.n as i32) * psi.powi(self.k as i32 - 1)
    }

    /// √(det h det α / det h₀ det b̊) = φⁿ (ψ/t)^{k-1} of the exact model.
    /// Its Taylor coefficients must carry the parity of smooth ambient
    /// functions: every odd-order coefficient vanishes.
    pub fn det_ratio(&self, t: f64) -> f64 {
        self.phi.eval(t).powi(self.n as i32) * (self.psi.eval(t) / t).powi(self.k as i32 - 1)
    }
}

/// Parameters for [`model_catalog`].
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub n: usize,
    pub k: usize,
    pub resolution: usize,
    pub torus_a: f64,
    pub torus_c: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub phi2: f64,
    pub psi3: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 2,
            k: 2,
            resolution: 32,
            torus_a: 1.0,
            torus_c: 2.0,
            amplitude: 0.05,
            seed: 42,
            phi2: 0.0,
            psi3: 0.0,
        }
    }
}

/// A catalog entry: either an exact warped-product profile or a per-point
/// surface grid.
#[derive(Debug, Clone)]
pub enum ModelGeometry {
    Warped(WarpedModel),
    Surface(super::surface::SurfaceGrid),
}

/// Looks up a model geometry by name.
///
/// Symmetric profiles: `equatorial`, `flat`, `perturbed`. Surfaces:
/// `clifford_torus` (alias `clifford`), `clifford_stereographic`,
/// `torus_of_revolution` (alias `torus`), `graph_perturbation` (alias
/// `graph`), `equatorial_sphere`.
pub fn model_catalog(
    name: &str,
    p: &ModelParams,
) -> Result<ModelGeometry, super::GeometryError> {
    use super::surface;
    let m = p.resolution;
    match name {
        "equatorial" => Ok(ModelGeometry::Warped(WarpedModel::equatorial(p.n, p.k))),
        "flat" => Ok(ModelGeometry::Warped(WarpedModel::flat(p.n, p.k))),
        "perturbed" => Ok(ModelGeometry::Warped(WarpedModel::perturbed_equatorial(
            p.n, p.k, p.phi2, p.psi3,
        ))),
        "clifford_torus" | "clifford" => Ok(ModelGeometry::Surface(surface::clifford_torus(m))),
        "clifford_stereographic" | "clifford-stereographic" => Ok(ModelGeometry::Surface(
            surface::clifford_torus(m).stereographic_image()?,
        )),
        "torus_of_revolution" | "torus" => Ok(ModelGeometry::Surface(
            surface::torus_of_revolution(p.torus_a, p.torus_c, m),
        )),
        "graph_perturbation" | "graph" => Ok(ModelGeometry::Surface(surface::graph_perturbation(
            p.k,
            p.torus_a,
            p.torus_c,
            p.amplitude,
            p.seed,
            m,
        ))),
        "equatorial_sphere" | "equatorial-sphere" => Ok(ModelGeometry::Surface(
            surface::equatorial_sphere(p.k, m, 2 * m),
        )),
        other => Err(super::GeometryError::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_scalar_curvature() {
        // round S^{n+k} has R = (n+k)(n+k-1) at every radius
        for (n, k) in [(2usize, 2usize), (3, 2), (2, 3), (4, 3)] {
            let m = WarpedModel::equatorial(n, k);
            let d = (n + k) as f64;
            for &t in &[0.2, 0.7, 1.2] {
                assert_relative_eq!(m.scalar_curvature(t), d * (d - 1.0), max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn flat_scalar_curvature() {
        let m = WarpedModel::flat(2, 3);
        for &t in &[0.1, 0.5, 0.9] {
            assert!(m.scalar_curvature(t).abs() < 1e-11);
        }
    }

    #[test]
    fn sin_solves_yamabe_on_sphere() {
        // L[sin t] = 0 on the round warped product, for several (n,k)
        for (n, k) in [(2usize, 2usize), (2, 3), (3, 2), (4, 3), (2, 4)] {
            let m = WarpedModel::equatorial(n, k);
            for &t in &[0.05, 0.3, 0.8, 1.3] {
                let r = m.two_l_radial(t, t.sin(), t.cos(), -t.sin());
                assert!(r.abs() < 1e-10, "(n,k)=({n},{k}) t={t}: 2L = {r}");
            }
        }
    }

    #[test]
    fn ident_solves_yamabe_on_flat() {
        for (n, k) in [(2usize, 2usize), (3, 5), (2, 4)] {
            let m = WarpedModel::flat(n, k);
            for &t in &[0.1, 0.4, 0.9] {
                let r = m.two_l_radial(t, t, 1.0, 0.0);
                assert!(r.abs() < 1e-12, "flat 2L = {r}");
            }
        }
    }

    #[test]
    fn theta_closed_forms() {
        // flat: ϑ = t^{-n-1}
        let m = WarpedModel::flat(2, 3);
        let v = Series::constant(1.0, 4);
        for &t in &[0.2, 0.5] {
            assert_relative_eq!(m.theta_pointwise(&v, t), t.powi(-3), max_relative = 1e-13);
        }
        // equatorial: ϑ = cosⁿ t sin^{k-1} t / sin^{n+k} t
        let m = WarpedModel::equatorial(2, 2);
        for &t in &[0.2f64, 0.6, 1.0] {
            let expect = t.cos().powi(2) * t.sin().powi(1) / t.sin().powi(4);
            assert_relative_eq!(m.theta_pointwise(&v, t), expect, max_relative = 1e-12);
        }
    }

    /// Order-j (j ≤ 3) Taylor coefficient of f at 0 by parity-filtered central
    /// differences on a Richardson ladder. For j = 3 the first-order
    /// coefficient must vanish analytically (it is exactly what the parity
    /// tests assert).
    fn taylor_fd(f: &dyn Fn(f64) -> f64, j: usize, t0: f64) -> f64 {
        assert!((1..=3).contains(&j));
        let f0 = f(0.0);
        let levels: i32 = 5;
        let sample = |h: f64| {
            let even = 0.5 * (f(h) + f(-h)) - f0;
            let odd = 0.5 * (f(h) - f(-h));
            let part = if j % 2 == 0 { even } else { odd };
            part / h.powi(j as i32)
        };
        let hs: Vec<f64> = (0..levels).map(|m| t0 / 2f64.powi(m)).collect();
        let mut vals: Vec<f64> = hs.iter().map(|&h| sample(h)).collect();
        for level in 1..levels as usize {
            for i in (level..levels as usize).rev() {
                let ratio = (hs[i - level] / hs[i]).powi(2);
                vals[i] = (ratio * vals[i] - vals[i - 1]) / (ratio - 1.0);
            }
        }
        vals[levels as usize - 1]
    }

    #[test]
    fn determinant_ratio_parity() {
        // §-style parity of the volume-ratio expansion: odd coefficients of
        // √(det h det α / det h₀ det b̊) vanish for exact symmetric models,
        // extracted here by finite differences of the closed-form ratio.
        for (n, k) in [(2usize, 2usize), (2, 3), (3, 2), (4, 3)] {
            let m = WarpedModel::equatorial(n, k);
            let ratio = |t: f64| {
                if t.abs() < 1e-9 {
                    1.0
                } else {
                    m.det_ratio(t)
                }
            };
            for j in [1usize, 3] {
                let cj = taylor_fd(&ratio, j, 0.4);
                assert!(cj.abs() < 1e-8, "({n},{k}) odd ratio coeff {j}: {cj}");
            }
            // the even ones are genuinely nonzero
            let c2 = taylor_fd(&ratio, 2, 0.4);
            assert!(c2.abs() > 1e-3, "({n},{k}) c2 = {c2}");
        }
    }

    #[test]
    fn tube_determinant_parity_codim1() {
        // codim-1 tube of a surface in ℝ³: the ratio along the ±N normal rays
        // is det(I - t c S); order-j coefficients are odd/even in c as j is.
        let (a, c_r) = (1.0, 2.0);
        for &v in &[0.3f64, 1.1, 2.5] {
            let k1 = v.cos() / (c_r + a * v.cos());
            let k2 = 1.0 / a;
            let ratio = |t: f64, sign: f64| (1.0 - t * sign * k1) * (1.0 - t * sign * k2);
            for j in 1..=2usize {
                let plus = taylor_fd(&|t| ratio(t, 1.0), j, 0.1);
                let minus = taylor_fd(&|t| ratio(t, -1.0), j, 0.1);
                let expected = if j % 2 == 1 { -plus } else { plus };
                assert!(
                    (minus - expected).abs() < 1e-8,
                    "order {j}: {minus} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn catalog_dispatch() {
        let p = ModelParams {
            resolution: 8,
            ..ModelParams::default()
        };
        assert!(matches!(
            model_catalog("equatorial", &p),
            Ok(ModelGeometry::Warped(_))
        ));
        assert!(matches!(
            model_catalog("clifford_torus", &p),
            Ok(ModelGeometry::Surface(_))
        ));
        assert!(matches!(
            model_catalog("torus_of_revolution", &p),
            Ok(ModelGeometry::Surface(_))
        ));
        match model_catalog("moebius", &p) {
            Err(super::super::GeometryError::UnknownModel(name)) => assert_eq!(name, "moebius"),
            other => panic!("expected UnknownModel, got {other:?}"),
        }
    }

    #[test]
    fn profile_jets_match_pointwise() {
        let p = Profile::SinPlus(vec![0.0, 0.0, 0.0, 0.05]);
        let jet = p.jet(12);
        let t = 0.1f64;
        let mut fd = 0.0;
        for (i, &c) in jet.coeffs().iter().enumerate() {
            fd += c * t.powi(i as i32);
        }
        assert_relative_eq!(fd, p.eval(t), max_relative = 1e-12);
        // derivative consistency by central differences
        let h = 1e-5;
        let d1 = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
        assert_relative_eq!(d1, p.d1(t), max_relative = 1e-8);
        let d2 = (p.eval(t + h) - 2.0 * p.eval(t) + p.eval(t - h)) / (h * h);
        assert_relative_eq!(d2, p.d2(t), max_relative = 1e-5);
    }
}
