//! Fermi-coordinate metric jets and curvature invariants.
//!
//! A [`MetricJet`] holds everything the order-two expansion machinery needs at
//! a single point of Σ: the induced metric, the (normal-frame-valued) second
//! fundamental form, and the ambient curvature components with normal indices.
//! Tangent indices run over a coordinate basis (h₀ arbitrary SPD); normal
//! indices run over an orthonormal normal frame.
//!
//! Sign conventions: the Riemann tensor satisfies `R_AB = g^{CD} R_ACDB`, so
//! the unit round sphere has `R_ABCD = g_AD g_BC - g_AC g_BD` and positive
//! Ricci. The conformal-change anchor test in [`conformal`] pins these.

pub mod conformal;
pub mod models;
pub mod random;
pub mod surface;

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::fiber::{FiberBasis, FiberFunction};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("degenerate induced metric: det h0 = {det} at sample {index}")]
    DegenerateMetric { det: f64, index: usize },
    #[error("surface file is malformed: {0}")]
    BadSurfaceFile(String),
}

/// Ambient model space for surfaces and jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ambient {
    /// Flat ℝ^{n+k}.
    Flat,
    /// Unit round sphere S^{n+k} (embedded in ℝ^{n+k+1}).
    RoundSphere,
}

/// Metric jet at a point of Σ in Fermi coordinates.
///
/// Fields with normal indices are expressed in an orthonormal normal frame.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub n: usize,
    pub k: usize,
    /// Induced metric h₀ (n×n, SPD) in the tangent coordinate basis.
    pub h0: DMatrix<f64>,
    /// Second fundamental form 𝔏ᵃ_ij: one n×n symmetric matrix per normal a.
    pub l: Vec<DMatrix<f64>>,
    /// Normal-normal ambient Ricci components R_ab (k×k symmetric).
    pub ricci_nn: DMatrix<f64>,
    /// All-normal curvature components R_abcd (row-major k⁴).
    pub riem_nnnn: Vec<f64>,
    /// Mixed components R_iabj (n×k×k×n, row-major).
    pub riem_mixed: Vec<f64>,
    /// Normal-connection coefficients Γ_iab (n×k×k, antisymmetric in ab).
    pub gamma_mixed: Vec<f64>,
    /// Ambient scalar curvature at the point.
    pub scalar: f64,
}

impl MetricJet {
    /// Flat-ambient jet with prescribed second fundamental form.
    pub fn flat(n: usize, k: usize, h0: DMatrix<f64>, l: Vec<DMatrix<f64>>) -> Self {
        MetricJet {
            n,
            k,
            h0,
            l,
            ricci_nn: DMatrix::zeros(k, k),
            riem_nnnn: vec![0.0; k * k * k * k],
            riem_mixed: vec![0.0; n * k * k * n],
            gamma_mixed: vec![0.0; n * k * k],
            scalar: 0.0,
        }
    }

    /// Unit-round-ambient jet (ambient dimension d = n + k) with prescribed
    /// second fundamental form.
    pub fn round_sphere(n: usize, k: usize, h0: DMatrix<f64>, l: Vec<DMatrix<f64>>) -> Self {
        let d = (n + k) as f64;
        let mut riem = vec![0.0; k * k * k * k];
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for e in 0..k {
                        // R_abce = δ_ae δ_bc - δ_ac δ_be
                        riem[idx4(k, a, b, c, e)] =
                            delta(a, e) * delta(b, c) - delta(a, c) * delta(b, e);
                    }
                }
            }
        }
        // R_iabj with tangent i, j: the same pattern gives h₀_ij δ_ab.
        let mut mixed = vec![0.0; n * k * k * n];
        for i in 0..n {
            for a in 0..k {
                for b in 0..k {
                    for j in 0..n {
                        mixed[idx_mixed(n, k, i, a, b, j)] = h0[(i, j)] * delta(a, b);
                    }
                }
            }
        }
        MetricJet {
            n,
            k,
            h0,
            l,
            ricci_nn: DMatrix::identity(k, k) * (d - 1.0),
            riem_nnnn: riem,
            riem_mixed: mixed,
            gamma_mixed: vec![0.0; n * k * k],
            scalar: d * (d - 1.0),
        }
    }

    pub fn h0_inv(&self) -> DMatrix<f64> {
        self.h0
            .clone()
            .try_inverse()
            .expect("h0 must be invertible")
    }

    /// Mean curvature components 𝔥ᵃ = h₀^{ij} 𝔏ᵃ_ij.
    pub fn mean_curvature(&self) -> Vec<f64> {
        let hinv = self.h0_inv();
        self.l.iter().map(|la| (la * &hinv).trace()).collect()
    }

    pub fn mean_curvature_sq(&self) -> f64 {
        self.mean_curvature().iter().map(|h| h * h).sum()
    }

    /// ⟨𝔏ᵃ, 𝔏ᵇ⟩_{h₀} = h₀^{ik} h₀^{jl} 𝔏ᵃ_ij 𝔏ᵇ_kl.
    pub fn l_inner(&self, a: usize, b: usize) -> f64 {
        let hinv = self.h0_inv();
        let la = &hinv * &self.l[a] * &hinv;
        (&la * &self.l[b].transpose()).trace()
    }

    /// |𝔏|² = Σ_a ⟨𝔏ᵃ, 𝔏ᵃ⟩.
    pub fn l_norm_sq(&self) -> f64 {
        (0..self.k).map(|a| self.l_inner(a, a)).sum()
    }

    /// |𝔏̊|² = |𝔏|² - |𝔥|²/n.
    pub fn l_tracefree_sq(&self) -> f64 {
        self.l_norm_sq() - self.mean_curvature_sq() / self.n as f64
    }

    /// Normal Ricci trace g^{ab} R_ab.
    pub fn ricci_normal_trace(&self) -> f64 {
        self.ricci_nn.trace()
    }

    /// R_ab{}^{ba} = Σ_{a,b} R_abba over normal indices.
    pub fn riem_normal_double_trace(&self) -> f64 {
        let k = self.k;
        let mut acc = 0.0;
        for a in 0..k {
            for b in 0..k {
                acc += self.riem_nnnn[idx4(k, a, b, b, a)];
            }
        }
        acc
    }

    /// Σ_a R_acda as a k×k matrix in (c,d).
    pub fn riem_partial_trace(&self) -> DMatrix<f64> {
        let k = self.k;
        let mut m = DMatrix::zeros(k, k);
        for c in 0..k {
            for d in 0..k {
                let mut acc = 0.0;
                for a in 0..k {
                    acc += self.riem_nnnn[idx4(k, a, c, d, a)];
                }
                m[(c, d)] = acc;
            }
        }
        m
    }

    /// γ₁ = -2 c_a tr_{h₀} 𝔏ᵃ as a degree-1 fiber function.
    pub fn gamma1(&self, basis: &Arc<FiberBasis>) -> FiberFunction {
        assert_eq!(basis.k(), self.k);
        let h = self.mean_curvature();
        let mut acc = FiberFunction::zero(basis);
        for (a, &ha) in h.iter().enumerate() {
            if ha != 0.0 {
                acc = acc.add(&FiberFunction::coordinate(basis, a).scale(-2.0 * ha));
            }
        }
        acc
    }

    /// The combination 2γ₂ - γ₁² as a fiber function of degree ≤ 2:
    /// `-2 cᵃcᵇ R_ab + (4/3) Σ_a c^c c^d R_acda - 2 c_a c_b ⟨𝔏ᵃ,𝔏ᵇ⟩`.
    pub fn gamma2_combo(&self, basis: &Arc<FiberBasis>) -> FiberFunction {
        assert_eq!(basis.k(), self.k);
        let k = self.k;
        let part = self.riem_partial_trace();
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                m[(a, b)] = -2.0 * self.ricci_nn[(a, b)] + (4.0 / 3.0) * part[(a, b)]
                    - 2.0 * self.l_inner(a, b);
            }
        }
        quadratic_fiber(basis, &m)
    }

    /// Fiber average of 2γ₂ - γ₁² in closed form:
    /// `-(2/k) gᵃᵇR_ab + (4/3k) R_ab{}^{ba} - (2/k)|𝔏|²`.
    pub fn gamma2_combo_average(&self) -> f64 {
        let kf = self.k as f64;
        -2.0 / kf * self.ricci_normal_trace() + 4.0 / (3.0 * kf) * self.riem_normal_double_trace()
            - 2.0 / kf * self.l_norm_sq()
    }

    /// Fiber average of γ₁² in closed form: `4|𝔥|²/k`.
    pub fn gamma1_sq_average(&self) -> f64 {
        4.0 * self.mean_curvature_sq() / self.k as f64
    }

    /// h⁽¹⁾_ij = -2 c_a 𝔏ᵃ_ij as a fiber-function-valued matrix entry.
    pub fn h1_entry(&self, basis: &Arc<FiberBasis>, i: usize, j: usize) -> FiberFunction {
        let mut acc = FiberFunction::zero(basis);
        for a in 0..self.k {
            let lij = self.l[a][(i, j)];
            if lij != 0.0 {
                acc = acc.add(&FiberFunction::coordinate(basis, a).scale(-2.0 * lij));
            }
        }
        acc
    }

    /// h⁽²⁾_ij = c^a c^b (-R_iabj + 𝔏_{ail} 𝔏_{bj}{}^l + Γ_{ia}{}^c Γ_{jbc}) as a
    /// fiber-function-valued matrix entry.
    pub fn h2_entry(&self, basis: &Arc<FiberBasis>, i: usize, j: usize) -> FiberFunction {
        let (n, k) = (self.n, self.k);
        let hinv = self.h0_inv();
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let riem = self.riem_mixed[idx_mixed(n, k, i, a, b, j)];
                let ll = (self.l[a].row(i) * &hinv * self.l[b].column(j))[(0, 0)];
                let gg: f64 = (0..k)
                    .map(|c| {
                        self.gamma_mixed[(i * k + a) * k + c]
                            * self.gamma_mixed[(j * k + b) * k + c]
                    })
                    .sum();
                m[(a, b)] = -riem + ll + gg;
            }
        }
        quadratic_fiber(basis, &m)
    }

    /// The combination through which the mixed block a⁽⁰⁾_iν = c^a c^b_ν Γ_iab
    /// enters the order-two determinant: `c^a c^c Γ_iac` per tangent index.
    /// It vanishes identically because Γ is antisymmetric in its normal pair.
    pub fn a0_determinant_term(&self, basis: &Arc<FiberBasis>, i: usize) -> FiberFunction {
        let k = self.k;
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            for c in 0..k {
                m[(a, c)] = self.gamma_mixed[(i * k + a) * k + c];
            }
        }
        quadratic_fiber(basis, &m)
    }

    /// tr_b̊ b⁽²⁾ = -(1/3)(g^{ab} - c^a c^b) c^c c^d R_acdb as a fiber function;
    /// the c^a c^b c^c c^d part vanishes identically by antisymmetry, leaving
    /// `-(1/3) Σ_a c^c c^d R_acda`. b⁽¹⁾ vanishes identically.
    pub fn b2_trace(&self, basis: &Arc<FiberBasis>) -> FiberFunction {
        let part = self.riem_partial_trace();
        quadratic_fiber(basis, &part.scale(-1.0 / 3.0))
    }

    /// tr_{h₀}(P|_{TΣ}) for the stored ambient data, with
    /// P_AB = (R_AB - R_g g_AB / (2(d-1)))/(d-2), d = n + k.
    ///
    /// Uses the tangential Ricci trace R_g - g^{ab}R_ab.
    pub fn schouten_tan_trace(&self) -> f64 {
        let d = (self.n + self.k) as f64;
        let ric_tan = self.scalar - self.ricci_normal_trace();
        (ric_tan - self.scalar * self.n as f64 / (2.0 * (d - 1.0))) / (d - 2.0)
    }
}

/// Builds Σ_ab M_ab c^a c^b as a fiber function of degree ≤ 2.
pub fn quadratic_fiber(basis: &Arc<FiberBasis>, m: &DMatrix<f64>) -> FiberFunction {
    let k = basis.k();
    assert_eq!(m.nrows(), k);
    let mut acc = FiberFunction::zero(basis);
    for a in 0..k {
        for b in 0..k {
            let w = m[(a, b)];
            if w == 0.0 {
                continue;
            }
            let ca = FiberFunction::coordinate(basis, a);
            let cb = FiberFunction::coordinate(basis, b);
            let prod = ca
                .multiply(&cb)
                .expect("degree-2 products fit any cap >= 2");
            acc = acc.add(&prod.scale(w));
        }
    }
    acc
}

/// Per-point data consumed by the order-two expansion and the energies.
#[derive(Debug, Clone)]
pub struct FermiPointData {
    pub jet: MetricJet,
    /// γ₁ (degree ≤ 1, fiber average zero).
    pub gamma1: FiberFunction,
    /// 2γ₂ - γ₁² (degree ≤ 2).
    pub gamma2_combo: FiberFunction,
    pub r_g_point: f64,
    /// tr_{h₀} P|_{TΣ} of the ambient Schouten tensor.
    pub tr_p_tan: f64,
    /// Intrinsic scalar curvature of Σ at the point.
    pub r_h: f64,
    /// Quadrature weight × area element for surface integrals.
    pub area_weight: f64,
}

impl FermiPointData {
    pub fn from_jet(jet: MetricJet, basis: &Arc<FiberBasis>, r_h: f64, area_weight: f64) -> Self {
        let gamma1 = jet.gamma1(basis);
        let gamma2_combo = jet.gamma2_combo(basis);
        let r_g_point = jet.scalar;
        let tr_p_tan = jet.schouten_tan_trace();
        FermiPointData {
            jet,
            gamma1,
            gamma2_combo,
            r_g_point,
            tr_p_tan,
            r_h,
            area_weight,
        }
    }
}

pub(crate) fn idx4(k: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * k + b) * k + c) * k + d
}

pub(crate) fn idx_mixed(n: usize, k: usize, i: usize, a: usize, b: usize, j: usize) -> usize {
    ((i * k + a) * k + b) * n + j
}

pub(crate) fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::parity_degree_check;
    use approx::assert_relative_eq;

    fn geodesic_round_jet(n: usize, k: usize) -> MetricJet {
        MetricJet::round_sphere(
            n,
            k,
            DMatrix::identity(n, n),
            vec![DMatrix::zeros(n, n); k],
        )
    }

    #[test]
    fn gamma1_vanishes_for_minimal() {
        let jet = geodesic_round_jet(2, 2);
        let basis = FiberBasis::full(2, 8);
        assert!(jet.gamma1(&basis).l2_norm() < 1e-14);
    }

    #[test]
    fn gamma1_average_and_norm() {
        // codim-2 jet in flat space with 𝔏¹ = diag(κ, κ): |𝔥|² = 4κ²,
        // fiber average of γ₁ is 0 and avg(γ₁²) = 4|𝔥|²/k.
        let kappa = 0.37;
        let l1 = DMatrix::identity(2, 2) * kappa;
        let jet = MetricJet::flat(2, 2, DMatrix::identity(2, 2), vec![l1, DMatrix::zeros(2, 2)]);
        let basis = FiberBasis::full(2, 8);
        let g1 = jet.gamma1(&basis);
        assert!(g1.fiber_average().abs() < 1e-14);
        let sq = g1.multiply(&g1).unwrap();
        assert_relative_eq!(
            sq.fiber_average(),
            jet.gamma1_sq_average(),
            max_relative = 1e-11
        );
        assert_relative_eq!(jet.gamma1_sq_average(), 4.0 * 4.0 * kappa * kappa / 2.0);
    }

    #[test]
    fn gamma2_combo_average_matches_quadrature() {
        for k in [2usize, 3] {
            let jet = geodesic_round_jet(2, k);
            let basis = FiberBasis::full(k, 8);
            let combo = jet.gamma2_combo(&basis);
            assert_relative_eq!(
                combo.fiber_average(),
                jet.gamma2_combo_average(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn gamma2_combo_round_sphere_value() {
        // equatorial S² ⊂ S⁴: combo = -2(d-1)Σc² + (4/3)(k-1)Σc² with Σc² = 1:
        // -6 + 4/3 = -14/3, constant on the fiber.
        let jet = geodesic_round_jet(2, 2);
        let basis = FiberBasis::full(2, 8);
        let combo = jet.gamma2_combo(&basis);
        assert_relative_eq!(combo.fiber_average(), -14.0 / 3.0, max_relative = 1e-12);
        assert!(combo.degree_norm(2) < 1e-12);
        assert!(combo.degree_norm(1) < 1e-12);
    }

    #[test]
    fn flat_geodesic_all_zero() {
        let jet = MetricJet::flat(
            2,
            3,
            DMatrix::identity(2, 2),
            vec![DMatrix::zeros(2, 2); 3],
        );
        let basis = FiberBasis::full(3, 6);
        assert!(jet.gamma1(&basis).l2_norm() < 1e-14);
        assert!(jet.gamma2_combo(&basis).l2_norm() < 1e-14);
        assert!(jet.b2_trace(&basis).l2_norm() < 1e-14);
        assert_eq!(jet.schouten_tan_trace(), 0.0);
    }

    #[test]
    fn b2_trace_average_tracks_ambient_contraction() {
        let jet = geodesic_round_jet(2, 3);
        let basis = FiberBasis::full(3, 6);
        let b2 = jet.b2_trace(&basis);
        // for the round jet Σ_a R_acda = (k-1) δ_cd and avg(c^c c^d δ_cd) = 1,
        // so avg tr b⁽²⁾ = -(k-1)/3.
        assert_relative_eq!(
            b2.fiber_average(),
            -(jet.k as f64 - 1.0) / 3.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn schouten_trace_round_ambient() {
        // unit S^{2+k}: P = g/2, so the trace over a 2-plane is 1.
        for k in [1usize, 2, 3] {
            let jet = geodesic_round_jet(2, k);
            assert_relative_eq!(jet.schouten_tan_trace(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn h2_entry_round_jet() {
        // round ambient, geodesic Σ: h⁽²⁾_ij = -c^a c^b h₀_ij δ_ab = -h₀_ij
        let jet = geodesic_round_jet(2, 3);
        let basis = FiberBasis::full(3, 6);
        for i in 0..2 {
            for j in 0..2 {
                let h2 = jet.h2_entry(&basis, i, j);
                let expect = -jet.h0[(i, j)];
                let diff = h2.sub(&FiberFunction::constant(&basis, expect));
                assert!(diff.l2_norm() < 1e-11, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn a0_determinant_term_vanishes() {
        // Γ antisymmetric in (a,b) kills c^a c^b Γ_iab identically
        let jet = crate::geometry::random::random_jet(5, 2, 3, 0.5);
        let basis = FiberBasis::full(3, 6);
        for i in 0..2 {
            let w = jet.a0_determinant_term(&basis, i);
            assert!(w.l2_norm() < 1e-12, "tangent {i}: {}", w.l2_norm());
        }
    }

    #[test]
    fn circle_jet_gamma1_norm() {
        // round circle of radius ρ in flat ℝ³ (n = 1, k = 2):
        // 𝔥 = 1/ρ, fiber average of γ₁ is 0, avg(γ₁²) = 4|𝔥|²/k
        let rho = 1.7;
        let h0 = DMatrix::identity(1, 1) * rho * rho; // arc-length coordinate θ·ρ
        let mut l1 = DMatrix::zeros(1, 1);
        l1[(0, 0)] = -rho; // II(∂θ, ∂θ) = -ρ toward the inward normal
        let jet = MetricJet::flat(1, 2, h0, vec![l1, DMatrix::zeros(1, 1)]);
        assert_relative_eq!(jet.mean_curvature_sq(), 1.0 / (rho * rho), epsilon = 1e-13);
        let basis = FiberBasis::full(2, 8);
        let g1 = jet.gamma1(&basis);
        assert!(g1.fiber_average().abs() < 1e-14);
        let sq = g1.multiply(&g1).unwrap();
        assert_relative_eq!(
            sq.fiber_average(),
            4.0 * jet.mean_curvature_sq() / 2.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn h1_is_degree_one() {
        let mut l1 = DMatrix::zeros(2, 2);
        l1[(0, 1)] = 0.3;
        l1[(1, 0)] = 0.3;
        let jet = MetricJet::flat(2, 2, DMatrix::identity(2, 2), vec![l1, DMatrix::zeros(2, 2)]);
        let basis = FiberBasis::full(2, 8);
        let h1 = jet.h1_entry(&basis, 0, 1);
        let report = parity_degree_check(&[FiberFunction::constant(&basis, 1.0), h1], 1e-10);
        assert!(report.ok);
    }
}
