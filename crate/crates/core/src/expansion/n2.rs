//! Full order-two expansion for surfaces (n = 2), any codimension.
//!
//! With v₀ = 1 the order-one equation gives v₁ = γ₁/8. The order-two source in
//! 2L-normalization is
//!
//! ```text
//! G₂ = (9-k)/32 γ₁² + (6-k)/64 |dγ₁|² + (2γ₂ - γ₁²) + R_g/(k+1)
//! ```
//!
//! and v₂ solves Δ v₂ + (k-4) v₂ = -G₂/2. The resonant degree is the fiber
//! average, and only at k = 4: a nonvanishing π₀(G₂) becomes the log term
//! t² log t · A with A = -π₀(G₂)/4, a pointwise conformal invariant of weight
//! -2; the remaining free average of v₂ is fixed to zero (a normalization that
//! is not conformally invariant, and flagged as such).

use crate::expansion::{ExpandError, JetSeries, LogTerm};
use crate::fiber::{FiberBasis, FiberFunction};
use crate::geometry::{FermiPointData, MetricJet};
use crate::indicial::{indicial_solve, SolveOutcome};

/// Order-two source G₂ (2L-normalized) as a fiber function of degree ≤ 2.
pub fn order2_source(point: &FermiPointData) -> Result<FiberFunction, ExpandError> {
    let k = point.jet.k as f64;
    let g1 = &point.gamma1;
    let g1_sq = g1.multiply(g1)?;
    let dg1_sq = g1.grad_inner(g1)?;
    let basis = g1.basis().clone();
    let mut src = g1_sq.scale((9.0 - k) / 32.0);
    src = src.add(&dg1_sq.scale((6.0 - k) / 64.0));
    src = src.add(&point.gamma2_combo);
    src = src.add(&FiberFunction::constant(
        &basis,
        point.r_g_point / (k + 1.0),
    ));
    Ok(src)
}

/// Fiber average of G₂ in closed form, valid for any k (no fiber algebra):
/// `(12 + 5k - k²)/64 · π₀(γ₁²) + π₀(2γ₂-γ₁²) + π₀(R_g)/(k+1)`.
pub fn order2_source_average(jet: &MetricJet) -> f64 {
    let k = jet.k as f64;
    (12.0 + 5.0 * k - k * k) / 64.0 * jet.gamma1_sq_average()
        + jet.gamma2_combo_average()
        + jet.scalar / (k + 1.0)
}

/// The log-anomaly coefficient A = -π₀(G₂)/(2(2ν - n)) with ν = 2, n = 2,
/// defined for k = 4 (where order two is resonant). A transforms with
/// conformal weight -2.
pub fn log_anomaly(jet: &MetricJet) -> f64 {
    assert_eq!(jet.n, 2);
    assert_eq!(jet.k, 4, "the order-two log anomaly lives at k = 4");
    -order2_source_average(jet) / 4.0
}

/// Fiber average of v₂ in closed form (k ≠ 4): `π₀(G₂) / (2(4-k))`.
pub fn v2_average(jet: &MetricJet) -> f64 {
    let k = jet.k as f64;
    assert!(jet.k != 4);
    order2_source_average(jet) / (2.0 * (4.0 - k))
}

/// Expands v = u/t to order two at a surface point.
///
/// For k = 4 the obstruction is routed into the log term (never a failure);
/// the jet then carries `t² log t · A` and a v₂ with zeroed fiber average.
pub fn expand_n2(point: &FermiPointData) -> Result<JetSeries, ExpandError> {
    let k = point.jet.k;
    assert_eq!(point.jet.n, 2);
    let basis: &std::sync::Arc<FiberBasis> = point.gamma1.basis();
    let v0 = FiberFunction::constant(basis, 1.0);
    let v1 = point.gamma1.scale(1.0 / 8.0);
    let g2 = order2_source(point)?;
    let tol = 1e-10 * g2.l2_norm().max(1.0);
    let rhs = g2.scale(-0.5);
    let (v2, log_terms, residual_order) = match indicial_solve(2, k, 2.0, &rhs, tol) {
        SolveOutcome::Unique(w) => (w, Vec::new(), 3),
        SolveOutcome::Constrained { solution, .. } => (solution, Vec::new(), 3),
        SolveOutcome::Obstructed {
            resonant_degree, ..
        } => {
            debug_assert_eq!(resonant_degree, 0);
            debug_assert_eq!(k, 4);
            let a = log_anomaly(&point.jet);
            // remove the obstructed average and solve for the rest; the free
            // average of v₂ is set to zero (not conformally invariant).
            let pi0 = rhs.fiber_average();
            let reduced = rhs.sub(&FiberFunction::constant(basis, pi0));
            let v2 = match indicial_solve(2, k, 2.0, &reduced, tol) {
                SolveOutcome::Constrained { solution, .. } => solution,
                SolveOutcome::Unique(w) => w,
                SolveOutcome::Obstructed { .. } => unreachable!("average was removed"),
            };
            let log = LogTerm {
                order: 2,
                power: 1,
                coeff: FiberFunction::constant(basis, a),
                free_average_zeroed: true,
            };
            (v2, vec![log], 2)
        }
    };
    Ok(JetSeries {
        n: 2,
        k,
        order: 2,
        v: vec![v0, v1, v2],
        log_terms,
        residual_order,
    })
}

/// Order-wise residual of the expansion: applies the order-two operator back
/// to v₂ and measures the defect against the source (round-trip check used by
/// the test suites; the symmetric engine certifies residuals on a t-grid).
pub fn order2_residual(point: &FermiPointData, series: &JetSeries) -> Result<f64, ExpandError> {
    let k = point.jet.k;
    let g2 = order2_source(point)?;
    let v2 = &series.v[2];
    let lhs = crate::indicial::indicial_apply(2, k, 2.0, v2);
    let mut defect = lhs.add(&g2.scale(0.5));
    // at k = 4 the fiber average of the source is carried by the log term
    if let Some(log) = series.log_terms.first() {
        // (2s - n) A = 2·2 - 2 = 2 times A cancels the average
        defect = defect.add(&log.coeff.scale(2.0));
    }
    Ok(defect.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::symmetric::expand_symmetric;
    use crate::geometry::models::WarpedModel;
    use crate::geometry::random::{random_jet, random_omega};
    use crate::geometry::{conformal::rescale_jet, FermiPointData};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn round_geodesic_point(k: usize) -> FermiPointData {
        let jet = MetricJet::round_sphere(
            2,
            k,
            DMatrix::identity(2, 2),
            vec![DMatrix::zeros(2, 2); k],
        );
        let basis = FiberBasis::full(k, 6);
        FermiPointData::from_jet(jet, &basis, 2.0, 1.0)
    }

    #[test]
    fn equatorial_matches_sine_jet() {
        // v₁ = 0, v₂ = -1/6 for the equatorial S² in S^{2+k}, k = 2, 3
        for k in [2usize, 3] {
            let p = round_geodesic_point(k);
            let series = expand_n2(&p).unwrap();
            assert!(series.v[1].l2_norm() < 1e-13);
            assert_relative_eq!(series.v[2].fiber_average(), -1.0 / 6.0, epsilon = 1e-11);
            assert!(series.v[2].sub(&series.v[2].project(0)).l2_norm() < 1e-11);
            assert!(series.log_terms.is_empty());
        }
    }

    #[test]
    fn totally_geodesic_flat_is_trivial() {
        let jet = MetricJet::flat(
            2,
            3,
            DMatrix::identity(2, 2),
            vec![DMatrix::zeros(2, 2); 3],
        );
        let basis = FiberBasis::full(3, 6);
        let p = FermiPointData::from_jet(jet, &basis, 0.0, 1.0);
        let series = expand_n2(&p).unwrap();
        assert!(series.v[1].l2_norm() < 1e-14);
        assert!(series.v[2].l2_norm() < 1e-13);
    }

    #[test]
    fn matches_symmetric_engine_on_equatorial() {
        for k in [2usize, 3] {
            let p = round_geodesic_point(k);
            let series = expand_n2(&p).unwrap();
            let m = WarpedModel::equatorial(2, k);
            let sym = expand_symmetric(&m, 2).unwrap();
            assert_relative_eq!(
                series.v[2].fiber_average(),
                sym.coeffs.coeff(2),
                epsilon = 1e-10
            );
            assert_relative_eq!(
                series.v[1].fiber_average(),
                sym.coeffs.coeff(1),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn critical_equatorial_has_no_anomaly() {
        // the equatorial S² ⊂ S⁶ (k = 4 = n + 2) is exactly solvable: the
        // obstruction vanishes and no log appears.
        let p = round_geodesic_point(4);
        assert!(order2_source_average(&p.jet).abs() < 1e-12);
        let series = expand_n2(&p).unwrap();
        assert!(series.log_terms.is_empty(), "no log for the exact model");
    }

    #[test]
    fn generic_k4_jet_hits_log() {
        let jet = random_jet(11, 2, 4, 0.4);
        let basis = FiberBasis::full(4, 6);
        let p = FermiPointData::from_jet(jet, &basis, 0.0, 1.0);
        let series = expand_n2(&p).unwrap();
        assert_eq!(series.log_terms.len(), 1);
        let log = &series.log_terms[0];
        assert_eq!(log.order, 2);
        assert_eq!(log.power, 1);
        assert!(log.free_average_zeroed);
        assert_relative_eq!(
            log.coeff.fiber_average(),
            log_anomaly(&p.jet),
            max_relative = 1e-9
        );
        // A must be nonzero for a generic jet and fiber-constant
        assert!(log.coeff.fiber_average().abs() > 1e-6);
        assert!(series.v[2].fiber_average().abs() < 1e-12);
        assert!(order2_residual(&p, &series).unwrap() < 1e-9);
    }

    #[test]
    fn order2_roundtrip_residual() {
        for seed in [3u64, 5, 9] {
            for k in [2usize, 3] {
                let jet = random_jet(seed, 2, k, 0.3);
                let basis = FiberBasis::full(k, 6);
                let p = FermiPointData::from_jet(jet, &basis, 0.1, 1.0);
                let series = expand_n2(&p).unwrap();
                let r = order2_residual(&p, &series).unwrap();
                assert!(r < 1e-10, "seed {seed} k {k}: residual {r}");
            }
        }
    }

    #[test]
    fn closed_form_averages_match_spectral() {
        for seed in [1u64, 2] {
            for k in [2usize, 3] {
                let jet = random_jet(seed, 2, k, 0.3);
                let basis = FiberBasis::full(k, 6);
                let p = FermiPointData::from_jet(jet.clone(), &basis, 0.0, 1.0);
                let g2 = order2_source(&p).unwrap();
                assert_relative_eq!(
                    g2.fiber_average(),
                    order2_source_average(&jet),
                    max_relative = 1e-9
                );
                let series = expand_n2(&p).unwrap();
                assert_relative_eq!(
                    series.v[2].fiber_average(),
                    v2_average(&jet),
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn anomaly_conformal_weight() {
        // Â = e^{-2ω} A under smooth conformal factors with generic 2-jets
        for seed in 0..6u64 {
            let jet = random_jet(100 + seed, 2, 4, 0.35);
            let omega = random_omega(200 + seed, 2, 4, 0.3);
            let hat = rescale_jet(&jet, &omega);
            let a = log_anomaly(&jet);
            let a_hat = log_anomaly(&hat);
            assert_relative_eq!(
                a_hat,
                (-2.0 * omega.value).exp() * a,
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn jet_series_parity() {
        let jet = random_jet(21, 2, 3, 0.4);
        let basis = FiberBasis::full(3, 6);
        let p = FermiPointData::from_jet(jet, &basis, 0.0, 1.0);
        let series = expand_n2(&p).unwrap();
        let report = series.parity_report(1e-9);
        assert!(report.ok, "violations {:?}", report.violations);
    }
}
