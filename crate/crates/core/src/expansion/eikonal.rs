//! Conformal distance-ratio (eikonal) expansion.
//!
//! If t and t̂ are the distance functions of g and ĝ = e^{2ω} g, the ratio
//! Ψ = t̂/t is smooth and solves E[Ψ] = 0 with
//!
//! ```text
//! E[f] = f² + 2 t f ∂_t f + t² (∂_t f)² + |d_ω f|²_b̊ - e^{2ω}
//! ```
//!
//! on the blown-up normal bundle (the flat-normal-bundle model operator; the
//! metric corrections are O(t²) relative and do not affect the orders solved
//! here). The indicial operator is multiplication by 2(1+s)Ψ₀, so each order
//! is solved by a scalar division: Ψ_s = -F_s / (2(1+s)Ψ₀).

use std::sync::Arc;

use crate::expansion::ExpandError;
use crate::fiber::{FiberBasis, FiberError, FiberFunction};

/// Coefficients of Ψ = t̂/t and of the conformal factor ω.
#[derive(Debug, Clone)]
pub struct EikonalSeries {
    pub psi: Vec<FiberFunction>,
    pub omega: Vec<FiberFunction>,
}

/// t-series with fiber-function coefficients.
type FSeries = Vec<FiberFunction>;

fn fs_zero(basis: &Arc<FiberBasis>, len: usize) -> FSeries {
    (0..len).map(|_| FiberFunction::zero(basis)).collect()
}

fn fs_add(a: &FSeries, b: &FSeries) -> FSeries {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn fs_sub(a: &FSeries, b: &FSeries) -> FSeries {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn fs_mul(a: &FSeries, b: &FSeries) -> Result<FSeries, FiberError> {
    let len = a.len();
    let basis = a[0].basis().clone();
    let mut out = fs_zero(&basis, len);
    for i in 0..len {
        for j in 0..len - i {
            let prod = a[i].multiply(&b[j])?;
            out[i + j] = out[i + j].add(&prod);
        }
    }
    Ok(out)
}

/// t ∂_t: scales the order-s coefficient by s.
fn fs_t_dt(a: &FSeries) -> FSeries {
    a.iter()
        .enumerate()
        .map(|(s, f)| f.scale(s as f64))
        .collect()
}

/// exp of a fiber series whose leading coefficient is fiber-constant.
fn fs_exp(a: &FSeries) -> Result<FSeries, FiberError> {
    let basis = a[0].basis().clone();
    let len = a.len();
    let lead = a[0].fiber_average();
    let mut out = fs_zero(&basis, len);
    out[0] = FiberFunction::constant(&basis, lead.exp());
    for m in 1..len {
        // m b_m = Σ_{i=1..m} i a_i b_{m-i}
        let mut acc = FiberFunction::zero(&basis);
        for i in 1..=m {
            let term = a[i].scale(i as f64).multiply(&out[m - i])?;
            acc = acc.add(&term);
        }
        out[m] = acc.scale(1.0 / m as f64);
    }
    Ok(out)
}

/// The eikonal defect E[f] as a fiber series of the same length.
fn eikonal_defect(f: &FSeries, omega: &FSeries) -> Result<FSeries, FiberError> {
    let g = fs_add(f, &fs_t_dt(f)); // f + t ∂_t f = ∂_t(t f)
    let g_sq = fs_mul(&g, &g)?;
    // |d_ω f|² via the polarized spectral identity, order by order
    let basis = f[0].basis().clone();
    let len = f.len();
    let mut grad_sq = fs_zero(&basis, len);
    for i in 0..len {
        for j in 0..len - i {
            let gi = f[i].grad_inner(&f[j])?;
            grad_sq[i + j] = grad_sq[i + j].add(&gi);
        }
    }
    let two_omega: FSeries = omega.iter().map(|w| w.scale(2.0)).collect();
    let e2w = fs_exp(&two_omega)?;
    Ok(fs_sub(&fs_add(&g_sq, &grad_sq), &e2w))
}

/// Expands Ψ = t̂/t to order N from the ω jets.
///
/// `omega[0]` must be fiber-constant (ω is smooth downstairs); coefficients
/// must share one basis.
pub fn eikonal_expand(omega: &[FiberFunction], order: usize) -> Result<EikonalSeries, ExpandError> {
    assert!(!omega.is_empty());
    let basis = omega[0].basis().clone();
    let lead_dev = omega[0].sub(&omega[0].project(0)).l2_norm();
    assert!(
        lead_dev < 1e-10,
        "omega_0 must be constant on each fiber (deviation {lead_dev:.3e})"
    );
    let len = order + 1;
    // pad ω to the working length
    let mut w: FSeries = fs_zero(&basis, len);
    for (i, wi) in omega.iter().enumerate().take(len) {
        w[i] = wi.clone();
    }
    let psi0_val = omega[0].fiber_average().exp();
    let mut psi = fs_zero(&basis, len);
    psi[0] = FiberFunction::constant(&basis, psi0_val);
    for s in 1..=order {
        let defect = eikonal_defect(&psi, &w)?;
        // orders < s vanish by induction; order s is the residual source
        let f_s = &defect[s];
        psi[s] = f_s.scale(-1.0 / (2.0 * (1.0 + s as f64) * psi0_val));
    }
    Ok(EikonalSeries {
        psi,
        omega: w,
    })
}

impl EikonalSeries {
    /// Max L² norm of the eikonal defect over orders 1..=N (order check).
    pub fn defect_norm(&self) -> Result<f64, ExpandError> {
        let d = eikonal_defect(&self.psi, &self.omega)?;
        Ok(d
            .iter()
            .take(self.psi.len())
            .map(|f| f.l2_norm())
            .fold(0.0, f64::max))
    }
}
