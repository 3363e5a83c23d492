//! Order-by-order solution of the conformal-factor jet v = u/t.
//!
//! Writing the singular Yamabe factor as u = t·v and expanding
//! `2L[u] = (n+2-k) - (n+k)|du|² + 2uΔu + R_g u²/(n+k-1)` in t produces, at
//! each order s, the indicial equation `I_s[v_s] = -F_s` with source F_s from
//! the lower orders. At a resonant order the source either vanishes on the
//! kernel (odd orders — the smooth normalization pins the solution) or feeds a
//! `t^ν (log t)^p` term whose coefficient is a pointwise conformal invariant.

pub mod eikonal;
pub mod n2;
pub mod symmetric;

use serde::Serialize;
use thiserror::Error;

use crate::fiber::{parity_degree_check, FiberFunction, FiberFunctionDto, ParityReport};

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error("obstruction at order {nu}: the fiber average of the source is {pi0:.6e}")]
    ObstructionHit { nu: usize, pi0: f64 },
    #[error("fiber algebra failed: {0}")]
    Fiber(#[from] crate::fiber::FiberError),
}

/// A log term `t^order (log t)^power · coeff` in the jet of v = u/t.
#[derive(Debug, Clone)]
pub struct LogTerm {
    /// Order in v (the log multiplies t^order in v, t^{order+1} in u).
    pub order: usize,
    pub power: u8,
    pub coeff: FiberFunction,
    /// The fiber-average normalization at the obstructed order is not
    /// conformally invariant; it is set to zero and flagged.
    pub free_average_zeroed: bool,
}

/// Jet of v = u/t: coefficients v₀…v_N plus optional log terms.
#[derive(Debug, Clone)]
pub struct JetSeries {
    pub n: usize,
    pub k: usize,
    pub order: usize,
    pub v: Vec<FiberFunction>,
    pub log_terms: Vec<LogTerm>,
    /// 2L[tv] = O(t^residual_order) is certified for the log-free part.
    pub residual_order: usize,
}

impl JetSeries {
    /// Parity/degree smoothness check on the coefficients.
    pub fn parity_report(&self, tol: f64) -> ParityReport {
        parity_degree_check(&self.v, tol)
    }

    /// Scalar coefficients, for fiber-constant series.
    pub fn constant_coeffs(&self) -> Vec<f64> {
        self.v.iter().map(|f| f.fiber_average()).collect()
    }

    pub fn to_dto(&self) -> JetSeriesDto {
        JetSeriesDto {
            n: self.n,
            k: self.k,
            order: self.order,
            v: self.v.iter().map(|f| f.to_dto()).collect(),
            log_terms: self
                .log_terms
                .iter()
                .map(|l| LogTermDto {
                    order: l.order,
                    power: l.power,
                    coeff: l.coeff.to_dto(),
                    free_average_zeroed: l.free_average_zeroed,
                })
                .collect(),
            residual_order: self.residual_order,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LogTermDto {
    pub order: usize,
    pub power: u8,
    pub coeff: FiberFunctionDto,
    pub free_average_zeroed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JetSeriesDto {
    pub n: usize,
    pub k: usize,
    pub order: usize,
    pub v: Vec<FiberFunctionDto>,
    pub log_terms: Vec<LogTermDto>,
    pub residual_order: usize,
}
