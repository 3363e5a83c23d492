//! Conformal rescaling of metric jets.
//!
//! Given ĝ = e^{2ω} g and the 2-jet of ω at a point of Σ, every field of a
//! [`MetricJet`] transforms by a closed formula; the rescaled jet is expressed
//! in the ĝ-adapted frames (tangent coordinate basis unchanged, normal frame
//! N̂_a = e^{-ω} N_a). The sign conventions are pinned by the
//! `flat_to_round_sphere` anchor test below: a flat jet composed with the
//! stereographic factor must reproduce the round-sphere curvature exactly.

use nalgebra::DMatrix;

use super::{idx4, idx_mixed, MetricJet};

/// 2-jet of a smooth conformal factor ω at a point of Σ.
///
/// Index layout: 0..n tangent (coordinate basis), n..n+k normal (orthonormal
/// frame). The Hessian is the full covariant Hessian of ω at the point.
#[derive(Debug, Clone)]
pub struct OmegaJet {
    pub n: usize,
    pub k: usize,
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

impl OmegaJet {
    pub fn constant(n: usize, k: usize, value: f64) -> Self {
        OmegaJet {
            n,
            k,
            value,
            grad: vec![0.0; n + k],
            hess: DMatrix::zeros(n + k, n + k),
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.k
    }
}

/// Rescales a jet to ĝ = e^{2ω} g.
pub fn rescale_jet(jet: &MetricJet, omega: &OmegaJet) -> MetricJet {
    assert_eq!(jet.n, omega.n);
    assert_eq!(jet.k, omega.k);
    let (n, k) = (jet.n, jet.k);
    let d = (n + k) as f64;
    let w = omega.value;
    let ew = w.exp();
    let hinv = jet.h0_inv();

    // |dω|² and Δω with h₀ raising tangential indices.
    let grad_tan = &omega.grad[..n];
    let grad_nor = &omega.grad[n..];
    let mut grad_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            grad_sq += hinv[(i, j)] * grad_tan[i] * grad_tan[j];
        }
    }
    grad_sq += grad_nor.iter().map(|g| g * g).sum::<f64>();
    let mut lap = 0.0;
    for i in 0..n {
        for j in 0..n {
            lap += hinv[(i, j)] * omega.hess[(i, j)];
        }
    }
    for a in 0..k {
        lap += omega.hess[(n + a, n + a)];
    }

    // B = Hess ω - dω⊗dω + ½|dω|² g
    let dim = n + k;
    let mut b = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        for q in 0..dim {
            let g_pq = if p < n && q < n {
                jet.h0[(p, q)]
            } else if p == q {
                1.0
            } else {
                0.0
            };
            b[(p, q)] = omega.hess[(p, q)] - omega.grad[p] * omega.grad[q] + 0.5 * grad_sq * g_pq;
        }
    }
    let b_nn = |a: usize, c: usize| b[(n + a, n + c)];

    // ĥ₀ = e^{2ω} h₀
    let h0_hat = jet.h0.scale(ew * ew);

    // 𝔏̂ᵃ_ij = e^{ω}(𝔏ᵃ_ij - h₀_ij ωᵃ)
    let l_hat: Vec<DMatrix<f64>> = (0..k)
        .map(|a| (&jet.l[a] - jet.h0.scale(grad_nor[a])).scale(ew))
        .collect();

    // R̂_ab (frame components): e^{-2ω}[R_ab - (d-2)(H_ab - ω_a ω_b)
    //                                   - (Δω + (d-2)|dω|²) δ_ab]
    let mut ricci_hat = DMatrix::zeros(k, k);
    for a in 0..k {
        for c in 0..k {
            let h_ab = omega.hess[(n + a, n + c)];
            let corr = (d - 2.0) * (h_ab - grad_nor[a] * grad_nor[c])
                + if a == c {
                    lap + (d - 2.0) * grad_sq
                } else {
                    0.0
                };
            ricci_hat[(a, c)] = (jet.ricci_nn[(a, c)] - corr) / (ew * ew);
        }
    }

    // R̂_abce (frame components): e^{-2ω}[R_abce + (g⊙B)_abce] with
    // (g⊙B)_ABCE = g_AC B_BE + g_BE B_AC - g_AE B_BC - g_BC B_AE.
    let mut riem_hat = vec![0.0; k * k * k * k];
    for a in 0..k {
        for bb in 0..k {
            for c in 0..k {
                for e in 0..k {
                    let kn = delta(a, c) * b_nn(bb, e) + delta(bb, e) * b_nn(a, c)
                        - delta(a, e) * b_nn(bb, c)
                        - delta(bb, c) * b_nn(a, e);
                    riem_hat[idx4(k, a, bb, c, e)] =
                        (jet.riem_nnnn[idx4(k, a, bb, c, e)] + kn) / (ew * ew);
                }
            }
        }
    }

    // R̂_iabj (tangent coordinate indices, normal frame indices):
    // (R_iabj + (g⊙B)_iabj) with (g⊙B)_iabj = -h₀_ij B_ab - δ_ab B_ij.
    let mut mixed_hat = vec![0.0; n * k * k * n];
    for i in 0..n {
        for a in 0..k {
            for bb in 0..k {
                for j in 0..n {
                    let kn = -jet.h0[(i, j)] * b_nn(a, bb) - delta(a, bb) * b[(i, j)];
                    mixed_hat[idx_mixed(n, k, i, a, bb, j)] =
                        jet.riem_mixed[idx_mixed(n, k, i, a, bb, j)] + kn;
                }
            }
        }
    }

    // R̂_g = e^{-2ω}(R_g - 2(d-1)Δω - (d-1)(d-2)|dω|²)
    let scalar_hat = (jet.scalar - 2.0 * (d - 1.0) * lap - (d - 1.0) * (d - 2.0) * grad_sq)
        / (ew * ew);

    MetricJet {
        n,
        k,
        h0: h0_hat,
        l: l_hat,
        ricci_nn: ricci_hat,
        riem_nnnn: riem_hat,
        riem_mixed: mixed_hat,
        // the normal connection coefficients are conformally invariant
        gamma_mixed: jet.gamma_mixed.clone(),
        scalar: scalar_hat,
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}
