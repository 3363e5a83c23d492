//! Seeded random jets and conformal factors for the property suites.
//!
//! Random curvature blocks are built from Kulkarni–Nomizu squares of random
//! symmetric tensors, so all algebraic symmetries (pair antisymmetry, pair
//! exchange, first Bianchi) hold exactly.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::conformal::OmegaJet;
use super::{idx4, idx_mixed, MetricJet};

fn random_symmetric<R: Rng>(rng: &mut R, n: usize, amp: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-amp..amp);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Randomized perturbation jet around the round-sphere background.
///
/// Deterministic in `seed`; h₀ stays safely positive definite and the
/// curvature deviations keep every tensor symmetry exact.
pub fn random_jet(seed: u64, n: usize, k: usize, amplitude: f64) -> MetricJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = DMatrix::identity(n, n) + random_symmetric(&mut rng, n, amplitude.min(0.3));
    let l: Vec<DMatrix<f64>> = (0..k)
        .map(|_| random_symmetric(&mut rng, n, amplitude))
        .collect();
    let mut jet = MetricJet::round_sphere(n, k, h0, l);
    // Ricci deviation
    jet.ricci_nn += random_symmetric(&mut rng, k, amplitude);
    // Riemann deviation from Kulkarni–Nomizu squares T_ae T_bc - T_ac T_be;
    // two generators give a generic algebraic curvature tensor.
    for _ in 0..2 {
        let t = random_symmetric(&mut rng, k, amplitude.sqrt().min(0.5));
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for e in 0..k {
                        jet.riem_nnnn[idx4(k, a, b, c, e)] +=
                            t[(a, e)] * t[(b, c)] - t[(a, c)] * t[(b, e)];
                    }
                }
            }
        }
    }
    // mixed block deviation with the pair-exchange symmetry R_iabj = R_jbai
    let mut raw = vec![0.0; n * k * k * n];
    for v in raw.iter_mut() {
        *v = rng.gen_range(-amplitude..amplitude);
    }
    for i in 0..n {
        for a in 0..k {
            for b in 0..k {
                for j in 0..n {
                    let sym = 0.5
                        * (raw[idx_mixed(n, k, i, a, b, j)] + raw[idx_mixed(n, k, j, b, a, i)]);
                    jet.riem_mixed[idx_mixed(n, k, i, a, b, j)] += sym;
                }
            }
        }
    }
    // normal connection: antisymmetric in (a, b)
    for i in 0..n {
        for a in 0..k {
            for b in (a + 1)..k {
                let v = rng.gen_range(-amplitude..amplitude);
                jet.gamma_mixed[(i * k + a) * k + b] = v;
                jet.gamma_mixed[(i * k + b) * k + a] = -v;
            }
        }
    }
    jet.scalar += rng.gen_range(-amplitude..amplitude) * (n + k) as f64;
    jet
}

/// Random smooth conformal-factor jet (value, gradient, symmetric Hessian).
pub fn random_omega(seed: u64, n: usize, k: usize, amplitude: f64) -> OmegaJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = n + k;
    let value = rng.gen_range(-amplitude..amplitude);
    let grad = (0..dim).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
    let hess = random_symmetric(&mut rng, dim, amplitude);
    OmegaJet {
        n,
        k,
        value,
        grad,
        hess,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = random_jet(42, 2, 3, 0.2);
        let b = random_jet(42, 2, 3, 0.2);
        assert_eq!(a.h0, b.h0);
        assert_eq!(a.riem_nnnn, b.riem_nnnn);
        let c = random_jet(43, 2, 3, 0.2);
        assert!(a.riem_nnnn != c.riem_nnnn);
    }

    #[test]
    fn curvature_symmetries_exact() {
        let jet = random_jet(7, 2, 4, 0.4);
        let k = jet.k;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for e in 0..k {
                        let r = jet.riem_nnnn[idx4(k, a, b, c, e)];
                        assert_eq!(r, -jet.riem_nnnn[idx4(k, b, a, c, e)]);
                        assert_eq!(r, -jet.riem_nnnn[idx4(k, a, b, e, c)]);
                        assert_eq!(r, jet.riem_nnnn[idx4(k, c, e, a, b)]);
                        // first Bianchi
                        let bianchi = r
                            + jet.riem_nnnn[idx4(k, a, c, e, b)]
                            + jet.riem_nnnn[idx4(k, a, e, b, c)];
                        assert!(bianchi.abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn h0_positive_definite() {
        for seed in 0..20 {
            let jet = random_jet(seed, 2, 2, 0.3);
            let det = jet.h0[(0, 0)] * jet.h0[(1, 1)] - jet.h0[(0, 1)] * jet.h0[(1, 0)];
            assert!(det > 0.1, "seed {seed}: det {det}");
            assert!(jet.h0[(0, 0)] > 0.0);
        }
    }
}
