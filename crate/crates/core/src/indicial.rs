//! Indicial-root structure of the pair (n, k) and the indicial operator.
//!
//! The operator at order s is `I_s[φ] = Δ_b̊ φ + (s² - ns - (n - k + 2)) φ`,
//! diagonal over harmonic degrees with the degree-j block scaled by
//! `-j(j+k-2) + s² - ns - (n-k+2)`. Orders where some block vanishes are the
//! indicial roots; whether the root is an even or an odd integer decides
//! between a log obstruction and a removable constraint.
//!
//! All membership tests use exact integer arithmetic.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::fiber::FiberFunction;

/// `P_n(p) = n + 2 + 2np - 4p²`: codimensions with an even integer root.
pub fn p_poly(n: i64, p: i64) -> i64 {
    n + 2 + 2 * n * p - 4 * p * p
}

/// `Q_n(p) = 2n + 1 + 2(n-2)p - 4p²`: codimensions with an odd integer root.
pub fn q_poly(n: i64, p: i64) -> i64 {
    2 * n + 1 + 2 * (n - 2) * p - 4 * p * p
}

/// The exceptional codimension sets (E_n, O_n).
///
/// For even n both roots of an exceptional pair share their parity, and E_n /
/// O_n are generated by P_n / Q_n over `p = 0..=⌊n/4⌋`. For odd n the roots of
/// an exceptional pair have opposite parities, so every even-root codimension
/// also carries an odd root: E_n comes from P_n over `p = 1..=⌊n/2⌋` and
/// O_n = E_n ∪ {n+2}.
pub fn exceptional_sets(n: usize) -> (BTreeSet<i64>, BTreeSet<i64>) {
    assert!(n >= 2);
    let n = n as i64;
    let mut e = BTreeSet::new();
    let mut o = BTreeSet::new();
    if n % 2 == 0 {
        for p in 0..=(n / 4) {
            e.insert(p_poly(n, p));
            o.insert(q_poly(n, p));
        }
    } else {
        for p in 1..=(n / 2) {
            e.insert(p_poly(n, p));
        }
        o = e.clone();
        o.insert(n + 2);
    }
    (e, o)
}

/// Real indicial roots of `s² - ns - (n - k + 2) = 0`, ordered, when the
/// discriminant `n² + 4n - 4k + 8` is nonnegative. The pair always sums to n.
pub fn indicial_roots(n: usize, k: usize) -> Option<(f64, f64)> {
    assert!(n >= 1 && k >= 1);
    let disc = (n * n + 4 * n + 8) as i64 - 4 * k as i64;
    if disc < 0 {
        return None;
    }
    let sq = (disc as f64).sqrt();
    let n = n as f64;
    Some(((n - sq) / 2.0, (n + sq) / 2.0))
}

/// The scalar part of I_s at integer order s, exactly.
pub fn indicial_scalar_int(n: usize, k: usize, s: i64) -> i64 {
    let n = n as i64;
    s * s - n * s - (n - k as i64 + 2)
}

/// The scalar part of I_s at real order s.
pub fn indicial_scalar(n: usize, k: usize, s: f64) -> f64 {
    let n = n as f64;
    s * s - n * s - (n - k as f64 + 2.0)
}

/// Positive integer roots of the indicial polynomial in `1..=n`, ascending.
pub fn positive_integer_roots(n: usize, k: usize) -> Vec<i64> {
    (1..=n as i64)
        .filter(|&s| indicial_scalar_int(n, k, s) == 0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Classification {
    /// No integer indicial roots in (0, n]; the formal expansion is unique.
    Regular,
    /// Odd integer roots only: the expansion is unique once the resonant
    /// fiber averages are set to zero (the smooth, conformally invariant
    /// normalization).
    OddConstrained { resonant_orders: Vec<i64> },
    /// An even integer root ν: the expansion picks up `t^ν (log t)^p` with
    /// p = 2 exactly when ν = n/2 (possible only for n ∈ 4ℕ, k = n²/4 + n + 2).
    LogObstructed { nu: i64, log_power: u8 },
}

/// Indicial classification of a dimension/codimension pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicialReport {
    pub n: usize,
    pub k: usize,
    pub roots: Option<(f64, f64)>,
    pub e_set: BTreeSet<i64>,
    pub o_set: BTreeSet<i64>,
    pub classification: Classification,
}

/// Classifies (n, k) by indicial-root structure.
pub fn classify(n: usize, k: usize) -> IndicialReport {
    assert!(n >= 2 && k >= 2);
    let (e_set, o_set) = exceptional_sets(n);
    let roots = indicial_roots(n, k);
    let int_roots = positive_integer_roots(n, k);
    let classification = if e_set.contains(&(k as i64)) {
        // The obstruction lives at the smallest positive even root: at odd
        // roots the source has odd parity and its fiber average vanishes.
        let nu = *int_roots
            .iter()
            .find(|&&s| s % 2 == 0)
            .expect("k in E_n must have an even integer root");
        let log_power = if 2 * nu == n as i64 { 2 } else { 1 };
        Classification::LogObstructed { nu, log_power }
    } else if o_set.contains(&(k as i64)) {
        let mut orders: Vec<i64> = int_roots.into_iter().filter(|s| s % 2 == 1).collect();
        orders.dedup();
        Classification::OddConstrained {
            resonant_orders: orders,
        }
    } else {
        Classification::Regular
    };
    IndicialReport {
        n,
        k,
        roots,
        e_set,
        o_set,
        classification,
    }
}

/// Applies `I_s` spectrally: the degree-j component is scaled by
/// `-j(j+k-2) + s² - ns - (n-k+2)`.
pub fn indicial_apply(n: usize, k: usize, s: f64, phi: &FiberFunction) -> FiberFunction {
    assert_eq!(phi.k(), k, "fiber function has codimension {}", phi.k());
    phi.laplacian().add(&phi.scale(indicial_scalar(n, k, s)))
}

/// Result of a spectral indicial solve.
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    /// I_s is injective on the stored degrees; the solution is unique.
    Unique(FiberFunction),
    /// A resonant degree was present but the source vanished there; the
    /// returned solution has that component set to zero (the invariant
    /// constraint fixing uniqueness).
    Constrained {
        solution: FiberFunction,
        resonant_degree: usize,
    },
    /// The source has a nonvanishing component in the kernel degree; the
    /// component is the log-coefficient source.
    Obstructed {
        resonant_degree: usize,
        component: FiberFunction,
    },
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&FiberFunction> {
        match self {
            SolveOutcome::Unique(w) | SolveOutcome::Constrained { solution: w, .. } => Some(w),
            SolveOutcome::Obstructed { .. } => None,
        }
    }
}

/// Solves `I_s[w] = F` degree by degree.
///
/// Resonance is detected exactly when s is integral: degree j is resonant iff
/// `j(j+k-2) = s² - ns - (n-k+2)` as integers. If the resonant component of F
/// is below `tol` in norm, the constrained solution (resonant component zero)
/// is returned; otherwise the obstruction component is handed back.
pub fn indicial_solve(
    n: usize,
    k: usize,
    s: f64,
    source: &FiberFunction,
    tol: f64,
) -> SolveOutcome {
    assert_eq!(source.k(), k);
    let s_int = if s.fract() == 0.0 && s.abs() < 4e15 {
        Some(s as i64)
    } else {
        None
    };
    let sigma = indicial_scalar(n, k, s);
    let max_deg = source.stored_degree();
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(max_deg + 1);
    let mut resonant: Option<usize> = None;
    for j in 0..=max_deg {
        let eigen = -(j as f64) * (j as f64 + k as f64 - 2.0);
        let is_resonant = match s_int {
            Some(si) => {
                let sigma_i = indicial_scalar_int(n, k, si);
                (j as i64) * (j as i64 + k as i64 - 2) == sigma_i
            }
            None => (eigen + sigma).abs() < 1e-12 * (1.0 + sigma.abs()),
        };
        let row_in: Vec<f64> = source.coeffs().get(j).cloned().unwrap_or_default();
        if is_resonant {
            let norm = source.degree_norm(j);
            if norm > tol {
                return SolveOutcome::Obstructed {
                    resonant_degree: j,
                    component: source.project(j),
                };
            }
            resonant = Some(j);
            coeffs.push(vec![0.0; row_in.len()]);
        } else {
            let denom = eigen + sigma;
            coeffs.push(row_in.iter().map(|c| c / denom).collect());
        }
    }
    let solution = FiberFunction::from_coeffs(source.basis(), coeffs);
    match resonant {
        Some(j) => SolveOutcome::Constrained {
            solution,
            resonant_degree: j,
        },
        None => SolveOutcome::Unique(solution),
    }
}
