//! Exact small special functions: gamma at half-integer arguments and sphere
//! areas. Everything here is exact in f64 up to rounding of `√π` and the final
//! products, which is all the rest of the crate needs.

use std::f64::consts::PI;

/// Γ(m/2) for a positive integer `m`.
///
/// Even `m` gives a factorial, odd `m` gives `√π (m-2)!! / 2^{(m-1)/2}`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m >= 1, "gamma_half requires m >= 1");
    if m % 2 == 0 {
        factorial(m / 2 - 1)
    } else {
        PI.sqrt() * double_factorial_odd(m.saturating_sub(2)) / 2f64.powi((m as i32 - 1) / 2)
    }
}

/// n! as f64.
pub fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|i| i as f64).product()
}

/// m!! for odd m (with (-1)!! = 0!! = 1).
fn double_factorial_odd(m: u32) -> f64 {
    let mut acc = 1.0;
    let mut i = m as i64;
    while i >= 2 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}

/// Surface area of the unit sphere S^{k-1} ⊂ ℝ^k: `2 π^{k/2} / Γ(k/2)`.
///
/// `sphere_area(1) = 2` encodes the two-point measure on S⁰.
pub fn sphere_area(k: usize) -> f64 {
    assert!(k >= 1);
    2.0 * PI.powf(k as f64 / 2.0) / gamma_half(k as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_half_integers() {
        assert_relative_eq!(gamma_half(2), 1.0); // Γ(1)
        assert_relative_eq!(gamma_half(4), 1.0); // Γ(2)
        assert_relative_eq!(gamma_half(6), 2.0); // Γ(3)
        assert_relative_eq!(gamma_half(8), 6.0); // Γ(4)
    }

    #[test]
    fn gamma_half_odd() {
        assert_relative_eq!(gamma_half(1), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(3), PI.sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_half(5), 3.0 * PI.sqrt() / 4.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_half(7), 15.0 * PI.sqrt() / 8.0, max_relative = 1e-15);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
        // recurrence area(k+2) = 2π area(k) / k
        for k in 1..10 {
            assert_relative_eq!(
                sphere_area(k + 2),
                2.0 * PI * sphere_area(k) / k as f64,
                max_relative = 1e-13
            );
        }
    }
}
