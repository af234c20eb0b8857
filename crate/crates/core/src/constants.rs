//! Explicit constants of the vertical-to-global Hoelder estimate.
//!
//! `K_N = 2 V_{N-1} / V_N` bounds the gradient of a harmonic function at the
//! center of the unit ball; `gamma*` is the root in `(0, 1)` of
//! `2 g K / (1 - g)^2 = 1/2`. From the vertical constant `C` one gets
//!
//! ```text
//! C1 = (2 / gamma*) C
//! C2 = 4 K_N C1 / ((1 - alpha) cos(arctan L)^(2 - alpha))
//! C3 = (2 L + 3) C + C2
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::cone_cos;

/// `Gamma(k / 2)` split as `coef * sqrt(pi)^odd`, built from
/// `Gamma(1/2) = sqrt(pi)`, `Gamma(1) = 1` and `Gamma(s + 1) = s Gamma(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfIntegerGamma {
    pub coef: f64,
    pub has_sqrt_pi: bool,
}

impl HalfIntegerGamma {
    pub fn of_half(k: u32) -> Self {
        assert!(k >= 1, "Gamma(k/2) needs k >= 1");
        let has_sqrt_pi = k % 2 == 1;
        let mut coef = 1.0;
        let mut s = if has_sqrt_pi { 1 } else { 2 };
        while s < k {
            coef *= s as f64 / 2.0;
            s += 2;
        }
        Self { coef, has_sqrt_pi }
    }

    pub fn value(&self) -> f64 {
        if self.has_sqrt_pi {
            self.coef * std::f64::consts::PI.sqrt()
        } else {
            self.coef
        }
    }
}

/// Volume of the unit ball of `R^n`: `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn ball_volume(n: u32) -> f64 {
    let g = HalfIntegerGamma::of_half(n + 2);
    // pi^(n/2) = pi^floor(n/2) * sqrt(pi)^(n mod 2); the sqrt(pi) factors of
    // numerator and Gamma cancel for odd n
    let pi_pow = std::f64::consts::PI.powi((n / 2) as i32);
    match (n % 2 == 1, g.has_sqrt_pi) {
        (true, true) => pi_pow / g.coef,
        (false, false) => pi_pow / g.coef,
        _ => unreachable!("parity of n and n + 2 agree"),
    }
}

/// Schwarz constant `K_n = 2 V_{n-1} / V_n`.
pub fn schwarz_constant(n: u32) -> Result<f64> {
    if n < 2 {
        return invalid(format!("Schwarz constant needs n >= 2, got {n}"));
    }
    // 2 V_{n-1} / V_n = 2 Gamma(n/2 + 1) / (sqrt(pi) Gamma((n + 1)/2))
    let top = HalfIntegerGamma::of_half(n + 2);
    let bottom = HalfIntegerGamma::of_half(n + 1);
    let ratio = 2.0 * top.coef / bottom.coef;
    Ok(if top.has_sqrt_pi {
        // odd n: the sqrt(pi) factors cancel
        ratio
    } else {
        ratio / std::f64::consts::PI
    })
}

/// Root in `(0, 1)` of `2 g k / (1 - g)^2 = 1/2`, i.e. of
/// `g^2 - 2 (1 + 2k) g + 1 = 0`.
pub fn gamma_star(k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return invalid(format!("gamma* needs k > 0, got {k}"));
    }
    let a = 1.0 + 2.0 * k;
    // a - sqrt(a^2 - 1) without cancellation
    Ok(1.0 / (a + (a * a - 1.0).sqrt()))
}

/// Residual of the defining equation of `gamma*`.
pub fn gamma_star_residual(g: f64, k: f64) -> f64 {
    2.0 * g * k / ((1.0 - g) * (1.0 - g)) - 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantBundle {
    pub dim: u32,
    pub alpha: f64,
    pub lip: f64,
    pub c_vertical: f64,
    pub k_n: f64,
    pub gamma_star: f64,
    pub cone_angle: f64,
    pub cone_cos: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// The simplified `7 K_N C`, kept for comparison with `c1`.
    pub c1_paper: f64,
    /// `7 K_N` on the same footing as `2 / gamma*`.
    pub seven_k_n: f64,
    pub two_over_gamma_star: f64,
    /// True when `7 K_N < 2 / gamma*`, i.e. the simplified bound undercuts
    /// the constant actually produced by the root.
    pub c1_paper_undercuts: bool,
}

pub fn derive_constants(dim: u32, alpha: f64, lip: f64, c_vertical: f64) -> Result<ConstantBundle> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!(
            "alpha must lie in (0, 1), got {alpha}; C2 divides by (1 - alpha)"
        ));
    }
    if !(lip >= 0.0 && lip.is_finite()) {
        return invalid(format!("Lipschitz bound must be finite and >= 0, got {lip}"));
    }
    if !(c_vertical >= 0.0 && c_vertical.is_finite()) {
        return invalid(format!("vertical constant must be finite and >= 0, got {c_vertical}"));
    }
    let k_n = schwarz_constant(dim)?;
    let g = gamma_star(k_n)?;
    let cos = cone_cos(lip);
    let two_over_gamma_star = 2.0 / g;
    let c1 = two_over_gamma_star * c_vertical;
    let c2 = 4.0 * k_n * c1 / ((1.0 - alpha) * cos.powf(2.0 - alpha));
    let c3 = (2.0 * lip + 3.0) * c_vertical + c2;
    let seven_k_n = 7.0 * k_n;
    Ok(ConstantBundle {
        dim,
        alpha,
        lip,
        c_vertical,
        k_n,
        gamma_star: g,
        cone_angle: lip.atan(),
        cone_cos: cos,
        c1,
        c2,
        c3,
        c1_paper: seven_k_n * c_vertical,
        seven_k_n,
        two_over_gamma_star,
        c1_paper_undercuts: seven_k_n < two_over_gamma_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn volumes() {
        assert_eq!(ball_volume(0), 1.0);
        assert_eq!(ball_volume(1), 2.0);
        assert_relative_eq!(ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(ball_volume(3), 4.188_790_20, max_relative = 1e-8);
    }

    #[test]
    fn volume_recurrence() {
        for n in 2..=12u32 {
            let lhs = ball_volume(n) * n as f64;
            let rhs = ball_volume(n - 2) * 2.0 * PI;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_half_integers() {
        assert_eq!(HalfIntegerGamma::of_half(1).value(), PI.sqrt());
        assert_eq!(HalfIntegerGamma::of_half(2).value(), 1.0);
        assert_eq!(HalfIntegerGamma::of_half(5).coef, 0.75);
        assert_eq!(HalfIntegerGamma::of_half(10).value(), 24.0);
    }

    #[test]
    fn schwarz_values() {
        assert_eq!(schwarz_constant(3).unwrap(), 1.5);
        assert_relative_eq!(schwarz_constant(2).unwrap(), 4.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(schwarz_constant(4).unwrap(), 16.0 / (3.0 * PI), max_relative = 1e-15);
        assert!(schwarz_constant(1).is_err());
        // against the volume ratio computed independently
        for n in 2..=10 {
            let direct = 2.0 * ball_volume(n - 1) / ball_volume(n);
            assert_relative_eq!(schwarz_constant(n).unwrap(), direct, max_relative = 1e-14);
        }
    }

    #[test]
    fn gamma_star_closed_forms() {
        assert_relative_eq!(gamma_star(1.5).unwrap(), 4.0 - 15f64.sqrt(), max_relative = 1e-14);
        let a = 1.0 + 8.0 / PI;
        assert_relative_eq!(gamma_star(4.0 / PI).unwrap(), a - (a * a - 1.0).sqrt(), max_relative = 1e-13);
        for k in [1e-3, 0.1, 0.5, 4.0 / PI, 1.5, 10.0] {
            let g = gamma_star(k).unwrap();
            assert!(g > 0.0 && g < 1.0);
            assert!(gamma_star_residual(g, k).abs() <= 1e-12);
        }
        assert!(gamma_star(0.0).is_err());
        assert!(gamma_star(-1.0).is_err());
    }

    #[test]
    fn bundle_example() {
        let b = derive_constants(2, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(b.cone_cos, 1.0);
        assert_relative_eq!(b.gamma_star, 0.143_909, max_relative = 1e-4);
        assert_relative_eq!(b.c1, 13.898, max_relative = 1e-4);
        assert_relative_eq!(b.c2, 141.56, max_relative = 1e-3);
        assert_relative_eq!(b.c3, 144.56, max_relative = 1e-3);
        assert!(b.c1_paper_undercuts);
        assert!(b.c1_paper < b.c1);

        let z = derive_constants(3, 0.5, 2.0, 0.0).unwrap();
        assert_eq!((z.c1, z.c2, z.c3), (0.0, 0.0, 0.0));

        assert!(derive_constants(2, 1.0, 0.0, 1.0).is_err());
        assert!(derive_constants(2, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn monotone_in_lip_and_alpha() {
        let mut prev = 0.0;
        for lip in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let b = derive_constants(3, 0.5, lip, 1.0).unwrap();
            assert!(b.c2 >= prev);
            prev = b.c2;
        }
        let mut prev = 0.0;
        for alpha in [0.1, 0.5, 0.9, 0.99, 0.999] {
            let b = derive_constants(2, alpha, 1.0, 1.0).unwrap();
            assert!(b.c3 > prev);
            prev = b.c3;
        }
        assert!(prev > 1e5);
    }
}
