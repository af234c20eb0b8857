//! Scalar fields on `R^N` and the finite-difference tools used to check them.

use crate::error::{invalid, Error, Result};
use crate::geometry::EpigraphDomain;

/// A real-valued field that can be evaluated pointwise.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Closed-form gradient, when the field has one.
    fn analytic_gradient(&self, _x: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(None)
    }

    /// Certified `sup |U|` over the domain the field lives on.
    fn sup_bound(&self) -> Option<f64> {
        None
    }

    /// Monte Carlo fields return a different estimate per call site and
    /// cannot be differentiated.
    fn is_stochastic(&self) -> bool {
        false
    }
}

/// Finite-difference step `h = min(rel_step * d, max_step)`, `d` the
/// distance to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub rel_step: f64,
    pub max_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { rel_step: 1e-2, max_step: 1e-3 }
    }
}

impl StepPolicy {
    pub fn step(&self, distance: f64) -> f64 {
        (self.rel_step * distance).min(self.max_step)
    }
}

/// Fourth-order central differences with step `h` (stencil reaches `2h`).
pub fn finite_difference_gradient(field: &dyn ScalarField, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return invalid(format!("finite-difference step must be positive, got {h}"));
    }
    let mut z = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut at = |off: f64| -> Result<f64> {
            z[i] = x[i] + off;
            let v = field.value(&z);
            z[i] = x[i];
            v
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        g.push((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h));
    }
    Ok(g)
}

/// Gradient of `field` at an interior point: analytic when available,
/// otherwise finite differences with a distance-scaled step.
pub fn gradient(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    x: &[f64],
    policy: StepPolicy,
) -> Result<Vec<f64>> {
    if field.is_stochastic() {
        return Err(Error::Unsupported("gradients of Monte Carlo fields".into()));
    }
    if let Some(g) = field.analytic_gradient(x)? {
        return Ok(g);
    }
    let d = domain.certified_distance(x)?;
    finite_difference_gradient(field, x, policy.step(d))
}

/// `<grad U, l>` for a unit direction `l`.
pub fn directional_derivative(grad: &[f64], direction: &[f64]) -> Result<f64> {
    let n: f64 = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    if grad.len() != direction.len() || (n - 1.0).abs() > 1e-12 {
        return invalid("direction must be a unit vector of matching dimension");
    }
    Ok(grad.iter().zip(direction).map(|(g, l)| g * l).sum())
}

/// Second-difference Laplacian with step `h`; near zero for harmonic fields.
pub fn laplacian_residual(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    if field.is_stochastic() {
        return Err(Error::Unsupported("Laplacian of Monte Carlo fields".into()));
    }
    if !(h > 0.0) {
        return invalid(format!("step must be positive, got {h}"));
    }
    let reach = h * (x.len() as f64).sqrt();
    let d = domain.certified_distance(x)?;
    if d <= reach {
        return Err(Error::Domain(format!(
            "stencil of radius {reach} leaves the domain (distance {d})"
        )));
    }
    let centre = field.value(x)?;
    let mut z = x.to_vec();
    let mut acc = 0.0;
    for i in 0..x.len() {
        z[i] = x[i] + h;
        let p = field.value(&z)?;
        z[i] = x[i] - h;
        let m = field.value(&z)?;
        z[i] = x[i];
        acc += (p - 2.0 * centre + m) / (h * h);
    }
    Ok(acc)
}

/// `U(x) = x_N^2`, a non-harmonic calibration field (Laplacian 2).
#[derive(Debug, Clone, Copy)]
pub struct QuadraticProbe {
    pub dim: usize,
}

impl ScalarField for QuadraticProbe {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        let t = x[x.len() - 1];
        Ok(t * t)
    }
    fn analytic_gradient(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let mut g = vec![0.0; x.len()];
        g[x.len() - 1] = 2.0 * x[x.len() - 1];
        Ok(Some(g))
    }
}

/// `f(x) = x_N^alpha` on the upper half-space; `|grad f| = alpha x_N^(alpha-1)`.
#[derive(Debug, Clone, Copy)]
pub struct HeightPower {
    pub dim: usize,
    pub alpha: f64,
}

impl ScalarField for HeightPower {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        let t = x[x.len() - 1];
        if t < 0.0 {
            return Err(Error::Domain("x_N^alpha needs x_N >= 0".into()));
        }
        Ok(t.powf(self.alpha))
    }
    fn analytic_gradient(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let t = x[x.len() - 1];
        if t <= 0.0 {
            return Err(Error::Domain("gradient of x_N^alpha needs x_N > 0".into()));
        }
        let mut g = vec![0.0; x.len()];
        g[x.len() - 1] = self.alpha * t.powf(self.alpha - 1.0);
        Ok(Some(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_probe_residual_is_two() {
        let half = EpigraphDomain::half_space(2).unwrap();
        let r = laplacian_residual(&QuadraticProbe { dim: 2 }, &half, &[0.0, 1.0], 0.25).unwrap();
        assert_eq!(r, 2.0);
        let r = laplacian_residual(&QuadraticProbe { dim: 3 }, &EpigraphDomain::half_space(3).unwrap(), &[0.3, 0.1, 1.7], 1e-3)
            .unwrap();
        assert!((r - 2.0).abs() < 1e-6);
    }

    #[test]
    fn stencil_outside_domain() {
        let half = EpigraphDomain::half_space(2).unwrap();
        let r = laplacian_residual(&QuadraticProbe { dim: 2 }, &half, &[0.0, 0.1], 0.5);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn directional() {
        assert_eq!(directional_derivative(&[1.0, 2.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert!(directional_derivative(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn fd_matches_height_power() {
        let f = HeightPower { dim: 2, alpha: 0.5 };
        let x = [0.2, 2.0];
        let fd = finite_difference_gradient(&f, &x, 1e-3).unwrap();
        let an = f.analytic_gradient(&x).unwrap().unwrap();
        assert!((fd[1] - an[1]).abs() < 1e-10);
        assert_eq!(fd[0], 0.0);
    }
}
