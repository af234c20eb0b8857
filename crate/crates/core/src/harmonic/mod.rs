//! Bounded harmonic fields on epigraph domains.
//!
//! Closed-form fields carry analytic gradients and certified sup bounds.
//! Poisson extensions integrate boundary data against the half-plane kernel;
//! walk-on-spheres fields estimate the harmonic extension on any graph.

mod boundary;
mod poisson;
mod wos;

use std::f64::consts::PI;

pub use boundary::BoundaryData;
pub use poisson::{PoissonExtension, PoissonRule};
pub use wos::{wos_evaluate, WosEstimate, WosField, WosParams};

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::geometry::{EpigraphDomain, Point};

#[derive(Debug, Clone)]
pub enum HarmonicField {
    Constant { dim: usize, value: f64 },
    /// `exp(-x_N) cos(x_1)` on the upper half-space.
    SeparableExp { dim: usize },
    /// `|x - p|^(2 - n)` for `n >= 3`, `Re 1 / (z - p)` for `n = 2`, with the
    /// pole strictly below the graph.
    Pole { pole: Point, sup_bound: f64 },
    /// `1 - theta / pi` on the upper half-plane: boundary values 1 on the
    /// positive axis, 0 on the negative axis.
    HarmonicMeasure2d,
    Poisson(PoissonExtension),
    Wos(WosField),
    /// `U(x', x_N + lambda)`.
    Shifted { inner: Box<HarmonicField>, lambda: f64 },
    /// `factor * U`.
    Scaled { inner: Box<HarmonicField>, factor: f64 },
}

impl HarmonicField {
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        if dim < 2 || !value.is_finite() {
            return invalid("constant field needs dim >= 2 and a finite value");
        }
        Ok(Self::Constant { dim, value })
    }

    pub fn separable_exp(dim: usize) -> Result<Self> {
        if dim < 2 {
            return invalid(format!("dimension must be at least 2, got {dim}"));
        }
        Ok(Self::SeparableExp { dim })
    }

    /// Pole field for a pole strictly below the graph of `domain`. The sup
    /// bound uses the distance from the pole to the closed epigraph (exact
    /// for closed-form graphs, cone bound otherwise).
    pub fn pole(domain: &EpigraphDomain, pole: Point) -> Result<Self> {
        if pole.dim() != domain.dim() {
            return invalid("pole dimension does not match the domain");
        }
        let depth = -domain.vertical_gap(&pole)?;
        if !(depth > 0.0) {
            return invalid(format!("pole {:?} lies in the closed epigraph", pole.coords()));
        }
        let reach = domain
            .closed_form_distance(&pole)
            .unwrap_or(depth * domain.cone_cos())
            .max(depth * domain.cone_cos());
        let n = pole.dim() as i32;
        let sup_bound = if n == 2 { 1.0 / reach } else { reach.powi(2 - n) };
        Ok(Self::Pole { pole, sup_bound })
    }

    pub fn harmonic_measure_2d() -> Self {
        Self::HarmonicMeasure2d
    }

    /// Short name used in reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::SeparableExp { .. } => "separable-exp",
            Self::Pole { .. } => "pole",
            Self::HarmonicMeasure2d => "harmonic-measure",
            Self::Poisson(_) => "poisson-quadrature",
            Self::Wos(_) => "wos",
            Self::Shifted { .. } => "shifted",
            Self::Scaled { .. } => "scaled",
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::Scaled { inner: Box::new(self), factor }
    }
}

/// `x -> U(x', x_N + lambda)`; nested shifts collapse into one.
pub fn shifted_field(field: &HarmonicField, lambda: f64) -> Result<HarmonicField> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid(format!("shift must be finite and non-negative, got {lambda}"));
    }
    Ok(match field {
        HarmonicField::Shifted { inner, lambda: mu } => {
            HarmonicField::Shifted { inner: inner.clone(), lambda: mu + lambda }
        }
        other => HarmonicField::Shifted { inner: Box::new(other.clone()), lambda },
    })
}

fn lifted(x: &[f64], lambda: f64) -> Vec<f64> {
    let mut z = x.to_vec();
    *z.last_mut().unwrap() += lambda;
    z
}

impl ScalarField for HarmonicField {
    fn dim(&self) -> usize {
        match self {
            Self::Constant { dim, .. } | Self::SeparableExp { dim } => *dim,
            Self::Pole { pole, .. } => pole.dim(),
            Self::HarmonicMeasure2d => 2,
            Self::Poisson(_) => 2,
            Self::Wos(w) => w.domain.dim(),
            Self::Shifted { inner, .. } | Self::Scaled { inner, .. } => inner.dim(),
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return invalid(format!("field lives in R^{}, got {} coordinates", self.dim(), x.len()));
        }
        match self {
            Self::Constant { value, .. } => Ok(*value),
            Self::SeparableExp { .. } => Ok((-x[x.len() - 1]).exp() * x[0].cos()),
            Self::Pole { pole, .. } => {
                let n = x.len();
                if n == 2 {
                    let (a, b) = (x[0] - pole[0], x[1] - pole[1]);
                    Ok(a / (a * a + b * b))
                } else {
                    let r = crate::geometry::dist(x, pole);
                    Ok(r.powi(2 - n as i32))
                }
            }
            Self::HarmonicMeasure2d => {
                if !(x[1] > 0.0) {
                    return Err(Error::Domain(format!("harmonic measure needs x_2 > 0, got {x:?}")));
                }
                Ok(1.0 - x[1].atan2(x[0]) / PI)
            }
            Self::Poisson(p) => p.value(x),
            Self::Wos(w) => w.value(x),
            Self::Shifted { inner, lambda } => inner.value(&lifted(x, *lambda)),
            Self::Scaled { inner, factor } => Ok(factor * inner.value(x)?),
        }
    }

    fn analytic_gradient(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        if x.len() != self.dim() {
            return invalid(format!("field lives in R^{}, got {} coordinates", self.dim(), x.len()));
        }
        let n = x.len();
        Ok(match self {
            Self::Constant { .. } => Some(vec![0.0; n]),
            Self::SeparableExp { .. } => {
                let e = (-x[n - 1]).exp();
                let mut g = vec![0.0; n];
                g[0] = -x[0].sin() * e;
                g[n - 1] = -x[0].cos() * e;
                Some(g)
            }
            Self::Pole { pole, .. } => {
                if n == 2 {
                    // d/dz 1/(z - p) = -1/(z - p)^2
                    let (a, b) = (x[0] - pole[0], x[1] - pole[1]);
                    let r2 = a * a + b * b;
                    let r4 = r2 * r2;
                    Some(vec![(b * b - a * a) / r4, -2.0 * a * b / r4])
                } else {
                    let r = crate::geometry::dist(x, pole);
                    let s = (2.0 - n as f64) * r.powi(-(n as i32));
                    Some(x.iter().zip(pole.iter()).map(|(xi, pi)| s * (xi - pi)).collect())
                }
            }
            Self::HarmonicMeasure2d => {
                if !(x[1] > 0.0) {
                    return Err(Error::Domain(format!("harmonic measure needs x_2 > 0, got {x:?}")));
                }
                let r2 = x[0] * x[0] + x[1] * x[1];
                Some(vec![x[1] / (PI * r2), -x[0] / (PI * r2)])
            }
            Self::Poisson(_) | Self::Wos(_) => None,
            Self::Shifted { inner, lambda } => inner.analytic_gradient(&lifted(x, *lambda))?,
            Self::Scaled { inner, factor } => inner
                .analytic_gradient(x)?
                .map(|g| g.into_iter().map(|c| factor * c).collect()),
        })
    }

    fn sup_bound(&self) -> Option<f64> {
        match self {
            Self::Constant { value, .. } => Some(value.abs()),
            Self::SeparableExp { .. } | Self::HarmonicMeasure2d => Some(1.0),
            Self::Pole { sup_bound, .. } => Some(*sup_bound),
            Self::Poisson(p) => Some(p.data().sup_bound()),
            Self::Wos(w) => Some(w.data.sup_bound().max(w.params.far_value.abs())),
            Self::Shifted { inner, .. } => inner.sup_bound(),
            Self::Scaled { inner, factor } => inner.sup_bound().map(|m| m * factor.abs()),
        }
    }

    fn is_stochastic(&self) -> bool {
        match self {
            Self::Wos(_) => true,
            Self::Shifted { inner, .. } | Self::Scaled { inner, .. } => inner.is_stochastic(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{finite_difference_gradient, gradient, laplacian_residual, StepPolicy};
    use crate::geometry::LipschitzGraph;
    use approx::assert_abs_diff_eq;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn separable_exp_values() {
        let u = HarmonicField::separable_exp(2).unwrap();
        assert_eq!(u.value(&[0.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(u.value(&[PI / 2.0, 3.0]).unwrap(), 0.0, epsilon = 1e-16);
        let g = u.analytic_gradient(&[0.0, 1.0]).unwrap().unwrap();
        assert_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[1], -(-1.0f64).exp(), epsilon = 1e-16);
        let fd = finite_difference_gradient(&u, &[0.0, 1.0], 1e-3).unwrap();
        assert_abs_diff_eq!(fd[1], g[1], epsilon = 1e-12);
    }

    #[test]
    fn pole_values() {
        let half = EpigraphDomain::half_space(2).unwrap();
        let u = HarmonicField::pole(&half, pt(&[0.0, -1.0])).unwrap();
        assert_eq!(u.value(&[0.0, 1.0]).unwrap(), 0.0);
        let g = u.analytic_gradient(&[0.0, 1.0]).unwrap().unwrap();
        assert_eq!(g, vec![0.25, 0.0]);
        let fd = finite_difference_gradient(&u, &[0.0, 1.0], 1e-3).unwrap();
        assert_abs_diff_eq!(fd[0], 0.25, epsilon = 1e-10);
        assert_eq!(u.sup_bound(), Some(1.0));

        let half3 = EpigraphDomain::half_space(3).unwrap();
        let u = HarmonicField::pole(&half3, pt(&[0.0, 0.0, -1.0])).unwrap();
        assert_eq!(u.value(&[0.0, 0.0, 1.0]).unwrap(), 0.5);

        assert!(HarmonicField::pole(&half, pt(&[0.0, 0.0])).is_err());
        assert!(HarmonicField::pole(&half, pt(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn pole_sup_bound_on_cone_uses_exact_reach() {
        let cone = EpigraphDomain::new(LipschitzGraph::abs_cone(1.0, vec![0.0], 1.0).unwrap());
        let u = HarmonicField::pole(&cone, pt(&[0.0, -1.0])).unwrap();
        assert_abs_diff_eq!(u.sup_bound().unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn harmonic_measure_values() {
        let u = HarmonicField::harmonic_measure_2d();
        assert_eq!(u.value(&[0.0, 1.0]).unwrap(), 0.5);
        assert_abs_diff_eq!(u.value(&[1.0, 1.0]).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(u.value(&[-1.0, 1.0]).unwrap(), 0.25, epsilon = 1e-15);
        assert!(matches!(u.value(&[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn residuals_small() {
        let half = EpigraphDomain::half_space(2).unwrap();
        let u = HarmonicField::separable_exp(2).unwrap();
        assert!(laplacian_residual(&u, &half, &[0.3, 1.0], 1e-3).unwrap().abs() < 1e-6);
        let p = HarmonicField::pole(&half, pt(&[0.0, -1.0])).unwrap();
        assert!(laplacian_residual(&p, &half, &[0.7, 2.0], 1e-3).unwrap().abs() < 1e-6);
        let half3 = EpigraphDomain::half_space(3).unwrap();
        let p = HarmonicField::pole(&half3, pt(&[0.5, 0.0, -1.0])).unwrap();
        assert!(laplacian_residual(&p, &half3, &[0.1, 0.2, 1.5], 1e-3).unwrap().abs() < 1e-6);
    }

    #[test]
    fn shifts() {
        let u = HarmonicField::separable_exp(2).unwrap();
        let s = shifted_field(&u, 1.0).unwrap();
        assert_abs_diff_eq!(s.value(&[0.0, 0.0]).unwrap(), (-1.0f64).exp(), epsilon = 1e-16);
        let zero = shifted_field(&u, 0.0).unwrap();
        assert_eq!(zero.value(&[0.4, 2.0]).unwrap(), u.value(&[0.4, 2.0]).unwrap());
        let twice = shifted_field(&shifted_field(&u, 0.3).unwrap(), 0.5).unwrap();
        let once = shifted_field(&u, 0.8).unwrap();
        assert_abs_diff_eq!(twice.value(&[0.2, 0.1]).unwrap(), once.value(&[0.2, 0.1]).unwrap(), epsilon = 1e-14);
        assert!(shifted_field(&u, -1.0).is_err());
        assert_eq!(s.sup_bound(), Some(1.0));
    }

    #[test]
    fn gradient_prefers_analytic_and_rejects_wos() {
        let half = EpigraphDomain::half_space(2).unwrap();
        let u = HarmonicField::separable_exp(2).unwrap();
        let g = gradient(&u, &half, &[0.0, 1.0], StepPolicy::default()).unwrap();
        assert_eq!(g[0], 0.0);
        let w = HarmonicField::Wos(WosField {
            domain: half.clone(),
            data: BoundaryData::Constant(1.0),
            params: WosParams::default(),
        });
        assert!(matches!(gradient(&w, &half, &[0.0, 1.0], StepPolicy::default()), Err(Error::Unsupported(_))));
    }
}
