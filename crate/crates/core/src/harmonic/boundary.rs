use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::geometry::LipschitzGraph;

use super::HarmonicField;

/// Dirichlet data as a function of the horizontal parameter `x'`; the value
/// is attached to the graph point `(x', psi(x'))`.
#[derive(Debug, Clone)]
pub enum BoundaryData {
    Constant(f64),
    /// 1 where `t_1 > threshold`, 0 elsewhere.
    Indicator { threshold: f64 },
    /// `min(1, |t|^alpha)`.
    PowerKink { alpha: f64 },
    /// Trace of a harmonic field on the graph.
    Trace { field: Arc<HarmonicField>, graph: LipschitzGraph },
}

impl BoundaryData {
    pub fn power_kink(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return invalid(format!("power-kink exponent must lie in (0, 1], got {alpha}"));
        }
        Ok(Self::PowerKink { alpha })
    }

    pub fn trace(field: HarmonicField, graph: LipschitzGraph) -> Result<Self> {
        if field.dim() != graph.horizontal_dim() + 1 {
            return invalid("trace field and graph dimensions disagree");
        }
        if field.sup_bound().is_none() {
            return invalid("trace field needs a certified sup bound");
        }
        Ok(Self::Trace { field: Arc::new(field), graph })
    }

    /// Dirichlet data of `field` on `graph`: the stored data of quadrature and
    /// Monte Carlo fields, the indicator for harmonic measure, the trace
    /// otherwise.
    pub fn of_field(field: &HarmonicField, graph: &LipschitzGraph) -> Result<Self> {
        match field {
            HarmonicField::HarmonicMeasure2d => Ok(Self::Indicator { threshold: 0.0 }),
            HarmonicField::Poisson(p) => Ok(p.data().clone()),
            HarmonicField::Wos(w) => Ok(w.data.clone()),
            f => Self::trace(f.clone(), graph.clone()),
        }
    }

    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        Ok(match self {
            Self::Constant(c) => *c,
            Self::Indicator { threshold } => {
                if t[0] > *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Self::PowerKink { alpha } => {
                let r = t.iter().map(|c| c * c).sum::<f64>().sqrt();
                r.powf(*alpha).min(1.0)
            }
            Self::Trace { field, graph } => {
                let mut x = t.to_vec();
                x.push(graph.psi(t)?);
                field.value(&x)?
            }
        })
    }

    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Constant(c) => c.abs(),
            Self::Indicator { .. } | Self::PowerKink { .. } => 1.0,
            Self::Trace { field, .. } => field.sup_bound().unwrap_or(f64::INFINITY),
        }
    }

    /// A certified `(constant, exponent)` pair with
    /// `|g(s) - g(t)| <= constant |s - t|^exponent`, when known.
    pub fn hoelder(&self) -> Option<(f64, f64)> {
        match self {
            Self::Constant(_) => Some((0.0, 1.0)),
            Self::PowerKink { alpha } => Some((1.0, *alpha)),
            Self::Indicator { .. } | Self::Trace { .. } => None,
        }
    }

    /// Parameters where the data is not smooth (one-dimensional data only).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Indicator { threshold } => vec![*threshold],
            Self::PowerKink { .. } => vec![-1.0, 0.0, 1.0],
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_bounds() {
        assert_eq!(BoundaryData::Indicator { threshold: 0.0 }.eval(&[0.5]).unwrap(), 1.0);
        assert_eq!(BoundaryData::Indicator { threshold: 0.0 }.eval(&[0.0]).unwrap(), 0.0);
        let k = BoundaryData::power_kink(0.5).unwrap();
        assert_eq!(k.eval(&[0.25]).unwrap(), 0.5);
        assert_eq!(k.eval(&[-9.0]).unwrap(), 1.0);
        assert!(BoundaryData::power_kink(1.5).is_err());
        assert_eq!(BoundaryData::Constant(-3.0).sup_bound(), 3.0);
    }

    #[test]
    fn trace_of_pole_field() {
        let graph = LipschitzGraph::flat(1).unwrap();
        let domain = crate::geometry::EpigraphDomain::new(graph.clone());
        let pole = crate::geometry::Point::new(vec![0.0, -1.0]).unwrap();
        let u = HarmonicField::pole(&domain, pole).unwrap();
        let tr = BoundaryData::trace(u, graph).unwrap();
        // Re 1/(t + i) = t / (t^2 + 1)
        assert_eq!(tr.eval(&[1.0]).unwrap(), 0.5);
    }
}
