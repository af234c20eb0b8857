//! Half-plane Poisson extension.
//!
//! With `t = x_1 + x_2 tan(phi)` the kernel `x_2 / (pi ((x_1 - t)^2 + x_2^2)) dt`
//! becomes `dphi / pi`, so
//! `U(x) = (1/pi) int_{-pi/2}^{pi/2} g(x_1 + x_2 tan phi) dphi`
//! with no truncated tail.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};

use super::BoundaryData;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonRule {
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Evaluations below this height are refused.
    pub min_height: f64,
}

impl Default for PoissonRule {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_intervals: 4000, min_height: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonExtension {
    data: BoundaryData,
    rule: PoissonRule,
}

impl PoissonExtension {
    /// Extension of `data` to the upper half-plane.
    pub fn new(data: BoundaryData, rule: PoissonRule) -> Result<Self> {
        if !(rule.abs_tol > 0.0) || rule.max_intervals == 0 || !(rule.min_height > 0.0) {
            return invalid("Poisson rule needs positive tolerance, interval budget and minimum height");
        }
        if let BoundaryData::Trace { graph, .. } = &data {
            if graph.horizontal_dim() != 1 {
                return invalid("Poisson extension is implemented for the half-plane only");
            }
        }
        if !data.sup_bound().is_finite() {
            return invalid("boundary data must be bounded");
        }
        Ok(Self { data, rule })
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    pub fn rule(&self) -> PoissonRule {
        self.rule
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let (s, h) = (x[0], x[1]);
        if !(h > 0.0) {
            return Err(Error::Domain(format!("Poisson extension needs x_2 > 0, got {h}")));
        }
        if h < self.rule.min_height {
            return Err(Error::Accuracy(format!(
                "height {h} is below the quadrature resolution {}",
                self.rule.min_height
            )));
        }
        let mut breaks = vec![-FRAC_PI_2];
        let mut kinks: Vec<f64> = self.data.kinks().iter().map(|k| ((k - s) / h).atan()).collect();
        kinks.sort_by(f64::total_cmp);
        breaks.extend(kinks.into_iter().filter(|p| p.abs() < FRAC_PI_2));
        breaks.push(FRAC_PI_2);
        let opts = QuadOptions {
            abs_tol: self.rule.abs_tol,
            rel_tol: 0.0,
            max_intervals: self.rule.max_intervals,
        };
        let r = integrate_with_breaks(|phi: f64| self.data.eval(&[s + h * phi.tan()]), &breaks, opts)?;
        if !r.converged {
            return Err(Error::Accuracy(format!(
                "Poisson quadrature at {x:?}: error estimate {:.3e} after {} evaluations",
                r.error / PI,
                r.n_evals
            )));
        }
        Ok(r.value / PI)
    }
}
