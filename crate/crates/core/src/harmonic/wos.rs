//! Walk-on-spheres estimator for the bounded harmonic extension of boundary
//! data on an epigraph.
//!
//! Sphere radii are the cone bound `gap cos(arctan L)`, which never exceeds the
//! true distance, so walks never leave the closed domain. A walk stops when
//! the radius drops below `epsilon` (scored with the data at the current
//! `x'`), when it climbs above the far cutoff, or after `max_steps` jumps
//! (both scored with `far_value`).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::EpigraphDomain;
use crate::rng;

use super::BoundaryData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WosParams {
    pub epsilon: f64,
    /// Height above the boundary (at the start column) where walks are cut.
    /// `None` means 1000 times the starting gap.
    pub far_cutoff: Option<f64>,
    pub far_value: f64,
    pub max_steps: usize,
    pub n_walks: usize,
    pub seed: u64,
}

impl Default for WosParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            far_cutoff: None,
            far_value: 0.0,
            max_steps: 100_000,
            n_walks: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WosEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_walks: usize,
    pub epsilon: f64,
    pub truncated_fraction: f64,
    pub max_steps_fraction: f64,
    pub mean_steps: f64,
    /// Set when more than half of the walks ended at the far cutoff.
    pub high_truncation: bool,
}

enum Outcome {
    Absorbed(f64),
    Truncated,
    MaxSteps,
}

fn random_direction(rng: &mut rng::StreamRng, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
            n2 += *c * *c;
        }
        if n2 > 1e-300 {
            let inv = 1.0 / n2.sqrt();
            out.iter_mut().for_each(|c| *c *= inv);
            return;
        }
    }
}

fn walk(
    domain: &EpigraphDomain,
    data: &BoundaryData,
    start: &[f64],
    cutoff: f64,
    params: &WosParams,
    index: u64,
) -> Result<(Outcome, usize)> {
    let mut rng = rng::stream(params.seed, index);
    let cos = domain.cone_cos();
    let n = start.len();
    let mut z = start.to_vec();
    let mut dir = vec![0.0; n];
    let mut steps = 0;
    loop {
        let gap = domain.vertical_gap(&z)?;
        let radius = gap * cos;
        if radius < params.epsilon {
            return Ok((Outcome::Absorbed(data.eval(&z[..n - 1])?), steps));
        }
        if z[n - 1] > cutoff {
            return Ok((Outcome::Truncated, steps));
        }
        if steps >= params.max_steps {
            return Ok((Outcome::MaxSteps, steps));
        }
        random_direction(&mut rng, &mut dir);
        z.iter_mut().zip(&dir).for_each(|(c, d)| *c += radius * d);
        steps += 1;
    }
}

pub fn wos_evaluate(
    domain: &EpigraphDomain,
    data: &BoundaryData,
    x: &[f64],
    params: &WosParams,
) -> Result<WosEstimate> {
    if params.n_walks == 0 {
        return invalid("walk-on-spheres needs at least one walk");
    }
    if !(params.epsilon > 0.0) {
        return invalid(format!("absorption width must be positive, got {}", params.epsilon));
    }
    if !params.far_value.is_finite() {
        return invalid("far value must be finite");
    }
    let gap = domain.vertical_gap(x)?;
    if !(gap > 0.0) {
        return Err(crate::Error::Domain(format!("walk start {x:?} is not interior")));
    }
    let base = x[x.len() - 1] - gap;
    let cutoff = base + params.far_cutoff.unwrap_or(1e3 * gap);
    if !(cutoff > x[x.len() - 1]) {
        return invalid("far cutoff must lie above the starting point");
    }

    let outcomes = (0..params.n_walks as u64)
        .into_par_iter()
        .map(|i| walk(domain, data, x, cutoff, params, i))
        .collect::<Result<Vec<_>>>()?;

    // ordered reduction: identical bits for any thread count
    let mut values = Vec::with_capacity(outcomes.len());
    let (mut truncated, mut maxed, mut steps) = (0usize, 0usize, 0usize);
    for (o, s) in &outcomes {
        steps += s;
        values.push(match o {
            Outcome::Absorbed(v) => *v,
            Outcome::Truncated => {
                truncated += 1;
                params.far_value
            }
            Outcome::MaxSteps => {
                maxed += 1;
                params.far_value
            }
        });
    }
    let n = values.len() as f64;
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let truncated_fraction = truncated as f64 / n;
    Ok(WosEstimate {
        mean,
        std_error,
        n_walks: params.n_walks,
        epsilon: params.epsilon,
        truncated_fraction,
        max_steps_fraction: maxed as f64 / n,
        mean_steps: steps as f64 / n,
        high_truncation: truncated_fraction > 0.5,
    })
}

/// A harmonic field evaluated by walk-on-spheres at every query.
#[derive(Debug, Clone)]
pub struct WosField {
    pub domain: EpigraphDomain,
    pub data: BoundaryData,
    pub params: WosParams,
}

impl WosField {
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(wos_evaluate(&self.domain, &self.data, x, &self.params)?.mean)
    }
}
