//! Sampled Hoelder seminorms, weighted derivative suprema and the end-to-end
//! check of the weighted-gradient and global Hoelder bounds.
//!
//! Every estimate is a supremum over a finite sample, so it bounds the true
//! supremum from below. Quotients are evaluated in parallel and reduced in
//! index order (ties keep the smaller index), so results do not depend on the
//! number of worker threads.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{derive_constants, ConstantBundle};
use crate::error::{invalid, Error, Result};
use crate::field::{gradient, ScalarField, StepPolicy};
use crate::geometry::{dist, norm, EpigraphDomain};
use crate::harmonic::{shifted_field, HarmonicField};
use crate::rng;

/// Minimum ratio `sep_max / sep_min` for pair separations.
pub const MIN_SEPARATION_SPAN: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormMode {
    Vertical,
    Global,
    Local,
}

impl std::str::FromStr for SeminormMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertical" => Ok(Self::Vertical),
            "global" => Ok(Self::Global),
            "local" => Ok(Self::Local),
            other => invalid(format!("unknown seminorm mode {other:?} (vertical, global, local)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormEstimate {
    pub mode: SeminormMode,
    pub value: f64,
    pub witness: Option<Pair>,
    pub n_samples: usize,
    pub alpha: f64,
}

impl SeminormEstimate {
    /// Sup over the union of both samples. Ties keep `self`'s witness.
    pub fn merged(&self, other: &SeminormEstimate) -> SeminormEstimate {
        let (value, witness) = if other.value > self.value {
            (other.value, other.witness.clone())
        } else {
            (self.value, self.witness.clone())
        };
        SeminormEstimate {
            mode: self.mode,
            value,
            witness,
            n_samples: self.n_samples + other.n_samples,
            alpha: self.alpha,
        }
    }

    /// Re-evaluates the quotient at the witness pair (0 without a witness).
    pub fn recompute(&self, field: &dyn ScalarField) -> Result<f64> {
        match &self.witness {
            Some(p) => quotient(field, &p.x, &p.y, self.alpha),
            None => Ok(0.0),
        }
    }
}

/// Supremum of a pointwise quantity with the point that attains it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSup {
    pub value: f64,
    pub witness: Option<Vec<f64>>,
    pub n_samples: usize,
}

/// Heights above the graph: pairs `(gap, gap + sep)` for every base gap and
/// separation of two log-spaced grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeightGrid {
    pub gap_min: f64,
    pub gap_max: f64,
    pub n_gaps: usize,
    pub sep_min: f64,
    pub sep_max: f64,
    pub n_seps: usize,
}

impl Default for HeightGrid {
    fn default() -> Self {
        Self { gap_min: 1e-4, gap_max: 10.0, n_gaps: 9, sep_min: 1e-4, sep_max: 10.0, n_seps: 61 }
    }
}

impl HeightGrid {
    /// The cheaper grid used on extra columns.
    pub fn coarse() -> Self {
        Self { n_gaps: 5, n_seps: 13, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        check_range("gap", self.gap_min, self.gap_max)?;
        check_span(self.sep_min, self.sep_max)?;
        if self.n_gaps == 0 || self.n_seps < 2 {
            return invalid("height grid needs at least one gap and two separations");
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        let gaps = log_grid(self.gap_min, self.gap_max, self.n_gaps);
        let seps = log_grid(self.sep_min, self.sep_max, self.n_seps);
        gaps.iter().flat_map(|&g| seps.iter().map(move |&s| (g, s))).collect()
    }
}

/// Vertical pairs on a tensor grid of columns `x'` in `[lo, hi]^{N-1}`,
/// plus optional extra columns with their own height grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerticalSampler {
    pub lo: f64,
    pub hi: f64,
    pub per_axis: usize,
    pub heights: HeightGrid,
    pub extra_columns: Vec<Vec<f64>>,
    pub extra_heights: HeightGrid,
}

impl Default for VerticalSampler {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
            per_axis: 21,
            heights: HeightGrid::default(),
            extra_columns: Vec::new(),
            extra_heights: HeightGrid::coarse(),
        }
    }
}

/// Interior points with `x'` in `[lo, hi]^{N-1}` and vertical gap in
/// `[gap_min, gap_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSampler {
    /// `x'` uniform, gap log-uniform.
    Random { lo: f64, hi: f64, gap_min: f64, gap_max: f64, n_points: usize, seed: u64 },
    /// Tensor grid of columns times a log-spaced gap grid.
    Grid { lo: f64, hi: f64, per_axis: usize, gap_min: f64, gap_max: f64, n_gaps: usize },
}

impl Default for PointSampler {
    fn default() -> Self {
        Self::Random { lo: -10.0, hi: 10.0, gap_min: 1e-4, gap_max: 10.0, n_points: 10_000, seed: 0 }
    }
}

/// Random pairs: `x` as in [`PointSampler::Random`], `y = x + s u` with `u`
/// uniform on the sphere and `s` log-uniform in `[sep_min, sep_max]`.
/// Local sampling ignores the separation range and draws `s` log-uniformly
/// over four decades below `d(x)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSampler {
    pub lo: f64,
    pub hi: f64,
    pub gap_min: f64,
    pub gap_max: f64,
    pub sep_min: f64,
    pub sep_max: f64,
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for PairSampler {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
            gap_min: 1e-4,
            gap_max: 10.0,
            sep_min: 1e-4,
            sep_max: 10.0,
            n_pairs: 10_000,
            seed: 0,
        }
    }
}

fn check_range(what: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return invalid(format!("{what} range must satisfy 0 < min <= max < inf, got [{lo}, {hi}]"));
    }
    Ok(())
}

fn check_span(lo: f64, hi: f64) -> Result<()> {
    check_range("separation", lo, hi)?;
    if hi / lo < MIN_SEPARATION_SPAN * (1.0 - 1e-12) {
        return invalid(format!(
            "separations must span at least four orders of magnitude, got [{lo}, {hi}]"
        ));
    }
    Ok(())
}

fn check_box(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return invalid(format!("sample box needs finite lo <= hi, got [{lo}, {hi}]"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let r = (b / a).ln();
    (0..n)
        .map(|k| if k + 1 == n { b } else { a * (r * k as f64 / (n - 1) as f64).exp() })
        .collect()
}

fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn tensor_columns(lo: f64, hi: f64, per_axis: usize, dims: usize) -> Vec<Vec<f64>> {
    let axis = lin_grid(lo, hi, per_axis);
    let mut cols = vec![Vec::new()];
    for _ in 0..dims {
        cols = cols
            .into_iter()
            .flat_map(|c| {
                axis.iter().map(move |&a| {
                    let mut c = c.clone();
                    c.push(a);
                    c
                })
            })
            .collect();
    }
    cols
}

fn log_uniform(rng: &mut rng::StreamRng, a: f64, b: f64) -> f64 {
    let u: f64 = rng.random();
    (a.ln() + u * (b / a).ln()).exp()
}

fn point_at(domain: &EpigraphDomain, xp: &[f64], gap: f64) -> Result<Vec<f64>> {
    let mut x = xp.to_vec();
    x.push(domain.graph.psi(xp)? + gap);
    Ok(x)
}

/// Vertical pairs `((x', psi + g), (x', psi + g + s))` for every column.
pub fn vertical_pairs(domain: &EpigraphDomain, sampler: &VerticalSampler) -> Result<Vec<Pair>> {
    check_box(sampler.lo, sampler.hi)?;
    sampler.heights.validate()?;
    let m = domain.dim() - 1;
    if sampler.per_axis == 0 && sampler.extra_columns.is_empty() {
        return invalid("vertical sampler has no columns");
    }
    let mut out = Vec::new();
    let mut push = |cols: &[Vec<f64>], grid: &HeightGrid| -> Result<()> {
        let heights = grid.pairs();
        for c in cols {
            if c.len() != m {
                return invalid(format!("column {c:?} needs {m} coordinates"));
            }
            let base = domain.graph.psi(c)?;
            for &(g, s) in &heights {
                let mut x = c.clone();
                x.push(base + g);
                let mut y = c.clone();
                y.push(base + g + s);
                out.push(Pair { x, y });
            }
        }
        Ok(())
    };
    if sampler.per_axis > 0 {
        push(&tensor_columns(sampler.lo, sampler.hi, sampler.per_axis, m), &sampler.heights)?;
    }
    if !sampler.extra_columns.is_empty() {
        sampler.extra_heights.validate()?;
        push(&sampler.extra_columns, &sampler.extra_heights)?;
    }
    Ok(out)
}

pub fn sample_points(domain: &EpigraphDomain, sampler: &PointSampler) -> Result<Vec<Vec<f64>>> {
    let m = domain.dim() - 1;
    match *sampler {
        PointSampler::Random { lo, hi, gap_min, gap_max, n_points, seed } => {
            check_box(lo, hi)?;
            check_range("gap", gap_min, gap_max)?;
            if n_points == 0 {
                return invalid("point sampler is empty");
            }
            (0..n_points as u64)
                .map(|i| {
                    let mut r = rng::stream(seed, i);
                    let xp: Vec<f64> = (0..m).map(|_| lo + (hi - lo) * r.random::<f64>()).collect();
                    let g = log_uniform(&mut r, gap_min, gap_max);
                    point_at(domain, &xp, g)
                })
                .collect()
        }
        PointSampler::Grid { lo, hi, per_axis, gap_min, gap_max, n_gaps } => {
            check_box(lo, hi)?;
            check_range("gap", gap_min, gap_max)?;
            if per_axis == 0 || n_gaps == 0 {
                return invalid("point sampler is empty");
            }
            let gaps = log_grid(gap_min, gap_max, n_gaps);
            let mut out = Vec::new();
            for c in tensor_columns(lo, hi, per_axis, m) {
                for &g in &gaps {
                    out.push(point_at(domain, &c, g)?);
                }
            }
            Ok(out)
        }
    }
}

fn random_unit(r: &mut rng::StreamRng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-300 {
            return v.into_iter().map(|c| c / l).collect();
        }
    }
}

/// Random pairs for the global (`local = false`) or local seminorm. The
/// partner `y` is tried along `u`, `-u`, the upward reflection of `u` and
/// finally straight up, whichever first lands inside the domain.
pub fn random_pairs(domain: &EpigraphDomain, sampler: &PairSampler, local: bool) -> Result<Vec<Pair>> {
    check_box(sampler.lo, sampler.hi)?;
    check_range("gap", sampler.gap_min, sampler.gap_max)?;
    if !local {
        check_span(sampler.sep_min, sampler.sep_max)?;
    }
    if sampler.n_pairs == 0 {
        return invalid("pair sampler is empty");
    }
    let n = domain.dim();
    let m = n - 1;
    (0..sampler.n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(sampler.seed, i);
            let xp: Vec<f64> = (0..m).map(|_| sampler.lo + (sampler.hi - sampler.lo) * r.random::<f64>()).collect();
            let g = log_uniform(&mut r, sampler.gap_min, sampler.gap_max);
            let x = point_at(domain, &xp, g)?;
            let s = if local {
                let half = 0.5 * domain.certified_distance(&x)? * (1.0 - 1e-9);
                half * log_uniform(&mut r, 1e-4, 1.0)
            } else {
                log_uniform(&mut r, sampler.sep_min, sampler.sep_max)
            };
            let u = random_unit(&mut r, n);
            let mut up = u.clone();
            up[m] = up[m].abs();
            let mut vertical = vec![0.0; n];
            vertical[m] = 1.0;
            let neg: Vec<f64> = u.iter().map(|c| -c).collect();
            for dir in [&u, &neg, &up, &vertical] {
                let y: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + s * d).collect();
                if domain.contains(&y) {
                    return Ok(Pair { x, y });
                }
            }
            unreachable!("moving straight up stays in an epigraph")
        })
        .collect()
}

/// `|U(x) - U(y)| / |x - y|^alpha`.
pub fn quotient(field: &dyn ScalarField, x: &[f64], y: &[f64], alpha: f64) -> Result<f64> {
    let q = (field.value(x)? - field.value(y)?).abs() / dist(x, y).powf(alpha);
    if q.is_nan() {
        return Err(Error::Accuracy(format!("quotient at {x:?}, {y:?} is NaN")));
    }
    Ok(q)
}

pub fn pair_quotients(field: &dyn ScalarField, alpha: f64, pairs: &[Pair]) -> Result<Vec<f64>> {
    pairs.par_iter().map(|p| quotient(field, &p.x, &p.y, alpha)).collect()
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.map_or(true, |b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Sampled seminorm over an explicit pair list.
pub fn seminorm_over_pairs(
    field: &dyn ScalarField,
    alpha: f64,
    mode: SeminormMode,
    pairs: &[Pair],
) -> Result<SeminormEstimate> {
    check_alpha(alpha)?;
    if pairs.is_empty() {
        return invalid("no sample pairs");
    }
    let q = pair_quotients(field, alpha, pairs)?;
    let i = argmax(&q).expect("non-empty");
    Ok(SeminormEstimate { mode, value: q[i], witness: Some(pairs[i].clone()), n_samples: pairs.len(), alpha })
}

pub fn vertical_seminorm(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    sampler: &VerticalSampler,
) -> Result<SeminormEstimate> {
    check_alpha(alpha)?;
    let pairs = vertical_pairs(domain, sampler)?;
    seminorm_over_pairs(field, alpha, SeminormMode::Vertical, &pairs)
}

pub fn global_seminorm(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    sampler: &PairSampler,
) -> Result<SeminormEstimate> {
    check_alpha(alpha)?;
    let pairs = random_pairs(domain, sampler, false)?;
    seminorm_over_pairs(field, alpha, SeminormMode::Global, &pairs)
}

/// Seminorm restricted to pairs with `|x - y| < d(x, dE) / 2`.
pub fn local_seminorm(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    sampler: &PairSampler,
) -> Result<SeminormEstimate> {
    check_alpha(alpha)?;
    let pairs = random_pairs(domain, sampler, true)?;
    seminorm_over_pairs(field, alpha, SeminormMode::Local, &pairs)
}

fn weighted_sup(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    points: &[Vec<f64>],
    component: Option<usize>,
) -> Result<WeightedSup> {
    check_alpha(alpha)?;
    if field.is_stochastic() {
        return Err(Error::Unsupported("weighted derivative suprema of Monte Carlo fields".into()));
    }
    if points.is_empty() {
        return invalid("no sample points");
    }
    let vals = points
        .par_iter()
        .map(|x| -> Result<f64> {
            let d = domain.distance(x)?.value;
            let g = gradient(field, domain, x, StepPolicy::default())?;
            let m = match component {
                Some(k) => g[k].abs(),
                None => norm(&g),
            };
            Ok(d.powf(1.0 - alpha) * m)
        })
        .collect::<Result<Vec<f64>>>()?;
    let i = argmax(&vals).expect("non-empty");
    Ok(WeightedSup { value: vals[i], witness: Some(points[i].clone()), n_samples: points.len() })
}

/// `sup d(x)^(1-alpha) |d_N U_lambda(x)|` with `U_lambda = U(x', x_N + lambda)`.
pub fn weighted_vertical_derivative_sup(
    field: &HarmonicField,
    domain: &EpigraphDomain,
    alpha: f64,
    lambda: f64,
    points: &[Vec<f64>],
) -> Result<WeightedSup> {
    let shifted = shifted_field(field, lambda)?;
    weighted_sup(&shifted, domain, alpha, points, Some(domain.dim() - 1))
}

/// `sup d(x)^(1-alpha) |grad U(x)|`.
pub fn weighted_gradient_sup(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    points: &[Vec<f64>],
) -> Result<WeightedSup> {
    weighted_sup(field, domain, alpha, points, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremSamplers {
    pub vertical: VerticalSampler,
    pub points: PointSampler,
    pub pairs: PairSampler,
}

impl Default for TheoremSamplers {
    fn default() -> Self {
        Self { vertical: VerticalSampler::default(), points: PointSampler::default(), pairs: PairSampler::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub measured: f64,
    pub predicted: f64,
    /// `predicted / measured`; absent when nothing was measured.
    pub margin: Option<f64>,
    pub passed: bool,
}

impl InequalityCheck {
    fn new(name: &str, measured: f64, predicted: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            predicted,
            margin: (measured > 0.0).then(|| predicted / measured),
            passed: measured <= predicted * (1.0 + tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckedBundle {
    pub bundle: ConstantBundle,
    pub checks: Vec<InequalityCheck>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub field: String,
    pub dim: usize,
    pub alpha: f64,
    pub tol: f64,
    pub inflation: f64,
    pub c_vertical_hat: f64,
    pub vertical: SeminormEstimate,
    pub weighted_vertical_derivative: WeightedSup,
    pub weighted_gradient: WeightedSup,
    pub global: SeminormEstimate,
    /// Constants derived from the measured `C` as is.
    pub raw: CheckedBundle,
    /// Constants derived from `inflation * C`; these decide `passed`.
    pub inflated: CheckedBundle,
    pub passed: bool,
}

fn checked(
    dim: usize,
    alpha: f64,
    lip: f64,
    c: f64,
    measured: [f64; 3],
    tol: f64,
) -> Result<CheckedBundle> {
    let bundle = derive_constants(dim as u32, alpha, lip, c)?;
    let checks = vec![
        InequalityCheck::new("vertical-derivative", measured[0], bundle.c1, tol),
        InequalityCheck::new("gradient", measured[1], bundle.c2, tol),
        InequalityCheck::new("global-seminorm", measured[2], bundle.c3, tol),
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(CheckedBundle { bundle, checks, all_passed })
}

/// Measures `C` on vertical pairs, derives the constants and checks the
/// three bounds. The vertical sampler is augmented with the columns of all
/// derivative sample points and pair endpoints, so `C` is probed wherever
/// the conclusions are.
pub fn theorem_check(
    field: &HarmonicField,
    domain: &EpigraphDomain,
    alpha: f64,
    samplers: &TheoremSamplers,
    tol: f64,
    inflation: f64,
) -> Result<TheoremReport> {
    check_alpha(alpha)?;
    if !(tol >= 0.0 && tol.is_finite()) {
        return invalid(format!("tolerance must be finite and >= 0, got {tol}"));
    }
    if !(inflation >= 1.0 && inflation.is_finite()) {
        return invalid(format!("inflation factor must be finite and >= 1, got {inflation}"));
    }
    if field.is_stochastic() {
        return Err(Error::Unsupported("theorem check needs a deterministic field".into()));
    }
    if field.dim() != domain.dim() {
        return invalid("field and domain dimensions differ");
    }
    let n = domain.dim();
    let points = sample_points(domain, &samplers.points)?;
    let pairs = random_pairs(domain, &samplers.pairs, false)?;

    let mut vs = samplers.vertical.clone();
    vs.extra_columns.extend(points.iter().map(|p| p[..n - 1].to_vec()));
    vs.extra_columns.extend(pairs.iter().flat_map(|p| [p.x[..n - 1].to_vec(), p.y[..n - 1].to_vec()]));
    let vpairs = vertical_pairs(domain, &vs)?;
    let vertical = seminorm_over_pairs(field, alpha, SeminormMode::Vertical, &vpairs)?;

    let a0 = weighted_vertical_derivative_sup(field, domain, alpha, 0.0, &points)?;
    let grad = weighted_gradient_sup(field, domain, alpha, &points)?;
    let random = seminorm_over_pairs(field, alpha, SeminormMode::Global, &pairs)?;
    let global = random.merged(&vertical);

    let measured = [a0.value, grad.value, global.value];
    let c = vertical.value;
    let raw = checked(n, alpha, domain.lip(), c, measured, tol)?;
    let inflated = checked(n, alpha, domain.lip(), c * inflation, measured, tol)?;
    let passed = inflated.all_passed;
    Ok(TheoremReport {
        field: field.kind_name().to_string(),
        dim: n,
        alpha,
        tol,
        inflation,
        c_vertical_hat: c,
        vertical,
        weighted_vertical_derivative: a0,
        weighted_gradient: grad,
        global,
        raw,
        inflated,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftCheck {
    pub lambda: f64,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Checks `sup d^(1-alpha) |d_N U_lambda| <= (2 / gamma*) * inflation * c_hat`
/// for each shift.
pub fn shift_uniformity(
    field: &HarmonicField,
    domain: &EpigraphDomain,
    alpha: f64,
    lambdas: &[f64],
    points: &[Vec<f64>],
    c_hat: f64,
    inflation: f64,
    tol: f64,
) -> Result<Vec<ShiftCheck>> {
    let bundle = derive_constants(domain.dim() as u32, alpha, domain.lip(), c_hat * inflation)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let measured = weighted_vertical_derivative_sup(field, domain, alpha, lambda, points)?.value;
            Ok(ShiftCheck { lambda, measured, bound: bundle.c1, passed: measured <= bundle.c1 * (1.0 + tol) })
        })
        .collect()
}

/// One CSV row per pair: coordinates of `x` and `y`, separation, quotient.
pub fn write_pairs_csv<W: Write>(out: W, pairs: &[Pair], quotients: &[f64]) -> Result<()> {
    if pairs.len() != quotients.len() {
        return invalid("pairs and quotients differ in length");
    }
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    if let Some(p) = pairs.first() {
        let n = p.x.len();
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend((1..=n).map(|i| format!("y{i}")));
        header.push("separation".into());
        header.push("quotient".into());
        w.write_record(&header).map_err(io)?;
    }
    for (p, q) in pairs.iter().zip(quotients) {
        let mut row: Vec<String> = p.x.iter().chain(&p.y).map(|v| v.to_string()).collect();
        row.push(dist(&p.x, &p.y).to_string());
        row.push(q.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}
