//! Weighted curve lengths `int d(z)^(alpha-1) |dz|`, the three-segment lift
//! curve joining two interior points, a sampled check of the weighted
//! curve-length criterion and its gradient-to-Hoelder consequence.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::ScalarField;
use crate::geometry::{dist, norm, EpigraphDomain, Point};
use crate::hoelder::{
    local_seminorm, pair_quotients, random_pairs, sample_points, seminorm_over_pairs,
    weighted_gradient_sup, Pair, PairSampler, PointSampler, SeminormEstimate, SeminormMode,
    WeightedSup,
};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::rng;

/// Headroom applied to the sampled maximum ratio to obtain `c_d`.
pub const C_D_HEADROOM: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    vertices: Vec<Point>,
    lengths: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return invalid("a polyline needs at least one vertex");
        };
        if vertices.iter().any(|v| v.dim() != first.dim()) {
            return invalid("polyline vertices differ in dimension");
        }
        let lengths = vertices.windows(2).map(|w| dist(&w[0], &w[1])).collect();
        Ok(Self { vertices, lengths })
    }

    pub fn single(p: Point) -> Self {
        Self { vertices: vec![p], lengths: Vec::new() }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn segment_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// `self` followed by `other`; the end of `self` must be the start of
    /// `other`.
    pub fn concat(&self, other: &Polyline) -> Result<Polyline> {
        if self.vertices.last() != other.vertices.first() {
            return invalid("polylines do not join");
        }
        let mut v = self.vertices.clone();
        v.extend(other.vertices[1..].iter().cloned());
        Polyline::new(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveIntegralResult {
    pub value: f64,
    pub quad_error: f64,
    pub n_nodes: usize,
}

/// Quadrature settings for segments where the distance is not affine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedLengthOptions {
    pub quad: QuadOptions,
    /// Ratio of consecutive graded break points near a small endpoint distance.
    pub grading_ratio: f64,
    /// Smallest graded offset, relative to the segment length.
    pub floor: f64,
}

impl Default for WeightedLengthOptions {
    fn default() -> Self {
        Self { quad: QuadOptions { abs_tol: 1e-11, rel_tol: 1e-9, max_intervals: 4000 }, grading_ratio: 0.5, floor: 1e-12 }
    }
}

/// Distance at a point of the closed domain; boundary points give 0.
fn closed_distance(domain: &EpigraphDomain, z: &[f64]) -> Result<f64> {
    let gap = domain.vertical_gap(z)?;
    if gap < 0.0 {
        return Err(Error::NonIntegrable(format!("curve leaves the domain at {z:?}")));
    }
    if gap == 0.0 {
        return Ok(0.0);
    }
    match domain.closed_form_distance(z) {
        Some(d) => Ok(d),
        None => Ok(domain.distance(z)?.value),
    }
}

/// `int_0^len (d0 + (d1 - d0) s / len)^(alpha - 1) ds` in closed form.
fn affine_weighted(len: f64, d0: f64, d1: f64, alpha: f64) -> f64 {
    let (lo, hi) = if d0 <= d1 { (d0, d1) } else { (d1, d0) };
    if hi - lo <= 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        return len * mid.powf(alpha - 1.0);
    }
    len * (hi.powf(alpha) - lo.powf(alpha)) / (alpha * (hi - lo))
}

/// Graded break points in `(0, 1)` accumulating at `t = 0`, stopping at the
/// scale `stop` where the integrand is already resolved.
fn graded(ratio: f64, stop: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = ratio;
    while t > stop {
        out.push(t);
        t *= ratio;
    }
    out
}

/// Interior points probed on every non-affine segment before integrating.
const SCAN_POINTS: usize = 1024;

fn segment_weighted(
    domain: &EpigraphDomain,
    a: &[f64],
    b: &[f64],
    alpha: f64,
    opts: &WeightedLengthOptions,
) -> Result<CurveIntegralResult> {
    let len = dist(a, b);
    if len == 0.0 {
        return Ok(CurveIntegralResult { value: 0.0, quad_error: 0.0, n_nodes: 0 });
    }
    let d0 = closed_distance(domain, a)?;
    let d1 = closed_distance(domain, b)?;
    if domain.is_affine() {
        if d0 == 0.0 && d1 == 0.0 {
            return Err(Error::NonIntegrable("segment lies in the boundary".into()));
        }
        return Ok(CurveIntegralResult { value: affine_weighted(len, d0, d1, alpha), quad_error: 0.0, n_nodes: 2 });
    }

    let n = a.len();
    let v: Vec<f64> = a.iter().zip(b).map(|(p, q)| (q - p) / len).collect();
    let at = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    let mut integrand = |t: f64| -> Result<f64> {
        let d = closed_distance(domain, &at(t))?;
        if d <= 0.0 {
            return Err(Error::NonIntegrable(format!("segment touches the boundary at t = {t}")));
        }
        Ok(len * d.powf(alpha - 1.0))
    };

    // a scan catches segments that touch or cross the boundary between nodes
    for k in 1..SCAN_POINTS {
        integrand(k as f64 / SCAN_POINTS as f64)?;
    }

    // break points grade towards an endpoint whose distance is small
    // compared with the segment, down to `floor` when it is zero
    let mut lo_cut = 0.0;
    let mut hi_cut = 1.0;
    let mut tail_lo = 0.0;
    let mut tail_hi = 0.0;
    let mut breaks = vec![0.0];
    let rise = |dir: &[f64]| dir[n - 1] - domain.lip() * norm(&dir[..n - 1]);
    for (end, d_end) in [(0usize, d0), (1usize, d1)] {
        let stop = (d_end / len).max(opts.floor);
        if d_end == 0.0 {
            // gap grows at least like kappa * s from a boundary endpoint
            let dir: Vec<f64> = if end == 0 { v.clone() } else { v.iter().map(|c| -c).collect() };
            let kappa = rise(&dir);
            if !(kappa > 0.0) {
                return Err(Error::NonIntegrable(
                    "segment leaves a boundary point without a transversal rise".into(),
                ));
            }
            // on [0, tau]: c s <= d <= s with s the arclength from the endpoint
            let c = kappa * domain.cone_cos();
            let tau = opts.floor;
            let base = (len * tau).powf(alpha) / alpha;
            tail_lo += base;
            tail_hi += base * c.powf(alpha - 1.0);
            if end == 0 {
                lo_cut = tau;
            } else {
                hi_cut = 1.0 - tau;
            }
        }
        let g = graded(opts.grading_ratio, stop);
        if end == 0 {
            breaks.extend(g.iter().rev().copied());
        } else {
            breaks.extend(g.iter().map(|t| 1.0 - t));
        }
    }
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks[0] = lo_cut;
    *breaks.last_mut().unwrap() = hi_cut;
    breaks.retain(|&t| t >= lo_cut && t <= hi_cut);

    let r = integrate_with_breaks(&mut integrand, &breaks, opts.quad)?;
    if !r.converged {
        return Err(Error::Accuracy(format!(
            "weighted length did not converge (error {} after {} evaluations)",
            r.error, r.n_evals
        )));
    }
    let tail = 0.5 * (tail_lo + tail_hi);
    let tail_err = 0.5 * (tail_hi - tail_lo);
    Ok(CurveIntegralResult { value: r.value + tail, quad_error: r.error + tail_err, n_nodes: r.n_evals })
}

/// `int_curve d(z, dE)^(alpha - 1) |dz|`. Segments over a hyperplane
/// boundary are integrated in closed form; other segments use adaptive
/// quadrature with graded break points near small endpoint distances.
pub fn weighted_length(
    curve: &Polyline,
    domain: &EpigraphDomain,
    alpha: f64,
    opts: &WeightedLengthOptions,
) -> Result<CurveIntegralResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if curve.vertices[0].dim() != domain.dim() {
        return invalid("curve and domain dimensions differ");
    }
    if curve.vertices.len() == 1 {
        closed_distance(domain, &curve.vertices[0])?;
    }
    let mut acc = CurveIntegralResult { value: 0.0, quad_error: 0.0, n_nodes: 0 };
    for w in curve.vertices.windows(2) {
        let r = segment_weighted(domain, &w[0], &w[1], alpha, opts)?;
        acc.value += r.value;
        acc.quad_error += r.quad_error;
        acc.n_nodes += r.n_nodes;
    }
    Ok(acc)
}

/// The lift curve `x -> x + lambda e_N -> y + lambda' e_N -> y` with
/// `min(lambda, lambda') = (1 + L)|x - y|` and a common lifted height.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CigarCurve {
    pub polyline: Polyline,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub height: f64,
    /// Sampled boundary distance along the middle segment.
    pub middle_clearance: f64,
    /// Whether the middle clearance reaches `|x - y|`.
    pub clearance_ok: bool,
}

/// Points checked along the middle segment.
pub const CLEARANCE_CHECKS: usize = 33;

pub fn cigar_curve(domain: &EpigraphDomain, x: &Point, y: &Point) -> Result<CigarCurve> {
    for p in [x, y] {
        if p.dim() != domain.dim() {
            return invalid("point and domain dimensions differ");
        }
        if !domain.contains(p) {
            return Err(Error::Domain(format!("endpoint {:?} is not interior", p.coords())));
        }
    }
    if x == y {
        let d = domain.distance(x)?.value;
        return Ok(CigarCurve {
            polyline: Polyline::single(x.clone()),
            lambda: 0.0,
            lambda_prime: 0.0,
            height: x.height(),
            middle_clearance: d,
            clearance_ok: true,
        });
    }
    let sep = dist(x, y);
    let lift = (1.0 + domain.lip()) * sep;
    let height = x.height().max(y.height()) + lift;
    let (lambda, lambda_prime) = (height - x.height(), height - y.height());
    let top = |p: &Point| -> Result<Point> {
        let mut c = p.coords().to_vec();
        *c.last_mut().unwrap() = height;
        Point::new(c)
    };
    let (xl, yl) = (top(x)?, top(y)?);
    let middle_clearance = domain.segment_clearance(&xl, &yl, CLEARANCE_CHECKS)?.distance;
    let polyline = Polyline::new(vec![x.clone(), xl, yl, y.clone()])?;
    Ok(CigarCurve {
        polyline,
        lambda,
        lambda_prime,
        height,
        middle_clearance,
        clearance_ok: middle_clearance >= sep * (1.0 - 1e-12),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GehringMartioSampler {
    /// Horizontal box for the anchor points.
    pub lo: f64,
    pub hi: f64,
    /// Decades `k` of the separations `|x - y| = 10^(k + v)`, `v` in `[0, 1)`.
    pub decade_min: i32,
    pub decade_max: i32,
    /// Height of `x` above the boundary in units of `|x - y|`, log-uniform.
    pub rel_height_min: f64,
    pub rel_height_max: f64,
    /// Number of pair shapes; each shape is evaluated at every decade.
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for GehringMartioSampler {
    fn default() -> Self {
        Self {
            lo: -2.0,
            hi: 2.0,
            decade_min: -3,
            decade_max: 2,
            rel_height_min: 1e-2,
            rel_height_max: 1e2,
            n_pairs: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecadeRow {
    pub decade: i32,
    pub n: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GehringMartioReport {
    pub alpha: f64,
    pub n_pairs: usize,
    pub max_ratio: f64,
    pub witness: Option<Pair>,
    pub rows: Vec<DecadeRow>,
    /// Curves whose sampled middle clearance fell short of `|x - y|`.
    pub clearance_shortfalls: usize,
    /// `max_ratio * (1 + C_D_HEADROOM)`.
    pub c_d: f64,
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

/// Ratio `weighted_length(cigar(x, y)) / |x - y|^alpha` over sampled pairs.
pub fn gehring_martio_check(
    domain: &EpigraphDomain,
    alpha: f64,
    sampler: &GehringMartioSampler,
    opts: &WeightedLengthOptions,
) -> Result<GehringMartioReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if sampler.n_pairs == 0 {
        return invalid("no pairs requested");
    }
    if sampler.decade_max - sampler.decade_min < 5 {
        return invalid("separations must cover at least six decades");
    }
    if !(sampler.lo.is_finite() && sampler.hi.is_finite() && sampler.lo <= sampler.hi) {
        return invalid("anchor box needs finite lo <= hi");
    }
    if !(sampler.rel_height_min > 0.0 && sampler.rel_height_max >= sampler.rel_height_min) {
        return invalid("relative heights need 0 < min <= max");
    }
    let n = domain.dim();
    let decades: Vec<i32> = (sampler.decade_min..=sampler.decade_max).collect();
    let per_shape = (0..sampler.n_pairs as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, Pair, bool)>> {
            let mut r = rng::stream(sampler.seed, i);
            let anchor: Vec<f64> =
                (0..n - 1).map(|_| sampler.lo + (sampler.hi - sampler.lo) * r.random::<f64>()).collect();
            let base = domain.graph.psi(&anchor)?;
            let (a, b) = (sampler.rel_height_min.ln(), sampler.rel_height_max.ln());
            let rho = (a + r.random::<f64>() * (b - a)).exp();
            let jitter: f64 = r.random();
            let u = random_unit(&mut r, n);
            decades
                .iter()
                .map(|&k| {
                    let s = 10f64.powf(k as f64 + jitter);
                    let mut x = anchor.clone();
                    x.push(base + s * rho);
                    let mut up = u.clone();
                    up[n - 1] = up[n - 1].abs();
                    let neg: Vec<f64> = u.iter().map(|c| -c).collect();
                    let mut vertical = vec![0.0; n];
                    vertical[n - 1] = 1.0;
                    let y = [&u, &neg, &up, &vertical]
                        .into_iter()
                        .map(|d| x.iter().zip(d.iter()).map(|(p, q)| p + s * q).collect::<Vec<f64>>())
                        .find(|y| domain.contains(y))
                        .expect("moving straight up stays in an epigraph");
                    let (px, py) = (Point::new(x.clone())?, Point::new(y.clone())?);
                    let curve = cigar_curve(domain, &px, &py)?;
                    let w = weighted_length(&curve.polyline, domain, alpha, opts)?;
                    Ok((w.value / dist(&x, &y).powf(alpha), Pair { x, y }, curve.clearance_ok))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(decades.len());
    let mut best: Option<(f64, Pair)> = None;
    let mut shortfalls = 0;
    for (j, &k) in decades.iter().enumerate() {
        let mut max_ratio = 0.0f64;
        let mut sum = 0.0;
        for shape in &per_shape {
            let (q, pair, ok) = &shape[j];
            max_ratio = max_ratio.max(*q);
            sum += q;
            if !ok {
                shortfalls += 1;
            }
            if best.as_ref().map_or(true, |(b, _)| q > b) {
                best = Some((*q, pair.clone()));
            }
        }
        rows.push(DecadeRow { decade: k, n: per_shape.len(), max_ratio, mean_ratio: sum / per_shape.len() as f64 });
    }
    let (max_ratio, witness) = best.map_or((0.0, None), |(q, p)| (q, Some(p)));
    Ok(GehringMartioReport {
        alpha,
        n_pairs: sampler.n_pairs,
        max_ratio,
        witness,
        rows,
        clearance_shortfalls: shortfalls,
        c_d: max_ratio * (1.0 + C_D_HEADROOM),
    })
}

/// CSV with columns `decade,n,max_ratio,mean_ratio`.
pub fn write_decades_csv<W: Write>(out: W, rows: &[DecadeRow]) -> Result<()> {
    let err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["decade", "n", "max_ratio", "mean_ratio"]).map_err(err)?;
    for r in rows {
        w.write_record([r.decade.to_string(), r.n.to_string(), r.max_ratio.to_string(), r.mean_ratio.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientHoelderReport {
    pub alpha: f64,
    pub c_f: f64,
    pub c_d: f64,
    /// `sup d^(1-alpha) |grad f|`, to be compared with `c_f`.
    pub hypothesis: WeightedSup,
    /// Largest `|f(x) - f(y)| / (c_d c_f |x - y|^alpha)`; absent when the
    /// hypothesis failed.
    pub worst_ratio: Option<f64>,
    pub witness: Option<Pair>,
    /// `1 / worst_ratio`.
    pub worst_margin: Option<f64>,
    pub status: CheckStatus,
}

/// Checks `|grad f| <= c_f d^(alpha-1)` on sampled points and then
/// `|f(x) - f(y)| <= c_d c_f |x - y|^alpha` on sampled pairs.
#[allow(clippy::too_many_arguments)]
pub fn gradient_to_hoelder_check(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    c_f: f64,
    c_d: f64,
    points: &PointSampler,
    pairs: &PairSampler,
    tol: f64,
) -> Result<GradientHoelderReport> {
    if !(c_f >= 0.0 && c_f.is_finite() && c_d >= 0.0 && c_d.is_finite()) {
        return invalid("c_f and c_d must be finite and non-negative");
    }
    let pts = sample_points(domain, points)?;
    let hypothesis = weighted_gradient_sup(field, domain, alpha, &pts)?;
    let mut report = GradientHoelderReport {
        alpha,
        c_f,
        c_d,
        hypothesis,
        worst_ratio: None,
        witness: None,
        worst_margin: None,
        status: CheckStatus::HypothesisViolated,
    };
    if report.hypothesis.value > c_f * (1.0 + tol) {
        return Ok(report);
    }
    let prs = random_pairs(domain, pairs, false)?;
    let est = seminorm_over_pairs(field, alpha, SeminormMode::Global, &prs)?;
    let bound = c_d * c_f;
    let ratio = if est.value == 0.0 { 0.0 } else { est.value / bound };
    report.worst_ratio = Some(ratio);
    report.worst_margin = (ratio > 0.0).then(|| 1.0 / ratio);
    report.witness = est.witness;
    report.status = if ratio <= 1.0 + tol { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEquivalence {
    pub local: SeminormEstimate,
    pub global: SeminormEstimate,
    /// `global / local`; absent when the local estimate is 0.
    pub ratio: Option<f64>,
}

/// Local and global seminorms with the local pairs included in the global
/// sample, so `local <= global` holds by construction.
pub fn norm_equivalence(
    field: &dyn ScalarField,
    domain: &EpigraphDomain,
    alpha: f64,
    sampler: &PairSampler,
) -> Result<NormEquivalence> {
    let local = local_seminorm(field, domain, alpha, sampler)?;
    let mut pairs = random_pairs(domain, sampler, false)?;
    pairs.extend(random_pairs(domain, sampler, true)?);
    let q = pair_quotients(field, alpha, &pairs)?;
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    let global = SeminormEstimate {
        mode: SeminormMode::Global,
        value: q[best],
        witness: Some(pairs[best].clone()),
        n_samples: pairs.len(),
        alpha,
    };
    let ratio = (local.value > 0.0).then(|| global.value / local.value);
    Ok(NormEquivalence { local, global, ratio })
}
