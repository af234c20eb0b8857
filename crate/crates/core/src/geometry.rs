//! Lipschitz graphs, their strict epigraphs and distance queries.
//!
//! A domain is `E = {(x', x_N) : x_N > psi(x')}` for an `L`-Lipschitz
//! function `psi` on `R^{N-1}`. Interior points admit the cone bound
//! `d(x, dE) >= (x_N - psi(x')) cos(arctan L)`; for the closed-form graph
//! kinds the exact distance is also available.

use std::io::Read;
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::rng;

/// A point of `R^N`, `N >= 2`, with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return invalid(format!("a point needs at least 2 coordinates, got {}", coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The first `N - 1` coordinates `x'`.
    pub fn horizontal(&self) -> &[f64] {
        &self.0[..self.0.len() - 1]
    }

    /// The last coordinate `x_N`.
    pub fn height(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// `x + lambda e_N`.
    pub fn lifted(&self, lambda: f64) -> Point {
        let mut c = self.0.clone();
        *c.last_mut().unwrap() += lambda;
        Point(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// `cos(arctan L)` without the trigonometric round trip.
pub fn cone_cos(lip: f64) -> f64 {
    1.0 / (1.0 + lip * lip).sqrt()
}

/// Shape of the boundary function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphShape {
    /// `psi(x') = slope . x' + offset`.
    Affine { slope: Vec<f64>, offset: f64 },
    /// `psi(x') = slope |x' - apex| + height`.
    AbsCone { slope: f64, apex: Vec<f64>, height: f64 },
    /// One-dimensional polyline through `knots`, constant beyond the end knots.
    PiecewiseLinear { knots: Vec<[f64; 2]> },
    /// Values on a tensor grid (one or two axes), linearly or bilinearly
    /// interpolated. Queries outside the grid are errors.
    Tabulated { axes: Vec<Vec<f64>>, values: Vec<f64> },
}

impl GraphShape {
    fn horizontal_dim(&self) -> Result<usize> {
        match self {
            GraphShape::Affine { slope, .. } => Ok(slope.len()),
            GraphShape::AbsCone { apex, .. } => Ok(apex.len()),
            GraphShape::PiecewiseLinear { .. } => Ok(1),
            GraphShape::Tabulated { axes, .. } => Ok(axes.len()),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        match self {
            GraphShape::Affine { slope, offset } => {
                if slope.is_empty() || !finite(slope) || !offset.is_finite() {
                    return invalid("affine graph needs a non-empty finite slope vector");
                }
            }
            GraphShape::AbsCone { slope, apex, height } => {
                if apex.is_empty() || !finite(apex) || !slope.is_finite() || !height.is_finite() {
                    return invalid("abs-cone graph needs a finite slope, apex and height");
                }
            }
            GraphShape::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return invalid("piecewise-linear graph needs at least 2 knots");
                }
                if knots.iter().any(|k| !finite(k)) {
                    return invalid("knots must be finite");
                }
                if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return invalid("knot abscissae must be strictly increasing");
                }
            }
            GraphShape::Tabulated { axes, values } => {
                if axes.is_empty() || axes.len() > 2 {
                    return invalid("tabulated graphs support one or two axes");
                }
                for a in axes {
                    if a.len() < 2 || !finite(a) || a.windows(2).any(|w| w[1] <= w[0]) {
                        return invalid("table axes need >= 2 strictly increasing finite nodes");
                    }
                }
                let expected: usize = axes.iter().map(Vec::len).product();
                if values.len() != expected || !finite(values) {
                    return invalid(format!(
                        "table needs {expected} finite values, got {}",
                        values.len()
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A boundary function together with its declared Lipschitz bound `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzGraph {
    pub shape: GraphShape,
    pub lip: f64,
}

/// Result of sampled Lipschitz certification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzCertificate {
    pub declared: f64,
    pub max_quotient: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub n_pairs: usize,
    pub passed: bool,
}

impl LipschitzGraph {
    pub fn new(shape: GraphShape, lip: f64) -> Result<Self> {
        if !(lip >= 0.0 && lip.is_finite()) {
            return invalid(format!("Lipschitz bound must be finite and >= 0, got {lip}"));
        }
        shape.validate()?;
        Ok(Self { shape, lip })
    }

    /// `psi = 0` on `R^{n-1}`.
    pub fn flat(horizontal_dim: usize) -> Result<Self> {
        Self::affine(vec![0.0; horizontal_dim], 0.0, 0.0)
    }

    pub fn affine(slope: Vec<f64>, offset: f64, lip: f64) -> Result<Self> {
        Self::new(GraphShape::Affine { slope, offset }, lip)
    }

    pub fn abs_cone(slope: f64, apex: Vec<f64>, lip: f64) -> Result<Self> {
        Self::new(GraphShape::AbsCone { slope, apex, height: 0.0 }, lip)
    }

    pub fn piecewise_linear(knots: Vec<[f64; 2]>, lip: f64) -> Result<Self> {
        Self::new(GraphShape::PiecewiseLinear { knots }, lip)
    }

    /// Reads a tabulated graph from CSV rows `x'_1[, x'_2], psi`. Two-axis
    /// tables must list the full tensor grid; row order is free.
    pub fn tabulated_from_csv<R: Read>(reader: R, lip: f64) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>();
            match row {
                Ok(r) => rows.push(r),
                // tolerate a single header line
                Err(_) if rows.is_empty() => continue,
                Err(e) => return invalid(format!("csv: {e}")),
            }
        }
        if rows.is_empty() {
            return invalid("csv table is empty");
        }
        let width = rows[0].len();
        if !(width == 2 || width == 3) || rows.iter().any(|r| r.len() != width) {
            return invalid("csv rows must all have 2 or 3 columns");
        }
        let n_axes = width - 1;
        let mut axes: Vec<Vec<f64>> = (0..n_axes)
            .map(|k| {
                let mut a: Vec<f64> = rows.iter().map(|r| r[k]).collect();
                a.sort_by(f64::total_cmp);
                a.dedup();
                a
            })
            .collect();
        if n_axes == 1 && axes[0].len() != rows.len() {
            return invalid("duplicate abscissae in 1-D table");
        }
        let mut values = vec![f64::NAN; rows.len()];
        if n_axes == 2 && axes[0].len() * axes[1].len() != rows.len() {
            return invalid("2-D table rows do not form a full tensor grid");
        }
        for r in &rows {
            let idx = match n_axes {
                1 => axes[0].partition_point(|&a| a < r[0]),
                _ => {
                    let i = axes[0].partition_point(|&a| a < r[0]);
                    let j = axes[1].partition_point(|&a| a < r[1]);
                    i * axes[1].len() + j
                }
            };
            values[idx] = r[n_axes];
        }
        if values.iter().any(|v| v.is_nan()) {
            return invalid("2-D table has duplicate grid nodes");
        }
        axes.shrink_to_fit();
        Self::new(GraphShape::Tabulated { axes, values }, lip)
    }

    /// `N - 1`.
    pub fn horizontal_dim(&self) -> usize {
        self.shape.horizontal_dim().unwrap_or(0)
    }

    pub fn cone_angle(&self) -> f64 {
        self.lip.atan()
    }

    pub fn cone_cos(&self) -> f64 {
        cone_cos(self.lip)
    }

    pub fn psi(&self, xp: &[f64]) -> Result<f64> {
        if xp.len() != self.horizontal_dim() {
            return invalid(format!(
                "expected {} horizontal coordinates, got {}",
                self.horizontal_dim(),
                xp.len()
            ));
        }
        Ok(match &self.shape {
            GraphShape::Affine { slope, offset } => {
                slope.iter().zip(xp).map(|(a, t)| a * t).sum::<f64>() + offset
            }
            GraphShape::AbsCone { slope, apex, height } => slope * dist(xp, apex) + height,
            GraphShape::PiecewiseLinear { knots } => pwl_eval(knots, xp[0]),
            GraphShape::Tabulated { axes, values } => table_eval(axes, values, xp)?,
        })
    }

    /// Samples `n_pairs` uniform pairs in `bbox` and compares the largest
    /// difference quotient with the declared bound.
    pub fn certify(&self, n_pairs: usize, bbox: &[(f64, f64)], seed: u64) -> Result<LipschitzCertificate> {
        if n_pairs == 0 {
            return invalid("certification needs at least one pair");
        }
        if bbox.len() != self.horizontal_dim() {
            return invalid("sampling box dimension does not match the graph");
        }
        if bbox.iter().any(|&(lo, hi)| !(hi > lo) || !lo.is_finite() || !hi.is_finite()) {
            return invalid("sampling box is degenerate (zero volume)");
        }
        let mut rng = rng::stream(seed, 0);
        let draw = |rng: &mut rng::StreamRng| -> Vec<f64> {
            bbox.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()
        };
        let mut best = 0.0_f64;
        let mut witness = None;
        let mut passed = true;
        for _ in 0..n_pairs {
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let sep = dist(&a, &b);
            if sep == 0.0 {
                continue;
            }
            let (pa, pb) = (self.psi(&a)?, self.psi(&b)?);
            let q = (pa - pb).abs() / sep;
            // rounding in psi and in the separation, amplified by 1/sep
            let scale = pa.abs() + pb.abs() + self.lip * (norm(&a) + norm(&b));
            let slack = 16.0 * f64::EPSILON * scale / sep + 1e-12 * self.lip.max(1.0);
            passed &= q <= self.lip + slack;
            if q > best || witness.is_none() {
                best = best.max(q);
                witness = Some((a, b));
            }
        }
        Ok(LipschitzCertificate {
            declared: self.lip,
            max_quotient: best,
            witness,
            n_pairs,
            passed,
        })
    }
}

fn pwl_eval(knots: &[[f64; 2]], t: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if t <= first[0] {
        return first[1];
    }
    if t >= last[0] {
        return last[1];
    }
    let i = knots.partition_point(|k| k[0] <= t) - 1;
    let (a, b) = (knots[i], knots[i + 1]);
    let w = (t - a[0]) / (b[0] - a[0]);
    a[1] + w * (b[1] - a[1])
}

fn locate(axis: &[f64], t: f64) -> Result<(usize, f64)> {
    let (lo, hi) = (axis[0], axis[axis.len() - 1]);
    if !(t >= lo && t <= hi) {
        return Err(Error::Extrapolation(format!("{t} lies outside the table extent [{lo}, {hi}]")));
    }
    let i = (axis.partition_point(|&a| a <= t).max(1) - 1).min(axis.len() - 2);
    Ok((i, (t - axis[i]) / (axis[i + 1] - axis[i])))
}

fn table_eval(axes: &[Vec<f64>], values: &[f64], xp: &[f64]) -> Result<f64> {
    match axes.len() {
        1 => {
            let (i, w) = locate(&axes[0], xp[0])?;
            Ok(values[i] * (1.0 - w) + values[i + 1] * w)
        }
        _ => {
            let (i, u) = locate(&axes[0], xp[0])?;
            let (j, v) = locate(&axes[1], xp[1])?;
            let m = axes[1].len();
            let at = |a: usize, b: usize| values[a * m + b];
            Ok(at(i, j) * (1.0 - u) * (1.0 - v)
                + at(i + 1, j) * u * (1.0 - v)
                + at(i, j + 1) * (1.0 - u) * v
                + at(i + 1, j + 1) * u * v)
        }
    }
}

/// Distance from `p` to the segment `[a, b]` in the plane.
fn point_segment_2d(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
    q[0].hypot(q[1])
}

/// Distance from `p` to the ray starting at `a` in direction `dir`.
fn point_ray_2d(p: [f64; 2], a: [f64; 2], dir: [f64; 2]) -> f64 {
    let len = dir[0].hypot(dir[1]);
    let u = [dir[0] / len, dir[1] / len];
    let v = [p[0] - a[0], p[1] - a[1]];
    let t = (v[0] * u[0] + v[1] * u[1]).max(0.0);
    (v[0] - t * u[0]).hypot(v[1] - t * u[1])
}

/// Distance from `p` to the polyline graph of a 1-D piecewise-linear function
/// over the knots; optionally extended by horizontal rays.
fn polyline_distance(knots: &[[f64; 2]], p: [f64; 2], with_rays: bool) -> f64 {
    let mut best = f64::INFINITY;
    for w in knots.windows(2) {
        best = best.min(point_segment_2d(p, w[0], w[1]));
    }
    if with_rays {
        best = best.min(point_ray_2d(p, knots[0], [-1.0, 0.0]));
        best = best.min(point_ray_2d(p, knots[knots.len() - 1], [1.0, 0.0]));
    }
    best
}

/// A distance value with an absolute error bound; the true distance lies in
/// `[value - error_bound, value]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    pub value: f64,
    pub error_bound: f64,
}

impl Distance {
    /// Certified lower bound for the true distance.
    pub fn lower(&self) -> f64 {
        self.value - self.error_bound
    }
}

/// Minimum distance to the boundary sampled along a segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clearance {
    pub distance: f64,
    pub witness: Point,
}

/// The strict epigraph of a Lipschitz graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpigraphDomain {
    pub graph: LipschitzGraph,
}

impl EpigraphDomain {
    pub fn new(graph: LipschitzGraph) -> Self {
        Self { graph }
    }

    /// The upper half-space `x_N > 0` in `R^dim`.
    pub fn half_space(dim: usize) -> Result<Self> {
        if dim < 2 {
            return invalid("dimension must be at least 2");
        }
        Ok(Self::new(LipschitzGraph::flat(dim - 1)?))
    }

    pub fn dim(&self) -> usize {
        self.graph.horizontal_dim() + 1
    }

    pub fn lip(&self) -> f64 {
        self.graph.lip
    }

    pub fn cone_cos(&self) -> f64 {
        self.graph.cone_cos()
    }

    /// True when the boundary is a hyperplane, so distance is affine in `x`.
    pub fn is_affine(&self) -> bool {
        matches!(self.graph.shape, GraphShape::Affine { .. })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return invalid(format!("expected a point in R^{}, got {} coordinates", self.dim(), x.len()));
        }
        Ok(())
    }

    /// `x_N - psi(x')`.
    pub fn vertical_gap(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let n = x.len();
        Ok(x[n - 1] - self.graph.psi(&x[..n - 1])?)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        matches!(self.vertical_gap(x), Ok(g) if g > 0.0)
    }

    fn interior_gap(&self, x: &[f64]) -> Result<f64> {
        let g = self.vertical_gap(x)?;
        if g > 0.0 {
            Ok(g)
        } else {
            domain(format!("point {x:?} is not interior (vertical gap {g})"))
        }
    }

    /// Cone lower bound `gap * cos(arctan L)`.
    pub fn distance_lower_bound(&self, x: &[f64]) -> Result<f64> {
        Ok(self.interior_gap(x)? * self.cone_cos())
    }

    /// Unsigned distance from any point (inside or outside) to the graph,
    /// for the kinds with a closed form.
    pub fn closed_form_distance(&self, x: &[f64]) -> Option<f64> {
        if self.check_dim(x).is_err() {
            return None;
        }
        let n = x.len();
        let (xp, xn) = (&x[..n - 1], x[n - 1]);
        match &self.graph.shape {
            GraphShape::Affine { slope, offset } => {
                let s: f64 = slope.iter().zip(xp).map(|(a, t)| a * t).sum();
                Some((xn - s - offset).abs() / (1.0 + slope.iter().map(|a| a * a).sum::<f64>()).sqrt())
            }
            GraphShape::AbsCone { slope, apex, height } => {
                // nearest points lie in the half-plane through the axis and x
                let p = [dist(xp, apex), xn - height];
                let a = point_ray_2d(p, [0.0, 0.0], [1.0, *slope]);
                let b = point_ray_2d(p, [0.0, 0.0], [-1.0, *slope]);
                Some(a.min(b))
            }
            GraphShape::PiecewiseLinear { knots } => Some(polyline_distance(knots, [xp[0], xn], true)),
            GraphShape::Tabulated { .. } => None,
        }
    }

    /// Distance to the boundary for an interior point. Closed-form kinds are
    /// exact; one-axis tables are exact on the polyline inside the search
    /// window; two-axis tables use branch-and-bound refinement down to cells
    /// of width `resolution`.
    pub fn distance_exact(&self, x: &[f64], resolution: f64) -> Result<Distance> {
        if !(resolution > 0.0) {
            return invalid(format!("resolution must be positive, got {resolution}"));
        }
        let gap = self.interior_gap(x)?;
        if let Some(d) = self.closed_form_distance(x) {
            return Ok(Distance { value: d, error_bound: 0.0 });
        }
        let GraphShape::Tabulated { axes, values } = &self.graph.shape else {
            unreachable!("closed form covers the other kinds")
        };
        let n = x.len();
        // boundary points farther than gap horizontally cannot beat the
        // vertical foot point
        let half = gap;
        for (k, axis) in axes.iter().enumerate() {
            let (lo, hi) = (axis[0], axis[axis.len() - 1]);
            if x[k] - half < lo || x[k] + half > hi {
                return Err(Error::Extrapolation(format!(
                    "distance window around {x:?} leaves the table extent"
                )));
            }
        }
        if axes.len() == 1 {
            let axis = &axes[0];
            let (lo, hi) = (x[0] - half, x[0] + half);
            let i0 = axis.partition_point(|&a| a <= lo).saturating_sub(1);
            let i1 = axis.partition_point(|&a| a < hi).min(axis.len() - 1);
            let knots: Vec<[f64; 2]> = (i0..=i1).map(|i| [axis[i], values[i]]).collect();
            let d = polyline_distance(&knots, [x[0], x[n - 1]], false).min(gap);
            return Ok(Distance { value: d, error_bound: 0.0 });
        }
        Ok(self.branch_and_bound_2d(x, gap, resolution))
    }

    fn branch_and_bound_2d(&self, x: &[f64], gap: f64, resolution: f64) -> Distance {
        let lip_t = (1.0 + self.lip() * self.lip()).sqrt();
        let f = |t: [f64; 2]| -> f64 {
            let psi = self.graph.psi(&t).unwrap_or(f64::INFINITY);
            ((x[0] - t[0]).powi(2) + (x[1] - t[1]).powi(2) + (x[2] - psi).powi(2)).sqrt()
        };
        // cells are squares (center, half-width)
        let mut best = gap;
        let mut cells = vec![([x[0], x[1]], gap)];
        let mut floor = f64::INFINITY;
        while let Some((c, h)) = cells.pop() {
            let v = f(c);
            best = best.min(v);
            let lb = v - lip_t * h * std::f64::consts::SQRT_2;
            if lb >= best {
                continue;
            }
            if 2.0 * h <= resolution {
                floor = floor.min(lb);
                continue;
            }
            let q = h / 2.0;
            for (dx, dy) in [(-q, -q), (-q, q), (q, -q), (q, q)] {
                cells.push(([c[0] + dx, c[1] + dy], q));
            }
        }
        let err = if floor.is_finite() { (best - floor).max(0.0) } else { 0.0 };
        Distance { value: best, error_bound: err }
    }

    /// Distance with a resolution tied to the vertical gap.
    pub fn distance(&self, x: &[f64]) -> Result<Distance> {
        let gap = self.interior_gap(x)?;
        self.distance_exact(x, gap * 1e-4)
    }

    /// A certified lower bound: the better of the cone bound and the exact
    /// distance minus its error.
    pub fn certified_distance(&self, x: &[f64]) -> Result<f64> {
        let cone = self.distance_lower_bound(x)?;
        Ok(self.distance(x)?.lower().max(cone))
    }

    /// Lower bound for `d(x + lambda e_N, dE)`: `(d + lambda) cos(arctan L)`.
    pub fn shifted_distance_bound(&self, x: &[f64], lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return invalid(format!("shift must be non-negative, got {lambda}"));
        }
        Ok((self.certified_distance(x)? + lambda) * self.cone_cos())
    }

    /// Smallest boundary distance over `n_check` equispaced points of `[a, b]`.
    pub fn segment_clearance(&self, a: &[f64], b: &[f64], n_check: usize) -> Result<Clearance> {
        self.interior_gap(a)?;
        self.interior_gap(b)?;
        let n = n_check.max(1);
        let mut best: Option<Clearance> = None;
        for k in 0..n {
            let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            let z: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
            let d = self.distance(&z)?.value;
            if best.as_ref().map_or(true, |c| d < c.distance) {
                best = Some(Clearance { distance: d, witness: Point::new(z)? });
            }
        }
        Ok(best.expect("at least one sample"))
    }
}
