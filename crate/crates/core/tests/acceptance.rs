//! Acceptance run: one PASS/FAIL line per criterion, every tolerance pinned
//! below. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;

use epiholder::constants::{derive_constants, gamma_star, gamma_star_residual, schwarz_constant};
use epiholder::extension::{
    cigar_curve, gehring_martio_check, weighted_length, GehringMartioSampler, WeightedLengthOptions,
};
use epiholder::field::{gradient, StepPolicy};
use epiholder::harmonic::{BoundaryData, WosParams, wos_evaluate};
use epiholder::hoelder::{
    sample_points, shift_uniformity, theorem_check, vertical_seminorm, PairSampler, PointSampler,
    TheoremSamplers, VerticalSampler,
};
use epiholder::rng::stream;
use epiholder::{EpigraphDomain, HarmonicField, LipschitzGraph, Point, ScalarField};

const K_TOL: f64 = 1e-12;
const GAMMA_RESIDUAL_TOL: f64 = 1e-12;
const CONSTANTS_BUDGET: Duration = Duration::from_secs(1);

const CONE_CASES: usize = 1000;
const CONE_MAX_LIP: f64 = 5.0;
const CONE_GRID_STEP: f64 = 1e-3;
const CONE_BUDGET: Duration = Duration::from_secs(30);

const GRADIENT_POINTS: usize = 10_000;
const GRADIENT_TOL: f64 = 1e-9;
const GRADIENT_BUDGET: Duration = Duration::from_secs(30);

const THEOREM_ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];
const THEOREM_SAMPLES: usize = 10_000;
const INFLATION: f64 = 1.2;
const TOL: f64 = 1e-9;
const THEOREM_BUDGET: Duration = Duration::from_secs(120);

const SHIFTS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

const WOS_WALKS: usize = 10_000;
const WOS_EPSILON: f64 = 1e-3;
const WOS_SIGMAS: f64 = 3.0;
const WOS_FLOOR: f64 = 0.02;
const WOS_BUDGET: Duration = Duration::from_secs(60);

const SCALE_INVARIANCE_TOL: f64 = 1e-6;
const SEED_STABILITY: f64 = 0.10;
const PAIR_EXAMPLE_TOL: f64 = 1e-4;

const VERTICAL_TOL: f64 = 1e-3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// The four deterministic test fields with an independent bound on `sup |U|`.
fn fields() -> Vec<(&'static str, HarmonicField, EpigraphDomain, f64)> {
    let plane = EpigraphDomain::half_space(2).unwrap();
    let space = EpigraphDomain::half_space(3).unwrap();
    let cone = EpigraphDomain::new(LipschitzGraph::abs_cone(1.0, vec![0.0], 1.0).unwrap());
    let pole2 = HarmonicField::pole(&cone, Point::new(vec![0.0, -1.0]).unwrap()).unwrap();
    let pole3 = HarmonicField::pole(&space, Point::new(vec![0.0, 0.0, -1.0]).unwrap()).unwrap();
    vec![
        // |cos x_1| e^(-x_2) <= 1
        ("separable-exp", HarmonicField::separable_exp(2).unwrap(), plane.clone(), 1.0),
        // |Re 1/(z - p)| <= 1/|z - p| and the pole is 1/sqrt 2 from the cone
        ("pole-2d-cone", pole2, cone, 2f64.sqrt()),
        // the pole is at distance 1 from the half-space
        ("pole-3d", pole3, space, 1.0),
        ("harmonic-measure", HarmonicField::harmonic_measure_2d(), plane, 1.0),
    ]
}

fn random_points(n: usize, seed: u64) -> PointSampler {
    PointSampler::Random { lo: -10.0, hi: 10.0, gap_min: 1e-4, gap_max: 10.0, n_points: n, seed }
}

fn constants() -> Outcome {
    let start = Instant::now();
    let mut ok = schwarz_constant(3).unwrap() == 1.5;
    let k2 = (schwarz_constant(2).unwrap() - 4.0 / PI).abs();
    let k4 = (schwarz_constant(4).unwrap() - 16.0 / (3.0 * PI)).abs();
    ok &= k2 <= K_TOL && k4 <= K_TOL;
    let mut worst = 0.0_f64;
    for k in [0.1, 4.0 / PI, 1.5, 16.0 / (3.0 * PI), 25.0] {
        let g = gamma_star(k).unwrap();
        // residual of 2 g k / (1 - g)^2 = 1/2, evaluated here
        let r = (2.0 * g * k / ((1.0 - g) * (1.0 - g)) - 0.5).abs();
        worst = worst.max(r).max(gamma_star_residual(g, k).abs());
        ok &= g > 0.0 && g < 1.0;
    }
    ok &= worst <= GAMMA_RESIDUAL_TOL;
    let mut linear = true;
    for dim in [2, 3, 4] {
        for (alpha, lip) in [(0.25, 0.0), (0.5, 1.0), (0.75, 3.5)] {
            let a = derive_constants(dim, alpha, lip, 0.7).unwrap();
            let b = derive_constants(dim, alpha, lip, 1.4).unwrap();
            linear &= b.c1 == 2.0 * a.c1 && b.c2 == 2.0 * a.c2 && b.c3 == 2.0 * a.c3;
        }
    }
    ok &= linear;
    let t = start.elapsed();
    ok &= t < CONSTANTS_BUDGET;
    outcome(
        ok,
        format!("|K2 - 4/pi| = {k2:.1e}, |K4 - 16/(3 pi)| = {k4:.1e}, max gamma* residual {worst:.1e}, doubling exact: {linear}, {t:.2?}"),
    )
}

/// Piecewise-linear evaluation, constant beyond the end knots.
fn pwl(knots: &[[f64; 2]], t: f64) -> f64 {
    if t <= knots[0][0] {
        return knots[0][1];
    }
    for w in knots.windows(2) {
        if t <= w[1][0] {
            let s = (t - w[0][0]) / (w[1][0] - w[0][0]);
            return w[0][1] + s * (w[1][1] - w[0][1]);
        }
    }
    knots[knots.len() - 1][1]
}

/// Distance from `(a, b)` to the graph sampled with step `h` on the window
/// `|t - a| <= b - pwl(a)`, which contains the nearest point.
fn brute_distance(knots: &[[f64; 2]], a: f64, b: f64, h: f64) -> f64 {
    let r = b - pwl(knots, a);
    let n = (r / h).ceil() as i64;
    let mut best = r;
    for i in -n..=n {
        let t = a + i as f64 * h;
        best = best.min((t - a).hypot(b - pwl(knots, t)));
    }
    best
}

fn cone_distance() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut lib_mismatch = 0;
    let mut worst_margin = f64::INFINITY;
    for case in 0..CONE_CASES as u64 {
        let mut rng = stream(2024, case);
        let n_knots = rng.random_range(2..=8);
        let mut t = -5.0;
        let mut y = rng.random_range(-2.0..2.0);
        let mut knots = vec![[t, y]];
        for _ in 1..n_knots {
            let dt = rng.random_range(0.2..3.0);
            t += dt;
            y += dt * rng.random_range(-CONE_MAX_LIP..CONE_MAX_LIP);
            knots.push([t, y]);
        }
        let lip = knots.windows(2).map(|w| ((w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).abs()).fold(0.0, f64::max);
        let domain = EpigraphDomain::new(LipschitzGraph::piecewise_linear(knots.clone(), lip).unwrap());
        let a = rng.random_range(-8.0..8.0);
        let gap = 10f64.powf(rng.random_range(-3.0..0.7));
        let b = pwl(&knots, a) + gap;
        let lambda = rng.random_range(0.0..10.0);
        let cos = 1.0 / lip.hypot(1.0);
        // a grid point lies within h/2 of the nearest foot point, along a
        // graph piece of slope at most L
        let grid_err = 0.5 * CONE_GRID_STEP * lip.hypot(1.0);
        let d0 = brute_distance(&knots, a, b, CONE_GRID_STEP);
        let d1 = brute_distance(&knots, a, b + lambda, CONE_GRID_STEP);
        let margin = d1 - ((d0 + lambda) * cos - 2.0 * grid_err);
        worst_margin = worst_margin.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
        let x = [a, b];
        let lib = domain.distance(&x).unwrap().value;
        let bound = domain.shifted_distance_bound(&x, lambda).unwrap();
        if (lib - d0).abs() > grid_err + 1e-12 || bound > d1 + 1e-12 {
            lib_mismatch += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        violations == 0 && lib_mismatch == 0 && t < CONE_BUDGET,
        format!("{CONE_CASES} cases, {violations} violations, {lib_mismatch} library mismatches, min margin {worst_margin:.3e}, {t:.2?}"),
    )
}

fn gradient_distance() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, field, domain, sup)) in fields().into_iter().enumerate() {
        let k = schwarz_constant(domain.dim() as u32).unwrap();
        let points = sample_points(&domain, &random_points(GRADIENT_POINTS, 100 + i as u64)).unwrap();
        let mut worst = 0.0_f64;
        for x in &points {
            let d = domain.distance(x).unwrap().value;
            let g = gradient(&field, &domain, x, StepPolicy::default()).unwrap();
            let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
            worst = worst.max(d * norm / (k * sup));
        }
        ok &= worst <= 1.0 + GRADIENT_TOL;
        parts.push(format!("{name} {worst:.4}"));
    }
    let t = start.elapsed();
    ok &= t < GRADIENT_BUDGET;
    outcome(ok, format!("max d|grad U|/(K_N M): {}, {t:.2?}", parts.join(", ")))
}

fn samplers(seed: u64) -> TheoremSamplers {
    TheoremSamplers {
        vertical: VerticalSampler::default(),
        points: random_points(THEOREM_SAMPLES, seed),
        pairs: PairSampler { n_pairs: THEOREM_SAMPLES, seed, ..PairSampler::default() },
    }
}

fn hoelder_bounds() -> (Outcome, Vec<(HarmonicField, EpigraphDomain, f64)>) {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    let mut c_hats = Vec::new();
    let mut runs = 0;
    for (i, (name, field, domain, _)) in fields().into_iter().enumerate() {
        for alpha in THEOREM_ALPHAS {
            let r = theorem_check(&field, &domain, alpha, &samplers(200 + i as u64), TOL, INFLATION).unwrap();
            runs += 1;
            for c in &r.inflated.checks {
                worst = worst.max(c.measured / c.predicted);
            }
            if !r.passed {
                failures.push(format!("{name} alpha={alpha}"));
            }
            if alpha == 0.5 {
                c_hats.push((field.clone(), domain.clone(), r.c_vertical_hat));
            }
        }
    }
    let t = start.elapsed();
    let o = outcome(
        failures.is_empty() && t < THEOREM_BUDGET,
        format!("{runs} runs, failures {failures:?}, max measured/predicted {worst:.3e}, {t:.2?}"),
    );
    (o, c_hats)
}

fn shift_uniformity_check(c_hats: &[(HarmonicField, EpigraphDomain, f64)]) -> Outcome {
    let mut n = 0;
    let mut failed = 0;
    let mut worst = 0.0_f64;
    for (i, (field, domain, c_hat)) in c_hats.iter().enumerate() {
        let points = sample_points(domain, &random_points(THEOREM_SAMPLES, 300 + i as u64)).unwrap();
        for s in shift_uniformity(field, domain, 0.5, &SHIFTS, &points, *c_hat, INFLATION, TOL).unwrap() {
            n += 1;
            failed += usize::from(!s.passed);
            if s.bound > 0.0 {
                worst = worst.max(s.measured / s.bound);
            }
        }
    }
    outcome(failed == 0 && n == 4 * SHIFTS.len(), format!("{n} checks, {failed} failed, max measured/bound {worst:.3e}"))
}

fn walk_on_spheres() -> Outcome {
    let start = Instant::now();
    let params = WosParams { epsilon: WOS_EPSILON, n_walks: WOS_WALKS, seed: 11, ..WosParams::default() };
    let plane = EpigraphDomain::half_space(2).unwrap();
    let hm = wos_evaluate(&plane, &BoundaryData::Indicator { threshold: 0.0 }, &[0.0, 1.0], &params).unwrap();
    // angle pi/2 above the origin: 1 - theta/pi = 1/2
    let hm_err = (hm.mean - 0.5).abs();
    let mut ok = hm_err < (WOS_SIGMAS * hm.std_error).max(WOS_FLOOR);

    let cone = EpigraphDomain::new(LipschitzGraph::abs_cone(1.0, vec![0.0], 1.0).unwrap());
    let field = HarmonicField::pole(&cone, Point::new(vec![0.0, -1.0]).unwrap()).unwrap();
    let data = BoundaryData::trace(field.clone(), cone.graph.clone()).unwrap();
    let mut worst = 0.0_f64;
    let mut misses = 0;
    for i in 0..10 {
        let a = -2.25 + 0.5 * i as f64;
        let x = [a, a.abs() + 0.2 + 0.3 * i as f64];
        let est = wos_evaluate(&cone, &data, &x, &WosParams { seed: 20 + i, ..params.clone() }).unwrap();
        // Re 1/(z - p) for p = -i
        let exact = a / (a * a + (x[1] + 1.0).powi(2));
        debug_assert!((exact - field.value(&x).unwrap()).abs() < 1e-14);
        let err = (est.mean - exact).abs();
        worst = worst.max(err);
        if err >= (WOS_SIGMAS * est.std_error).max(WOS_FLOOR) {
            misses += 1;
        }
    }
    ok &= misses == 0;
    let t = start.elapsed();
    ok &= t < WOS_BUDGET;
    outcome(
        ok,
        format!("harmonic measure (0,1): {:.4} +- {:.4}; cone pole: 10 points, {misses} outside, max error {worst:.4}, {t:.2?}", hm.mean, hm.std_error),
    )
}

fn extension_ratio() -> Outcome {
    let opts = WeightedLengthOptions::default();
    let plane = EpigraphDomain::half_space(2).unwrap();
    let r = gehring_martio_check(&plane, 0.5, &GehringMartioSampler { n_pairs: 300, seed: 1, ..Default::default() }, &opts)
        .unwrap();
    let first = r.rows[0].max_ratio;
    let spread = r.rows.iter().map(|row| (row.max_ratio / first - 1.0).abs()).fold(0.0, f64::max);
    let mut ok = r.rows.len() == 6 && spread <= SCALE_INVARIANCE_TOL;

    let cone = EpigraphDomain::new(LipschitzGraph::abs_cone(1.0, vec![0.0], 1.0).unwrap());
    let seeds: Vec<f64> = [1, 2]
        .iter()
        .map(|&seed| {
            gehring_martio_check(&cone, 0.5, &GehringMartioSampler { seed, ..Default::default() }, &opts)
                .unwrap()
                .max_ratio
        })
        .collect();
    let drift = (seeds[0] / seeds[1] - 1.0).abs();
    ok &= seeds.iter().all(|v| v.is_finite()) && drift <= SEED_STABILITY;

    let x = Point::new(vec![0.0, 1.0]).unwrap();
    let y = Point::new(vec![0.0, 2.0]).unwrap();
    let curve = cigar_curve(&plane, &x, &y).unwrap();
    let ratio = weighted_length(&curve.polyline, &plane, 0.5, &opts).unwrap().value;
    // int t^(-1/2) dt over [1, 3] and over [2, 3]
    let exact = 2.0 * (3f64.sqrt() - 1.0) + 2.0 * (3f64.sqrt() - 2f64.sqrt());
    ok &= (ratio - exact).abs() <= 1e-12 && (ratio - 2.0998).abs() <= PAIR_EXAMPLE_TOL;
    outcome(
        ok,
        format!(
            "half-plane decade spread {spread:.1e}; cone max ratio {:.4} / {:.4} (drift {:.1}%); pair example {ratio:.6}",
            seeds[0],
            seeds[1],
            100.0 * drift
        ),
    )
}

fn vertical_seminorm_check() -> Outcome {
    // maximise (1 - e^-h) / sqrt h: coarse scan, then golden section
    let q = |h: f64| (1.0 - (-h).exp()) / h.sqrt();
    let h0 = (1..10_000).map(|i| i as f64 * 1e-3).fold(1e-3, |b, h| if q(h) > q(b) { h } else { b });
    let (mut lo, mut hi) = (h0 - 1e-3, h0 + 1e-3);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (m1, m2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        if q(m1) > q(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let h_star = 0.5 * (lo + hi);
    let oracle = q(h_star);
    let plane = EpigraphDomain::half_space(2).unwrap();
    let field = HarmonicField::separable_exp(2).unwrap();
    let est = vertical_seminorm(&field, &plane, 0.5, &VerticalSampler::default()).unwrap();
    let err = (est.value - oracle).abs();
    outcome(
        err <= VERTICAL_TOL && est.value <= oracle + 1e-12 && (oracle - 0.6382).abs() < 1e-4,
        format!("estimate {:.6}, oracle {oracle:.6} at h* = {h_star:.5}, error {err:.1e}", est.value),
    )
}

fn discrepancy_report() -> Outcome {
    let mut parts = Vec::new();
    let mut flagged = true;
    for dim in [2, 3] {
        let b = derive_constants(dim, 0.5, 0.0, 1.0).unwrap();
        flagged &= b.c1_paper_undercuts && b.two_over_gamma_star > b.seven_k_n && b.c1_paper < b.c1;
        parts.push(format!("N={dim}: 2/gamma* = {:.4} vs 7 K_N = {:.4}", b.two_over_gamma_star, b.seven_k_n));
    }
    outcome(flagged, format!("{}, undercut flagged: {flagged} (report only)", parts.join("; ")))
}

#[test]
fn acceptance() {
    let (theorem, c_hats) = hoelder_bounds();
    let results = [
        ("1 constants", constants()),
        ("2 cone-distance", cone_distance()),
        ("3 gradient-distance", gradient_distance()),
        ("4 hoelder-bounds", theorem),
        ("5 shift-uniformity", shift_uniformity_check(&c_hats)),
        ("6 walk-on-spheres", walk_on_spheres()),
        ("7 extension-ratio", extension_ratio()),
        ("8 vertical-seminorm", vertical_seminorm_check()),
        ("9 discrepancy-report", discrepancy_report()),
    ];
    for (name, o) in &results {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    // the discrepancy report is informational and does not gate the run
    let failed: Vec<_> = results[..8].iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
