use proptest::prelude::*;

use epiholder::constants::{derive_constants, gamma_star, gamma_star_residual};
use epiholder::extension::cigar_curve;
use epiholder::hoelder::{pair_quotients, seminorm_over_pairs, Pair, SeminormMode};
use epiholder::{EpigraphDomain, HarmonicField, LipschitzGraph, Point};

/// Knots with increasing abscissae and slopes in `[-max_slope, max_slope]`.
fn knots(max_slope: f64) -> impl Strategy<Value = Vec<[f64; 2]>> {
    (-2.0..2.0f64, prop::collection::vec((0.2..3.0f64, -max_slope..max_slope), 1..7)).prop_map(|(y0, steps)| {
        let mut k = vec![[-5.0, y0]];
        for (dt, slope) in steps {
            let [t, y] = *k.last().unwrap();
            k.push([t + dt, y + dt * slope]);
        }
        k
    })
}

fn domain_of(k: &[[f64; 2]]) -> EpigraphDomain {
    let lip = k.windows(2).map(|w| ((w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).abs()).fold(0.0, f64::max);
    EpigraphDomain::new(LipschitzGraph::piecewise_linear(k.to_vec(), lip).unwrap())
}

fn interior(domain: &EpigraphDomain, a: f64, gap: f64) -> [f64; 2] {
    [a, domain.graph.psi(&[a]).unwrap() + gap]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lower_bound_never_exceeds_distance(k in knots(5.0), a in -8.0..8.0f64, gap in 1e-4..10.0f64) {
        let d = domain_of(&k);
        let x = interior(&d, a, gap);
        let exact = d.distance(&x).unwrap().value;
        prop_assert!(d.distance_lower_bound(&x).unwrap() <= exact * (1.0 + 1e-12));
        prop_assert!(exact <= gap * (1.0 + 1e-12));
    }

    #[test]
    fn shifted_bound_holds(k in knots(5.0), a in -8.0..8.0f64, gap in 1e-4..10.0f64, lambda in 0.0..10.0f64) {
        let d = domain_of(&k);
        let x = interior(&d, a, gap);
        let lifted = [x[0], x[1] + lambda];
        let exact = d.distance(&lifted).unwrap().value;
        prop_assert!(d.shifted_distance_bound(&x, lambda).unwrap() <= exact * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn seminorm_scales_with_the_field(
        c in -50.0..50.0f64,
        pts in prop::collection::vec((-3.0..3.0f64, 0.01..5.0f64, -3.0..3.0f64, 0.01..5.0f64), 1..40),
        alpha in 0.05..0.95f64,
    ) {
        let field = HarmonicField::separable_exp(2).unwrap();
        let scaled = field.clone().scaled(c);
        let pairs: Vec<Pair> = pts.iter().map(|&(a, b, p, q)| Pair { x: vec![a, b], y: vec![p, q] }).collect();
        let base = seminorm_over_pairs(&field, alpha, SeminormMode::Global, &pairs).unwrap().value;
        let s = seminorm_over_pairs(&scaled, alpha, SeminormMode::Global, &pairs).unwrap().value;
        prop_assert!((s - c.abs() * base).abs() <= 1e-12 * (1.0 + s.abs()));
    }

    #[test]
    fn seminorm_grows_with_the_pair_set(
        pts in prop::collection::vec((-3.0..3.0f64, 0.01..5.0f64, -3.0..3.0f64, 0.01..5.0f64), 2..40),
        cut in 1usize..40,
    ) {
        let field = HarmonicField::harmonic_measure_2d();
        let pairs: Vec<Pair> = pts.iter().map(|&(a, b, p, q)| Pair { x: vec![a, b], y: vec![p, q] }).collect();
        let cut = cut.min(pairs.len());
        let part = seminorm_over_pairs(&field, 0.5, SeminormMode::Global, &pairs[..cut]).unwrap();
        let all = seminorm_over_pairs(&field, 0.5, SeminormMode::Global, &pairs).unwrap();
        prop_assert!(part.value <= all.value);
        let q = pair_quotients(&field, 0.5, &pairs).unwrap();
        prop_assert_eq!(all.value, q.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn cigar_curve_invariants(
        lip in 0.0..4.0f64,
        a in -3.0..3.0f64, ga in 1e-3..3.0f64,
        b in -3.0..3.0f64, gb in 1e-3..3.0f64,
    ) {
        let d = EpigraphDomain::new(LipschitzGraph::abs_cone(lip, vec![0.0], lip).unwrap());
        let x = Point::new(interior(&d, a, ga).to_vec()).unwrap();
        let y = Point::new(interior(&d, b, gb).to_vec()).unwrap();
        let c = cigar_curve(&d, &x, &y).unwrap();
        let v = c.polyline.vertices();
        prop_assert_eq!(&v[0], &x);
        prop_assert_eq!(v.last().unwrap(), &y);
        if v.len() == 4 {
            let sep = epiholder::geometry::dist(x.coords(), y.coords());
            prop_assert_eq!(v[1].height(), v[2].height());
            prop_assert!((c.lambda.min(c.lambda_prime) - (1.0 + lip) * sep).abs() <= 1e-12 * (1.0 + c.height.abs()));
            prop_assert!(c.lambda >= 0.0 && c.lambda_prime >= 0.0);
            // the lifted segment sits at least the cone bound above the graph
            let cos = 1.0 / lip.hypot(1.0);
            prop_assert!(c.middle_clearance >= (sep * cos) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn gamma_star_solves_its_equation(k in 1e-3..1e3f64) {
        let g = gamma_star(k).unwrap();
        prop_assert!(g > 0.0 && g < 1.0);
        prop_assert!(gamma_star_residual(g, k).abs() <= 1e-12);
    }

    #[test]
    fn constants_are_linear_in_c(dim in 2u32..6, alpha in 0.01..0.99f64, lip in 0.0..10.0f64, c in 0.0..1e3f64) {
        let a = derive_constants(dim, alpha, lip, c).unwrap();
        let b = derive_constants(dim, alpha, lip, 2.0 * c).unwrap();
        prop_assert_eq!(b.c1, 2.0 * a.c1);
        prop_assert_eq!(b.c2, 2.0 * a.c2);
        prop_assert_eq!(b.c3, 2.0 * a.c3);
        prop_assert!(a.c1 <= a.c2 * (1.0 + 1e-15) || c == 0.0);
    }
}
