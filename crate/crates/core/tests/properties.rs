use beurling::geometry::{
    beurling_density, candidate_centers, relative_separation, shell_count_bound, Point, PointSet, Provenance,
    QuadratureRule, Space, Window,
};
use beurling::harness::{generate_pointset, PointSetSpec};
use beurling::kernels::{normalize, Kernel, ReproducingKernel};
use beurling::linalg::eigvalsh;
use beurling::spectral::{
    frame_bounds_finite_section, gram, localization_operator, riesz_bounds, riesz_curve, DEFAULT_TAU,
};
use beurling::verdict::{classify_empirically, EmpiricalClass, Thresholds};
use proptest::prelude::*;

fn set(space: &Space, pts: Vec<Vec<f64>>, center: Vec<f64>, radius: f64) -> PointSet {
    let window = Window {
        center: Point(center),
        radius,
    };
    PointSet::new(space, pts.into_iter().map(Point).collect(), window, Provenance::new("random", None)).unwrap()
}

fn dedup(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// A built-in kernel, its space and up to `n` random points inside a window.
fn kernel_case(which: usize, raw: &[(f64, f64)]) -> (Kernel, Space, PointSet) {
    let n = raw.len();
    match which {
        0 => {
            let s = Space::EuclideanLebesgue { dim: 1 };
            let pts = dedup(raw.iter().map(|(a, _)| vec![20.0 * a]).collect());
            (Kernel::PaleyWienerBox { widths: vec![1.0] }, s.clone(), set(&s, pts, vec![0.0], 21.0))
        }
        1 => {
            let s = Space::EuclideanLebesgue { dim: 2 };
            let pts = dedup(raw.iter().map(|(a, b)| vec![6.0 * a, 6.0 * b]).collect());
            (Kernel::PaleyWienerBox { widths: vec![1.0, 0.7] }, s.clone(), set(&s, pts, vec![0.0, 0.0], 9.0))
        }
        2 => {
            let s = Space::FockGaussian { n: 1 };
            let pts = dedup(raw.iter().map(|(a, b)| vec![4.0 * a, 4.0 * b]).collect());
            (Kernel::FockGaussianNormalized { n: 1 }, s.clone(), set(&s, pts, vec![0.0, 0.0], 6.0))
        }
        3 => {
            let s = Space::PhasePlane;
            let pts = dedup(raw.iter().map(|(a, b)| vec![4.0 * a, 4.0 * b]).collect());
            (Kernel::GaborGaussian, s.clone(), set(&s, pts, vec![0.0, 0.0], 6.0))
        }
        4 => {
            let s = Space::EuclideanLebesgue { dim: 1 };
            let pts = dedup(raw.iter().map(|(a, _)| vec![10.0 * a]).collect());
            (Kernel::SyntheticPolyDecay { sigma: 2.0, dim: 1 }, s.clone(), set(&s, pts, vec![0.0], 11.0))
        }
        _ => {
            let s = Space::HyperbolicUpperHalfPlane;
            let pts = dedup(raw.iter().map(|(a, b)| vec![2.0 * a, (1.5 * b).exp()]).collect());
            assert!(n > 0);
            (Kernel::HyperbolicBergman, s.clone(), set(&s, pts, vec![0.0, 1.0], 8.0))
        }
    }
}

fn raw_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..40)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn gram_is_positive_semidefinite(which in 0usize..6, raw in raw_points()) {
        let (k, _, lambda) = kernel_case(which, &raw);
        let ev = eigvalsh(&gram(&k, &lambda).unwrap());
        let top = *ev.last().unwrap();
        prop_assert!(ev[0] >= -1e-9 * top, "kernel {which}: {} vs {top}", ev[0]);
    }

    #[test]
    fn riesz_bounds_interlace_on_nested_windows(which in 0usize..5, raw in raw_points()) {
        let (k, space, lambda) = kernel_case(which, &raw);
        let c = lambda.window().center.clone();
        let w = lambda.window().radius;
        let curve = riesz_curve(&k, &lambda, &space, &c, &[0.4 * w, 0.7 * w, w]);
        let Ok(curve) = curve else { return Ok(()) };
        for pair in curve.windows(2) {
            prop_assert!(pair[1].lambda_min <= pair[0].lambda_min + 1e-12);
            prop_assert!(pair[1].lambda_max >= pair[0].lambda_max - 1e-12);
        }
    }

    #[test]
    fn localization_trace_matches_quadrature(which in 0usize..5, r in 0.5f64..2.5, x in -1.0f64..1.0) {
        let (k, space, _) = kernel_case(which, &[(0.0, 0.0), (0.5, 0.5)]);
        let center = Point(vec![x; space.coord_dim()]);
        let quad = QuadratureRule::new(0.1).unwrap();
        let op = localization_operator(&k, &space, &center, r, &quad).unwrap();
        let integral = op.grid.integrate_within(r, |p| k.diagonal_unchecked(&p.0) * k.measure_density(&p.0));
        let n = op.matrix.order() as f64;
        prop_assert!((op.matrix.trace() - integral).abs() <= 1e-10 * n * op.matrix.max_abs().max(1.0));
    }

    #[test]
    fn density_ratios_are_translation_invariant(dx in -30.0f64..30.0, dy in -30.0f64..30.0, alpha in 0.6f64..1.4) {
        let space = Space::EuclideanLebesgue { dim: 2 };
        // an irrational step keeps lattice points off the sphere boundaries,
        // where the rounding of a shift could flip a count
        let spec = PointSetSpec::Lattice { steps: vec![alpha, std::f64::consts::SQRT_2], window: 30.0, center: None };
        let lambda = generate_pointset(&spec, &space, 0).unwrap();
        let centers = candidate_centers(&lambda, &space, 3.0, 20.0).unwrap();
        let a = beurling_density(&lambda, &space, &centers, &[10.0, 20.0]).unwrap();
        let by = [dx, dy];
        let moved = lambda.translated(&space, &by).unwrap();
        let moved_centers: Vec<Point> = centers.iter().map(|c| c.translate(&by)).collect();
        let b = beurling_density(&moved, &space, &moved_centers, &[10.0, 20.0]).unwrap();
        for (p, q) in a.rows.iter().zip(&b.rows) {
            prop_assert!((p.inf_ratio - q.inf_ratio).abs() <= 1e-12);
            prop_assert!((p.sup_ratio - q.sup_ratio).abs() <= 1e-12);
        }
    }

    #[test]
    fn shell_count_bound_holds(
        jitter in 0.0f64..0.3,
        seed in 0u64..1000,
        x in -10.0f64..10.0,
        big_r in 1.5f64..20.0,
        r in 0.1f64..10.0,
    ) {
        let space = Space::EuclideanLebesgue { dim: 1 };
        let spec = PointSetSpec::JitteredLattice { steps: vec![0.8], jitter, seed: Some(seed), window: 60.0, center: None };
        let lambda = generate_pointset(&spec, &space, 0).unwrap();
        let centers = candidate_centers(&lambda, &space, 0.05, 1.0).unwrap();
        let sep = relative_separation(&lambda, &space, 1.0, &centers).unwrap();
        let b = shell_count_bound(&lambda, &space, &Point::new([x]), big_r, r, &sep).unwrap();
        prop_assert!(b.censored || b.holds, "{b:?}");
    }

    #[test]
    fn normalization_preserves_singularity(which in 0usize..5, raw in raw_points()) {
        let (k, _, lambda) = kernel_case(which, &raw);
        let nk = normalize(&k).unwrap();
        let a = riesz_bounds(&k, &lambda).unwrap();
        let b = riesz_bounds(&nk, &lambda).unwrap();
        let zero = |lo: f64, hi: f64| lo <= 1e-9 * hi;
        prop_assert_eq!(zero(a.lambda_min, a.lambda_max), zero(b.lambda_min, b.lambda_max));
        // constant diagonals: one scale factor for the whole spectrum
        let c = k.diagonal_unchecked(&lambda.points()[0].0);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - c * y).abs() <= 1e-10 * a.lambda_max);
        }
    }
}

fn line_lattice(step: f64, extra: &[f64]) -> PointSet {
    let space = Space::EuclideanLebesgue { dim: 1 };
    let m = (160.0 / step) as i64;
    let mut pts: Vec<Vec<f64>> = (-m..=m).map(|k| vec![k as f64 * step]).collect();
    pts.extend(extra.iter().map(|x| vec![*x]));
    set(&space, dedup(pts), vec![0.0], 160.0)
}

fn class_of(lambda: &PointSet) -> EmpiricalClass {
    let space = Space::EuclideanLebesgue { dim: 1 };
    let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
    let c = Point::new([0.0]);
    let quad = QuadratureRule::new(0.1).unwrap();
    let riesz: Vec<f64> = riesz_curve(&k, lambda, &space, &c, &[16.0, 32.0, 64.0])
        .unwrap()
        .iter()
        .map(|w| w.lambda_min)
        .collect();
    let frame: Vec<f64> = [8.0, 16.0, 32.0]
        .iter()
        .map(|&r| frame_bounds_finite_section(&k, lambda, &space, &c, r, DEFAULT_TAU, r / 2.0, &quad).unwrap().a_est())
        .collect();
    classify_empirically(Some(&riesz), Some(&frame), &Thresholds::default()).class
}

#[test]
fn enlarging_a_sampling_set_keeps_it_sampling() {
    let base = line_lattice(0.8, &[]);
    assert_eq!(class_of(&base), EmpiricalClass::SamplingLike);
    let extra: Vec<f64> = (-50..50).map(|k| 0.37 + 1.3 * k as f64).collect();
    let bigger = line_lattice(0.8, &extra);
    assert_ne!(class_of(&bigger), EmpiricalClass::Neither);
    assert!(matches!(class_of(&bigger), EmpiricalClass::SamplingLike | EmpiricalClass::Both));
}

#[test]
fn thinning_an_interpolating_set_keeps_it_interpolating() {
    let base = line_lattice(1.25, &[]);
    assert_eq!(class_of(&base), EmpiricalClass::InterpolationLike);
    let space = Space::EuclideanLebesgue { dim: 1 };
    let thinned: Vec<Point> = base.points().iter().filter(|p| (p.0[0] / 1.25).round() as i64 % 3 != 0).cloned().collect();
    let thinned = PointSet::new(&space, thinned, base.window().clone(), Provenance::new("thin", None)).unwrap();
    assert_eq!(class_of(&thinned), EmpiricalClass::InterpolationLike);
}
