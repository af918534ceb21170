//! Gram matrices, localization operators and the spectra derived from them.

mod dual;
mod section;

pub use dual::{dual_identities_check, dual_system, DualFrameModel, DualIdentityReport, DualMode};
pub use section::{frame_bounds_finite_section, FiniteSection, DEFAULT_TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BallGrid, Point, PointSet, QuadratureRule, Space};
use crate::kernels::ReproducingKernel;
use crate::linalg::{eigvalsh, HermitianMatrix};

/// Condition numbers above this set [`SpectralReport::condition_flag`].
pub const CONDITION_LIMIT: f64 = 1e2;

/// Spectrum summary of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub order: usize,
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub trace: f64,
    /// Eigenvalues `≥ ½`.
    pub plunge_count: usize,
    /// `λ_max / λ_min` exceeds [`CONDITION_LIMIT`] (or `λ_min ≤ 0`).
    pub condition_flag: bool,
    pub ridge: f64,
}

impl SpectralReport {
    pub fn from_matrix(m: &HermitianMatrix) -> Result<Self> {
        if m.order() == 0 {
            return Err(Error::DegenerateWindow("empty matrix has no spectrum".into()));
        }
        Ok(Self::from_eigenvalues(eigvalsh(m), m.trace()))
    }

    pub fn from_eigenvalues(eigenvalues: Vec<f64>, trace: f64) -> Self {
        let lambda_min = eigenvalues[0];
        let lambda_max = *eigenvalues.last().expect("nonempty spectrum");
        SpectralReport {
            order: eigenvalues.len(),
            plunge_count: eigenvalues.iter().filter(|&&v| v >= 0.5).count(),
            condition_flag: !(lambda_min > 0.0) || lambda_max / lambda_min > CONDITION_LIMIT,
            lambda_min,
            lambda_max,
            trace,
            eigenvalues,
            ridge: 0.0,
        }
    }
}

/// `G_{μλ} = ⟨k_λ, k_μ⟩ = k(μ, λ)`, rows and columns in point order.
pub fn gram<K: ReproducingKernel + ?Sized>(kernel: &K, lambda: &PointSet) -> Result<HermitianMatrix> {
    let pts = lambda.points();
    for p in pts {
        kernel.check_point(p)?;
    }
    HermitianMatrix::from_upper_fn(pts.len(), |i, j| kernel.eval_unchecked(&pts[i].0, &pts[j].0))
}

/// Exact Riesz bounds of the finite family `{k_λ}`.
pub fn riesz_bounds<K: ReproducingKernel + ?Sized>(kernel: &K, lambda: &PointSet) -> Result<SpectralReport> {
    SpectralReport::from_matrix(&gram(kernel, lambda)?)
}

/// One point of a windowed Riesz-bound curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowBound {
    pub half_width: f64,
    pub points: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Riesz bounds of `Λ ∩ B̄_w(center)` for each half-width `w`.
pub fn riesz_curve<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    lambda: &PointSet,
    space: &Space,
    center: &Point,
    half_widths: &[f64],
) -> Result<Vec<WindowBound>> {
    half_widths
        .iter()
        .map(|&w| {
            let sub = lambda.restrict(space, center, w)?;
            let rep = riesz_bounds(kernel, &sub)?;
            Ok(WindowBound {
                half_width: w,
                points: sub.len(),
                lambda_min: rep.lambda_min,
                lambda_max: rep.lambda_max,
            })
        })
        .collect()
}

/// The discretized localization operator on `B_r(center)`.
#[derive(Clone, Debug)]
pub struct LocalizationOperator {
    /// `√w_i k(x_i, x_j) √w_j` (weights include the kernel's measure density).
    pub matrix: HermitianMatrix,
    pub grid: BallGrid,
    /// `√` of the weights used.
    pub sqrt_weights: Vec<f64>,
    /// Step exceeds a fifth of the kernel's decay scale.
    pub accuracy_warning: bool,
}

pub fn localization_operator<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    space: &Space,
    center: &Point,
    r: f64,
    quad: &QuadratureRule,
) -> Result<LocalizationOperator> {
    kernel.check_point(center)?;
    let grid = quad.ball_grid(space, center, r)?;
    if grid.is_empty() {
        return Err(Error::DegenerateWindow(format!("no quadrature nodes in B_{r}({center})")));
    }
    let sqrt_weights: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(p, w)| (w * kernel.measure_density(&p.0)).sqrt())
        .collect();
    let nodes = &grid.nodes;
    let matrix = HermitianMatrix::from_upper_fn(grid.len(), |i, j| {
        kernel.eval_unchecked(&nodes[i].0, &nodes[j].0) * (sqrt_weights[i] * sqrt_weights[j])
    })?;
    let step = match space {
        Space::HyperbolicUpperHalfPlane => quad.h * center.0[1],
        _ => quad.h,
    };
    Ok(LocalizationOperator {
        accuracy_warning: step > kernel.decay_scale() / 5.0,
        matrix,
        grid,
        sqrt_weights,
    })
}

/// Spectrum of the localization operator on `B_r(center)`.
pub fn localization_spectrum<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    space: &Space,
    center: &Point,
    r: f64,
    quad: &QuadratureRule,
) -> Result<SpectralReport> {
    SpectralReport::from_matrix(&localization_operator(kernel, space, center, r, quad)?.matrix)
}

/// How a ball average of the diagonal is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// The constant diagonal when the kernel declares one, else quadrature.
    Auto,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub r: f64,
    pub inf: f64,
    pub sup: f64,
    pub censored: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub rows: Vec<TraceRow>,
    pub tr_minus_est: f64,
    pub tr_plus_est: f64,
    /// Values came from a declared constant diagonal.
    pub exact: bool,
}

impl TraceReport {
    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.r).collect()
    }
}

/// `(1/μ(B_r)) ∫_{B_r(x)} k(y, y) dμ(y)`, inf and sup over the centers.
/// Centers whose grid exceeds the node cap are censored; a radius with every
/// center censored is an error.
pub fn averaged_trace<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    space: &Space,
    centers: &[Point],
    radii: &[f64],
    quad: &QuadratureRule,
    mode: TraceMode,
) -> Result<TraceReport> {
    if centers.is_empty() || radii.is_empty() {
        return Err(Error::input("averaged trace needs centers and radii"));
    }
    for x in centers {
        space.check_point(x)?;
        kernel.check_point(x)?;
    }
    let constant = match mode {
        TraceMode::Auto => kernel.metadata().known_diagonal,
        TraceMode::Quadrature => None,
    };
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::input(format!("radius must be positive, got {r}")));
        }
        if let Some(c) = constant {
            rows.push(TraceRow {
                r,
                inf: c,
                sup: c,
                censored: 0,
            });
            continue;
        }
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        let mut censored = 0;
        for x in centers {
            let grid = match quad.ball_grid(space, x, r) {
                Ok(g) => g,
                Err(Error::Input(_)) => {
                    censored += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let integral: f64 = grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .map(|(p, w)| w * kernel.diagonal_unchecked(&p.0))
                .sum();
            let avg = integral / space.ball_measure(x, r)?;
            inf = inf.min(avg);
            sup = sup.max(avg);
        }
        if censored == centers.len() {
            return Err(Error::Censored(format!("every trace window of radius {r} exceeds the quadrature budget")));
        }
        rows.push(TraceRow { r, inf, sup, censored });
    }
    let last = rows.last().expect("nonempty radii");
    Ok(TraceReport {
        tr_minus_est: last.inf,
        tr_plus_est: last.sup,
        exact: constant.is_some(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Provenance, Window};
    use crate::kernels::{normalize, Kernel};
    use std::f64::consts::PI;

    fn line() -> Space {
        Space::EuclideanLebesgue { dim: 1 }
    }

    fn lattice_1d(step: f64, half: f64) -> PointSet {
        let m = (half / step + 1e-9).floor() as i64;
        let pts = (-m..=m).map(|k| Point::new([k as f64 * step])).collect();
        let window = Window {
            center: Point::new([0.0]),
            radius: half,
        };
        PointSet::new(&line(), pts, window, Provenance::new("lattice", None)).unwrap()
    }

    #[test]
    fn sinc_gram_is_identity() {
        let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
        let g = gram(&k, &lattice_1d(1.0, 5.0)).unwrap();
        assert_eq!(g.order(), 11);
        for i in 0..11 {
            for j in 0..11 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j).re - want).abs() < 1e-15);
            }
        }
        let rep = riesz_bounds(&k, &lattice_1d(1.0, 32.0)).unwrap();
        assert_eq!(rep.order, 65);
        assert!(rep.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(!rep.condition_flag);
    }

    #[test]
    fn fock_and_gabor_gram_entries() {
        let space = Space::FockGaussian { n: 1 };
        let window = Window {
            center: Point::new([0.0, 0.0]),
            radius: 3.0,
        };
        let pts = vec![Point::new([0.0, 0.0]), Point::new([1.2, -0.7])];
        let set = PointSet::new(&space, pts, window.clone(), Provenance::new("t", None)).unwrap();
        let g = gram(&Kernel::FockGaussianNormalized { n: 1 }, &set).unwrap();
        let d2 = 1.2f64 * 1.2 + 0.49;
        assert!((g.get(0, 1).norm() - 2.0 / PI * (-d2 / 2.0).exp()).abs() < 1e-15);
        let pts = vec![Point::new([0.3, 0.1]), Point::new([0.9, 0.9])];
        let set = PointSet::new(&Space::PhasePlane, pts, window, Provenance::new("t", None)).unwrap();
        let g = gram(&Kernel::GaborGaussian, &set).unwrap();
        assert!((g.get(1, 0).norm() - (-PI / 2.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn riesz_bounds_across_windows() {
        let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
        let sparse = lattice_1d(1.25, 64.0);
        let c = riesz_curve(&k, &sparse, &line(), &Point::new([0.0]), &[16.0, 32.0, 64.0]).unwrap();
        let mins: Vec<f64> = c.iter().map(|w| w.lambda_min).collect();
        assert!(mins.iter().all(|&v| v > 1e-2));
        assert!(mins[0] / mins[2] <= 2.0);
        // nested windows: interlacing
        assert!(mins.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let dense = lattice_1d(0.8, 40.0);
        let c = riesz_curve(&k, &dense, &line(), &Point::new([0.0]), &[10.0, 20.0, 40.0]).unwrap();
        assert!(c[2].lambda_min < 1e-2 && c[2].lambda_min < c[0].lambda_min);
    }

    #[test]
    fn paley_wiener_localization() {
        let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
        let quad = QuadratureRule::new(0.05).unwrap();
        for r in [4.0, 8.0] {
            let op = localization_operator(&k, &line(), &Point::new([0.0]), r, &quad).unwrap();
            assert!(!op.accuracy_warning);
            let rep = SpectralReport::from_matrix(&op.matrix).unwrap();
            assert!(rep.lambda_min >= -1e-8 && rep.lambda_max <= 1.0 + 1e-8);
            assert!((rep.trace - 2.0 * r).abs() < 1e-10);
            let sum: f64 = rep.eigenvalues.iter().sum();
            assert!((sum - rep.trace).abs() < 1e-8 * rep.order as f64);
            assert!((rep.plunge_count as f64 - 2.0 * r).abs() <= 2.0);
        }
        let coarse = localization_operator(&k, &line(), &Point::new([0.0]), 2.0, &QuadratureRule::new(0.5).unwrap()).unwrap();
        assert!(coarse.accuracy_warning);
    }

    #[test]
    fn fock_localization_trace() {
        let k = Kernel::FockGaussianNormalized { n: 1 };
        let space = Space::FockGaussian { n: 1 };
        let quad = QuadratureRule::new(0.25).unwrap();
        let r = 6.0;
        let rep = localization_spectrum(&k, &space, &Point::new([0.0, 0.0]), r, &quad).unwrap();
        let exact = 2.0 / PI * space.ball_measure(&Point::new([0.0, 0.0]), r).unwrap();
        assert!((rep.trace - exact).abs() <= 2.0 / PI * quad.tolerance(&space, r));
        assert!(rep.lambda_max <= 1.0 + 1e-2);
    }

    #[test]
    fn traces() {
        let quad = QuadratureRule::new(0.05).unwrap();
        let pw = averaged_trace(
            &Kernel::PaleyWienerBox { widths: vec![1.0] },
            &line(),
            &[Point::new([0.0]), Point::new([3.0])],
            &[1.0, 10.0],
            &quad,
            TraceMode::Auto,
        )
        .unwrap();
        assert!(pw.exact && pw.tr_minus_est == 1.0 && pw.tr_plus_est == 1.0);
        let fock_space = Space::FockGaussian { n: 1 };
        let centers = [Point::new([0.0, 0.0]), Point::new([0.3, 0.7])];
        let fock = averaged_trace(
            &Kernel::FockGaussianNormalized { n: 1 },
            &fock_space,
            &centers,
            &[4.0, 8.0],
            &quad,
            TraceMode::Quadrature,
        )
        .unwrap();
        assert!(!fock.exact);
        assert!((fock.tr_minus_est - 2.0 / PI).abs() < 1e-3 && (fock.tr_plus_est - 2.0 / PI).abs() < 1e-3);
        assert!(fock.rows.iter().all(|r| r.inf <= r.sup));
        let gabor = averaged_trace(&Kernel::GaborGaussian, &Space::PhasePlane, &centers, &[4.0], &quad, TraceMode::Auto).unwrap();
        assert_eq!((gabor.tr_minus_est, gabor.tr_plus_est), (1.0, 1.0));
    }

    #[test]
    fn gram_psd_on_random_sets() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cases: Vec<(Kernel, Space)> = vec![
            (Kernel::PaleyWienerBox { widths: vec![1.0] }, line()),
            (Kernel::FockGaussianNormalized { n: 1 }, Space::FockGaussian { n: 1 }),
            (Kernel::GaborGaussian, Space::PhasePlane),
            (Kernel::SyntheticPolyDecay { sigma: 2.0, dim: 1 }, line()),
            (Kernel::HyperbolicBergman, Space::HyperbolicUpperHalfPlane),
        ];
        for (k, space) in cases {
            for _ in 0..10 {
                let dim = space.coord_dim();
                let mut pts: Vec<Point> = Vec::new();
                for _ in 0..30 {
                    let mut c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect();
                    if matches!(space, Space::HyperbolicUpperHalfPlane) {
                        c[1] = 0.5 + rng.random::<f64>();
                    }
                    pts.push(Point(c));
                }
                let window = Window {
                    center: space.base_point(),
                    radius: 1e3,
                };
                let set = PointSet::new(&space, pts, window, Provenance::new("random", None)).unwrap();
                let rep = riesz_bounds(&k, &set).unwrap();
                assert!(rep.lambda_min >= -1e-9 * rep.lambda_max, "{k:?}");
            }
        }
    }

    #[test]
    fn normalization_scales_constant_diagonal_spectra() {
        let k = Kernel::FockGaussianNormalized { n: 1 };
        let nk = normalize(&k).unwrap();
        let space = Space::FockGaussian { n: 1 };
        let window = Window {
            center: Point::new([0.0, 0.0]),
            radius: 5.0,
        };
        let pts = (0..12).map(|i| Point::new([0.4 * (i % 4) as f64, 0.5 * (i / 4) as f64])).collect();
        let set = PointSet::new(&space, pts, window, Provenance::new("t", None)).unwrap();
        let a = riesz_bounds(&k, &set).unwrap();
        let b = riesz_bounds(&nk, &set).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x * PI / 2.0 - y).abs() < 1e-12);
        }
    }
}
