use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point given by its real coordinates.
///
/// Complex points `z ∈ Cⁿ` are stored as `(Re z₁, Im z₁, …, Re zₙ, Im zₙ)`,
/// points of the upper half-plane as `(x, y)` with `y > 0`, and lattice
/// points of `Z^d` as integral floats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(coords.into())
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Coordinate-wise `self + other`.
    pub fn translate(&self, by: &[f64]) -> Point {
        Point(self.0.iter().zip(by).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The built-in metric measure spaces `(X, d, μ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Space {
    /// `R^d` with the Euclidean metric and Lebesgue measure.
    EuclideanLebesgue { dim: usize },
    /// `Cⁿ ≅ R^{2n}` with the Euclidean metric and `μ = 2^{-n}·Lebesgue`,
    /// the measure induced by the Gaussian weight `|z|²/2`.
    FockGaussian { n: usize },
    /// Time-frequency plane `R²` with Lebesgue measure.
    PhasePlane,
    /// `R` with `d(x, y) = log(1 + |x − y|)` and Lebesgue measure.
    LogMetricLine,
    /// Upper half-plane with the hyperbolic metric and
    /// `dμ = π^{-1} Im(z)^{-2} dA`.
    HyperbolicUpperHalfPlane,
    /// `Z^d` with the sup-norm word metric and counting measure.
    IntegerWordMetric { dim: usize },
}

/// Volume of the Euclidean unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

impl Space {
    pub fn name(&self) -> String {
        match self {
            Space::EuclideanLebesgue { dim } => format!("euclidean_lebesgue({dim})"),
            Space::FockGaussian { n } => format!("fock_gaussian({n})"),
            Space::PhasePlane => "phase_plane".into(),
            Space::LogMetricLine => "log_metric_line".into(),
            Space::HyperbolicUpperHalfPlane => "hyperbolic_upper_half_plane".into(),
            Space::IntegerWordMetric { dim } => format!("integer_word_metric({dim})"),
        }
    }

    /// Number of real coordinates of a point.
    pub fn coord_dim(&self) -> usize {
        match *self {
            Space::EuclideanLebesgue { dim } | Space::IntegerWordMetric { dim } => dim,
            Space::FockGaussian { n } => 2 * n,
            Space::PhasePlane | Space::HyperbolicUpperHalfPlane => 2,
            Space::LogMetricLine => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coord_dim() == 0 {
            return Err(Error::input(format!("{} has dimension zero", self.name())));
        }
        Ok(())
    }

    /// Spaces whose ball measure grows exponentially in the radius.
    pub fn has_exponential_growth(&self) -> bool {
        matches!(self, Space::LogMetricLine | Space::HyperbolicUpperHalfPlane)
    }

    /// Smallest largest-radius accepted by the annular-decay check.
    pub fn wad_horizon(&self) -> f64 {
        if self.has_exponential_growth() {
            20.0
        } else {
            100.0
        }
    }

    /// A natural reference point (origin, or `i` for the half-plane).
    pub fn base_point(&self) -> Point {
        match self {
            Space::HyperbolicUpperHalfPlane => Point::new(vec![0.0, 1.0]),
            _ => Point::origin(self.coord_dim()),
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.coord_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.coord_dim(),
                got: x.dim(),
            });
        }
        if x.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::input(format!("non-finite coordinate in {x}")));
        }
        match self {
            Space::HyperbolicUpperHalfPlane if x.0[1] <= 0.0 => {
                Err(Error::input(format!("{x} is not in the upper half-plane")))
            }
            Space::IntegerWordMetric { .. } if x.0.iter().any(|c| c.fract() != 0.0) => {
                Err(Error::input(format!("{x} is not an integer point")))
            }
            _ => Ok(()),
        }
    }

    /// Distance without validation; callers guarantee compatible points.
    pub(crate) fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Space::EuclideanLebesgue { .. } | Space::FockGaussian { .. } | Space::PhasePlane => {
                x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            }
            Space::LogMetricLine => (x[0] - y[0]).abs().ln_1p(),
            Space::HyperbolicUpperHalfPlane => {
                // sinh(d/2) = |z − w| / (2 √(Im z · Im w))
                let chord = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
                2.0 * (chord / (2.0 * (x[1] * y[1]).sqrt())).asinh()
            }
            Space::IntegerWordMetric { .. } => x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.dist(&x.0, &y.0))
    }

    /// Closed-form `μ(B_r(x))` for the open ball; every built-in space is
    /// homogeneous, so the value does not depend on the center.
    pub(crate) fn ball_measure_unchecked(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            Space::EuclideanLebesgue { dim } => unit_ball_volume(dim) * r.powi(dim as i32),
            Space::FockGaussian { n } => unit_ball_volume(2 * n) * r.powi(2 * n as i32) / 2f64.powi(n as i32),
            Space::PhasePlane => PI * r * r,
            Space::LogMetricLine => 2.0 * r.exp_m1(),
            Space::HyperbolicUpperHalfPlane => 4.0 * (r / 2.0).sinh().powi(2),
            Space::IntegerWordMetric { dim } => (2.0 * r.ceil() - 1.0).powi(dim as i32),
        }
    }

    pub fn ball_measure(&self, x: &Point, r: f64) -> Result<f64> {
        self.check_point(x)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!("ball radius must be positive and finite, got {r}")));
        }
        Ok(self.ball_measure_unchecked(r))
    }

    /// `μ(B_{outer}) − μ(B_{inner})`, with `μ(B_t) = 0` for `t ≤ 0`.
    pub fn shell_measure(&self, inner: f64, outer: f64) -> f64 {
        self.ball_measure_unchecked(outer) - self.ball_measure_unchecked(inner)
    }

    /// `d/dr μ(B_r)` for the continuous spaces; `None` for counting measure.
    pub fn ball_measure_derivative(&self, r: f64) -> Option<f64> {
        match *self {
            Space::EuclideanLebesgue { dim } => Some(dim as f64 * unit_ball_volume(dim) * r.powi(dim as i32 - 1)),
            Space::FockGaussian { n } => Some(
                2.0 * n as f64 * unit_ball_volume(2 * n) * r.powi(2 * n as i32 - 1) / 2f64.powi(n as i32),
            ),
            Space::PhasePlane => Some(2.0 * PI * r),
            Space::LogMetricLine => Some(2.0 * r.exp()),
            Space::HyperbolicUpperHalfPlane => Some(2.0 * r.sinh()),
            Space::IntegerWordMetric { .. } => None,
        }
    }

    /// Coordinate bounding box `[lo, hi]` of the closed ball `B̄_r(x)`.
    pub(crate) fn bounding_box(&self, x: &[f64], r: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Space::LogMetricLine => {
                let half = r.exp_m1();
                (vec![x[0] - half], vec![x[0] + half])
            }
            Space::HyperbolicUpperHalfPlane => {
                // The hyperbolic ball is the Euclidean disc with center
                // (x, y cosh r) and radius y sinh r.
                let (cx, cy) = (x[0], x[1]);
                let rad = cy * r.sinh();
                (vec![cx - rad, cy * (-r).exp()], vec![cx + rad, cy * r.exp()])
            }
            _ => (x.iter().map(|c| c - r).collect(), x.iter().map(|c| c + r).collect()),
        }
    }

    /// True when `B_r(x)` lies inside the closed window `B̄_R(c)`, using the
    /// triangle-inequality criterion `d(x, c) + r ≤ R`.
    pub(crate) fn ball_inside(&self, x: &[f64], r: f64, center: &[f64], radius: f64) -> bool {
        self.dist(x, center) + r <= radius * (1.0 + 1e-12) + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_spaces() -> Vec<Space> {
        vec![
            Space::EuclideanLebesgue { dim: 1 },
            Space::EuclideanLebesgue { dim: 2 },
            Space::EuclideanLebesgue { dim: 3 },
            Space::FockGaussian { n: 1 },
            Space::PhasePlane,
            Space::LogMetricLine,
            Space::HyperbolicUpperHalfPlane,
            Space::IntegerWordMetric { dim: 1 },
            Space::IntegerWordMetric { dim: 2 },
        ]
    }

    fn random_point(space: &Space, rng: &mut ChaCha8Rng) -> Point {
        let coords = (0..space.coord_dim())
            .map(|i| match space {
                Space::HyperbolicUpperHalfPlane if i == 1 => 0.1 + 3.0 * rng.random::<f64>(),
                Space::IntegerWordMetric { .. } => rng.random_range(-20i32..=20) as f64,
                _ => 20.0 * rng.random::<f64>() - 10.0,
            })
            .collect::<Vec<_>>();
        Point(coords)
    }

    #[test]
    fn distance_examples() {
        let e1 = Space::EuclideanLebesgue { dim: 1 };
        assert_eq!(e1.distance(&Point::new([0.0]), &Point::new([3.0])).unwrap(), 3.0);
        let log = Space::LogMetricLine;
        let d = log.distance(&Point::new([0.0]), &Point::new([std::f64::consts::E - 1.0])).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let hyp = Space::HyperbolicUpperHalfPlane;
        assert_eq!(hyp.distance(&Point::new([0.0, 1.0]), &Point::new([0.0, 1.0])).unwrap(), 0.0);
        // d(i, e^t i) = t along the imaginary axis
        let d = hyp.distance(&Point::new([0.0, 1.0]), &Point::new([0.0, 2f64.exp()])).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
    }

    #[test]
    fn distance_errors() {
        let e1 = Space::EuclideanLebesgue { dim: 1 };
        assert!(matches!(
            e1.distance(&Point::new([0.0]), &Point::new([0.0, 1.0])),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        let hyp = Space::HyperbolicUpperHalfPlane;
        assert!(hyp.distance(&Point::new([0.0, -1.0]), &Point::new([0.0, 1.0])).is_err());
        let int = Space::IntegerWordMetric { dim: 1 };
        assert!(int.distance(&Point::new([0.5]), &Point::new([0.0])).is_err());
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for space in all_spaces() {
            for _ in 0..200 {
                let (x, y, z) = (
                    random_point(&space, &mut rng),
                    random_point(&space, &mut rng),
                    random_point(&space, &mut rng),
                );
                let dxy = space.distance(&x, &y).unwrap();
                let dyx = space.distance(&y, &x).unwrap();
                assert!(dxy >= 0.0);
                assert!((dxy - dyx).abs() <= 1e-12 * (1.0 + dxy));
                assert_eq!(space.distance(&x, &x).unwrap(), 0.0);
                if x != y {
                    assert!(dxy > 0.0, "{space:?}: {x} {y}");
                }
                let dxz = space.distance(&x, &z).unwrap();
                let dzy = space.distance(&z, &y).unwrap();
                assert!(dxy <= dxz + dzy + 1e-12 * (1.0 + dxy), "{space:?} triangle");
            }
        }
    }

    #[test]
    fn ball_measure_closed_forms() {
        let o1 = Point::new([0.0]);
        let e1 = Space::EuclideanLebesgue { dim: 1 };
        assert_eq!(e1.ball_measure(&o1, 5.0).unwrap(), 10.0);
        let e2 = Space::EuclideanLebesgue { dim: 2 };
        assert!((e2.ball_measure(&Point::origin(2), 1.0).unwrap() - PI).abs() < 1e-15);
        let hyp = Space::HyperbolicUpperHalfPlane;
        let m = hyp.ball_measure(&Point::new([0.0, 1.0]), 2.0).unwrap();
        assert!((m - 5.524391382167262).abs() < 1e-12, "{m}");
        let log = Space::LogMetricLine;
        let m = log.ball_measure(&o1, 1.0).unwrap();
        assert!((m - 3.43656365691809).abs() < 1e-12, "{m}");
        let int = Space::IntegerWordMetric { dim: 1 };
        assert_eq!(int.ball_measure(&o1, 1.0).unwrap(), 1.0);
        assert_eq!(int.ball_measure(&o1, 10.0).unwrap(), 19.0);
        assert_eq!(int.ball_measure(&o1, 10.5).unwrap(), 21.0);
        let fock = Space::FockGaussian { n: 1 };
        assert!((fock.ball_measure(&Point::origin(2), 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!(e1.ball_measure(&o1, 0.0).is_err());
        assert!(e1.ball_measure(&o1, -1.0).is_err());
    }

    #[test]
    fn ball_measure_is_monotone_and_derivative_consistent() {
        for space in all_spaces() {
            let x = space.base_point();
            let mut prev = 0.0;
            for k in 1..200 {
                let r = 0.1 * k as f64;
                let m = space.ball_measure(&x, r).unwrap();
                assert!(m.is_finite() && m >= prev, "{space:?} at {r}");
                prev = m;
                if let Some(dm) = space.ball_measure_derivative(r) {
                    let eps = 1e-6 * r;
                    let fd = (space.ball_measure_unchecked(r + eps) - space.ball_measure_unchecked(r - eps)) / (2.0 * eps);
                    assert!((fd - dm).abs() <= 1e-5 * dm.abs().max(1.0), "{space:?}: {fd} vs {dm}");
                }
            }
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_bounding_box_contains_ball() {
        let hyp = Space::HyperbolicUpperHalfPlane;
        let x = [0.3, 0.7];
        let r = 1.5;
        let (lo, hi) = hyp.bounding_box(&x, r);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let p = [lo[0] - 1.0 + (hi[0] - lo[0] + 2.0) * rng.random::<f64>(), 1e-3 + 10.0 * rng.random::<f64>()];
            if hyp.dist(&x, &p) < r {
                assert!(p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]);
            }
        }
    }
}
