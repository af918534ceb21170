use serde::{Deserialize, Serialize};

use super::space::{Point, Space};
use crate::error::{Error, Result};

/// Hard limit on the number of nodes in one ball grid.
pub const MAX_QUADRATURE_NODES: usize = 4_000_000;

/// Tensor-grid midpoint rule restricted to a ball by its indicator.
///
/// Cells have side `h` and are anchored at the ball center, so the grids
/// for two radii around the same center are nested. On the half-plane the
/// cell side is `h·Im(x)` (the rule is transported by the isometry that
/// moves `i` to the center); on `Z^d` the rule is the exact counting sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureRule {
    pub h: f64,
}

impl QuadratureRule {
    pub const DEFAULT_H: f64 = 0.05;
    pub const DEFAULT_H_HYPERBOLIC: f64 = 0.02;

    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::input(format!("quadrature step must be positive, got {h}")));
        }
        Ok(Self { h })
    }

    pub fn default_for(space: &Space) -> Self {
        match space {
            Space::HyperbolicUpperHalfPlane => Self {
                h: Self::DEFAULT_H_HYPERBOLIC,
            },
            _ => Self { h: Self::DEFAULT_H },
        }
    }

    /// Absolute tolerance for `∫_{B_r} 1 dμ` against the closed form:
    /// `5h` times the surface measure `d/dr μ(B_r)`.
    pub fn tolerance(&self, space: &Space, r: f64) -> f64 {
        match space.ball_measure_derivative(r) {
            Some(surface) => 5.0 * self.h * surface,
            None => 1e-12,
        }
    }

    /// Nodes and weights for `B_r(x)`.
    pub fn ball_grid(&self, space: &Space, x: &Point, r: f64) -> Result<BallGrid> {
        space.check_point(x)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!("ball radius must be positive and finite, got {r}")));
        }
        let (axes, weight_of): (Vec<Vec<f64>>, Box<dyn Fn(&[f64]) -> f64>) = match *space {
            Space::EuclideanLebesgue { dim } => (vec![midpoints(r, self.h); dim], {
                let w = self.h.powi(dim as i32);
                Box::new(move |_| w)
            }),
            Space::PhasePlane => (vec![midpoints(r, self.h); 2], {
                let w = self.h * self.h;
                Box::new(move |_| w)
            }),
            Space::FockGaussian { n } => (vec![midpoints(r, self.h); 2 * n], {
                let w = self.h.powi(2 * n as i32) / 2f64.powi(n as i32);
                Box::new(move |_| w)
            }),
            Space::LogMetricLine => (vec![midpoints(r.exp_m1(), self.h)], {
                let w = self.h;
                Box::new(move |_| w)
            }),
            Space::HyperbolicUpperHalfPlane => {
                let step = self.h * x.0[1];
                let (lo, hi) = space.bounding_box(&x.0, r);
                let xs = midpoints(hi[0] - x.0[0], step);
                let k_lo = ((lo[1] - x.0[1]) / step).floor() as i64 - 1;
                let k_hi = ((hi[1] - x.0[1]) / step).ceil() as i64 + 1;
                let ys = (k_lo..=k_hi).map(|k| (k as f64 + 0.5) * step).collect();
                (
                    vec![xs, ys],
                    // cell weight integrates y^{-2} exactly across the cell height
                    Box::new(move |p: &[f64]| {
                        step * step / (std::f64::consts::PI * (p[1] * p[1] - step * step / 4.0))
                    }),
                )
            }
            Space::IntegerWordMetric { dim } => {
                let reach = r.ceil() as i64 - 1;
                (vec![(-reach..=reach).map(|k| k as f64).collect(); dim], Box::new(|_| 1.0))
            }
        };
        let total: f64 = axes.iter().map(|a| a.len() as f64).product();
        if total > MAX_QUADRATURE_NODES as f64 * 4.0 {
            return Err(Error::input(format!(
                "quadrature grid for radius {r} with h = {} needs ~{total:.0} cells (cap {MAX_QUADRATURE_NODES})",
                self.h
            )));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut distances = Vec::new();
        let mut idx = vec![0usize; axes.len()];
        let mut coords = vec![0.0; axes.len()];
        'outer: loop {
            for (a, (&i, axis)) in idx.iter().zip(&axes).enumerate() {
                coords[a] = x.0[a] + axis[i];
            }
            let inside = !matches!(space, Space::HyperbolicUpperHalfPlane) || coords[1] > self.h * x.0[1];
            if inside {
                let d = space.dist(&coords, &x.0);
                if d < r {
                    if nodes.len() == MAX_QUADRATURE_NODES {
                        return Err(Error::input(format!(
                            "quadrature grid exceeds {MAX_QUADRATURE_NODES} nodes (radius {r}, h = {})",
                            self.h
                        )));
                    }
                    weights.push(weight_of(&coords));
                    nodes.push(Point(coords.clone()));
                    distances.push(d);
                }
            }
            for a in (0..axes.len()).rev() {
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    continue 'outer;
                }
                idx[a] = 0;
            }
            break;
        }
        Ok(BallGrid {
            center: x.clone(),
            radius: r,
            nodes,
            weights,
            distances,
        })
    }

    /// Quadrature value of `μ(B_r(x))`.
    pub fn ball_measure(&self, space: &Space, x: &Point, r: f64) -> Result<f64> {
        Ok(self.ball_grid(space, x, r)?.weights.iter().sum())
    }
}

/// Offsets `(k + ½)h` with `|offset| < half_width` (plus one guard cell).
fn midpoints(half_width: f64, h: f64) -> Vec<f64> {
    let m = (half_width / h).ceil() as i64;
    (-m..m).map(|k| (k as f64 + 0.5) * h).collect()
}

/// Midpoint nodes of a ball with their weights and distances to the center.
#[derive(Clone, Debug)]
pub struct BallGrid {
    pub center: Point,
    pub radius: f64,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub distances: Vec<f64>,
}

impl BallGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)` over nodes with `d(x_i, center) < r`.
    pub fn integrate_within<F: Fn(&Point) -> f64>(&self, r: f64, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.distances)
            .filter(|(_, &d)| d < r)
            .map(|((p, w), _)| w * f(p))
            .sum()
    }

    /// Sub-grid of nodes with `d < r` (the same nodes the grid for radius
    /// `r` would have).
    pub fn restrict(&self, r: f64) -> BallGrid {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.distances[i] < r).collect();
        BallGrid {
            center: self.center.clone(),
            radius: r,
            nodes: keep.iter().map(|&i| self.nodes[i].clone()).collect(),
            weights: keep.iter().map(|&i| self.weights[i]).collect(),
            distances: keep.iter().map(|&i| self.distances[i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadrature_measure_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cases: Vec<(Space, f64, f64)> = vec![
            (Space::EuclideanLebesgue { dim: 1 }, 0.05, 20.0),
            (Space::EuclideanLebesgue { dim: 2 }, 0.05, 6.0),
            (Space::EuclideanLebesgue { dim: 3 }, 0.1, 2.5),
            (Space::FockGaussian { n: 1 }, 0.05, 6.0),
            (Space::PhasePlane, 0.05, 6.0),
            (Space::LogMetricLine, 0.05, 3.0),
            (Space::HyperbolicUpperHalfPlane, 0.02, 2.0),
            (Space::IntegerWordMetric { dim: 2 }, 1.0, 12.0),
        ];
        for (space, h, r_max) in cases {
            let rule = QuadratureRule::new(h).unwrap();
            for _ in 0..10 {
                let x = match space {
                    Space::HyperbolicUpperHalfPlane => Point::new([rng.random::<f64>() * 4.0 - 2.0, 0.2 + rng.random::<f64>()]),
                    Space::IntegerWordMetric { dim } => Point((0..dim).map(|_| rng.random_range(-5i32..5) as f64).collect()),
                    _ => Point((0..space.coord_dim()).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect()),
                };
                let r = 0.5 + rng.random::<f64>() * (r_max - 0.5);
                let quad = rule.ball_measure(&space, &x, r).unwrap();
                let exact = space.ball_measure(&x, r).unwrap();
                let tol = rule.tolerance(&space, r);
                assert!((quad - exact).abs() <= tol, "{space:?} r={r}: {quad} vs {exact} (tol {tol})");
            }
        }
    }

    #[test]
    fn hyperbolic_ball_measure_by_quadrature() {
        // closed form 4 sinh²(1) for r = 2 (curvature −1, measure dA/(π y²))
        let space = Space::HyperbolicUpperHalfPlane;
        let rule = QuadratureRule::default_for(&space);
        let quad = rule.ball_measure(&space, &Point::new([0.0, 1.0]), 2.0).unwrap();
        assert!((quad - 4.0 * 1f64.sinh().powi(2)).abs() < 2e-2, "{quad}");
        assert!((quad - 4.0 * 1f64.sinh().powi(2)).abs() <= rule.tolerance(&space, 2.0));
    }

    #[test]
    fn one_dimensional_grid_tiles_the_interval() {
        let space = Space::EuclideanLebesgue { dim: 1 };
        let grid = QuadratureRule::new(0.05).unwrap().ball_grid(&space, &Point::new([1.0]), 8.0).unwrap();
        assert_eq!(grid.len(), 320);
        let total: f64 = grid.weights.iter().sum();
        assert!((total - 16.0).abs() < 1e-12);
        let inner = grid.restrict(4.0);
        assert_eq!(inner.len(), 160);
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(QuadratureRule::new(0.0).is_err());
        assert!(QuadratureRule::new(f64::NAN).is_err());
    }
}
