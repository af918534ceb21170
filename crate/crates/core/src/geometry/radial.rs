//! Integrals of radial profiles over ball complements.
//!
//! For a homogeneous space, `∫_{X∖B_r(x)} φ(d(x,y)) dμ(y) = ∫_r^∞ φ(t) dm(t)`
//! with `m(t) = μ(B_t)`. The integral is summed over blocks of doubling
//! length; it is declared divergent when the block contributions stop
//! shrinking.

use super::space::{Point, Space};

const MAX_BLOCKS: usize = 400;
const SIMPSON_PANELS: usize = 256;
const CONVERGED_REL: f64 = 1e-15;

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let n = SIMPSON_PANELS;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `∫_r^∞ φ(t) dm(t)`; `f64::INFINITY` when the integral diverges (or
/// converges too slowly to be resolved within ~10^120 length units).
pub fn radial_tail_integral<F: Fn(f64) -> f64>(space: &Space, r: f64, profile: F) -> f64 {
    let block = |a: f64, b: f64| -> f64 {
        match space {
            Space::IntegerWordMetric { dim } => {
                // points at sup-distance exactly k: (2k+1)^d − (2k−1)^d
                let d = *dim as i32;
                let (k0, k1) = (a.ceil() as u64, b.ceil() as u64);
                (k0..k1)
                    .map(|k| {
                        let kf = k as f64;
                        let shell = if k == 0 {
                            1.0
                        } else {
                            (2.0 * kf + 1.0).powi(d) - (2.0 * kf - 1.0).powi(d)
                        };
                        profile(kf) * shell
                    })
                    .sum()
            }
            _ => simpson(
                &|t: f64| profile(t) * space.ball_measure_derivative(t).expect("continuous space"),
                a,
                b,
            ),
        }
    };
    let mut total = 0.0;
    let mut a = r.max(0.0);
    let mut width = a.max(1.0);
    let mut previous = f64::INFINITY;
    let mut shrinking_streak = 0;
    for _ in 0..MAX_BLOCKS {
        let b = a + width;
        if !b.is_finite() || b > 1e120 {
            break;
        }
        let value = block(a, b);
        if !value.is_finite() {
            return f64::INFINITY;
        }
        total += value;
        if value <= 0.5 * previous || value == 0.0 {
            shrinking_streak += 1;
        } else {
            shrinking_streak = 0;
        }
        if shrinking_streak >= 3 && value <= CONVERGED_REL * total.abs().max(f64::MIN_POSITIVE) {
            return total;
        }
        previous = value;
        a = b;
        width *= 2.0;
        if matches!(space, Space::IntegerWordMetric { .. }) && a > 1e7 {
            break;
        }
    }
    f64::INFINITY
}

/// A point at distance `t` from `x`, moving in the direction indexed by
/// `direction` (a unit vector for Euclidean-type spaces, the sign for the
/// line, up/down the vertical geodesic for the half-plane, a signed axis for
/// `Z^d`; integer distances are rounded).
pub fn point_at_distance(space: &Space, x: &Point, t: f64, direction: &[f64]) -> Point {
    match space {
        Space::LogMetricLine => {
            let s = if direction.first().copied().unwrap_or(1.0) >= 0.0 { 1.0 } else { -1.0 };
            Point::new(vec![x.0[0] + s * t.exp_m1()])
        }
        Space::HyperbolicUpperHalfPlane => {
            let s = if direction.first().copied().unwrap_or(1.0) >= 0.0 { 1.0 } else { -1.0 };
            Point::new(vec![x.0[0], x.0[1] * (s * t).exp()])
        }
        Space::IntegerWordMetric { dim } => {
            let axis = direction
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
                % dim;
            let s = if direction.get(axis).copied().unwrap_or(1.0) >= 0.0 { 1.0 } else { -1.0 };
            let mut p = x.0.clone();
            p[axis] += s * t.round();
            Point(p)
        }
        _ => {
            let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut p = x.0.clone();
            if norm > 0.0 {
                for (c, v) in p.iter_mut().zip(direction) {
                    *c += t * v / norm;
                }
            } else {
                p[0] += t;
            }
            Point(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_tail_matches_closed_form() {
        let line = Space::EuclideanLebesgue { dim: 1 };
        for r in [0.5, 1.0, 10.0, 100.0] {
            let got = radial_tail_integral(&line, r, |t| (1.0 + t).powi(-4));
            let want = 2.0 / 3.0 * (1.0 + r).powi(-3);
            assert!((got - want).abs() < 1e-9 * want.max(1e-3), "{r}: {got} vs {want}");
        }
    }

    #[test]
    fn divergent_tails_are_infinite() {
        let line = Space::EuclideanLebesgue { dim: 1 };
        assert!(radial_tail_integral(&line, 1.0, |t| (1.0 + t).powf(-0.8)).is_infinite());
        assert!(radial_tail_integral(&line, 1.0, |t| (1.0 + t).powi(-1)).is_infinite());
        let hyp = Space::HyperbolicUpperHalfPlane;
        assert!(radial_tail_integral(&hyp, 1.0, |t| (1.0 + t).powi(-10)).is_infinite());
    }

    #[test]
    fn gaussian_tail_in_the_plane() {
        // ∫_{|w|>r} e^{-|w|²} dA / 2 = (π/2) e^{-r²}
        let fock = Space::FockGaussian { n: 1 };
        let got = radial_tail_integral(&fock, 2.0, |t| (-t * t).exp());
        let want = std::f64::consts::PI / 2.0 * (-4.0f64).exp();
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn integer_shell_sums() {
        let z1 = Space::IntegerWordMetric { dim: 1 };
        // Σ_{|k| ≥ 3} 2^{-|k|} = 2 · 2^{-3} / (1 − 1/2) = 0.5
        let got = radial_tail_integral(&z1, 3.0, |t| 0.5f64.powf(t));
        assert!((got - 0.5).abs() < 1e-12, "{got}");
    }

    #[test]
    fn points_at_distance() {
        let cases = [
            Space::EuclideanLebesgue { dim: 2 },
            Space::LogMetricLine,
            Space::HyperbolicUpperHalfPlane,
            Space::PhasePlane,
        ];
        for space in cases {
            let x = space.base_point();
            for t in [0.1, 1.0, 7.5] {
                let y = point_at_distance(&space, &x, t, &[0.6, -0.8]);
                assert!((space.distance(&x, &y).unwrap() - t).abs() < 1e-12 * (1.0 + t));
            }
        }
        let z2 = Space::IntegerWordMetric { dim: 2 };
        let y = point_at_distance(&z2, &Point::new([0.0, 0.0]), 3.0, &[0.1, -0.9]);
        assert_eq!(y, Point::new([0.0, -3.0]));
    }
}
