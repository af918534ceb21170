//! Point counts in balls and the quantities built from them: Beurling
//! density estimates, relative separation constants and shell counts.
//!
//! Suprema and infima over `x ∈ X` run over a finite list of candidate
//! centers, and limits in `r` are replaced by the value at the largest
//! tested radius together with a least-squares slope of the ratio against
//! `1/r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pointset::PointSet;
use super::space::{Point, Space};
use crate::error::{Error, Result};

/// Outcome of a single count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallCount {
    pub count: usize,
    /// `B_r(x)` reaches outside the point-set window, so `count` is only a
    /// lower bound.
    pub censored: bool,
}

/// `#(Λ ∩ B_r(x))` with the strict inequality `d(λ, x) < r`.
pub fn count_in_ball(lambda: &PointSet, space: &Space, x: &Point, r: f64) -> Result<BallCount> {
    space.check_point(x)?;
    if !(r > 0.0) {
        return Err(Error::input(format!("ball radius must be positive, got {r}")));
    }
    Ok(BallCount {
        count: count_unchecked(lambda, space, &x.0, r),
        censored: !lambda.covers_ball(space, x, r),
    })
}

pub(crate) fn count_unchecked(lambda: &PointSet, space: &Space, x: &[f64], r: f64) -> usize {
    lambda.points().iter().filter(|p| space.dist(&p.0, x) < r).count()
}

/// `#(Λ ∩ (B_outer ∖ B_inner))`, i.e. points with `inner ≤ d < outer`.
pub(crate) fn count_in_shell(lambda: &PointSet, space: &Space, x: &[f64], inner: f64, outer: f64) -> usize {
    lambda
        .points()
        .iter()
        .filter(|p| {
            let d = space.dist(&p.0, x);
            d >= inner && d < outer
        })
        .count()
}

/// Least-squares slope of `values` against `1/radii` (zero for a single
/// radius).
pub fn inverse_radius_slope(radii: &[f64], values: &[f64]) -> f64 {
    let n = radii.len().min(values.len());
    if n < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = radii[..n].iter().map(|r| 1.0 / r).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = values[..n].iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&values[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Candidate centers for the sup/inf over `x`: a coordinate grid anchored
/// at the window center together with `Λ` itself, keeping only centers whose
/// ball of radius `r_max` stays inside the window.
pub fn candidate_centers(lambda: &PointSet, space: &Space, spacing: f64, r_max: f64) -> Result<Vec<Point>> {
    if !(spacing > 0.0) {
        return Err(Error::input(format!("center spacing must be positive, got {spacing}")));
    }
    let window = lambda.window();
    let c = &window.center.0;
    let reach = window.radius - r_max;
    if reach < 0.0 {
        return Err(Error::Censored(format!(
            "radius {r_max} does not fit in the window of radius {}",
            window.radius
        )));
    }
    let (lo, hi) = space.bounding_box(c, reach.max(0.0));
    let axes: Vec<Vec<f64>> = (0..c.len())
        .map(|a| {
            let k_lo = ((lo[a] - c[a]) / spacing).ceil() as i64;
            let k_hi = ((hi[a] - c[a]) / spacing).floor() as i64;
            (k_lo..=k_hi).map(|k| c[a] + k as f64 * spacing).collect()
        })
        .collect();
    let total: f64 = axes.iter().map(|a| a.len() as f64).product();
    if total > 1e6 {
        return Err(Error::input(format!("candidate grid would have {total:.0} centers; increase the spacing")));
    }
    let mut centers = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    'outer: loop {
        if axes.iter().all(|a| !a.is_empty()) {
            let p: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
            let valid = match space {
                Space::HyperbolicUpperHalfPlane => p[1] > 0.0,
                Space::IntegerWordMetric { .. } => p.iter().all(|v| v.fract() == 0.0),
                _ => true,
            };
            if valid && space.ball_inside(&p, r_max, c, window.radius) {
                centers.push(Point(p));
            }
        } else {
            break;
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
    centers.extend(
        lambda
            .points()
            .iter()
            .filter(|p| space.ball_inside(&p.0, r_max, c, window.radius))
            .cloned(),
    );
    Ok(centers)
}

/// Per-radius extremes of `#(Λ ∩ B_r(x)) / μ(B_r(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub r: f64,
    pub inf_ratio: f64,
    pub sup_ratio: f64,
    /// Centers that contributed (uncensored balls).
    pub centers_used: usize,
    pub centers_censored: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
    pub d_minus_est: f64,
    pub d_plus_est: f64,
    /// Slopes of the inf / sup ratios against `1/r`.
    pub trend_minus: f64,
    pub trend_plus: f64,
}

impl DensityReport {
    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.r).collect()
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::input("no radii given"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::input("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    Ok(())
}

/// Estimates `D⁻(Λ)` and `D⁺(Λ)`. Centers whose ball leaves the window are
/// skipped and counted as censored; a radius with no usable center is an
/// error.
pub fn beurling_density(lambda: &PointSet, space: &Space, centers: &[Point], radii: &[f64]) -> Result<DensityReport> {
    if centers.is_empty() {
        return Err(Error::input("no candidate centers"));
    }
    check_radii(radii)?;
    for c in centers {
        space.check_point(c)?;
    }
    let rows = radii
        .par_iter()
        .map(|&r| {
            let measure = space.ball_measure_unchecked(r);
            let ratios: Vec<Option<f64>> = centers
                .iter()
                .map(|x| {
                    lambda
                        .covers_ball(space, x, r)
                        .then(|| count_unchecked(lambda, space, &x.0, r) as f64 / measure)
                })
                .collect();
            let used: Vec<f64> = ratios.iter().flatten().copied().collect();
            if used.is_empty() {
                return Err(Error::Censored(format!("every ball of radius {r} leaves the point-set window")));
            }
            Ok(DensityRow {
                r,
                inf_ratio: used.iter().copied().fold(f64::INFINITY, f64::min),
                sup_ratio: used.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                centers_used: used.len(),
                centers_censored: ratios.len() - used.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let infs: Vec<f64> = rows.iter().map(|r| r.inf_ratio).collect();
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_ratio).collect();
    let last = rows.last().expect("radii nonempty");
    Ok(DensityReport {
        d_minus_est: last.inf_ratio,
        d_plus_est: last.sup_ratio,
        trend_minus: inverse_radius_slope(radii, &infs),
        trend_plus: inverse_radius_slope(radii, &sups),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub rho: f64,
    /// Smallest `C` with `#(Λ ∩ B_ρ(x)) ≤ C μ(B_ρ(x))` over the tested centers.
    pub c_rho: f64,
    pub centers_used: usize,
    pub pass: bool,
}

/// Relative-separation constant `C_ρ` over the given centers.
pub fn relative_separation(lambda: &PointSet, space: &Space, rho: f64, centers: &[Point]) -> Result<SeparationReport> {
    if !(rho > 0.0) {
        return Err(Error::input(format!("rho must be positive, got {rho}")));
    }
    if centers.is_empty() {
        return Err(Error::input("no candidate centers"));
    }
    for c in centers {
        space.check_point(c)?;
    }
    let measure = space.ball_measure_unchecked(rho);
    let ratios: Vec<f64> = centers
        .par_iter()
        .map(|x| count_unchecked(lambda, space, &x.0, rho) as f64 / measure)
        .collect();
    let c_rho = ratios.iter().copied().fold(0.0, f64::max);
    Ok(SeparationReport {
        rho,
        c_rho,
        centers_used: ratios.len(),
        pass: c_rho.is_finite(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellBound {
    /// `#(Λ ∩ (B_{R+r} ∖ B_R))`.
    pub lhs: usize,
    /// `C_{ρ,Λ} μ(B_{R+r+ρ} ∖ B_{R−ρ})`.
    pub rhs: f64,
    pub holds: bool,
    pub censored: bool,
}

/// Shell-count bound `#(Λ ∩ (B_{R+r} ∖ B_R)) ≤ C_{ρ,Λ} μ(B_{R+r+ρ} ∖ B_{R−ρ})`.
pub fn shell_count_bound(
    lambda: &PointSet,
    space: &Space,
    x: &Point,
    big_r: f64,
    r: f64,
    separation: &SeparationReport,
) -> Result<ShellBound> {
    space.check_point(x)?;
    let rho = separation.rho;
    if !(big_r > rho) {
        return Err(Error::input(format!("need R > rho, got R = {big_r}, rho = {rho}")));
    }
    if !(r > 0.0) {
        return Err(Error::input(format!("shell width must be positive, got {r}")));
    }
    let lhs = count_in_shell(lambda, space, &x.0, big_r, big_r + r);
    let rhs = separation.c_rho * space.shell_measure(big_r - rho, big_r + r + rho);
    Ok(ShellBound {
        lhs,
        rhs,
        holds: lhs as f64 <= rhs * (1.0 + 1e-12),
        censored: !lambda.covers_ball(space, x, big_r + r),
    })
}
