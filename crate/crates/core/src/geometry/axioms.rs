//! Checkers for the geometric assumptions on `(X, d, μ)`: non-degenerate
//! balls, weak annular decay, local doubling at large scales and the two
//! annular-decay variants.

use serde::{Deserialize, Serialize};

use super::space::{Point, Space};
use crate::error::{Error, Result};

pub const DEFAULT_NDB_FLOOR: f64 = 1e-9;
pub const DEFAULT_WAD_TOL: f64 = 0.05;

fn sup_over_centers<F: Fn(&Point) -> f64>(centers: &[Point], f: F) -> f64 {
    centers.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

fn validate(space: &Space, centers: &[Point], radii: &[f64]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::input("no centers given"));
    }
    for c in centers {
        space.check_point(c)?;
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::input("radii must be nonempty, positive and finite"));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    Ok(())
}

/// Nonincreasing up to relative roundoff.
fn nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdbReport {
    pub r: f64,
    pub inf_measure: f64,
    pub floor: f64,
    pub pass: bool,
}

/// `inf_x μ(B_r(x)) > floor`.
pub fn check_ndb(space: &Space, centers: &[Point], r: f64, floor: f64) -> Result<NdbReport> {
    validate(space, centers, &[r])?;
    let inf_measure = centers
        .iter()
        .map(|x| space.ball_measure(x, r))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(NdbReport {
        r,
        inf_measure,
        floor,
        pass: inf_measure > floor,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WadReport {
    pub radii: Vec<f64>,
    /// `sup_x μ(B_{r+1}(x) ∖ B_r(x)) / μ(B_r(x))` per radius.
    pub ratios: Vec<f64>,
    pub wad_tol: f64,
    pub horizon: f64,
    pub pass: bool,
}

impl WadReport {
    pub fn final_ratio(&self) -> f64 {
        *self.ratios.last().expect("nonempty radii")
    }
}

/// Unit-width shells relative to their ball. Passes when the ratio at the
/// largest radius is below `wad_tol` and the curve is nonincreasing over
/// the last half of the radii.
pub fn check_wad(space: &Space, centers: &[Point], radii: &[f64], wad_tol: f64) -> Result<WadReport> {
    validate(space, centers, radii)?;
    let horizon = space.wad_horizon();
    let r_max = *radii.last().expect("validated");
    if r_max < horizon {
        return Err(Error::input(format!(
            "largest WAD radius {r_max} is below the horizon {horizon} for {}",
            space.name()
        )));
    }
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| sup_over_centers(centers, |_| space.shell_measure(r, r + 1.0) / space.ball_measure_unchecked(r)))
        .collect();
    let tail = &ratios[ratios.len() / 2..];
    let pass = *ratios.last().expect("nonempty") < wad_tol && nonincreasing(tail);
    Ok(WadReport {
        radii: radii.to_vec(),
        ratios,
        wad_tol,
        horizon,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub radii: Vec<f64>,
    /// `sup_x μ(B_{2r}(x)) / μ(B_r(x))` per radius.
    pub constants: Vec<f64>,
    pub pass: bool,
}

/// Doubling constants at the tested radii. Passes when all constants are
/// finite and none exceeds twice the constant at the smallest radius.
pub fn check_locally_doubling(space: &Space, centers: &[Point], radii: &[f64]) -> Result<DoublingReport> {
    validate(space, centers, radii)?;
    let constants: Vec<f64> = radii
        .iter()
        .map(|&r| sup_over_centers(centers, |_| space.ball_measure_unchecked(2.0 * r) / space.ball_measure_unchecked(r)))
        .collect();
    let bound = 2.0 * constants[0];
    let pass = constants.iter().all(|c| c.is_finite() && *c <= bound);
    Ok(DoublingReport {
        radii: radii.to_vec(),
        constants,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnularReport {
    pub radii: Vec<f64>,
    pub rho_prime: f64,
    /// `sup_x μ(B_{r+ρ'}) / μ(B_r)`, which should tend to 1.
    pub ratio_curve_c1: Vec<f64>,
    /// `sup_x μ(B_{r+ρ'} ∖ B_{r−ρ'}) / μ(B_r)`, which should tend to 0.
    pub ratio_curve_anndecay: Vec<f64>,
    /// Both curves move monotonically toward their limits and end within
    /// `wad_tol` of them.
    pub pass: bool,
}

pub fn annular_variants(
    space: &Space,
    centers: &[Point],
    radii: &[f64],
    rho_prime: f64,
    wad_tol: f64,
) -> Result<AnnularReport> {
    validate(space, centers, radii)?;
    if !(rho_prime > 0.0) {
        return Err(Error::input(format!("rho' must be positive, got {rho_prime}")));
    }
    let c1: Vec<f64> = radii
        .iter()
        .map(|&r| {
            sup_over_centers(centers, |_| {
                space.ball_measure_unchecked(r + rho_prime) / space.ball_measure_unchecked(r)
            })
        })
        .collect();
    let ann: Vec<f64> = radii
        .iter()
        .map(|&r| {
            sup_over_centers(centers, |_| {
                space.shell_measure(r - rho_prime, r + rho_prime) / space.ball_measure_unchecked(r)
            })
        })
        .collect();
    let excess: Vec<f64> = c1.iter().map(|v| v - 1.0).collect();
    let pass = nonincreasing(&excess)
        && nonincreasing(&ann)
        && *excess.last().expect("nonempty") < wad_tol
        && *ann.last().expect("nonempty") < 2.0 * wad_tol;
    Ok(AnnularReport {
        radii: radii.to_vec(),
        rho_prime,
        ratio_curve_c1: c1,
        ratio_curve_anndecay: ann,
        pass,
    })
}

/// Default WAD radii: geometric ladder from 1 to the space's horizon.
pub fn default_wad_radii(space: &Space) -> Vec<f64> {
    let horizon = space.wad_horizon();
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r < horizon {
        radii.push(r);
        r *= 2.0;
    }
    radii.push(horizon);
    radii
}
