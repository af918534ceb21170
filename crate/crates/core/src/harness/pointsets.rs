use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet, Provenance, Space, Window};

const MAX_LATTICE_CELLS: f64 = 5e6;

/// How `Λ` is produced. Lattices are anchored at `center` (default: the
/// space's base point) and cut to the closed window ball of radius `window`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSetSpec {
    Lattice {
        steps: Vec<f64>,
        window: f64,
        #[serde(default)]
        center: Option<Point>,
    },
    /// Each lattice point moved by an independent uniform offset in
    /// `[−jitter, jitter]` per coordinate.
    JitteredLattice {
        steps: Vec<f64>,
        jitter: f64,
        /// Falls back to the experiment seed.
        #[serde(default)]
        seed: Option<u64>,
        window: f64,
        #[serde(default)]
        center: Option<Point>,
    },
    /// Plain text, one point per line.
    File { path: PathBuf, window: Window },
}

impl PointSetSpec {
    /// Lower bound on the pairwise distance the spec guarantees, if any.
    pub fn guaranteed_gap(&self) -> Option<f64> {
        match self {
            PointSetSpec::Lattice { steps, .. } => Some(min_step(steps)),
            PointSetSpec::JitteredLattice { steps, jitter, .. } => Some(min_step(steps) - 2.0 * jitter),
            PointSetSpec::File { .. } => None,
        }
    }
}

fn min_step(steps: &[f64]) -> f64 {
    steps.iter().copied().fold(f64::INFINITY, f64::min)
}

fn check_steps(space: &Space, steps: &[f64], window: f64) -> Result<()> {
    if matches!(space, Space::HyperbolicUpperHalfPlane) {
        return Err(Error::input("lattices are not defined on the half-plane; supply a point file"));
    }
    if steps.len() != space.coord_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.coord_dim(),
            got: steps.len(),
        });
    }
    if steps.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::input(format!("lattice steps must be positive, got {steps:?}")));
    }
    if matches!(space, Space::IntegerWordMetric { .. }) && steps.iter().any(|s| s.fract() != 0.0) {
        return Err(Error::input("lattice steps on Z^d must be integers"));
    }
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::input(format!("window radius must be positive, got {window}")));
    }
    Ok(())
}

/// Lattice sites `c + Σ k_a s_a e_a` inside the closed ball of radius
/// `reach`, in lexicographic index order.
fn lattice_sites(space: &Space, center: &[f64], steps: &[f64], reach: f64) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = space.bounding_box(center, reach);
    let ranges: Vec<(i64, i64)> = (0..steps.len())
        .map(|a| {
            (
                ((lo[a] - center[a]) / steps[a]).ceil() as i64,
                ((hi[a] - center[a]) / steps[a]).floor() as i64,
            )
        })
        .collect();
    let cells: f64 = ranges.iter().map(|(a, b)| (b - a + 1).max(0) as f64).product();
    if cells > MAX_LATTICE_CELLS {
        return Err(Error::input(format!("lattice would enumerate {cells:.0} sites; shrink the window")));
    }
    let mut out = Vec::new();
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|(a, b)| a > b) {
        return Ok(out);
    }
    loop {
        let p: Vec<f64> = idx.iter().zip(steps).zip(center).map(|((&k, s), c)| c + k as f64 * s).collect();
        if space.dist(&p, center) <= reach * (1.0 + 1e-12) {
            out.push(p);
        }
        let mut a = idx.len();
        loop {
            if a == 0 {
                return Ok(out);
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] <= ranges[a].1 {
                break;
            }
            idx[a] = ranges[a].0;
        }
    }
}

/// Deterministic for a fixed spec and seed.
pub fn generate_pointset(spec: &PointSetSpec, space: &Space, seed: u64) -> Result<PointSet> {
    space.validate()?;
    match spec {
        PointSetSpec::Lattice { steps, window, center } => {
            check_steps(space, steps, *window)?;
            let c = center.clone().unwrap_or_else(|| space.base_point());
            space.check_point(&c)?;
            let pts = lattice_sites(space, &c.0, steps, *window)?.into_iter().map(Point).collect();
            let w = Window {
                center: c,
                radius: *window,
            };
            PointSet::new(space, pts, w, Provenance::new("lattice", None))
        }
        PointSetSpec::JitteredLattice {
            steps,
            jitter,
            seed: own,
            window,
            center,
        } => {
            check_steps(space, steps, *window)?;
            if matches!(space, Space::IntegerWordMetric { .. }) {
                return Err(Error::input("jittered lattices would leave Z^d"));
            }
            let half = 0.5 * min_step(steps);
            if !(*jitter >= 0.0) || *jitter >= half {
                return Err(Error::SeparationViolation {
                    jitter: *jitter,
                    min_step: min_step(steps),
                });
            }
            let c = center.clone().unwrap_or_else(|| space.base_point());
            space.check_point(&c)?;
            let seed = own.unwrap_or(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // sites just outside the window may jitter into it
            let outer = grown_reach(space, &c.0, *window, *jitter);
            let mut pts = Vec::new();
            for site in lattice_sites(space, &c.0, steps, outer)? {
                let p: Vec<f64> = site.iter().map(|v| v + rng.random_range(-*jitter..=*jitter)).collect();
                if space.dist(&p, &c.0) <= *window {
                    pts.push(Point(p));
                }
            }
            let w = Window {
                center: c,
                radius: *window,
            };
            PointSet::new(space, pts, w, Provenance::new("jittered_lattice", Some(seed)))
        }
        PointSetSpec::File { path, window } => PointSet::from_file(space, path, window.clone()),
    }
}

/// Radius, in the space's metric, of a ball that contains every point within
/// Euclidean sup-distance `jitter` of the window ball.
fn grown_reach(space: &Space, center: &[f64], window: f64, jitter: f64) -> f64 {
    let d = center.len() as f64;
    let euclid = jitter * d.sqrt();
    match space {
        Space::LogMetricLine => ((window.exp() - 1.0) + euclid).ln_1p(),
        _ => window + euclid,
    }
}
