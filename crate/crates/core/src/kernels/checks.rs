use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ReproducingKernel;
use crate::error::{Error, Result};
use crate::geometry::{point_at_distance, radial_tail_integral, Point, PointSet, QuadratureRule, Space};

/// Tail levels for which `r(ε)` is extracted by default.
pub const DEFAULT_EPSILONS: [f64; 2] = [0.1, 0.01];

fn nonempty(centers: &[Point]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::input("at least one center is required"));
    }
    Ok(())
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::input("at least one radius is required"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input(format!("radii must be positive and increasing, got {radii:?}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomDReport {
    pub c1_est: f64,
    pub c2_est: f64,
    pub pass: bool,
}

/// Extremes of `k(x, x)` over the centers.
pub fn check_axiom_d<K: ReproducingKernel + ?Sized>(kernel: &K, centers: &[Point]) -> Result<AxiomDReport> {
    nonempty(centers)?;
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    for x in centers {
        let d = kernel.diagonal(x)?;
        c1 = c1.min(d);
        c2 = c2.max(d);
    }
    Ok(AxiomDReport {
        c1_est: c1,
        c2_est: c2,
        pass: c1 > 0.0 && c2.is_finite(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessBound {
    pub witness_norm: f64,
    /// `1/C²`.
    pub bound: f64,
    pub c1_est: f64,
    /// `C = ∞`: the bound says nothing.
    pub vacuous: bool,
    /// The measured diagonal undercuts the certified bound: the witness
    /// norm supplied for this kernel is wrong.
    pub modeling_error: bool,
}

/// Lower diagonal bound from witnesses `f_x` with `f_x(x) = 1`, `‖f_x‖ ≤ C`.
pub fn witness_diagonal_bound<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    witness_norm: f64,
    centers: &[Point],
) -> Result<WitnessBound> {
    if !(witness_norm > 0.0) {
        return Err(Error::input(format!("witness norm bound must be positive, got {witness_norm}")));
    }
    let d = check_axiom_d(kernel, centers)?;
    let bound = if witness_norm.is_finite() { witness_norm.powi(-2) } else { 0.0 };
    Ok(WitnessBound {
        witness_norm,
        bound,
        c1_est: d.c1_est,
        vacuous: !witness_norm.is_finite(),
        modeling_error: d.c1_est < bound - 1e-12 * bound.max(1.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    WeakLocalization,
    HomogeneousApproximation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub center_index: usize,
    pub r: f64,
    pub tail_value: f64,
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRadius {
    pub epsilon: f64,
    /// Smallest tested radius at which the sup tail is `≤ ε`.
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub kind: TailKind,
    pub radii: Vec<f64>,
    pub rows: Vec<TailRow>,
    /// Sup over uncensored centers; `None` when every center is censored.
    pub sup_tail: Vec<Option<f64>>,
    pub epsilon_to_radius: Vec<EpsilonRadius>,
    pub censored: usize,
    pub monotone: bool,
    /// Uncensored, nonincreasing at every center, every `ε` reached.
    pub pass: bool,
}

impl TailReport {
    fn assemble(kind: TailKind, radii: &[f64], per_center: Vec<Vec<(f64, bool)>>, epsilons: &[f64]) -> Self {
        let mut rows = Vec::new();
        let mut monotone = true;
        for (ci, tails) in per_center.iter().enumerate() {
            let live: Vec<f64> = tails.iter().filter(|t| !t.1).map(|t| t.0).collect();
            monotone &= live.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
            for (&r, &(tail_value, censored)) in radii.iter().zip(tails) {
                rows.push(TailRow {
                    center_index: ci,
                    r,
                    tail_value,
                    censored,
                });
            }
        }
        let sup_tail: Vec<Option<f64>> = (0..radii.len())
            .map(|j| {
                per_center
                    .iter()
                    .filter(|t| !t[j].1)
                    .map(|t| t[j].0)
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            })
            .collect();
        let epsilon_to_radius: Vec<EpsilonRadius> = epsilons
            .iter()
            .map(|&epsilon| EpsilonRadius {
                epsilon,
                radius: radii
                    .iter()
                    .zip(&sup_tail)
                    .find(|(_, s)| s.is_some_and(|v| v <= epsilon))
                    .map(|(r, _)| *r),
            })
            .collect();
        let censored = rows.iter().filter(|r| r.censored).count();
        let pass = censored == 0 && monotone && epsilon_to_radius.iter().all(|e| e.radius.is_some());
        TailReport {
            kind,
            radii: radii.to_vec(),
            rows,
            sup_tail,
            epsilon_to_radius,
            censored,
            monotone,
            pass,
        }
    }

    /// Columns `center_index, r, tail_value` (censored rows are skipped).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["center_index", "r", "tail_value"])?;
        for row in self.rows.iter().filter(|r| !r.censored) {
            w.write_record([row.center_index.to_string(), row.r.to_string(), row.tail_value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `∫_{X∖B_r(x)} |k(x, y)|² dμ(y)` per center and radius.
///
/// Projection kernels use `k(x, x) − ∫_{B_r(x)} |k(x, y)|² dμ` on a grid of
/// `B_{r_max}(x)`; other kernels need a radial modulus and are integrated
/// radially to infinity. Centers whose grid would exceed the node cap are
/// censored.
pub fn check_wl<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    space: &Space,
    centers: &[Point],
    radii: &[f64],
    quad: &QuadratureRule,
    epsilons: &[f64],
) -> Result<TailReport> {
    nonempty(centers)?;
    check_radii(radii)?;
    for x in centers {
        space.check_point(x)?;
        kernel.check_point(x)?;
    }
    let r_max = *radii.last().expect("nonempty radii");
    let meta = kernel.metadata();
    let per_center: Vec<Vec<(f64, bool)>> = if meta.projection {
        centers
            .par_iter()
            .map(|x| -> Result<Vec<(f64, bool)>> {
                let grid = match quad.ball_grid(space, x, r_max) {
                    Ok(g) => g,
                    Err(Error::Input(_)) => return Ok(vec![(f64::NAN, true); radii.len()]),
                    Err(e) => return Err(e),
                };
                let mut terms: Vec<(f64, f64)> = (0..grid.len())
                    .map(|i| {
                        let y = &grid.nodes[i].0;
                        let v = grid.weights[i] * kernel.measure_density(y) * kernel.eval_unchecked(&x.0, y).norm_sqr();
                        (grid.distances[i], v)
                    })
                    .collect();
                terms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let diag = kernel.diagonal_unchecked(&x.0) * kernel.measure_density(&x.0);
                let mut out = Vec::with_capacity(radii.len());
                let (mut idx, mut inner) = (0, 0.0);
                for &r in radii {
                    while idx < terms.len() && terms[idx].0 < r {
                        inner += terms[idx].1;
                        idx += 1;
                    }
                    out.push(((diag - inner).max(0.0), false));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?
    } else {
        if kernel.radial_modulus(0.0).is_none() {
            return Err(Error::input(format!(
                "weak localization of {} needs a projection kernel or a radial modulus",
                meta.label
            )));
        }
        centers
            .iter()
            .map(|x| {
                let rho = kernel.measure_density(&x.0);
                radii
                    .iter()
                    .map(|&r| {
                        let t = radial_tail_integral(space, r, |t| rho * kernel.radial_modulus(t).unwrap().powi(2));
                        (t, false)
                    })
                    .collect()
            })
            .collect()
    };
    Ok(TailReport::assemble(TailKind::WeakLocalization, radii, per_center, epsilons))
}

/// `Σ_{λ ∈ Λ∖B_r(x)} |k(x, λ)|²`, censored where `B_r(x)` leaves the
/// window of `Λ`.
pub fn check_hap<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    lambda: &PointSet,
    space: &Space,
    centers: &[Point],
    radii: &[f64],
    epsilons: &[f64],
) -> Result<TailReport> {
    nonempty(centers)?;
    check_radii(radii)?;
    for x in centers {
        space.check_point(x)?;
        kernel.check_point(x)?;
    }
    let per_center: Vec<Vec<(f64, bool)>> = centers
        .par_iter()
        .map(|x| {
            let mut terms: Vec<(f64, f64)> = lambda
                .points()
                .iter()
                .map(|p| (space.dist(&x.0, &p.0), kernel.eval_unchecked(&x.0, &p.0).norm_sqr()))
                .collect();
            // far terms first so the running sums accumulate small values first
            terms.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut out = vec![(0.0, false); radii.len()];
            let (mut idx, mut acc) = (0, 0.0);
            for (j, &r) in radii.iter().enumerate().rev() {
                while idx < terms.len() && terms[idx].0 >= r {
                    acc += terms[idx].1;
                    idx += 1;
                }
                out[j] = (acc, !lambda.covers_ball(space, x, r));
            }
            out
        })
        .collect();
    Ok(TailReport::assemble(TailKind::HomogeneousApproximation, radii, per_center, epsilons))
}

/// `count` pairs `(x, y)` with `d(x, y)` spread evenly over the dyadic
/// shells `[2^j, 2^{j+1})`, `j = −4, …, 6`, around the given base points.
pub fn stratified_pairs(space: &Space, bases: &[Point], count: usize, seed: u64) -> Result<Vec<(Point, Point)>> {
    nonempty(bases)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shells: Vec<i32> = (-4..=6).collect();
    let dim = space.coord_dim();
    Ok((0..count)
        .map(|i| {
            let j = shells[i % shells.len()];
            let lo = 2f64.powi(j);
            let t = match space {
                Space::IntegerWordMetric { .. } => (lo + rng.random::<f64>() * lo).round().max(1.0),
                _ => lo + rng.random::<f64>() * lo,
            };
            let dir: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let x = bases[i % bases.len()].clone();
            let y = point_at_distance(space, &x, t, &dir);
            (x, y)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub sigma: f64,
    pub constant: f64,
    pub pairs_checked: usize,
    /// `max |k(x, y)| (1 + d)^σ / C` over the pairs.
    pub worst_ratio: f64,
    pub decay_holds: bool,
    pub radii: Vec<f64>,
    /// `sup_x ∫_{X∖B_r(x)} (1 + d(x, y))^{-2σ} dμ(y)`; infinite when divergent.
    pub tail_integral_curve: Vec<f64>,
    pub tail_diverges: bool,
    pub tail_eps: f64,
    pub pass: bool,
}

/// Audits `|k(x, y)| ≤ C (1 + d(x, y))^{-σ}` on the given pairs together
/// with the vanishing of the `2σ` tail integral. The tail integral depends on
/// the center only through the space's homogeneity, so it is evaluated once
/// per radius. `pass` also requires the last tail value to be `≤ tail_eps`.
#[allow(clippy::too_many_arguments)]
pub fn check_poly_decay_hypothesis<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    space: &Space,
    sigma: f64,
    constant: f64,
    pairs: &[(Point, Point)],
    radii: &[f64],
    tail_eps: f64,
) -> Result<DecayReport> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::input(format!("decay exponent must be positive, got {sigma}")));
    }
    if !(constant > 0.0) {
        return Err(Error::input(format!("decay constant must be positive, got {constant}")));
    }
    check_radii(radii)?;
    for (x, y) in pairs {
        space.check_point(x)?;
        space.check_point(y)?;
        kernel.check_point(x)?;
    }
    let worst_ratio = pairs
        .par_iter()
        .map(|(x, y)| {
            let d = space.dist(&x.0, &y.0);
            kernel.eval_unchecked(&x.0, &y.0).norm() * (1.0 + d).powf(sigma) / constant
        })
        .reduce(|| 0.0, f64::max);
    let decay_holds = worst_ratio <= 1.0 + 1e-12;
    let tail_integral_curve: Vec<f64> = radii
        .iter()
        .map(|&r| radial_tail_integral(space, r, |t| (1.0 + t).powf(-2.0 * sigma)))
        .collect();
    let tail_diverges = tail_integral_curve.iter().any(|v| !v.is_finite());
    let decreasing = tail_integral_curve.windows(2).all(|w| w[1] <= w[0]);
    let pass = decay_holds
        && !tail_diverges
        && decreasing
        && tail_integral_curve.last().is_some_and(|v| *v <= tail_eps);
    Ok(DecayReport {
        sigma,
        constant,
        pairs_checked: pairs.len(),
        worst_ratio,
        decay_holds,
        radii: radii.to_vec(),
        tail_integral_curve,
        tail_diverges,
        tail_eps,
        pass,
    })
}
