use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{gram, FiniteSection};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};
use crate::kernels::ReproducingKernel;
use crate::linalg::{eigh, solve_hpd, HermitianMatrix};

/// Relative eigenvalue floor below which an inversion is refused.
const SINGULAR_FLOOR: f64 = 1e-13;
/// `λ_min / λ_max` below this marks a model as near-singular.
const NEAR_SINGULAR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMode {
    Riesz,
    FrameFiniteSection,
}

/// Canonical duals of `{k_λ}` (Riesz mode) or of `{P k_λ}` inside a
/// finite section (frame mode).
#[derive(Clone, Debug)]
pub struct DualFrameModel {
    pub mode: DualMode,
    pub points: Vec<Point>,
    /// Riesz mode: `G_{μλ} = k(μ, λ)`. Frame mode: the frame operator `S`.
    pub gram: HermitianMatrix,
    /// Riesz mode: `(G + ridge)^{-1}`, so `g_λ = Σ_μ D[μ, λ] k_μ`.
    /// Frame mode: `m × p`, column `λ` is `g_λ` in the section's basis.
    pub dual_coeffs: Mat<Complex64>,
    pub ridge: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub near_singular: bool,
    /// Frame mode: coefficients `a_λ` of `P k_λ` (columns, `m × p`).
    pub projected: Option<Mat<Complex64>>,
}

impl DualFrameModel {
    /// `sup_λ ‖g_λ‖`.
    pub fn max_dual_norm(&self) -> f64 {
        let d = &self.dual_coeffs;
        match self.mode {
            DualMode::Riesz => {
                // ‖g_λ‖² = (G^{-1} G G^{-1})_{λλ}, which is (G^{-1})_{λλ} without a ridge
                let g = self.gram.as_matrix();
                let gd = g * d;
                (0..d.ncols())
                    .map(|l| {
                        (0..d.nrows())
                            .map(|mu| (d[(mu, l)].conj() * gd[(mu, l)]).re)
                            .sum::<f64>()
                            .max(0.0)
                            .sqrt()
                    })
                    .fold(0.0, f64::max)
            }
            DualMode::FrameFiniteSection => (0..d.ncols())
                .map(|l| (0..d.nrows()).map(|k| d[(k, l)].norm_sqr()).sum::<f64>().sqrt())
                .fold(0.0, f64::max),
        }
    }
}

/// Builds the dual system. Riesz mode uses the Gram of `lambda`; frame mode
/// uses the finite section `section` (required in that mode).
pub fn dual_system<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    lambda: &PointSet,
    mode: DualMode,
    ridge: f64,
    section: Option<&FiniteSection>,
) -> Result<DualFrameModel> {
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(Error::input(format!("ridge must be nonnegative, got {ridge}")));
    }
    match mode {
        DualMode::Riesz => {
            let g = gram(kernel, lambda)?;
            let reg = g.add_ridge(ridge);
            let eig = eigh(&reg);
            let lambda_max = *eig.values.last().ok_or_else(|| Error::DegenerateWindow("empty point set".into()))?;
            let inv = solve_hpd(&eig, &Mat::identity(g.order(), g.order()), SINGULAR_FLOOR * lambda_max)?;
            Ok(DualFrameModel {
                mode,
                points: lambda.points().to_vec(),
                lambda_min: eig.values[0],
                lambda_max,
                near_singular: eig.values[0] < NEAR_SINGULAR * lambda_max,
                gram: g,
                dual_coeffs: inv,
                ridge,
                projected: None,
            })
        }
        DualMode::FrameFiniteSection => {
            let fs = section.ok_or_else(|| Error::input("frame mode needs a finite section"))?;
            let s = fs.frame_operator.add_ridge(ridge);
            let eig = eigh(&s);
            let lambda_max = *eig.values.last().expect("nonempty section");
            // a_λ = conj(F[λ, ·]) as columns
            let a = fs.samples.adjoint().to_owned();
            let duals = solve_hpd(&eig, &a, SINGULAR_FLOOR * lambda_max)?;
            Ok(DualFrameModel {
                mode,
                points: fs.samples_at.clone(),
                lambda_min: eig.values[0],
                lambda_max,
                near_singular: eig.values[0] < NEAR_SINGULAR * lambda_max,
                gram: fs.frame_operator.clone(),
                dual_coeffs: duals,
                ridge,
                projected: Some(a),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualIdentityReport {
    pub mode: DualMode,
    pub probes: usize,
    /// Riesz mode: `⟨P k_y, k_y⟩ = u* G^{-1} u` per probe.
    /// Frame mode: `Σ_λ (P k_λ)(y) conj(g_λ(y))` per probe.
    pub reproduction: Vec<f64>,
    /// Riesz mode: violation of `0 ≤ ⟨P k_y, k_y⟩ ≤ k(y, y)` (max, ≥ 0).
    /// Frame mode: max `|Σ_λ … − k_V(y, y)|`.
    pub reproduction_residual: f64,
    /// Frame mode: max `k(y, y) − k_V(y, y)`, the mass outside the section.
    pub section_deficit: Option<f64>,
    /// Riesz mode: `max |G D − I|`; frame mode: `max |S D − A|`.
    pub biorthogonality_residual: f64,
    /// `⟨k_λ, g_λ⟩` (Riesz) or `⟨P k_λ, g_λ⟩` (frame) for every `λ`.
    pub pairings: Vec<f64>,
    pub max_pairing: f64,
    /// `sup_y Σ_λ |g_λ(y)|²` over the probes.
    pub c42_sup: f64,
    /// `sup_λ ‖g_λ‖`.
    pub c43_sup: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks the dual-frame identities at the probes. Probes must lie inside
/// the reliable window: farther than `edge_guard` from the boundary of
/// `lambda`'s window (Riesz mode) or inside the section ball (frame mode).
pub fn dual_identities_check<K: ReproducingKernel + ?Sized>(
    model: &DualFrameModel,
    kernel: &K,
    lambda: &PointSet,
    probes: &[Point],
    edge_guard: f64,
    section: Option<&FiniteSection>,
    tol: f64,
) -> Result<DualIdentityReport> {
    if probes.is_empty() {
        return Err(Error::input("dual identity check needs probe points"));
    }
    for y in probes {
        kernel.check_point(y)?;
    }
    let p = model.points.len();
    match model.mode {
        DualMode::Riesz => {
            let w = lambda.window();
            for y in probes {
                let d: f64 = y.0.iter().zip(&w.center.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                if d > w.radius - edge_guard {
                    return Err(Error::Censored(format!("probe {y} lies within {edge_guard} of the window edge")));
                }
            }
            let g = model.gram.as_matrix();
            let d = &model.dual_coeffs;
            let gd = g * d;
            let mut biorth: f64 = 0.0;
            for i in 0..p {
                for j in 0..p {
                    let want = if i == j { 1.0 } else { 0.0 };
                    biorth = biorth.max((gd[(i, j)] - want).norm());
                }
            }
            // ⟨k_λ, g_λ⟩ = conj(g_λ(λ)) = conj((G D)_{λλ})
            let pairings: Vec<f64> = (0..p).map(|l| gd[(l, l)].re).collect();
            let mut reproduction = Vec::with_capacity(probes.len());
            let mut violation: f64 = 0.0;
            let mut c42: f64 = 0.0;
            for y in probes {
                let u = Mat::from_fn(p, 1, |l, _| kernel.eval_unchecked(&model.points[l].0, &y.0));
                let du = d * &u;
                let q: f64 = (0..p).map(|l| (u[(l, 0)].conj() * du[(l, 0)]).re).sum();
                let kyy = kernel.diagonal_unchecked(&y.0);
                violation = violation.max(-q).max(q - kyy);
                c42 = c42.max((0..p).map(|l| du[(l, 0)].norm_sqr()).sum());
                reproduction.push(q);
            }
            let max_pairing = pairings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pass = violation <= tol && biorth <= tol && pairings.iter().all(|v| (v - 1.0).abs() <= tol) && c42.is_finite();
            Ok(DualIdentityReport {
                mode: model.mode,
                probes: probes.len(),
                reproduction,
                reproduction_residual: violation.max(0.0),
                section_deficit: None,
                biorthogonality_residual: biorth,
                pairings,
                max_pairing,
                c42_sup: c42,
                c43_sup: model.max_dual_norm(),
                tol,
                pass,
            })
        }
        DualMode::FrameFiniteSection => {
            let fs = section.ok_or_else(|| Error::input("frame mode needs the finite section"))?;
            for y in probes {
                let d: f64 = y.0.iter().zip(&fs.center.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                if d > fs.r - edge_guard {
                    return Err(Error::Censored(format!("probe {y} lies outside the reliable part of the section")));
                }
            }
            let a = model.projected.as_ref().expect("frame model keeps a_λ");
            let dmat = &model.dual_coeffs;
            let m = a.nrows();
            let sd = model.gram.as_matrix() * dmat;
            let mut biorth: f64 = 0.0;
            for k in 0..m {
                for l in 0..p {
                    biorth = biorth.max((sd[(k, l)] - a[(k, l)]).norm());
                }
            }
            // ⟨P k_λ, g_λ⟩ = g_λ* a_λ
            let pairings: Vec<f64> = (0..p)
                .map(|l| (0..m).map(|k| dmat[(k, l)].conj() * a[(k, l)]).sum::<Complex64>().re)
                .collect();
            let mut reproduction = Vec::with_capacity(probes.len());
            let mut residual: f64 = 0.0;
            let mut deficit: f64 = 0.0;
            let mut c42: f64 = 0.0;
            for y in probes {
                // b = coordinates of P k_y: b_k = conj(f_k(y))
                let b: Vec<Complex64> = fs.basis_values(kernel, &y.0).into_iter().map(|v| v.conj()).collect();
                let kv: f64 = b.iter().map(|v| v.norm_sqr()).sum();
                let mut total = Complex64::new(0.0, 0.0);
                let mut energy = 0.0;
                for l in 0..p {
                    // (P k_λ)(y) = ⟨P k_λ, P k_y⟩ = b* a_λ; g_λ(y) = b* g_λ
                    let pk: Complex64 = (0..m).map(|k| b[k].conj() * a[(k, l)]).sum();
                    let gy: Complex64 = (0..m).map(|k| b[k].conj() * dmat[(k, l)]).sum();
                    total += pk * gy.conj();
                    energy += gy.norm_sqr();
                }
                residual = residual.max((total.re - kv).abs()).max(total.im.abs());
                deficit = deficit.max(kernel.diagonal_unchecked(&y.0) - kv);
                c42 = c42.max(energy);
                reproduction.push(total.re);
            }
            let max_pairing = pairings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pass = residual <= tol && biorth <= tol && max_pairing <= 1.0 + tol && c42.is_finite();
            Ok(DualIdentityReport {
                mode: model.mode,
                probes: probes.len(),
                reproduction,
                reproduction_residual: residual,
                section_deficit: Some(deficit),
                biorthogonality_residual: biorth,
                pairings,
                max_pairing,
                c42_sup: c42,
                c43_sup: model.max_dual_norm(),
                tol,
                pass,
            })
        }
    }
}
