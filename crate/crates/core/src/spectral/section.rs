use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{localization_operator, SpectralReport};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet, QuadratureRule, Space};
use crate::kernels::ReproducingKernel;
use crate::linalg::{eigh, HermitianMatrix};

/// Default eigenvalue threshold selecting the concentrated subspace.
pub const DEFAULT_TAU: f64 = 0.5;

/// Finite-section model of the sampling problem on `B_r(center)`.
///
/// `V_τ` is spanned by `f_k = λ_k^{-1/2} Σ_i √w_i u_{k,i} k_{x_i}` for the
/// localization eigenpairs `(λ_k, u_k)` with `λ_k ≥ τ`; these are exactly
/// orthonormal in the kernel's space, so `V_τ ≅ C^m` isometrically.
#[derive(Clone, Debug)]
pub struct FiniteSection {
    pub center: Point,
    pub r: f64,
    pub tau: f64,
    pub margin: f64,
    pub nodes: Vec<Point>,
    /// `n × m`; column `k` holds the coefficients of `f_k` on `k_{x_i}`.
    pub basis: Mat<Complex64>,
    /// Localization eigenvalues of the retained vectors.
    pub concentrations: Vec<f64>,
    pub samples_at: Vec<Point>,
    /// `p × m`; `F[λ, k] = f_k(λ)`.
    pub samples: Mat<Complex64>,
    /// `S = F* F`, the frame operator of `{P k_λ}` on `V_τ`.
    pub frame_operator: HermitianMatrix,
    /// Spectrum of `S`; `lambda_min`/`lambda_max` are `A_est`/`B_est`.
    pub report: SpectralReport,
    pub accuracy_warning: bool,
}

impl FiniteSection {
    pub fn dimension(&self) -> usize {
        self.concentrations.len()
    }

    pub fn a_est(&self) -> f64 {
        self.report.lambda_min
    }

    pub fn b_est(&self) -> f64 {
        self.report.lambda_max
    }

    /// `(f_k(y))_k`.
    pub fn basis_values<K: ReproducingKernel + ?Sized>(&self, kernel: &K, y: &[f64]) -> Vec<Complex64> {
        let row: Vec<Complex64> = self.nodes.iter().map(|x| kernel.eval_unchecked(y, &x.0)).collect();
        (0..self.dimension())
            .map(|k| (0..row.len()).map(|i| row[i] * self.basis[(i, k)]).sum())
            .collect()
    }
}

/// Extreme values of `Σ_{λ ∈ Λ ∩ B_{r+margin}} |f(λ)|²` over unit `f ∈ V_τ`.
#[allow(clippy::too_many_arguments)]
pub fn frame_bounds_finite_section<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    lambda: &PointSet,
    space: &Space,
    center: &Point,
    r: f64,
    tau: f64,
    margin: f64,
    quad: &QuadratureRule,
) -> Result<FiniteSection> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::input(format!("tau must lie in (0, 1), got {tau}")));
    }
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(Error::input(format!("margin must be nonnegative, got {margin}")));
    }
    space.check_point(center)?;
    if !lambda.covers_ball(space, center, r + margin) {
        return Err(Error::Censored(format!(
            "B_{}({center}) exceeds the point-set window",
            r + margin
        )));
    }
    let op = localization_operator(kernel, space, center, r, quad)?;
    let eig = eigh(&op.matrix);
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] >= tau).collect();
    if keep.is_empty() {
        return Err(Error::DegenerateWindow(format!(
            "no localization eigenvalue reaches tau = {tau} on B_{r}({center})"
        )));
    }
    let n = op.grid.len();
    let m = keep.len();
    let basis = Mat::from_fn(n, m, |i, k| {
        let col = keep[k];
        eig.vectors[(i, col)] * (op.sqrt_weights[i] / eig.values[col].sqrt())
    });
    let samples_at: Vec<Point> = lambda
        .points()
        .iter()
        .filter(|p| space.dist(&p.0, &center.0) < r + margin)
        .cloned()
        .collect();
    let nodes = op.grid.nodes.clone();
    // K[λ, i] = k(λ, x_i)
    let rows: Vec<Vec<Complex64>> = samples_at
        .par_iter()
        .map(|p| nodes.iter().map(|x| kernel.eval_unchecked(&p.0, &x.0)).collect())
        .collect();
    let kmat = Mat::from_fn(samples_at.len(), n, |a, i| rows[a][i]);
    let samples = &kmat * &basis;
    let frame = samples.adjoint() * &samples;
    let frame_operator = HermitianMatrix::from_upper_fn(m, |i, j| {
        if i == j {
            Complex64::new(frame[(i, i)].re, 0.0)
        } else {
            frame[(i, j)]
        }
    })?;
    let report = SpectralReport::from_matrix(&frame_operator)?;
    Ok(FiniteSection {
        center: center.clone(),
        r,
        tau,
        margin,
        nodes,
        basis,
        concentrations: keep.iter().map(|&k| eig.values[k]).collect(),
        samples_at,
        samples,
        frame_operator,
        report,
        accuracy_warning: op.accuracy_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Provenance, Window};
    use crate::kernels::Kernel;

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
    fn basis_is_orthonormal() {
        let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
        let quad = QuadratureRule::new(0.1).unwrap();
        let fs = frame_bounds_finite_section(&k, &lattice_1d(1.0, 40.0), &line(), &Point::new([0.0]), 8.0, 0.5, 2.0, &quad).unwrap();
        // Gram of the f_k in the kernel space: c* K c
        let n = fs.nodes.len();
        let kn = Mat::from_fn(n, n, |i, j| k.eval_unchecked(&fs.nodes[i].0, &fs.nodes[j].0));
        let g = fs.basis.adjoint() * &kn * &fs.basis;
        for a in 0..fs.dimension() {
            for b in 0..fs.dimension() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g[(a, b)] - want).norm() < 1e-9);
            }
        }
        let v = fs.basis_values(&k, &fs.samples_at[3].0);
        for (c, s) in v.iter().enumerate() {
            assert!((s - fs.samples[(3, c)]).norm() < 1e-12);
        }
        assert!((fs.dimension() as f64 - 16.0).abs() <= 2.0);
    }

    #[test]
    fn orthonormal_sampling_is_nearly_tight() {
        let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
        let quad = QuadratureRule::new(0.1).unwrap();
        let fs = frame_bounds_finite_section(&k, &lattice_1d(1.0, 60.0), &line(), &Point::new([0.0]), 16.0, 0.5, 4.0, &quad).unwrap();
        assert!(fs.b_est() <= 1.0 + 0.05, "{}", fs.b_est());
        assert!(fs.a_est() > 0.5);
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = Kernel::PaleyWienerBox { widths: vec![1.0] };
        let quad = QuadratureRule::new(0.1).unwrap();
        let set = lattice_1d(1.0, 20.0);
        let c = Point::new([0.0]);
        assert!(matches!(
            frame_bounds_finite_section(&k, &set, &line(), &c, 18.0, 0.5, 4.5, &quad),
            Err(Error::Censored(_))
        ));
        assert!(frame_bounds_finite_section(&k, &set, &line(), &c, 4.0, 1.5, 1.0, &quad).is_err());
        assert!(matches!(
            frame_bounds_finite_section(&k, &set, &line(), &c, 0.05, 0.99, 0.0, &quad),
            Err(Error::DegenerateWindow(_))
        ));
    }
}
