//! Reproducing kernels with closed forms and the checks of their axioms.

mod checks;

pub use checks::{
    check_axiom_d, check_hap, check_poly_decay_hypothesis, check_wl, stratified_pairs, witness_diagonal_bound,
    AxiomDReport, DecayReport, EpsilonRadius, TailKind, TailReport, TailRow, WitnessBound, DEFAULT_EPSILONS,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Space};

/// `sin(πt)/(πt)`, with the removable singularity filled in.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - (PI * t).powi(2) / 6.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// How `|k(x, y)|` falls off with `d(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    /// `O(d^{-1})` per coordinate.
    Sinc,
    Gaussian,
    Polynomial,
    /// `sech²(d/2)`, exponential in the metric.
    Exponential,
}

/// Everything a report needs to know about a kernel besides its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelMetadata {
    pub label: String,
    pub known_diagonal: Option<f64>,
    pub decay_class: DecayClass,
    pub formal_dimension: Option<f64>,
    /// `∫ |k(x, y)|² dμ(y) = k(x, x)`: the kernel of a closed subspace of
    /// `L²(μ)` (or of a weighted `L²` for normalized kernels).
    pub projection: bool,
    /// Set for kernels that exist to exercise the axiom checkers only.
    pub axiom_test_kernel: bool,
}

/// Pointwise evaluator. Coordinates passed to the `_unchecked` methods must
/// already match [`ReproducingKernel::coord_dim`].
pub trait ReproducingKernel: Send + Sync {
    fn coord_dim(&self) -> usize;

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Complex64;

    fn diagonal_unchecked(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x, x).re
    }

    fn metadata(&self) -> KernelMetadata;

    /// `φ` with `|k(x, y)| = φ(d(x, y))` for the intended space, when the
    /// modulus is radial.
    fn radial_modulus(&self, t: f64) -> Option<f64>;

    /// Distance over which the kernel changes appreciably; quadrature steps
    /// should stay well below it.
    fn decay_scale(&self) -> f64;

    /// Density of the measure in which the kernel reproduces, relative to
    /// the space's `μ`.
    fn measure_density(&self, _x: &[f64]) -> f64 {
        1.0
    }

    fn eval(&self, x: &Point, y: &Point) -> Result<Complex64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(&x.0, &y.0))
    }

    fn diagonal(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.diagonal_unchecked(&x.0))
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.coord_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.coord_dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }
}

/// The built-in kernels.
///
/// Points are real coordinate vectors: `Cⁿ` is `(Re z₁, Im z₁, …)`, phase
/// space is `(x, ω)`, and the half-plane is `(Re z, Im z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    /// `∏_j W_j sinc(W_j (x_j − y_j))`: the Paley–Wiener space with spectrum
    /// `∏ [−W_j/2, W_j/2]`.
    PaleyWienerBox { widths: Vec<f64> },
    /// `(2/π)ⁿ exp(z·w̄ − |z|²/2 − |w|²/2)` on `Cⁿ`.
    FockGaussianNormalized { n: usize },
    /// `conj⟨π(z)g, π(w)g⟩` for `g(t) = 2^{1/4} e^{-πt²}` and
    /// `π(x, ω)f(t) = e^{2πiωt} f(t − x)`; formal dimension 1.
    GaborGaussian,
    /// `(1 + |x − y|²)^{-σ}` on `R^d`.
    SyntheticPolyDecay { sigma: f64, dim: usize },
    /// `−Im z Im w / (z − w̄)²`: the weighted Bergman kernel of the
    /// half-plane for `dμ = dA/(π y²)`; `|k| = sech²(d/2)/4`.
    HyperbolicBergman,
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::PaleyWienerBox { widths } => {
                if widths.is_empty() {
                    return Err(Error::input("Paley–Wiener box needs at least one width"));
                }
                if widths.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::input(format!("Paley–Wiener widths must be finite and nonnegative, got {widths:?}")));
                }
            }
            Kernel::FockGaussianNormalized { n } if *n == 0 => return Err(Error::input("Fock kernel needs n ≥ 1")),
            Kernel::SyntheticPolyDecay { sigma, dim } => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::input(format!("decay exponent must be positive, got {sigma}")));
                }
                if *dim == 0 {
                    return Err(Error::input("synthetic kernel needs dim ≥ 1"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Rejects kernel/space pairs with mismatched coordinates or geometry.
    pub fn check_space(&self, space: &Space) -> Result<()> {
        self.validate()?;
        if self.coord_dim() != space.coord_dim() {
            return Err(Error::input(format!(
                "kernel {} has {} coordinates but {} has {}",
                self.metadata().label,
                self.coord_dim(),
                space.name(),
                space.coord_dim()
            )));
        }
        let hyperbolic_space = matches!(space, Space::HyperbolicUpperHalfPlane);
        let hyperbolic_kernel = matches!(self, Kernel::HyperbolicBergman);
        if hyperbolic_space != hyperbolic_kernel {
            return Err(Error::input(format!(
                "kernel {} cannot live on {}",
                self.metadata().label,
                space.name()
            )));
        }
        Ok(())
    }

    /// Norm bound `C` of the unit-at-`x` witnesses `f_x = k_x / k(x, x)`:
    /// `‖f_x‖ = k(x, x)^{-1/2}`, infinite when the diagonal vanishes.
    pub fn witness_norm_bound(&self) -> f64 {
        match self.metadata().known_diagonal {
            Some(d) if d > 0.0 => d.powf(-0.5),
            _ => f64::INFINITY,
        }
    }
}

impl ReproducingKernel for Kernel {
    fn coord_dim(&self) -> usize {
        match self {
            Kernel::PaleyWienerBox { widths } => widths.len(),
            Kernel::FockGaussianNormalized { n } => 2 * n,
            Kernel::GaborGaussian | Kernel::HyperbolicBergman => 2,
            Kernel::SyntheticPolyDecay { dim, .. } => *dim,
        }
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Complex64 {
        match self {
            Kernel::PaleyWienerBox { widths } => {
                let v = widths
                    .iter()
                    .zip(x.iter().zip(y))
                    .map(|(w, (a, b))| w * sinc(w * (a - b)))
                    .product::<f64>();
                Complex64::new(v, 0.0)
            }
            Kernel::FockGaussianNormalized { n } => {
                // z·w̄ − |z|²/2 − |w|²/2 = −|z − w|²/2 + i Σ Im(z_j w̄_j)
                let mut re = 0.0;
                let mut im = 0.0;
                for j in 0..*n {
                    let (a, b) = (x[2 * j], x[2 * j + 1]);
                    let (c, d) = (y[2 * j], y[2 * j + 1]);
                    re -= ((a - c).powi(2) + (b - d).powi(2)) / 2.0;
                    im += b * c - a * d;
                }
                Complex64::from_polar((2.0 / PI).powi(*n as i32) * re.exp(), im)
            }
            Kernel::GaborGaussian => {
                let (dx, dw) = (x[0] - y[0], x[1] - y[1]);
                let modulus = (-PI * (dx * dx + dw * dw) / 2.0).exp();
                Complex64::from_polar(modulus, -PI * dw * (x[0] + y[0]))
            }
            Kernel::SyntheticPolyDecay { sigma, .. } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                Complex64::new((1.0 + d2).powf(-sigma), 0.0)
            }
            Kernel::HyperbolicBergman => {
                let denom = Complex64::new(x[0] - y[0], x[1] + y[1]);
                -x[1] * y[1] / (denom * denom)
            }
        }
    }

    fn diagonal_unchecked(&self, x: &[f64]) -> f64 {
        self.metadata().known_diagonal.unwrap_or_else(|| self.eval_unchecked(x, x).re)
    }

    fn metadata(&self) -> KernelMetadata {
        let (label, known_diagonal, decay_class, formal_dimension, projection) = match self {
            Kernel::PaleyWienerBox { widths } => (
                format!("paley_wiener_box({widths:?})"),
                Some(widths.iter().product()),
                DecayClass::Sinc,
                None,
                true,
            ),
            Kernel::FockGaussianNormalized { n } => (
                format!("fock_gaussian_normalized({n})"),
                Some((2.0 / PI).powi(*n as i32)),
                DecayClass::Gaussian,
                None,
                true,
            ),
            Kernel::GaborGaussian => ("gabor_gaussian".into(), Some(1.0), DecayClass::Gaussian, Some(1.0), true),
            Kernel::SyntheticPolyDecay { sigma, dim } => (
                format!("synthetic_poly_decay(sigma={sigma}, dim={dim})"),
                Some(1.0),
                DecayClass::Polynomial,
                None,
                false,
            ),
            Kernel::HyperbolicBergman => ("hyperbolic_bergman".into(), Some(0.25), DecayClass::Exponential, None, true),
        };
        KernelMetadata {
            label,
            known_diagonal,
            decay_class,
            formal_dimension,
            projection,
            axiom_test_kernel: matches!(self, Kernel::SyntheticPolyDecay { .. }),
        }
    }

    fn decay_scale(&self) -> f64 {
        match self {
            Kernel::PaleyWienerBox { widths } => 1.0 / widths.iter().copied().fold(0.0, f64::max),
            Kernel::GaborGaussian => 1.0 / PI.sqrt(),
            _ => 1.0,
        }
    }

    fn radial_modulus(&self, t: f64) -> Option<f64> {
        match self {
            Kernel::PaleyWienerBox { widths } if widths.len() == 1 => Some((widths[0] * sinc(widths[0] * t)).abs()),
            Kernel::PaleyWienerBox { .. } => None,
            Kernel::FockGaussianNormalized { n } => Some((2.0 / PI).powi(*n as i32) * (-t * t / 2.0).exp()),
            Kernel::GaborGaussian => Some((-PI * t * t / 2.0).exp()),
            Kernel::SyntheticPolyDecay { sigma, .. } => Some((1.0 + t * t).powf(-sigma)),
            Kernel::HyperbolicBergman => Some(0.25 / (t / 2.0).cosh().powi(2)),
        }
    }
}

/// `k̃(x, y) = k(x, y) / (ψ(x) ψ(y))` with `ψ(x) = k(x, x)^{1/2}`; it
/// reproduces on `{f/ψ}` in `L²(ψ² μ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedKernel {
    pub base: Kernel,
}

/// Normalizes `kernel`; fails when its diagonal vanishes.
pub fn normalize(kernel: &Kernel) -> Result<NormalizedKernel> {
    kernel.validate()?;
    let probe = Point::origin(kernel.coord_dim());
    let probe = match kernel {
        Kernel::HyperbolicBergman => Point::new([0.0, 1.0]),
        _ => probe,
    };
    let diagonal = kernel.diagonal_unchecked(&probe.0);
    if !(diagonal > 0.0) {
        return Err(Error::DegenerateKernel {
            point: probe.0,
            diagonal,
        });
    }
    Ok(NormalizedKernel { base: kernel.clone() })
}

impl NormalizedKernel {
    /// Normalizing twice changes nothing.
    pub fn normalize(&self) -> NormalizedKernel {
        self.clone()
    }

    pub fn psi(&self, x: &[f64]) -> f64 {
        self.base.diagonal_unchecked(x).sqrt()
    }
}

impl ReproducingKernel for NormalizedKernel {
    fn coord_dim(&self) -> usize {
        self.base.coord_dim()
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Complex64 {
        self.base.eval_unchecked(x, y) / (self.psi(x) * self.psi(y))
    }

    fn diagonal_unchecked(&self, _x: &[f64]) -> f64 {
        1.0
    }

    fn metadata(&self) -> KernelMetadata {
        let base = self.base.metadata();
        KernelMetadata {
            label: format!("normalized({})", base.label),
            known_diagonal: Some(1.0),
            ..base
        }
    }

    fn radial_modulus(&self, t: f64) -> Option<f64> {
        let d = self.base.metadata().known_diagonal?;
        Some(self.base.radial_modulus(t)? / d)
    }

    fn decay_scale(&self) -> f64 {
        self.base.decay_scale()
    }

    fn measure_density(&self, x: &[f64]) -> f64 {
        self.base.diagonal_unchecked(x)
    }
}
