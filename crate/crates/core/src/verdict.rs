//! Density-versus-trace audit: axiom applicability, empirical classification
//! and the licensed inequality checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    check_ndb, check_wad, count_in_ball, relative_separation, DensityReport, NdbReport, Point, PointSet,
    QuadratureRule, SeparationReport, Space, WadReport,
};
use crate::kernels::{
    check_axiom_d, check_hap, check_poly_decay_hypothesis, check_wl, stratified_pairs, AxiomDReport, DecayReport,
    KernelMetadata, ReproducingKernel, TailReport,
};
use crate::spectral::{averaged_trace, FiniteSection, TraceMode, TraceReport, WindowBound};

pub const SCHEMA_VERSION: u32 = 1;

/// Recorded in every report: the classes are finite-window proxies.
pub const CLASSIFICATION_NOTE: &str = "classes are finite-window proxies: a curve is stable when every \
value clears its floor and max/min stays within stability_ratio, collapsed when first/last reaches \
collapse_factor; interpolation-like tracks lambda_min of the Gram matrix, sampling-like tracks the \
finite-section lower frame bound";

/// Values at or below this (relative to the curve's largest bound) count as
/// numerically zero when measuring decay.
const NUMERICAL_ZERO: f64 = 1e-15;

fn default_tau() -> f64 {
    0.5
}
fn default_slack() -> f64 {
    0.05
}
fn default_wad_tol() -> f64 {
    0.05
}
fn default_floor() -> f64 {
    1e-2
}
fn default_collapse_factor() -> f64 {
    10.0
}
fn default_stability_ratio() -> f64 {
    2.0
}
fn default_margin_fraction() -> f64 {
    0.5
}
fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.01]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Base slack; the density trend adds `max|trend| / r_max`.
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_wad_tol")]
    pub wad_tol: f64,
    #[serde(default = "default_floor")]
    pub riesz_floor: f64,
    #[serde(default = "default_floor")]
    pub frame_floor: f64,
    #[serde(default = "default_collapse_factor")]
    pub collapse_factor: f64,
    #[serde(default = "default_stability_ratio")]
    pub stability_ratio: f64,
    /// Finite-section margin as a fraction of `r`.
    #[serde(default = "default_margin_fraction")]
    pub margin_fraction: f64,
    /// Tail levels the WL and HAP curves must reach.
    #[serde(default = "default_epsilons")]
    pub tail_epsilons: Vec<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            tau: default_tau(),
            slack: default_slack(),
            wad_tol: default_wad_tol(),
            riesz_floor: default_floor(),
            frame_floor: default_floor(),
            collapse_factor: default_collapse_factor(),
            stability_ratio: default_stability_ratio(),
            margin_fraction: default_margin_fraction(),
            tail_epsilons: default_epsilons(),
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::input(format!("threshold {what} out of range: {v}")));
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau", self.tau);
        }
        if !(self.slack >= 0.0) {
            return bad("slack", self.slack);
        }
        if !(self.wad_tol > 0.0) {
            return bad("wad_tol", self.wad_tol);
        }
        if !(self.riesz_floor > 0.0) {
            return bad("riesz_floor", self.riesz_floor);
        }
        if !(self.frame_floor > 0.0) {
            return bad("frame_floor", self.frame_floor);
        }
        if !(self.collapse_factor > 1.0) {
            return bad("collapse_factor", self.collapse_factor);
        }
        if !(self.stability_ratio >= 1.0) {
            return bad("stability_ratio", self.stability_ratio);
        }
        if !(self.margin_fraction >= 0.0) {
            return bad("margin_fraction", self.margin_fraction);
        }
        if self.tail_epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::input("tail epsilons must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDecayPlan {
    pub sigma: f64,
    pub constant: f64,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_decay_radii")]
    pub radii: Vec<f64>,
    /// Falls back to the experiment seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_decay_tail_eps")]
    pub tail_eps: f64,
}

fn default_pairs() -> usize {
    200
}
fn default_decay_radii() -> Vec<f64> {
    vec![1.0, 10.0, 100.0, 1000.0]
}
fn default_decay_tail_eps() -> f64 {
    1e-3
}

/// Everything the axiom audit needs besides the space, kernel and `Λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditPlan {
    pub centers: Vec<Point>,
    pub ndb_radius: f64,
    pub ndb_floor: f64,
    pub wad_radii: Vec<f64>,
    pub wl_radii: Vec<f64>,
    pub hap_radii: Vec<f64>,
    pub separation_rho: f64,
    pub quad: QuadratureRule,
    pub poly_decay: Option<PolyDecayPlan>,
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomLine {
    pub axiom: String,
    pub pass: bool,
    pub censored: bool,
    pub headline: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomAudit {
    pub ndb: NdbReport,
    pub wad: WadReport,
    pub axiom_d: AxiomDReport,
    pub wl: TailReport,
    pub hap: TailReport,
    pub separation: SeparationReport,
    pub poly_decay: Option<DecayReport>,
    pub summary: Vec<AxiomLine>,
    /// NDB, WAD, D, WL, HAP (and the decay hypothesis when audited).
    pub sampling_applicable: bool,
    /// NDB, WAD, D, WL (and the decay hypothesis when audited).
    pub interpolation_applicable: bool,
    pub theorem_applicable: bool,
}

impl AxiomAudit {
    pub fn failed_axioms(&self) -> Vec<String> {
        self.summary.iter().filter(|l| !l.pass).map(|l| l.axiom.clone()).collect()
    }
}

fn last_sup(t: &TailReport) -> f64 {
    t.sup_tail.last().copied().flatten().unwrap_or(f64::NAN)
}

/// Runs every geometry and kernel checker. Censored checks never pass.
pub fn hypothesis_audit<K: ReproducingKernel + ?Sized>(
    space: &Space,
    kernel: &K,
    lambda: &PointSet,
    plan: &AuditPlan,
) -> Result<AxiomAudit> {
    plan.thresholds.validate()?;
    let ndb = check_ndb(space, &plan.centers, plan.ndb_radius, plan.ndb_floor)?;
    let wad = check_wad(space, &plan.centers, &plan.wad_radii, plan.thresholds.wad_tol)?;
    let axiom_d = check_axiom_d(kernel, &plan.centers)?;
    let eps = &plan.thresholds.tail_epsilons;
    let wl = check_wl(kernel, space, &plan.centers, &plan.wl_radii, &plan.quad, eps)?;
    let hap = check_hap(kernel, lambda, space, &plan.centers, &plan.hap_radii, eps)?;
    let separation = relative_separation(lambda, space, plan.separation_rho, &plan.centers)?;
    let poly_decay = match &plan.poly_decay {
        Some(p) => {
            let pairs = stratified_pairs(space, &plan.centers, p.pairs, p.seed.unwrap_or(0))?;
            Some(check_poly_decay_hypothesis(kernel, space, p.sigma, p.constant, &pairs, &p.radii, p.tail_eps)?)
        }
        None => None,
    };
    let mut summary = vec![
        AxiomLine {
            axiom: "NDB".into(),
            pass: ndb.pass,
            censored: false,
            headline: ndb.inf_measure,
        },
        AxiomLine {
            axiom: "WAD".into(),
            pass: wad.pass,
            censored: false,
            headline: wad.final_ratio(),
        },
        AxiomLine {
            axiom: "D".into(),
            pass: axiom_d.pass,
            censored: false,
            headline: axiom_d.c1_est,
        },
        AxiomLine {
            axiom: "WL".into(),
            pass: wl.pass,
            censored: wl.censored > 0,
            headline: last_sup(&wl),
        },
        AxiomLine {
            axiom: "HAP".into(),
            pass: hap.pass,
            censored: hap.censored > 0,
            headline: last_sup(&hap),
        },
        AxiomLine {
            axiom: "separation".into(),
            pass: separation.pass,
            censored: false,
            headline: separation.c_rho,
        },
    ];
    if let Some(d) = &poly_decay {
        summary.push(AxiomLine {
            axiom: "poly_decay".into(),
            pass: d.pass,
            censored: false,
            headline: d.worst_ratio,
        });
    }
    let decay_ok = poly_decay.as_ref().is_none_or(|d| d.pass);
    let interpolation_applicable = ndb.pass && wad.pass && axiom_d.pass && wl.pass && decay_ok;
    let sampling_applicable = interpolation_applicable && hap.pass;
    Ok(AxiomAudit {
        ndb,
        wad,
        axiom_d,
        wl,
        hap,
        separation,
        poly_decay,
        summary,
        sampling_applicable,
        interpolation_applicable,
        theorem_applicable: interpolation_applicable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmpiricalClass {
    SamplingLike,
    InterpolationLike,
    Both,
    Neither,
    Inconclusive,
}

impl std::fmt::Display for EmpiricalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EmpiricalClass::SamplingLike => "sampling-like",
            EmpiricalClass::InterpolationLike => "interpolation-like",
            EmpiricalClass::Both => "both",
            EmpiricalClass::Neither => "neither",
            EmpiricalClass::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStatus {
    /// Every value above the floor and `max/min ≤ stability_ratio`.
    Stable,
    /// First value over last is at least `collapse_factor`.
    Collapsed,
    Unclear,
    /// Fewer than three windows.
    TooShort,
    Missing,
}

/// Lower bounds along a window sequence, judged against `floor`.
pub fn curve_status(values: Option<&[f64]>, floor: f64, th: &Thresholds) -> CurveStatus {
    let Some(v) = values else {
        return CurveStatus::Missing;
    };
    if v.len() < 3 {
        return CurveStatus::TooShort;
    }
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max).abs().max(f64::MIN_POSITIVE);
    let zero = NUMERICAL_ZERO * top.max(1.0);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo >= floor && hi <= th.stability_ratio * lo {
        return CurveStatus::Stable;
    }
    let first = v[0].max(zero);
    let last = v[v.len() - 1].max(zero);
    if first / last >= th.collapse_factor {
        CurveStatus::Collapsed
    } else {
        CurveStatus::Unclear
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: EmpiricalClass,
    pub riesz: CurveStatus,
    pub frame: CurveStatus,
}

/// Maps the Riesz (`λ_min(G)`) and frame (`A_est`) curves to a class. A
/// missing frame curve means only the Riesz side is judged.
pub fn classify_empirically(riesz_curve: Option<&[f64]>, frame_curve: Option<&[f64]>, th: &Thresholds) -> Classification {
    use CurveStatus::*;
    let riesz = curve_status(riesz_curve, th.riesz_floor, th);
    let frame = curve_status(frame_curve, th.frame_floor, th);
    let class = if riesz == TooShort || frame == TooShort || (riesz == Missing && frame == Missing) {
        EmpiricalClass::Inconclusive
    } else {
        match (riesz, frame) {
            (Stable, Stable) => EmpiricalClass::Both,
            (Stable, _) => EmpiricalClass::InterpolationLike,
            (_, Stable) => EmpiricalClass::SamplingLike,
            (Collapsed, Collapsed) | (Collapsed, Missing) | (Missing, Collapsed) => EmpiricalClass::Neither,
            _ => EmpiricalClass::Inconclusive,
        }
    };
    Classification { class, riesz, frame }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionBound {
    pub r: f64,
    pub dimension: usize,
    pub samples: usize,
    pub a_est: f64,
    pub b_est: f64,
    pub accuracy_warning: bool,
}

impl From<&FiniteSection> for SectionBound {
    fn from(fs: &FiniteSection) -> Self {
        SectionBound {
            r: fs.r,
            dimension: fs.dimension(),
            samples: fs.samples_at.len(),
            a_est: fs.a_est(),
            b_est: fs.b_est(),
            accuracy_warning: fs.accuracy_warning,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub density: f64,
    /// `">="` or `"<="`.
    pub relation: String,
    pub trace: f64,
    pub slack: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionFreeRatio {
    pub r: f64,
    pub count: usize,
    pub ball_measure: f64,
    /// `∫_{B_r} k(y, y) dμ(y)`.
    pub diagonal_integral: f64,
    pub density_ratio: f64,
    pub trace_ratio: f64,
    /// `count / diagonal_integral`.
    pub ratio: f64,
}

/// `#(Λ ∩ B_r(x)) / ∫_{B_r(x)} k(y, y) dμ(y)` for each radius.
pub fn dimension_free_ratios<K: ReproducingKernel + ?Sized>(
    space: &Space,
    kernel: &K,
    lambda: &PointSet,
    center: &Point,
    radii: &[f64],
    quad: &QuadratureRule,
) -> Result<Vec<DimensionFreeRatio>> {
    let trace = averaged_trace(kernel, space, std::slice::from_ref(center), radii, quad, TraceMode::Auto)?;
    radii
        .iter()
        .zip(&trace.rows)
        .map(|(&r, row)| {
            let count = count_in_ball(lambda, space, center, r)?.count;
            let ball_measure = space.ball_measure(center, r)?;
            let diagonal_integral = row.sup * ball_measure;
            Ok(DimensionFreeRatio {
                r,
                count,
                ball_measure,
                diagonal_integral,
                density_ratio: count as f64 / ball_measure,
                trace_ratio: row.sup,
                ratio: count as f64 / diagonal_integral,
            })
        })
        .collect()
}

/// Precomputed stage outputs that [`assemble_verdict`] combines.
#[derive(Clone, Debug)]
pub struct VerdictInputs {
    pub experiment_id: String,
    pub space: Space,
    pub kernel: KernelMetadata,
    pub density: DensityReport,
    pub trace: TraceReport,
    pub riesz_curve: Vec<WindowBound>,
    pub frame_curve: Option<Vec<SectionBound>>,
    pub dimension_free_ratios: Vec<DimensionFreeRatio>,
    pub audit: Option<AxiomAudit>,
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub experiment_id: String,
    pub space: Space,
    pub kernel: KernelMetadata,
    pub d_minus: f64,
    pub d_plus: f64,
    pub density_trend_minus: f64,
    pub density_trend_plus: f64,
    pub tr_minus: f64,
    pub tr_plus: f64,
    pub trace_exact: bool,
    pub riesz_curve: Vec<WindowBound>,
    pub frame_curve: Option<Vec<SectionBound>>,
    pub riesz_status: CurveStatus,
    pub frame_status: CurveStatus,
    pub empirical_class: EmpiricalClass,
    pub slack: f64,
    pub inequality_checks: Vec<InequalityCheck>,
    /// No evaluated inequality check is violated.
    pub consistent: bool,
    pub dimension_free_ratios: Vec<DimensionFreeRatio>,
    pub thresholds: Thresholds,
    pub theorem_applicable: Option<bool>,
    pub notes: Vec<String>,
    pub audit: Option<AxiomAudit>,
}

pub fn assemble_verdict(inputs: VerdictInputs) -> VerdictReport {
    let th = &inputs.thresholds;
    let riesz_values: Vec<f64> = inputs.riesz_curve.iter().map(|w| w.lambda_min).collect();
    let frame_values: Option<Vec<f64>> = inputs.frame_curve.as_ref().map(|c| c.iter().map(|s| s.a_est).collect());
    let cls = classify_empirically(
        (!riesz_values.is_empty()).then_some(riesz_values.as_slice()),
        frame_values.as_deref(),
        th,
    );
    let r_max = inputs.density.rows.last().map_or(f64::INFINITY, |r| r.r);
    let trend = inputs.density.trend_minus.abs().max(inputs.density.trend_plus.abs());
    let slack = th.slack + trend / r_max;
    let (d_minus, d_plus) = (inputs.density.d_minus_est, inputs.density.d_plus_est);
    let (tr_minus, tr_plus) = (inputs.trace.tr_minus_est, inputs.trace.tr_plus_est);
    let mut notes = vec![CLASSIFICATION_NOTE.to_string()];
    let applicable = inputs.audit.as_ref().map(|a| a.theorem_applicable);
    let mut checks = Vec::new();
    if applicable == Some(false) {
        notes.push("axioms fail: no inequality is licensed".into());
    } else if inputs.kernel.axiom_test_kernel {
        notes.push("axiom-test kernel: not a projection kernel, no inequality is licensed".into());
    } else {
        let sampling = matches!(cls.class, EmpiricalClass::SamplingLike | EmpiricalClass::Both);
        let interpolation = matches!(cls.class, EmpiricalClass::InterpolationLike | EmpiricalClass::Both);
        let check = |name: &str, density: f64, trace: f64, lower: bool| InequalityCheck {
            name: name.into(),
            density,
            relation: if lower { ">=" } else { "<=" }.into(),
            trace,
            slack,
            consistent: if lower { density >= trace - slack } else { density <= trace + slack },
        };
        if sampling {
            checks.push(check("sampling_lower", d_minus, tr_minus, true));
            checks.push(check("sampling_upper", d_plus, tr_plus, true));
        }
        if interpolation {
            checks.push(check("interpolation_lower", d_minus, tr_minus, false));
            checks.push(check("interpolation_upper", d_plus, tr_plus, false));
        }
        if checks.is_empty() {
            notes.push(format!("class {}: no inequality is licensed", cls.class));
        }
    }
    if let Some(c) = &inputs.frame_curve {
        if c.iter().any(|s| s.accuracy_warning) {
            notes.push("finite-section grid coarser than a fifth of the kernel's decay scale".into());
        }
    }
    VerdictReport {
        schema_version: SCHEMA_VERSION,
        experiment_id: inputs.experiment_id,
        space: inputs.space,
        kernel: inputs.kernel,
        d_minus,
        d_plus,
        density_trend_minus: inputs.density.trend_minus,
        density_trend_plus: inputs.density.trend_plus,
        tr_minus,
        tr_plus,
        trace_exact: inputs.trace.exact,
        riesz_curve: inputs.riesz_curve,
        frame_curve: inputs.frame_curve,
        riesz_status: cls.riesz,
        frame_status: cls.frame,
        empirical_class: cls.class,
        slack,
        consistent: checks.iter().all(|c| c.consistent),
        inequality_checks: checks,
        dimension_free_ratios: inputs.dimension_free_ratios,
        thresholds: inputs.thresholds,
        theorem_applicable: applicable,
        notes,
        audit: inputs.audit,
    }
}
