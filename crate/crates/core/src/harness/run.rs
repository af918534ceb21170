use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pointsets::generate_pointset;
use crate::error::{Error, Result};
use crate::geometry::{beurling_density, candidate_centers, DensityReport, PointSet};
use crate::kernels::{ReproducingKernel, TailReport};
use crate::spectral::{
    averaged_trace, frame_bounds_finite_section, localization_spectrum, riesz_bounds, SpectralReport, TraceReport,
    WindowBound,
};
use crate::verdict::{
    assemble_verdict, dimension_free_ratios, hypothesis_audit, AuditPlan, AxiomAudit, SectionBound, VerdictInputs,
    VerdictReport, SCHEMA_VERSION,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Audit,
    Density,
    Trace,
    Gram,
    Framebounds,
    Locspec,
    Verdict,
    All,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Audit,
        Stage::Density,
        Stage::Trace,
        Stage::Gram,
        Stage::Framebounds,
        Stage::Locspec,
        Stage::Verdict,
        Stage::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Audit => "audit",
            Stage::Density => "density",
            Stage::Trace => "trace",
            Stage::Gram => "gram",
            Stage::Framebounds => "framebounds",
            Stage::Locspec => "locspec",
            Stage::Verdict => "verdict",
            Stage::All => "all",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::input(format!("unknown stage `{s}`")))
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Process exit statuses of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    /// Ran; every licensed inequality holds.
    Consistent,
    Failure,
    /// A licensed inequality is violated beyond slack.
    Violated,
    /// The audited axioms do not license the theorem.
    NotApplicable,
    InputError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Consistent => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Violated => 2,
            ExitStatus::NotApplicable => 3,
            ExitStatus::InputError => 4,
        }
    }

    pub fn for_error(e: &Error) -> Self {
        if e.is_input() {
            ExitStatus::InputError
        } else {
            ExitStatus::Failure
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub stage: Stage,
    pub out_dir: PathBuf,
    /// Overrides the config seed.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Provenance of one run. Timings differ between runs; everything else is a
/// function of the config and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment_id: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub stage: Stage,
    pub exit_code: i32,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub stage_timings: Vec<StageTiming>,
}

/// `report.json`: the verdict plus the resolved config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    #[serde(flatten)]
    pub verdict: VerdictReport,
    pub config: ExperimentConfig,
}

/// `audit.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditDocument {
    pub schema_version: u32,
    pub experiment_id: String,
    pub audit: AxiomAudit,
    pub config: ExperimentConfig,
}

/// One row of every `*_spectra.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub experiment_id: String,
    /// Coordinates joined by `;`.
    pub center: String,
    pub r: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub trace: f64,
    pub plunge_count: usize,
}

pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub status: ExitStatus,
    pub audit: Option<AxiomAudit>,
    pub report: Option<VerdictReport>,
    /// Written files, relative to the output directory.
    pub files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
    files: Vec<PathBuf>,
    timings: Vec<StageTiming>,
    lambda: Option<PointSet>,
}

impl Ctx {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let v = f(self).map_err(|e| match e {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage: stage.into(),
                source: Box::new(e),
            },
        })?;
        self.timings.push(StageTiming {
            stage: stage.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        Ok(v)
    }

    fn claim(&mut self, rel: PathBuf) -> Result<PathBuf> {
        let path = self.out.join(&rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        self.files.push(rel);
        Ok(path)
    }

    fn csv_path(&self, name: &str) -> PathBuf {
        Path::new(&self.cfg.outputs.csv_dir).join(name)
    }

    fn write_rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.claim(self.csv_path(name))?;
        let mut w = csv::Writer::from_path(path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_tails(&mut self, name: &str, t: &TailReport) -> Result<()> {
        let path = self.claim(self.csv_path(name))?;
        t.write_csv(&path)
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, v: &T) -> Result<()> {
        let path = self.claim(PathBuf::from(rel))?;
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    fn lambda(&mut self) -> Result<PointSet> {
        if self.lambda.is_none() {
            let set = self.timed("pointset", |c| generate_pointset(&c.cfg.pointset, &c.cfg.space, c.cfg.seed))?;
            self.lambda = Some(set);
        }
        Ok(self.lambda.clone().expect("generated above"))
    }

    fn spectrum_row(&self, r: f64, rep: &SpectralReport) -> SpectrumRow {
        SpectrumRow {
            experiment_id: self.cfg.experiment_id.clone(),
            center: self.cfg.spectra.center.as_ref().expect("resolved").to_string(),
            r,
            lambda_min: rep.lambda_min,
            lambda_max: rep.lambda_max,
            trace: rep.trace,
            plunge_count: rep.plunge_count,
        }
    }

    fn audit(&mut self, write: bool) -> Result<AxiomAudit> {
        let lambda = self.lambda()?;
        let audit = self.timed("audit", |c| {
            let a = &c.cfg.audit;
            let plan = AuditPlan {
                centers: a.centers.clone().expect("resolved"),
                ndb_radius: a.ndb_radius,
                ndb_floor: a.ndb_floor,
                wad_radii: a.wad_radii.clone().expect("resolved"),
                wl_radii: a.wl_radii.clone(),
                hap_radii: a.hap_radii.clone(),
                separation_rho: a.separation_rho,
                quad: a.quadrature.expect("resolved"),
                poly_decay: a.poly_decay.clone(),
                thresholds: c.cfg.thresholds.clone(),
            };
            hypothesis_audit(&c.cfg.space, &c.cfg.kernel, &lambda, &plan)
        })?;
        if write {
            self.write_tails("tails_wl.csv", &audit.wl)?;
            self.write_tails("tails_hap.csv", &audit.hap)?;
            let doc = AuditDocument {
                schema_version: SCHEMA_VERSION,
                experiment_id: self.cfg.experiment_id.clone(),
                audit: audit.clone(),
                config: self.cfg.clone(),
            };
            self.write_json("audit.json", &doc)?;
        }
        Ok(audit)
    }

    fn density(&mut self, write: bool) -> Result<DensityReport> {
        let lambda = self.lambda()?;
        let report = self.timed("density", |c| {
            let r_max = *c.cfg.radii.last().expect("resolved radii are nonempty");
            let centers = candidate_centers(&lambda, &c.cfg.space, c.cfg.centers.spacing, r_max)?;
            beurling_density(&lambda, &c.cfg.space, &centers, &c.cfg.radii)
        })?;
        if write {
            self.write_rows("density.csv", &report.rows)?;
        }
        Ok(report)
    }

    fn trace(&mut self, write: bool) -> Result<TraceReport> {
        let report = self.timed("trace", |c| {
            let s = &c.cfg.spectra;
            averaged_trace(
                &c.cfg.kernel,
                &c.cfg.space,
                s.trace_centers.as_deref().expect("resolved"),
                &c.cfg.radii,
                &c.cfg.quad(),
                s.trace_mode,
            )
        })?;
        if write {
            self.write_rows("trace.csv", &report.rows)?;
        }
        Ok(report)
    }

    fn gram(&mut self, write: bool) -> Result<Vec<WindowBound>> {
        let lambda = self.lambda()?;
        let reports = self.timed("gram", |c| {
            let center = c.cfg.spectra.center.clone().expect("resolved");
            c.cfg
                .spectra
                .gram_half_widths
                .iter()
                .map(|&w| {
                    let sub = lambda.restrict(&c.cfg.space, &center, w)?;
                    Ok((w, sub.len(), riesz_bounds(&c.cfg.kernel, &sub)?))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        if write {
            let rows: Vec<SpectrumRow> = reports.iter().map(|(w, _, rep)| self.spectrum_row(*w, rep)).collect();
            self.write_rows("gram_spectra.csv", &rows)?;
        }
        Ok(reports
            .into_iter()
            .map(|(w, n, rep)| WindowBound {
                half_width: w,
                points: n,
                lambda_min: rep.lambda_min,
                lambda_max: rep.lambda_max,
            })
            .collect())
    }

    fn framebounds(&mut self, write: bool) -> Result<Option<Vec<SectionBound>>> {
        if self.cfg.spectra.section_radii.is_empty() {
            return Ok(None);
        }
        let lambda = self.lambda()?;
        let sections = self.timed("framebounds", |c| {
            let s = &c.cfg.spectra;
            let th = &c.cfg.thresholds;
            let center = s.center.clone().expect("resolved");
            let quad = s.section_quadrature.expect("resolved");
            s.section_radii
                .iter()
                .map(|&r| {
                    let fs = frame_bounds_finite_section(
                        &c.cfg.kernel,
                        &lambda,
                        &c.cfg.space,
                        &center,
                        r,
                        th.tau,
                        th.margin_fraction * r,
                        &quad,
                    )?;
                    Ok((SectionBound::from(&fs), fs.report))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        if write {
            let rows: Vec<SpectrumRow> = sections.iter().map(|(b, rep)| self.spectrum_row(b.r, rep)).collect();
            self.write_rows("frame_spectra.csv", &rows)?;
        }
        Ok(Some(sections.into_iter().map(|(b, _)| b).collect()))
    }

    fn locspec(&mut self, write: bool) -> Result<Vec<SpectralReport>> {
        let reports = self.timed("locspec", |c| {
            let s = &c.cfg.spectra;
            let center = s.center.clone().expect("resolved");
            let quad = s.locspec_quadrature.expect("resolved");
            s.locspec_radii
                .iter()
                .map(|&r| localization_spectrum(&c.cfg.kernel, &c.cfg.space, &center, r, &quad))
                .collect::<Result<Vec<_>>>()
        })?;
        if write {
            let radii = self.cfg.spectra.locspec_radii.clone();
            let rows: Vec<SpectrumRow> = radii.iter().zip(&reports).map(|(r, rep)| self.spectrum_row(*r, rep)).collect();
            self.write_rows("locspec_spectra.csv", &rows)?;
        }
        Ok(reports)
    }

    fn verdict(&mut self, write_all: bool) -> Result<(AxiomAudit, VerdictReport)> {
        let audit = self.audit(write_all)?;
        let density = self.density(write_all)?;
        let trace = self.trace(write_all)?;
        let riesz = self.gram(write_all)?;
        let frame = self.framebounds(write_all)?;
        if write_all {
            self.locspec(true)?;
        }
        let lambda = self.lambda()?;
        let report = self.timed("verdict", |c| {
            let s = &c.cfg.spectra;
            let ratios = dimension_free_ratios(
                &c.cfg.space,
                &c.cfg.kernel,
                &lambda,
                s.center.as_ref().expect("resolved"),
                s.ratio_radii.as_deref().expect("resolved"),
                &c.cfg.quad(),
            )?;
            Ok(assemble_verdict(VerdictInputs {
                experiment_id: c.cfg.experiment_id.clone(),
                space: c.cfg.space.clone(),
                kernel: c.cfg.kernel.metadata(),
                density,
                trace,
                riesz_curve: riesz,
                frame_curve: frame,
                dimension_free_ratios: ratios,
                audit: Some(audit.clone()),
                thresholds: c.cfg.thresholds.clone(),
            }))
        })?;
        let doc = HarnessReport {
            verdict: report.clone(),
            config: self.cfg.clone(),
        };
        let json_path = self.cfg.outputs.json_path.clone();
        self.write_json(&json_path, &doc)?;
        Ok((audit, report))
    }
}

fn status_of(audit: Option<&AxiomAudit>, report: Option<&VerdictReport>) -> ExitStatus {
    if let Some(r) = report {
        if !r.consistent {
            return ExitStatus::Violated;
        }
    }
    match audit {
        Some(a) if !a.theorem_applicable => ExitStatus::NotApplicable,
        _ => ExitStatus::Consistent,
    }
}

/// Runs one stage (or the whole pipeline) and writes its outputs, the
/// resolved config and the manifest under `opts.out_dir`. On error every
/// file written so far is removed.
pub fn run(config: ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    let cfg = config.resolve(opts.seed)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut ctx = Ctx {
        cfg,
        out: opts.out_dir.clone(),
        files: Vec::new(),
        timings: Vec::new(),
        lambda: None,
    };
    let result = execute(&mut ctx, opts.stage);
    let (audit, report) = match result {
        Ok(v) => v,
        Err(e) => {
            for f in &ctx.files {
                let _ = std::fs::remove_file(ctx.out.join(f));
            }
            return Err(e);
        }
    };
    let status = status_of(audit.as_ref(), report.as_ref());
    let finish = |ctx: &mut Ctx| -> Result<RunManifest> {
        let cfg_json = ctx.cfg.clone();
        ctx.write_json("config.json", &cfg_json)?;
        let mut outputs: Vec<String> = ctx.files.iter().map(|p| p.display().to_string()).collect();
        outputs.push("manifest.json".into());
        let manifest = RunManifest {
            experiment_id: ctx.cfg.experiment_id.clone(),
            config_hash: ctx.cfg.hash(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: ctx.cfg.seed,
            stage: opts.stage,
            exit_code: status.code(),
            outputs,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            stage_timings: ctx.timings.clone(),
        };
        ctx.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    };
    let manifest = match finish(&mut ctx) {
        Ok(m) => m,
        Err(e) => {
            for f in &ctx.files {
                let _ = std::fs::remove_file(ctx.out.join(f));
            }
            return Err(e);
        }
    };
    Ok(RunOutcome {
        config: ctx.cfg,
        status,
        audit,
        report,
        files: ctx.files,
        manifest,
    })
}

fn execute(ctx: &mut Ctx, stage: Stage) -> Result<(Option<AxiomAudit>, Option<VerdictReport>)> {
    match stage {
        Stage::Audit => Ok((Some(ctx.audit(true)?), None)),
        Stage::Density => ctx.density(true).map(|_| (None, None)),
        Stage::Trace => ctx.trace(true).map(|_| (None, None)),
        Stage::Gram => ctx.gram(true).map(|_| (None, None)),
        Stage::Framebounds => ctx.framebounds(true).map(|_| (None, None)),
        Stage::Locspec => ctx.locspec(true).map(|_| (None, None)),
        Stage::Verdict | Stage::All => {
            let (a, r) = ctx.verdict(stage == Stage::All)?;
            Ok((Some(a), Some(r)))
        }
    }
}

/// Per-axiom table for standard output.
pub fn audit_table(a: &AxiomAudit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<12} {:<6} {:<9} {}", "axiom", "pass", "censored", "headline");
    for l in &a.summary {
        let _ = writeln!(s, "{:<12} {:<6} {:<9} {:.6e}", l.axiom, l.pass, l.censored, l.headline);
    }
    let _ = writeln!(
        s,
        "sampling applicable: {}  interpolation applicable: {}",
        a.sampling_applicable, a.interpolation_applicable
    );
    s
}

/// Verdict summary for standard output.
pub fn verdict_table(r: &VerdictReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment   {}", r.experiment_id);
    let _ = writeln!(s, "D-, D+       {:.6} {:.6}", r.d_minus, r.d_plus);
    let _ = writeln!(s, "tr-, tr+     {:.6} {:.6}", r.tr_minus, r.tr_plus);
    let _ = writeln!(s, "riesz curve  {:?} {:?}", r.riesz_status, r.riesz_curve.iter().map(|w| w.lambda_min).collect::<Vec<_>>());
    if let Some(c) = &r.frame_curve {
        let _ = writeln!(s, "frame curve  {:?} {:?}", r.frame_status, c.iter().map(|b| b.a_est).collect::<Vec<_>>());
    }
    let _ = writeln!(s, "class        {}", r.empirical_class);
    let _ = writeln!(s, "slack        {:.6}", r.slack);
    for c in &r.inequality_checks {
        let _ = writeln!(
            s,
            "{:<20} {:.6} {} {:.6} (slack {:.4}): {}",
            c.name,
            c.density,
            c.relation,
            c.trace,
            c.slack,
            if c.consistent { "consistent" } else { "VIOLATED" }
        );
    }
    if r.inequality_checks.is_empty() {
        let _ = writeln!(s, "no inequality evaluated");
    }
    s
}
