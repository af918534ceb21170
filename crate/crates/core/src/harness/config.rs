use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::pointsets::PointSetSpec;
use crate::error::{Error, Result};
use crate::geometry::{default_wad_radii, Point, QuadratureRule, Space, DEFAULT_NDB_FLOOR};
use crate::kernels::Kernel;
use crate::spectral::TraceMode;
use crate::verdict::{PolyDecayPlan, Thresholds};

fn one() -> f64 {
    1.0
}
fn default_ndb_floor() -> f64 {
    DEFAULT_NDB_FLOOR
}
fn default_tail_radii() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}
fn default_trace_mode() -> TraceMode {
    TraceMode::Auto
}

/// Candidate centers for the density sup/inf: a grid of the given spacing
/// together with the points of `Λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentersSpec {
    #[serde(default = "one")]
    pub spacing: f64,
}

impl Default for CentersSpec {
    fn default() -> Self {
        CentersSpec { spacing: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSpec {
    /// Default: the window center.
    #[serde(default)]
    pub centers: Option<Vec<Point>>,
    #[serde(default = "one")]
    pub ndb_radius: f64,
    #[serde(default = "default_ndb_floor")]
    pub ndb_floor: f64,
    /// Default: the space's standard WAD radii.
    #[serde(default)]
    pub wad_radii: Option<Vec<f64>>,
    #[serde(default = "default_tail_radii")]
    pub wl_radii: Vec<f64>,
    #[serde(default = "default_tail_radii")]
    pub hap_radii: Vec<f64>,
    #[serde(default = "one")]
    pub separation_rho: f64,
    /// Default: the experiment quadrature.
    #[serde(default)]
    pub quadrature: Option<QuadratureRule>,
    #[serde(default)]
    pub poly_decay: Option<PolyDecayPlan>,
}

impl Default for AuditSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all audit fields have defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraSpec {
    /// Center of Gram windows, sections and localization balls. Default:
    /// the window center.
    #[serde(default)]
    pub center: Option<Point>,
    #[serde(default = "default_trace_mode")]
    pub trace_mode: TraceMode,
    /// Default: the spectra center.
    #[serde(default)]
    pub trace_centers: Option<Vec<Point>>,
    #[serde(default)]
    pub gram_half_widths: Vec<f64>,
    /// Empty: no frame curve.
    #[serde(default)]
    pub section_radii: Vec<f64>,
    #[serde(default)]
    pub section_quadrature: Option<QuadratureRule>,
    #[serde(default)]
    pub locspec_radii: Vec<f64>,
    #[serde(default)]
    pub locspec_quadrature: Option<QuadratureRule>,
    /// Radii for the dimension-free ratios. Default: the density radii.
    #[serde(default)]
    pub ratio_radii: Option<Vec<f64>>,
}

impl Default for SpectraSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all spectra fields have defaults")
    }
}

fn default_csv_dir() -> String {
    "csv".into()
}
fn default_json_path() -> String {
    "report.json".into()
}

/// Paths relative to the run's output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv_dir")]
    pub csv_dir: String,
    #[serde(default = "default_json_path")]
    pub json_path: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv_dir: default_csv_dir(),
            json_path: default_json_path(),
        }
    }
}

/// One experiment. After [`ExperimentConfig::resolve`] every optional field
/// holds the value actually used, so the emitted copy documents all defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    #[serde(default)]
    pub seed: u64,
    pub space: Space,
    pub kernel: Kernel,
    pub pointset: PointSetSpec,
    #[serde(default)]
    pub centers: CentersSpec,
    /// Density (and trace) radii, increasing.
    pub radii: Vec<f64>,
    #[serde(default)]
    pub quadrature: Option<QuadratureRule>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub audit: AuditSpec,
    #[serde(default)]
    pub spectra: SpectraSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

fn check_radii(what: &str, radii: &[f64]) -> Result<()> {
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::input(format!("{what} must be positive and finite, got {radii:?}")));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input(format!("{what} must be strictly increasing, got {radii:?}")));
    }
    Ok(())
}

fn check_relative(what: &str, p: &str) -> Result<()> {
    let path = Path::new(p);
    if p.is_empty() || path.is_absolute() || path.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
        return Err(Error::input(format!("{what} must be a relative path inside the output directory, got `{p}`")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config; a relative point-file path is taken relative to the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let PointSetSpec::File { path: p, .. } = &mut cfg.pointset {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Validates and fills every default; `seed` overrides the config seed.
    pub fn resolve(mut self, seed: Option<u64>) -> Result<Self> {
        if self.experiment_id.is_empty()
            || !self.experiment_id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
        {
            return Err(Error::input(format!(
                "experiment_id must be non-empty ASCII letters, digits, '-', '_' or '.', got `{}`",
                self.experiment_id
            )));
        }
        if let Some(s) = seed {
            self.seed = s;
        }
        self.space.validate()?;
        self.kernel.validate()?;
        self.kernel.check_space(&self.space)?;
        self.thresholds.validate()?;
        check_radii("radii", &self.radii)?;
        if self.radii.is_empty() {
            return Err(Error::input("at least one density radius is required"));
        }
        if !(self.centers.spacing > 0.0) {
            return Err(Error::input("center spacing must be positive"));
        }
        check_relative("outputs.csv_dir", &self.outputs.csv_dir)?;
        check_relative("outputs.json_path", &self.outputs.json_path)?;
        let quad = self.quadrature.unwrap_or_else(|| QuadratureRule::default_for(&self.space));
        QuadratureRule::new(quad.h)?;
        self.quadrature = Some(quad);
        let window_center = match &self.pointset {
            PointSetSpec::Lattice { center, .. } | PointSetSpec::JitteredLattice { center, .. } => {
                center.clone().unwrap_or_else(|| self.space.base_point())
            }
            PointSetSpec::File { window, .. } => window.center.clone(),
        };
        self.space.check_point(&window_center)?;

        let a = &mut self.audit;
        a.centers.get_or_insert_with(|| vec![window_center.clone()]);
        a.wad_radii.get_or_insert_with(|| default_wad_radii(&self.space));
        a.quadrature.get_or_insert(quad);
        if let Some(p) = &mut a.poly_decay {
            p.seed.get_or_insert(self.seed);
            check_radii("audit.poly_decay.radii", &p.radii)?;
        }
        check_radii("audit.wl_radii", &a.wl_radii)?;
        check_radii("audit.hap_radii", &a.hap_radii)?;
        check_radii("audit.wad_radii", a.wad_radii.as_deref().unwrap_or_default())?;
        for c in a.centers.as_deref().unwrap_or_default() {
            self.space.check_point(c)?;
        }

        let s = &mut self.spectra;
        let center = s.center.get_or_insert_with(|| window_center.clone()).clone();
        self.space.check_point(&center)?;
        s.trace_centers.get_or_insert_with(|| vec![center.clone()]);
        s.section_quadrature.get_or_insert(quad);
        s.locspec_quadrature.get_or_insert(quad);
        s.ratio_radii.get_or_insert_with(|| self.radii.clone());
        check_radii("spectra.gram_half_widths", &s.gram_half_widths)?;
        check_radii("spectra.section_radii", &s.section_radii)?;
        check_radii("spectra.locspec_radii", &s.locspec_radii)?;
        check_radii("spectra.ratio_radii", s.ratio_radii.as_deref().unwrap_or_default())?;
        for c in s.trace_centers.as_deref().unwrap_or_default() {
            self.space.check_point(c)?;
        }
        Ok(self)
    }

    pub fn quad(&self) -> QuadratureRule {
        self.quadrature.unwrap_or_else(|| QuadratureRule::default_for(&self.space))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// SHA-256 of the compact JSON encoding, hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configs always serialize");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
