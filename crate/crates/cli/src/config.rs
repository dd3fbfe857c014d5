//! TOML run configuration.
//!
//! Every section except `model`, `grid` and `profile` is optional; missing
//! keys take the defaults below and are written back on serialization, so
//! the hash of a parsed config covers every value the run used.

use std::sync::Arc;

use fnls_core::analysis::SweepBase;
use fnls_core::gn::GnSampleSpec;
use fnls_core::integrator::AdaptiveControl;
use fnls_core::kernel::KernelQuadrature;
use fnls_core::{Grid, InitialProfile, ModelParams, ProfileKind, StepperConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    pub profile: ProfileSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub scattering: ScatteringSection,
    #[serde(default)]
    pub gn: GnSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub d: usize,
    pub alpha: f64,
    pub s: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Box length; filled from the profile when absent.
    pub length: Option<f64>,
}

fn default_n() -> usize {
    64
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: default_n(), length: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileName {
    Gaussian,
    SuperGaussian,
    SingleMode,
    Ring,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(x) => Complex64::new(x, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: ProfileName,
    #[serde(default = "default_amplitude")]
    pub amplitude: Amplitude,
    #[serde(default = "one")]
    pub width: f64,
    /// Super-gaussian order.
    pub order: Option<f64>,
    /// Ring radius.
    pub radius: Option<f64>,
    /// Single-mode integer wave vector.
    pub mode: Option<Vec<i64>>,
}

fn default_amplitude() -> Amplitude {
    Amplitude::Real(1.0)
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub record_stride: usize,
    pub blowup_threshold: f64,
    pub snapshot_times: Vec<f64>,
    /// Enables step halving when set.
    pub adaptive_tolerance: Option<f64>,
    pub max_halvings: u32,
}

impl Default for StepperSection {
    fn default() -> Self {
        let s = StepperConfig::default();
        Self {
            dt: s.dt,
            t_end: s.t_end,
            dealias: s.dealias,
            record_stride: s.record_stride,
            blowup_threshold: s.blowup_threshold,
            snapshot_times: s.snapshot_times,
            adaptive_tolerance: None,
            max_halvings: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub run_id: String,
    /// `-` writes to standard output.
    pub timeseries: String,
    pub sweep: String,
    /// Column pair for plot data, e.g. `["t", "mass_sq"]`.
    pub plot_columns: Option<[String; 2]>,
    pub plot: String,
    pub svg: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            run_id: "run".into(),
            timeseries: "timeseries.csv".into(),
            sweep: "sweep.jsonl".into(),
            plot_columns: None,
            plot: "plot.dat".into(),
            svg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub a_values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { a_values: vec![0.5, 1.0, 2.0, 4.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringSection {
    pub base_times: Vec<f64>,
    pub factor: f64,
    /// Defect below which `u(t0)` is reported as the scattering state.
    pub tolerance: f64,
}

impl Default for ScatteringSection {
    fn default() -> Self {
        Self { base_times: vec![2.0, 4.0, 8.0], factor: 2.0, tolerance: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GnSection {
    pub w_min: f64,
    pub w_max: f64,
    pub n_widths: usize,
    pub truncation_tol: f64,
}

impl Default for GnSection {
    fn default() -> Self {
        Self { w_min: 0.5, w_max: 3.0, n_widths: 12, truncation_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub dts: Vec<f64>,
    pub t_end: f64,
    /// Allowed deviation of the residual slopes from 2.
    pub slope_tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { dts: vec![0.04, 0.02, 0.01, 0.005], t_end: 1.0, slope_tolerance: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub s_values: Vec<f64>,
    pub a: f64,
    pub t: f64,
    pub tolerance: f64,
    pub max_levels: usize,
    pub initial_radius: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        let q = KernelQuadrature::default();
        Self {
            s_values: vec![0.25, 0.5, 1.0],
            a: 1.0,
            t: 1.0,
            tolerance: q.tolerance,
            max_levels: q.max_levels,
            initial_radius: q.initial_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub dts: Vec<f64>,
    pub t_end: f64,
    pub order_min: f64,
    pub order_max: f64,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self { dts: vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0], t_end: 1.0, order_min: 1.7, order_max: 2.3 }
    }
}

/// A validated config with its non-fatal warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

/// The built-in run used when no config file is given.
pub const DEFAULT_CONFIG: &str = r#"[model]
d = 2
alpha = 0.8
s = 0.5
a = 1.0

[grid]
n = 64
length = 16.0

[profile]
kind = "gaussian"
amplitude = 1.0
width = 1.0
"#;

pub fn parse_config(text: &str) -> Result<ParsedConfig, CliError> {
    let mut config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if config.grid.length.is_none() {
        config.grid.length = Some(default_box_length(&config.profile));
    }
    let warnings = config.validate()?;
    Ok(ParsedConfig { config, warnings })
}

pub fn default_config() -> ParsedConfig {
    parse_config(DEFAULT_CONFIG).expect("built-in config is valid")
}

/// Box length giving localized profiles negligible mass near the boundary.
pub fn default_box_length(profile: &ProfileSection) -> f64 {
    let w = profile.width;
    match profile.kind {
        ProfileName::Gaussian => 16.0 * w,
        ProfileName::SuperGaussian => {
            let order = profile.order.unwrap_or(1.0);
            if order >= 1.0 {
                16.0 * w
            } else {
                // exp(-(r²/2w²)^order) falls below 1e-18 at this radius.
                2.0 * (2.0f64).sqrt() * w * (42.0f64).powf(1.0 / (2.0 * order)) / 0.75
            }
        }
        ProfileName::Ring => 2.0 * (profile.radius.unwrap_or(0.0).abs() + 8.0 * w) / 0.75,
        ProfileName::SingleMode => 2.0 * std::f64::consts::PI,
    }
}

fn config_err(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {reason}"))
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = self.model;
        ModelParams::new(m.d, m.alpha, m.s, m.a).map_err(|e| config_err("model", e))
    }

    pub fn grid(&self) -> Result<Arc<Grid>, CliError> {
        let length = self.grid.length.expect("filled on parse");
        Grid::new(self.grid.n, length, self.model.d).map(Arc::new).map_err(|e| config_err("grid", e))
    }

    pub fn profile(&self) -> Result<InitialProfile, CliError> {
        let p = &self.profile;
        let kind = match p.kind {
            ProfileName::Gaussian => ProfileKind::Gaussian,
            ProfileName::SuperGaussian => ProfileKind::SuperGaussian {
                order: p.order.ok_or_else(|| config_err("profile.order", "required for kind = \"super-gaussian\""))?,
            },
            ProfileName::Ring => ProfileKind::Ring {
                radius: p.radius.ok_or_else(|| config_err("profile.radius", "required for kind = \"ring\""))?,
            },
            ProfileName::SingleMode => ProfileKind::SingleMode {
                mode: p.mode.clone().ok_or_else(|| config_err("profile.mode", "required for kind = \"single-mode\""))?,
            },
        };
        Ok(InitialProfile { kind, amplitude: p.amplitude.value(), width: p.width })
    }

    pub fn stepper(&self) -> StepperConfig {
        let s = &self.stepper;
        StepperConfig {
            dt: s.dt,
            t_end: s.t_end,
            dealias: s.dealias,
            blowup_threshold: s.blowup_threshold,
            record_stride: s.record_stride,
            snapshot_times: s.snapshot_times.clone(),
            adaptive: s.adaptive_tolerance.map(|tolerance| AdaptiveControl { tolerance, max_halvings: s.max_halvings }),
        }
    }

    pub fn sweep_base(&self) -> Result<SweepBase, CliError> {
        Ok(SweepBase { params: self.params()?, grid: self.grid()?, profile: self.profile()?, stepper: self.stepper() })
    }

    pub fn gn_spec(&self) -> GnSampleSpec {
        let g = &self.gn;
        let mut spec = GnSampleSpec::standard(self.model.d, g.w_min, g.w_max, g.n_widths);
        spec.truncation_tol = g.truncation_tol;
        spec
    }

    pub fn kernel_quadrature(&self) -> KernelQuadrature {
        let k = &self.kernel;
        KernelQuadrature {
            tolerance: k.tolerance,
            max_levels: k.max_levels,
            initial_radius: k.initial_radius,
            ..KernelQuadrature::default()
        }
    }

    /// Checks every section; returns the non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>, CliError> {
        let params = self.params()?;
        let grid = self.grid()?;
        let profile = self.profile()?;
        if let ProfileKind::SingleMode { mode } = &profile.kind {
            if mode.len() != self.model.d {
                return Err(config_err("profile.mode", format!("needs {} components", self.model.d)));
            }
        }
        if self.profile.width <= 0.0 || !self.profile.width.is_finite() {
            return Err(config_err("profile.width", "must be positive"));
        }
        self.stepper().validate().map_err(|e| config_err("stepper", e))?;
        if self.stepper.max_halvings > 30 {
            return Err(config_err("stepper.max_halvings", "at most 30"));
        }
        let positive = |key: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(config_err(key, "must be positive")) };
        for &a in &self.sweep.a_values {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(config_err("sweep.a_values", format!("damping must be >= 0, got {a}")));
            }
        }
        for &t in &self.scattering.base_times {
            positive("scattering.base_times", t)?;
        }
        if !(self.scattering.factor > 1.0) {
            return Err(config_err("scattering.factor", "must exceed 1"));
        }
        positive("scattering.tolerance", self.scattering.tolerance)?;
        positive("gn.w_min", self.gn.w_min)?;
        if !(self.gn.w_max >= self.gn.w_min) {
            return Err(config_err("gn.w_max", "must be >= gn.w_min"));
        }
        if self.gn.n_widths == 0 {
            return Err(config_err("gn.n_widths", "must be at least 1"));
        }
        positive("gn.truncation_tol", self.gn.truncation_tol)?;
        check_refinement("verify.dts", &self.verify.dts, 2)?;
        positive("verify.t_end", self.verify.t_end)?;
        positive("verify.slope_tolerance", self.verify.slope_tolerance)?;
        check_refinement("convergence.dts", &self.convergence.dts, 3)?;
        positive("convergence.t_end", self.convergence.t_end)?;
        if !(self.convergence.order_min <= self.convergence.order_max) {
            return Err(config_err("convergence.order_max", "must be >= convergence.order_min"));
        }
        for &s in &self.kernel.s_values {
            positive("kernel.s_values", s)?;
        }
        positive("kernel.a", self.kernel.a)?;
        positive("kernel.t", self.kernel.t)?;
        positive("kernel.tolerance", self.kernel.tolerance)?;
        positive("kernel.initial_radius", self.kernel.initial_radius)?;
        if self.kernel.max_levels < 2 {
            return Err(config_err("kernel.max_levels", "must be at least 2"));
        }
        if self.output.run_id.contains([',', '\n', '"']) {
            return Err(config_err("output.run_id", "must not contain commas, quotes or newlines"));
        }

        let mut warnings = params.warnings();
        if !profile.is_radial() {
            warnings.push("profile is not radial; the radial-data theory does not apply".into());
        }
        if let Err(e) = fnls_core::sample_profile(&profile, &grid, fnls_core::profile::DEFAULT_TRUNCATION_TOL) {
            return Err(config_err("grid.length", e));
        }
        Ok(warnings)
    }
}

fn check_refinement(key: &str, dts: &[f64], needed: usize) -> Result<(), CliError> {
    if dts.len() < needed {
        return Err(config_err(key, format!("need at least {needed} step sizes")));
    }
    if dts.iter().any(|&h| !(h > 0.0 && h.is_finite())) || dts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(config_err(key, "step sizes must be positive and strictly decreasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\nd = 1\nalpha = 0.8\ns = 0.5\na = 1.0\n\n[profile]\nkind = \"gaussian\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let parsed = parse_config(MINIMAL).unwrap();
        let c = &parsed.config;
        assert_eq!(c.grid.n, 64);
        assert_eq!(c.grid.length, Some(16.0));
        assert_eq!(c.stepper, StepperSection::default());
        assert_eq!(c.sweep.a_values, vec![0.5, 1.0, 2.0, 4.0]);
        assert_eq!(c.hash(), parse_config(MINIMAL).unwrap().config.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn serialization_round_trips() {
        for text in [MINIMAL, DEFAULT_CONFIG] {
            let c = parse_config(text).unwrap().config;
            let again = parse_config(&c.to_toml()).unwrap().config;
            assert_eq!(c, again);
            assert_eq!(c.hash(), again.hash());
        }
        let complex = format!("{MINIMAL}amplitude = [0.5, -0.25]\norder = 2.0\n").replace("gaussian", "super-gaussian");
        let c = parse_config(&complex).unwrap().config;
        assert_eq!(c.profile.amplitude, Amplitude::Complex([0.5, -0.25]));
        assert_eq!(parse_config(&c.to_toml()).unwrap().config, c);
    }

    #[test]
    fn duplicate_key_is_named() {
        let text = MINIMAL.replace("a = 1.0", "a = 1.0\na = 2.0");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate key") && err.contains('a'), "{err}");
    }

    #[test]
    fn unknown_key_reports_location() {
        let text = MINIMAL.replace("s = 0.5", "s = 0.5\nfriction = 2");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("friction") && err.contains("line 5"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = parse_config(&MINIMAL.replace("gaussian", "ring")).unwrap_err().to_string();
        assert!(err.contains("profile.radius"), "{err}");
        let err = parse_config(&format!("{MINIMAL}\n[stepper]\ndt = -1.0\n")).unwrap_err().to_string();
        assert!(err.contains("dt"), "{err}");
        let err = parse_config(&format!("{MINIMAL}\n[verify]\ndts = [0.01, 0.02]\n")).unwrap_err().to_string();
        assert!(err.contains("verify.dts"), "{err}");
    }

    #[test]
    fn small_mass_hypotheses_warning() {
        let text = MINIMAL.replace("d = 1\nalpha = 0.8\ns = 0.5", "d = 2\nalpha = 0.7\ns = 0.2");
        let parsed = parse_config(&text).unwrap();
        assert!(parsed.warnings.iter().any(|w| w.contains("hypotheses not met")), "{:?}", parsed.warnings);
    }

    #[test]
    fn hash_tracks_every_value() {
        let a = parse_config(MINIMAL).unwrap().config;
        let b = parse_config(&format!("{MINIMAL}\n[stepper]\ndt = 0.02\n")).unwrap().config;
        assert_ne!(a.hash(), b.hash());
    }
}
