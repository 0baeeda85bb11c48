//! Scenario configuration.
//!
//! A TOML file with one table per physical component. Every key has a
//! default, so an empty file describes the type-II KTP microcavity with
//! κ = 2/mm gratings, a 4 mm crystal, a 0.1999 mm gap and ρ² = 0.95.

use std::sync::Arc;

use microcavity_core::dispersion::{LinearBranch, KTP_WAVELENGTH};
use microcavity_core::{
    CavityAssembly, DbrParams, Dispersion, DispersionModel, FrequencyGrid, Integrator, JsaSettings,
    MirrorParams, ModeNormalization, Polarization, PumpMode, PumpSpectrum, QuadratureSettings,
    MODEL_SPEED_OF_LIGHT,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::units::{InverseLength, Length};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dispersion: DispersionConfig,
    pub grating: GratingConfig,
    pub mirror: MirrorConfig,
    pub cavity: CavityConfig,
    pub pump: PumpConfig,
    pub grid: GridConfig,
    pub integration: IntegrationConfig,
    pub schmidt: SchmidtConfig,
    pub scan: ScanConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersionKind {
    /// First-order expansion about the degenerate carrier.
    #[default]
    Linearized,
    /// n = 1 for every field.
    Vacuum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub model: DispersionKind,
    /// Degenerate signal/idler vacuum wavelength.
    pub wavelength: Length,
    pub speed_of_light: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    pub n_pump: f64,
    /// dk/dω in s/m.
    pub kprime_signal: f64,
    pub kprime_idler: f64,
    pub kprime_pump: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        let m = DispersionModel::ktp();
        Self {
            model: DispersionKind::Linearized,
            wavelength: Length(KTP_WAVELENGTH),
            speed_of_light: MODEL_SPEED_OF_LIGHT,
            n_signal: m.signal.n0,
            n_idler: m.idler.n0,
            n_pump: m.pump.n0,
            kprime_signal: m.signal.kprime,
            kprime_idler: m.idler.kprime,
            kprime_pump: m.pump.kprime,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GratingConfig {
    pub kappa: InverseLength,
    pub length: Length,
    /// Grating spatial frequencies; Bragg-matched at the carrier when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_signal: Option<InverseLength>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_idler: Option<InverseLength>,
}

impl Default for GratingConfig {
    fn default() -> Self {
        Self {
            kappa: InverseLength(2e3),
            length: Length(4e-3),
            k_signal: None,
            k_idler: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MirrorConfig {
    /// Power reflectivity ρ².
    pub rho2: f64,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        Self { rho2: 0.95 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationKind {
    #[default]
    FreeField,
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityConfig {
    pub gap: Length,
    pub normalization: NormalizationKind,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self {
            gap: Length(0.1999e-3),
            normalization: NormalizationKind::FreeField,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpConfig {
    /// Gaussian width in rad/s.
    pub sigma: f64,
    pub amplitude: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            sigma: 0.3e12,
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            omega_min: FrequencyGrid::DEFAULT_BAND.0,
            omega_max: FrequencyGrid::DEFAULT_BAND.1,
            points: 1191,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrationMethod {
    #[default]
    Analytic,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    pub method: IntegrationMethod,
    pub points_per_period: f64,
    pub gauss_order: usize,
    pub tolerance: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        let q = QuadratureSettings::default();
        Self {
            method: IntegrationMethod::Analytic,
            points_per_period: q.points_per_period,
            gauss_order: q.order,
            tolerance: q.tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchmidtConfig {
    /// Modes with λ at or below this are dropped.
    pub threshold: f64,
    /// Number of signal modes written as CSV.
    pub modes_to_export: usize,
}

impl Default for SchmidtConfig {
    fn default() -> Self {
        Self {
            threshold: microcavity_core::schmidt::DEFAULT_THRESHOLD,
            modes_to_export: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    #[default]
    Signal,
    Idler,
}

impl From<Arm> for Polarization {
    fn from(a: Arm) -> Self {
        match a {
            Arm::Signal => Polarization::Signal,
            Arm::Idler => Polarization::Idler,
        }
    }
}

/// Frequency band of the reflectivity scans; the JSA grid band when unset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub arm: Arm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    pub points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            arm: Arm::Signal,
            omega_min: None,
            omega_max: None,
            points: 2001,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Largest number of grid points per axis in the |B| CSV.
    pub abs_csv_max_points: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            abs_csv_max_points: 300,
        }
    }
}

fn config_error(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

/// Parses a TOML document, applies `key=value` overrides, and validates.
pub fn load(text: &str, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    let mut tree: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    for item in overrides {
        apply_override(&mut tree, item)?;
    }
    let config: ScenarioConfig = toml::Value::Table(tree)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// `section.key=value`; the value is read as TOML, falling back to a string.
pub fn apply_override(tree: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override {item:?} is not of the form key=value"))
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "override key {key:?} is malformed"
        )));
    }
    let mut table = tree;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            CliError::Config(format!("override key {key:?}: {part} is not a table"))
        })?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.dispersion;
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_error(key, format!("must be positive, got {v}")))
            }
        };
        positive("dispersion.wavelength", d.wavelength.0)?;
        positive("dispersion.speed_of_light", d.speed_of_light)?;
        if d.model == DispersionKind::Linearized {
            for (key, n) in [
                ("dispersion.n_signal", d.n_signal),
                ("dispersion.n_idler", d.n_idler),
                ("dispersion.n_pump", d.n_pump),
            ] {
                if !(n >= 1.0) || !n.is_finite() {
                    return Err(config_error(
                        key,
                        format!("refractive index must be >= 1, got {n}"),
                    ));
                }
            }
            positive("dispersion.kprime_signal", d.kprime_signal)?;
            positive("dispersion.kprime_idler", d.kprime_idler)?;
            positive("dispersion.kprime_pump", d.kprime_pump)?;
        }
        let g = &self.grating;
        if !(g.kappa.0 >= 0.0) || !g.kappa.0.is_finite() {
            return Err(config_error(
                "grating.kappa",
                format!("must be >= 0, got {}", g.kappa.0),
            ));
        }
        positive("grating.length", g.length.0)?;
        if let Some(k) = g.k_signal {
            positive("grating.k_signal", k.0)?;
        }
        if let Some(k) = g.k_idler {
            positive("grating.k_idler", k.0)?;
        }
        if !(0.0..1.0).contains(&self.mirror.rho2) {
            return Err(config_error(
                "mirror.rho2",
                format!("must satisfy 0 <= ρ² < 1, got {}", self.mirror.rho2),
            ));
        }
        positive("cavity.gap", self.cavity.gap.0)?;
        positive("pump.sigma", self.pump.sigma)?;
        positive("pump.amplitude", self.pump.amplitude)?;
        let gr = &self.grid;
        positive("grid.omega_min", gr.omega_min)?;
        if !(gr.omega_max > gr.omega_min) || !gr.omega_max.is_finite() {
            return Err(config_error("grid.omega_max", "must exceed grid.omega_min"));
        }
        if gr.points < 2 {
            return Err(config_error(
                "grid.points",
                format!("need at least 2, got {}", gr.points),
            ));
        }
        if d.model == DispersionKind::Linearized {
            // The linear law is only trusted close to the carrier.
            let w0 = self.carrier();
            for (key, w) in [
                ("grid.omega_min", gr.omega_min),
                ("grid.omega_max", gr.omega_max),
            ] {
                if (w - w0).abs() > 0.01 * w0 {
                    return Err(config_error(
                        key,
                        format!("{w:e} rad/s is more than 1% from the carrier {w0:e}"),
                    ));
                }
            }
        }
        let i = &self.integration;
        positive("integration.points_per_period", i.points_per_period)?;
        positive("integration.tolerance", i.tolerance)?;
        if i.gauss_order == 0 {
            return Err(config_error(
                "integration.gauss_order",
                "must be at least 1",
            ));
        }
        if !(self.schmidt.threshold >= 0.0) {
            return Err(config_error("schmidt.threshold", "must be >= 0"));
        }
        if self.scan.points < 2 {
            return Err(config_error(
                "scan.points",
                format!("need at least 2, got {}", self.scan.points),
            ));
        }
        let (lo, hi) = self.scan_band();
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(config_error(
                "scan",
                format!("band must satisfy 0 < omega_min < omega_max, got [{lo}, {hi}]"),
            ));
        }
        if self.output.abs_csv_max_points < 2 {
            return Err(config_error(
                "output.abs_csv_max_points",
                "must be at least 2",
            ));
        }
        Ok(())
    }

    /// Degenerate signal/idler carrier 2πc/λ.
    pub fn carrier(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.dispersion.speed_of_light / self.dispersion.wavelength.0
    }

    pub fn scan_band(&self) -> (f64, f64) {
        (
            self.scan.omega_min.unwrap_or(self.grid.omega_min),
            self.scan.omega_max.unwrap_or(self.grid.omega_max),
        )
    }

    pub fn dispersion_model(&self) -> Result<Arc<dyn Dispersion>, CliError> {
        let d = &self.dispersion;
        let w0 = self.carrier();
        let model = match d.model {
            DispersionKind::Vacuum => DispersionModel::vacuum(w0, d.speed_of_light),
            DispersionKind::Linearized => {
                let branch = |n0, kprime, omega0| LinearBranch { n0, kprime, omega0 };
                DispersionModel::new(
                    branch(d.n_signal, d.kprime_signal, w0),
                    branch(d.n_idler, d.kprime_idler, w0),
                    branch(d.n_pump, d.kprime_pump, 2.0 * w0),
                    d.speed_of_light,
                )
                .map_err(|e| CliError::Config(format!("dispersion: {e}")))?
            }
        };
        Ok(Arc::new(model))
    }

    pub fn assembly(
        &self,
        dispersion: &Arc<dyn Dispersion>,
        arm: Arm,
    ) -> Result<CavityAssembly, CliError> {
        let pol: Polarization = arm.into();
        let grating = match arm {
            Arm::Signal => self.grating.k_signal,
            Arm::Idler => self.grating.k_idler,
        }
        .map(|k| k.0)
        .unwrap_or_else(|| dispersion.bragg_grating(pol));
        let wrap = |e: microcavity_core::Error| CliError::Config(e.to_string());
        let normalization = match self.cavity.normalization {
            NormalizationKind::FreeField => ModeNormalization::FreeField,
            NormalizationKind::Unit => ModeNormalization::Unit,
        };
        CavityAssembly::new(
            DbrParams::new(self.grating.kappa.0, self.grating.length.0, grating).map_err(wrap)?,
            MirrorParams::from_power_reflectivity(self.mirror.rho2).map_err(wrap)?,
            self.cavity.gap.0,
            pol,
            dispersion.clone(),
            normalization,
        )
        .map_err(wrap)
    }

    pub fn grid(&self) -> Result<FrequencyGrid, CliError> {
        FrequencyGrid::new(self.grid.omega_min, self.grid.omega_max, self.grid.points)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn scan_grid(&self) -> Result<FrequencyGrid, CliError> {
        let (lo, hi) = self.scan_band();
        FrequencyGrid::new(lo, hi, self.scan.points)
            .map_err(|e| CliError::Config(format!("scan: {e}")))
    }

    pub fn pump_spectrum(
        &self,
        dispersion: &Arc<dyn Dispersion>,
    ) -> Result<PumpSpectrum, CliError> {
        PumpSpectrum::new(
            self.pump.sigma,
            dispersion.reference_frequency(Polarization::Pump),
            self.pump.amplitude,
        )
        .map_err(|e| CliError::Config(format!("pump: {e}")))
    }

    pub fn pump_mode(&self, dispersion: &Arc<dyn Dispersion>) -> PumpMode {
        PumpMode::new(dispersion.clone())
    }

    pub fn jsa_settings(&self, workers: Option<usize>) -> JsaSettings {
        let i = &self.integration;
        JsaSettings {
            integrator: match i.method {
                IntegrationMethod::Analytic => Integrator::Analytic,
                IntegrationMethod::Quadrature => Integrator::Quadrature(QuadratureSettings {
                    points_per_period: i.points_per_period,
                    order: i.gauss_order,
                    tolerance: i.tolerance,
                }),
            },
            workers,
        }
    }
}
