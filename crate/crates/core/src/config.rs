//! Experiment configuration files and the shipped presets.
//!
//! A configuration is a TOML document. Quantities are in laboratory units
//! at this boundary (Hz, Bohr radii) and converted to internal units by the
//! `to_*` accessors. A file may be layered over a preset: tables merge key
//! by key, every other value replaces the preset's.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{BesselOptions, GrowthOptions};
use crate::error::{GpfError, Result};
use crate::evolve::EvolutionConfig;
use crate::grid::Grid;
use crate::ground::{thomas_fermi, GroundStateConfig, NoiseInjection, NoiseKind};
use crate::io::hash::sha256_hex;
use crate::linear::{background_density, sound_and_healing, Background, Channel};
use crate::protocol::{ModulationProtocol, ModulationTarget, PhaseRelation};
use crate::setup::PhysicalSetup;
use crate::units::{hz_to_rad_per_ms, UnitSystem, BOHR_RADIUS_UM, DEFAULT_SCATTERING_BOHR};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetupConfig {
    pub n_total: f64,
    pub trap_hz: [f64; 3],
    pub a_base_bohr: f64,
    pub a12_ratio: f64,
    /// μm²/ms.
    pub hbar_over_m: f64,
}

impl Default for SetupConfig {
    fn default() -> Self {
        SetupConfig {
            n_total: 1e5,
            trap_hz: [5.0, 512.0, 512.0],
            a_base_bohr: DEFAULT_SCATTERING_BOHR,
            a12_ratio: 0.93,
            hbar_over_m: UnitSystem::default().hbar_over_m,
        }
    }
}

impl SetupConfig {
    pub fn to_setup(&self) -> PhysicalSetup {
        PhysicalSetup {
            n_total: self.n_total,
            trap: self.trap_hz.map(hz_to_rad_per_ms),
            a_base: self.a_base_bohr * BOHR_RADIUS_UM,
            a12_ratio: self.a12_ratio,
            units: UnitSystem {
                hbar_over_m: self.hbar_over_m,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullGridConfig {
    pub points: [usize; 3],
    pub half_widths: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// One entry per simulated axis; fewer than three axes means the
    /// trailing trap axes are frozen in their oscillator ground state.
    pub points: Vec<usize>,
    /// μm.
    pub half_widths: Vec<f64>,
    /// Grid used with `--full-3d`.
    pub full_3d: Option<FullGridConfig>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: vec![2048],
            half_widths: vec![256.0],
            full_3d: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub target: ModulationTarget,
    pub phase_relation: PhaseRelation,
    pub a_m: f64,
    pub f_hz: f64,
    /// ms.
    pub t_start: f64,
    /// ms; unset keeps the drive on until the end.
    pub t_end: Option<f64>,
    pub allow_immiscible: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            target: ModulationTarget::Scattering,
            phase_relation: PhaseRelation::InPhase,
            a_m: 0.0,
            f_hz: 100.0,
            t_start: 0.0,
            t_end: None,
            allow_immiscible: false,
        }
    }
}

impl ProtocolConfig {
    pub fn to_protocol(&self) -> ModulationProtocol {
        ModulationProtocol {
            target: self.target,
            phase_relation: self.phase_relation,
            a_m: self.a_m,
            omega_m: hz_to_rad_per_ms(self.f_hz),
            t_start: self.t_start,
            t_end: self.t_end.unwrap_or(f64::INFINITY),
            allow_immiscible: self.allow_immiscible,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub eta: f64,
    pub phase_reference: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let d = NoiseInjection::default();
        NoiseConfig {
            kind: d.kind,
            eta: d.eta,
            phase_reference: d.phase_reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Channel whose 1D side peak is reported; unset picks spin for
    /// out-of-phase drives and density otherwise.
    pub channel: Option<Channel>,
    /// Lower k cut for side peaks (μm⁻¹); unset uses 2π/(2R_TF).
    pub k_min: Option<f64>,
    pub bessel: BesselOptions,
    pub growth: GrowthOptions,
    /// Series column fed to the growth report; unset picks the spin power
    /// matching the dimensionality.
    pub growth_key: Option<String>,
    pub subharmonic: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            channel: None,
            k_min: None,
            bessel: BesselOptions::default(),
            growth: GrowthOptions {
                envelope_window: 10.0,
                ..GrowthOptions::default()
            },
            growth_key: None,
            subharmonic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Write every n-th sampled state to disk.
    pub field_every: u64,
    /// Only write sampled states with t in [start, end] (ms).
    pub field_window: Option<[f64; 2]>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            field_every: 1,
            field_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub frequencies_hz: Vec<f64>,
    /// 0 uses the available hardware parallelism.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    /// μm⁻¹.
    pub k_max: f64,
    pub n_k: usize,
    /// Drive frequencies whose resonant wavenumbers are tabulated.
    pub frequencies_hz: Vec<f64>,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        DispersionConfig {
            k_max: 2.0,
            n_k: 200,
            frequencies_hz: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub description: String,
    pub seed: u64,
    pub setup: SetupConfig,
    pub grid: GridConfig,
    pub ground_state: GroundStateConfig,
    pub protocol: ProtocolConfig,
    pub noise: NoiseConfig,
    pub evolution: EvolutionConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
    pub dispersion: DispersionConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            name: "custom".into(),
            description: String::new(),
            seed: 0,
            setup: SetupConfig::default(),
            grid: GridConfig::default(),
            ground_state: GroundStateConfig::default(),
            protocol: ProtocolConfig::default(),
            noise: NoiseConfig::default(),
            evolution: EvolutionConfig::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
            sweep: SweepConfig::default(),
            dispersion: DispersionConfig::default(),
        }
    }
}

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// Shipped presets, one per reference configuration.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".toml")))),*
        ];
    };
}

presets!(
    "fig1", "fig2", "fig3", "fig4a-l0", "fig4a-l1", "fig4a-l2", "fig4a-l3", "fig4a-l4", "fig4a-l5", "fig4a-l6",
    "fig4b-nr0", "fig4b-nr1", "fig4b-nr2", "fig4b-nr3", "fig4b-nr4", "fig4b-nr5", "fig4b-nr6", "fig6", "fig7",
    "fig8-A", "fig8-B", "fig8-C",
);

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            GpfError::Config(format!(
                "unknown preset '{name}'; available: {}",
                preset_names().collect::<Vec<_>>().join(", ")
            ))
        })
}

fn parse_value(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| GpfError::Config(format!("{origin}: {e}")))
}

/// Merge `over` into `base`: tables recurse, other values replace.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_table(parse_value(text, "config")?)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| GpfError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(GpfError::Config(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let cfg = Self::from_toml_str(preset_source(name)?)?;
        Ok(cfg)
    }

    /// TOML `text` layered over the named preset.
    pub fn preset_with(name: &str, text: &str) -> Result<Self> {
        let mut table = parse_value(preset_source(name)?, name)?;
        merge(&mut table, parse_value(text, "overrides")?);
        Self::from_table(table)
    }

    /// A preset, a file, or a file layered over a preset.
    pub fn load(file: Option<&Path>, preset: Option<&str>) -> Result<Self> {
        let mut table = match preset {
            Some(p) => parse_value(preset_source(p)?, p)?,
            None => toml::Table::new(),
        };
        match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| GpfError::io(path, e))?;
                merge(&mut table, parse_value(&text, &path.display().to_string())?);
            }
            None if preset.is_none() => {
                return Err(GpfError::Config("either a config file or a preset is required".into()));
            }
            None => {}
        }
        Self::from_table(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Replace the grid by its full-3D counterpart.
    pub fn into_full_3d(mut self) -> Result<Self> {
        if self.grid.points.len() == 3 {
            return Ok(self);
        }
        let g = self.grid.full_3d.take().ok_or_else(|| {
            GpfError::Config(format!("config '{}' defines no full_3d grid", self.name))
        })?;
        self.grid.points = g.points.to_vec();
        self.grid.half_widths = g.half_widths.to_vec();
        Ok(self)
    }

    pub fn setup(&self) -> PhysicalSetup {
        self.setup.to_setup()
    }

    pub fn to_grid(&self) -> Result<Grid> {
        Grid::new(&self.grid.points, &self.grid.half_widths)
    }

    pub fn dims(&self) -> usize {
        self.grid.points.len()
    }

    pub fn protocol(&self) -> ModulationProtocol {
        self.protocol.to_protocol()
    }

    pub fn noise(&self) -> NoiseInjection {
        NoiseInjection {
            kind: self.noise.kind,
            eta: self.noise.eta,
            seed: self.seed,
            phase_reference: self.noise.phase_reference,
        }
    }

    /// Channel analysed by default for this drive.
    pub fn channel(&self) -> Channel {
        self.analysis.channel.unwrap_or(match self.protocol.phase_relation {
            _ if self.dims() >= 2 => Channel::Spin,
            PhaseRelation::OutOfPhase => Channel::Spin,
            PhaseRelation::InPhase => Channel::Density,
        })
    }

    pub fn growth_key(&self) -> String {
        self.analysis.growth_key.clone().unwrap_or_else(|| {
            if self.dims() >= 2 {
                "spin_bessel_power".to_string()
            } else {
                format!("{}_band_power", self.channel().name())
            }
        })
    }

    /// SHA-256 of the canonical JSON form of everything that determines
    /// the simulated fields; output location and analysis options are left
    /// out so a run can be re-analysed under its own hash.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output");
            m.remove("analysis");
        }
        sha256_hex(v.to_string().as_bytes())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs").join(&self.name))
    }

    /// Grid choices that are legal but likely to under-resolve the run.
    pub fn resolution_warnings(&self) -> Result<Vec<String>> {
        let setup = self.setup();
        let grid = self.to_grid()?;
        let mut out = Vec::new();
        if self.dims() >= 2 && self.grid.points[0] != self.grid.points[1] {
            out.push("planar analysis assumes equal x and y resolution".to_string());
        }
        if setup.a_base == 0.0 {
            return Ok(out);
        }
        let tf = thomas_fermi(&setup, &grid)?;
        let peak = tf.total_density.iter().cloned().fold(0.0, f64::max);
        let bg = Background::new(background_density(peak, self.dims()), &setup.couplings(self.dims()), setup.units);
        let (_, xi_d) = sound_and_healing(&bg, Channel::Density);
        let dx = grid.spacings().into_iter().fold(0.0, f64::max);
        if dx > 0.5 * xi_d {
            out.push(format!(
                "grid spacing {dx:.3} μm exceeds half the density healing length ({xi_d:.3} μm)"
            ));
        }
        Ok(out)
    }

    /// Check every module-level invariant without running anything
    /// expensive. The dt·μ rule uses the Thomas–Fermi μ, or the
    /// oscillator zero-point energy for an interaction-free mixture.
    pub fn validate(&self) -> Result<()> {
        let setup = self.setup();
        setup.validate()?;
        let grid = self.to_grid()?;
        self.ground_state.validate()?;
        let protocol = self.protocol();
        protocol.validate(&setup)?;
        if !(self.noise.eta.is_finite() && self.noise.eta >= 0.0) {
            return Err(GpfError::Config(format!("noise eta must be ≥ 0, got {}", self.noise.eta)));
        }
        if self.output.field_every == 0 {
            return Err(GpfError::Config("output.field_every must be positive".into()));
        }
        let mu = if setup.a_base == 0.0 {
            0.5 * setup.trap[..grid.dims()].iter().sum::<f64>()
        } else {
            thomas_fermi(&setup, &grid)?.mu
        };
        let omega_kin = 0.5 * setup.units.hbar_over_m * grid.k_max_sq();
        self.evolution.validate(&protocol, mu, omega_kin)?;
        for w in self.resolution_warnings()? {
            log::warn!("{w}");
        }
        for f in self.sweep.frequencies_hz.iter().chain(&self.dispersion.frequencies_hz) {
            if !(f.is_finite() && *f > 0.0) {
                return Err(GpfError::Config(format!("frequencies must be positive, got {f}")));
            }
        }
        Ok(())
    }
}
