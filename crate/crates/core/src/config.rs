//! Run configuration read from a single TOML file.
//!
//! Frequencies, rates and couplings are in the energy unit of the model
//! (`ω_q` for the charge qubit, `Δ` for the flopping mode, `E_J` for the
//! transmon and fluxonium). Keys ending in `_over_omega_q` are ratios to the
//! bare qubit splitting; keys starting with `kappa_` are times in units of
//! `1/κ`.

use serde::{Deserialize, Serialize};

use crate::couplings::DerivativeOptions;
use crate::error::{Error, Result};
use crate::floquet::FloquetConfig;
use crate::lindblad::{Frame, SimConfig};
use crate::models::{
    build_charge_qubit, build_flopping_mode, build_fluxonium, build_transmon, ChargeQubitParams, FloppingParams,
    FluxoniumParams, SystemModel, TransmonParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Figure the recipe reproduces.
    pub figure: String,
    pub model: ModelSection,
    pub resonator: ResonatorSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub floquet: FloquetSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "device", rename_all = "snake_case")]
pub enum ModelSection {
    ChargeQubit(ChargeQubitParams),
    FloppingMode(FloppingParams),
    Transmon(TransmonParams),
    Fluxonium(FluxoniumParams),
}

impl ModelSection {
    pub fn build(&self) -> Result<SystemModel<f64>> {
        match self {
            Self::ChargeQubit(p) => build_charge_qubit(p.omega_q),
            Self::FloppingMode(p) => build_flopping_mode(p),
            Self::Transmon(p) => build_transmon(p),
            Self::Fluxonium(p) => build_fluxonium(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub omega_r_over_omega_q: f64,
    pub kappa: f64,
    pub g_perp: f64,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
}

fn default_fock_dim() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub a_q_over_omega_q: f64,
    /// Adds the compensation tone and moves `ω_d` to `ω_r + χ̄`.
    pub compensation: bool,
    /// Adds a dispersive baseline matched to the longitudinal SNR at long times.
    pub dispersive: bool,
    /// Resonator frequency of the dispersive baseline.
    pub dispersive_omega_r_over_omega_q: Option<f64>,
    /// Starts trajectories from `σ_z = ±1` instead of the dressed values.
    pub bare_polarization: bool,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            a_q_over_omega_q: 0.0,
            compensation: false,
            dispersive: false,
            dispersive_omega_r_over_omega_q: None,
            bare_polarization: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetSection {
    /// Replica count; the device default when absent.
    pub n_rep: Option<usize>,
    pub fd_step: Option<f64>,
    pub levels: Option<Vec<usize>>,
    pub max_dim: Option<usize>,
}

/// Grid axis: an explicit list or `num` evenly spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, num: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Linspace { start, stop, num } => match num {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub omega_r_over_omega_q: Option<Grid>,
    pub a_q_over_omega_q: Option<Grid>,
    /// Adds the static (`ω_d → 0`) levels to the spectrum output.
    pub static_reference: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub format: OutputFormat,
    pub kappa_t_end: f64,
    pub t_points: usize,
    pub kappa_t_star: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), format: OutputFormat::Csv, kappa_t_end: 5.0, t_points: 2000, kappa_t_star: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub system_levels: Option<usize>,
    pub dt: Option<f64>,
    pub frame: Frame,
    /// With `--oracle subset`, every `stride`-th grid point is simulated.
    pub stride: usize,
    /// Recorded times per oracle trajectory.
    pub t_points: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { system_levels: None, dt: None, frame: Frame::Rotating, stride: 10, t_points: 201 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        let r = &self.resonator;
        if !(r.omega_r_over_omega_q > 0.0) || !(r.kappa > 0.0) || !(r.g_perp >= 0.0) {
            return bad("resonator frequency and kappa must be positive, g_perp non-negative");
        }
        if r.fock_dim < 6 {
            return bad("fock_dim must be at least 6");
        }
        if !(self.drive.a_q_over_omega_q >= 0.0) {
            return bad("a_q_over_omega_q must be non-negative");
        }
        if let Some(w) = self.drive.dispersive_omega_r_over_omega_q {
            if !(w > 0.0) {
                return bad("dispersive_omega_r_over_omega_q must be positive");
            }
        }
        if let Some(g) = &self.sweep.omega_r_over_omega_q {
            let v = g.values();
            if v.is_empty() || v.iter().any(|&x| !(x > 0.0)) {
                return bad("sweep.omega_r_over_omega_q must be a nonempty list of positive ratios");
            }
        }
        if let Some(g) = &self.sweep.a_q_over_omega_q {
            let v = g.values();
            if v.is_empty() || v.iter().any(|&x| !(x >= 0.0)) {
                return bad("sweep.a_q_over_omega_q must be a nonempty list of non-negative ratios");
            }
        }
        let o = &self.output;
        if !(o.kappa_t_end > 0.0) || o.t_points < 2 || !(o.kappa_t_star > 0.0) || o.kappa_t_star > o.kappa_t_end {
            return bad("output times must satisfy 0 < kappa_t_star <= kappa_t_end and t_points >= 2");
        }
        if self.oracle.stride == 0 || self.oracle.t_points < 2 {
            return bad("oracle.stride must be positive and oracle.t_points at least 2");
        }
        Ok(())
    }

    /// Resonator ratios to run: the sweep axis, or the single resonator value.
    pub fn omega_r_ratios(&self) -> Vec<f64> {
        self.sweep.omega_r_over_omega_q.as_ref().map_or_else(|| vec![self.resonator.omega_r_over_omega_q], Grid::values)
    }

    /// Drive ratios to run: the sweep axis, or the single drive value.
    pub fn a_q_ratios(&self) -> Vec<f64> {
        self.sweep.a_q_over_omega_q.as_ref().map_or_else(|| vec![self.drive.a_q_over_omega_q], Grid::values)
    }

    pub fn floquet_config(&self, label: &str) -> FloquetConfig {
        let mut cfg = FloquetConfig::for_device(label);
        if let Some(n) = self.floquet.n_rep {
            cfg.n_rep = n;
        }
        if let Some(l) = &self.floquet.levels {
            cfg.levels = Some(l.clone());
        }
        if let Some(m) = self.floquet.max_dim {
            cfg.max_dim = m;
        }
        cfg
    }

    pub fn derivative_options(&self) -> DerivativeOptions {
        let mut o = DerivativeOptions::default();
        if let Some(h) = self.floquet.fd_step {
            o.fd_step = h;
        }
        o
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            fock_dim: self.resonator.fock_dim,
            dt: self.oracle.dt,
            frame: self.oracle.frame,
            system_levels: self.oracle.system_levels,
            ..SimConfig::default()
        }
    }
}
