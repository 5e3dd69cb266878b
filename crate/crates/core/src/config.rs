//! JSON run configuration for the command-line front end.
//!
//! Every block is optional and defaults to the reference design. Lengths are
//! in micrometres except the film thickness `t_nm` and penetration depth
//! `lambda_nm`, which are in nanometres. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "cross_section": { "w": 12, "s": 12, "t_nm": 150, "h_s": 8,
//!                      "h_b": 280, "h_t": 280, "eps_r": 11.45,
//!                      "facing": "metal_ground" },
//!   "resonator": { "l_s": 3780.3, "l_c": 425.7, "l_o": 850.4, "r": 29.4,
//!                  "alpha1": 0.032, "alpha2": 2.9, "p": 1,
//!                  "w_f": 9, "s_f": 10, "d": 6, "gamma": 0 },
//!   "solver": { "method": "conf", "lambda_nm": 83, "include_kinetic": false,
//!               "grid": { "growth": 1.25 } },
//!   "sweep": { "var": "h_s", "start": 3, "stop": 60, "step": 1 },
//!   "output": { "csv": "out.csv" }
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cutout::spacing_grid;
use crate::fieldsolver::{GridSpec, InterfaceLayers};
use crate::geometry::{CrossSection, Facing};
use crate::resonator::{GapMap, ResonatorSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossSectionConfig {
    pub w: f64,
    pub s: f64,
    pub t_nm: f64,
    pub h_s: f64,
    pub h_b: f64,
    pub h_t: f64,
    pub eps_r: f64,
    pub facing: Facing,
}

impl Default for CrossSectionConfig {
    fn default() -> Self {
        Self::from(&CrossSection::reference(8.0, Facing::MetalGround))
    }
}

impl From<&CrossSection> for CrossSectionConfig {
    fn from(x: &CrossSection) -> Self {
        Self {
            w: x.w,
            s: x.s,
            t_nm: x.t * 1e3,
            h_s: x.h_s,
            h_b: x.h_b,
            h_t: x.h_t,
            eps_r: x.eps_r,
            facing: x.facing,
        }
    }
}

impl CrossSectionConfig {
    pub fn to_cross_section(&self) -> CrossSection {
        CrossSection {
            w: self.w,
            s: self.s,
            t: self.t_nm * 1e-3,
            h_s: self.h_s,
            h_b: self.h_b,
            h_t: self.h_t,
            eps_r: self.eps_r,
            facing: self.facing,
        }
    }
}

/// Which cross-section route to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Conf,
    Fd,
    Both,
}

impl MethodChoice {
    pub fn conformal(self) -> bool {
        matches!(self, Self::Conf | Self::Both)
    }

    pub fn field_solver(self) -> bool {
        matches!(self, Self::Fd | Self::Both)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "conf" => Ok(Self::Conf),
            "fd" => Ok(Self::Fd),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!("method '{s}' is not one of conf, fd, both"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: MethodChoice,
    pub lambda_nm: f64,
    pub include_kinetic: bool,
    pub grid: GridSpec,
    pub layers: InterfaceLayers,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: MethodChoice::Conf,
            lambda_nm: 83.0,
            include_kinetic: false,
            grid: GridSpec::default(),
            layers: InterfaceLayers::default(),
        }
    }
}

/// Inclusive arithmetic sweep of one named variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub var: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Variables a sweep may drive, with their units.
pub const SWEEP_VARS: &[(&str, &str)] = &[
    ("h_s", "um"),
    ("w", "um"),
    ("s", "um"),
    ("t_nm", "nm"),
    ("h_b", "um"),
    ("h_t", "um"),
    ("eps_r", "1"),
    ("d", "um"),
    ("r", "um"),
    ("l_c", "um"),
    ("gamma", "1"),
    ("lambda_nm", "nm"),
];

impl SweepConfig {
    /// Parse `VAR=START:STOP:STEP`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("sweep '{s}' is not VAR=START:STOP:STEP"));
        let (var, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<f64> = range
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if parts.len() != 3 {
            return Err(bad());
        }
        let sweep = Self {
            var: var.trim().to_string(),
            start: parts[0],
            stop: parts[1],
            step: parts[2],
        };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if !SWEEP_VARS.iter().any(|(v, _)| *v == self.var) {
            let names: Vec<&str> = SWEEP_VARS.iter().map(|v| v.0).collect();
            return Err(Error::Config(format!(
                "unknown sweep variable '{}' (expected one of {})",
                self.var,
                names.join(", ")
            )));
        }
        self.values().map(|_| ())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        spacing_grid(self.start, self.stop, self.step).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub field: Option<PathBuf>,
}

/// A resonator placed on the chip for batch evaluation. Unset lengths fall
/// back to the `resonator` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedResonator {
    pub name: String,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub l_s: Option<f64>,
    #[serde(default)]
    pub l_c: Option<f64>,
    #[serde(default)]
    pub l_o: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
}

impl PlacedResonator {
    pub fn spec(&self, base: &ResonatorSpec) -> ResonatorSpec {
        ResonatorSpec {
            l_s: self.l_s.unwrap_or(base.l_s),
            l_c: self.l_c.unwrap_or(base.l_c),
            l_o: self.l_o.unwrap_or(base.l_o),
            r: self.r.unwrap_or(base.r),
            ..*base
        }
    }
}

/// A measured resonator for penetration-depth fitting. Unset geometry falls
/// back to the `cross_section` and `resonator` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredResonator {
    pub f_meas_hz: f64,
    #[serde(default)]
    pub h_s: Option<f64>,
    #[serde(default)]
    pub w: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub l_tot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffLengthConfig {
    /// Straight length used in the fit; defaults to the resonator block.
    pub l_r: Option<f64>,
    /// `(R um, f Hz)` pairs.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoutConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for CutoutConfig {
    fn default() -> Self {
        Self {
            start: 6.0,
            stop: 10.0,
            step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cross_section: CrossSectionConfig,
    pub resonator: ResonatorSpec,
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
    pub gap_map: Option<GapMap>,
    pub resonators: Vec<PlacedResonator>,
    /// Chip positions `(x, y)` in um for gap interpolation.
    pub points: Vec<(f64, f64)>,
    pub measured: Vec<MeasuredResonator>,
    pub eff_length: EffLengthConfig,
    pub cutout: CutoutConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let as_config = |e: Error| Error::Config(e.to_string());
        self.cross_section.to_cross_section().validate().map_err(as_config)?;
        self.resonator.validate().map_err(as_config)?;
        self.solver.grid.validate()?;
        self.solver.layers.validate()?;
        if !(self.solver.lambda_nm > 0.0) {
            return Err(Error::Config(format!("lambda_nm {} must be > 0", self.solver.lambda_nm)));
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        if let Some(g) = &self.gap_map {
            g.validate().map_err(as_config)?;
        }
        Ok(())
    }

    pub fn cross_section(&self) -> CrossSection {
        self.cross_section.to_cross_section()
    }

    /// Copy with one sweep variable set.
    pub fn with_var(&self, var: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        let x = &mut c.cross_section;
        let r = &mut c.resonator;
        match var {
            "h_s" => x.h_s = value,
            "w" => x.w = value,
            "s" => x.s = value,
            "t_nm" => x.t_nm = value,
            "h_b" => x.h_b = value,
            "h_t" => x.h_t = value,
            "eps_r" => x.eps_r = value,
            "d" => r.d = value,
            "r" => r.r = value,
            "l_c" => r.l_c = value,
            "gamma" => r.gamma = value,
            "lambda_nm" => c.solver.lambda_nm = value,
            _ => return Err(Error::Config(format!("unknown sweep variable '{var}'"))),
        }
        c.sweep = None;
        c.validate()?;
        Ok(c)
    }

    /// Current value of a sweepable variable.
    pub fn var(&self, var: &str) -> Result<f64> {
        let (x, r) = (&self.cross_section, &self.resonator);
        Ok(match var {
            "h_s" => x.h_s,
            "w" => x.w,
            "s" => x.s,
            "t_nm" => x.t_nm,
            "h_b" => x.h_b,
            "h_t" => x.h_t,
            "eps_r" => x.eps_r,
            "d" => r.d,
            "r" => r.r,
            "l_c" => r.l_c,
            "gamma" => r.gamma,
            "lambda_nm" => self.solver.lambda_nm,
            _ => return Err(Error::Config(format!("unknown sweep variable '{var}'"))),
        })
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
