//! Cross-section geometry and per-unit-length line parameters.

use serde::{Deserialize, Serialize};

use crate::constants::C0;
use crate::{Error, Result};

/// What the CPW faces across the inter-chip gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facing {
    /// Opposing chip carries a metal ground plane over the line.
    MetalGround,
    /// Ground plane removed: the line faces the opposing substrate.
    Dielectric,
}

/// Flip-chip CPW cross-section. All lengths in micrometres.
///
/// The control-tier substrate occupies `-h_b < y < 0`, the CPW films
/// `0 < y < t`, and the inter-chip vacuum gap `h_s` is measured between the
/// facing film surfaces. The qubit tier (film then substrate of thickness
/// `h_t`) sits above the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    /// Center-conductor width.
    pub w: f64,
    /// Gap width between center conductor and ground.
    pub s: f64,
    /// Film thickness (field and London solvers only).
    pub t: f64,
    /// Inter-chip vacuum spacing.
    pub h_s: f64,
    /// Control-tier substrate thickness.
    pub h_b: f64,
    /// Qubit-tier substrate thickness.
    pub h_t: f64,
    /// Substrate relative permittivity (both tiers).
    pub eps_r: f64,
    pub facing: Facing,
}

impl CrossSection {
    /// The geometry used throughout the reference design: `w = s = 12 um`,
    /// 280 um silicon tiers at `eps_r = 11.45`, 150 nm films.
    pub fn reference(h_s: f64, facing: Facing) -> Self {
        Self {
            w: 12.0,
            s: 12.0,
            t: 0.15,
            h_s,
            h_b: 280.0,
            h_t: 280.0,
            eps_r: 11.45,
            facing,
        }
    }

    pub fn with_spacing(mut self, h_s: f64) -> Self {
        self.h_s = h_s;
        self
    }

    pub fn with_facing(mut self, facing: Facing) -> Self {
        self.facing = facing;
        self
    }

    /// Total CPW aperture `w + 2s`.
    pub fn aperture(&self) -> f64 {
        self.w + 2.0 * self.s
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("w", self.w),
            ("s", self.s),
            ("t", self.t),
            ("h_s", self.h_s),
            ("h_b", self.h_b),
            ("h_t", self.h_t),
        ];
        for (name, v) in lengths {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidGeometry(format!("{name} = {v} must be > 0")));
            }
        }
        if !self.eps_r.is_finite() || self.eps_r < 1.0 {
            return Err(Error::InvalidGeometry(format!(
                "eps_r = {} must be >= 1",
                self.eps_r
            )));
        }
        Ok(())
    }
}

/// Which route produced a set of line parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Conformal,
    FieldSolver,
}

/// Per-unit-length line parameters (SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    /// Geometric inductance, H/m.
    pub l_g: f64,
    /// Kinetic inductance, H/m (0 when not computed).
    pub l_k: f64,
    /// Capacitance, F/m.
    pub c: f64,
    pub method: Method,
}

impl LineParams {
    pub fn new(l_g: f64, c: f64, method: Method) -> Self {
        Self {
            l_g,
            l_k: 0.0,
            c,
            method,
        }
    }

    pub fn with_kinetic(mut self, l_k: f64) -> Self {
        self.l_k = l_k;
        self
    }

    /// Total series inductance `L_g + L_k`.
    pub fn l_total(&self) -> f64 {
        self.l_g + self.l_k
    }

    /// `c² L_g C`: effective permittivity of the quasi-TEM mode.
    pub fn eps_eff(&self) -> f64 {
        C0 * C0 * self.l_g * self.c
    }

    /// Characteristic impedance `sqrt((L_g + L_k)/C)`, ohm.
    pub fn impedance(&self) -> f64 {
        (self.l_total() / self.c).sqrt()
    }

    /// Phase velocity `1/sqrt((L_g + L_k) C)`, m/s.
    pub fn phase_velocity(&self) -> f64 {
        1.0 / (self.l_total() * self.c).sqrt()
    }
}
