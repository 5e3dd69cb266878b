//! Quarter-wave resonator predictions from cross-section results.
//!
//! Frequencies follow `f = (2p - 1) / (4 l_tot sqrt((L_g + L_k) C))` with the
//! open-end pad folded into `l_tot = l_r + α1 R² + α2 R`. Coupling to the
//! feedline uses the coupled-line model driven by the coupling-section
//! capacitance matrix.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::UM;
use crate::fieldsolver::CapMatrix;
use crate::geometry::LineParams;
use crate::{Error, Result};

/// Resonator layout. Lengths in micrometres, `alpha1` in 1/um.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonatorSpec {
    /// Short-ended segment.
    pub l_s: f64,
    /// Coupled segment, including the two 90-degree arc allowances.
    pub l_c: f64,
    /// Open segment up to the pad center.
    pub l_o: f64,
    /// Inner radius of the circular coupling pad.
    pub r: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Mode index, 1 for the fundamental.
    pub p: u32,
    /// Feedline center width.
    pub w_f: f64,
    /// Feedline gap.
    pub s_f: f64,
    /// Ground strip between resonator and feedline gaps.
    pub d: f64,
    /// Fraction of the length facing bare dielectric.
    pub gamma: f64,
}

impl Default for ResonatorSpec {
    fn default() -> Self {
        Self::reference()
    }
}

impl ResonatorSpec {
    /// The reference 3D-validated layout: `(l_s, l_c, l_o) = (3780.3, 425.7,
    /// 850.4) um`, `R = 29.4 um`, `α1 = 0.032 /um`, `α2 = 2.9`, feedline
    /// `w_f = 9`, `s_f = 10`, coupling strip `d = 6 um`.
    pub fn reference() -> Self {
        Self {
            l_s: 3780.3,
            l_c: 425.7,
            l_o: 850.4,
            r: 29.4,
            alpha1: 0.032,
            alpha2: 2.9,
            p: 1,
            w_f: 9.0,
            s_f: 10.0,
            d: 6.0,
            gamma: 0.0,
        }
    }

    /// Designed length `l_s + l_c + l_o`.
    pub fn l_r(&self) -> f64 {
        self.l_s + self.l_c + self.l_o
    }

    /// Pad allowance `α1 R² + α2 R`.
    pub fn pad_length(&self) -> f64 {
        self.alpha1 * self.r * self.r + self.alpha2 * self.r
    }

    /// Effective open segment `l_o + α1 R² + α2 R`.
    pub fn open_effective(&self) -> f64 {
        self.l_o + self.pad_length()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_s", self.l_s),
            ("l_c", self.l_c),
            ("l_o", self.l_o),
            ("r", self.r),
            ("w_f", self.w_f),
            ("s_f", self.s_f),
            ("d", self.d),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidGeometry(format!("{name} = {v} must be >= 0")));
            }
        }
        if self.l_r() <= 0.0 {
            return Err(Error::InvalidGeometry("l_s + l_c + l_o must be > 0".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidGeometry("mode index p must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidGeometry(format!(
                "gamma = {} outside [0, 1]",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Electrical length `l_r + α1 R² + α2 R`, um. The short end adds nothing.
pub fn total_length(spec: &ResonatorSpec) -> f64 {
    spec.l_r() + spec.pad_length()
}

/// Resonant frequency of mode `p` in Hz, `l_tot` in um.
pub fn resonant_frequency(lp: &LineParams, l_tot: f64, p: u32) -> f64 {
    let order = (2 * p - 1) as f64;
    order / (4.0 * l_tot * UM * (lp.l_total() * lp.c).sqrt())
}

/// Coupling quality factor, coupling-induced shift and intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingResult {
    /// `None` when the mutual capacitance vanishes.
    pub q_c: Option<f64>,
    /// Coupling-induced frequency shift, Hz.
    pub df_c: f64,
    pub kappa: f64,
    pub theta: f64,
    pub psi: f64,
    /// Impedance of the coupled section, ohm.
    pub z2: f64,
    pub zr: f64,
    /// Phase velocity in the resonator line, m/s.
    pub c_l: f64,
}

/// Coupling quality factor and frequency shift of the resonator to the
/// feedline. `f_bare` in Hz, `l_tot` in um, `zr` in ohm.
pub fn coupling(
    cm: &CapMatrix,
    f_bare: f64,
    spec: &ResonatorSpec,
    l_tot: f64,
    zr: f64,
) -> Result<CouplingResult> {
    let kappa = -cm.c_rf / (cm.c_rr * cm.c_ff).sqrt();
    if !kappa.is_finite() || kappa.abs() >= 1.0 {
        return Err(Error::NonPhysicalCoupling(kappa.abs()));
    }
    let l_tot_m = l_tot * UM;
    let c_l = f_bare * 4.0 * l_tot_m;
    let z2 = 1.0 / (c_l * cm.c_ff * (1.0 - kappa * kappa).sqrt());
    let theta = 2.0 * PI * spec.l_c / (4.0 * l_tot);
    let psi = 2.0 * PI * (spec.l_c + 2.0 * spec.open_effective()) / (4.0 * l_tot);
    let order = (2 * spec.p - 1) as f64;
    let inv_q = 2.0 * kappa * kappa * theta.sin().powi(2) / (PI * order);
    let q_c = (inv_q > 0.0).then(|| 1.0 / inv_q);
    let bracket =
        kappa * kappa * (2.0 * psi.cos() + theta.cos()) / 2.0 + (z2 - zr) * psi.cos() / zr;
    let df_c = -c_l * theta.sin() / (2.0 * PI * l_tot_m) * bracket;
    Ok(CouplingResult {
        q_c,
        df_c,
        kappa,
        theta,
        psi,
        z2,
        zr,
        c_l,
    })
}

/// Inter-chip gaps measured at the four chip corners.
///
/// Chip coordinates run from the south-west corner: `x` east, `y` north, um.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapMap {
    pub nw: f64,
    pub ne: f64,
    pub sw: f64,
    pub se: f64,
    pub width: f64,
    pub height: f64,
}

impl GapMap {
    pub fn validate(&self) -> Result<()> {
        for v in [self.nw, self.ne, self.sw, self.se] {
            if !(v > 0.0) {
                return Err(Error::InvalidGeometry(format!("corner gap {v} must be > 0")));
            }
        }
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::InvalidGeometry("chip size must be > 0".into()));
        }
        Ok(())
    }
}

/// Bilinear interpolation of the corner gaps at chip position `(x, y)`.
pub fn gap_at(map: &GapMap, x: f64, y: f64) -> Result<f64> {
    map.validate()?;
    if !(0.0..=map.width).contains(&x) || !(0.0..=map.height).contains(&y) {
        return Err(Error::OutOfBounds { x, y });
    }
    let u = x / map.width;
    let v = y / map.height;
    Ok((1.0 - u) * (1.0 - v) * map.sw
        + u * (1.0 - v) * map.se
        + (1.0 - u) * v * map.nw
        + u * v * map.ne)
}

/// Pad-length coefficients fitted to frequency-vs-radius data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffLengthFit {
    pub alpha1: f64,
    pub alpha2: f64,
    /// RMS of `f_model - f_sample`, Hz.
    pub rms: f64,
}

impl EffLengthFit {
    /// Pad allowance at radius `r`, um.
    pub fn pad_length(&self, r: f64) -> f64 {
        self.alpha1 * r * r + self.alpha2 * r
    }
}

/// Fits `f = β / (l_r + α1 R² + α2 R)` with `β = 1/(4 sqrt(L C))` fixed by the
/// line. Samples are `(R um, f Hz)`; `l_r` in um.
///
/// The model is linear in the pad length `β/f - l_r`, so the fit is an
/// ordinary least-squares problem in `(α1, α2)`.
pub fn fit_eff_length(samples: &[(f64, f64)], lp: &LineParams, l_r: f64) -> Result<EffLengthFit> {
    let mut radii: Vec<f64> = samples.iter().map(|s| s.0).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    if radii.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct radii, got {}",
            radii.len()
        )));
    }
    let beta_um = 1.0 / (4.0 * (lp.l_total() * lp.c).sqrt()) / UM;
    // Normal equations on column-scaled regressors [R², R].
    let s1 = samples.iter().map(|s| s.0.powi(4)).sum::<f64>().sqrt();
    let s2 = samples.iter().map(|s| s.0 * s.0).sum::<f64>().sqrt();
    if s1 == 0.0 || s2 == 0.0 {
        return Err(Error::Fit("all radii are zero".into()));
    }
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(r, f) in samples {
        let y = beta_um / f - l_r;
        let x1 = r * r / s1;
        let x2 = r / s2;
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < 1e-12 {
        return Err(Error::Fit("rank-deficient radius set".into()));
    }
    let alpha1 = (a22 * b1 - a12 * b2) / det / s1;
    let alpha2 = (a11 * b2 - a12 * b1) / det / s2;
    let rms = (samples
        .iter()
        .map(|&(r, f)| (beta_um / (l_r + alpha1 * r * r + alpha2 * r) - f).powi(2))
        .sum::<f64>()
        / samples.len() as f64)
        .sqrt();
    Ok(EffLengthFit {
        alpha1,
        alpha2,
        rms,
    })
}
