//! Ground-plane cutout design for spacing-insensitive resonators.
//!
//! A fraction `γ` of the resonator length faces bare dielectric (cutout in the
//! opposing ground plane) and the rest faces metal. The two cases respond to
//! the inter-chip spacing with opposite signs, so the mixed line
//!
//! ```text
//! L_e = (1-γ)(L_g + L_k) + γ(L_g' + L_k'),   C_e = (1-γ) C + γ C'
//! ```
//!
//! can be made nearly flat in `h_s`. The cost is the summed magnitude of
//! `∂(L_e C_e)^(-1/2) / ∂h_s` over a spacing grid; it does not depend on the
//! resonator length.

use serde::Serialize;

use crate::conformal;
use crate::geometry::{CrossSection, Facing, LineParams};
use crate::search::scan_then_golden;
use crate::{Error, Result};

/// Metal-facing and dielectric-facing tables on a shared spacing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MixInput {
    /// Spacing grid, um, strictly increasing.
    pub h_s: Vec<f64>,
    pub metal: Vec<LineParams>,
    pub dielectric: Vec<LineParams>,
    pub include_kinetic: bool,
}

impl MixInput {
    pub fn new(
        h_s: Vec<f64>,
        metal: Vec<LineParams>,
        dielectric: Vec<LineParams>,
        include_kinetic: bool,
    ) -> Result<Self> {
        if h_s.len() < 2 {
            return Err(Error::Domain("cutout mix needs at least 2 spacings".into()));
        }
        if metal.len() != h_s.len() || dielectric.len() != h_s.len() {
            return Err(Error::Domain(format!(
                "table length mismatch: grid {}, metal {}, dielectric {}",
                h_s.len(),
                metal.len(),
                dielectric.len()
            )));
        }
        if h_s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("spacing grid must be strictly increasing".into()));
        }
        Ok(Self {
            h_s,
            metal,
            dielectric,
            include_kinetic,
        })
    }

    /// Conformal tables for `base` over `[start, stop]` with spacing `step`.
    pub fn conformal(base: &CrossSection, start: f64, stop: f64, step: f64) -> Result<Self> {
        let grid = spacing_grid(start, stop, step)?;
        let table = |facing: Facing| -> Result<Vec<LineParams>> {
            grid.iter()
                .map(|&h| conformal::line_params(&base.with_spacing(h).with_facing(facing)))
                .collect()
        };
        Self::new(
            grid.clone(),
            table(Facing::MetalGround)?,
            table(Facing::Dielectric)?,
            false,
        )
    }

    /// Index of the grid point nearest the middle of the spacing range.
    pub fn mid_index(&self) -> usize {
        let mid = 0.5 * (self.h_s[0] + self.h_s[self.h_s.len() - 1]);
        self.h_s
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - mid).abs().total_cmp(&(b.1 - mid).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Inclusive uniform grid `start, start+step, ..., stop`.
pub fn spacing_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::Domain(format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// Mixed per-unit-length parameters at every grid spacing.
pub fn effective_lc(mix: &MixInput, gamma: f64) -> Result<Vec<LineParams>> {
    check_gamma(gamma)?;
    let k = if mix.include_kinetic { 1.0 } else { 0.0 };
    Ok(mix
        .metal
        .iter()
        .zip(&mix.dielectric)
        .map(|(m, d)| LineParams {
            l_g: (1.0 - gamma) * m.l_g + gamma * d.l_g,
            l_k: k * ((1.0 - gamma) * m.l_k + gamma * d.l_k),
            c: (1.0 - gamma) * m.c + gamma * d.c,
            method: m.method,
        })
        .collect())
}

/// First derivative on a nonuniform grid: second-order central differences in
/// the interior, one-sided at the ends.
pub fn grid_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (y[1] - y[0]) / (x[1] - x[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        d[i] = (hl * hl * y[i + 1] - hr * hr * y[i - 1] + (hr * hr - hl * hl) * y[i])
            / (hl * hr * (hl + hr));
    }
    d
}

/// Sensitivity cost of a mix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cost {
    /// `Σ_i |∂v/∂h_s|` with `v = (L_e C_e)^(-1/2)`, in (m/s)/um.
    pub sum: f64,
    /// Mean of `|∂v/∂h_s| / v̄`, 1/um: independent of grid density.
    pub normalized: f64,
}

pub fn cost(mix: &MixInput, gamma: f64) -> Result<Cost> {
    let lines = effective_lc(mix, gamma)?;
    let v: Vec<f64> = lines.iter().map(LineParams::phase_velocity).collect();
    let d = grid_derivative(&mix.h_s, &v);
    let sum: f64 = d.iter().map(|x| x.abs()).sum();
    let mean_v = v.iter().sum::<f64>() / v.len() as f64;
    Ok(Cost {
        sum,
        normalized: sum / d.len() as f64 / mean_v,
    })
}

/// Optimal cutout ratio and the resulting frequency flatness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaOptimum {
    pub gamma: f64,
    pub cost: Cost,
    /// Spacing the deviation curve is referenced to, um.
    pub reference_h_s: f64,
    /// `(h_s, f(h_s)/f(reference) - 1)` at the optimum.
    pub deviation: Vec<(f64, f64)>,
    /// Cost does not depend on `γ` (identical tables).
    pub degenerate: bool,
}

impl GammaOptimum {
    pub fn max_abs_deviation(&self) -> f64 {
        self.deviation.iter().map(|d| d.1.abs()).fold(0.0, f64::max)
    }
}

/// Minimizes the cost over `γ ∈ [0, 1]` to 1e-3 (scan plus golden section).
pub fn optimize_gamma(mix: &MixInput) -> Result<GammaOptimum> {
    let probe: Vec<f64> = (0..=10)
        .map(|i| cost(mix, i as f64 / 10.0).map(|c| c.sum))
        .collect::<Result<_>>()?;
    let hi = probe.iter().copied().fold(f64::MIN, f64::max);
    let lo = probe.iter().copied().fold(f64::MAX, f64::min);
    let degenerate = hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE);
    let best = scan_then_golden(|g| cost(mix, g).map(|c| c.sum), 0.0, 1.0, 21, 1e-3)?;
    let gamma = best.x.clamp(0.0, 1.0);
    let lines = effective_lc(mix, gamma)?;
    let reference = mix.mid_index();
    let v_ref = lines[reference].phase_velocity();
    let deviation = mix
        .h_s
        .iter()
        .zip(&lines)
        .map(|(&h, lp)| (h, lp.phase_velocity() / v_ref - 1.0))
        .collect();
    Ok(GammaOptimum {
        gamma,
        cost: cost(mix, gamma)?,
        reference_h_s: mix.h_s[reference],
        deviation,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Method;
    use approx::assert_relative_eq;

    fn reference_mix(step: f64) -> MixInput {
        MixInput::conformal(&CrossSection::reference(8.0, Facing::MetalGround), 6.0, 10.0, step).unwrap()
    }

    #[test]
    fn endpoints_reproduce_tables() {
        let mix = reference_mix(0.25);
        assert_eq!(effective_lc(&mix, 0.0).unwrap(), mix.metal);
        assert_eq!(effective_lc(&mix, 1.0).unwrap(), mix.dielectric);
        let half = effective_lc(&mix, 0.5).unwrap();
        for ((h, m), d) in half.iter().zip(&mix.metal).zip(&mix.dielectric) {
            assert_relative_eq!(h.l_g, 0.5 * (m.l_g + d.l_g), max_relative = 1e-15);
            assert_relative_eq!(h.c, 0.5 * (m.c + d.c), max_relative = 1e-15);
        }
    }

    #[test]
    fn kinetic_terms_follow_flag() {
        let mut mix = reference_mix(1.0);
        for lp in mix.metal.iter_mut().chain(mix.dielectric.iter_mut()) {
            lp.l_k = 1e-8;
        }
        assert!(effective_lc(&mix, 0.3).unwrap().iter().all(|l| l.l_k == 0.0));
        mix.include_kinetic = true;
        assert!(effective_lc(&mix, 0.3).unwrap().iter().all(|l| (l.l_k - 1e-8).abs() < 1e-20));
    }

    #[test]
    fn affine_in_gamma() {
        let mix = reference_mix(0.5);
        let a = effective_lc(&mix, 0.2).unwrap();
        let b = effective_lc(&mix, 0.6).unwrap();
        let m = effective_lc(&mix, 0.4).unwrap();
        for i in 0..a.len() {
            assert_relative_eq!(m[i].c, 0.5 * (a[i].c + b[i].c), max_relative = 1e-14);
            assert_relative_eq!(m[i].l_g, 0.5 * (a[i].l_g + b[i].l_g), max_relative = 1e-14);
        }
    }

    #[test]
    fn flat_tables_cost_nothing() {
        let lp = LineParams::new(4e-7, 1.5e-10, Method::Conformal);
        let mix = MixInput::new(vec![1.0, 2.0, 3.0], vec![lp; 3], vec![lp; 3], false).unwrap();
        assert_eq!(cost(&mix, 0.4).unwrap().sum, 0.0);
        let opt = optimize_gamma(&mix).unwrap();
        assert!(opt.degenerate);
    }

    #[test]
    fn derivative_exact_for_quadratics() {
        let x = [0.0, 0.5, 1.5, 3.0];
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let d = grid_derivative(&x, &y);
        assert_relative_eq!(d[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(d[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn normalized_cost_stable_under_step_halving() {
        for gamma in [0.0, 0.5, 1.0] {
            let a = cost(&reference_mix(0.25), gamma).unwrap().normalized;
            let b = cost(&reference_mix(0.125), gamma).unwrap().normalized;
            assert!((a - b).abs() / a < 0.01, "gamma {gamma}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_optimum() {
        let mix = reference_mix(0.25);
        let opt = optimize_gamma(&mix).unwrap();
        assert!((opt.gamma - 0.75).abs() <= 0.05, "gamma_opt = {}", opt.gamma);
        assert_eq!(opt.reference_h_s, 8.0);
        assert!(opt.max_abs_deviation() < 2e-3);
        assert!(cost(&mix, 0.0).unwrap().sum > opt.cost.sum);
        assert!(cost(&mix, 1.0).unwrap().sum > opt.cost.sum);
        assert!(!opt.degenerate);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let lp = LineParams::new(4e-7, 1.5e-10, Method::Conformal);
        assert!(MixInput::new(vec![1.0, 2.0], vec![lp; 2], vec![lp; 3], false).is_err());
        assert!(MixInput::new(vec![1.0], vec![lp], vec![lp], false).is_err());
        assert!(effective_lc(&MixInput::new(vec![1.0, 2.0], vec![lp; 2], vec![lp; 2], false).unwrap(), 1.5).is_err());
    }
}
