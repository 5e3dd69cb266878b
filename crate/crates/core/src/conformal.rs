//! Closed-form per-unit-length `L_g` and `C` of the flip-chip CPW.
//!
//! The cross-section is split along the control-tier metal surface by
//! magnetic walls in the CPW gaps. The bottom half is a conventional CPW on a
//! finite substrate (partial capacitances with moduli `k1`, `k2`); the top
//! half is a CPW under a cover at height `h_s` (modulus `ks`). With a metal
//! plane overhead the halves combine in parallel. Facing bare dielectric, the
//! top half's vacuum and substrate contributions combine in series.
//!
//! Films are treated as zero thickness; `t` and `h_t` are ignored here.

use std::f64::consts::PI;

use crate::constants::{EPS0, MU0};
use crate::elliptic::{k_ratio, Modulus};
use crate::geometry::{CrossSection, Facing, LineParams, Method};
use crate::{Error, Result};

/// Spacing at and below which the magnetic-wall split is known to degrade, um.
pub const MAGNETIC_WALL_LIMIT_UM: f64 = 4.0;

/// Moduli of the three conformal maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moduli {
    /// Bottom half, vacuum part: `w / (w + 2s)`.
    pub k1: Modulus,
    /// Bottom half, finite substrate: sinh-mapped.
    pub k2: Modulus,
    /// Top half under a cover at `h_s`: tanh-mapped.
    pub ks: Modulus,
}

/// Per-half contributions (metal-facing case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halves {
    pub l_top: f64,
    pub l_bottom: f64,
    pub c_top: f64,
    pub c_bottom: f64,
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} is not finite")))
    }
}

/// `k = sinh(a)/sinh(b)` with `1 - k` formed without cancellation.
fn sinh_modulus(a: f64, b: f64) -> Result<Modulus> {
    let sb = finite("sinh argument", b.sinh())?;
    let k = a.sinh() / sb;
    let one_minus = 2.0 * (0.5 * (a + b)).cosh() * (0.5 * (b - a)).sinh() / sb;
    let one_minus = finite("sinh modulus", one_minus)?;
    modulus_from_gap(k, one_minus)
}

/// `k = tanh(a)/tanh(b)`; `1 - k = sinh(b - a) / (cosh(a) sinh(b))`.
fn tanh_modulus(a: f64, b: f64) -> Result<Modulus> {
    let k = a.tanh() / b.tanh();
    let one_minus = finite("tanh modulus", (b - a).sinh() / (a.cosh() * b.sinh()))?;
    modulus_from_gap(k, one_minus)
}

fn modulus_from_gap(k: f64, one_minus: f64) -> Result<Modulus> {
    if !(k > 0.0) || !(one_minus > 0.0) {
        return Err(Error::DegenerateGeometry(format!("modulus {k} outside (0, 1)")));
    }
    let kp = (one_minus * (2.0 - one_minus)).sqrt();
    Modulus::with_complement(k.min(1.0), kp)
        .map_err(|e| Error::DegenerateGeometry(e.to_string()))
}

/// Moduli `k1`, `k2`, `ks` of the cross-section.
pub fn moduli(x: &CrossSection) -> Result<Moduli> {
    x.validate()?;
    let ap = x.aperture();
    let k1 = modulus_from_gap(x.w / ap, 2.0 * x.s / ap)?;
    let k2 = sinh_modulus(PI * x.w / (4.0 * x.h_b), PI * ap / (4.0 * x.h_b))?;
    let ks = tanh_modulus(PI * x.w / (4.0 * x.h_s), PI * ap / (4.0 * x.h_s))?;
    Ok(Moduli { k1, k2, ks })
}

fn ratio(m: Modulus) -> Result<f64> {
    k_ratio(m).map_err(|e| Error::DegenerateGeometry(e.to_string()))
}

/// Bottom-half capacitance `2ε0 [K(k1)/K(k1') + (ε_r - 1) K(k2)/K(k2')]`.
fn c_bottom(x: &CrossSection, m: &Moduli) -> Result<f64> {
    Ok(2.0 * EPS0 * (ratio(m.k1)? + (x.eps_r - 1.0) * ratio(m.k2)?))
}

/// Top and bottom halves of the metal-facing cross-section.
pub fn halves_metal_facing(x: &CrossSection) -> Result<Halves> {
    let m = moduli(x)?;
    let rs = ratio(m.ks)?;
    let r1 = ratio(m.k1)?;
    Ok(Halves {
        l_top: 0.5 * MU0 / rs,
        l_bottom: 0.5 * MU0 / r1,
        c_top: 2.0 * EPS0 * rs,
        c_bottom: c_bottom(x, &m)?,
    })
}

/// Line parameters with an opposing metal ground plane (halves in parallel).
pub fn line_params_metal_facing(x: &CrossSection) -> Result<LineParams> {
    let h = halves_metal_facing(x)?;
    let l_g = 1.0 / (1.0 / h.l_top + 1.0 / h.l_bottom);
    Ok(LineParams::new(l_g, h.c_top + h.c_bottom, Method::Conformal))
}

/// Line parameters facing the opposing substrate.
///
/// `L' = (µ0/4) K(k1')/K(k1)` does not depend on `h_s`. The top half's vacuum
/// layer and the opposing substrate act in series.
pub fn line_params_dielectric_facing(x: &CrossSection) -> Result<LineParams> {
    if x.eps_r <= 1.0 {
        return Err(Error::Domain(
            "dielectric-facing capacitance requires eps_r > 1".into(),
        ));
    }
    let m = moduli(x)?;
    let r1 = ratio(m.k1)?;
    let rs = ratio(m.ks)?;
    let er = x.eps_r;
    let l_g = 0.25 * MU0 / r1;
    let c_top = 2.0 * EPS0 / (1.0 / (er * r1) + 1.0 / (er / (er - 1.0) * rs));
    Ok(LineParams::new(l_g, c_top + c_bottom(x, &m)?, Method::Conformal))
}

/// Dispatches on [`CrossSection::facing`].
pub fn line_params(x: &CrossSection) -> Result<LineParams> {
    match x.facing {
        Facing::MetalGround => line_params_metal_facing(x),
        Facing::Dielectric => line_params_dielectric_facing(x),
    }
}

/// Conditions under which the closed forms are outside their validity range.
pub fn validity_warnings(x: &CrossSection) -> Vec<String> {
    let mut out = Vec::new();
    if x.facing == Facing::MetalGround && x.h_s <= MAGNETIC_WALL_LIMIT_UM {
        out.push(format!(
            "h_s = {} um <= {} um: magnetic-wall split is inaccurate",
            x.h_s, MAGNETIC_WALL_LIMIT_UM
        ));
    }
    if x.h_b != x.h_t {
        out.push(format!(
            "h_b = {} um differs from h_t = {} um; closed forms assume equal tiers",
            x.h_b, x.h_t
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::C0;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_xs(h_s: f64) -> CrossSection {
        CrossSection::reference(h_s, Facing::MetalGround)
    }

    // Reference values below were evaluated independently at 30 significant
    // digits (mpmath) directly from the closed forms.

    #[test]
    fn moduli_reference_geometry() {
        let m = moduli(&reference_xs(8.0)).unwrap();
        assert_eq!(m.k1.k(), 1.0 / 3.0);
        assert_relative_eq!(m.k2.k(), 0.332_830_352_004_383_4, max_relative = 1e-13);
        assert_relative_eq!(m.ks.k(), 0.828_259_906_257_139_5, max_relative = 1e-13);
    }

    #[test]
    fn metal_facing_reference_values() {
        let lp = line_params_metal_facing(&reference_xs(8.0)).unwrap();
        assert_relative_eq!(lp.l_g, 3.427_733_012_289_145e-7, max_relative = 1e-9);
        assert_relative_eq!(lp.c, 1.507_483_485_386_657e-10, max_relative = 1e-9);
        assert_eq!(lp.l_k, 0.0);
        assert_eq!(lp.method, Method::Conformal);
    }

    #[test]
    fn dielectric_facing_reference_values() {
        let x = reference_xs(8.0).with_facing(Facing::Dielectric);
        let lp = line_params_dielectric_facing(&x).unwrap();
        assert_relative_eq!(lp.l_g, 4.911_571_994_950_262e-7, max_relative = 1e-9);
        assert_relative_eq!(lp.c, 1.492_626_959_634_193e-10, max_relative = 1e-9);
    }

    #[test]
    fn dielectric_inductance_ignores_spacing() {
        let a = line_params_dielectric_facing(&reference_xs(3.0)).unwrap();
        let b = line_params_dielectric_facing(&reference_xs(30.0)).unwrap();
        assert_eq!(a.l_g, b.l_g);
    }

    #[test]
    fn far_cover_unifies_both_cases() {
        let x = reference_xs(1e6);
        let m = line_params_metal_facing(&x).unwrap();
        let d = line_params_dielectric_facing(&x).unwrap();
        assert_relative_eq!(m.l_g, d.l_g, max_relative = 1e-6);
        assert_relative_eq!(m.c, d.c, max_relative = 1e-6);
    }

    #[test]
    fn metal_facing_trends() {
        let p: Vec<_> = [2.0, 8.0, 60.0]
            .iter()
            .map(|&h| line_params_metal_facing(&reference_xs(h)).unwrap())
            .collect();
        assert!(p[0].c > p[1].c && p[1].c > p[2].c);
        assert!(p[0].l_g < p[1].l_g && p[1].l_g < p[2].l_g);
    }

    #[test]
    fn opposite_frequency_trends() {
        let v = |x: &CrossSection| line_params(x).unwrap().phase_velocity();
        let mut h = 3.0;
        while h < 20.0 {
            let m0 = v(&reference_xs(h));
            let m1 = v(&reference_xs(h + 0.5));
            let d0 = v(&reference_xs(h).with_facing(Facing::Dielectric));
            let d1 = v(&reference_xs(h + 0.5).with_facing(Facing::Dielectric));
            assert!(m1 < m0, "metal-facing should slow down with spacing at {h}");
            assert!(d1 > d0, "dielectric-facing should speed up with spacing at {h}");
            h += 0.5;
        }
    }

    #[test]
    fn bottom_half_matches_single_chip_cpw() {
        let mut x = reference_xs(8.0);
        x.h_b = 20.0 * x.aperture();
        let h = halves_metal_facing(&x).unwrap();
        let r1 = k_ratio(Modulus::new(1.0 / 3.0).unwrap()).unwrap();
        // Bottom half plus an open vacuum half is the textbook single-chip CPW.
        let single_chip = h.c_bottom + 2.0 * EPS0 * r1;
        let textbook = 2.0 * EPS0 * (1.0 + x.eps_r) * r1;
        assert!((single_chip - textbook).abs() / textbook < 0.02);
        let l_single = 1.0 / (1.0 / h.l_bottom + 2.0 * r1 / MU0);
        assert_relative_eq!(l_single, 0.25 * MU0 / r1, max_relative = 1e-12);
    }

    #[test]
    fn tiny_spacing_is_finite_or_degenerate() {
        let lp = line_params_metal_facing(&reference_xs(1.0)).unwrap();
        assert!(lp.c.is_finite() && lp.l_g > 0.0);
        assert!(line_params_metal_facing(&reference_xs(0.01)).is_err());
    }

    #[test]
    fn warnings() {
        assert_eq!(validity_warnings(&reference_xs(4.0)).len(), 1);
        assert!(validity_warnings(&reference_xs(8.0)).is_empty());
        assert!(validity_warnings(&reference_xs(2.0).with_facing(Facing::Dielectric)).is_empty());
    }

    #[test]
    fn dielectric_requires_eps_above_one() {
        let mut x = reference_xs(8.0).with_facing(Facing::Dielectric);
        x.eps_r = 1.0;
        assert!(line_params_dielectric_facing(&x).is_err());
    }

    proptest! {
        #[test]
        fn eps_eff_between_one_and_eps_r(
            w in 2.0f64..50.0, s in 2.0f64..50.0, h_s in 1.0f64..100.0,
            metal in proptest::bool::ANY,
        ) {
            let facing = if metal { Facing::MetalGround } else { Facing::Dielectric };
            let x = CrossSection { w, s, h_s, ..CrossSection::reference(h_s, facing) };
            let lp = line_params(&x).unwrap();
            let e = C0 * C0 * lp.l_g * lp.c;
            prop_assert!(e >= 1.0 - 1e-9 && e <= x.eps_r + 1e-9, "eps_eff = {}", e);
        }

        #[test]
        fn limit_unification(w in 2.0f64..50.0, s in 2.0f64..50.0) {
            let base = CrossSection { w, s, ..CrossSection::reference(1.0, Facing::MetalGround) };
            let x = base.with_spacing(1e5 * base.aperture());
            let m = line_params_metal_facing(&x).unwrap();
            let d = line_params_dielectric_facing(&x).unwrap();
            prop_assert!((m.l_g - d.l_g).abs() / d.l_g <= 1e-6);
            prop_assert!((m.c - d.c).abs() / d.c <= 1e-6);
        }
    }
}
