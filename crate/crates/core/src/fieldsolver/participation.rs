//! Surface participation of thin lossy interface layers and the resulting
//! TLS-limited quality factor.

use serde::{Deserialize, Serialize};

use crate::constants::{EPS0, NM, UM};
use crate::{Error, Result};

use super::electrostatic::{solve_es, FieldSolution};
use super::grid::{Grid, GridSpec};
use super::region::{cpw_layout, Material, RESONATOR};
use crate::geometry::CrossSection;

/// Kind of surface a lossy layer covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interface {
    SubstrateAir,
    SubstrateMetal,
    MetalAir,
}

/// A thin lossy film of given permittivity, loss tangent and thickness (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossLayer {
    pub eps_r: f64,
    pub tan_delta: f64,
    pub thickness_nm: f64,
}

/// The three interface layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfaceLayers {
    pub substrate_air: LossLayer,
    pub substrate_metal: LossLayer,
    pub metal_air: LossLayer,
}

impl Default for InterfaceLayers {
    fn default() -> Self {
        Self {
            substrate_air: LossLayer { eps_r: 4.0, tan_delta: 1e-3, thickness_nm: 2.0 },
            substrate_metal: LossLayer { eps_r: 4.0, tan_delta: 1e-3, thickness_nm: 0.5 },
            metal_air: LossLayer { eps_r: 7.0, tan_delta: 1e-3, thickness_nm: 2.0 },
        }
    }
}

impl InterfaceLayers {
    pub fn layer(&self, kind: Interface) -> &LossLayer {
        match kind {
            Interface::SubstrateAir => &self.substrate_air,
            Interface::SubstrateMetal => &self.substrate_metal,
            Interface::MetalAir => &self.metal_air,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for l in [&self.substrate_air, &self.substrate_metal, &self.metal_air] {
            if !(l.eps_r >= 1.0 && l.tan_delta >= 0.0 && l.thickness_nm >= 0.0) {
                return Err(Error::Config(format!("invalid loss layer {l:?}")));
            }
        }
        Ok(())
    }
}

/// Participation ratios and the loss-limited quality factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Participation {
    pub p_sa: f64,
    pub p_sm: f64,
    pub p_ma: f64,
    /// `1 / sum p_i tan_delta_i`; `None` when every layer is lossless.
    pub q_pr: Option<f64>,
}

impl Participation {
    pub fn get(&self, kind: Interface) -> f64 {
        match kind {
            Interface::SubstrateAir => self.p_sa,
            Interface::SubstrateMetal => self.p_sm,
            Interface::MetalAir => self.p_ma,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Air,
    Substrate(f64),
    Metal,
}

fn side(m: Material) -> Side {
    match m {
        Material::Vacuum => Side::Air,
        Material::Substrate(e) => Side::Substrate(e),
        Material::Conductor(_) => Side::Metal,
    }
}

fn classify(a: Side, b: Side) -> Option<Interface> {
    use Side::*;
    match (a, b) {
        (Substrate(_), Air) | (Air, Substrate(_)) => Some(Interface::SubstrateAir),
        (Substrate(_), Metal) | (Metal, Substrate(_)) => Some(Interface::SubstrateMetal),
        (Metal, Air) | (Air, Metal) => Some(Interface::MetalAir),
        _ => None,
    }
}

/// Field on one side of a grid face: normal E (along the face normal) and
/// the side's permittivity.
struct FaceSide {
    side: Side,
    e_normal: f64,
}

/// Participation ratios of the interface layers in a solved field.
///
/// Every cell face separating two different material classes is an
/// interface segment. The layer energy per unit length is
/// `t (eps0 eps_i |E_t|^2 + |D_n|^2 / (eps0 eps_i)) / 2` integrated along the
/// segments, with `D_n` taken from the dielectric side (averaged across
/// substrate-air faces) and `E_t = 0` on metal.
pub fn participation(sol: &FieldSolution, layers: &InterfaceLayers) -> Result<Participation> {
    layers.validate()?;
    if !(sol.energy > 0.0) {
        return Err(Error::Solver("field stores no energy".into()));
    }
    let g = &sol.grid;
    let (nx, ny) = (g.nx(), g.ny());
    let u = |i: usize, j: usize| sol.potential[g.node(i, j)];
    let cell = |i: usize, j: usize| sol.cells[g.cell(i, j)];
    // Per-length integrals of |E_t|^2 and |D_n|^2 (SI, per metre of segment).
    let mut et2 = [0.0f64; 3];
    let mut dn2 = [0.0f64; 3];
    let slot = |k: Interface| k as usize;

    let mut accumulate = |a: FaceSide, b: FaceSide, e_t: f64, len_um: f64| {
        let Some(kind) = classify(a.side, b.side) else {
            return;
        };
        let d = |s: &FaceSide| match s.side {
            Side::Air => Some(EPS0 * s.e_normal),
            Side::Substrate(e) => Some(EPS0 * e * s.e_normal),
            Side::Metal => None,
        };
        let d_n = match (d(&a), d(&b)) {
            (Some(x), Some(y)) => 0.5 * (x + y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => return,
        };
        let metal = a.side == Side::Metal || b.side == Side::Metal;
        let e_t = if metal { 0.0 } else { e_t };
        let len = len_um * UM;
        et2[slot(kind)] += e_t * e_t * len;
        dn2[slot(kind)] += d_n * d_n * len;
    };

    // Horizontal faces: node row j between cells j-1 (below) and j (above).
    for i in 0..nx - 1 {
        let hx = g.hx(i) * UM;
        for j in 1..ny - 1 {
            let (lo, hi) = (cell(i, j - 1), cell(i, j));
            if classify(side(lo), side(hi)).is_none() {
                continue;
            }
            let hb = g.hy(j - 1) * UM;
            let ha = g.hy(j) * UM;
            let below = -0.5 * ((u(i, j) - u(i, j - 1)) + (u(i + 1, j) - u(i + 1, j - 1))) / hb;
            let above = -0.5 * ((u(i, j + 1) - u(i, j)) + (u(i + 1, j + 1) - u(i + 1, j))) / ha;
            let e_t = -(u(i + 1, j) - u(i, j)) / hx;
            accumulate(
                FaceSide { side: side(lo), e_normal: below },
                FaceSide { side: side(hi), e_normal: above },
                e_t,
                g.hx(i),
            );
        }
    }
    // Vertical faces: node column i between cells i-1 (left) and i (right).
    let (first, last) = if g.periodic_x { (0, nx - 1) } else { (1, nx - 1) };
    for i in first..last {
        let il = if i == 0 { nx - 2 } else { i - 1 };
        let ir = i;
        let iu = |k: usize| if g.periodic_x && k == nx - 1 { 0 } else { k };
        for j in 0..ny - 1 {
            let (lc, rc) = (cell(il, j), cell(ir, j));
            if classify(side(lc), side(rc)).is_none() {
                continue;
            }
            let hl = g.hx(il) * UM;
            let hr = g.hx(ir) * UM;
            let hy = g.hy(j) * UM;
            let left = -0.5 * ((u(i, j) - u(il, j)) + (u(i, j + 1) - u(il, j + 1))) / hl;
            let right = -0.5 * ((u(iu(i + 1), j) - u(i, j)) + (u(iu(i + 1), j + 1) - u(i, j + 1))) / hr;
            let e_t = -(u(i, j + 1) - u(i, j)) / hy;
            accumulate(
                FaceSide { side: side(lc), e_normal: left },
                FaceSide { side: side(rc), e_normal: right },
                e_t,
                g.hy(j),
            );
        }
    }

    let p = |kind: Interface| {
        let l = layers.layer(kind);
        let k = slot(kind);
        let w = l.thickness_nm * NM * 0.5 * (EPS0 * l.eps_r * et2[k] + dn2[k] / (EPS0 * l.eps_r));
        w / sol.energy
    };
    let (p_sa, p_sm, p_ma) = (
        p(Interface::SubstrateAir),
        p(Interface::SubstrateMetal),
        p(Interface::MetalAir),
    );
    let loss = p_sa * layers.substrate_air.tan_delta
        + p_sm * layers.substrate_metal.tan_delta
        + p_ma * layers.metal_air.tan_delta;
    Ok(Participation {
        p_sa,
        p_sm,
        p_ma,
        q_pr: (loss > 0.0).then(|| 1.0 / loss),
    })
}

/// Participation ratios of a CPW cross-section driven at 1 V.
pub fn participation_q(x: &CrossSection, layers: &InterfaceLayers, spec: &GridSpec) -> Result<Participation> {
    let map = cpw_layout(x, spec)?;
    let grid = Grid::build(&map, spec)?;
    let sol = solve_es(&map, &grid, &[(RESONATOR, 1.0)].into_iter().collect())?;
    participation(&sol, layers)
}
