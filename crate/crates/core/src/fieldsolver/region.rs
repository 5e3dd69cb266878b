//! Rectangle-painted material maps of a 2D cross-section and the standard
//! CPW layouts built from them.

use serde::{Deserialize, Serialize};

use crate::geometry::{CrossSection, Facing};
use crate::{Error, Result};

use super::grid::GridSpec;

/// Conductor id of the common ground node (both tiers).
pub const GROUND: usize = 0;
/// Conductor id of the resonator center conductor.
pub const RESONATOR: usize = 1;
/// Conductor id of the feedline center conductor.
pub const FEEDLINE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Material {
    Vacuum,
    /// Dielectric with the given relative permittivity.
    Substrate(f64),
    /// Perfect conductor belonging to an electrical node.
    Conductor(usize),
}

impl Material {
    pub fn permittivity(&self) -> f64 {
        match *self {
            Material::Substrate(e) => e,
            _ => 1.0,
        }
    }

    pub fn conductor(&self) -> Option<usize> {
        match *self {
            Material::Conductor(id) => Some(id),
            _ => None,
        }
    }

    /// Short tag used in field exports.
    pub fn tag(&self) -> String {
        match *self {
            Material::Vacuum => "vacuum".into(),
            Material::Substrate(e) => format!("substrate:{e}"),
            Material::Conductor(id) => format!("conductor:{id}"),
        }
    }

    pub fn parse_tag(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bad material tag '{s}'"));
        match s.split_once(':') {
            None if s == "vacuum" => Ok(Material::Vacuum),
            Some(("substrate", v)) => Ok(Material::Substrate(v.parse().map_err(|_| bad())?)),
            Some(("conductor", v)) => Ok(Material::Conductor(v.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Axis-aligned rectangle in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn overlaps_interior(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    pub fn mirrored_x(&self) -> Self {
        Self::new(-self.x1, -self.x0, self.y0, self.y1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub rect: Rect,
    pub material: Material,
}

/// Material layout inside an outer box. Later regions paint over earlier
/// ones; uncovered space is vacuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub bounds: Rect,
    pub regions: Vec<Region>,
    /// Identify the left and right box edges instead of grounding them.
    pub periodic_x: bool,
}

impl RegionMap {
    pub fn new(bounds: Rect) -> Self {
        Self {
            bounds,
            regions: Vec::new(),
            periodic_x: false,
        }
    }

    pub fn push(&mut self, rect: Rect, material: Material) -> &mut Self {
        self.regions.push(Region { rect, material });
        self
    }

    /// Material at a point (last painted region wins).
    pub fn material_at(&self, x: f64, y: f64) -> Material {
        self.regions
            .iter()
            .rev()
            .find(|r| r.rect.contains(x, y))
            .map(|r| r.material)
            .unwrap_or(Material::Vacuum)
    }

    pub fn conductor_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .regions
            .iter()
            .filter_map(|r| r.material.conductor())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Smallest extent (thickness) over all conductor rectangles, um.
    pub fn min_film_thickness(&self) -> Option<f64> {
        self.regions
            .iter()
            .filter(|r| r.material.conductor().is_some())
            .map(|r| (r.rect.x1 - r.rect.x0).min(r.rect.y1 - r.rect.y0))
            .min_by(f64::total_cmp)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        if !(b.x1 > b.x0 && b.y1 > b.y0) {
            return Err(Error::InvalidGeometry("empty outer box".into()));
        }
        let conductors: Vec<(&Rect, usize)> = self
            .regions
            .iter()
            .filter_map(|r| r.material.conductor().map(|id| (&r.rect, id)))
            .collect();
        if !conductors.iter().any(|c| c.1 == GROUND) {
            return Err(Error::InvalidGeometry("ground group is empty".into()));
        }
        for (r, id) in &conductors {
            if !(r.x1 > r.x0 && r.y1 > r.y0) {
                return Err(Error::InvalidGeometry(format!(
                    "conductor {id} has zero thickness"
                )));
            }
        }
        for (i, (a, ia)) in conductors.iter().enumerate() {
            for (c, ic) in &conductors[i + 1..] {
                if ia != ic && (a.overlaps_interior(c) || touches(a, c)) {
                    return Err(Error::InvalidGeometry(format!(
                        "conductors {ia} and {ic} overlap or touch"
                    )));
                }
            }
        }
        for r in &self.regions {
            if let Material::Substrate(e) = r.material {
                if !(e >= 1.0) {
                    return Err(Error::InvalidGeometry(format!("permittivity {e} < 1")));
                }
            }
        }
        Ok(())
    }

    /// Same layout with every dielectric replaced by vacuum.
    pub fn vacuum(&self) -> Self {
        let mut out = self.clone();
        out.regions.retain(|r| !matches!(r.material, Material::Substrate(_)));
        out
    }

    /// Layout reflected about `x = 0`.
    pub fn mirrored_x(&self) -> Self {
        Self {
            bounds: self.bounds.mirrored_x(),
            regions: self
                .regions
                .iter()
                .map(|r| Region {
                    rect: r.rect.mirrored_x(),
                    material: r.material,
                })
                .collect(),
            periodic_x: self.periodic_x,
        }
    }
}

fn touches(a: &Rect, b: &Rect) -> bool {
    let x_overlap = a.x0 <= b.x1 && b.x0 <= a.x1;
    let y_overlap = a.y0 <= b.y1 && b.y0 <= a.y1;
    x_overlap && y_overlap
}

/// Vertical stack shared by the CPW layouts.
struct Stack {
    y_bottom: f64,
    y_top: f64,
}

fn stack(x: &CrossSection, spec: &GridSpec, regions: &mut Vec<Region>, x0: f64, x1: f64) -> Stack {
    let y_opposite = x.t + x.h_s;
    let y_sub = match x.facing {
        Facing::MetalGround => y_opposite + x.t,
        Facing::Dielectric => y_opposite,
    };
    let y_sub_top = y_sub + x.h_t;
    regions.push(Region {
        rect: Rect::new(x0, x1, -x.h_b, 0.0),
        material: Material::Substrate(x.eps_r),
    });
    regions.push(Region {
        rect: Rect::new(x0, x1, y_sub, y_sub_top),
        material: Material::Substrate(x.eps_r),
    });
    if x.facing == Facing::MetalGround {
        regions.push(Region {
            rect: Rect::new(x0, x1, y_opposite, y_opposite + x.t),
            material: Material::Conductor(GROUND),
        });
    }
    Stack {
        y_bottom: -x.h_b * (1.0 + spec.margin_below),
        y_top: y_sub_top + x.h_t * spec.margin_above,
    }
}

/// Resonator CPW cross-section centred at `x = 0`.
///
/// The control-tier substrate fills `-h_b < y < 0`, films occupy `0 < y < t`,
/// and the facing surface of the qubit tier (film or bare substrate) sits at
/// `y = t + h_s`. Ground films extend to the lateral box edges.
pub fn cpw_layout(x: &CrossSection, spec: &GridSpec) -> Result<RegionMap> {
    x.validate()?;
    let half = spec.lateral * x.aperture();
    let mut regions = Vec::new();
    let st = stack(x, spec, &mut regions, -half, half);
    let edge = 0.5 * x.w + x.s;
    regions.push(Region {
        rect: Rect::new(-half, -edge, 0.0, x.t),
        material: Material::Conductor(GROUND),
    });
    regions.push(Region {
        rect: Rect::new(edge, half, 0.0, x.t),
        material: Material::Conductor(GROUND),
    });
    regions.push(Region {
        rect: Rect::new(-0.5 * x.w, 0.5 * x.w, 0.0, x.t),
        material: Material::Conductor(RESONATOR),
    });
    let map = RegionMap {
        bounds: Rect::new(-half, half, st.y_bottom, st.y_top),
        regions,
        periodic_x: false,
    };
    map.validate()?;
    Ok(map)
}

/// Coupling-section geometry next to the resonator CPW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedlineGeometry {
    /// Feedline center width, um.
    pub w_f: f64,
    /// Feedline gap, um.
    pub s_f: f64,
    /// Ground strip between the resonator gap and the feedline gap, um.
    pub d: f64,
}

/// Resonator and feedline side by side, separated by a ground strip `d`.
///
/// Resonator center at `x = 0`, feedline to the right:
/// `ground | s | w | s | d | s_f | w_f | s_f | ground`.
pub fn coupling_layout(x: &CrossSection, feed: &FeedlineGeometry, spec: &GridSpec) -> Result<RegionMap> {
    x.validate()?;
    for (name, v) in [("w_f", feed.w_f), ("s_f", feed.s_f), ("d", feed.d)] {
        if !(v > 0.0) {
            return Err(Error::InvalidGeometry(format!("{name} = {v} must be > 0")));
        }
    }
    let r_edge = 0.5 * x.w + x.s;
    let strip_end = r_edge + feed.d;
    let f0 = strip_end + feed.s_f;
    let f1 = f0 + feed.w_f;
    let f_edge = f1 + feed.s_f;
    let margin = spec.lateral * x.aperture().max(feed.w_f + 2.0 * feed.s_f);
    let (xl, xr) = (-r_edge - margin, f_edge + margin);
    let mut regions = Vec::new();
    let st = stack(x, spec, &mut regions, xl, xr);
    for (a, b, id) in [
        (xl, -r_edge, GROUND),
        (r_edge, strip_end, GROUND),
        (f_edge, xr, GROUND),
        (-0.5 * x.w, 0.5 * x.w, RESONATOR),
        (f0, f1, FEEDLINE),
    ] {
        regions.push(Region {
            rect: Rect::new(a, b, 0.0, x.t),
            material: Material::Conductor(id),
        });
    }
    let map = RegionMap {
        bounds: Rect::new(xl, xr, st.y_bottom, st.y_top),
        regions,
        periodic_x: false,
    };
    map.validate()?;
    Ok(map)
}

/// Two full-width plates of thickness `t` separated by vacuum gap `gap`, with
/// periodic side boundaries. The driven plate (id 1) sits at the bottom of
/// the box, the ground plate (id 0) at the top.
pub fn parallel_plate_layout(width: f64, gap: f64, t: f64) -> RegionMap {
    let mut map = RegionMap::new(Rect::new(0.0, width, 0.0, 2.0 * t + gap));
    map.periodic_x = true;
    map.push(Rect::new(0.0, width, 0.0, t), Material::Conductor(RESONATOR));
    map.push(Rect::new(0.0, width, t + gap, 2.0 * t + gap), Material::Conductor(GROUND));
    map
}
