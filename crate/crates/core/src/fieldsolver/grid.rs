//! Nonuniform tensor-product grids graded away from material boundaries.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::region::RegionMap;

/// Grid-generation and outer-box parameters. Lengths in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Cell size at conductor edges. `None` picks a sixth of the thinnest film.
    pub h_min: Option<f64>,
    /// Cell size at dielectric and box boundaries.
    pub h_far: f64,
    /// Ratio between neighbouring cells, in `(1, 1.5]`.
    pub growth: f64,
    /// Largest cell size.
    pub h_max: f64,
    /// Half-width of the box in units of the CPW aperture.
    pub lateral: f64,
    /// Vacuum below the control tier in units of its thickness.
    pub margin_below: f64,
    /// Vacuum above the qubit tier in units of its thickness.
    pub margin_above: f64,
    /// Uniform 2x refinements applied after grading.
    pub bisections: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            h_min: None,
            h_far: 0.5,
            growth: 1.2,
            h_max: 10.0,
            lateral: 10.0,
            margin_below: 1.0,
            margin_above: 1.0,
            bisections: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.growth > 1.0 && self.growth <= 1.5) {
            return Err(Error::Config(format!("growth {} outside (1, 1.5]", self.growth)));
        }
        if let Some(h) = self.h_min {
            if !(h > 0.0) {
                return Err(Error::Config(format!("h_min {h} must be > 0")));
            }
        }
        if !(self.h_far > 0.0 && self.h_max >= self.h_far) {
            return Err(Error::Config("need 0 < h_far <= h_max".into()));
        }
        if !(self.lateral >= 1.0 && self.margin_below >= 0.0 && self.margin_above >= 0.0) {
            return Err(Error::Config("box margins too small".into()));
        }
        Ok(())
    }
}

/// Tensor grid of node lines. Cell `(i, j)` spans `xs[i]..xs[i+1]` by
/// `ys[j]..ys[j+1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Last x line is identified with the first.
    pub periodic_x: bool,
}

impl Grid {
    pub fn from_lines(xs: Vec<f64>, ys: Vec<f64>, periodic_x: bool) -> Result<Self> {
        for v in [&xs, &ys] {
            if v.len() < 3 || v.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(Error::InvalidGeometry(
                    "grid lines must be strictly increasing with at least 3 entries".into(),
                ));
            }
        }
        Ok(Self { xs, ys, periodic_x })
    }

    /// Graded grid for a region map: every rectangle edge is a grid line,
    /// conductor edges get `h_min`, other edges `h_far`.
    pub fn build(map: &RegionMap, spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        map.validate()?;
        let film = map
            .min_film_thickness()
            .ok_or_else(|| Error::InvalidGeometry("no conductors".into()))?;
        let h_min = spec.h_min.unwrap_or(film / 6.0);
        let b = &map.bounds;
        let mut bx = vec![(b.x0, spec.h_far), (b.x1, spec.h_far)];
        let mut by = vec![(b.y0, spec.h_far), (b.y1, spec.h_far)];
        for r in &map.regions {
            let h = if r.material.conductor().is_some() { h_min } else { spec.h_far };
            for x in [r.rect.x0, r.rect.x1] {
                if x >= b.x0 && x <= b.x1 {
                    bx.push((x, h));
                }
            }
            for y in [r.rect.y0, r.rect.y1] {
                if y >= b.y0 && y <= b.y1 {
                    by.push((y, h));
                }
            }
        }
        let xs = axis(bx, spec.growth, spec.h_max);
        let ys = axis(by, spec.growth, spec.h_max);
        let mut grid = Self::from_lines(xs, ys, map.periodic_x)?;
        for _ in 0..spec.bisections {
            grid = grid.bisected();
        }
        grid.check_films(map)?;
        Ok(grid)
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn node_count(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn cell_count(&self) -> usize {
        (self.nx() - 1) * (self.ny() - 1)
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i * self.ny() + j
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        i * (self.ny() - 1) + j
    }

    pub fn hx(&self, i: usize) -> f64 {
        self.xs[i + 1] - self.xs[i]
    }

    pub fn hy(&self, j: usize) -> f64 {
        self.ys[j + 1] - self.ys[j]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            0.5 * (self.xs[i] + self.xs[i + 1]),
            0.5 * (self.ys[j] + self.ys[j + 1]),
        )
    }

    pub fn min_step(&self) -> f64 {
        self.xs
            .windows(2)
            .chain(self.ys.windows(2))
            .map(|p| p[1] - p[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// One-line description for provenance headers.
    pub fn summary(&self) -> String {
        format!(
            "nx={} ny={} h_min={:.4}um periodic_x={}",
            self.nx(),
            self.ny(),
            self.min_step(),
            self.periodic_x
        )
    }

    /// Every cell split in two along both axes.
    pub fn bisected(&self) -> Self {
        Self {
            xs: bisect(&self.xs),
            ys: bisect(&self.ys),
            periodic_x: self.periodic_x,
        }
    }

    /// Largest cell step across the thickness of any conductor rectangle must
    /// be at most a third of that thickness.
    pub fn check_films(&self, map: &RegionMap) -> Result<()> {
        for r in map.regions.iter().filter(|r| r.material.conductor().is_some()) {
            let (w, h) = (r.rect.x1 - r.rect.x0, r.rect.y1 - r.rect.y0);
            let (lines, lo, hi, t) = if h <= w {
                (&self.ys, r.rect.y0, r.rect.y1, h)
            } else {
                (&self.xs, r.rect.x0, r.rect.x1, w)
            };
            let worst = lines
                .windows(2)
                .filter(|p| p[0] >= lo - 1e-12 && p[1] <= hi + 1e-12)
                .map(|p| p[1] - p[0])
                .fold(0.0, f64::max);
            if worst == 0.0 || worst > t / 3.0 + 1e-12 {
                return Err(Error::UnderResolved(format!(
                    "film of thickness {t} um resolved with cells up to {worst} um"
                )));
            }
        }
        Ok(())
    }
}

fn bisect(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len() - 1);
    for p in v.windows(2) {
        out.push(p[0]);
        out.push(0.5 * (p[0] + p[1]));
    }
    out.push(v[v.len() - 1]);
    out
}

/// Grid lines along one axis from `(position, local size)` breakpoints.
fn axis(mut breaks: Vec<(f64, f64)>, growth: f64, h_max: f64) -> Vec<f64> {
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let span = breaks[breaks.len() - 1].0 - breaks[0].0;
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(breaks.len());
    for (x, h) in breaks {
        match merged.last_mut() {
            Some(last) if x - last.0 <= 1e-12 * span => last.1 = last.1.min(h),
            _ => merged.push((x, h)),
        }
    }
    let mut lines = vec![merged[0].0];
    for p in merged.windows(2) {
        grade(p[0], p[1], growth, h_max, &mut lines);
        lines.push(p[1].0);
    }
    lines
}

/// Interior lines of `[a, b]` growing geometrically from both ends and
/// meeting near the middle.
fn grade((a, ha): (f64, f64), (b, hb): (f64, f64), growth: f64, h_max: f64, out: &mut Vec<f64>) {
    let len = b - a;
    let half = 0.5 * len;
    let march = |h0: f64| {
        let mut pts = Vec::new();
        let (mut p, mut h) = (0.0, h0.min(h_max));
        while p + h < half {
            p += h;
            pts.push(p);
            h = (h * growth).min(h_max);
        }
        (pts, h)
    };
    let (mut left, next_l) = march(ha);
    let (mut right, next_r) = march(hb);
    let lo = left.last().copied().unwrap_or(0.0);
    let hi = len - right.last().copied().unwrap_or(0.0);
    let gap = hi - lo;
    let last_step = |pts: &[f64]| match pts.len() {
        0 => 0.0,
        1 => pts[0],
        n => pts[n - 1] - pts[n - 2],
    };
    let mut fill = Vec::new();
    if !left.is_empty() && !right.is_empty() && gap < 0.5 * last_step(&left).max(last_step(&right)) {
        left.pop();
        right.pop();
        fill.push(0.5 * (lo + hi));
    } else {
        let h = next_l.max(next_r).min(h_max);
        let n = (gap / h).ceil().max(1.0) as usize;
        fill.extend((1..n).map(|k| lo + gap * k as f64 / n as f64));
    }
    out.extend(left.iter().map(|p| a + p));
    out.extend(fill.iter().map(|p| a + p));
    out.extend(right.iter().rev().map(|q| b - q));
}
