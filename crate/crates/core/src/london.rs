//! London-equation supercurrent distribution in thin films, kinetic
//! inductance, and penetration-depth extraction from measured frequencies.
//!
//! The vector potential obeys `-lap A = mu0 J` everywhere with
//! `J = -A / (mu0 lambda^2) + J0_c` inside films of electrical node `c`, and
//! `A = 0` on the outer box. The per-node constants `J0_c` are fixed by the
//! current constraints (`+I` on the center conductor, `-I` on ground, zero on
//! any other conductor), so the split of return current between the two
//! tiers comes out of the solve.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::constants::{MU0, NM, UM};
use crate::fieldsolver::{
    cpw_layout, fixed_nodes, ExportRow, FieldExport, Grid, GridSpec, Layout, Material, RegionMap, Stencil, System,
    GROUND, RESONATOR,
};
use crate::geometry::{CrossSection, LineParams};
use crate::resonator::resonant_frequency;
use crate::search::brent_root;
use crate::{Error, Result};

/// Penetration-depth bracket for [`fit_lambda`], nm.
pub const LAMBDA_BRACKET_NM: (f64, f64) = (1.0, 500.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LondonConfig {
    /// Magnetic penetration depth, nm.
    pub lambda_nm: f64,
    /// Drive current on the center conductor, A.
    pub current: f64,
}

impl Default for LondonConfig {
    fn default() -> Self {
        Self {
            lambda_nm: 83.0,
            current: 1.0,
        }
    }
}

impl LondonConfig {
    pub fn new(lambda_nm: f64) -> Self {
        Self {
            lambda_nm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_nm > 0.0 && self.lambda_nm.is_finite()) {
            return Err(Error::Config(format!("lambda {} nm must be > 0", self.lambda_nm)));
        }
        if !(self.current != 0.0 && self.current.is_finite()) {
            return Err(Error::Config("drive current must be nonzero".into()));
        }
        Ok(())
    }

    fn lambda_um(&self) -> f64 {
        self.lambda_nm * NM / UM
    }

    /// Grid spec with `h_min` defaulted to the finer of a sixth of the film
    /// and half the penetration depth.
    pub fn grid_spec(&self, base: &GridSpec, film_um: f64) -> GridSpec {
        GridSpec {
            h_min: Some(base.h_min.unwrap_or((film_um / 6.0).min(0.5 * self.lambda_um()))),
            ..*base
        }
    }
}

/// Supercurrent solution.
#[derive(Debug, Clone)]
pub struct CurrentSolution {
    pub map: RegionMap,
    pub grid: Grid,
    pub config: LondonConfig,
    /// Vector potential at every node, Wb/m.
    pub a_z: Vec<f64>,
    /// Current density at every node, A/m^2 (zero outside films).
    pub j_z: Vec<f64>,
    /// Superconductor area represented by each node, m^2.
    pub area: Vec<f64>,
    pub node_conductor: Vec<Option<usize>>,
    /// Solved drive constants per electrical node, A/m^2.
    pub drive_constants: BTreeMap<usize, f64>,
    /// Integrated current per electrical node, A.
    pub currents: BTreeMap<usize, f64>,
    pub residual: f64,
}

impl CurrentSolution {
    /// `sum area J^2` over nodes selected by `keep(x_um, y_um)`, A^2/m^2.
    pub fn squared_current_where(&self, keep: impl Fn(f64, f64) -> bool) -> f64 {
        let g = &self.grid;
        let mut s = 0.0;
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let k = g.node(i, j);
                if self.area[k] > 0.0 && keep(g.xs[i], g.ys[j]) {
                    s += self.area[k] * self.j_z[k] * self.j_z[k];
                }
            }
        }
        s
    }

    pub fn j_at(&self, i: usize, j: usize) -> f64 {
        self.j_z[self.grid.node(i, j)]
    }

    /// Inductance from the stored magnetic field energy, H/m.
    pub fn magnetic_inductance(&self) -> f64 {
        let ones = vec![1.0; self.grid.cell_count()];
        let st = Stencil::new(&self.grid, &ones);
        2.0 * st.energy(&self.grid, &self.a_z) / MU0 / self.config.current.powi(2)
    }

    /// Supercurrent density at superconductor nodes in the text export
    /// format, with the represented area as an extra column.
    pub fn export(&self) -> FieldExport {
        let g = &self.grid;
        let mut rows = Vec::new();
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let k = g.node(i, j);
                if self.area[k] > 0.0 {
                    rows.push(ExportRow {
                        i,
                        j,
                        conductor: self.node_conductor[k],
                        value: self.j_z[k],
                        area_um2: Some(self.area[k] / (UM * UM)),
                    });
                }
            }
        }
        FieldExport {
            quantity: "current_density_a_per_m2".into(),
            grid: g.clone(),
            bounds: self.map.bounds,
            regions: self.map.regions.clone(),
            meta: [
                ("lambda_nm".to_string(), format!("{:e}", self.config.lambda_nm)),
                ("current_a".to_string(), format!("{:e}", self.config.current)),
            ]
            .into_iter()
            .collect(),
            rows,
        }
    }
}

/// Every conductor needs cells no larger than `lambda / 2` next to each of
/// its edges, on top of the three-cells-through-thickness rule.
fn check_resolution(map: &RegionMap, grid: &Grid, lambda_um: f64) -> Result<()> {
    grid.check_films(map)?;
    let limit = 0.5 * lambda_um * (1.0 + 1e-9);
    let b = &map.bounds;
    let step_inside = |lines: &[f64], edge: f64, inward: f64| -> Option<f64> {
        let k = lines.iter().position(|&v| (v - edge).abs() <= 1e-12 * (1.0 + edge.abs()))?;
        if inward > 0.0 {
            lines.get(k + 1).map(|v| v - lines[k])
        } else {
            k.checked_sub(1).map(|p| lines[k] - lines[p])
        }
    };
    for r in map.regions.iter().filter(|r| r.material.conductor().is_some()) {
        let q = &r.rect;
        let edges = [
            (&grid.ys, q.y0, 1.0, q.y0 > b.y0),
            (&grid.ys, q.y1, -1.0, q.y1 < b.y1),
            (&grid.xs, q.x0, 1.0, q.x0 > b.x0),
            (&grid.xs, q.x1, -1.0, q.x1 < b.x1),
        ];
        for (lines, edge, inward, interior) in edges {
            if !interior {
                continue;
            }
            match step_inside(lines, edge, inward) {
                Some(h) if h <= limit => {}
                Some(h) => {
                    return Err(Error::UnderResolved(format!(
                        "cell of {h:.4} um at a film edge exceeds lambda/2 = {:.4} um",
                        0.5 * lambda_um
                    )))
                }
                None => return Err(Error::GridMismatch(format!("no grid line at film edge {edge}"))),
            }
        }
    }
    Ok(())
}

/// Solve for the supercurrent distribution on an explicit layout and grid.
pub fn solve_current(map: &RegionMap, grid: &Grid, cfg: &LondonConfig) -> Result<CurrentSolution> {
    cfg.validate()?;
    map.validate()?;
    let ids = map.conductor_ids();
    if !ids.contains(&RESONATOR) {
        return Err(Error::InvalidGeometry("no center conductor".into()));
    }
    let lambda = cfg.lambda_nm * NM;
    check_resolution(map, grid, cfg.lambda_um())?;
    let layout = Layout::new(map, grid)?;

    // Superconductor area per node, split by electrical node.
    let n_nodes = grid.node_count();
    let slot: HashMap<usize, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let mut share = vec![vec![0.0; n_nodes]; ids.len()];
    for i in 0..grid.nx() - 1 {
        for j in 0..grid.ny() - 1 {
            if let Material::Conductor(id) = layout.cells[grid.cell(i, j)] {
                let quarter = 0.25 * grid.hx(i) * grid.hy(j) * UM * UM;
                for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                    let a = if grid.periodic_x && a == grid.nx() - 1 { 0 } else { a };
                    share[slot[&id]][grid.node(a, b)] += quarter;
                }
            }
        }
    }
    let area: Vec<f64> = (0..n_nodes).map(|k| share.iter().map(|s| s[k]).sum()).collect();
    let mass: Vec<f64> = area.iter().map(|a| a / (lambda * lambda)).collect();

    let stencil = Stencil::new(grid, &vec![1.0; grid.cell_count()]);
    let no_conductors = Layout {
        cells: layout.cells.clone(),
        node_conductor: vec![None; n_nodes],
    };
    let fixed = fixed_nodes(grid, &no_conductors);
    let system = System::new(grid, &stencil, &fixed, Some(&mass))?;
    let zeros = vec![0.0; n_nodes];
    let mut basis = Vec::with_capacity(ids.len());
    let mut residual: f64 = 0.0;
    for s in &share {
        let src: Vec<f64> = s.iter().map(|a| MU0 * a).collect();
        let (a, r) = system.solve(grid, &stencil, &zeros, Some(&src))?;
        residual = residual.max(r);
        basis.push(a);
    }

    // I_c = sum_d J0_d (delta_cd A_c - <s_c, a_d> / (mu0 lambda^2)).
    let n = ids.len();
    let mut m = vec![vec![0.0; n]; n];
    for c in 0..n {
        let total: f64 = share[c].iter().sum();
        for d in 0..n {
            let overlap: f64 = share[c].iter().zip(&basis[d]).map(|(s, a)| s * a).sum();
            m[c][d] = if c == d { total } else { 0.0 } - overlap / (MU0 * lambda * lambda);
        }
    }
    let target: Vec<f64> = ids
        .iter()
        .map(|&id| match id {
            RESONATOR => cfg.current,
            GROUND => -cfg.current,
            _ => 0.0,
        })
        .collect();
    let j0 = solve_dense(m.clone(), target.clone())?;

    let mut a_z = vec![0.0; n_nodes];
    for (d, a) in basis.iter().enumerate() {
        for (out, v) in a_z.iter_mut().zip(a) {
            *out += j0[d] * v;
        }
    }
    let mut j_z = vec![0.0; n_nodes];
    let mut node_conductor = vec![None; n_nodes];
    for k in 0..n_nodes {
        if let Some(c) = (0..n).find(|&c| share[c][k] > 0.0) {
            j_z[k] = -a_z[k] / (MU0 * lambda * lambda) + j0[c];
            node_conductor[k] = Some(ids[c]);
        }
    }
    let mut currents = BTreeMap::new();
    for c in 0..n {
        let i_c: f64 = share[c].iter().zip(&j_z).map(|(s, j)| s * j).sum();
        let scale = cfg.current.abs();
        if (i_c - target[c]).abs() > 1e-6 * scale {
            return Err(Error::NotConverged {
                residual: (i_c - target[c]).abs() / scale,
                tolerance: 1e-6,
            });
        }
        currents.insert(ids[c], i_c);
    }
    Ok(CurrentSolution {
        map: map.clone(),
        grid: grid.clone(),
        config: *cfg,
        a_z,
        j_z,
        area,
        node_conductor,
        drive_constants: ids.iter().copied().zip(j0).collect(),
        currents,
        residual,
    })
}

/// Gaussian elimination with partial pivoting for the small constraint
/// system.
fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .expect("non-empty");
        if m[p][col].abs() < f64::MIN_POSITIVE {
            return Err(Error::Solver("singular current-constraint system".into()));
        }
        m.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let (top, bottom) = m.split_at_mut(r);
            for (x, &y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * y;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Ok(x)
}

/// `L_k = mu0 lambda^2 / I^2 * integral of J^2` over every film, H/m.
pub fn kinetic_inductance(sol: &CurrentSolution) -> f64 {
    let lambda = sol.config.lambda_nm * NM;
    let j2: f64 = sol.area.iter().zip(&sol.j_z).map(|(a, j)| a * j * j).sum();
    MU0 * lambda * lambda * j2 / sol.config.current.powi(2)
}

/// Kinetic inductance of a CPW cross-section (all films, both tiers).
pub fn cpw_kinetic_inductance(x: &CrossSection, cfg: &LondonConfig, base: &GridSpec) -> Result<f64> {
    let spec = cfg.grid_spec(base, x.t);
    let map = cpw_layout(x, &spec)?;
    let grid = Grid::build(&map, &spec)?;
    Ok(kinetic_inductance(&solve_current(&map, &grid, cfg)?))
}

/// Kinetic inductance from an exported or third-party current-density grid.
///
/// `lambda_nm` and `current` fall back to the file's metadata; the current
/// further falls back to the integral over the center conductor. Without an
/// area column each row stands for the superconducting part of its dual cell,
/// found from the header regions.
pub fn kinetic_inductance_from_export(e: &FieldExport, lambda_nm: Option<f64>, current: Option<f64>) -> Result<f64> {
    let meta = |k: &str| -> Result<Option<f64>> {
        e.meta
            .get(k)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad {k} '{v}'"))))
            .transpose()
    };
    let lambda_nm = match lambda_nm {
        Some(l) => l,
        None => meta("lambda_nm")?.ok_or_else(|| Error::Format("penetration depth not given".into()))?,
    };
    let mut map = RegionMap::new(e.bounds);
    map.regions = e.regions.clone();
    let g = &e.grid;
    let dual_area = |i: usize, j: usize| -> f64 {
        let mut a = 0.0;
        for (ci, cj) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)] {
            if ci < g.nx() - 1 && cj < g.ny() - 1 {
                let (x, y) = g.cell_center(ci, cj);
                if map.material_at(x, y).conductor().is_some() {
                    a += 0.25 * g.hx(ci) * g.hy(cj);
                }
            }
        }
        a
    };
    let mut j2 = 0.0;
    let mut center = 0.0;
    for r in &e.rows {
        let a = r.area_um2.unwrap_or_else(|| dual_area(r.i, r.j)) * UM * UM;
        j2 += a * r.value * r.value;
        if r.conductor == Some(RESONATOR) {
            center += a * r.value;
        }
    }
    let current = match current {
        Some(c) => c,
        None => meta("current_a")?.unwrap_or(center),
    };
    if current == 0.0 {
        return Err(Error::Format("zero drive current".into()));
    }
    let lambda = lambda_nm * NM;
    Ok(MU0 * lambda * lambda * j2 / (current * current))
}

/// One measured resonator for penetration-depth extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub cross_section: CrossSection,
    /// Line parameters without kinetic inductance.
    pub params: LineParams,
    /// Total resonator length, um.
    pub l_tot_um: f64,
    /// Harmonic index (1 for the fundamental).
    pub harmonic: u32,
    pub f_meas: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFit {
    pub lambda_nm: f64,
    /// False when the data carry no resolvable kinetic inductance and the
    /// lower bracket edge is returned.
    pub resolvable: bool,
    /// Mean model-minus-measured frequency at the result, Hz.
    pub mean_offset: f64,
    pub warnings: Vec<String>,
}

/// Penetration depth that zeroes the mean frequency discrepancy, with
/// kinetic inductance from `lk(cross_section, lambda_nm)`.
pub fn fit_lambda_with<F>(entries: &[FitEntry], mut lk: F) -> Result<LambdaFit>
where
    F: FnMut(&CrossSection, f64) -> Result<f64>,
{
    if entries.is_empty() {
        return Err(Error::Fit("no resonators to fit".into()));
    }
    let mut offset = |lambda_nm: f64| -> Result<f64> {
        let mut s = 0.0;
        for e in entries {
            let l_k = lk(&e.cross_section, lambda_nm)?;
            s += resonant_frequency(&e.params.with_kinetic(l_k), e.l_tot_um, e.harmonic) - e.f_meas;
        }
        Ok(s / entries.len() as f64)
    };
    let (lo, hi) = LAMBDA_BRACKET_NM;
    let (g_lo, g_hi) = (offset(lo)?, offset(hi)?);
    let mut warnings = Vec::new();
    if g_lo <= 0.0 {
        warnings.push("no kinetic inductance resolvable".into());
        return Ok(LambdaFit {
            lambda_nm: lo,
            resolvable: false,
            mean_offset: g_lo,
            warnings,
        });
    }
    if g_hi > 0.0 {
        return Err(Error::Fit(format!(
            "model frequency stays {g_hi:.4e} Hz above measurement at lambda = {hi} nm"
        )));
    }
    let mid = offset(0.5 * (lo + hi))?;
    if !(mid <= g_lo && mid >= g_hi) {
        warnings.push("frequency offset is not monotone in lambda".into());
    }
    let lambda_nm = brent_root(&mut offset, lo, hi, 0.1)?;
    Ok(LambdaFit {
        lambda_nm,
        resolvable: true,
        mean_offset: offset(lambda_nm)?,
        warnings,
    })
}

/// [`fit_lambda_with`] using London solves on each entry's cross-section,
/// cached per distinct geometry and penetration depth.
pub fn fit_lambda(entries: &[FitEntry], base: &GridSpec) -> Result<LambdaFit> {
    let mut cache: Vec<(CrossSection, u64, f64)> = Vec::new();
    fit_lambda_with(entries, |x, lambda_nm| {
        if let Some(hit) = cache.iter().find(|c| c.0 == *x && c.1 == lambda_nm.to_bits()) {
            return Ok(hit.2);
        }
        let l_k = cpw_kinetic_inductance(x, &LondonConfig::new(lambda_nm), base)?;
        cache.push((*x, lambda_nm.to_bits(), l_k));
        Ok(l_k)
    })
}
