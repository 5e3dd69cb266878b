//! Electrostatic potentials, conductor charges and capacitance matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::{EPS0, MU0};
use crate::geometry::{CrossSection, LineParams, Method};
use crate::{Error, Result};

use super::assembly::{fixed_nodes, Layout, Stencil, System};
use super::grid::{Grid, GridSpec};
use super::region::{coupling_layout, cpw_layout, FeedlineGeometry, Material, RegionMap, FEEDLINE, RESONATOR};

/// Largest tolerated relative asymmetry of the raw capacitance matrix.
pub const MAX_ASYMMETRY: f64 = 0.01;

/// Solved electrostatic field on a grid.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub map: RegionMap,
    pub grid: Grid,
    /// Material of every cell, indexed by [`Grid::cell`].
    pub cells: Vec<Material>,
    /// Conductor id of every node, indexed by [`Grid::node`].
    pub node_conductor: Vec<Option<usize>>,
    /// Node potentials, V.
    pub potential: Vec<f64>,
    /// Applied conductor potentials, V (absent conductors sit at 0).
    pub drive: BTreeMap<usize, f64>,
    /// Charge per unit length on each conductor, C/m.
    pub charges: BTreeMap<usize, f64>,
    /// Charge per unit length induced on the grounded outer box, C/m.
    pub boundary_charge: f64,
    /// Stored energy per unit length, J/m.
    pub energy: f64,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

impl FieldSolution {
    pub fn potential_at(&self, i: usize, j: usize) -> f64 {
        self.potential[self.grid.node(i, j)]
    }

    pub fn charge(&self, conductor: usize) -> f64 {
        self.charges.get(&conductor).copied().unwrap_or(0.0)
    }

    /// `|sum of all charges| / largest conductor charge`; zero up to
    /// roundoff since every edge flux leaves one node and enters another.
    pub fn gauss_imbalance(&self) -> f64 {
        let total: f64 = self.charges.values().sum::<f64>() + self.boundary_charge;
        let scale = self.charges.values().fold(0.0f64, |m, q| m.max(q.abs()));
        if scale == 0.0 {
            0.0
        } else {
            total.abs() / scale
        }
    }

    /// `sum Q V / 2` over the driven conductors, J/m.
    pub fn energy_from_charges(&self) -> f64 {
        0.5 * self.drive.iter().map(|(id, v)| self.charge(*id) * v).sum::<f64>()
    }
}

/// A factored electrostatic problem, reusable for several drives.
pub struct Electrostatics {
    map: RegionMap,
    grid: Grid,
    layout: Layout,
    stencil: Stencil,
    fixed: Vec<bool>,
    system: System,
}

impl Electrostatics {
    pub fn new(map: &RegionMap, grid: &Grid) -> Result<Self> {
        map.validate()?;
        let layout = Layout::new(map, grid)?;
        let stencil = Stencil::new(grid, &layout.permittivity());
        let fixed = fixed_nodes(grid, &layout);
        let system = System::new(grid, &stencil, &fixed, None)?;
        Ok(Self {
            map: map.clone(),
            grid: grid.clone(),
            layout,
            stencil,
            fixed,
            system,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn solve(&self, drive: &BTreeMap<usize, f64>) -> Result<FieldSolution> {
        let ids = self.map.conductor_ids();
        for (id, v) in drive {
            if !ids.contains(id) {
                return Err(Error::InvalidGeometry(format!("no conductor with id {id}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidGeometry(format!("potential {v} on conductor {id}")));
            }
        }
        let mut u_fixed = vec![0.0; self.grid.node_count()];
        for (k, c) in self.layout.node_conductor.iter().enumerate() {
            if let Some(id) = c {
                u_fixed[k] = drive.get(id).copied().unwrap_or(0.0);
            }
        }
        let (potential, residual) = self.system.solve(&self.grid, &self.stencil, &u_fixed, None)?;
        let outflow = self.stencil.apply(&self.grid, &potential);
        let mut charges: BTreeMap<usize, f64> = ids.iter().map(|&id| (id, 0.0)).collect();
        let mut boundary_charge = 0.0;
        for (k, q) in outflow.iter().enumerate() {
            match self.layout.node_conductor[k] {
                Some(id) => *charges.get_mut(&id).expect("known conductor") += EPS0 * q,
                None if self.fixed[k] => boundary_charge += EPS0 * q,
                None => {}
            }
        }
        let energy = EPS0 * self.stencil.energy(&self.grid, &potential);
        Ok(FieldSolution {
            map: self.map.clone(),
            grid: self.grid.clone(),
            cells: self.layout.cells.clone(),
            node_conductor: self.layout.node_conductor.clone(),
            potential,
            drive: drive.clone(),
            charges,
            boundary_charge,
            energy,
            residual,
        })
    }
}

/// Solve for the potential with the given conductor potentials (V).
pub fn solve_es(map: &RegionMap, grid: &Grid, drive: &BTreeMap<usize, f64>) -> Result<FieldSolution> {
    Electrostatics::new(map, grid)?.solve(drive)
}

/// Symmetrized Maxwell capacitance matrix of resonator (`r`) and feedline
/// (`f`), F/m. Off-diagonal entries are negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapMatrix {
    pub c_rr: f64,
    pub c_ff: f64,
    pub c_rf: f64,
    /// Relative mismatch of the raw off-diagonal pair before averaging.
    pub asymmetry: f64,
}

/// Capacitance matrix between the resonator and feedline conductors.
pub fn cap_matrix(map: &RegionMap, grid: &Grid) -> Result<CapMatrix> {
    let ids = map.conductor_ids();
    if !ids.contains(&RESONATOR) || !ids.contains(&FEEDLINE) {
        return Err(Error::InvalidGeometry("need resonator and feedline conductors".into()));
    }
    let es = Electrostatics::new(map, grid)?;
    let r = es.solve(&BTreeMap::from([(RESONATOR, 1.0)]))?;
    let f = es.solve(&BTreeMap::from([(FEEDLINE, 1.0)]))?;
    let (c_rf, c_fr) = (f.charge(RESONATOR), r.charge(FEEDLINE));
    let mean = 0.5 * (c_rf + c_fr);
    let asymmetry = if mean == 0.0 { 0.0 } else { ((c_rf - c_fr) / mean).abs() };
    if asymmetry >= MAX_ASYMMETRY {
        return Err(Error::Solver(format!(
            "capacitance matrix asymmetry {asymmetry:.2e} exceeds {MAX_ASYMMETRY}"
        )));
    }
    Ok(CapMatrix {
        c_rr: r.charge(RESONATOR),
        c_ff: f.charge(FEEDLINE),
        c_rf: mean,
        asymmetry,
    })
}

/// Line parameters from the field solver plus solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FdLine {
    pub params: LineParams,
    /// Capacitance with every dielectric replaced by vacuum, F/m.
    pub c_vacuum: f64,
    pub grid_summary: String,
    pub residual: f64,
}

/// `C` from the full stack and `L_g = mu0 eps0 / C_vac` from the same layout
/// with dielectrics removed.
pub fn line_params_fd(x: &CrossSection, spec: &GridSpec) -> Result<FdLine> {
    let map = cpw_layout(x, spec)?;
    let grid = Grid::build(&map, spec)?;
    line_params_on(&map, &grid)
}

/// As [`line_params_fd`] on an explicit layout and grid.
pub fn line_params_on(map: &RegionMap, grid: &Grid) -> Result<FdLine> {
    let drive = BTreeMap::from([(RESONATOR, 1.0)]);
    let full = solve_es(map, grid, &drive)?;
    let vac = solve_es(&map.vacuum(), grid, &drive)?;
    let (c, c_vacuum) = (full.charge(RESONATOR), vac.charge(RESONATOR));
    if !(c > 0.0 && c_vacuum > 0.0) {
        return Err(Error::Solver(format!("non-positive capacitance {c:.3e}, {c_vacuum:.3e}")));
    }
    Ok(FdLine {
        params: LineParams::new(MU0 * EPS0 / c_vacuum, c, Method::FieldSolver),
        c_vacuum,
        grid_summary: grid.summary(),
        residual: full.residual.max(vac.residual),
    })
}

/// Capacitance matrix for a resonator/feedline pair laid out by
/// [`coupling_layout`].
pub fn coupling_cap_matrix(x: &CrossSection, feed: &FeedlineGeometry, spec: &GridSpec) -> Result<(CapMatrix, String)> {
    let map = coupling_layout(x, feed, spec)?;
    let grid = Grid::build(&map, spec)?;
    Ok((cap_matrix(&map, &grid)?, grid.summary()))
}
