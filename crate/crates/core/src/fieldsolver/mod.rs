//! Finite-difference electrostatics of flip-chip CPW cross-sections.
//!
//! Layouts are painted from rectangles ([`RegionMap`]), discretized on a
//! tensor grid whose lines include every material edge ([`Grid`]), and
//! solved as a node-based finite-volume Laplace problem with conductors held
//! at fixed potentials and a grounded outer box. Conductor charges are the
//! discrete flux residuals, so charge bookkeeping closes to roundoff.

mod assembly;
mod electrostatic;
mod export;
mod grid;
mod participation;
mod region;

pub(crate) use assembly::{fixed_nodes, Layout, Stencil, System};
pub use assembly::RESIDUAL_TOL;
pub use electrostatic::{
    cap_matrix, coupling_cap_matrix, line_params_fd, line_params_on, solve_es, CapMatrix, Electrostatics,
    FdLine, FieldSolution, MAX_ASYMMETRY,
};
pub use export::{ExportRow, FieldExport};
pub use grid::{Grid, GridSpec};
pub use participation::{participation, participation_q, Interface, InterfaceLayers, LossLayer, Participation};
pub use region::{
    coupling_layout, cpw_layout, parallel_plate_layout, FeedlineGeometry, Material, Rect, Region, RegionMap,
    FEEDLINE, GROUND, RESONATOR,
};

impl FieldSolution {
    /// Potential at every node in the text export format.
    pub fn export(&self) -> FieldExport {
        let g = &self.grid;
        let mut rows = Vec::with_capacity(g.node_count());
        for i in 0..g.nx() {
            for j in 0..g.ny() {
                let k = g.node(i, j);
                rows.push(ExportRow {
                    i,
                    j,
                    conductor: self.node_conductor[k],
                    value: self.potential[k],
                    area_um2: None,
                });
            }
        }
        let drive = self
            .drive
            .iter()
            .map(|(id, v)| format!("{id}:{v:e}"))
            .collect::<Vec<_>>()
            .join(",");
        FieldExport {
            quantity: "potential_v".into(),
            grid: g.clone(),
            bounds: self.map.bounds,
            regions: self.map.regions.clone(),
            meta: [("drive".to_string(), drive)].into_iter().collect(),
            rows,
        }
    }
}
