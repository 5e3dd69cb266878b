//! Field-solver self-checks: parallel-plate capacitance, grid-doubling drift,
//! Gauss charge balance and mirror symmetry on the flip-chip CPW.
//!
//! cargo run --release --example grid_convergence [-- growth h_min_um h_far_um]

use std::collections::BTreeMap;

use flipcpw::constants::EPS0;
use flipcpw::fieldsolver::{cpw_layout, line_params_on, parallel_plate_layout, solve_es, Grid, GridSpec, RESONATOR};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let plates = parallel_plate_layout(100.0, 10.0, 0.15);
    let grid = Grid::build(&plates, &GridSpec::default())?;
    let sol = solve_es(&plates, &grid, &BTreeMap::from([(RESONATOR, 1.0)]))?;
    println!(
        "parallel plate: C = {:.4} pF/m, eps0 W/d = {:.4} pF/m, gauss imbalance {:.1e}",
        sol.charge(RESONATOR) * 1e12,
        EPS0 * 10.0 * 1e12,
        sol.gauss_imbalance()
    );

    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let spec = GridSpec {
        growth: args.first().copied().unwrap_or(GridSpec::default().growth),
        h_min: args.get(1).copied().filter(|&h| h > 0.0),
        h_far: args.get(2).copied().unwrap_or(GridSpec::default().h_far),
        ..GridSpec::default()
    };
    for h_s in [2.0, 8.0, 40.0] {
        for facing in [Facing::MetalGround, Facing::Dielectric] {
            let x = CrossSection::reference(h_s, facing);
            let map = cpw_layout(&x, &spec)?;
            let grid = Grid::build(&map, &spec)?;
            let coarse = line_params_on(&map, &grid)?;
            let fine = line_params_on(&map, &grid.bisected())?;
            let mirrored = line_params_on(&map.mirrored_x(), &Grid::build(&map.mirrored_x(), &spec)?)?;
            println!(
                "{facing:?} h_s={h_s} {}: C drift {:+.3}%, C_vac drift {:+.3}%, mirror {:.1e}",
                grid.summary(),
                100.0 * (fine.params.c / coarse.params.c - 1.0),
                100.0 * (fine.c_vacuum / coarse.c_vacuum - 1.0),
                (mirrored.params.c / coarse.params.c - 1.0).abs()
            );
        }
    }
    Ok(())
}
