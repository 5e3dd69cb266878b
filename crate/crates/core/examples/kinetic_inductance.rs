//! Kinetic inductance of the flip-chip CPW from a London-equation current
//! solve, swept over inter-chip spacing, plus where the return current flows.
//!
//! cargo run --release --example kinetic_inductance [-- lambda_nm]

use flipcpw::fieldsolver::{cpw_layout, Grid, GridSpec};
use flipcpw::london::{kinetic_inductance, solve_current, LondonConfig};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let lambda_nm = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(83.0);
    let cfg = LondonConfig::new(lambda_nm);
    println!("lambda = {lambda_nm} nm");
    println!("h_s_um  L_k(nH/m)  plane_share  facing_center");
    for h_s in [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 14.0, 20.0] {
        let x = CrossSection::reference(h_s, Facing::MetalGround);
        let spec = cfg.grid_spec(&GridSpec::default(), x.t);
        let map = cpw_layout(&x, &spec)?;
        let grid = Grid::build(&map, &spec)?;
        let sol = solve_current(&map, &grid, &cfg)?;
        let plane_y = x.t + x.h_s;
        let on_plane = |_: f64, y: f64| y >= plane_y - 1e-9;
        let total = sol.squared_current_where(|_, _| true);
        let plane = sol.squared_current_where(on_plane);
        let facing = sol.squared_current_where(|px, py| on_plane(px, py) && px.abs() <= 0.5 * x.w);
        println!(
            "{h_s:6.1}  {:9.4}  {:11.3}  {:13.3}",
            kinetic_inductance(&sol) * 1e9,
            plane / total,
            facing / plane
        );
    }
    Ok(())
}
