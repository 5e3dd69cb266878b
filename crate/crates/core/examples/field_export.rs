//! Writes the supercurrent density of the reference cross-section to the
//! text field format, reads it back, and recomputes the kinetic inductance
//! from the file alone.
//!
//! cargo run --release --example field_export [-- path]

use flipcpw::fieldsolver::{cpw_layout, FieldExport, Grid, GridSpec};
use flipcpw::london::{kinetic_inductance, kinetic_inductance_from_export, solve_current, LondonConfig};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("flipcpw_current.txt"));
    let x = CrossSection::reference(8.0, Facing::MetalGround);
    let cfg = LondonConfig::new(83.0);
    let spec = cfg.grid_spec(&GridSpec::default(), x.t);
    let map = cpw_layout(&x, &spec)?;
    let grid = Grid::build(&map, &spec)?;
    let sol = solve_current(&map, &grid, &cfg)?;
    sol.export().write_to(&mut std::fs::File::create(&path)?)?;
    let back = FieldExport::read_from(std::io::BufReader::new(std::fs::File::open(&path)?))?;
    println!("wrote {} ({} rows, {})", path.display(), back.rows.len(), back.grid.summary());
    println!("L_k from solve:  {:.6} nH/m", kinetic_inductance(&sol) * 1e9);
    println!("L_k from export: {:.6} nH/m", kinetic_inductance_from_export(&back, None, None)? * 1e9);
    Ok(())
}
