//! Dielectric-facing length fraction that makes the resonator frequency
//! insensitive to inter-chip spacing, from conformal tables or, with `fd`,
//! from field-solver tables.
//!
//! cargo run --release --example cutout_optimization [-- fd]

use flipcpw::cutout::{optimize_gamma, spacing_grid, MixInput};
use flipcpw::fieldsolver::{line_params_fd, GridSpec};
use flipcpw::{CrossSection, Facing, LineParams};

fn main() -> flipcpw::Result<()> {
    let fd = std::env::args().nth(1).is_some_and(|a| a == "fd");
    let base = CrossSection::reference(8.0, Facing::MetalGround);
    let mix = if fd {
        let grid = spacing_grid(6.0, 10.0, 0.5)?;
        let spec = GridSpec::default();
        let table = |facing| -> flipcpw::Result<Vec<LineParams>> {
            grid.iter()
                .map(|&h| Ok(line_params_fd(&base.with_spacing(h).with_facing(facing), &spec)?.params))
                .collect()
        };
        MixInput::new(grid.clone(), table(Facing::MetalGround)?, table(Facing::Dielectric)?, false)?
    } else {
        MixInput::conformal(&base, 6.0, 10.0, 0.25)?
    };
    let opt = optimize_gamma(&mix)?;
    println!("gamma_opt = {:.4}  cost = {:.4e}", opt.gamma, opt.cost.normalized);
    println!("h_s_um  f/f(h_ref) - 1");
    for (h, d) in &opt.deviation {
        println!("{h:6.2}  {d:+.3e}");
    }
    println!("max |deviation| = {:.3e}", opt.max_abs_deviation());
    Ok(())
}
