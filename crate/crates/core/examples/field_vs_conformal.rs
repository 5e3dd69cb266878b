//! Conformal-mapping and field-solver line parameters across inter-chip
//! spacings, with the relative offsets between the two routes.
//!
//! cargo run --release --example field_vs_conformal [-- h_s ...]

use std::time::Instant;

use flipcpw::conformal;
use flipcpw::fieldsolver::{line_params_fd, GridSpec};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let spacings = if args.is_empty() { vec![2.0, 4.0, 8.0, 20.0, 40.0, 60.0] } else { args };
    let spec = GridSpec::default();
    println!("h_s_um  L_conf(nH/m)  L_fd(nH/m)  dL/L(%)  C_conf(pF/m)  C_fd(pF/m)  dC/C(%)  grid  time(s)");
    for h in spacings {
        let x = CrossSection::reference(h, Facing::MetalGround);
        let conf = conformal::line_params(&x)?;
        let t0 = Instant::now();
        let fd = line_params_fd(&x, &spec)?;
        let p = fd.params;
        println!(
            "{h:6.2}  {:12.3}  {:10.3}  {:7.2}  {:12.3}  {:10.3}  {:7.2}  {}  {:.2}",
            conf.l_g * 1e9,
            p.l_g * 1e9,
            100.0 * (p.l_g - conf.l_g) / p.l_g,
            conf.c * 1e12,
            p.c * 1e12,
            100.0 * (p.c - conf.c) / p.c,
            fd.grid_summary,
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
