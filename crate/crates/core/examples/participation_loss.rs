//! Surface participation ratios and the TLS-limited quality factor of the
//! CPW facing metal or bare dielectric across the inter-chip gap.
//!
//! cargo run --release --example participation_loss

use flipcpw::fieldsolver::{participation_q, GridSpec, InterfaceLayers};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let layers = InterfaceLayers::default();
    let spec = GridSpec::default();
    println!("facing        h_s_um   p_SA       p_SM       p_MA       Q_pr");
    for facing in [Facing::MetalGround, Facing::Dielectric] {
        for h_s in [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0] {
            let p = participation_q(&CrossSection::reference(h_s, facing), &layers, &spec)?;
            println!(
                "{:12}  {h_s:6.1}  {:.3e}  {:.3e}  {:.3e}  {:.4e}",
                format!("{facing:?}"),
                p.p_sa,
                p.p_sm,
                p.p_ma,
                p.q_pr.unwrap_or(f64::INFINITY)
            );
        }
    }
    Ok(())
}
