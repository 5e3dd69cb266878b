//! Closed-form line parameters and the fundamental frequency of the
//! reference resonator for both facings.
//!
//! cargo run --example line_params [-- h_s_um]

use flipcpw::conformal::{self, moduli};
use flipcpw::elliptic::k_ratio;
use flipcpw::resonator::{resonant_frequency, total_length, ResonatorSpec};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let h_s = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8.0);
    let spec = ResonatorSpec::reference();
    let l_tot = total_length(&spec);
    println!("h_s = {h_s} um, l_tot = {l_tot:.3} um");
    for facing in [Facing::MetalGround, Facing::Dielectric] {
        let x = CrossSection::reference(h_s, facing);
        let m = moduli(&x)?;
        let lp = conformal::line_params(&x)?;
        println!("{facing:?}");
        println!("  K(k1)/K(k1') = {:.6}", k_ratio(m.k1)?);
        println!("  L = {:.4} nH/m  C = {:.4} pF/m", lp.l_g * 1e9, lp.c * 1e12);
        println!("  Z = {:.3} ohm  eps_eff = {:.4}", lp.impedance(), lp.eps_eff());
        println!("  f1 = {:.6} GHz", resonant_frequency(&lp, l_tot, 1) * 1e-9);
        for w in conformal::validity_warnings(&x) {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
