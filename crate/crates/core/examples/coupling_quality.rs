//! Capacitance matrix of the resonator/feedline coupling section, the
//! coupling quality factor and the coupling-induced frequency shift, as the
//! ground strip between the two lines widens.
//!
//! cargo run --release --example coupling_quality

use flipcpw::conformal;
use flipcpw::fieldsolver::{coupling_cap_matrix, FeedlineGeometry, GridSpec};
use flipcpw::resonator::{coupling, resonant_frequency, total_length, ResonatorSpec};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let x = CrossSection::reference(8.0, Facing::MetalGround);
    let spec = ResonatorSpec::reference();
    let l_tot = total_length(&spec);
    let lp = conformal::line_params(&x)?;
    let f = resonant_frequency(&lp, l_tot, spec.p);
    println!("f_bare = {:.6} GHz, Z_r = {:.2} ohm", f * 1e-9, lp.impedance());
    println!("d_um   C_rr(pF/m)  C_ff(pF/m)  C_rf(pF/m)  asym      kappa     Q_c        df_c(MHz)");
    for d in [3.0, 6.0, 10.0, 20.0, 40.0] {
        let feed = FeedlineGeometry { w_f: spec.w_f, s_f: spec.s_f, d };
        let (cm, _) = coupling_cap_matrix(&x, &feed, &GridSpec::default())?;
        let c = coupling(&cm, f, &ResonatorSpec { d, ..spec }, l_tot, lp.impedance())?;
        println!(
            "{d:5.1}  {:10.4}  {:10.4}  {:10.5}  {:.1e}  {:.5}  {:9.4e}  {:.4}",
            cm.c_rr * 1e12,
            cm.c_ff * 1e12,
            cm.c_rf * 1e12,
            cm.asymmetry,
            c.kappa,
            c.q_c.unwrap_or(f64::INFINITY),
            c.df_c * 1e-6
        );
    }
    Ok(())
}
