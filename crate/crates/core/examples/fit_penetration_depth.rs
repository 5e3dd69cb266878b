//! Recovers the London penetration depth from synthetic "measured"
//! frequencies generated with a known depth at several spacings.
//!
//! cargo run --release --example fit_penetration_depth [-- lambda_nm]

use flipcpw::conformal;
use flipcpw::fieldsolver::GridSpec;
use flipcpw::london::{cpw_kinetic_inductance, fit_lambda, FitEntry, LondonConfig};
use flipcpw::resonator::{resonant_frequency, total_length, ResonatorSpec};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let truth = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(83.0);
    let grid = GridSpec::default();
    let l_tot = total_length(&ResonatorSpec::reference());
    let mut entries = Vec::new();
    for h_s in [6.0, 8.0, 10.0] {
        let x = CrossSection::reference(h_s, Facing::MetalGround);
        let params = conformal::line_params(&x)?;
        let l_k = cpw_kinetic_inductance(&x, &LondonConfig::new(truth), &grid)?;
        let f_meas = resonant_frequency(&params.with_kinetic(l_k), l_tot, 1);
        println!("h_s = {h_s:4.1} um  f_geo = {:.5} GHz  f_meas = {:.5} GHz", resonant_frequency(&params, l_tot, 1) * 1e-9, f_meas * 1e-9);
        entries.push(FitEntry {
            cross_section: x,
            params,
            l_tot_um: l_tot,
            harmonic: 1,
            f_meas,
        });
    }
    let fit = fit_lambda(&entries, &grid)?;
    println!(
        "lambda = {:.2} nm (true {truth}), resolvable = {}, residual = {:.2e} Hz",
        fit.lambda_nm, fit.resolvable, fit.mean_offset
    );
    Ok(())
}
