//! Fits the coupling-pad length coefficients to frequency-vs-radius samples
//! and checks them against the values used to generate the samples.
//!
//! cargo run --example fit_eff_length

use flipcpw::conformal;
use flipcpw::resonator::{fit_eff_length, resonant_frequency, total_length, ResonatorSpec};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let lp = conformal::line_params(&CrossSection::reference(8.0, Facing::MetalGround))?;
    let base = ResonatorSpec::reference();
    let samples: Vec<(f64, f64)> = [10.0, 20.0, 29.4, 40.0, 50.0]
        .into_iter()
        .map(|r| (r, resonant_frequency(&lp, total_length(&ResonatorSpec { r, ..base }), 1)))
        .collect();
    for (r, f) in &samples {
        println!("R = {r:5.1} um  f = {:.6} GHz", f * 1e-9);
    }
    let fit = fit_eff_length(&samples, &lp, base.l_r())?;
    println!(
        "alpha1 = {:.5} /um (set {})  alpha2 = {:.4} (set {})  rms = {:.2e} Hz",
        fit.alpha1, base.alpha1, fit.alpha2, base.alpha2, fit.rms
    );
    println!("pad length at R = {} um: {:.3} um", base.r, fit.pad_length(base.r));
    Ok(())
}
