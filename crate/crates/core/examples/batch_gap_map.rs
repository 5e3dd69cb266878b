//! Frequencies of resonators spread over a chip whose gap varies between the
//! measured corner values.
//!
//! cargo run --example batch_gap_map

use flipcpw::conformal;
use flipcpw::resonator::{gap_at, resonant_frequency, total_length, GapMap, ResonatorSpec};
use flipcpw::{CrossSection, Facing};

fn main() -> flipcpw::Result<()> {
    let map = GapMap {
        nw: 8.3,
        ne: 9.3,
        sw: 8.3,
        se: 8.8,
        width: 10_000.0,
        height: 10_000.0,
    };
    println!("name  x_um  y_um  h_s_um  f_GHz");
    for (i, (x, y)) in [(1000.0, 1000.0), (5000.0, 5000.0), (9000.0, 1000.0), (9000.0, 9000.0)]
        .into_iter()
        .enumerate()
    {
        let h_s = gap_at(&map, x, y)?;
        let spec = ResonatorSpec {
            l_s: 3780.3 + 40.0 * i as f64,
            ..ResonatorSpec::reference()
        };
        let lp = conformal::line_params(&CrossSection::reference(h_s, Facing::MetalGround))?;
        let f = resonant_frequency(&lp, total_length(&spec), spec.p);
        println!("r{i}  {x:6.0}  {y:6.0}  {h_s:.3}  {:.6}", f * 1e-9);
    }
    match gap_at(&map, 12_000.0, 0.0) {
        Err(e) => println!("off-chip point rejected: {e}"),
        Ok(h) => println!("unexpected gap {h}"),
    }
    Ok(())
}
