//! Physical constants (CODATA 2018).

/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Micrometre in metres.
pub const UM: f64 = 1e-6;

/// Nanometre in metres.
pub const NM: f64 = 1e-9;
