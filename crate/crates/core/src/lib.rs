//! Design toolkit for superconducting coplanar-waveguide (CPW) resonators in
//! flip-chip geometry.
//!
//! The crate predicts per-unit-length inductance and capacitance of a CPW
//! cross-section facing either an opposing metal ground plane or bare
//! dielectric, and turns them into resonator frequencies, coupling quality
//! factors and inter-chip-spacing sensitivities. Two independent routes are
//! provided for every cross-section quantity:
//!
//! - [`conformal`]: closed-form conformal-mapping expressions (zero-thickness
//!   films, magnetic walls in the CPW gaps).
//! - [`fieldsolver`]: a finite-difference electrostatic solver on a
//!   boundary-aligned nonuniform grid with finite film thickness.
//!
//! Kinetic inductance comes from a London-equation current solve ([`london`]),
//! device-level predictions from [`resonator`], and the ground-plane cutout
//! design from [`cutout`]. The [`cli`] module backs the `flipcpw` binary.
//!
//! Units: geometric inputs are in micrometres, film thickness and penetration
//! depth in nanometres at the configuration layer, everything derived is SI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod conformal;
pub mod constants;
pub mod cutout;
pub mod elliptic;
mod error;
pub mod fieldsolver;
pub mod geometry;
pub mod london;
pub mod resonator;
pub mod search;

pub use error::{Error, Result};
pub use geometry::{CrossSection, Facing, LineParams, Method};
