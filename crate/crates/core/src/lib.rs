//! Link model for dispersion-supported BB84 with a pair of RF phase
//! modulators (PM-PM frequency coding).
//!
//! Alice and Bob each drive a phase modulator at the same RF frequency Ω.
//! Chromatic dispersion in the fiber between them rotates the relative phase
//! of the two first-order sidebands, so that at `β₂·L·Ω² = nπ` the upper and
//! lower sideband powers become complementary and a four-state BB84 encoding
//! becomes measurable with two filters and two photon counters.
//!
//! * [`field`]: carrier + sideband field, modulators, fiber, time-domain oracle
//! * [`detection`]: optical spectrum rendering and photon-counting click model
//! * [`protocol`]: BB84 encoding, sifting, Monte-Carlo sessions, closed-form QBER
//! * [`design`]: the dispersion design criterion in every direction
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below cover the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod design;
pub mod detection;
pub mod error;
pub mod field;
pub mod protocol;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Scalar, SPEED_OF_LIGHT};

pub type SidebandField64 = field::SidebandField<f64>;
pub type ModulatorParams64 = field::ModulatorParams<f64>;
pub type LinkParams64 = field::LinkParams<f64>;
pub type Cascade64 = field::Cascade<f64>;
pub type OsaParams64 = detection::OsaParams<f64>;
pub type DetectorParams64 = detection::DetectorParams<f64>;
pub type SessionConfig64 = protocol::SessionConfig<f64>;
pub type QberReport64 = protocol::QberReport<f64>;
pub type DesignCriterion64 = design::DesignCriterion<f64>;

pub type SidebandField32 = field::SidebandField<f32>;
pub type LinkParams32 = field::LinkParams<f32>;
pub type Cascade32 = field::Cascade<f32>;
