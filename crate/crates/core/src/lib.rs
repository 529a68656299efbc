//! Relay-side detection for the 2x2 MIMO two-way relay channel.
//!
//! Two end nodes transmit QPSK symbols simultaneously to a two-antenna relay,
//! which wants `x1 ⊕ x2` rather than the individual symbols. This crate
//! provides:
//!
//! - [`detect`]: QR-VBLAST network coding, VBLAST physical-layer network
//!   coding with partial interference cancellation, their sorted-order
//!   variants, a zero-forcing baseline, and an ML oracle;
//! - [`harness`]: a deterministic, parallel Monte Carlo BER engine;
//! - [`cli`]: the `mimopnc` command line and its CSV format.

pub mod cli;
pub mod detect;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod phy;

pub use detect::{DetectorId, DetectorInput, PncCoefficient, XorEstimate};
pub use error::{Error, Result};
pub use harness::{BerRecord, ChannelMode, SimConfig};
pub use linalg::{Cplx, Mat2, QrFactors, Vec2};
pub use phy::{BitPair, NoiseParams, QpskSymbol, RngStream};
