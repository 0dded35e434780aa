//! Link-level simulation and analysis of differential Alamouti STBC-OFDM
//! with receiver I/Q imbalance.
//!
//! The crate is organised along the signal chain:
//!
//! ```text
//! bits -> numerics (PSK) -> stbc (Alamouti + differential) -> ofdm (IDFT + CP)
//!      -> channel (2x1 Rayleigh TDL) -> AWGN -> iqi -> ofdm (CP removal + DFT)
//!      -> compensator (widely-linear LMS) -> stbc (ML detection) -> bits
//! ```
//!
//! `analysis` holds the closed-form SINR/BER expressions used to cross-check
//! the simulator, and `harness` drives Monte Carlo sweeps and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod channel;
pub mod compensator;
pub mod error;
pub mod harness;
pub mod iqi;
pub mod numerics;
pub mod ofdm;
pub mod stbc;

pub use error::{Error, Result};
pub use num_complex::Complex64;
