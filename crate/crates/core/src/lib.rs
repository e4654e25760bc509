//! Bit-exact behavioral models for frequency-domain compute-in-memory
//! inference.
//!
//! - [`wht`]: Hadamard/Walsh matrices, fast and blockwise transforms.
//! - [`quant`]: fixed-point words, bitplanes, soft thresholding.
//! - [`crossbar`]: bitplane-serial `±1` crossbar with early termination.
//! - [`adc`]: memory-immersed SAR, Flash, hybrid and asymmetric conversion.
//! - [`cost`]: area/energy/latency and parameter accounting.

pub mod adc;
pub mod cost;
pub mod crossbar;
mod error;
pub mod quant;
pub mod wht;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use crossbar::{chain_layer, CrossbarArray, CrossbarConfig, EtMode, F0Result, PlaneOrder};
pub use quant::{
    from_bitplanes, quantize, soft_threshold, soft_threshold_grads, to_bitplanes, BitplaneTensor, FixedPointVector,
    Signedness, ThresholdParams,
};
pub use wht::{bwht_apply, bwht_plan, fwht, hadamard, walsh, BwhtPlan, Direction, RowOrder, WalshMatrix};
