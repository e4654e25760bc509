//! Memory-immersed collaborative digitization.
//!
//! Column lines of a neighbouring array form a capacitive DAC. One pair of
//! arrays gives a SAR converter; coupling more arrays gives Flash or hybrid
//! Flash + SAR conversion. Skewed MAV statistics admit an asymmetric search
//! that needs fewer comparisons on average.

mod common_mode;
mod convert;
mod dac;
mod linearity;
mod search;

pub use common_mode::{common_mode_trial, CommonModeOutcome};
pub use convert::{
    asymmetric_convert, conversion_timeline, flash_convert, flash_convert_msbs, hybrid_convert, sar_convert, AdcConfig,
    AdcConversionTrace, AdcMode, AdcNetwork, ArrayRole, CycleKind, CycleRecord, FlashOutcome, MemoryAdc, MAX_ADC_BITS,
};
pub use dac::CapDac;
pub use linearity::{dnl_inl, transfer_curve, uniform_sweep, Linearity, TransferCurve};
pub use search::{
    build_asymmetric_tree, expected_comparisons, mav_pmf, mav_pmf_with, optimal_expected_comparisons, MavAlgebra,
    MavPmf, SearchTree, TreeNode, MAX_TREE_BITS,
};
