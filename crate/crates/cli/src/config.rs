//! Experiment configuration, read from TOML. Unknown keys are rejected and
//! every field has a default, so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use fdcim::cost::{CostEntry, CostTable};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Label used for the output directory; defaults to the subcommand name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    pub seed: u64,
    /// Output root. Not part of the effective configuration.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    pub transform: TransformSection,
    pub crossbar: CrossbarSection,
    pub adc: AdcSection,
    pub asymsearch: AsymSection,
    pub cost: CostSection,
    pub dnl_inl: DnlSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformSection {
    pub max_order_log2: u32,
    /// Random integer vectors checked against the matrix product per order.
    pub vectors_per_order: usize,
    /// Blockwise round trips run for every length `1..=bwht_max_len`.
    pub bwht_max_len: usize,
    pub min_block: usize,
}

impl Default for TransformSection {
    fn default() -> Self {
        TransformSection {
            max_order_log2: 10,
            vectors_per_order: 20,
            bwht_max_len: 256,
            min_block: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossbarSection {
    pub order_log2: Vec<u32>,
    pub input_bits: u32,
    pub signed: bool,
    /// Real value of one input LSB.
    pub input_scale: f64,
    pub thresholds: Vec<f64>,
    pub trials: usize,
    pub noise_sigma: f64,
    pub comparator_offset: f64,
    /// `msb_first` or `lsb_first`.
    pub plane_order: String,
}

impl Default for CrossbarSection {
    fn default() -> Self {
        CrossbarSection {
            order_log2: vec![3, 5],
            input_bits: 4,
            signed: true,
            input_scale: 0.125,
            thresholds: vec![0.0, 0.25, 0.5, 1.0, 2.0],
            trials: 2000,
            noise_sigma: 0.0,
            comparator_offset: 0.0,
            plane_order: "msb_first".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdcSection {
    pub bits: u32,
    /// Capacitor units per array (column lines).
    pub columns: usize,
    pub vdd: f64,
    /// `sar`, `flash`, `hybrid` or `asymmetric`.
    pub mode: String,
    pub flash_bits: u32,
    pub comparator_offset: f64,
    /// Relative standard deviation of unit capacitors; 0 is ideal.
    pub mismatch_sigma: f64,
    pub sweep_points: usize,
}

impl Default for AdcSection {
    fn default() -> Self {
        AdcSection {
            bits: 5,
            columns: 32,
            vdd: 1.0,
            mode: "sar".into(),
            flash_bits: 2,
            comparator_offset: 0.0,
            mismatch_sigma: 0.0,
            sweep_points: 10_240,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymSection {
    pub columns: Vec<usize>,
    pub bits: Vec<u32>,
    /// `unipolar_and` or `bipolar_product`.
    pub algebra: String,
}

impl Default for AsymSection {
    fn default() -> Self {
        AsymSection {
            columns: vec![8, 16, 32, 64],
            bits: vec![3, 4, 5, 6],
            algebra: "unipolar_and".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostEntrySection {
    pub tech_nm: f64,
    pub area_um2: f64,
    pub energy_pj: f64,
}

impl From<CostEntry> for CostEntrySection {
    fn from(e: CostEntry) -> Self {
        CostEntrySection {
            tech_nm: e.tech_nm,
            area_um2: e.area_um2,
            energy_pj: e.energy_pj,
        }
    }
}

impl From<CostEntrySection> for CostEntry {
    fn from(e: CostEntrySection) -> Self {
        CostEntry {
            tech_nm: e.tech_nm,
            area_um2: e.area_um2,
            energy_pj: e.energy_pj,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSection {
    pub sar: CostEntrySection,
    pub flash: CostEntrySection,
    pub in_memory: CostEntrySection,
    pub bits_min: u32,
    pub bits_max: u32,
    pub flash_bits: u32,
    /// Columns and width of the MAV whose pmf sets the asymmetric search depth.
    pub asym_columns: usize,
    pub asym_bits: u32,
    /// `[c_in, c_out]` of each pointwise layer in the replacement report.
    pub layers: Vec<[usize; 2]>,
}

impl Default for CostSection {
    fn default() -> Self {
        let t = CostTable::default();
        CostSection {
            sar: t.sar.into(),
            flash: t.flash.into(),
            in_memory: t.in_memory.into(),
            bits_min: 3,
            bits_max: 10,
            flash_bits: 2,
            asym_columns: 32,
            asym_bits: 5,
            layers: vec![
                [32, 16],
                [16, 96],
                [96, 24],
                [24, 144],
                [144, 24],
                [144, 32],
                [192, 32],
                [192, 64],
                [384, 64],
                [384, 96],
                [576, 96],
                [576, 160],
                [960, 160],
                [960, 320],
                [320, 1280],
            ],
        }
    }
}

impl CostSection {
    pub fn table(&self) -> CostTable {
        CostTable {
            sar: self.sar.into(),
            flash: self.flash.into(),
            in_memory: self.in_memory.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DnlSection {
    pub bits: u32,
    pub columns: usize,
    pub vdd: f64,
    pub mismatch_sigma: f64,
    /// Independent mismatch draws.
    pub trials: usize,
    pub sweep_points: usize,
    /// MAV samples per draw in the shared-array comparison.
    pub common_mode_samples: usize,
}

impl Default for DnlSection {
    fn default() -> Self {
        DnlSection {
            bits: 5,
            columns: 32,
            vdd: 1.0,
            mismatch_sigma: 0.02,
            trials: 10,
            sweep_points: 10_240,
            common_mode_samples: 2000,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical TOML of everything that influences the artifacts.
    pub fn effective_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of [`Config::effective_toml`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.effective_toml().as_bytes()))
    }
}
