//! Behavioral model of a `±1` crossbar evaluated one input bitplane at a
//! time.
//!
//! Each plane yields a per-row multiply-average (MAV) in `[-1, 1]`, a 1-bit
//! comparator decision, and a signed digit `2b - 1` weighted by the plane's
//! significance. Summing digits over planes gives the approximate transform
//! `F0`. Early termination stops a row once its output is known to land in
//! the soft-threshold dead zone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::quant::{
    code_range, soft_threshold, to_bitplanes, BitplaneTensor, FixedPointVector, Quantizer, Signedness, ThresholdParams,
    MAX_WORD_BITS,
};
use crate::wht::WalshMatrix;

/// Clock cycles spent per evaluated plane (precharge/compute, then
/// row-merge/compare).
pub const CYCLES_PER_PLANE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PlaneOrder {
    #[default]
    MsbFirst,
    LsbFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EtMode {
    /// Evaluate every plane, no thresholding.
    #[default]
    Full,
    /// Stop a row as soon as its partial sum is inside `[-T, T]`.
    HeuristicEt,
    /// Stop a row only when no remaining planes can push it out of `[-T, T]`.
    SoundEt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarConfig {
    /// Per-row comparator offsets; empty means all zero, one value broadcasts.
    pub comparator_offsets: Vec<f64>,
    pub mav_noise_sigma: f64,
    pub rng_seed: u64,
    pub plane_order: PlaneOrder,
    /// Skip planes whose bits are all zero. Their exact contribution is zero.
    pub skip_zero_planes: bool,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        CrossbarConfig {
            comparator_offsets: Vec::new(),
            mav_noise_sigma: 0.0,
            rng_seed: 0,
            plane_order: PlaneOrder::MsbFirst,
            skip_zero_planes: true,
        }
    }
}

/// A programmed `R x C` array of `±1` cells plus its non-ideality settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    weights: Vec<i8>,
    offsets: Vec<f64>,
    noise_sigma: f64,
    seed: u64,
    plane_order: PlaneOrder,
    skip_zero_planes: bool,
}

impl CrossbarArray {
    /// Programs a row-major `rows x cols` matrix.
    pub fn program(rows: usize, cols: usize, entries: &[i64], config: &CrossbarConfig) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape("crossbar needs at least one row and one column"));
        }
        if entries.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} entries for a {rows}x{cols} crossbar",
                entries.len()
            )));
        }
        let mut weights = Vec::with_capacity(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            match v {
                1 => weights.push(1),
                -1 => weights.push(-1),
                _ => {
                    return Err(Error::Programming {
                        row: i / cols,
                        col: i % cols,
                        value: v,
                    })
                }
            }
        }
        if !(config.mav_noise_sigma >= 0.0 && config.mav_noise_sigma.is_finite()) {
            return Err(Error::param(format!(
                "MAV noise sigma must be finite and non-negative, got {}",
                config.mav_noise_sigma
            )));
        }
        let offsets = match config.comparator_offsets.len() {
            0 => vec![0.0; rows],
            1 => vec![config.comparator_offsets[0]; rows],
            n if n == rows => config.comparator_offsets.clone(),
            n => return Err(Error::shape(format!("{n} comparator offsets for {rows} rows"))),
        };
        if offsets.iter().any(|o| !o.is_finite()) {
            return Err(Error::param("comparator offsets must be finite"));
        }
        Ok(CrossbarArray {
            rows,
            cols,
            weights,
            offsets,
            noise_sigma: config.mav_noise_sigma,
            seed: config.rng_seed,
            plane_order: config.plane_order,
            skip_zero_planes: config.skip_zero_planes,
        })
    }

    pub fn from_walsh(matrix: &WalshMatrix, config: &CrossbarConfig) -> Result<Self> {
        let n = matrix.size();
        let entries: Vec<i64> = matrix.entries().iter().map(|&v| v as i64).collect();
        Self::program(n, n, &entries, config)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, row: usize, col: usize) -> i8 {
        self.weights[row * self.cols + col]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn plane_order(&self) -> PlaneOrder {
        self.plane_order
    }

    fn check_plane(&self, plane: &[u8]) -> Result<()> {
        if plane.len() != self.cols {
            return Err(Error::shape(format!(
                "plane of length {} applied to {} columns",
                plane.len(),
                self.cols
            )));
        }
        if plane.iter().any(|&b| b > 1) {
            return Err(Error::param("plane contains a non-binary entry"));
        }
        Ok(())
    }

    fn row_sums(&self, plane: &[u8]) -> Vec<i64> {
        self.weights
            .chunks_exact(self.cols)
            .map(|row| {
                row.iter()
                    .zip(plane)
                    .filter(|(_, &b)| b == 1)
                    .map(|(&w, _)| w as i64)
                    .sum()
            })
            .collect()
    }

    /// Noise-free multiply-average of one plane: `(W . plane)_r / C`.
    pub fn mav(&self, plane: &[u8]) -> Result<Vec<f64>> {
        self.check_plane(plane)?;
        let c = self.cols as f64;
        Ok(self.row_sums(plane).into_iter().map(|s| s as f64 / c).collect())
    }

    /// Multiply-average with additive Gaussian noise drawn from `noise`.
    pub fn mav_with_noise(&self, plane: &[u8], noise: &mut MavNoise) -> Result<Vec<f64>> {
        let mut v = self.mav(plane)?;
        noise.perturb(&mut v);
        Ok(v)
    }

    /// Noise stream for one invocation; distinct invocations get
    /// independent, reproducible streams.
    pub fn noise_stream(&self, invocation: u64) -> MavNoise {
        MavNoise::new(self.noise_sigma, self.seed, invocation)
    }

    /// `F0` with invocation index 0.
    pub fn f0_transform(&self, input: &BitplaneTensor, mode: EtMode, t: &ThresholdParams) -> Result<F0Result> {
        self.f0_transform_at(0, input, mode, t)
    }

    /// Bitplane-serial approximate transform.
    ///
    /// Row `r` accumulates `sum_j d_{j,r} * w_j` over evaluated planes, where
    /// `d = 2b - 1` is the comparator digit and `w_j` the signed integer plane
    /// weight. Early-termination modes zero a stopped row.
    pub fn f0_transform_at(
        &self,
        invocation: u64,
        input: &BitplaneTensor,
        mode: EtMode,
        t: &ThresholdParams,
    ) -> Result<F0Result> {
        if input.len() != self.cols {
            return Err(Error::shape(format!(
                "input of length {} applied to {} columns",
                input.len(),
                self.cols
            )));
        }
        if mode != EtMode::Full {
            t.check_channels(self.rows)?;
        }
        let out_bits = input.num_planes() as u32 + 1;
        if out_bits > MAX_WORD_BITS {
            return Err(Error::Capacity {
                what: "crossbar output word width",
                limit: MAX_WORD_BITS as usize,
                requested: out_bits as usize,
            });
        }

        let order: Vec<usize> = match self.plane_order {
            PlaneOrder::MsbFirst => (0..input.num_planes()).rev().collect(),
            PlaneOrder::LsbFirst => (0..input.num_planes()).collect(),
        };
        let schedule: Vec<usize> = order
            .into_iter()
            .filter(|&j| !self.skip_zero_planes || input.plane(j).contains(&1))
            .collect();
        // remaining[i] = sum of |w| over schedule[i..]
        let mut remaining = vec![0i64; schedule.len() + 1];
        for i in (0..schedule.len()).rev() {
            remaining[i] = remaining[i + 1] + input.int_weights()[schedule[i]].abs();
        }

        let scale = input.scale();
        let mut noise = self.noise_stream(invocation);
        let mut partial = vec![0i64; self.rows];
        let mut active = vec![true; self.rows];
        let mut zeroed = vec![false; self.rows];
        let mut processed = vec![0usize; self.rows];

        for (step, &j) in schedule.iter().enumerate() {
            if !active.iter().any(|&a| a) {
                break;
            }
            let plane = input.plane(j);
            let mav = self.mav_with_noise(plane, &mut noise)?;
            let bits = comparator(&mav, &self.offsets)?;
            let w = input.int_weights()[j];
            for r in 0..self.rows {
                if !active[r] {
                    continue;
                }
                let digit = 2 * bits[r] as i64 - 1;
                partial[r] += digit * w;
                processed[r] += 1;
                let tr = t.get(r);
                let stop = match mode {
                    EtMode::Full => false,
                    EtMode::HeuristicEt => partial[r].abs() as f64 * scale <= tr,
                    EtMode::SoundEt => (partial[r].abs() + remaining[step + 1]) as f64 * scale <= tr,
                };
                if stop {
                    active[r] = false;
                    zeroed[r] = true;
                }
            }
        }

        let total = schedule.len();
        let terminated_early = processed.iter().zip(&zeroed).map(|(&p, &z)| z && p < total).collect();
        let values: Vec<i64> = partial
            .iter()
            .zip(&zeroed)
            .map(|(&p, &z)| if z { 0 } else { p })
            .collect();
        let comparator_ops = processed.iter().map(|&p| p as u64).sum();
        let cycle_count = CYCLES_PER_PLANE * processed.iter().copied().max().unwrap_or(0) as u64;
        let output = FixedPointVector::new(values, out_bits, Signedness::TwosComplement, scale)?;
        Ok(F0Result {
            output,
            planes_processed: processed,
            terminated_early,
            comparator_ops,
            cycle_count,
            planes_scheduled: total,
        })
    }
}

/// Seedable additive Gaussian MAV noise.
#[derive(Debug, Clone)]
pub struct MavNoise {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl MavNoise {
    pub fn new(sigma: f64, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma validated at programming"));
        MavNoise { rng, normal }
    }

    pub fn perturb(&mut self, values: &mut [f64]) {
        if let Some(normal) = &self.normal {
            for v in values {
                *v += normal.sample(&mut self.rng);
            }
        }
    }
}

/// Differential sign decision: `1` iff `mav + offset > 0` (ties give `0`).
pub fn comparator(mav: &[f64], offsets: &[f64]) -> Result<Vec<u8>> {
    if mav.len() != offsets.len() {
        return Err(Error::shape(format!(
            "{} MAV values against {} comparator offsets",
            mav.len(),
            offsets.len()
        )));
    }
    Ok(mav.iter().zip(offsets).map(|(&m, &o)| u8::from(m + o > 0.0)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct F0Result {
    pub output: FixedPointVector,
    pub planes_processed: Vec<usize>,
    pub terminated_early: Vec<bool>,
    /// Row-level comparator decisions actually taken.
    pub comparator_ops: u64,
    /// Array-wide cycles: the busiest row sets the clock.
    pub cycle_count: u64,
    /// Planes that would be evaluated without early termination.
    pub planes_scheduled: usize,
}

/// How the thresholded frequency-domain vector is turned back into a word
/// before the second transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Requantization {
    /// Keep the first transform's word width and scale.
    Preserve,
    Explicit(Quantizer),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    /// Early-termination mode for the forward transform. The soft threshold
    /// that follows zeroes the same dead zone, so `SoundEt` never changes the
    /// layer output.
    pub mode: EtMode,
    pub requant: Requantization,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            mode: EtMode::SoundEt,
            requant: Requantization::Preserve,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub output: FixedPointVector,
    pub forward: F0Result,
    pub thresholded: Vec<f64>,
    pub backward: F0Result,
}

/// One frequency-domain layer: `F0(S_T(F0(x)))` on a square array.
pub fn chain_layer(
    array: &CrossbarArray,
    x: &FixedPointVector,
    t: &ThresholdParams,
    opts: &ChainOptions,
) -> Result<ChainTrace> {
    if array.rows() != array.cols() {
        return Err(Error::shape(format!(
            "chained layer needs a square array, got {}x{}",
            array.rows(),
            array.cols()
        )));
    }
    let forward = array.f0_transform_at(0, &to_bitplanes(x), opts.mode, t)?;
    let thresholded = soft_threshold(&forward.output.dequantize(), t)?;
    let requantized = match opts.requant {
        Requantization::Preserve => {
            let bits = forward.output.total_bits();
            let scale = forward.output.scale();
            let (lo, hi) = code_range(bits, Signedness::TwosComplement);
            let values = thresholded
                .iter()
                .map(|&v| ((v / scale).round() as i64).clamp(lo, hi))
                .collect();
            FixedPointVector::new(values, bits, Signedness::TwosComplement, scale)?
        }
        Requantization::Explicit(q) => q.quantize(&thresholded)?,
    };
    let backward = array.f0_transform_at(1, &to_bitplanes(&requantized), EtMode::Full, &ThresholdParams::zero())?;
    Ok(ChainTrace {
        output: backward.output.clone(),
        forward,
        thresholded,
        backward,
    })
}

/// Dead-zone gate: zero where `|v * scale| <= T`, unchanged elsewhere.
pub fn dead_zone_gate(v: &FixedPointVector, t: &ThresholdParams) -> Vec<i64> {
    v.values()
        .iter()
        .enumerate()
        .map(|(r, &x)| if x.abs() as f64 * v.scale() <= t.get(r) { 0 } else { x })
        .collect()
}
