//! Hadamard/Walsh matrices, the fast Walsh-Hadamard transform, and the
//! blockwise transform used for lengths that are not a power of two.
//!
//! Forward transforms are unnormalized sums of `±1`-weighted inputs, so an
//! integer input stays integer. The inverse carries the `1/N` factor.

use std::ops::{Add, Div, Sub};

use num_traits::{FromPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest supported `log2` of a matrix order.
pub const MAX_ORDER_LOG2: u32 = 16;

/// Smallest block the blockwise planner emits unless the whole input is a
/// power of two.
pub const DEFAULT_MIN_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RowOrder {
    /// Sylvester (Hadamard) order, straight out of the doubling recursion.
    Natural,
    /// Walsh order: row `i` has exactly `i` sign changes.
    #[default]
    Sequency,
}

/// A `2^k x 2^k` matrix with entries in `{-1, +1}`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshMatrix {
    order_log2: u32,
    ordering: RowOrder,
    entries: Vec<i8>,
}

impl WalshMatrix {
    pub fn order_log2(&self) -> u32 {
        self.order_log2
    }

    /// Number of rows (and columns).
    pub fn size(&self) -> usize {
        1 << self.order_log2
    }

    pub fn ordering(&self) -> RowOrder {
        self.ordering
    }

    pub fn row(&self, i: usize) -> &[i8] {
        let n = self.size();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[i8]> {
        self.entries.chunks_exact(self.size())
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.size() + col]
    }

    /// Row-major view of all entries.
    pub fn entries(&self) -> &[i8] {
        &self.entries
    }
}

/// Number of sign flips between adjacent entries of a `±1` row.
pub fn sign_changes(row: &[i8]) -> usize {
    row.windows(2).filter(|w| w[0] != w[1]).count()
}

fn check_order(k: u32) -> Result<()> {
    if k > MAX_ORDER_LOG2 {
        return Err(Error::Capacity {
            what: "Walsh matrix order (log2)",
            limit: MAX_ORDER_LOG2 as usize,
            requested: k as usize,
        });
    }
    Ok(())
}

/// Builds `H_k` by repeated doubling, `H_k = [[H, H], [H, -H]]`, `H_0 = [1]`.
pub fn hadamard(k: u32) -> Result<WalshMatrix> {
    check_order(k)?;
    let mut entries = vec![1i8];
    let mut size = 1usize;
    for _ in 0..k {
        let next = size * 2;
        let mut grown = vec![0i8; next * next];
        for r in 0..next {
            for c in 0..next {
                let base = entries[(r % size) * size + (c % size)];
                grown[r * next + c] = if r >= size && c >= size { -base } else { base };
            }
        }
        entries = grown;
        size = next;
    }
    Ok(WalshMatrix {
        order_log2: k,
        ordering: RowOrder::Natural,
        entries,
    })
}

/// Rows of `hadamard(k)` stably sorted by ascending sign-change count.
pub fn walsh(k: u32) -> Result<WalshMatrix> {
    let h = hadamard(k)?;
    let n = h.size();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| sign_changes(h.row(i)));
    let mut entries = Vec::with_capacity(n * n);
    for i in order {
        entries.extend_from_slice(h.row(i));
    }
    Ok(WalshMatrix {
        order_log2: k,
        ordering: RowOrder::Sequency,
        entries,
    })
}

/// Matrix of the requested ordering.
pub fn transform_matrix(k: u32, ordering: RowOrder) -> Result<WalshMatrix> {
    match ordering {
        RowOrder::Natural => hadamard(k),
        RowOrder::Sequency => walsh(k),
    }
}

/// Natural-order row index holding the Walsh function with `sequency` sign
/// changes: bit-reversal of the Gray code.
pub fn sequency_to_natural(order_log2: u32, sequency: usize) -> usize {
    if order_log2 == 0 {
        return 0;
    }
    let gray = sequency ^ (sequency >> 1);
    gray.reverse_bits() >> (usize::BITS - order_log2)
}

/// Values a transform can run over: anything closed under `+` and `-`.
pub trait TransformScalar: Clone + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T> TransformScalar for T where T: Clone + Zero + Add<Output = T> + Sub<Output = T> {}

fn log2_exact(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::shape(format!("transform length {len} is not a power of two")));
    }
    let k = len.trailing_zeros();
    check_order(k)?;
    Ok(k)
}

fn butterfly<T: TransformScalar>(data: &mut [T]) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        for start in (0..n).step_by(half * 2) {
            for j in start..start + half {
                let a = data[j].clone();
                let b = data[j + half].clone();
                data[j] = a.clone() + b.clone();
                data[j + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Fast Walsh-Hadamard transform: `O(N log N)` additions, no multiplies.
///
/// Equals the product of `transform_matrix(log2 N, ordering)` with `x`.
pub fn fwht<T: TransformScalar>(x: &[T], ordering: RowOrder) -> Result<Vec<T>> {
    let k = log2_exact(x.len())?;
    let mut data = x.to_vec();
    butterfly(&mut data);
    Ok(match ordering {
        RowOrder::Natural => data,
        RowOrder::Sequency => (0..data.len())
            .map(|s| data[sequency_to_natural(k, s)].clone())
            .collect(),
    })
}

/// Block decomposition of an arbitrary-length transform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BwhtPlan {
    input_len: usize,
    block_sizes: Vec<usize>,
    pads: Vec<usize>,
    min_block: usize,
}

/// One block of a plan, in input coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanBlock {
    /// Offset of the block's first element in the unpadded input.
    pub input_offset: usize,
    /// Offset in the padded (coefficient) layout.
    pub padded_offset: usize,
    pub size: usize,
    pub pad: usize,
}

impl BwhtPlan {
    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn pads(&self) -> &[usize] {
        &self.pads
    }

    pub fn min_block(&self) -> usize {
        self.min_block
    }

    pub fn total_padding(&self) -> usize {
        self.pads.iter().sum()
    }

    /// Length of the coefficient vector (`input_len + total_padding`).
    pub fn padded_len(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn blocks(&self) -> impl Iterator<Item = PlanBlock> + '_ {
        let mut input_offset = 0;
        let mut padded_offset = 0;
        self.block_sizes.iter().zip(&self.pads).map(move |(&size, &pad)| {
            let block = PlanBlock {
                input_offset,
                padded_offset,
                size,
                pad,
            };
            input_offset += size - pad;
            padded_offset += size;
            block
        })
    }
}

/// Plans `m` with the default minimum block size.
pub fn bwht_plan(m: usize) -> Result<BwhtPlan> {
    bwht_plan_with_min_block(m, DEFAULT_MIN_BLOCK)
}

/// Greedy binary decomposition of `m` into power-of-two blocks.
///
/// A power-of-two `m` is a single unpadded block. Otherwise each set bit of
/// `m` at or above `min_block` becomes a block, and the low-order remainder
/// (if any) is zero-padded into one final `min_block`-sized block.
pub fn bwht_plan_with_min_block(m: usize, min_block: usize) -> Result<BwhtPlan> {
    if m == 0 {
        return Err(Error::param("blockwise transform length must be at least 1"));
    }
    if min_block == 0 || !min_block.is_power_of_two() {
        return Err(Error::param(format!(
            "minimum block size {min_block} is not a power of two"
        )));
    }
    let (block_sizes, pads) = if m.is_power_of_two() {
        (vec![m], vec![0])
    } else {
        let mut sizes = Vec::new();
        let mut pads = Vec::new();
        for bit in (0..usize::BITS).rev() {
            let size = 1usize << bit;
            if size >= min_block && m & size != 0 {
                sizes.push(size);
                pads.push(0);
            }
        }
        let rem = m & (min_block - 1);
        if rem > 0 {
            sizes.push(min_block);
            pads.push(min_block - rem);
        }
        (sizes, pads)
    };
    if let Some(&largest) = block_sizes.first() {
        check_order(largest.trailing_zeros())?;
    }
    Ok(BwhtPlan {
        input_len: m,
        block_sizes,
        pads,
        min_block,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Forward blockwise transform: `input_len` samples in, `padded_len`
/// sequency-ordered coefficients out.
pub fn bwht_forward<T: TransformScalar>(plan: &BwhtPlan, x: &[T]) -> Result<Vec<T>> {
    if x.len() != plan.input_len {
        return Err(Error::shape(format!(
            "forward blockwise transform expects {} samples, got {}",
            plan.input_len,
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(plan.padded_len());
    for block in plan.blocks() {
        let mut buf: Vec<T> = x[block.input_offset..block.input_offset + block.size - block.pad].to_vec();
        buf.resize(block.size, T::zero());
        out.extend(fwht(&buf, RowOrder::Sequency)?);
    }
    Ok(out)
}

/// Inverse blockwise transform: `padded_len` coefficients in, `input_len`
/// samples out with padding stripped.
pub fn bwht_inverse<T>(plan: &BwhtPlan, coeffs: &[T]) -> Result<Vec<T>>
where
    T: TransformScalar + Div<Output = T> + FromPrimitive,
{
    if coeffs.len() != plan.padded_len() {
        return Err(Error::shape(format!(
            "inverse blockwise transform expects {} coefficients, got {}",
            plan.padded_len(),
            coeffs.len()
        )));
    }
    let mut out = Vec::with_capacity(plan.input_len);
    for block in plan.blocks() {
        let seg = &coeffs[block.padded_offset..block.padded_offset + block.size];
        let scale =
            T::from_usize(block.size).ok_or_else(|| Error::param("block size not representable in scalar type"))?;
        let back = fwht(seg, RowOrder::Sequency)?;
        out.extend(back.into_iter().take(block.size - block.pad).map(|v| v / scale.clone()));
    }
    Ok(out)
}

pub fn bwht_apply<T>(plan: &BwhtPlan, x: &[T], direction: Direction) -> Result<Vec<T>>
where
    T: TransformScalar + Div<Output = T> + FromPrimitive,
{
    match direction {
        Direction::Forward => bwht_forward(plan, x),
        Direction::Inverse => bwht_inverse(plan, x),
    }
}
