//! MAV code statistics and order-preserving search trees over ADC codes.

use crate::error::{Error, Result};

/// Largest converter width the tree builder accepts.
pub const MAX_TREE_BITS: u32 = 8;

/// Probability of each output code.
#[derive(Debug, Clone, PartialEq)]
pub struct MavPmf {
    probs: Vec<f64>,
}

impl MavPmf {
    /// Validates non-negativity and normalization (within `1e-12`). The code
    /// count must be a power of two between 2 and `2^MAX_TREE_BITS`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let n = probs.len();
        if n < 2 || !n.is_power_of_two() || n > 1 << MAX_TREE_BITS {
            return Err(Error::shape(format!(
                "pmf over {n} codes; expected a power of two in 2..={}",
                1 << MAX_TREE_BITS
            )));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::param(format!("probability of code {i} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("pmf sums to {sum}, not 1")));
        }
        Ok(MavPmf { probs })
    }

    pub fn uniform(bits: u32) -> Result<Self> {
        let n = 1usize << bits;
        Self::new(vec![1.0 / n as f64; n])
    }

    /// All mass on one code.
    pub fn point_mass(bits: u32, code: usize) -> Result<Self> {
        let n = 1usize << bits;
        if code >= n {
            return Err(Error::param(format!("code {code} outside {bits}-bit range")));
        }
        let mut probs = vec![0.0; n];
        probs[code] = 1.0;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_codes(&self) -> usize {
        self.probs.len()
    }

    pub fn bits(&self) -> u32 {
        self.probs.len().trailing_zeros()
    }

    /// Most likely code (lowest index on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// How one column's input bit and stored weight combine into charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MavAlgebra {
    /// Input bit uniform on {0,1} ANDed with a weight-match event that is
    /// uniform on {0,1}: each column contributes Bernoulli(1/4). MAV spans
    /// `[0, 1]`.
    #[default]
    UnipolarAnd,
    /// Input bit uniform on {0,1} times a weight uniform on {-1,+1}: each
    /// column contributes -1, 0, +1 with probabilities 1/4, 1/2, 1/4. MAV
    /// spans `[-1, 1]`.
    BipolarProduct,
}

/// Exact code distribution of the MAV of `n_cols` independent columns.
pub fn mav_pmf(n_cols: usize, bits: u32) -> Result<MavPmf> {
    mav_pmf_with(n_cols, bits, MavAlgebra::default())
}

pub fn mav_pmf_with(n_cols: usize, bits: u32, algebra: MavAlgebra) -> Result<MavPmf> {
    if n_cols == 0 {
        return Err(Error::param("MAV needs at least one column"));
    }
    if bits == 0 || bits > MAX_TREE_BITS {
        return Err(Error::param(format!("pmf width {bits} outside 1..={MAX_TREE_BITS}")));
    }
    let n_codes = 1usize << bits;
    // Per-column pmf over the shifted term value, then n-fold convolution.
    let term: &[f64] = match algebra {
        MavAlgebra::UnipolarAnd => &[0.75, 0.25],
        MavAlgebra::BipolarProduct => &[0.25, 0.5, 0.25],
    };
    let mut dist = vec![1.0];
    for _ in 0..n_cols {
        let mut next = vec![0.0; dist.len() + term.len() - 1];
        for (i, &a) in dist.iter().enumerate() {
            for (j, &b) in term.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        dist = next;
    }
    // Shifted sum index i in 0..=span maps to MAV fraction i / span of the
    // full range.
    let span = n_cols * (term.len() - 1);
    let mut probs = vec![0.0; n_codes];
    for (i, &p) in dist.iter().enumerate() {
        let code = ((i * n_codes) / span).min(n_codes - 1);
        probs[code] += p;
    }
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    MavPmf::new(probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(u32),
    /// Codes below `threshold` descend left, the rest right.
    Split {
        threshold: u32,
        left: usize,
        right: usize,
    },
}

/// Alphabetic binary search tree over codes `0..n`. Each split is a single
/// comparison of the input against the DAC reference for its threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
    root: usize,
    n_codes: usize,
}

impl SearchTree {
    /// Complete tree: the plain SAR search.
    pub fn balanced(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_TREE_BITS {
            return Err(Error::param(format!("tree width {bits} outside 1..={MAX_TREE_BITS}")));
        }
        let n = 1usize << bits;
        let mut nodes = Vec::new();
        let root = build(&mut nodes, 0, n - 1, &|lo, hi| lo + (hi - lo).div_ceil(2));
        Ok(SearchTree {
            nodes,
            root,
            n_codes: n,
        })
    }

    pub fn n_codes(&self) -> usize {
        self.n_codes
    }

    pub fn bits(&self) -> u32 {
        self.n_codes.trailing_zeros()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, i: usize) -> TreeNode {
        self.nodes[i]
    }

    /// Number of comparisons needed to resolve each code.
    pub fn depths(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_codes];
        let mut stack = vec![(self.root, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match self.nodes[i] {
                TreeNode::Leaf(c) => out[c as usize] = d,
                TreeNode::Split { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        out
    }

    pub fn max_depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Walks from the root; `goes_right(threshold)` answers "is the code at
    /// least `threshold`?". Returns the leaf code and the thresholds tested.
    pub fn descend(&self, mut goes_right: impl FnMut(u32) -> bool) -> (u32, Vec<u32>) {
        let mut path = Vec::new();
        let mut i = self.root;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf(c) => return (c, path),
                TreeNode::Split { threshold, left, right } => {
                    path.push(threshold);
                    i = if goes_right(threshold) { right } else { left };
                }
            }
        }
    }

    /// Leaves as numbers, splits as `(left right)`.
    pub fn to_parenthesized(&self) -> String {
        let mut s = String::new();
        self.write_node(self.root, &mut s);
        s
    }

    fn write_node(&self, i: usize, s: &mut String) {
        match self.nodes[i] {
            TreeNode::Leaf(c) => s.push_str(&c.to_string()),
            TreeNode::Split { left, right, .. } => {
                s.push('(');
                self.write_node(left, s);
                s.push(' ');
                self.write_node(right, s);
                s.push(')');
            }
        }
    }
}

fn build(nodes: &mut Vec<TreeNode>, lo: usize, hi: usize, split: &dyn Fn(usize, usize) -> usize) -> usize {
    if lo == hi {
        nodes.push(TreeNode::Leaf(lo as u32));
        return nodes.len() - 1;
    }
    let t = split(lo, hi);
    let left = build(nodes, lo, t - 1, split);
    let right = build(nodes, t, hi, split);
    nodes.push(TreeNode::Split {
        threshold: t as u32,
        left,
        right,
    });
    nodes.len() - 1
}

/// Optimal alphabetic tree for `pmf`, by interval dynamic programming.
///
/// `cost[i][j] = W(i, j) + min_t (cost[i][t-1] + cost[t][j])`, with leaves
/// costing nothing. Ties pick the smallest threshold.
pub fn build_asymmetric_tree(pmf: &MavPmf) -> SearchTree {
    let (_, roots) = alphabetic_dp(pmf.probs());
    let n = pmf.n_codes();
    let mut nodes = Vec::with_capacity(2 * n - 1);
    let root = build(&mut nodes, 0, n - 1, &|lo, hi| roots[lo][hi]);
    SearchTree {
        nodes,
        root,
        n_codes: n,
    }
}

/// Minimum expected comparisons over all alphabetic trees for `pmf`.
pub fn optimal_expected_comparisons(pmf: &MavPmf) -> f64 {
    let (cost, _) = alphabetic_dp(pmf.probs());
    cost[0][pmf.n_codes() - 1]
}

fn alphabetic_dp(p: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let n = p.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, &x) in p.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    let mut cost = vec![vec![0.0; n]; n];
    let mut root = vec![vec![0usize; n]; n];
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len - 1;
            let mut best = f64::INFINITY;
            let mut arg = i + 1;
            for t in i + 1..=j {
                let c = cost[i][t - 1] + cost[t][j];
                if c < best {
                    best = c;
                    arg = t;
                }
            }
            cost[i][j] = best + (prefix[j + 1] - prefix[i]);
            root[i][j] = arg;
        }
    }
    (cost, root)
}

/// `sum_code pmf(code) * depth(code)`.
pub fn expected_comparisons(tree: &SearchTree, pmf: &MavPmf) -> Result<f64> {
    if tree.n_codes() != pmf.n_codes() {
        return Err(Error::shape(format!(
            "tree over {} codes, pmf over {}",
            tree.n_codes(),
            pmf.n_codes()
        )));
    }
    Ok(tree
        .depths()
        .into_iter()
        .zip(pmf.probs())
        .map(|(d, &p)| d as f64 * p)
        .sum())
}
