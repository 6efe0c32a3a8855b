//! Integer partitions as shapes of exchangeable random partitions.
//!
//! A shape is stored either as a [`FrequencyVector`] (descending block sizes)
//! or as a [`PartitionClass`] (multiplicities `c_j` of blocks of size `j`).
//! Both describe one Young diagram and convert into each other exactly.
//! [`BlockMultiset`] is the mutable working form used by the samplers and
//! chains, where a step touches only the affected size bucket.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;

use crate::error::{Error, Result};
use crate::params::PdParams;

/// Exact non-negative integer for class sizes.
pub type BigCount = BigUint;

/// Exact weight of a down move.
pub type DownWeight = Ratio<u64>;

/// Block sizes in non-increasing order, all strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FrequencyVector {
    blocks: Vec<usize>,
}

impl FrequencyVector {
    /// Builds a frequency vector, rejecting zero entries and increasing runs.
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.contains(&0) {
            return Err(Error::Data(format!("block sizes must be positive: {blocks:?}")));
        }
        if blocks.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Data(format!(
                "block sizes must be non-increasing: {blocks:?}"
            )));
        }
        Ok(Self { blocks })
    }

    /// Sorts arbitrary positive block sizes into canonical order.
    pub fn from_unsorted(mut blocks: Vec<usize>) -> Result<Self> {
        blocks.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(blocks)
    }

    pub fn empty() -> Self {
        Self { blocks: Vec::new() }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Total number of boxes `n`.
    pub fn n(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Number of blocks `k`.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn to_class(&self) -> PartitionClass {
        freq_to_class(self)
    }

    pub fn into_blocks(self) -> Vec<usize> {
        self.blocks
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Multiplicity vector `(c_1, ..., c_m)`; `c_j` counts blocks of size `j`.
///
/// Canonical form has no trailing zeros, so the empty partition is `[]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PartitionClass {
    mult: Vec<usize>,
}

impl PartitionClass {
    /// Builds a class from multiplicities, trimming trailing zeros.
    pub fn new(mut mult: Vec<usize>) -> Self {
        while mult.last() == Some(&0) {
            mult.pop();
        }
        Self { mult }
    }

    /// Multiplicities indexed from block size 1.
    pub fn mult(&self) -> &[usize] {
        &self.mult
    }

    /// `c_j` for block size `j >= 1`.
    pub fn count(&self, size: usize) -> usize {
        if size == 0 {
            return 0;
        }
        self.mult.get(size - 1).copied().unwrap_or(0)
    }

    /// Iterates `(size, count)` over sizes with a positive count.
    pub fn sizes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mult
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i + 1, c))
    }

    pub fn n(&self) -> usize {
        self.sizes().map(|(j, c)| j * c).sum()
    }

    pub fn k(&self) -> usize {
        self.mult.iter().sum()
    }

    pub fn to_freq(&self) -> FrequencyVector {
        class_to_freq(self)
    }
}

pub fn freq_to_class(f: &FrequencyVector) -> PartitionClass {
    let largest = f.blocks.first().copied().unwrap_or(0);
    let mut mult = vec![0; largest];
    for &b in &f.blocks {
        mult[b - 1] += 1;
    }
    PartitionClass::new(mult)
}

pub fn class_to_freq(c: &PartitionClass) -> FrequencyVector {
    let mut blocks = Vec::with_capacity(c.k());
    for (j, count) in c.sizes().collect::<Vec<_>>().into_iter().rev() {
        blocks.extend(std::iter::repeat_n(j, count));
    }
    FrequencyVector { blocks }
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of set partitions of `{1..n}` whose block sizes form `c`:
/// `n! / prod_j (c_j! (j!)^{c_j})`.
pub fn multiplicity(c: &PartitionClass) -> BigCount {
    let mut denom = BigUint::one();
    for (j, count) in c.sizes() {
        denom *= factorial(count);
        denom *= factorial(j).pow(count as u32);
    }
    factorial(c.n()) / denom
}

/// All integer partitions of `n`, in reverse-lexicographic order of their
/// frequency vectors (`[n]` first, all singletons last).
pub fn enumerate_classes(n: usize) -> Vec<PartitionClass> {
    enumerate_shapes(n).iter().map(freq_to_class).collect()
}

/// Frequency-vector form of [`enumerate_classes`].
pub fn enumerate_shapes(n: usize) -> Vec<FrequencyVector> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill_partitions(n, n, &mut current, &mut out);
    out
}

fn fill_partitions(
    remaining: usize,
    max_part: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<FrequencyVector>,
) {
    if remaining == 0 {
        out.push(FrequencyVector {
            blocks: current.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        fill_partitions(remaining - part, part, current, out);
        current.pop();
    }
}

/// Shapes reachable by deleting one box chosen uniformly among the `n`
/// boxes, aggregated by resulting shape. Weights are exact and sum to one.
pub fn down_neighbors(f: &FrequencyVector) -> Vec<(FrequencyVector, DownWeight)> {
    let n = f.n();
    if n == 0 {
        return Vec::new();
    }
    let ms = BlockMultiset::from(f);
    let mut out: Vec<_> = ms
        .counts
        .iter()
        .map(|(&size, &count)| {
            let mut next = ms.clone();
            next.shrink_block(size);
            (next.to_freq(), Ratio::new((size * count) as u64, n as u64))
        })
        .collect();
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

/// Shapes reachable by one Chinese-restaurant seating, aggregated by shape.
///
/// Growing any block of size `j` has total weight `c_j (j - alpha) / (n + theta)`;
/// opening a new block has weight `(theta + alpha k) / (n + theta)`. From the
/// empty shape the only move is to `[1]`. Zero-weight moves are omitted.
pub fn up_neighbors(f: &FrequencyVector, p: &PdParams) -> Vec<(FrequencyVector, f64)> {
    let ms = BlockMultiset::from(f);
    let mut out: Vec<_> = ms
        .seating_weights(p)
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(target, w)| {
            let mut next = ms.clone();
            match target {
                Seat::Existing(size) => next.grow_block(size),
                Seat::New => next.add_block(),
            }
            (next.to_freq(), w)
        })
        .collect();
    out.sort_by(|a, b| b.0.cmp(&a.0));
    out
}

/// Where a seated customer goes, grouped by block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seat {
    Existing(usize),
    New,
}

/// Block sizes kept as `size -> count`, with cached totals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockMultiset {
    counts: BTreeMap<usize, usize>,
    n: usize,
    k: usize,
}

impl BlockMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(size, count)` pairs, ascending by size.
    pub fn counts(&self) -> impl DoubleEndedIterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&s, &c)| (s, c))
    }

    pub fn to_freq(&self) -> FrequencyVector {
        let mut blocks = Vec::with_capacity(self.k);
        for (&size, &count) in self.counts.iter().rev() {
            blocks.extend(std::iter::repeat_n(size, count));
        }
        FrequencyVector { blocks }
    }

    /// The `top` largest block sizes, descending; fewer if `k < top`.
    pub fn largest(&self, top: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(top);
        for (&size, &count) in self.counts.iter().rev() {
            let take = count.min(top - out.len());
            out.extend(std::iter::repeat_n(size, take));
            if out.len() == top {
                break;
            }
        }
        out
    }

    fn dec(&mut self, size: usize) {
        let c = self.counts.get_mut(&size).expect("size present");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(&size);
        }
    }

    fn inc(&mut self, size: usize) {
        *self.counts.entry(size).or_insert(0) += 1;
    }

    /// Removes one box from a block of the given size.
    pub fn shrink_block(&mut self, size: usize) {
        self.dec(size);
        if size > 1 {
            self.inc(size - 1);
        } else {
            self.k -= 1;
        }
        self.n -= 1;
    }

    /// Adds one box to a block of the given size.
    pub fn grow_block(&mut self, size: usize) {
        self.dec(size);
        self.inc(size + 1);
        self.n += 1;
    }

    /// Opens a new singleton block.
    pub fn add_block(&mut self) {
        self.inc(1);
        self.n += 1;
        self.k += 1;
    }

    /// Seating probabilities for the next customer, grouped by block size.
    pub fn seating_weights(&self, p: &PdParams) -> Vec<(Seat, f64)> {
        if self.n == 0 {
            return vec![(Seat::New, 1.0)];
        }
        let (alpha, theta) = (p.alpha(), p.theta());
        let denom = self.n as f64 + theta;
        let mut out: Vec<_> = self
            .counts
            .iter()
            .map(|(&size, &count)| (Seat::Existing(size), count as f64 * (size as f64 - alpha) / denom))
            .collect();
        let new_weight = ((theta + alpha * self.k as f64) / denom).max(0.0);
        out.push((Seat::New, new_weight));
        out
    }

    /// Convenience: apply a seating decision.
    pub fn seat(&mut self, seat: Seat) {
        match seat {
            Seat::Existing(size) => self.grow_block(size),
            Seat::New => self.add_block(),
        }
    }
}

impl From<&FrequencyVector> for BlockMultiset {
    fn from(f: &FrequencyVector) -> Self {
        let mut ms = BlockMultiset::new();
        for &b in f.blocks() {
            ms.inc(b);
        }
        ms.n = f.n();
        ms.k = f.k();
        ms
    }
}
