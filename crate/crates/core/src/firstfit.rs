//! First-fit placement under the kBP rule.
//!
//! A max-residual segment tree answers "lowest bin at or after `from` with
//! residual at least `s`". When that bin already holds a copy of the item the
//! search resumes right after it, so the bin chosen is always the lowest
//! index that is both roomy enough and free of the item.
//!
//! Residuals only shrink and an item never leaves a bin, so a bin that cannot
//! take an item now never can. Each item keeps a cursor past the bins ruled
//! out for it, which keeps repeated copies of small items from rescanning.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::ItemCopy;

#[derive(Debug, Clone)]
struct MaxTree {
    leaves: usize,
    len: usize,
    node: Vec<u64>,
}

impl MaxTree {
    fn new() -> Self {
        Self { leaves: 1, len: 0, node: vec![0; 2] }
    }

    fn grow(&mut self) {
        let leaves = self.leaves * 2;
        let mut node = vec![0u64; 2 * leaves];
        node[leaves..leaves + self.leaves].copy_from_slice(&self.node[self.leaves..]);
        for i in (1..leaves).rev() {
            node[i] = node[2 * i].max(node[2 * i + 1]);
        }
        self.leaves = leaves;
        self.node = node;
    }

    fn push(&mut self, value: u64) {
        if self.len == self.leaves {
            self.grow();
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    fn set(&mut self, idx: usize, value: u64) {
        let mut i = idx + self.leaves;
        self.node[i] = value;
        while i > 1 {
            i /= 2;
            self.node[i] = self.node[2 * i].max(self.node[2 * i + 1]);
        }
    }

    /// Lowest index `>= from` holding a value `>= need`.
    fn first_at_least(&self, from: usize, need: u64) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let hit = self.descend(1, 0, self.leaves, from, need)?;
        (hit < self.len).then_some(hit)
    }

    fn descend(&self, node: usize, lo: usize, hi: usize, from: usize, need: u64) -> Option<usize> {
        if hi <= from || self.node[node] < need {
            return None;
        }
        if hi - lo == 1 {
            return Some(lo);
        }
        let mid = (lo + hi) / 2;
        self.descend(2 * node, lo, mid, from, need)
            .or_else(|| self.descend(2 * node + 1, mid, hi, from, need))
    }
}

/// Incremental first-fit packer over item sizes indexed by id.
#[derive(Debug, Clone)]
pub struct FirstFit<'a> {
    sizes: &'a [u64],
    capacity: u64,
    residual: MaxTree,
    loads: Vec<u64>,
    bins: Vec<Vec<ItemCopy>>,
    holders: Vec<Vec<u32>>,
    cursor: Vec<usize>,
}

impl<'a> FirstFit<'a> {
    pub fn new(sizes: &'a [u64], capacity: u64) -> Self {
        Self {
            sizes,
            capacity,
            residual: MaxTree::new(),
            loads: Vec::new(),
            bins: Vec::new(),
            holders: vec![Vec::new(); sizes.len()],
            cursor: vec![0; sizes.len()],
        }
    }

    /// Starts from existing bins; later copies may join them.
    pub fn with_bins(sizes: &'a [u64], capacity: u64, bins: Vec<Vec<ItemCopy>>) -> Self {
        let mut ff = Self::new(sizes, capacity);
        for contents in bins {
            let b = ff.open();
            for c in contents {
                ff.put(b, c);
            }
        }
        ff
    }

    fn open(&mut self) -> usize {
        self.bins.push(Vec::new());
        self.loads.push(0);
        self.residual.push(self.capacity);
        self.bins.len() - 1
    }

    fn put(&mut self, b: usize, c: ItemCopy) {
        let s = self.sizes[c.item];
        self.loads[b] += s;
        self.residual.set(b, self.capacity.saturating_sub(self.loads[b]));
        self.bins[b].push(c);
        let h = &mut self.holders[c.item];
        let at = h.partition_point(|&x| (x as usize) < b);
        h.insert(at, b as u32);
    }

    pub fn holds(&self, bin: usize, item: usize) -> bool {
        self.holders[item].binary_search(&(bin as u32)).is_ok()
    }

    /// Places `c` into the first admissible bin, opening one if needed.
    pub fn place(&mut self, c: ItemCopy) -> usize {
        let s = self.sizes[c.item];
        let mut from = self.cursor[c.item];
        let b = loop {
            match self.residual.first_at_least(from, s) {
                Some(b) if self.holds(b, c.item) => from = b + 1,
                Some(b) => break b,
                None => break self.open(),
            }
        };
        self.put(b, c);
        self.cursor[c.item] = b + 1;
        b
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn loads(&self) -> &[u64] {
        &self.loads
    }

    pub fn into_bins(self) -> Vec<Vec<ItemCopy>> {
        self.bins
    }
}
