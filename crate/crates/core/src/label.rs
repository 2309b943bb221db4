//! Exact label arithmetic for the classifier algorithm.
//!
//! With `L = ceil(log2 f)` and `F2 = 2^L`, labels are stored multiplied by
//! `2^(L+1)` so that `n - F2/2` and every `F2 / 2^(r+1)` offset are integers.

use std::collections::BTreeSet;

/// A label in scaled form.
pub type Label = i64;

pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelScale {
    pub n: usize,
    pub f: usize,
    pub levels: u32,
}

impl LabelScale {
    pub fn new(n: usize, f: usize) -> Self {
        LabelScale {
            n,
            f,
            levels: ceil_log2(f),
        }
    }

    /// `F2 = 2^L`, the padded fault bound.
    pub fn padded_f(&self) -> i64 {
        1 << self.levels
    }

    pub fn unit(&self) -> i64 {
        1 << (self.levels + 1)
    }

    pub fn scale_count(&self, count: usize) -> Label {
        count as i64 * self.unit()
    }

    /// `k0 = n - F2/2`.
    pub fn initial(&self) -> Label {
        self.n as i64 * self.unit() - (1 << (2 * self.levels))
    }

    /// `F2 / 2^(r+1)`, the label move at iteration `r` (1-based).
    pub fn step(&self, r: usize) -> i64 {
        assert!(r >= 1 && r as u32 <= self.levels, "iteration {r} out of range");
        1 << (2 * self.levels - r as u32)
    }

    /// `F2 / 2^r`, the half-width of the size window for groups at round `r`.
    pub fn window(&self, r: usize) -> i64 {
        assert!(r >= 1 && r as u32 <= self.levels + 1, "round {r} out of range");
        1 << (2 * self.levels + 1 - r as u32)
    }

    pub fn master(&self, k: Label, r: usize) -> Label {
        k + self.step(r)
    }

    pub fn slave(&self, k: Label, r: usize) -> Label {
        k - self.step(r)
    }

    /// Labels a group can carry at the start of round `r`.
    pub fn grid(&self, r: usize) -> BTreeSet<Label> {
        let mut labels = BTreeSet::from([self.initial()]);
        for s in 1..r {
            labels = labels
                .iter()
                .flat_map(|&k| [self.slave(k, s), self.master(k, s)])
                .collect();
        }
        labels
    }

    /// `count > k` with `count` an unscaled set size.
    pub fn exceeds(&self, count: usize, k: Label) -> bool {
        self.scale_count(count) > k
    }

    pub fn as_f64(&self, k: Label) -> f64 {
        k as f64 / self.unit() as f64
    }
}
