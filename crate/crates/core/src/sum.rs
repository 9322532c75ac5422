//! Deterministic pairwise (tree) summation.
//!
//! Terms are grouped into fixed blocks that are summed left to right; block
//! sums are then combined as a balanced binary tree. The result depends only
//! on the order of the terms, never on how the caller batches them.

const BLOCK: usize = 32;
// Enough levels for 2^MAX_LEVELS blocks.
const MAX_LEVELS: usize = 48;

/// Streaming pairwise accumulator for `K` simultaneous sums.
#[derive(Clone, Debug)]
pub struct PairwiseSum<const K: usize> {
    block: [f64; K],
    in_block: usize,
    stack: [[f64; K]; MAX_LEVELS],
    levels: [u32; MAX_LEVELS],
    depth: usize,
}

impl<const K: usize> Default for PairwiseSum<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const K: usize> PairwiseSum<K> {
    pub fn new() -> Self {
        PairwiseSum {
            block: [0.0; K],
            in_block: 0,
            stack: [[0.0; K]; MAX_LEVELS],
            levels: [0; MAX_LEVELS],
            depth: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, terms: &[f64; K]) {
        for (acc, t) in self.block.iter_mut().zip(terms) {
            *acc += *t;
        }
        self.in_block += 1;
        if self.in_block == BLOCK {
            let full = core::mem::replace(&mut self.block, [0.0; K]);
            self.in_block = 0;
            self.push(full, 0);
        }
    }

    fn push(&mut self, mut sums: [f64; K], mut level: u32) {
        while self.depth > 0 && self.levels[self.depth - 1] == level {
            self.depth -= 1;
            let left = &self.stack[self.depth];
            for (s, l) in sums.iter_mut().zip(left) {
                *s += *l;
            }
            level += 1;
        }
        self.stack[self.depth] = sums;
        self.levels[self.depth] = level;
        self.depth += 1;
    }

    pub fn finish(self) -> [f64; K] {
        let mut total = self.block;
        for level in (0..self.depth).rev() {
            for (t, s) in total.iter_mut().zip(&self.stack[level]) {
                *t += *s;
            }
        }
        total
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    let mut acc = PairwiseSum::<1>::new();
    for &x in xs {
        acc.add(&[x]);
    }
    acc.finish()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn small_inputs() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.5]), 1.5);
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn beats_naive_on_long_constant_runs() {
        let n = 1 << 22;
        let xs: Vec<f64> = (0..n).map(|_| 0.1).collect();
        let naive: f64 = xs.iter().sum();
        let exact = 0.1 * n as f64;
        let tree = pairwise_sum(&xs);
        assert!((tree - exact).abs() < (naive - exact).abs());
        assert!((tree - exact).abs() / exact < 1e-14);
    }

    proptest! {
        #[test]
        fn matches_compensated_reference(xs in proptest::collection::vec(-1e3f64..1e3, 0..3000)) {
            // Neumaier summation as an independent high-accuracy reference.
            let mut s = 0.0f64;
            let mut comp = 0.0f64;
            for &x in &xs {
                let t = s + x;
                if s.abs() >= x.abs() { comp += (s - t) + x; } else { comp += (x - t) + s; }
                s = t;
            }
            let reference = s + comp;
            let abs_sum: f64 = xs.iter().map(|x| x.abs()).sum();
            prop_assert!((pairwise_sum(&xs) - reference).abs() <= 1e-14 * (abs_sum + 1.0));
        }

        #[test]
        fn multi_lane_equals_single_lane(xs in proptest::collection::vec(-1.0f64..1.0, 0..500)) {
            let mut two = PairwiseSum::<2>::new();
            for &x in &xs { two.add(&[x, 2.0 * x]); }
            let [a, b] = two.finish();
            prop_assert_eq!(a, pairwise_sum(&xs));
            prop_assert_eq!(b, 2.0 * a);
        }
    }
}
