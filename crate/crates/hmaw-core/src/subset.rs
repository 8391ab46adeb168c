//! Deterministic dataset subsetting.
//!
//! The generator is pinned here rather than taken from a library so the
//! same (size, n, seed) triple selects the same records on every platform
//! and toolchain, forever: a SplitMix64 stream drives a partial
//! Fisher-Yates selection and the chosen indices are returned in ascending
//! order.

use alloc::vec::Vec;

/// SplitMix64 as published by Vigna; state advances by the golden-ratio
/// increment and each output is a finalized mix of the new state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SubsetError {
    #[error("cannot sample {requested} items from {available}")]
    TooLarge { requested: usize, available: usize },
}

/// Choose `n` distinct indices out of `0..len`, in ascending order.
/// Selection: `n` steps of Fisher-Yates driven by `SplitMix64(seed)`,
/// picking `i + next_u64() % (len - i)` at step `i`. Sampling the whole
/// set therefore returns `0..len` unchanged.
pub fn subset_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>, SubsetError> {
    if n > len {
        return Err(SubsetError::TooLarge {
            requested: n,
            available: len,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut indices: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let remaining = (len - i) as u64;
        let j = i + (rng.next_u64() % remaining) as usize;
        indices.swap(i, j);
    }
    let mut selected = indices;
    selected.truncate(n);
    selected.sort_unstable();
    Ok(selected)
}
