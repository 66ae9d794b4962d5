//! Sparse lower-triangular storage, triangular solves and products.

mod factor;
mod pattern;
mod triplet;

use std::cell::Cell;

pub use factor::{CholeskyFactor, MIN_DIAGONAL};
pub use pattern::SparsityPattern;
pub use triplet::{read_triplets, write_triplets};

thread_local! {
    static TOUCHES: Cell<u64> = const { Cell::new(0) };
}

/// Adds `n` to this thread's count of factor entries touched.
pub(crate) fn count_touches(n: usize) {
    TOUCHES.with(|t| t.set(t.get() + n as u64));
}

/// Number of factor entries touched by solves and products on this thread
/// since the last [`reset_touch_count`].
pub fn touch_count() -> u64 {
    TOUCHES.with(Cell::get)
}

pub fn reset_touch_count() {
    TOUCHES.with(|t| t.set(0));
}
