use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Generator used by every fit. ChaCha20 output is specified bit-for-bit, so
/// a seed reproduces the same stream on every platform.
pub type FitRng = ChaCha20Rng;

pub fn fit_rng(seed: u64) -> FitRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `d` independent standard normal variates (ziggurat transform).
pub fn draw_standard_normal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut s = vec![0.0; d];
    fill_standard_normal(rng, &mut s);
    s
}

pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out {
        *v = rng.sample(StandardNormal);
    }
}
