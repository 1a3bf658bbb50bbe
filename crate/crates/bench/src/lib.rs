//! Shared fixtures for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgeo_core::Point;

/// `n` points, each well inside the future cone of the previous one.
pub fn timelike_points(seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.2..0.2));
            Point::from([k as f64 * 1.5, x[0], x[1], x[2]])
        })
        .collect()
}
