//! Seeded synthetic maps for tests, demos and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster_io::{BitDepth, RasterGrid};

/// Fraction of cells made impassable by [`random_weights`].
pub const IMPASSABLE_FRACTION: f64 = 0.2;
/// Ridge elevation levels.
pub const RIDGE_BASE: u16 = 10;
pub const RIDGE_PEAK: u16 = 200;

fn raster(w: usize, h: usize, values: Vec<u16>) -> RasterGrid {
    RasterGrid::new(w, h, BitDepth::Eight, values).expect("generated values fit 8 bits")
}

/// Every sample is 1.
pub fn uniform(size: usize) -> RasterGrid {
    raster(size, size, vec![1; size * size])
}

/// Integer weights 1..=9, with about 20% of samples 0 (impassable).
pub fn random_weights(size: usize, seed: u64) -> RasterGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..size * size)
        .map(|_| {
            if rng.gen_bool(IMPASSABLE_FRACTION) {
                0
            } else {
                rng.gen_range(1..=9)
            }
        })
        .collect();
    raster(size, size, values)
}

/// Elevation with a triangular ridge across the middle rows.
///
/// Rows within `size / 4` of the center rise linearly from the base level to
/// the peak; all other rows sit at the base level.
pub fn ridge(size: usize) -> RasterGrid {
    let mid = (size as f64 - 1.0) / 2.0;
    let half = (size as f64 / 4.0).max(1.0);
    let mut values = Vec::with_capacity(size * size);
    for y in 0..size {
        let d = (y as f64 - mid).abs();
        let v = if d < half {
            RIDGE_BASE as f64 + (RIDGE_PEAK - RIDGE_BASE) as f64 * (1.0 - d / half)
        } else {
            RIDGE_BASE as f64
        };
        values.extend(std::iter::repeat_n(v.round() as u16, size));
    }
    raster(size, size, values)
}

fn box_blur(v: &[f64], size: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for y in 0..size {
        for x in 0..size {
            let (mut sum, mut n) = (0.0, 0.0);
            for yy in y.saturating_sub(1)..=(y + 1).min(size - 1) {
                for xx in x.saturating_sub(1)..=(x + 1).min(size - 1) {
                    sum += v[yy * size + xx];
                    n += 1.0;
                }
            }
            out[y * size + x] = sum / n;
        }
    }
    out
}

/// Uniform noise box-blurred twice with a 3x3 window, stretched to 1..=9.
pub fn smoothed_noise(size: usize, seed: u64) -> RasterGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..size * size).map(|_| rng.gen::<f64>()).collect();
    let smooth = box_blur(&box_blur(&noise, size), size);
    let lo = smooth.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = smooth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let values = smooth
        .iter()
        .map(|&s| 1 + ((s - lo) / span * 8.0).round() as u16)
        .collect();
    raster(size, size, values)
}
