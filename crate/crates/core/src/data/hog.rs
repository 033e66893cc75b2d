//! Histogram-of-oriented-gradients features for square gray-scale images.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Sample, MNIST_SIDE};
use crate::error::{Error, Result};

/// Cell grid and orientation binning. The default (6×6 cells, 9 unsigned
/// bins) yields 324 features for a 28×28 image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HogConfig {
    pub image_side: usize,
    pub cells_per_side: usize,
    pub bins: usize,
}

impl Default for HogConfig {
    fn default() -> Self {
        Self {
            image_side: MNIST_SIDE,
            cells_per_side: 6,
            bins: 9,
        }
    }
}

impl HogConfig {
    pub fn output_len(&self) -> usize {
        self.cells_per_side * self.cells_per_side * self.bins
    }

    // Cell `i` spans pixels [start(i), start(i + 1)).
    fn cell_start(&self, i: usize) -> usize {
        i * self.image_side / self.cells_per_side
    }

    fn cell_of(&self, px: usize) -> usize {
        (0..self.cells_per_side)
            .rev()
            .find(|&i| self.cell_start(i) <= px)
            .unwrap_or(0)
    }
}

/// Computes the HOG descriptor of a row-major `side × side` image.
///
/// Gradients are central differences with zero padding outside the image;
/// orientation is unsigned in `[0, π)` and votes are split linearly between
/// the two nearest bin centres. Each cell histogram is L2-normalised on its
/// own; all-zero cells stay zero.
pub fn hog_features(image: &[f64], config: &HogConfig) -> Result<Vec<f64>> {
    let side = config.image_side;
    if image.len() != side * side {
        return Err(Error::Dimension {
            expected: side * side,
            got: image.len(),
        });
    }
    if config.cells_per_side == 0 || config.cells_per_side > side || config.bins == 0 {
        return Err(Error::config(
            "HOG grid must have 1..=side cells and >= 1 bin",
        ));
    }
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= side as isize || c >= side as isize {
            0.0
        } else {
            image[r as usize * side + c as usize]
        }
    };

    let bins = config.bins;
    let width = PI / bins as f64;
    let mut hist = vec![0.0; config.output_len()];
    for r in 0..side {
        for c in 0..side {
            let (ri, ci) = (r as isize, c as isize);
            let gx = at(ri, ci + 1) - at(ri, ci - 1);
            let gy = at(ri + 1, ci) - at(ri - 1, ci);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += PI;
            }
            if theta >= PI {
                theta -= PI;
            }
            // Position relative to bin centres at (b + 0.5) * width.
            let pos = theta / width - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo_bin = (lo as isize).rem_euclid(bins as isize) as usize;
            let hi_bin = (lo_bin + 1) % bins;
            let cell = config.cell_of(r) * config.cells_per_side + config.cell_of(c);
            hist[cell * bins + lo_bin] += mag * (1.0 - frac);
            hist[cell * bins + hi_bin] += mag * frac;
        }
    }
    for cell in hist.chunks_mut(bins) {
        let norm = cell.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            cell.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(hist)
}

/// Replaces every sample's raw pixels by its HOG descriptor.
pub fn hog_transform(samples: &[Sample], config: &HogConfig) -> Result<Vec<Sample>> {
    use rayon::prelude::*;
    samples
        .par_iter()
        .map(|s| hog_features(&s.features, config).map(|f| Sample::new(f, s.label)))
        .collect()
}
