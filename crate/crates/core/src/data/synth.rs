use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::Sample;
use crate::error::{Error, Result};
use crate::rng::{rng_for, tag};

/// Gaussian class clusters with unit covariance.
///
/// For `k <= d` class `c` is centred at `separation · e_c`; otherwise the
/// centres are `separation` times seeded random unit directions. Samples
/// are emitted class by class.
pub fn synth_blobs(
    k: usize,
    d: usize,
    per_class: usize,
    separation: f64,
    seed: u64,
) -> Result<Vec<Sample>> {
    if k < 2 || d < 2 || per_class == 0 {
        return Err(Error::config(
            "synth_blobs needs k >= 2, d >= 2, per_class >= 1",
        ));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::config("separation must be finite and non-negative"));
    }
    let mut rng = rng_for(seed, &[tag::SYNTH]);
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            if k <= d {
                let mut v = vec![0.0; d];
                v[c] = separation;
                v
            } else {
                let raw: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                raw.into_iter().map(|v| v / norm * separation).collect()
            }
        })
        .collect();
    let mut out = Vec::with_capacity(k * per_class);
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_class {
            let x = centre
                .iter()
                .map(|m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + z
                })
                .collect();
            out.push(Sample::new(x, c + 1));
        }
    }
    Ok(out)
}
