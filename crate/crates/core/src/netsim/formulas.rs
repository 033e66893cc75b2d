//! Closed-form overhead model. All quantities are coefficient counts; `d`
//! arguments may be fractional when they are measured means.
//!
//! * `s`: locations, `k`: classes, `N`: training samples in total
//! * `d0`, `d1`: non-null coefficients per base / GreedyTL model
//! * `dc`: dimensionality of one data point shipped to the cloud

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bytes per mebibyte; table figures are expressed in this unit.
pub const MIB: f64 = 1024.0 * 1024.0;

/// Converts a coefficient count to MiB at `bytes_per_coeff`.
pub fn to_mib(count: f64, bytes_per_coeff: f64) -> f64 {
    count * bytes_per_coeff / MIB
}

/// All-to-all exchange of `k` models of `d` values among `s` nodes.
pub fn all_to_all(s: usize, k: usize, d: f64) -> f64 {
    (s * s.saturating_sub(1) * k) as f64 * d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtlOverhead {
    pub oh0: f64,
    pub oh1: f64,
    pub total: f64,
}

pub fn predict_overhead_gtl(s: usize, k: usize, d0: f64, d1: f64) -> GtlOverhead {
    let oh0 = all_to_all(s, k, d0);
    let oh1 = all_to_all(s, k, d1);
    GtlOverhead {
        oh0,
        oh1,
        total: oh0 + oh1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NohtlOverhead {
    /// Star topology: uploads to the collector plus the mean sent back.
    pub mu: f64,
    /// Every model to every node for majority voting.
    pub mv: f64,
}

pub fn predict_overhead_nohtl(s: usize, k: usize, d0: f64) -> NohtlOverhead {
    NohtlOverhead {
        mu: (2 * k * s.saturating_sub(1)) as f64 * d0,
        mv: all_to_all(s, k, d0),
    }
}

/// `2ks²d0`, an upper bound on GTL traffic whenever `d1 ≤ d0`.
pub fn overhead_bound(s: usize, k: usize, d0: f64) -> f64 {
    (2 * k * s * s) as f64 * d0
}

pub fn overhead_cloud(n: usize, dc: f64) -> f64 {
    n as f64 * dc
}

/// Traffic between the permanent device and `s` newcomers in one dynamic
/// phase: the stored model to each newcomer and the new aggregate back.
pub fn overhead_g(s: usize, k: usize, d0: f64) -> f64 {
    d0 * (k * (s + 1)) as f64
}

pub fn overhead_dyn_gtl(s: usize, k: usize, d0: f64, d1: f64) -> f64 {
    predict_overhead_gtl(s, k, d0, d1).total + overhead_g(s, k, d0)
}

/// Relative saving `1 − overhead / reference`.
pub fn gain(overhead: f64, reference: f64) -> f64 {
    1.0 - overhead / reference
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBound {
    /// `1 − 2ks²d0 / (N·dc)`.
    pub exact: f64,
    /// `1 − 2ks²/N`, assuming `d0 ≈ dc`.
    pub equal_dims: f64,
    /// `1 − 2ks/μ_D` with `μ_D = N/s`.
    pub mean_size: f64,
    pub mu_d: f64,
}

impl GainBound {
    /// Number of locations at which the approximate gain reaches zero.
    pub fn break_even_locations(&self, k: usize) -> f64 {
        self.mu_d / (2 * k) as f64
    }
}

pub fn gain_lower_bound(s: usize, k: usize, d0: f64, n: usize, dc: f64) -> Result<GainBound> {
    let cloud = overhead_cloud(n, dc);
    if !(cloud > 0.0) {
        return Err(Error::config("gain bound needs N·dc > 0"));
    }
    let up = overhead_bound(s, k, d0);
    let mu_d = n as f64 / s as f64;
    Ok(GainBound {
        exact: 1.0 - up / cloud,
        equal_dims: 1.0 - (2 * k * s * s) as f64 / n as f64,
        mean_size: 1.0 - (2 * k * s) as f64 / mu_d,
        mu_d,
    })
}

/// Every formula evaluated at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadPrediction {
    pub s: usize,
    pub k: usize,
    pub d0: f64,
    pub d1: f64,
    pub n: usize,
    pub dc: f64,
    pub gtl: GtlOverhead,
    pub nohtl: NohtlOverhead,
    pub bound: f64,
    pub cloud: f64,
    pub gain: Option<GainBound>,
    pub oh_g: f64,
    pub dyn_gtl: f64,
}

impl OverheadPrediction {
    pub fn new(s: usize, k: usize, d0: f64, d1: f64, n: usize, dc: f64) -> Self {
        Self {
            s,
            k,
            d0,
            d1,
            n,
            dc,
            gtl: predict_overhead_gtl(s, k, d0, d1),
            nohtl: predict_overhead_nohtl(s, k, d0),
            bound: overhead_bound(s, k, d0),
            cloud: overhead_cloud(n, dc),
            gain: gain_lower_bound(s, k, d0, n, dc).ok(),
            oh_g: overhead_g(s, k, d0),
            dyn_gtl: overhead_dyn_gtl(s, k, d0, d1),
        }
    }
}
