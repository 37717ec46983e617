//! Wrapped-Gaussian kernel density estimates on a torus grid.

use std::f64::consts::TAU;

use super::grid::{DensityGrid, TorusGrid1D};
use crate::error::{Error, Result};

pub const MIN_KDE_SAMPLES: usize = 100;

/// Silverman's rule with the spread taken as the smaller of the linear and
/// circular standard deviations: `1.06 · min(s, s_c) · n^{-1/5}`.
pub fn silverman_bandwidth(samples: &[f64], period: f64) -> f64 {
    let n = samples.len() as f64;
    let wrapped: Vec<f64> = samples.iter().map(|x| x.rem_euclid(period)).collect();
    let mean = wrapped.iter().sum::<f64>() / n;
    let std = (wrapped.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let (c, s) = wrapped.iter().fold((0.0, 0.0), |(c, s), x| {
        let (sin, cos) = (TAU * x / period).sin_cos();
        (c + cos, s + sin)
    });
    let resultant = (c.hypot(s) / n).min(1.0);
    let circular = if resultant > 0.0 {
        (-2.0 * resultant.ln()).sqrt() * period / TAU
    } else {
        f64::INFINITY
    };
    1.06 * std.min(circular) * n.powf(-0.2)
}

/// Density estimate on `grid`. Samples are binned linearly onto the two
/// nearest cell centres, then circularly convolved with the wrapped Gaussian
/// of the given (or Silverman) bandwidth and renormalized to unit mass.
pub fn kde_density(samples: &[f64], grid: TorusGrid1D, bandwidth: Option<f64>) -> Result<DensityGrid> {
    if samples.len() < MIN_KDE_SAMPLES {
        return Err(Error::TooFewSamples { got: samples.len(), min: MIN_KDE_SAMPLES });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let period = grid.period();
    let bw = match bandwidth {
        Some(b) if b > 0.0 && b.is_finite() => b,
        Some(b) => return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {b}"))),
        None => silverman_bandwidth(samples, period),
    };
    let n = grid.n();
    let h = grid.h();
    let mut counts = vec![0.0; n];
    for &x in samples {
        let pos = x.rem_euclid(period) / h - 0.5;
        let base = pos.floor();
        let frac = pos - base;
        let i = (base as i64).rem_euclid(n as i64) as usize;
        counts[i] += 1.0 - frac;
        counts[(i + 1) % n] += frac;
    }
    let radius = ((8.0 * bw / h).ceil() as usize).min(n / 2);
    let weights: Vec<f64> = (0..=radius)
        .map(|k| {
            let images = (8.0 * bw / period).ceil() as i64 + 1;
            (-images..=images)
                .map(|m| {
                    let r = k as f64 * h + m as f64 * period;
                    (-r * r / (2.0 * bw * bw)).exp()
                })
                .sum::<f64>()
        })
        .collect();
    let mut values = vec![0.0; n];
    for (i, out) in values.iter_mut().enumerate() {
        let mut acc = counts[i] * weights[0];
        for (k, w) in weights.iter().enumerate().skip(1) {
            // at k = n/2 both directions reach the same cell; count it once
            if 2 * k == n {
                acc += counts[(i + k) % n] * w;
            } else {
                acc += (counts[(i + k) % n] + counts[(i + n - k) % n]) * w;
            }
        }
        *out = acc;
    }
    DensityGrid::normalized(grid, values)
}
