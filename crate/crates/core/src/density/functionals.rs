//! Relative entropy, relative Fisher information, total variation and the
//! log-Hessian monitor for densities on a common torus grid.

use super::grid::DensityGrid;
use crate::error::{Error, Result};

/// Values at or below this are treated as zero density.
pub const DENSITY_FLOOR: f64 = 1e-300;

fn check_common(p: &DensityGrid, q: &DensityGrid) -> Result<()> {
    if p.grid() != q.grid() {
        return Err(Error::DimensionMismatch { expected: q.grid().n(), got: p.grid().n() });
    }
    Ok(())
}

/// `h Σ p log(p/q)`, evaluated as `h Σ q φ(p/q)` with `φ(r) = r log r − r + 1 ≥ 0`
/// (equal for unit masses, and free of cancellation when `p ≈ q`).
pub fn entropy_grid(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    check_common(p, q)?;
    let mut total = 0.0;
    for (cell, (&a, &b)) in p.values().iter().zip(q.values()).enumerate() {
        if a <= DENSITY_FLOOR {
            total += b;
            continue;
        }
        if b <= DENSITY_FLOOR {
            return Err(Error::SupportViolation(cell));
        }
        let x = (a - b) / b;
        total += b * ((1.0 + x) * x.ln_1p() - x).max(0.0);
    }
    Ok(p.grid().h() * total)
}

fn log_ratio(p: &DensityGrid, q: &DensityGrid) -> Result<Vec<f64>> {
    p.values()
        .iter()
        .zip(q.values())
        .enumerate()
        .map(|(cell, (&a, &b))| {
            if a <= DENSITY_FLOOR {
                Err(Error::BelowFloor(cell))
            } else if b <= DENSITY_FLOOR {
                Err(Error::SupportViolation(cell))
            } else {
                Ok((a / b).ln())
            }
        })
        .collect()
}

/// `h Σ p (D log(p/q))²` with `D` the centred periodic difference.
///
/// Both densities must exceed the floor everywhere.
pub fn fisher_grid(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    check_common(p, q)?;
    let ell = log_ratio(p, q)?;
    let n = ell.len();
    let h = p.grid().h();
    let total: f64 = (0..n)
        .map(|i| {
            let d = (ell[(i + 1) % n] - ell[(i + n - 1) % n]) / (2.0 * h);
            p.values()[i] * d * d
        })
        .sum();
    Ok(h * total)
}

/// `½ h Σ |p − q|`.
pub fn tv_grid(p: &DensityGrid, q: &DensityGrid) -> Result<f64> {
    check_common(p, q)?;
    let s: f64 = p.values().iter().zip(q.values()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * p.grid().h() * s).min(1.0))
}

/// `sup |∂ₓₓ log p|` over a trajectory, by centred second differences.
pub fn hessian_log_sup(trajectory: &[DensityGrid]) -> Result<f64> {
    let mut sup = 0.0f64;
    for p in trajectory {
        let h = p.grid().h();
        let logs: Vec<f64> = p
            .values()
            .iter()
            .enumerate()
            .map(|(cell, &v)| if v > DENSITY_FLOOR { Ok(v.ln()) } else { Err(Error::BelowFloor(cell)) })
            .collect::<Result<_>>()?;
        let n = logs.len();
        for i in 0..n {
            let d2 = (logs[(i + 1) % n] - 2.0 * logs[i] + logs[(i + n - 1) % n]) / (h * h);
            sup = sup.max(d2.abs());
        }
    }
    Ok(sup)
}
