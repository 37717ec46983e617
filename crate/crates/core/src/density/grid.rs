use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 64;
pub const MAX_CELLS: usize = 4096;

/// Tolerance on `h Σ p − 1` for a valid density.
pub const MASS_TOLERANCE: f64 = 1e-10;

/// Uniform periodic grid of `n` cells on `[0, L)`; cell `i` is centred at `(i + ½) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid1D {
    n: usize,
    period: f64,
}

impl TorusGrid1D {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if !n.is_power_of_two() || !(MIN_CELLS..=MAX_CELLS).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "cell count must be a power of two in [{MIN_CELLS}, {MAX_CELLS}], got {n}"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        Ok(Self { n, period })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn h(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    /// The same period with twice as many cells.
    pub fn refined(&self) -> Result<Self> {
        Self::new(2 * self.n, self.period)
    }
}

/// Nonnegative cell values with unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    grid: TorusGrid1D,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(grid: TorusGrid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, got: values.len() });
        }
        if let Some((cell, &value)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::NegativeMass { cell, value });
        }
        let mass = grid.h() * values.iter().sum::<f64>();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density mass is {mass}, expected 1")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centres and rescales to unit mass.
    pub fn from_fn(grid: TorusGrid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let raw: Vec<f64> = grid.centers().into_iter().map(f).collect();
        Self::normalized(grid, raw)
    }

    /// Rescales nonnegative weights to unit mass.
    pub fn normalized(grid: TorusGrid1D, mut values: Vec<f64>) -> Result<Self> {
        let total = grid.h() * values.iter().sum::<f64>();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidArgument("weights must have positive finite mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Self::new(grid, values)
    }

    pub fn uniform(grid: TorusGrid1D) -> Self {
        let v = 1.0 / grid.period;
        Self { grid, values: vec![v; grid.n] }
    }

    /// Gaussian `N(mean, var)` wrapped onto the circle.
    pub fn wrapped_gaussian(grid: TorusGrid1D, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(Error::InvalidArgument("variance must be positive".into()));
        }
        let l = grid.period;
        let images = (8.0 * var.sqrt() / l).ceil() as i64 + 1;
        Self::from_fn(grid, |x| {
            (-images..=images)
                .map(|k| {
                    let r = x - mean + k as f64 * l;
                    (-r * r / (2.0 * var)).exp()
                })
                .sum()
        })
    }

    /// Von Mises density `∝ exp(κ cos(2π(x − mean)/L))`.
    pub fn von_mises(grid: TorusGrid1D, mean: f64, kappa: f64) -> Result<Self> {
        let l = grid.period;
        // subtracting κ keeps the exponent ≤ 0
        Self::from_fn(grid, |x| (kappa * ((TAU * (x - mean) / l).cos() - 1.0)).exp())
    }

    pub fn grid(&self) -> TorusGrid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.grid.h() * self.values.iter().sum::<f64>()
    }

    /// Inverse-CDF draw for `u ∈ (0, 1)`, uniform within the selected cell.
    pub fn sample(&self, u: f64) -> f64 {
        let h = self.grid.h();
        let target = u * self.values.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > 0.0 && acc + v >= target {
                let frac = ((target - acc) / v).clamp(0.0, 1.0);
                return ((i as f64 + frac) * h).min(self.grid.period * (1.0 - f64::EPSILON));
            }
            acc += v;
        }
        let last = self.values.iter().rposition(|&v| v > 0.0).unwrap_or(0);
        (last as f64 + 0.5) * h
    }

    /// `x,value` rows with a header line.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([self.grid.center(i).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Binary snapshot: `n` as u64, `L` and `t` as f64, then the values, little-endian.
    pub fn write_binary(&self, path: impl AsRef<Path>, time: f64) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&self.grid.period.to_le_bytes())?;
        w.write_all(&time.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: impl AsRef<Path>) -> Result<(Self, f64)> {
        let mut r = BufReader::new(File::open(path)?);
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let period = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let time = f64::from_le_bytes(word);
        let grid = TorusGrid1D::new(n, period)?;
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Ok((Self::new(grid, values)?, time))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_validation() {
        assert!(TorusGrid1D::new(32, 1.0).is_err());
        assert!(TorusGrid1D::new(100, 1.0).is_err());
        assert!(TorusGrid1D::new(8192, 1.0).is_err());
        assert!(TorusGrid1D::new(64, 0.0).is_err());
        let g = TorusGrid1D::new(128, 2.0).unwrap();
        assert_eq!(g.h(), 2.0 / 128.0);
        assert_eq!(g.refined().unwrap().n(), 256);
    }

    #[test]
    fn density_validation() {
        let g = TorusGrid1D::new(64, 1.0).unwrap();
        assert!(DensityGrid::new(g, vec![0.5; 64]).is_err());
        let mut v = vec![1.0; 64];
        v[3] = -1e-3;
        v[4] = 1.0 + 1e-3;
        assert!(matches!(DensityGrid::new(g, v), Err(Error::NegativeMass { cell: 3, .. })));
        assert_relative_eq!(DensityGrid::uniform(g).mass(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn named_densities_have_unit_mass_and_right_mode() {
        let g = TorusGrid1D::new(256, 1.0).unwrap();
        for p in [
            DensityGrid::wrapped_gaussian(g, 0.3, 0.01).unwrap(),
            DensityGrid::von_mises(g, 0.3, 4.0).unwrap(),
        ] {
            assert_relative_eq!(p.mass(), 1.0, epsilon = 1e-12);
            let mode = p.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert!((g.center(mode) - 0.3).abs() <= g.h());
        }
    }

    #[test]
    fn inverse_cdf_sampling() {
        let g = TorusGrid1D::new(64, 1.0).unwrap();
        let mut v = vec![0.0; 64];
        v[10] = 64.0;
        let p = DensityGrid::new(g, v).unwrap();
        for u in [1e-9, 0.3, 0.999_999] {
            let x = p.sample(u);
            assert!((10.0 / 64.0..11.0 / 64.0).contains(&x));
        }
        let uni = DensityGrid::uniform(g);
        assert_relative_eq!(uni.sample(0.25), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn io_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = TorusGrid1D::new(64, 1.0).unwrap();
        let p = DensityGrid::von_mises(g, 0.1, 2.0).unwrap();
        p.write_binary(dir.path().join("p.bin"), 0.25).unwrap();
        let (q, t) = DensityGrid::read_binary(dir.path().join("p.bin")).unwrap();
        assert_eq!((q, t), (p.clone(), 0.25));
        p.write_csv(dir.path().join("p.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("x,value"));
    }
}
