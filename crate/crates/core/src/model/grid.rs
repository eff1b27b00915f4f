//! Uniform trait grid, density fields, and quadrature.
//!
//! All quadrature in this crate is the midpoint rule on the uniform grid:
//! every node carries weight `dx`. This composes with the operator
//! discretization so that discrete adjointness identities hold exactly.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Uniform discretization of a bounded trait interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, ModelError> {
        if n < 3 {
            return Err(ModelError::InvalidGrid(format!("need n >= 3, got {n}")));
        }
        if !(x_min < 0.0 && 0.0 < x_max) {
            return Err(ModelError::InvalidGrid(format!(
                "origin must lie inside the grid, got [{x_min}, {x_max}]"
            )));
        }
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(ModelError::InvalidGrid("non-finite bounds".into()));
        }
        Ok(Grid { x_min, x_max, n })
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.x(i))
    }

    /// Index of the nearest grid node, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let t = (x - self.x_min) / self.dx();
        (t.round().max(0.0) as usize).min(self.n - 1)
    }

    /// True if `x` lies in the inner half of the grid (middle 50% by width).
    pub fn in_inner_half(&self, x: f64) -> bool {
        let quarter = (self.x_max - self.x_min) / 4.0;
        x >= self.x_min + quarter && x <= self.x_max - quarter
    }

    /// Midpoint-rule integral of nodal values.
    pub fn quadrature(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        values.iter().sum::<f64>() * self.dx()
    }

    /// Linear interpolation of nodal values; clamps outside the grid.
    pub fn interp(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let t = (x - self.x_min) / self.dx();
        if t <= 0.0 {
            return values[0];
        }
        if t >= (self.n - 1) as f64 {
            return values[self.n - 1];
        }
        let i = t.floor() as usize;
        let w = t - i as f64;
        values[i] * (1.0 - w) + values[i + 1] * w
    }
}

/// Nonnegative function values on a [`Grid`], identified with the density
/// whose cell `i` has constant value `values[i]` on a `dx`-wide cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != grid.n {
            return Err(ModelError::InvalidGrid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::NegativeDensity);
        }
        Ok(DensityField { grid, values })
    }

    pub fn zero(grid: Grid) -> Self {
        DensityField {
            values: vec![0.0; grid.n],
            grid,
        }
    }

    /// Gaussian bump scaled to the requested total mass (grid quadrature).
    pub fn gaussian_bump(grid: Grid, center: f64, sigma: f64, mass: f64) -> Self {
        let mut values: Vec<f64> = grid
            .points()
            .map(|x| (-0.5 * ((x - center) / sigma).powi(2)).exp())
            .collect();
        let raw = grid.quadrature(&values);
        for v in &mut values {
            *v *= mass / raw;
        }
        DensityField { grid, values }
    }

    pub fn mass(&self) -> f64 {
        self.grid.quadrature(&self.values)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.grid.interp(&self.values, x)
    }

    /// L1 distance under grid quadrature.
    pub fn l1_distance(&self, other: &DensityField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx()
    }

    /// Inverse-CDF sampler treating the field as piecewise constant on cells
    /// centered at the grid nodes. `u` must lie in [0, 1).
    pub fn sample_inverse_cdf(&self, u: f64) -> f64 {
        sample_grid_density(&self.grid, &self.values, u)
    }
}

/// Inverse-CDF draw from nonnegative nodal values interpreted as a piecewise
/// constant density on node-centered cells. Exact for that interpretation.
pub fn sample_grid_density(grid: &Grid, values: &[f64], u: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&u));
    let total: f64 = values.iter().sum();
    debug_assert!(total > 0.0, "cannot sample from a zero density");
    let mut target = u * total;
    for (i, v) in values.iter().enumerate() {
        if target < *v {
            let frac = if *v > 0.0 { target / *v } else { 0.5 };
            let dx = grid.dx();
            return grid.x(i) - 0.5 * dx + frac * dx;
        }
        target -= *v;
    }
    grid.x(grid.n - 1)
}

/// Stationary density together with its eigenvalue. The normalization ties
/// the two: the total mass of `f` equals `lambda`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub f: DensityField,
    pub lambda: f64,
}

impl EigenPair {
    pub fn new(f: DensityField, lambda: f64) -> Result<Self, ModelError> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(ModelError::InvalidEigenPair(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let mass = f.mass();
        if (mass - lambda).abs() > 1e-8 * lambda.abs().max(1.0) {
            return Err(ModelError::InvalidEigenPair(format!(
                "mass {mass} does not equal lambda {lambda}"
            )));
        }
        Ok(EigenPair { f, lambda })
    }
}
