//! Full model parameterization and construction-time validation.

use super::kernel::{validate_kernel, KernelReport, MutationKernel};
use super::rates::RateSpec;
use super::{Grid, ModelError};

/// Everything needed to define the population dynamics: rates, jump rate,
/// environmental drift, mutation kernel, and the system-size parameter K.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub rates: RateSpec,
    /// mutation (jump) rate per individual
    pub gamma: f64,
    /// environmental drift velocity
    pub rho: f64,
    pub kernel: MutationKernel,
    /// carrying-capacity scale; competition adds N/K to the death rate
    pub k_scale: u64,
    /// decay exponent of the growth rate (largest valid q), when it exists
    pub q: Option<usize>,
    /// upper bound c on the growth rate h
    pub growth_bound: f64,
}

impl ModelParams {
    pub fn new(
        rates: RateSpec,
        gamma: f64,
        rho: f64,
        kernel: MutationKernel,
        k_scale: u64,
    ) -> Result<Self, ModelError> {
        rates.validate()?;
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(ModelError::InvalidRates("gamma must be >= 0".into()));
        }
        if !rho.is_finite() {
            return Err(ModelError::InvalidRates("rho must be finite".into()));
        }
        if k_scale == 0 {
            return Err(ModelError::InvalidRates("K must be positive".into()));
        }
        let growth_bound = rates.growth_sup();
        let q = rates.decay_exponent().map(|d| d.q);
        Ok(ModelParams {
            rates,
            gamma,
            rho,
            kernel,
            k_scale,
            q,
            growth_bound,
        })
    }

    /// Shorthands used everywhere.
    pub fn birth(&self, x: f64) -> f64 {
        self.rates.birth(x)
    }
    pub fn death(&self, x: f64) -> f64 {
        self.rates.death(x)
    }
    pub fn growth(&self, x: f64) -> f64 {
        self.rates.growth(x)
    }
    pub fn growth_shifted(&self, lambda: f64, x: f64) -> f64 {
        self.rates.growth_shifted(lambda, x)
    }

    /// Default trait-line truncation: six kernel standard deviations beyond
    /// the zero set of the growth rate. Only defined for the confining
    /// polynomial family combined with a parametric kernel.
    pub fn default_grid(&self, n: usize) -> Result<Grid, ModelError> {
        if !matches!(self.rates, RateSpec::BirthDeathPoly { .. }) {
            return Err(ModelError::InvalidGrid(
                "no default grid: the flat rate family does not confine".into(),
            ));
        }
        let sd = match &self.kernel.shape {
            crate::model::KernelShape::GaussianConvolution { sigma } => *sigma,
            crate::model::KernelShape::UniformWindow { eps } => eps / 3f64.sqrt(),
            crate::model::KernelShape::Tabulated { grid, .. } => {
                // the table already fixes a domain
                return Grid::new(grid.x_min, grid.x_max, n);
            }
        };
        let radius = self.rates.confinement_radius();
        let mut zero_pos = radius;
        let mut zero_neg = -radius;
        for side in [1.0f64, -1.0] {
            let mut lo = 0.0;
            let mut hi = side * radius;
            // h(0) > 0 and h eventually negative: bisect the sign change
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if self.growth(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if side > 0.0 {
                zero_pos = hi;
            } else {
                zero_neg = hi;
            }
        }
        Grid::new(zero_neg - 6.0 * sd, zero_pos + 6.0 * sd, n)
    }

    /// Check the grid against the model: h must change sign inside (the
    /// viable region is interior) and the kernel must validate on it.
    pub fn check_grid(&self, grid: &Grid, kernel_tol: f64) -> Result<KernelReport, ModelError> {
        if matches!(self.rates, RateSpec::BirthDeathPoly { .. }) {
            if self.growth(0.0) <= 0.0 {
                return Err(ModelError::InvalidRates("h(0) must be positive".into()));
            }
            if self.growth(grid.x_min) >= 0.0 || self.growth(grid.x_max) >= 0.0 {
                return Err(ModelError::InvalidGrid(format!(
                    "growth rate must be negative at the grid edges, got h({}) = {}, h({}) = {}",
                    grid.x_min,
                    self.growth(grid.x_min),
                    grid.x_max,
                    self.growth(grid.x_max)
                )));
            }
        }
        validate_kernel(&self.kernel, grid, self.q.unwrap_or(1), kernel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rates::quadratic_example;

    #[test]
    fn canonical_params_validate() {
        let p = ModelParams::new(
            quadratic_example(),
            0.4,
            0.001,
            MutationKernel::uniform_window(0.3).unwrap(),
            1000,
        )
        .unwrap();
        assert_eq!(p.q, Some(1));
        assert!((p.growth_bound - 1.0).abs() < 1e-9);
        let grid = Grid::new(-4.0, 4.0, 400).unwrap();
        p.check_grid(&grid, 1e-3).unwrap();
    }

    #[test]
    fn default_grid_covers_the_viable_region_with_margin() {
        let p = ModelParams::new(
            quadratic_example(),
            0.4,
            0.001,
            MutationKernel::uniform_window(0.3).unwrap(),
            1000,
        )
        .unwrap();
        let grid = p.default_grid(400).unwrap();
        // zero set of 1 - x^2/2 is +-sqrt(2); window sd is 0.3/sqrt(3)
        let margin = 6.0 * 0.3 / 3f64.sqrt();
        assert!((grid.x_max - (2f64.sqrt() + margin)).abs() < 1e-6);
        assert!((grid.x_min + (2f64.sqrt() + margin)).abs() < 1e-6);
        p.check_grid(&grid, 1e-3).unwrap();
    }

    #[test]
    fn grid_not_covering_viable_region_is_rejected() {
        let p = ModelParams::new(
            quadratic_example(),
            0.4,
            0.0,
            MutationKernel::uniform_window(0.1).unwrap(),
            100,
        )
        .unwrap();
        // h(1) = 0.5 > 0: the edge is still viable
        let grid = Grid::new(-1.0, 1.0, 100).unwrap();
        assert!(p.check_grid(&grid, 1e-3).is_err());
    }

    #[test]
    fn zero_k_is_rejected() {
        let err = ModelParams::new(
            quadratic_example(),
            0.4,
            0.0,
            MutationKernel::uniform_window(0.3).unwrap(),
            0,
        );
        assert!(err.is_err());
    }
}
