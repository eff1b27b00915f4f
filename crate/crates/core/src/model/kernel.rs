//! Mutation kernels m(x, y): probability densities for the jump target y
//! given the source x, doubly stochastic in the sense that both the target
//! and the source marginals integrate to one.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::{sample_grid_density, Grid};
use super::ModelError;

/// Pointwise lower bound: m(x, y) >= kappa0 on |y - x| < eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorizationCertificate {
    pub kappa0: f64,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub enum KernelShape {
    /// m(x, y) = gaussian density of (y - x) with standard deviation sigma.
    GaussianConvolution { sigma: f64 },
    /// m(x, y) = 1/(2 eps) on the open window |y - x| < eps.
    UniformWindow { eps: f64 },
    /// Densities sampled on a square grid; row = source x, column = target y.
    /// Bilinear interpolation inside the grid, zero outside.
    Tabulated { grid: Grid, values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct MutationKernel {
    pub shape: KernelShape,
    pub certificate: Option<MinorizationCertificate>,
}

/// Outcome of checking a kernel against the standing assumptions on a grid.
#[derive(Debug, Clone)]
pub struct KernelReport {
    /// max over inner-half sources of |target-mass quadrature - 1|
    pub max_row_deviation: f64,
    /// max over inner-half targets of |source-mass quadrature - 1|
    pub max_col_deviation: f64,
    /// analytic kernel mass escaping the grid, maximized over inner sources
    pub max_boundary_leak: f64,
    /// smallest margin of m(x,y) - kappa0 over the certified window, if any
    pub minorization_margin: Option<f64>,
    /// sup over inner-half sources of the 2q-th target moment (quadrature)
    pub moment_2q_sup: f64,
}

impl MutationKernel {
    pub fn gaussian(sigma: f64) -> Result<Self, ModelError> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(ModelError::InvalidKernel("sigma must be positive".into()));
        }
        // The gaussian profile is decreasing in |y - x|, so its value at
        // distance sigma minorizes the kernel on the window of radius sigma.
        let kappa0 = (-0.5f64).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        Ok(MutationKernel {
            shape: KernelShape::GaussianConvolution { sigma },
            certificate: Some(MinorizationCertificate { kappa0, eps: sigma }),
        })
    }

    pub fn uniform_window(eps: f64) -> Result<Self, ModelError> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(ModelError::InvalidKernel("eps must be positive".into()));
        }
        Ok(MutationKernel {
            shape: KernelShape::UniformWindow { eps },
            certificate: Some(MinorizationCertificate {
                kappa0: 1.0 / (2.0 * eps),
                eps,
            }),
        })
    }

    pub fn tabulated(grid: Grid, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != grid.n * grid.n {
            return Err(ModelError::InvalidKernel(format!(
                "tabulated kernel needs {}x{} values, got {}",
                grid.n,
                grid.n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::InvalidKernel(
                "tabulated densities must be finite and >= 0".into(),
            ));
        }
        Ok(MutationKernel {
            shape: KernelShape::Tabulated { grid, values },
            certificate: None,
        })
    }

    pub fn with_certificate(mut self, cert: MinorizationCertificate) -> Self {
        self.certificate = Some(cert);
        self
    }

    /// Tabulate onto a grid for quadrature: entry (i, j) is the average of
    /// m(x_i, .) over the cell of node j. For kernels with jump
    /// discontinuities the cell average is what makes midpoint quadrature
    /// first-order exact; for smooth kernels the point value is used.
    pub fn tabulate(&self, grid: Grid) -> Vec<f64> {
        let dx = grid.dx();
        let mut values = Vec::with_capacity(grid.n * grid.n);
        for x in grid.points() {
            for y in grid.points() {
                values.push(self.cell_density(x, y, dx));
            }
        }
        values
    }

    fn cell_density(&self, x: f64, y: f64, cell: f64) -> f64 {
        match &self.shape {
            KernelShape::UniformWindow { eps } => {
                let lo = (y - 0.5 * cell).max(x - eps);
                let hi = (y + 0.5 * cell).min(x + eps);
                (hi - lo).max(0.0) / (2.0 * eps * cell)
            }
            _ => self.density(x, y),
        }
    }

    /// The density m(x, y).
    pub fn density(&self, x: f64, y: f64) -> f64 {
        match &self.shape {
            KernelShape::GaussianConvolution { sigma } => {
                let z = (y - x) / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            KernelShape::UniformWindow { eps } => {
                if (y - x).abs() < *eps {
                    1.0 / (2.0 * eps)
                } else {
                    0.0
                }
            }
            KernelShape::Tabulated { grid, values } => {
                if x < grid.x_min || x > grid.x_max || y < grid.x_min || y > grid.x_max {
                    return 0.0;
                }
                let dx = grid.dx();
                let tx = ((x - grid.x_min) / dx).min((grid.n - 1) as f64);
                let ty = ((y - grid.x_min) / dx).min((grid.n - 1) as f64);
                let (i, u) = split_index(tx, grid.n);
                let (j, v) = split_index(ty, grid.n);
                let at = |r: usize, c: usize| values[r * grid.n + c];
                at(i, j) * (1.0 - u) * (1.0 - v)
                    + at(i + 1, j) * u * (1.0 - v)
                    + at(i, j + 1) * (1.0 - u) * v
                    + at(i + 1, j + 1) * u * v
            }
        }
    }

    /// Draw a jump target from m(x, .).
    pub fn sample_target<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match &self.shape {
            KernelShape::GaussianConvolution { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                x + sigma * z
            }
            KernelShape::UniformWindow { eps } => x + rng.random_range(-*eps..*eps),
            KernelShape::Tabulated { grid, .. } => {
                // inverse CDF of the bilinearly interpolated row at x
                let row: Vec<f64> = grid.points().map(|y| self.density(x, y)).collect();
                let u = rng.random_range(0.0..1.0);
                sample_grid_density(grid, &row, u)
            }
        }
    }

    /// Kernel mass falling outside the grid for a source at x. Zero for
    /// tabulated kernels, which are defined on the grid.
    pub fn mass_outside(&self, x: f64, grid: &Grid) -> f64 {
        match &self.shape {
            KernelShape::GaussianConvolution { sigma } => {
                let lo = (grid.x_min - x) / sigma;
                let hi = (grid.x_max - x) / sigma;
                (1.0 - (normal_cdf(hi) - normal_cdf(lo))).max(0.0)
            }
            KernelShape::UniformWindow { eps } => {
                let lo = (x - eps).max(grid.x_min);
                let hi = (x + eps).min(grid.x_max);
                (1.0 - (hi - lo).max(0.0) / (2.0 * eps)).max(0.0)
            }
            KernelShape::Tabulated { .. } => 0.0,
        }
    }
}

fn split_index(t: f64, n: usize) -> (usize, f64) {
    let i = (t.floor() as usize).min(n - 2);
    (i, (t - i as f64).clamp(0.0, 1.0))
}

/// Standard normal CDF via the Abramowitz-Stegun erf approximation
/// (absolute error below 1.5e-7, ample for leak diagnostics).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Check double stochasticity, boundary leak, minorization, and the target
/// moment of order 2q on the grid. Deviations are measured for sources and
/// targets in the inner half of the grid, where the kernel is expected to be
/// fully resolved.
pub fn validate_kernel(
    kernel: &MutationKernel,
    grid: &Grid,
    q: usize,
    tolerance: f64,
) -> Result<KernelReport, ModelError> {
    let dx = grid.dx();
    let table = kernel.tabulate(*grid);
    let n = grid.n;

    let mut max_row_dev = 0.0f64;
    let mut max_col_dev = 0.0f64;
    let mut max_leak = 0.0f64;
    let mut moment_sup = 0.0f64;

    for i in 0..n {
        let x = grid.x(i);
        if !grid.in_inner_half(x) {
            continue;
        }
        let row = &table[i * n..(i + 1) * n];
        let row_mass: f64 = row.iter().sum::<f64>() * dx;
        let col_mass: f64 = (0..n).map(|r| table[r * n + i]).sum::<f64>() * dx;
        max_row_dev = max_row_dev.max((row_mass - 1.0).abs());
        max_col_dev = max_col_dev.max((col_mass - 1.0).abs());
        max_leak = max_leak.max(kernel.mass_outside(x, grid));
        let moment: f64 = (0..n)
            .map(|j| grid.x(j).abs().powi(2 * q as i32) * row[j])
            .sum::<f64>()
            * dx;
        moment_sup = moment_sup.max(moment);
    }

    let minorization_margin = kernel.certificate.map(|cert| {
        let mut margin = f64::INFINITY;
        for i in 0..n {
            let x = grid.x(i);
            // only sources whose certified window lies inside the grid
            if x - cert.eps < grid.x_min || x + cert.eps > grid.x_max {
                continue;
            }
            for j in 0..n {
                let y = grid.x(j);
                // cells fully inside the window; partially covered cells
                // carry a diluted average value by construction
                if (y - x).abs() < cert.eps - 0.5 * dx {
                    margin = margin.min(table[i * n + j] - cert.kappa0);
                }
            }
        }
        margin
    });

    if max_leak > tolerance {
        return Err(ModelError::MassLeak {
            leak: max_leak,
            tolerance,
        });
    }
    if max_row_dev > tolerance || max_col_dev > tolerance {
        return Err(ModelError::DoubleStochasticityViolation {
            row_deviation: max_row_dev,
            col_deviation: max_col_dev,
            tolerance,
        });
    }

    Ok(KernelReport {
        max_row_deviation: max_row_dev,
        max_col_deviation: max_col_dev,
        max_boundary_leak: max_leak,
        minorization_margin,
        moment_2q_sup: moment_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    #[test]
    fn gaussian_peak_value() {
        let k = MutationKernel::gaussian(1.0).unwrap();
        let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((k.density(0.0, 0.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn uniform_window_is_an_indicator() {
        let k = MutationKernel::uniform_window(0.5).unwrap();
        assert_eq!(k.density(0.0, 0.4), 1.0);
        assert_eq!(k.density(0.0, 0.6), 0.0);
    }

    #[test]
    fn gaussian_kernel_is_symmetric() {
        let k = MutationKernel::gaussian(0.7).unwrap();
        for (x, y) in [(0.1, 0.9), (-1.0, 2.0), (0.0, -0.3)] {
            assert_eq!(k.density(x, y), k.density(y, x));
        }
    }

    #[test]
    fn tabulated_gaussian_matches_analytic_density() {
        let grid = Grid::new(-6.0, 6.0, 400).unwrap();
        let gauss = MutationKernel::gaussian(1.0).unwrap();
        let tab = MutationKernel::tabulated(grid, gauss.tabulate(grid)).unwrap();
        let mut worst = 0.0f64;
        for i in 0..200 {
            let x = -5.0 + 10.0 * (i as f64) / 199.0;
            let y = -5.0 + 10.0 * ((i * 37 % 200) as f64) / 199.0;
            worst = worst.max((tab.density(x, y) - gauss.density(x, y)).abs());
        }
        assert!(worst <= 1e-3, "max deviation {worst}");
    }

    #[test]
    fn uniform_window_validates_on_wide_grid() {
        let grid = Grid::new(-6.0, 6.0, 601).unwrap();
        let k = MutationKernel::uniform_window(0.3).unwrap();
        let report = validate_kernel(&k, &grid, 1, 1e-3).unwrap();
        assert!(report.max_row_deviation <= 1e-3);
        assert!(report.max_col_deviation <= 1e-3);
        assert!(report.minorization_margin.unwrap() >= -1e-12);
    }

    #[test]
    fn gaussian_validates_on_wide_grid() {
        let grid = Grid::new(-8.0, 8.0, 401).unwrap();
        let k = MutationKernel::gaussian(1.0).unwrap();
        let report = validate_kernel(&k, &grid, 2, 1e-3).unwrap();
        assert!(report.max_row_deviation <= 1e-3);
        assert!(report.max_col_deviation <= 1e-3);
        assert!(report.moment_2q_sup.is_finite());
    }

    #[test]
    fn scaled_row_breaks_double_stochasticity() {
        let grid = Grid::new(-6.0, 6.0, 201).unwrap();
        let base = MutationKernel::uniform_window(0.3).unwrap();
        let mut values = base.tabulate(grid);
        let bad_row = grid.n / 2;
        for v in &mut values[bad_row * grid.n..(bad_row + 1) * grid.n] {
            *v *= 2.0;
        }
        let tab = MutationKernel::tabulated(grid, values).unwrap();
        match validate_kernel(&tab, &grid, 1, 1e-3) {
            Err(ModelError::DoubleStochasticityViolation { .. }) => {}
            other => panic!("expected double stochasticity violation, got {other:?}"),
        }
    }

    #[test]
    fn narrow_grid_triggers_mass_leak() {
        let grid = Grid::new(-1.0, 1.0, 101).unwrap();
        let k = MutationKernel::gaussian(1.0).unwrap();
        match validate_kernel(&k, &grid, 1, 1e-3) {
            Err(ModelError::MassLeak { .. }) => {}
            other => panic!("expected mass leak, got {other:?}"),
        }
    }

    #[test]
    fn sampled_targets_stay_in_window() {
        let k = MutationKernel::uniform_window(0.25).unwrap();
        let mut rng = stream_from_seed(1);
        for _ in 0..1000 {
            let y = k.sample_target(0.7, &mut rng);
            assert!((y - 0.7).abs() < 0.25);
        }
    }

    #[test]
    fn tabulated_sampling_tracks_the_density() {
        let grid = Grid::new(-6.0, 6.0, 400).unwrap();
        let gauss = MutationKernel::gaussian(1.0).unwrap();
        let tab = MutationKernel::tabulated(grid, gauss.tabulate(grid)).unwrap();
        let mut rng = stream_from_seed(9);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| tab.sample_target(0.5, &mut rng)).sum::<f64>() / n as f64;
        // target mean is the source, sd of the mean is 1/sqrt(n)
        assert!((mean - 0.5).abs() < 3.5 / (n as f64).sqrt(), "mean {mean}");
    }
}
