//! Path samplers for the trait motion, its adjoint, the growth-weighted
//! (spinal) process, and the time-reversed ancestral process, together with
//! the grid table of expected-mass values m_t(x) used as their oracle.
//!
//! The reversed process drifts at -rho: its semigroup is
//! phi -> PhatStar_t(F phi) / F, and the adjoint motion carries the opposite
//! drift, which is also what left-limit time reversal does to path slopes.

use rand::Rng;
use thiserror::Error;

use crate::ibm::TraitPath;
use crate::model::{sample_grid_density, DensityField, EigenPair, Grid, ModelParams};
use crate::operators::{FkPropagator, JumpTable, OperatorError};

#[derive(Debug, Error)]
pub enum SpineError {
    #[error("rejection sampler acceptance rate {rate:.3e} below floor {floor:.3e} ({accepted}/{trials})")]
    AcceptanceTooLow {
        rate: f64,
        floor: f64,
        accepted: u64,
        trials: u64,
    },
    #[error("floor-exit rejection rate {rate:.3e} exceeds 1% ({exits}/{attempts})")]
    FloorExit { rate: f64, exits: u64, attempts: u64 },
    #[error("time {requested} beyond the tabulated horizon {available}")]
    HorizonExceeded { requested: f64, available: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Straight-drift-plus-Poisson-jumps sample of the trait motion X.
pub fn sample_motion(
    params: &ModelParams,
    x0: f64,
    horizon: f64,
    rng: &mut impl Rng,
) -> TraitPath {
    let mut path = TraitPath::constant_free(0.0, horizon, x0, params.rho);
    if params.gamma == 0.0 {
        return path;
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random_range(0.0..1.0);
        t += -(1.0 - u).ln() / params.gamma;
        if t >= horizon {
            return path;
        }
        let y = params.kernel.sample_target(path.value(t), rng);
        path.push_jump(t, y);
    }
}

/// The adjoint motion X*: opposite drift, jump targets drawn from the source
/// marginal m(., x) via grid inverse CDF of the kernel-table column at x.
pub fn sample_motion_adjoint(
    params: &ModelParams,
    table: &JumpTable,
    x0: f64,
    horizon: f64,
    rng: &mut impl Rng,
) -> TraitPath {
    let mut path = TraitPath::constant_free(0.0, horizon, x0, -params.rho);
    if params.gamma == 0.0 {
        return path;
    }
    let grid = table.grid;
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random_range(0.0..1.0);
        t += -(1.0 - u).ln() / params.gamma;
        if t >= horizon {
            return path;
        }
        let x = path.value(t);
        let col = column_slice(table, x);
        let y = sample_grid_density(&grid, &col, rng.random_range(0.0..1.0));
        path.push_jump(t, y);
    }
}

/// Kernel-table column at an off-grid state, linearly interpolated.
fn column_slice(table: &JumpTable, x: f64) -> Vec<f64> {
    let grid = table.grid;
    let t = ((x - grid.x_min) / grid.dx()).clamp(0.0, (grid.n - 1) as f64);
    let i = (t.floor() as usize).min(grid.n - 2);
    let w = t - i as f64;
    (0..grid.n)
        .map(|j| table.w.at(j, i) * (1.0 - w) + table.w.at(j, i + 1) * w)
        .collect()
}

/// Exact integral of h - lambda along a piecewise-linear path.
pub fn growth_weight_exponent(params: &ModelParams, lambda: f64, path: &TraitPath) -> f64 {
    let mut acc = 0.0;
    let mut seg_t = path.t0;
    let mut seg_x = path.x0;
    for &(jt, jv) in &path.jumps {
        acc += params
            .rates
            .growth_shifted_integral(lambda, seg_x, path.slope, jt - seg_t);
        seg_t = jt;
        seg_x = jv;
    }
    acc + params
        .rates
        .growth_shifted_integral(lambda, seg_x, path.slope, path.t1 - seg_t)
}

/// Monte Carlo estimate of m_t(x) = E_x[exp(int_0^t (h(X_s) - lambda) ds)]
/// with the path integral evaluated exactly. Returns (estimate, std error).
pub fn estimate_mt(
    params: &ModelParams,
    lambda: f64,
    x: f64,
    t: f64,
    n_paths: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n_paths {
        let path = sample_motion(params, x, t, rng);
        let w = growth_weight_exponent(params, lambda, &path).exp();
        sum += w;
        sumsq += w * w;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Initial condition for the forward spinal sampler.
#[derive(Debug, Clone, Copy)]
pub enum SpineInit {
    Point(f64),
    /// the size-biased start m_T(x) F(x) / lambda
    Biased,
    /// the normalized stationary profile F / lambda
    Stationary,
}

#[derive(Debug, Clone, Copy)]
pub struct ForwardSpineStats {
    pub trials: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ReversedStats {
    pub attempts: u64,
    pub floor_exits: u64,
}

/// Everything the spinal samplers need: the stationary pair, the balanced
/// kernel table, the m_t grid table, and the floored reversed-jump intensity.
pub struct SpineContext {
    pub params: ModelParams,
    pub eigen: EigenPair,
    pub grid: Grid,
    pub horizon: f64,
    pub floor: f64,
    /// killing-rate shift C >= sup h - lambda
    pub killing_shift: f64,
    dt: f64,
    /// m_t at every Euler step, m_table[k] is time k dt
    m_table: Vec<Vec<f64>>,
    jump_table: JumpTable,
    /// gamma (W^T F) at the grid nodes (numerator of the jump intensity)
    rev_flux: Vec<f64>,
    density_prop: FkPropagator,
}

impl SpineContext {
    pub fn new(
        params: &ModelParams,
        eigen: &EigenPair,
        horizon: f64,
        dt: f64,
    ) -> Result<Self, SpineError> {
        let grid = eigen.f.grid;
        let lambda = eigen.lambda;
        let jump_table = JumpTable::new(params, grid);
        let obs_prop = FkPropagator::from_generator(
            params,
            crate::operators::GeneratorMatrix::from_table(
                params,
                &jump_table,
                crate::operators::GeneratorKind::Forward,
            ),
            lambda,
        );
        let density_prop = FkPropagator::from_generator(
            params,
            crate::operators::GeneratorMatrix::from_table(
                params,
                &jump_table,
                crate::operators::GeneratorKind::Adjoint,
            ),
            lambda,
        );
        if dt > obs_prop.step_bound() {
            return Err(OperatorError::StabilityViolation {
                dt,
                bound: obs_prop.step_bound(),
            }
            .into());
        }

        // m_0 = 1; advance the observable semigroup step by step
        let steps = if horizon > 0.0 {
            (horizon / dt).ceil() as usize
        } else {
            0
        };
        let dt_act = if steps > 0 { horizon / steps as f64 } else { dt };
        let mut m_table = Vec::with_capacity(steps + 1);
        let mut u = vec![1.0; grid.n];
        m_table.push(u.clone());
        let mut scratch = vec![0.0; grid.n];
        for _ in 0..steps {
            obs_prop.step(&mut u, &mut scratch, dt_act);
            m_table.push(u.clone());
        }

        let max_f = eigen.f.values.iter().cloned().fold(0.0f64, f64::max);
        let floor = 1e-8 * max_f;
        let dx = grid.dx();
        let mut rev_flux = vec![0.0; grid.n];
        for (i, flux) in rev_flux.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..grid.n {
                acc += eigen.f.values[j] * jump_table.w.at(j, i);
            }
            *flux = params.gamma * acc * dx;
        }
        Ok(SpineContext {
            params: params.clone(),
            eigen: eigen.clone(),
            grid,
            horizon,
            floor,
            killing_shift: (params.growth_bound - lambda).max(0.0) + 0.1,
            dt: dt_act,
            m_table,
            jump_table,
            rev_flux,
            density_prop,
        })
    }

    pub fn jump_table(&self) -> &JumpTable {
        &self.jump_table
    }

    /// m_t(x) by linear interpolation in time and space.
    pub fn m_value(&self, t: f64, x: f64) -> f64 {
        let values = self.m_values(t);
        self.grid.interp(&values, x)
    }

    /// Nodal m_t values, linearly interpolated between table steps.
    pub fn m_values(&self, t: f64) -> Vec<f64> {
        if t <= 0.0 || self.m_table.len() == 1 {
            return self.m_table[0].clone();
        }
        let steps = self.m_table.len() - 1;
        let pos = (t / self.dt).min(steps as f64);
        let k = (pos.floor() as usize).min(steps - 1);
        let w = pos - k as f64;
        self.m_table[k]
            .iter()
            .zip(&self.m_table[k + 1])
            .map(|(a, b)| a * (1.0 - w) + b * w)
            .collect()
    }

    /// Grid quadrature of m_t F; equals lambda for every t by duality.
    pub fn mass_identity(&self, t: f64) -> f64 {
        let m = self.m_values(t);
        m.iter()
            .zip(&self.eigen.f.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.dx()
    }

    fn check_horizon(&self, t: f64) -> Result<(), SpineError> {
        if t > self.horizon + 1e-12 {
            return Err(SpineError::HorizonExceeded {
                requested: t,
                available: self.horizon,
            });
        }
        Ok(())
    }

    /// Density of the spinal marginal at time t for the size-biased start:
    /// m_{T-t}(x) F(x) / lambda on the grid.
    pub fn spine_marginal_density(&self, horizon: f64, t: f64) -> Result<DensityField, SpineError> {
        self.check_horizon(horizon)?;
        let m = self.m_values(horizon - t);
        let lambda = self.eigen.lambda;
        let values: Vec<f64> = m
            .iter()
            .zip(&self.eigen.f.values)
            .map(|(mi, fi)| mi * fi / lambda)
            .collect();
        Ok(DensityField::new(self.grid, values).expect("nonnegative by construction"))
    }

    /// Propagate the size-biased density through the adjoint spinal flow for
    /// time t and return the L1 distance to the predicted marginal.
    pub fn marginal_flow_residual(&self, horizon: f64, t: f64) -> Result<f64, SpineError> {
        self.check_horizon(horizon)?;
        let lambda = self.eigen.lambda;
        // start density m_T F / lambda, divided pointwise by m_T
        let mut u: Vec<f64> = self.eigen.f.values.iter().map(|fi| fi / lambda).collect();
        self.density_prop.propagate(&mut u, t, self.dt)?;
        let m_end = self.m_values(horizon - t);
        let mut l1 = 0.0;
        for i in 0..self.grid.n {
            let target = m_end[i] * (self.eigen.f.values[i] / lambda);
            l1 += (m_end[i] * u[i] - target).abs();
        }
        Ok(l1 * self.grid.dx())
    }

    fn draw_start(&self, init: SpineInit, horizon: f64, rng: &mut impl Rng) -> f64 {
        match init {
            SpineInit::Point(x) => x,
            SpineInit::Stationary => self
                .eigen
                .f
                .sample_inverse_cdf(rng.random_range(0.0..1.0)),
            SpineInit::Biased => {
                let m = self.m_values(horizon);
                let density: Vec<f64> = m
                    .iter()
                    .zip(&self.eigen.f.values)
                    .map(|(mi, fi)| mi * fi)
                    .collect();
                sample_grid_density(&self.grid, &density, rng.random_range(0.0..1.0))
            }
        }
    }

    /// Rejection sampler for the growth-weighted path law: simulate the free
    /// motion, kill at rate C - (h - lambda) >= 0, keep survivors. Accepted
    /// paths are exact draws; the acceptance rate estimates
    /// exp(-C T) m_T(start).
    pub fn sample_spine_forward(
        &self,
        init: SpineInit,
        horizon: f64,
        n_target: usize,
        max_trials: u64,
        rng: &mut impl Rng,
    ) -> Result<(Vec<TraitPath>, ForwardSpineStats), SpineError> {
        self.check_horizon(horizon)?;
        let lambda = self.eigen.lambda;
        let rate_floor = 1e-4;
        let mut accepted = Vec::with_capacity(n_target);
        let mut trials = 0u64;
        while accepted.len() < n_target {
            if trials >= max_trials {
                let rate = accepted.len() as f64 / trials as f64;
                return Err(SpineError::AcceptanceTooLow {
                    rate,
                    floor: rate_floor,
                    accepted: accepted.len() as u64,
                    trials,
                });
            }
            trials += 1;
            let x0 = self.draw_start(init, horizon, rng);
            let path = sample_motion(&self.params, x0, horizon, rng);
            let log_survival = growth_weight_exponent(&self.params, lambda, &path)
                - self.killing_shift * horizon;
            debug_assert!(log_survival <= 1e-9, "survival probability above one");
            if rng.random_range(0.0..1.0) < log_survival.exp() {
                accepted.push(path);
            }
        }
        let stats = ForwardSpineStats {
            trials,
            accepted: accepted.len() as u64,
            acceptance_rate: accepted.len() as f64 / trials as f64,
        };
        Ok((accepted, stats))
    }

    /// Run a fixed number of rejection trials and report the acceptance
    /// statistics; the rate estimates exp(-C T) m_T(start).
    pub fn acceptance_probe(
        &self,
        init: SpineInit,
        horizon: f64,
        trials: u64,
        rng: &mut impl Rng,
    ) -> Result<ForwardSpineStats, SpineError> {
        self.check_horizon(horizon)?;
        let lambda = self.eigen.lambda;
        let mut accepted = 0u64;
        for _ in 0..trials {
            let x0 = self.draw_start(init, horizon, rng);
            let path = sample_motion(&self.params, x0, horizon, rng);
            let log_survival = growth_weight_exponent(&self.params, lambda, &path)
                - self.killing_shift * horizon;
            if rng.random_range(0.0..1.0) < log_survival.exp() {
                accepted += 1;
            }
        }
        Ok(ForwardSpineStats {
            trials,
            accepted,
            acceptance_rate: accepted as f64 / trials as f64,
        })
    }

    /// Reversed-jump intensity at an off-grid state: interpolate the flux and
    /// the stationary profile separately, then take the floored ratio.
    pub fn reversed_intensity(&self, x: f64) -> f64 {
        let flux = self.grid.interp(&self.rev_flux, x);
        let f = self.grid.interp(&self.eigen.f.values, x).max(self.floor);
        flux / f
    }

    /// One reversed-process path from `x0`; `None` when the path leaves the
    /// region where the stationary profile is above the floor.
    pub fn sample_reversed_from(
        &self,
        x0: f64,
        horizon: f64,
        rng: &mut impl Rng,
    ) -> Option<TraitPath> {
        let slope = -self.params.rho;
        let lookahead = 0.1f64;
        let mut path = TraitPath::constant_free(0.0, horizon, x0, slope);
        let mut t = 0.0;
        let mut x = x0;
        if self.below_floor(x) {
            return None;
        }
        let mut guard = 0u64;
        while t < horizon {
            guard += 1;
            if guard > 10_000_000 {
                return None;
            }
            let window_end = (t + lookahead).min(horizon);
            let bound = self.intensity_bound(x, slope, window_end - t);
            if bound <= 0.0 {
                t = window_end;
                x = path.value(t);
                if self.below_floor(x) {
                    return None;
                }
                continue;
            }
            let u: f64 = rng.random_range(0.0..1.0);
            let candidate = t + -(1.0 - u).ln() / bound;
            if candidate >= window_end {
                t = window_end;
                x = path.value(t);
                if self.below_floor(x) {
                    return None;
                }
                continue;
            }
            let x_cand = x + slope * (candidate - t);
            if self.below_floor(x_cand) {
                return None;
            }
            let kappa = self.reversed_intensity(x_cand);
            if rng.random_range(0.0..1.0) * bound < kappa {
                // jump target from density F(y) m(y, x) in y
                let col = column_slice(&self.jump_table, x_cand);
                let density: Vec<f64> = col
                    .iter()
                    .zip(&self.eigen.f.values)
                    .map(|(w, f)| w * f)
                    .collect();
                let y = sample_grid_density(&self.grid, &density, rng.random_range(0.0..1.0));
                if self.below_floor(y) {
                    return None;
                }
                path.push_jump(candidate, y);
                x = y;
            } else {
                x = x_cand;
            }
            t = candidate;
        }
        Some(path)
    }

    /// Batch of reversed-process paths started from the stationary profile
    /// F / lambda. Errors if more than 1% of attempts exit the floor region.
    pub fn sample_reversed(
        &self,
        n_paths: usize,
        horizon: f64,
        rng: &mut impl Rng,
    ) -> Result<Vec<TraitPath>, SpineError> {
        self.sample_reversed_with_stats(n_paths, horizon, rng)
            .map(|(paths, _)| paths)
    }

    pub fn sample_reversed_with_stats(
        &self,
        n_paths: usize,
        horizon: f64,
        rng: &mut impl Rng,
    ) -> Result<(Vec<TraitPath>, ReversedStats), SpineError> {
        let mut paths = Vec::with_capacity(n_paths);
        let mut exits = 0u64;
        let mut attempts = 0u64;
        while paths.len() < n_paths {
            attempts += 1;
            let x0 = self
                .eigen
                .f
                .sample_inverse_cdf(rng.random_range(0.0..1.0));
            match self.sample_reversed_from(x0, horizon, rng) {
                Some(p) => paths.push(p),
                None => exits += 1,
            }
            if attempts >= 100 && exits as f64 / attempts as f64 > 0.01 {
                return Err(SpineError::FloorExit {
                    rate: exits as f64 / attempts as f64,
                    exits,
                    attempts,
                });
            }
        }
        Ok((
            paths,
            ReversedStats {
                attempts,
                floor_exits: exits,
            },
        ))
    }

    fn below_floor(&self, x: f64) -> bool {
        self.grid.interp(&self.eigen.f.values, x) < self.floor
    }

    /// Upper bound of the reversed intensity along a drift segment, from the
    /// covering grid nodes (one node of padding on each side).
    fn intensity_bound(&self, x: f64, slope: f64, dt: f64) -> f64 {
        let x1 = x + slope * dt;
        let (lo, hi) = if x <= x1 { (x, x1) } else { (x1, x) };
        let i_lo = self.grid.nearest(lo).saturating_sub(1);
        let i_hi = (self.grid.nearest(hi) + 1).min(self.grid.n - 1);
        let mut max_flux = 0.0f64;
        let mut min_f = f64::INFINITY;
        for i in i_lo..=i_hi {
            max_flux = max_flux.max(self.rev_flux[i]);
            min_f = min_f.min(self.eigen.f.values[i]);
        }
        max_flux / min_f.max(self.floor)
    }

    /// Grid application of the reversed generator to nodal values `phi` with
    /// analytic derivative values `dphi`: -rho phi' + biased jump part.
    pub fn reversed_generator_apply(&self, phi: &[f64], dphi: &[f64]) -> Vec<f64> {
        let dx = self.grid.dx();
        let gamma = self.params.gamma;
        let mut out = vec![0.0; self.grid.n];
        for i in 0..self.grid.n {
            let mut jump = 0.0;
            for j in 0..self.grid.n {
                jump += (phi[j] - phi[i]) * self.eigen.f.values[j] * self.jump_table.w.at(j, i);
            }
            let f = self.eigen.f.values[i].max(self.floor);
            out[i] = -self.params.rho * dphi[i] + gamma * dx * jump / f;
        }
        out
    }
}
