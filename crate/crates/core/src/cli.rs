//! Experiment orchestration: dispatch a configuration to the module
//! operations, write CSV/JSON artifacts plus a digest manifest, and map
//! failures onto the process exit classes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{
    ConfigError, ExperimentConfig, ExperimentKind, InitConfig, ModeConfig, SpineDirection,
};
use crate::ibm::{
    label_string, sample_uniform_lineage, simulate, EventKind, IbmError, Mode,
    PopulationHistory, SimOptions, TraitPath,
};
use crate::model::{DensityField, EigenPair, Grid, ModelParams};
use crate::operators::{duality_residual_with, fk_dual_propagators, fk_duality_residual_with, GeneratorMatrix};
use crate::pde::{solve_stationary, PdeError, StationaryInfo};
use crate::rng::{child_stream, stream_from_seed};
use crate::spine::{SpineContext, SpineError, SpineInit};
use crate::stats::{reversed_lineage_comparison, StatsError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Statistical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Statistical(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}
impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<IbmError> for CliError {
    fn from(e: IbmError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<SpineError> for CliError {
    fn from(e: SpineError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<crate::operators::OperatorError> for CliError {
    fn from(e: crate::operators::OperatorError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

/// Outcome of a run: the manifest plus an optional statistical failure that
/// the caller should surface through the exit code after artifacts are on
/// disk.
pub struct RunOutcome {
    pub manifest: Manifest,
    pub statistical_failure: Option<String>,
}

struct Emitter {
    out_dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Emitter {
    fn new(out_dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Emitter {
            out_dir: out_dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        std::fs::write(self.out_dir.join(name), content)?;
        let mut hasher = Sha256::new();
        hasher.update(content.as_bytes());
        self.entries.push(ManifestEntry {
            name: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
            bytes: content.len(),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(mut self, experiment: &str, seed: u64) -> Result<Manifest, CliError> {
        self.entries.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            experiment: experiment.to_string(),
            seed,
            files: self.entries.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Config(format!("serialize manifest: {e}")))?;
        text.push('\n');
        std::fs::write(self.out_dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

/// Run one experiment; everything the run produces lands in `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<RunOutcome, CliError> {
    let seed = seed_override
        .or(config.seed)
        .ok_or_else(|| CliError::Config("seed is required (config `seed` or --seed)".into()))?;
    let params = config.build_params(base_dir)?;
    let grid = config.build_grid(&params)?;
    params
        .check_grid(&grid, config.kernel_tolerance)
        .map_err(|e| CliError::Config(format!("model/grid check failed: {e}")))?;

    let mut emitter = Emitter::new(out_dir)?;
    let mut resolved = config.clone();
    resolved.seed = Some(seed);
    emitter.json("resolved_config.json", &resolved)?;

    let mut statistical_failure = None;
    let kind_name = match &config.experiment {
        ExperimentKind::Simulate {
            horizon,
            mode,
            replicates,
            init,
            lineages,
            svg,
        } => {
            run_simulate(
                &mut emitter,
                &params,
                grid,
                seed,
                *horizon,
                *mode,
                *replicates,
                *init,
                *lineages,
                *svg,
            )?;
            "simulate"
        }
        ExperimentKind::Stationary { tol } => {
            run_stationary(&mut emitter, &params, grid, *tol)?;
            "stationary"
        }
        ExperimentKind::Spine {
            direction,
            n_paths,
            horizon,
            table_dt,
            output_dt,
        } => {
            run_spine(
                &mut emitter,
                &params,
                grid,
                seed,
                *direction,
                *n_paths,
                *horizon,
                *table_dt,
                *output_dt,
            )?;
            "spine"
        }
        ExperimentKind::Validate {
            horizon,
            replicates,
            checkpoints,
            tolerance_w1,
            n_spine,
            min_survivors,
        } => {
            statistical_failure = run_validate(
                &mut emitter,
                &params,
                grid,
                seed,
                *horizon,
                *replicates,
                checkpoints,
                *tolerance_w1,
                *n_spine,
                *min_survivors,
            )?;
            "validate"
        }
        ExperimentKind::Duality { pairs, time, dt } => {
            run_duality(&mut emitter, &params, grid, seed, *pairs, *time, *dt)?;
            "duality"
        }
    };

    let manifest = emitter.finish(kind_name, seed)?;
    Ok(RunOutcome {
        manifest,
        statistical_failure,
    })
}

fn stationary_pair(
    params: &ModelParams,
    grid: Grid,
    tol: f64,
) -> Result<(EigenPair, StationaryInfo), CliError> {
    Ok(solve_stationary(params, grid, tol)?)
}

fn resolve_init(
    init: InitConfig,
    params: &ModelParams,
    grid: Grid,
) -> Result<(DensityField, f64), CliError> {
    match init {
        InitConfig::Stationary => {
            let (pair, _) = stationary_pair(params, grid, 1e-12)?;
            let lambda = pair.lambda;
            Ok((pair.f, lambda))
        }
        InitConfig::Gaussian {
            center,
            sigma,
            mass,
        } => {
            // frozen-mode competition still defaults to the stationary level
            let (_, info) = stationary_pair(params, grid, 1e-12)?;
            Ok((
                DensityField::gaussian_bump(grid, center, sigma, mass),
                info.lambda,
            ))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    emitter: &mut Emitter,
    params: &ModelParams,
    grid: Grid,
    seed: u64,
    horizon: f64,
    mode: ModeConfig,
    replicates: u64,
    init: InitConfig,
    lineages: usize,
    svg: bool,
) -> Result<(), CliError> {
    let (init_field, lambda) = resolve_init(init, params, grid)?;
    let mode = match mode {
        ModeConfig::Nonlinear => Mode::Nonlinear,
        ModeConfig::Frozen => Mode::Frozen { lambda },
    };
    let histories: Vec<Result<PopulationHistory, IbmError>> = (0..replicates)
        .into_par_iter()
        .map(|r| simulate(params, horizon, seed + r, mode, &init_field, SimOptions::default()))
        .collect();

    #[derive(Serialize)]
    struct RunSummary {
        seed: u64,
        replicate: u64,
        mode: String,
        horizon: f64,
        k: u64,
        initial_population: usize,
        final_population: usize,
        events: usize,
        extinct: bool,
    }

    for (r, history) in histories.into_iter().enumerate() {
        let history = history?;
        let suffix = if replicates > 1 {
            format!("_r{r:03}")
        } else {
            String::new()
        };
        emitter.write(&format!("events{suffix}.csv"), &events_csv(&history)?)?;
        emitter.write(
            &format!("snapshot_T{suffix}.csv"),
            &snapshot_csv(&history, horizon),
        )?;
        let mut rng = child_stream(history.seed, &[], 4);
        let mut fan = Vec::new();
        for _ in 0..lineages {
            match sample_uniform_lineage(&history, horizon, &mut rng) {
                Ok(path) => fan.push(path),
                Err(IbmError::Extinct) => break,
                Err(e) => return Err(e.into()),
            }
        }
        emitter.write(&format!("lineages{suffix}.csv"), &lineages_csv(&fan))?;
        if svg {
            emitter.write(
                &format!("lineages{suffix}.svg"),
                &lineage_fan_svg(&history, &fan, horizon),
            )?;
        }
        emitter.json(
            &format!("run{suffix}.json"),
            &RunSummary {
                seed: history.seed,
                replicate: r as u64,
                mode: match history.mode {
                    Mode::Nonlinear => "nonlinear".into(),
                    Mode::Frozen { lambda } => format!("frozen({lambda})"),
                },
                horizon,
                k: history.k_scale,
                initial_population: history.initial_count,
                final_population: history.population_at(horizon),
                events: history.events.len(),
                extinct: history.population_at(horizon) == 0,
            },
        )?;
    }
    Ok(())
}

fn events_csv(history: &PopulationHistory) -> Result<String, CliError> {
    let mut out = String::from("time,kind,id,parent,trait\n");
    for e in &history.events {
        let rec = &history.individuals[e.subject];
        let kind = match e.kind {
            EventKind::Birth => "birth",
            EventKind::Death => "death",
            EventKind::Mutation => "mutation",
        };
        let parent = rec
            .parent
            .map(|p| label_string(&history.individuals[p].label))
            .unwrap_or_default();
        let trait_value = match e.kind {
            EventKind::Birth => rec.birth_trait,
            _ => history.trait_at(e.subject, e.time).unwrap_or(f64::NAN),
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            e.time,
            kind,
            label_string(&rec.label),
            parent,
            trait_value
        )
        .expect("string write");
    }
    Ok(out)
}

fn snapshot_csv(history: &PopulationHistory, t: f64) -> String {
    let mut out = String::from("x,weight\n");
    for (x, w) in history.snapshot(t) {
        writeln!(out, "{x},{w}").expect("string write");
    }
    out
}

fn lineages_csv(paths: &[TraitPath]) -> String {
    let mut out = String::from("lineage_id,t,value\n");
    for (id, path) in paths.iter().enumerate() {
        writeln!(out, "{id},{},{}", path.t0, path.x0).expect("string write");
        for &(t, v) in &path.jumps {
            writeln!(out, "{id},{t},{}", path.left_limit(t)).expect("string write");
            writeln!(out, "{id},{t},{v}").expect("string write");
        }
        writeln!(out, "{id},{},{}", path.t1, path.value(path.t1)).expect("string write");
    }
    out
}

fn run_stationary(
    emitter: &mut Emitter,
    params: &ModelParams,
    grid: Grid,
    tol: f64,
) -> Result<(), CliError> {
    let (pair, info) = stationary_pair(params, grid, tol)?;
    let mut csv = String::from("x,F\n");
    for (x, v) in grid.points().zip(&pair.f.values) {
        writeln!(csv, "{x},{v}").expect("string write");
    }
    emitter.write("F.csv", &csv)?;

    #[derive(Serialize)]
    struct Summary {
        lambda: f64,
        residual: f64,
        iterations: usize,
        outer_mass_fraction: f64,
    }
    emitter.json(
        "summary.json",
        &Summary {
            lambda: info.lambda,
            residual: info.residual_l1,
            iterations: info.iterations,
            outer_mass_fraction: info.outer_mass_fraction,
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn run_spine(
    emitter: &mut Emitter,
    params: &ModelParams,
    grid: Grid,
    seed: u64,
    direction: SpineDirection,
    n_paths: usize,
    horizon: f64,
    table_dt: f64,
    output_dt: f64,
) -> Result<(), CliError> {
    let (pair, _) = stationary_pair(params, grid, 1e-12)?;
    let table_horizon = match direction {
        SpineDirection::Forward => horizon,
        SpineDirection::Reversed => 0.0,
    };
    let ctx = SpineContext::new(params, &pair, table_horizon, table_dt)?;
    let mut rng = stream_from_seed(seed);

    #[derive(Serialize)]
    struct SpineStats {
        direction: String,
        n_paths: usize,
        horizon: f64,
        trials: Option<u64>,
        acceptance_rate: Option<f64>,
        floor_exits: Option<u64>,
        final_mean: f64,
        final_sd: f64,
    }

    let (paths, trials, acceptance_rate, floor_exits) = match direction {
        SpineDirection::Forward => {
            let (paths, stats) = ctx.sample_spine_forward(
                SpineInit::Biased,
                horizon,
                n_paths,
                (n_paths as u64).saturating_mul(10_000),
                &mut rng,
            )?;
            (paths, Some(stats.trials), Some(stats.acceptance_rate), None)
        }
        SpineDirection::Reversed => {
            let (paths, stats) = ctx.sample_reversed_with_stats(n_paths, horizon, &mut rng)?;
            (paths, None, None, Some(stats.floor_exits))
        }
    };

    let mut csv = String::from("path_id,t,value\n");
    let steps = (horizon / output_dt).ceil().max(1.0) as usize;
    for (id, path) in paths.iter().enumerate() {
        for k in 0..=steps {
            let t = horizon * k as f64 / steps as f64;
            writeln!(csv, "{id},{t},{}", path.value(t)).expect("string write");
        }
    }
    emitter.write("paths.csv", &csv)?;

    let finals: Vec<f64> = paths.iter().map(|p| p.value(horizon)).collect();
    let mean = finals.iter().sum::<f64>() / finals.len().max(1) as f64;
    let var = finals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / finals.len().max(1) as f64;
    emitter.json(
        "stats.json",
        &SpineStats {
            direction: match direction {
                SpineDirection::Forward => "forward".into(),
                SpineDirection::Reversed => "reversed".into(),
            },
            n_paths: paths.len(),
            horizon,
            trials,
            acceptance_rate,
            floor_exits,
            final_mean: mean,
            final_sd: var.sqrt(),
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn run_validate(
    emitter: &mut Emitter,
    params: &ModelParams,
    grid: Grid,
    seed: u64,
    horizon: f64,
    replicates: u64,
    checkpoints: &[f64],
    tolerance_w1: f64,
    n_spine: usize,
    min_survivors: usize,
) -> Result<Option<String>, CliError> {
    let (pair, info) = stationary_pair(params, grid, 1e-12)?;
    let ctx = SpineContext::new(params, &pair, 0.0, 1e-3)?;
    let init = pair.f.clone();

    // replicates are generated lazily in chunks: parallel within a chunk,
    // at most one chunk of histories alive at a time
    let chunk = 25u64;
    let mut sim_error: Option<IbmError> = None;
    let sim_error_ref = &mut sim_error;
    let histories = (0..replicates.div_ceil(chunk)).flat_map(|c| {
        let lo = c * chunk;
        let hi = ((c + 1) * chunk).min(replicates);
        let results: Vec<Result<PopulationHistory, IbmError>> = (lo..hi)
            .into_par_iter()
            .map(|r| {
                simulate(
                    params,
                    horizon,
                    seed + r,
                    Mode::Nonlinear,
                    &init,
                    SimOptions::default(),
                )
            })
            .collect();
        results.into_iter()
    });
    let mut reference_rng = stream_from_seed(seed ^ 0x5851_f42d_4c95_7f2d);
    let histories = histories.filter_map(|r| match r {
        Ok(h) => Some(h),
        Err(e) => {
            *sim_error_ref = Some(e);
            None
        }
    });
    let report = reversed_lineage_comparison(
        histories,
        &ctx,
        horizon,
        checkpoints,
        n_spine,
        min_survivors,
        &mut reference_rng,
    );
    if let Some(e) = sim_error {
        return Err(e.into());
    }
    let report = report?;

    #[derive(Serialize)]
    struct CheckpointRow {
        checkpoint: f64,
        w1: f64,
        ks: f64,
        calibration: f64,
        tolerance: f64,
        pass: bool,
    }
    #[derive(Serialize)]
    struct Report {
        lambda: f64,
        survivors: usize,
        extinct: usize,
        tolerance_w1: f64,
        checkpoints: Vec<CheckpointRow>,
    }

    let rows: Vec<CheckpointRow> = report
        .checkpoints
        .iter()
        .map(|c| CheckpointRow {
            checkpoint: c.checkpoint,
            w1: c.wasserstein,
            ks: c.ks,
            calibration: c.calibration,
            tolerance: tolerance_w1,
            pass: c.wasserstein <= tolerance_w1,
        })
        .collect();

    let mut csv = String::from("checkpoint,w1,ks,tolerance\n");
    for row in &rows {
        writeln!(csv, "{},{},{},{}", row.checkpoint, row.w1, row.ks, row.tolerance)
            .expect("string write");
    }
    emitter.write("checkpoints.csv", &csv)?;

    let failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("checkpoint {}: w1 {} > {}", r.checkpoint, r.w1, r.tolerance))
        .collect();
    emitter.json(
        "report.json",
        &Report {
            lambda: info.lambda,
            survivors: report.survivors,
            extinct: report.extinct,
            tolerance_w1,
            checkpoints: rows,
        },
    )?;

    Ok(if failures.is_empty() {
        None
    } else {
        Some(failures.join("; "))
    })
}

fn run_duality(
    emitter: &mut Emitter,
    params: &ModelParams,
    grid: Grid,
    seed: u64,
    pairs: usize,
    time: f64,
    dt: f64,
) -> Result<(), CliError> {
    let (l, lstar) = GeneratorMatrix::dual_pair(params, grid);
    let (obs_prop, den_prop) = fk_dual_propagators(params, grid, 0.0);
    let mut rng = stream_from_seed(seed);
    let mut csv = String::from("pair,generator_residual,bound\n");
    let mut max_gen = 0.0f64;
    use rand::Rng;
    let mut worst_fk = 0.0f64;
    for p in 0..pairs {
        let mut f: Vec<f64> = vec![0.0; grid.n];
        let mut g: Vec<f64> = vec![0.0; grid.n];
        for i in 0..grid.n {
            if grid.in_inner_half(grid.x(i)) {
                f[i] = rng.random_range(-1.0..1.0);
                g[i] = rng.random_range(-1.0..1.0);
            }
        }
        let f_sup = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let g_l1: f64 = g.iter().map(|v| v.abs()).sum::<f64>() * grid.dx();
        let r = duality_residual_with(&l, &lstar, &f, &g).abs();
        let bound = 1e-8 * f_sup * g_l1;
        max_gen = max_gen.max(r / bound.max(f64::MIN_POSITIVE));
        writeln!(csv, "{p},{r},{bound}").expect("string write");
        if p < 10 {
            let fkr =
                fk_duality_residual_with(&obs_prop, &den_prop, &f, &g, time, dt)?.abs();
            let c = params.growth_bound;
            let fb = 1e-6 * ((c * time).exp() + 1.0) * f_sup * g_l1;
            worst_fk = worst_fk.max(fkr / fb.max(f64::MIN_POSITIVE));
        }
    }
    emitter.write("residuals.csv", &csv)?;

    #[derive(Serialize)]
    struct DualityReport {
        pairs: usize,
        time: f64,
        dt: f64,
        /// worst generator residual relative to its bound (must be <= 1)
        max_generator_residual_ratio: f64,
        /// worst semigroup residual relative to its bound (must be <= 1)
        max_semigroup_residual_ratio: f64,
    }
    emitter.json(
        "duality.json",
        &DualityReport {
            pairs,
            time,
            dt,
            max_generator_residual_ratio: max_gen,
            max_semigroup_residual_ratio: worst_fk,
        },
    )
}

/// Minimal lineage-fan plot: all recorded individuals in grey, the sampled
/// ancestral lineages in black, the sampling time as a vertical line.
fn lineage_fan_svg(history: &PopulationHistory, fan: &[TraitPath], horizon: f64) -> String {
    let (width, height, pad) = (900.0, 560.0, 40.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for rec in &history.individuals {
        lo = lo.min(rec.birth_trait);
        hi = hi.max(rec.birth_trait);
        for &(_, v) in &rec.jumps {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || lo == hi {
        lo = -1.0;
        hi = 1.0;
    }
    let margin = 0.05 * (hi - lo);
    let (lo, hi) = (lo - margin, hi + margin);
    let sx = |t: f64| pad + (width - 2.0 * pad) * t / horizon;
    let sy = |x: f64| height - pad - (height - 2.0 * pad) * (x - lo) / (hi - lo);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .expect("string write");
    writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>")
        .expect("string write");

    for rec in history.individuals.iter().take(4000) {
        let end = rec.death_time.unwrap_or(horizon).min(horizon);
        let mut points = vec![(rec.birth_time, rec.birth_trait)];
        for &(t, v) in &rec.jumps {
            if t > end {
                break;
            }
            points.push((t, v));
        }
        let mut d = String::new();
        let mut first = true;
        let mut prev: Option<(f64, f64)> = None;
        for &(t, v) in &points {
            if let Some((pt, pv)) = prev {
                let arrive = pv + history.rho * (t - pt);
                write!(d, " L{:.2},{:.2}", sx(t), sy(arrive)).expect("string write");
                write!(d, " M{:.2},{:.2}", sx(t), sy(v)).expect("string write");
            }
            if first {
                write!(d, "M{:.2},{:.2}", sx(t), sy(v)).expect("string write");
                first = false;
            }
            prev = Some((t, v));
        }
        if let Some((pt, pv)) = prev {
            let arrive = pv + history.rho * (end - pt);
            write!(d, " L{:.2},{:.2}", sx(end), sy(arrive)).expect("string write");
        }
        writeln!(
            svg,
            "<path d=\"{d}\" stroke=\"#bbbbbb\" stroke-width=\"0.6\" fill=\"none\"/>"
        )
        .expect("string write");
    }

    for path in fan {
        let mut d = String::new();
        write!(d, "M{:.2},{:.2}", sx(path.t0), sy(path.x0)).expect("string write");
        for &(t, v) in &path.jumps {
            write!(d, " L{:.2},{:.2}", sx(t), sy(path.left_limit(t))).expect("string write");
            write!(d, " M{:.2},{:.2}", sx(t), sy(v)).expect("string write");
        }
        write!(d, " L{:.2},{:.2}", sx(path.t1), sy(path.value(path.t1))).expect("string write");
        writeln!(
            svg,
            "<path d=\"{d}\" stroke=\"black\" stroke-width=\"1.4\" fill=\"none\"/>"
        )
        .expect("string write");
    }

    writeln!(
        svg,
        "<line x1=\"{x}\" y1=\"{pad}\" x2=\"{x}\" y2=\"{y}\" stroke=\"#cc0000\" stroke-width=\"1\"/>",
        x = sx(horizon),
        y = height - pad
    )
    .expect("string write");
    svg.push_str("</svg>\n");
    svg
}
