//! Distribution distances and the end-to-end lineage comparisons.

use rand::Rng;
use thiserror::Error;

use crate::ibm::{sample_uniform_lineage, IbmError, PopulationHistory};
use crate::model::DensityField;
use crate::rng::child_stream;
use crate::spine::{SpineContext, SpineError};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("only {survivors} non-extinct replicates, need at least {minimum}")]
    TooFewSurvivors { survivors: usize, minimum: usize },
    #[error(transparent)]
    Spine(#[from] SpineError),
    #[error(transparent)]
    Ibm(#[from] IbmError),
}

/// Weighted point sample on the real line.
#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    pub values: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl EmpiricalSample {
    pub fn uniform(values: Vec<f64>) -> Self {
        EmpiricalSample {
            values,
            weights: None,
        }
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), weights.len());
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        EmpiricalSample {
            values,
            weights: Some(weights),
        }
    }

    /// Grid density as a weighted sample (node value times cell width).
    pub fn from_density(f: &DensityField) -> Self {
        let dx = f.grid.dx();
        EmpiricalSample {
            values: f.grid.points().collect(),
            weights: Some(f.values.iter().map(|v| v * dx).collect()),
        }
    }

    pub fn from_snapshot(points: &[(f64, f64)]) -> Self {
        EmpiricalSample {
            values: points.iter().map(|(x, _)| *x).collect(),
            weights: Some(points.iter().map(|(_, w)| *w).collect()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn normalized(&self) -> Vec<(f64, f64)> {
        let n = self.values.len();
        let mut pairs: Vec<(f64, f64)> = match &self.weights {
            None => self.values.iter().map(|v| (*v, 1.0 / n as f64)).collect(),
            Some(w) => {
                let total: f64 = w.iter().sum();
                self.values
                    .iter()
                    .zip(w)
                    .map(|(v, wi)| (*v, wi / total))
                    .collect()
            }
        };
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }
}

/// Exact 1-Wasserstein distance between two weighted samples, computed as
/// the area between the two empirical CDFs.
pub fn wasserstein1(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let pa = a.normalized();
    let pb = b.normalized();
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut cdf_diff = 0.0f64;
    let mut last_x = f64::NAN;
    let mut total = 0.0;
    while ia < pa.len() || ib < pb.len() {
        let xa = pa.get(ia).map(|p| p.0).unwrap_or(f64::INFINITY);
        let xb = pb.get(ib).map(|p| p.0).unwrap_or(f64::INFINITY);
        let x = xa.min(xb);
        if last_x.is_finite() && x > last_x {
            total += cdf_diff.abs() * (x - last_x);
        }
        while ia < pa.len() && pa[ia].0 == x {
            cdf_diff += pa[ia].1;
            ia += 1;
        }
        while ib < pb.len() && pb[ib].0 == x {
            cdf_diff -= pb[ib].1;
            ib += 1;
        }
        last_x = x;
    }
    total
}

/// Two-sample Kolmogorov-Smirnov statistic (sup CDF distance), exact.
pub fn ks_distance(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let pa = a.normalized();
    let pb = b.normalized();
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut cdf_diff = 0.0f64;
    let mut sup = 0.0f64;
    while ia < pa.len() || ib < pb.len() {
        let xa = pa.get(ia).map(|p| p.0).unwrap_or(f64::INFINITY);
        let xb = pb.get(ib).map(|p| p.0).unwrap_or(f64::INFINITY);
        let x = xa.min(xb);
        while ia < pa.len() && pa[ia].0 == x {
            cdf_diff += pa[ia].1;
            ia += 1;
        }
        while ib < pb.len() && pb[ib].0 == x {
            cdf_diff -= pb[ib].1;
            ib += 1;
        }
        sup = sup.max(cdf_diff.abs());
    }
    sup
}

/// Two-sample KS acceptance threshold at the 1% level.
pub fn ks_threshold_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[derive(Debug, Clone)]
pub struct CheckpointComparison {
    pub checkpoint: f64,
    pub wasserstein: f64,
    pub ks: f64,
    /// 3x the distance between two independent reversed-sampler batches of
    /// the same size as the lineage sample
    pub calibration: f64,
}

#[derive(Debug, Clone)]
pub struct LineageComparisonReport {
    pub checkpoints: Vec<CheckpointComparison>,
    pub survivors: usize,
    pub extinct: usize,
}

/// Compare reversed sampled lineages against the reversed-process sampler.
///
/// One uniformly sampled lineage per non-extinct history keeps the replicates
/// independent; each lineage is reversed and evaluated at the checkpoints,
/// and the marginals are matched against `n_spine` reversed-process paths
/// started from the stationary profile. The per-history sampling stream is
/// derived from the history's own seed, so the report does not depend on the
/// order in which histories are supplied.
pub fn reversed_lineage_comparison<I>(
    histories: I,
    ctx: &SpineContext,
    horizon: f64,
    checkpoints: &[f64],
    n_spine: usize,
    min_survivors: usize,
    rng: &mut impl Rng,
) -> Result<LineageComparisonReport, StatsError>
where
    I: IntoIterator<Item = PopulationHistory>,
{
    let mut lineage_values: Vec<Vec<f64>> = vec![Vec::new(); checkpoints.len()];
    let mut survivors = 0usize;
    let mut extinct = 0usize;
    for history in histories {
        let mut pick_rng = child_stream(history.seed, &[], 3);
        match sample_uniform_lineage(&history, horizon, &mut pick_rng) {
            Ok(path) => {
                survivors += 1;
                let reversed = path.reversed(horizon);
                for (k, &s) in checkpoints.iter().enumerate() {
                    lineage_values[k].push(reversed.value(s));
                }
            }
            Err(IbmError::Extinct) => extinct += 1,
            Err(other) => return Err(other.into()),
        }
    }
    if survivors < min_survivors {
        return Err(StatsError::TooFewSurvivors {
            survivors,
            minimum: min_survivors,
        });
    }

    let spine_paths = ctx.sample_reversed(n_spine, horizon, rng)?;
    let calib_a = ctx.sample_reversed(survivors, horizon, rng)?;
    let calib_b = ctx.sample_reversed(survivors, horizon, rng)?;

    let mut out = Vec::with_capacity(checkpoints.len());
    for (k, &s) in checkpoints.iter().enumerate() {
        let lineage = EmpiricalSample::uniform(lineage_values[k].clone());
        let spine =
            EmpiricalSample::uniform(spine_paths.iter().map(|p| p.value(s)).collect());
        let ca = EmpiricalSample::uniform(calib_a.iter().map(|p| p.value(s)).collect());
        let cb = EmpiricalSample::uniform(calib_b.iter().map(|p| p.value(s)).collect());
        out.push(CheckpointComparison {
            checkpoint: s,
            wasserstein: wasserstein1(&lineage, &spine),
            ks: ks_distance(&lineage, &spine),
            calibration: 3.0 * wasserstein1(&ca, &cb),
        });
    }
    Ok(LineageComparisonReport {
        checkpoints: out,
        survivors,
        extinct,
    })
}

/// Grid check of the spinal marginal flow: propagate the biased density
/// m_T F / lambda through the adjoint spinal evolution for time `t` and
/// return the L1 distance to m_{T-t} F / lambda.
pub fn marginal_check_spine(ctx: &SpineContext, horizon: f64, t: f64) -> Result<f64, SpineError> {
    ctx.marginal_flow_residual(horizon, t)
}
