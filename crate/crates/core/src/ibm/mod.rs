//! Event-driven simulation of the interacting birth-death-mutation-drift
//! particle system with full genealogy.

mod engine;
mod lineage;
mod path;

pub use engine::{init_population, simulate, simulate_coupled, Population, SimOptions};
pub use lineage::{extract_lineage, sample_uniform_lineage};
pub use path::TraitPath;

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IbmError {
    #[error("initial population is empty (round(K * mass) = 0)")]
    EmptyInitial,
    #[error("population exploded: {population} individuals at t = {t:.4} (cap {cap})")]
    Explosion { population: u64, cap: u64, t: f64 },
    #[error("unknown individual index {0}")]
    UnknownId(usize),
    #[error("individual {index} is not alive at t = {t}")]
    NotAlive { index: usize, t: f64 },
    #[error("population extinct at the sampling time")]
    Extinct,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Ulam-Harris-Neveu label: root individuals are single integers, children
/// append their sibling rank to the parent's label.
pub type Label = Vec<u32>;

pub fn label_string(label: &Label) -> String {
    label
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// Which competition term the death rate carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// the live population pressure N_t / K
    Nonlinear,
    /// interactions frozen at a constant rate
    Frozen { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Birth,
    Death,
    Mutation,
}

#[derive(Debug, Clone, Copy)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    /// index into `PopulationHistory::individuals`; for births, the child
    pub subject: usize,
}

#[derive(Debug, Clone)]
pub struct IndividualRecord {
    pub label: Label,
    /// index of the parent record; roots have none
    pub parent: Option<usize>,
    pub birth_time: f64,
    pub death_time: Option<f64>,
    pub birth_trait: f64,
    /// mutation jumps (time, value right after), strictly increasing
    pub jumps: Vec<(f64, f64)>,
}

/// Full genealogical record of one run: an append-only individual table and
/// the time-ordered event ledger.
#[derive(Debug, Clone)]
pub struct PopulationHistory {
    pub mode: Mode,
    pub seed: u64,
    pub k_scale: u64,
    pub rho: f64,
    pub final_time: f64,
    pub individuals: Vec<IndividualRecord>,
    pub events: Vec<EventRecord>,
    /// number of root individuals (records 0..initial_count)
    pub initial_count: usize,
}

impl PopulationHistory {
    /// Trait of a recorded individual at a time inside its lifetime.
    pub fn trait_at(&self, index: usize, t: f64) -> Result<f64, IbmError> {
        let rec = self.individuals.get(index).ok_or(IbmError::UnknownId(index))?;
        let alive_until = rec.death_time.unwrap_or(self.final_time);
        if t < rec.birth_time || t > alive_until {
            return Err(IbmError::NotAlive { index, t });
        }
        let (anchor_t, anchor_x) = rec
            .jumps
            .iter()
            .rev()
            .find(|(jt, _)| *jt <= t)
            .copied()
            .unwrap_or((rec.birth_time, rec.birth_trait));
        Ok(anchor_x + self.rho * (t - anchor_t))
    }

    /// Indices of the individuals alive at time t (birth inclusive, death
    /// exclusive, matching right-continuity of the population count).
    pub fn alive_at(&self, t: f64) -> Vec<usize> {
        self.individuals
            .iter()
            .enumerate()
            .filter(|(_, r)| r.birth_time <= t && r.death_time.is_none_or(|d| d > t))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn population_at(&self, t: f64) -> usize {
        self.individuals
            .iter()
            .filter(|r| r.birth_time <= t && r.death_time.is_none_or(|d| d > t))
            .count()
    }

    /// Empirical trait measure at time t: (trait, weight 1/K) per individual.
    pub fn snapshot(&self, t: f64) -> Vec<(f64, f64)> {
        let w = 1.0 / self.k_scale as f64;
        self.alive_at(t)
            .into_iter()
            .map(|i| (self.trait_at(i, t).expect("alive individual"), w))
            .collect()
    }

    /// Population count reconstructed by replaying the event ledger.
    pub fn replay_population(&self, t: f64) -> i64 {
        let mut n = self.initial_count as i64;
        for e in &self.events {
            if e.time > t {
                break;
            }
            match e.kind {
                EventKind::Birth => n += 1,
                EventKind::Death => n -= 1,
                EventKind::Mutation => {}
            }
        }
        n
    }
}
