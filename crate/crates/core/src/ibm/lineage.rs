//! Ancestral lineage reconstruction from the genealogical record.

use rand::Rng;

use super::{IbmError, PopulationHistory, TraitPath};

/// The trait path of the closest ancestor of `index` alive at each time in
/// [0, t]: follows the parent chain from the root, switching to each child at
/// its birth time. Traits are continuous at birth handoffs, so the path's
/// only jumps are mutations.
pub fn extract_lineage(
    history: &PopulationHistory,
    index: usize,
    t: f64,
) -> Result<TraitPath, IbmError> {
    let rec = history
        .individuals
        .get(index)
        .ok_or(IbmError::UnknownId(index))?;
    let alive_until = rec.death_time.unwrap_or(history.final_time);
    if t < rec.birth_time || t > alive_until {
        return Err(IbmError::NotAlive { index, t });
    }

    // root-first ancestor chain
    let mut chain = vec![index];
    let mut cursor = index;
    while let Some(parent) = history.individuals[cursor].parent {
        chain.push(parent);
        cursor = parent;
    }
    chain.reverse();

    let root = &history.individuals[chain[0]];
    let mut path = TraitPath::constant_free(0.0, t, root.birth_trait, history.rho);
    for (pos, &anc) in chain.iter().enumerate() {
        let segment_end = chain
            .get(pos + 1)
            .map(|&next| history.individuals[next].birth_time)
            .unwrap_or(t);
        for &(jt, jv) in &history.individuals[anc].jumps {
            if jt <= t && jt < segment_end {
                path.push_jump(jt, jv);
            }
        }
    }
    Ok(path)
}

/// Uniform draw over the individuals alive at `t`, then its lineage.
pub fn sample_uniform_lineage<R: Rng + ?Sized>(
    history: &PopulationHistory,
    t: f64,
    rng: &mut R,
) -> Result<TraitPath, IbmError> {
    let alive = history.alive_at(t);
    if alive.is_empty() {
        return Err(IbmError::Extinct);
    }
    let pick = alive[rng.random_range(0..alive.len())];
    extract_lineage(history, pick, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ibm::{simulate, Mode, SimOptions};
    use crate::model::rates::quadratic_example;
    use crate::model::{DensityField, Grid, ModelParams, MutationKernel};
    use crate::rng::stream_from_seed;

    fn history() -> PopulationHistory {
        let params = ModelParams::new(
            quadratic_example(),
            0.6,
            0.01,
            MutationKernel::uniform_window(0.3).unwrap(),
            150,
        )
        .unwrap();
        let grid = Grid::new(-3.0, 3.0, 301).unwrap();
        let init = DensityField::gaussian_bump(grid, 0.0, 0.4, 1.0);
        simulate(&params, 5.0, 17, Mode::Nonlinear, &init, SimOptions::default()).unwrap()
    }

    /// Naive oracle: evaluate the lineage by walking parent links for each
    /// query time independently.
    fn lineage_value_naive(h: &PopulationHistory, index: usize, t: f64, s: f64) -> f64 {
        let _ = t;
        let mut cursor = index;
        loop {
            let rec = &h.individuals[cursor];
            if rec.birth_time <= s {
                return h.trait_at(cursor, s).unwrap();
            }
            cursor = rec.parent.expect("root is born at time zero");
        }
    }

    #[test]
    fn root_lineage_without_jumps_is_a_drift_line() {
        let params = ModelParams::new(
            quadratic_example(),
            0.0,
            0.05,
            MutationKernel::uniform_window(0.3).unwrap(),
            50,
        )
        .unwrap();
        let grid = Grid::new(-3.0, 3.0, 301).unwrap();
        let init = DensityField::gaussian_bump(grid, 0.0, 0.4, 1.0);
        let h = simulate(&params, 2.0, 3, Mode::Frozen { lambda: 0.0 }, &init, SimOptions::default())
            .unwrap();
        let path = extract_lineage(&h, 0, 2.0).unwrap();
        assert!(path.jumps.is_empty());
        let x0 = h.individuals[0].birth_trait;
        assert_eq!(path.value(0.0), x0);
        assert!((path.value(1.3) - (x0 + 0.05 * 1.3)).abs() < 1e-12);
    }

    #[test]
    fn lineage_matches_naive_rewalk() {
        let h = history();
        let t = 5.0;
        let alive = h.alive_at(t);
        assert!(!alive.is_empty());
        for &idx in alive.iter().take(25) {
            let path = extract_lineage(&h, idx, t).unwrap();
            for k in 0..=50 {
                let s = t * k as f64 / 50.0;
                let expect = lineage_value_naive(&h, idx, t, s);
                let got = path.value(s);
                assert!(
                    (got - expect).abs() < 1e-9,
                    "idx {idx}, s {s}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn child_lineage_follows_parent_before_birth() {
        let h = history();
        let child = h
            .individuals
            .iter()
            .position(|r| r.parent.is_some())
            .expect("some birth happened");
        let t_query = h.individuals[child]
            .death_time
            .unwrap_or(h.final_time)
            .min(h.final_time);
        let parent = h.individuals[child].parent.unwrap();
        let birth = h.individuals[child].birth_time;
        let path = extract_lineage(&h, child, t_query).unwrap();
        let s = 0.5 * birth;
        assert!((path.value(s) - lineage_value_naive(&h, parent, t_query, s)).abs() < 1e-9);
    }

    #[test]
    fn uniform_sampling_is_uniform_chi2() {
        let h = history();
        let t = 5.0;
        let alive = h.alive_at(t);
        let n_alive = alive.len();
        assert!(n_alive > 10);
        let draws = 10_000;
        let mut rng = stream_from_seed(5);
        let mut counts = vec![0usize; n_alive];
        for _ in 0..draws {
            let pick = alive[rng.random_range(0..alive.len())];
            let pos = alive.iter().position(|&a| a == pick).unwrap();
            counts[pos] += 1;
        }
        let expected = draws as f64 / n_alive as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // Wilson-Hilferty 99% quantile of chi2 with n_alive - 1 dof
        let k = (n_alive - 1) as f64;
        let z = 2.326_347_874;
        let q99 = k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
        assert!(chi2 <= q99, "chi2 {chi2} > {q99}");
    }

    #[test]
    fn unknown_or_dead_individuals_are_rejected() {
        let h = history();
        match extract_lineage(&h, h.individuals.len() + 5, 1.0) {
            Err(IbmError::UnknownId(_)) => {}
            other => panic!("expected UnknownId, got {other:?}"),
        }
        if let Some(dead) = h.individuals.iter().position(|r| r.death_time.is_some()) {
            let after = h.individuals[dead].death_time.unwrap() + 0.5;
            match extract_lineage(&h, dead, after.min(h.final_time)) {
                Err(IbmError::NotAlive { .. }) => {}
                other => panic!("expected NotAlive, got {other:?}"),
            }
        }
        // snapshot mass is N_t / K
        let t = 2.0;
        let mass: f64 = h.snapshot(t).iter().map(|(_, w)| w).sum();
        let expected = h.population_at(t) as f64 / h.k_scale as f64;
        assert!((mass - expected).abs() < 1e-12);
    }

    #[test]
    fn sampling_from_extinct_population_errors() {
        let params = ModelParams::new(
            crate::model::RateSpec::Constant { b: 0.0, d: 20.0 },
            0.0,
            0.0,
            MutationKernel::uniform_window(0.3).unwrap(),
            20,
        )
        .unwrap();
        let grid = Grid::new(-2.0, 2.0, 101).unwrap();
        let init = DensityField::gaussian_bump(grid, 0.0, 0.4, 0.5);
        let h = simulate(&params, 5.0, 2, Mode::Frozen { lambda: 0.0 }, &init, SimOptions::default())
            .unwrap();
        assert_eq!(h.population_at(5.0), 0);
        let mut rng = stream_from_seed(1);
        match sample_uniform_lineage(&h, 5.0, &mut rng) {
            Err(IbmError::Extinct) => {}
            other => panic!("expected Extinct, got {other:?}"),
        }
    }
}
