//! Piecewise-linear cadlag trait trajectories: constant drift between
//! mutation jumps, right-continuous at jumps, constant extension beyond the
//! final time on evaluation.

/// A trait trajectory on [t0, t1]: starts at `x0`, drifts at `slope`, and
/// restarts from a new value at each jump.
#[derive(Debug, Clone, PartialEq)]
pub struct TraitPath {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub slope: f64,
    /// (time, value immediately after the jump), strictly increasing times
    /// inside (t0, t1]
    pub jumps: Vec<(f64, f64)>,
}

impl TraitPath {
    pub fn constant_free(t0: f64, t1: f64, x0: f64, slope: f64) -> Self {
        TraitPath {
            t0,
            t1,
            x0,
            slope,
            jumps: Vec::new(),
        }
    }

    pub fn push_jump(&mut self, t: f64, value: f64) {
        debug_assert!(t > self.t0 && t <= self.t1);
        debug_assert!(self.jumps.last().is_none_or(|(lt, _)| t > *lt));
        self.jumps.push((t, value));
    }

    /// Right-continuous evaluation; clamps outside [t0, t1].
    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(self.t0, self.t1);
        let (anchor_t, anchor_x) = self
            .jumps
            .iter()
            .rev()
            .find(|(jt, _)| *jt <= t)
            .copied()
            .unwrap_or((self.t0, self.x0));
        anchor_x + self.slope * (t - anchor_t)
    }

    /// Left limit at `t` (equals `value` at continuity points).
    pub fn left_limit(&self, t: f64) -> f64 {
        let t = t.clamp(self.t0, self.t1);
        let (anchor_t, anchor_x) = self
            .jumps
            .iter()
            .rev()
            .find(|(jt, _)| *jt < t)
            .copied()
            .unwrap_or((self.t0, self.x0));
        anchor_x + self.slope * (t - anchor_t)
    }

    /// Left-limit time reversal on [0, horizon]: the reversed path takes the
    /// value of the left limit at `horizon - s`, ends at the original start
    /// value, and its drift slope is negated. A jump at time t from a to b
    /// becomes a jump at `horizon - t` from b to a.
    pub fn reversed(&self, horizon: f64) -> TraitPath {
        debug_assert!((self.t1 - horizon).abs() < 1e-12 && self.t0 == 0.0);
        let mut jumps = Vec::with_capacity(self.jumps.len());
        // walk original jumps from the last to the first; each original jump
        // time t_k maps to horizon - t_k, and the value after the reversed
        // jump is the original value just before t_k
        for idx in (0..self.jumps.len()).rev() {
            let (t, _) = self.jumps[idx];
            if t >= horizon {
                // a jump exactly at the horizon is invisible to left limits
                continue;
            }
            let before = if idx == 0 {
                self.x0 + self.slope * (t - self.t0)
            } else {
                let (pt, pv) = self.jumps[idx - 1];
                pv + self.slope * (t - pt)
            };
            jumps.push((horizon - t, before));
        }
        TraitPath {
            t0: 0.0,
            t1: horizon,
            x0: self.left_limit(horizon),
            slope: -self.slope,
            jumps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_only_path() {
        let p = TraitPath::constant_free(0.0, 2.0, 1.0, 0.5);
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(2.0), 2.0);
        assert_eq!(p.value(5.0), 2.0); // constant extension
    }

    #[test]
    fn jump_evaluation_is_cadlag() {
        let mut p = TraitPath::constant_free(0.0, 2.0, 0.0, 1.0);
        p.push_jump(1.0, 5.0);
        assert_eq!(p.value(1.0), 5.0);
        assert_eq!(p.left_limit(1.0), 1.0);
        assert_eq!(p.value(1.5), 5.5);
    }

    #[test]
    fn single_jump_reversal() {
        // jump at t0 = 0.75 from a = 0.75 to b = 3
        let mut p = TraitPath::constant_free(0.0, 2.0, 0.0, 1.0);
        p.push_jump(0.75, 3.0);
        let r = p.reversed(2.0);
        assert_eq!(r.slope, -1.0);
        // reversed value on [0, 1.25) tracks b's branch backwards
        assert_eq!(r.value(0.0), p.left_limit(2.0));
        assert!((r.value(1.25 - 1e-9) - 3.0).abs() < 1e-8);
        // after the reversed jump at 2 - 0.75 the value is a = 0.75
        assert_eq!(r.value(1.25), 0.75);
        // endpoint recovers the original start
        assert_eq!(r.value(2.0), p.value(0.0));
    }

    #[test]
    fn constant_path_reverses_to_itself() {
        let p = TraitPath::constant_free(0.0, 3.0, 1.5, 0.0);
        let r = p.reversed(3.0);
        for i in 0..=30 {
            let t = 3.0 * i as f64 / 30.0;
            assert_eq!(r.value(t), 1.5);
        }
    }

    #[test]
    fn double_reversal_recovers_values_at_continuity_points() {
        let mut p = TraitPath::constant_free(0.0, 2.0, 0.3, -0.7);
        p.push_jump(0.4, 1.0);
        p.push_jump(1.3, -2.0);
        let rr = p.reversed(2.0).reversed(2.0);
        for i in 0..=200 {
            let t = 2.0 * i as f64 / 200.0;
            if p.jumps.iter().any(|(jt, _)| (jt - t).abs() < 1e-9) {
                continue;
            }
            assert!((rr.value(t) - p.value(t)).abs() < 1e-12, "t = {t}");
        }
    }
}
