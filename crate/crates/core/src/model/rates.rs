//! Birth and death rate families.
//!
//! Two parametric families are supported: constant birth with polynomial
//! death (the standard confining family, where the growth rate h = b - d
//! tends to -inf), and constant birth/death (a flat-growth family used by
//! tests with closed-form population dynamics, which does not confine).

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Coefficients in increasing degree: `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0)
    }

    /// Upper bound of |p| on any interval contained in [-m, m].
    pub fn abs_bound(&self, m: f64) -> f64 {
        let m = m.abs();
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * m.powi(k as i32))
            .sum()
    }
}

/// Specification of the per-individual birth rate b and natural death rate d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSpec {
    /// Constant birth rate, polynomial death rate. The death polynomial must
    /// be nonnegative-leading of even degree >= 2 so that h -> -inf.
    BirthDeathPoly { b: f64, d: Polynomial },
    /// Constant birth and death rates; h = b - d is flat. Test family: the
    /// population is not confined and the standing assumptions on h fail.
    Constant { b: f64, d: f64 },
}

/// 5-point Gauss-Legendre nodes/weights on [-1, 1]; exact for degree <= 9.
const GL5: [(f64, f64); 5] = [
    (-0.906179845938664, 0.236926885056189),
    (-0.538469310105683, 0.478628670499366),
    (0.0, 0.568888888888889),
    (0.538469310105683, 0.478628670499366),
    (0.906179845938664, 0.236926885056189),
];

impl RateSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            RateSpec::BirthDeathPoly { b, d } => {
                if *b < 0.0 || !b.is_finite() {
                    return Err(ModelError::InvalidRates("birth rate must be >= 0".into()));
                }
                let deg = d.degree();
                if deg > 9 {
                    return Err(ModelError::InvalidRates(
                        "death polynomial degree above 9 is not supported".into(),
                    ));
                }
                if deg < 2 || deg % 2 != 0 || d.0[deg] <= 0.0 {
                    return Err(ModelError::InvalidRates(
                        "death polynomial needs a positive leading term of even degree >= 2"
                            .into(),
                    ));
                }
                if self.growth(0.0) <= 0.0 {
                    return Err(ModelError::InvalidRates(format!(
                        "h(0) = {} must be positive",
                        self.growth(0.0)
                    )));
                }
                // d must be a genuine rate on the region the dynamics can
                // reach; negativity anywhere inside the confined zone is a
                // configuration error.
                let x_neg = self.confinement_radius();
                for i in 0..=2000 {
                    let x = -x_neg + 2.0 * x_neg * i as f64 / 2000.0;
                    if d.eval(x) < -1e-12 {
                        return Err(ModelError::InvalidRates(format!(
                            "death rate is negative at x = {x}"
                        )));
                    }
                }
                Ok(())
            }
            RateSpec::Constant { b, d } => {
                if *b < 0.0 || *d < 0.0 || !b.is_finite() || !d.is_finite() {
                    return Err(ModelError::InvalidRates(
                        "constant rates must be finite and >= 0".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn birth(&self, x: f64) -> f64 {
        match self {
            RateSpec::BirthDeathPoly { b, .. } => *b,
            RateSpec::Constant { b, .. } => {
                let _ = x;
                *b
            }
        }
    }

    pub fn death(&self, x: f64) -> f64 {
        match self {
            RateSpec::BirthDeathPoly { d, .. } => d.eval(x).max(0.0),
            RateSpec::Constant { d, .. } => *d,
        }
    }

    /// Natural growth rate h(x) = b(x) - d(x).
    pub fn growth(&self, x: f64) -> f64 {
        self.birth(x) - self.death_signed(x)
    }

    /// Growth rate shifted by an eigenvalue: h(x) - lambda.
    pub fn growth_shifted(&self, lambda: f64, x: f64) -> f64 {
        self.growth(x) - lambda
    }

    // Death polynomial without the max(., 0) clamp; growth uses the raw
    // polynomial so that h is itself polynomial (needed by the exact segment
    // integrals). `validate` rejects specs where the clamp would ever bind.
    fn death_signed(&self, x: f64) -> f64 {
        match self {
            RateSpec::BirthDeathPoly { d, .. } => d.eval(x),
            RateSpec::Constant { d, .. } => *d,
        }
    }

    /// Upper bound for b on the segment traced by drifting from `x0` for
    /// `dt` time units at velocity `rho`.
    pub fn birth_bound(&self, x0: f64, rho: f64, dt: f64) -> f64 {
        let _ = (x0, rho, dt);
        match self {
            RateSpec::BirthDeathPoly { b, .. } => *b,
            RateSpec::Constant { b, .. } => *b,
        }
    }

    /// Upper bound for d on the same drift segment.
    pub fn death_bound(&self, x0: f64, rho: f64, dt: f64) -> f64 {
        match self {
            RateSpec::BirthDeathPoly { d, .. } => {
                let x1 = x0 + rho * dt;
                d.abs_bound(x0.abs().max(x1.abs()))
            }
            RateSpec::Constant { d, .. } => *d,
        }
    }

    /// Exact integral of h - lambda along the drift segment
    /// s in [0, dt] |-> x0 + rho s. Gauss-Legendre, exact for the supported
    /// polynomial degrees.
    pub fn growth_shifted_integral(&self, lambda: f64, x0: f64, rho: f64, dt: f64) -> f64 {
        match self {
            RateSpec::Constant { b, d } => (b - d - lambda) * dt,
            RateSpec::BirthDeathPoly { .. } => {
                let half = 0.5 * dt;
                let mid = half;
                let mut acc = 0.0;
                for (node, weight) in GL5 {
                    let s = mid + half * node;
                    acc += weight * self.growth(x0 + rho * s);
                }
                acc * half - lambda * dt
            }
        }
    }

    /// Supremum of h over the real line (the constant c of the standing
    /// assumptions). Exact for the flat family; scan plus ternary refinement
    /// for the polynomial family.
    pub fn growth_sup(&self) -> f64 {
        match self {
            RateSpec::Constant { b, d } => b - d,
            RateSpec::BirthDeathPoly { .. } => {
                let radius = self.confinement_radius();
                let samples = 20_000;
                let mut best_i = 0;
                let mut best = f64::NEG_INFINITY;
                for i in 0..=samples {
                    let x = -radius + 2.0 * radius * i as f64 / samples as f64;
                    let v = self.growth(x);
                    if v > best {
                        best = v;
                        best_i = i;
                    }
                }
                let step = 2.0 * radius / samples as f64;
                let x_at = |i: i64| -radius + step * i as f64;
                let (mut lo, mut hi) = (x_at(best_i as i64 - 1), x_at(best_i as i64 + 1));
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if self.growth(m1) < self.growth(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                self.growth(0.5 * (lo + hi)).max(best)
            }
        }
    }

    /// Radius beyond which the polynomial death term provably dominates all
    /// lower-order contributions (and h is decreasing in |x|).
    pub fn confinement_radius(&self) -> f64 {
        match self {
            RateSpec::Constant { .. } => 1.0,
            RateSpec::BirthDeathPoly { b, d } => {
                let deg = d.degree();
                let lead = d.0[deg];
                let lower: f64 = d.0[..deg].iter().map(|c| c.abs()).sum();
                ((lower + b.abs() + 1.0) / lead + 1.0).max(2.0)
            }
        }
    }

    /// Largest integer q >= 1 with h(x) <= -|x|^q for all |x| beyond some
    /// threshold, together with the smallest such threshold. `None` for the
    /// flat family (h does not diverge).
    pub fn decay_exponent(&self) -> Option<DecayExponent> {
        let (deg, lead) = match self {
            RateSpec::Constant { .. } => return None,
            RateSpec::BirthDeathPoly { d, .. } => (d.degree(), d.0[d.degree()]),
        };
        let q = if lead > 1.0 { deg } else { deg - 1 };
        let q = q.max(1);
        // radius inside which h(x) + |x|^q can still be positive
        let radius = self.confinement_radius() + q as f64;
        let excess = |x: f64| self.growth(x) + x.abs().powi(q as i32);
        let samples = 200_000;
        let mut threshold = 0.0f64;
        for side in [-1.0, 1.0] {
            let mut last_positive: Option<f64> = None;
            for i in 0..=samples {
                let x = side * radius * i as f64 / samples as f64;
                if excess(x) > 0.0 {
                    last_positive = Some(x);
                }
            }
            if let Some(mut lo) = last_positive {
                // bisect the sign change just beyond the last positive point
                let mut hi = lo + side * radius / samples as f64;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if excess(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                threshold = threshold.max(hi.abs());
            }
        }
        Some(DecayExponent { q, x0: threshold })
    }

    /// Infimum of h over the open interval (-x1, x1), used by the
    /// eigenvalue-positivity certificate.
    pub fn growth_inf_on(&self, x1: f64) -> f64 {
        match self {
            RateSpec::Constant { b, d } => b - d,
            RateSpec::BirthDeathPoly { .. } => {
                let samples = 20_000;
                let mut best = f64::INFINITY;
                let mut best_i = 0;
                for i in 0..=samples {
                    let x = -x1 + 2.0 * x1 * i as f64 / samples as f64;
                    let v = self.growth(x);
                    if v < best {
                        best = v;
                        best_i = i;
                    }
                }
                let step = 2.0 * x1 / samples as f64;
                let lo = (-x1 + step * (best_i as f64 - 1.0)).max(-x1);
                let hi = (-x1 + step * (best_i as f64 + 1.0)).min(x1);
                let (mut lo, mut hi) = (lo, hi);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if self.growth(m1) > self.growth(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                self.growth(0.5 * (lo + hi)).min(best)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayExponent {
    pub q: usize,
    /// Smallest threshold with h(x) <= -|x|^q for all |x| >= x0.
    pub x0: f64,
}

/// The canonical confining configuration: b = 1, d(x) = x^2 / 2.
pub fn quadratic_example() -> RateSpec {
    RateSpec::BirthDeathPoly {
        b: 1.0,
        d: Polynomial(vec![0.0, 0.0, 0.5]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_matches_hand_values() {
        let r = quadratic_example();
        assert_eq!(r.growth(0.0), 1.0);
        assert_eq!(r.growth(2.0), -1.0);
        assert_eq!(r.growth_shifted(r.growth(1.3), 1.3), 0.0);
    }

    #[test]
    fn sup_of_quadratic_growth_is_at_origin() {
        let r = quadratic_example();
        assert!((r.growth_sup() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decay_exponent_of_quadratic_example() {
        // d has leading coefficient 1/2 <= 1, so q = deg - 1 = 1, and the
        // threshold solves 1 - x^2/2 = -x, i.e. x = 1 + sqrt(3).
        let r = quadratic_example();
        let de = r.decay_exponent().unwrap();
        assert_eq!(de.q, 1);
        assert!((de.x0 - (1.0 + 3.0f64.sqrt())).abs() < 1e-6, "x0 = {}", de.x0);
    }

    #[test]
    fn death_bound_dominates_on_segment() {
        let r = quadratic_example();
        let (x0, rho, dt) = (1.2, -3.0, 0.7);
        let bound = r.death_bound(x0, rho, dt);
        for i in 0..=100 {
            let s = dt * i as f64 / 100.0;
            assert!(r.death(x0 + rho * s) <= bound + 1e-12);
        }
    }

    #[test]
    fn segment_integral_is_exact_for_quadratic() {
        let r = quadratic_example();
        let (x0, rho, dt, lambda) = (0.4, 0.25, 2.0, 0.9);
        // closed form of int_0^dt (1 - (x0 + rho s)^2 / 2 - lambda) ds
        let a = x0;
        let c = rho;
        let exact = (1.0 - lambda) * dt
            - 0.5 * (a * a * dt + a * c * dt * dt + c * c * dt * dt * dt / 3.0);
        let got = r.growth_shifted_integral(lambda, x0, rho, dt);
        assert!((got - exact).abs() < 1e-12, "got {got}, exact {exact}");
    }

    #[test]
    fn constant_family_reports_no_decay() {
        let r = RateSpec::Constant { b: 2.0, d: 0.5 };
        assert!(r.decay_exponent().is_none());
        assert_eq!(r.growth(123.0), 1.5);
    }

    #[test]
    fn validation_rejects_odd_or_negative_leading_death() {
        let bad = RateSpec::BirthDeathPoly {
            b: 1.0,
            d: Polynomial(vec![0.0, 1.0]),
        };
        assert!(bad.validate().is_err());
        let bad2 = RateSpec::BirthDeathPoly {
            b: 1.0,
            d: Polynomial(vec![0.0, 0.0, -0.5]),
        };
        assert!(bad2.validate().is_err());
    }

    #[test]
    fn inf_on_interval_hits_the_edge_for_concave_growth() {
        let r = quadratic_example();
        assert!((r.growth_inf_on(1.0) - 0.5).abs() < 1e-9);
    }
}
