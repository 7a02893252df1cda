//! One-level, multilevel and infinite-level concatenated exponents.

use serde::{Deserialize, Serialize};

use super::{optimize, Engine, ExponentPoint, RateRegime, RhoProfile};
use crate::channel::Nats;
use crate::error::{Error, Result};

/// Which factor multiplies `E0` inside the one-level objective
/// `(1 - r_o) * max_rho (-rho R / r_o + bracket(E0))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bracket {
    /// `E0 [1 - (1 + r_o) E0 / 2]`, the fountain one-level exponent.
    Fountain,
    /// `E0 [1 - E0]`, its lower bound.
    Tilde,
    /// Plain `E0`, the classical concatenation exponent.
    Forney,
}

impl Bracket {
    pub fn apply(self, e0: f64, ro: f64) -> f64 {
        match self {
            Bracket::Fountain => e0 * (1.0 - 0.5 * (1.0 + ro) * e0),
            Bracket::Tilde => e0 * (1.0 - e0),
            Bracket::Forney => e0,
        }
    }
}

/// Inner rate `R / r_o`, with `0 / 0` read as zero.
pub(crate) fn inner_rate(rate: f64, ro: f64) -> f64 {
    if rate == 0.0 {
        0.0
    } else {
        rate / ro
    }
}

/// `max_rho (-rho x + E0 (1 - E0))`, the penalized single-level exponent.
pub(crate) fn e_fl_penalized(prof: &RhoProfile<'_>, x: f64) -> (f64, f64) {
    prof.maximize(|rho, e| -rho * x + e * (1.0 - e))
}

impl Engine {
    /// `(1 - r_o) * max_rho(...)` at fixed input and outer rate.
    pub(crate) fn one_level_inner(prof: &RhoProfile<'_>, rate: f64, ro: f64, bracket: Bracket) -> (f64, f64) {
        let ri = inner_rate(rate, ro);
        let (rho, v) = prof.maximize(|rho, e| -rho * ri + bracket.apply(e, ro));
        (rho, (1.0 - ro) * v)
    }

    fn one_level_family(&self, rate: Nats, bracket: Bracket) -> Result<ExponentPoint> {
        if self.check_rate(rate)? == RateRegime::AtCapacity {
            return Ok(self.zero_point(rate));
        }
        let r = rate.get();
        let lo = self.ro_min(r);
        let g = &self.grid;
        self.best_over_px(rate, |prof| {
            let (ro, v) = optimize::maximize(
                |ro| Self::one_level_inner(prof, r, ro, bracket).1,
                lo,
                1.0,
                g.ro_steps,
                g.refine_rounds,
                g.xtol(),
            );
            let (rho, _) = Self::one_level_inner(prof, r, ro, bracket);
            Some((v, rho, ro))
        })
    }

    /// One-level concatenated fountain exponent `E_Fc(R)`.
    pub fn one_level(&self, rate: Nats) -> Result<ExponentPoint> {
        self.one_level_family(rate, Bracket::Fountain)
    }

    /// Lower bound `E~_Fc(R)` with the `[1 - E0]` bracket.
    pub fn one_level_lower_bound(&self, rate: Nats) -> Result<ExponentPoint> {
        self.one_level_family(rate, Bracket::Tilde)
    }

    /// Classical one-level concatenation exponent `E_c(R)`.
    pub fn forney(&self, rate: Nats) -> Result<ExponentPoint> {
        self.one_level_family(rate, Bracket::Forney)
    }

    /// `m`-level exponent: `(1 - r_o) m / sum_i 1 / E_FLp(i R / (m r_o))`.
    pub fn multilevel(&self, rate: Nats, m: usize) -> Result<ExponentPoint> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be >= 1".into()));
        }
        let nodes: Vec<f64> = (1..=m).map(|i| i as f64 / m as f64).collect();
        self.harmonic_family(rate, &nodes, true)
    }

    /// Infinite-level exponent, the integral form evaluated by the composite
    /// midpoint rule with `quad_steps` nodes.
    pub fn infinite_level(&self, rate: Nats, quad_steps: usize) -> Result<ExponentPoint> {
        if quad_steps < 256 {
            return Err(Error::InvalidArgument(format!("quad_steps must be >= 256, got {quad_steps}")));
        }
        self.harmonic_family(rate, &midpoints(quad_steps), true)
    }

    /// Comparison curve for the infinite-level exponent: the same integral
    /// with the unpenalized single-level exponent. This is an analogue of
    /// the classical Blokh-Zyablov exponent, not the published curve.
    pub fn blokh_zyablov_analog(&self, rate: Nats, quad_steps: usize) -> Result<ExponentPoint> {
        if quad_steps < 256 {
            return Err(Error::InvalidArgument(format!("quad_steps must be >= 256, got {quad_steps}")));
        }
        self.harmonic_family(rate, &midpoints(quad_steps), false)
    }

    /// Maximizes `(1 - r_o) / mean_k (1 / E(t_k R / r_o))` over `r_o` and
    /// `p_X`, where `t_k` are the fractions in `nodes`.
    fn harmonic_family(&self, rate: Nats, nodes: &[f64], penalized: bool) -> Result<ExponentPoint> {
        if self.check_rate(rate)? == RateRegime::AtCapacity {
            return Ok(self.zero_point(rate));
        }
        let r = rate.get();
        let lo = self.ro_min(r);
        let g = &self.grid;
        let level = |prof: &RhoProfile<'_>, x: f64| {
            if penalized {
                e_fl_penalized(prof, x)
            } else {
                prof.maximize(|rho, e| -rho * x + e)
            }
        };
        self.best_over_px(rate, |prof| {
            let h = |ro: f64| {
                if ro >= 1.0 {
                    return 0.0;
                }
                let ri = inner_rate(r, ro);
                let mut inv = 0.0;
                for &t in nodes {
                    let e = level(prof, t * ri).1;
                    if !(e > 0.0) {
                        return f64::NEG_INFINITY;
                    }
                    inv += 1.0 / e;
                }
                (1.0 - ro) * nodes.len() as f64 / inv
            };
            let (ro, v) = optimize::maximize(h, lo, 1.0, g.ro_steps, g.refine_rounds, g.xtol());
            if !v.is_finite() {
                return None;
            }
            let rho = level(prof, inner_rate(r, ro)).0;
            Some((v, rho, ro))
        })
    }
}

fn midpoints(q: usize) -> Vec<f64> {
    (0..q).map(|k| (k as f64 + 0.5) / q as f64).collect()
}
