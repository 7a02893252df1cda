//! Fountain error exponents by numerical optimization.
//!
//! Every exponent here is a maximum over some subset of the input
//! distribution `p_X`, the outer code rate `r_o` and Gallager's `rho`.
//! Continuous maxima are taken by grid search followed by golden-section
//! refinement (see [`OptimizerGrid`]). [`Engine`] caches the channel
//! capacity so that curves over many rates reuse it; the free functions
//! are thin wrappers that build an engine per call.

mod concatenated;
pub mod curve;
pub(crate) mod optimize;
mod saddle;
mod unknown;

use serde::{Deserialize, Serialize};

use crate::channel::{self, Channel, InputDistribution, Nats};
use crate::error::{Error, Result};

pub use concatenated::Bracket;
pub use saddle::{adjusted_exponent_ez, closed_form_witness_z0, phi, SaddleConfig, SaddleResult};
pub use unknown::suboptimal_outer_rate;

/// Capacity tolerance used to anchor the `r_o >= R / C_F` constraint.
const CAPACITY_TOL: f64 = 1e-13;

/// Relative slack under which a rate counts as sitting exactly at capacity.
const AT_CAPACITY_SLACK: f64 = 1e-12;

/// How the input distribution is chosen when an exponent maximizes over it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PxMode {
    /// Uniform for symmetric channels, simplex search otherwise.
    #[default]
    Auto,
    Uniform,
    Search,
}

/// Discretization of the continuous maximizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerGrid {
    /// Grid points over `rho` in `[0, 1]`.
    pub rho_steps: usize,
    /// Grid points over `r_o` in `[R / C_F, 1]`.
    pub ro_steps: usize,
    /// Grid/zoom passes before the golden-section refinement.
    pub refine_rounds: usize,
    /// Target accuracy of exponent values, in nats.
    pub tol: f64,
    pub px_mode: PxMode,
    /// Number of starts for the simplex search over `p_X`.
    pub px_starts: usize,
}

impl Default for OptimizerGrid {
    fn default() -> Self {
        OptimizerGrid {
            rho_steps: 128,
            ro_steps: 128,
            refine_rounds: 1,
            tol: 1e-6,
            px_mode: PxMode::Auto,
            px_starts: 8,
        }
    }
}

impl OptimizerGrid {
    pub fn validate(&self) -> Result<()> {
        if self.rho_steps < 64 || self.ro_steps < 64 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 64 steps per axis (rho {}, r_o {})",
                self.rho_steps, self.ro_steps
            )));
        }
        if self.refine_rounds < 1 {
            return Err(Error::InvalidArgument("refine_rounds must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.px_starts < 1 {
            return Err(Error::InvalidArgument("px_starts must be >= 1".into()));
        }
        Ok(())
    }

    /// Argument tolerance of the golden-section stage. Exponents are smooth
    /// near their maxima, so value error scales with its square.
    pub(crate) fn xtol(&self) -> f64 {
        (self.tol * 1e-3).max(1e-14)
    }
}

/// An exponent value together with its maximizing arguments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub rate: Nats,
    pub value: Nats,
    pub witness_rho: f64,
    /// `1` for exponents without an outer code.
    pub witness_ro: f64,
    pub witness_px: InputDistribution,
}

/// `E0(rho)` for a fixed channel and input, sampled on the `rho` grid.
pub(crate) struct RhoProfile<'a> {
    ch: &'a Channel,
    px: Vec<f64>,
    rho: Vec<f64>,
    e0: Vec<f64>,
    rounds: usize,
    xtol: f64,
}

impl<'a> RhoProfile<'a> {
    pub(crate) fn new(ch: &'a Channel, px: &[f64], grid: &OptimizerGrid) -> Self {
        let n = grid.rho_steps.max(3);
        let rho: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let e0 = rho.iter().map(|&r| channel::e0_raw(ch, px, r)).collect();
        RhoProfile {
            ch,
            px: px.to_vec(),
            rho,
            e0,
            rounds: grid.refine_rounds,
            xtol: grid.xtol(),
        }
    }

    pub(crate) fn e0(&self, rho: f64) -> f64 {
        channel::e0_raw(self.ch, &self.px, rho)
    }

    /// Maximizes `obj(rho, E0(rho))` over `rho` in `[0, 1]`.
    pub(crate) fn maximize<F>(&self, obj: F) -> (f64, f64)
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut idx = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, (&r, &e)) in self.rho.iter().zip(&self.e0).enumerate() {
            let v = obj(r, e);
            if v > best {
                best = v;
                idx = i;
            }
        }
        let n = self.rho.len();
        let a = self.rho[idx.saturating_sub(1)];
        let b = self.rho[(idx + 1).min(n - 1)];
        let f = |r: f64| obj(r, self.e0(r));
        let refined = if self.rounds > 1 {
            optimize::maximize(f, a, b, n, self.rounds - 1, self.xtol)
        } else {
            let mut f = f;
            optimize::golden_max(&mut f, a, b, self.xtol)
        };
        if refined.1 > best {
            refined
        } else {
            (self.rho[idx], best)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum RateRegime {
    Interior,
    AtCapacity,
}

/// Exponent evaluator bound to one channel and grid.
#[derive(Clone, Debug)]
pub struct Engine {
    ch: Channel,
    grid: OptimizerGrid,
    capacity: f64,
    capacity_px: InputDistribution,
}

impl Engine {
    pub fn new(ch: &Channel, grid: OptimizerGrid) -> Result<Self> {
        grid.validate()?;
        let (c, px) = channel::capacity(ch, CAPACITY_TOL)?;
        Ok(Engine {
            ch: ch.clone(),
            grid,
            capacity: c.get(),
            capacity_px: px,
        })
    }

    pub fn channel(&self) -> &Channel {
        &self.ch
    }

    pub fn grid(&self) -> &OptimizerGrid {
        &self.grid
    }

    pub fn capacity(&self) -> Nats {
        Nats(self.capacity)
    }

    pub fn capacity_px(&self) -> &InputDistribution {
        &self.capacity_px
    }

    pub(crate) fn profile(&self, px: &[f64]) -> RhoProfile<'_> {
        RhoProfile::new(&self.ch, px, &self.grid)
    }

    pub(crate) fn check_rate(&self, rate: Nats) -> Result<RateRegime> {
        let r = rate.get();
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("rate must be finite and >= 0, got {r}")));
        }
        let c = self.capacity;
        if r > c * (1.0 + AT_CAPACITY_SLACK) + f64::MIN_POSITIVE {
            return Err(Error::RateNotAchievable { rate: r, capacity: c });
        }
        if r >= c * (1.0 - AT_CAPACITY_SLACK) {
            return Ok(RateRegime::AtCapacity);
        }
        Ok(RateRegime::Interior)
    }

    pub(crate) fn zero_point(&self, rate: Nats) -> ExponentPoint {
        ExponentPoint {
            rate,
            value: Nats(0.0),
            witness_rho: 0.0,
            witness_ro: 1.0,
            witness_px: self.capacity_px.clone(),
        }
    }

    /// Lower end of the feasible outer-rate interval `[R / C_F, 1]`.
    pub(crate) fn ro_min(&self, rate: f64) -> f64 {
        if rate == 0.0 {
            0.0
        } else {
            (rate / self.capacity).min(1.0)
        }
    }

    fn uses_uniform(&self) -> bool {
        match self.grid.px_mode {
            PxMode::Uniform => true,
            PxMode::Search => false,
            PxMode::Auto => self.ch.is_symmetric(),
        }
    }

    /// Maximizes `eval` over input distributions. `eval` returns
    /// `(value, rho*, ro*)` or `None` when nothing is feasible for that input.
    pub(crate) fn best_over_px<F>(&self, rate: Nats, eval: F) -> Result<ExponentPoint>
    where
        F: Fn(&RhoProfile<'_>) -> Option<(f64, f64, f64)>,
    {
        let n = self.ch.input_size();
        let px = if self.uses_uniform() {
            vec![1.0 / n as f64; n]
        } else {
            let seeds = vec![vec![1.0 / n as f64; n], self.capacity_px.probs().to_vec()];
            let value = |p: &[f64]| {
                eval(&self.profile(p))
                    .map(|t| t.0)
                    .unwrap_or(f64::NEG_INFINITY)
            };
            optimize::simplex_ascent(value, n, &seeds, self.grid.px_starts).0
        };
        let prof = self.profile(&px);
        let (value, rho, ro) = eval(&prof).ok_or_else(|| {
            Error::Infeasible(format!("no feasible outer rate at R = {}", rate.get()))
        })?;
        let s: f64 = px.iter().sum();
        let px = InputDistribution::new(px.iter().map(|p| p / s).collect())
            .unwrap_or_else(|_| self.capacity_px.clone());
        Ok(ExponentPoint {
            rate,
            value: Nats(value.max(0.0)),
            witness_rho: rho,
            witness_ro: ro,
            witness_px: px,
        })
    }

    /// `max_rho (-rho R + E0(rho, p_X))` for a fixed input distribution.
    pub fn e_fl(&self, rate: Nats, px: &InputDistribution) -> Result<ExponentPoint> {
        if !(rate.get() >= 0.0) {
            return Err(Error::InvalidArgument(format!("rate must be >= 0, got {}", rate.get())));
        }
        check_px(&self.ch, px)?;
        let prof = self.profile(px.probs());
        let r = rate.get();
        let (rho, v) = prof.maximize(|rho, e| -rho * r + e);
        Ok(ExponentPoint {
            rate,
            value: Nats(v.max(0.0)),
            witness_rho: rho,
            witness_ro: 1.0,
            witness_px: px.clone(),
        })
    }

    /// Random-coding fountain exponent, `E_FL` maximized over `p_X`.
    pub fn random_fountain(&self, rate: Nats) -> Result<ExponentPoint> {
        if self.check_rate(rate)? == RateRegime::AtCapacity {
            return Ok(self.zero_point(rate));
        }
        let r = rate.get();
        self.best_over_px(rate, |prof| {
            let (rho, v) = prof.maximize(|rho, e| -rho * r + e);
            Some((v, rho, 1.0))
        })
    }
}

pub(crate) fn check_px(ch: &Channel, px: &InputDistribution) -> Result<()> {
    if px.len() != ch.input_size() {
        return Err(Error::InvalidDistribution(format!(
            "length {} does not match channel input size {}",
            px.len(),
            ch.input_size()
        )));
    }
    Ok(())
}

pub fn e_fl(rate: Nats, ch: &Channel, px: &InputDistribution, grid: &OptimizerGrid) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.e_fl(rate, px)
}

pub fn random_fountain_exponent(rate: Nats, ch: &Channel, grid: &OptimizerGrid) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.random_fountain(rate)
}

pub fn one_level_exponent(rate: Nats, ch: &Channel, grid: &OptimizerGrid) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.one_level(rate)
}

pub fn one_level_lower_bound(rate: Nats, ch: &Channel, grid: &OptimizerGrid) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.one_level_lower_bound(rate)
}

pub fn forney_exponent(rate: Nats, ch: &Channel, grid: &OptimizerGrid) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.forney(rate)
}

pub fn multilevel_exponent(rate: Nats, ch: &Channel, m: usize, grid: &OptimizerGrid) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.multilevel(rate, m)
}

pub fn infinite_level_exponent(
    rate: Nats,
    ch: &Channel,
    grid: &OptimizerGrid,
    quad_steps: usize,
) -> Result<ExponentPoint> {
    Engine::new(ch, grid.clone())?.infinite_level(rate, quad_steps)
}

pub fn saddle_one_level(
    rate: Nats,
    ch: &Channel,
    px: &InputDistribution,
    ro: f64,
    sconf: &SaddleConfig,
) -> Result<SaddleResult> {
    Engine::new(ch, OptimizerGrid::default())?.saddle_one_level(rate, px, ro, sconf)
}

pub fn e_fc_gamma(
    gamma: f64,
    ch: &Channel,
    px: &InputDistribution,
    ro: f64,
    grid: &OptimizerGrid,
) -> Result<Nats> {
    Engine::new(ch, grid.clone())?.e_fc_gamma(gamma, px, ro)
}

pub fn e_fcs(gamma: f64, ch: &Channel, px: &InputDistribution, grid: &OptimizerGrid) -> Result<Nats> {
    Engine::new(ch, grid.clone())?.e_fcs(gamma, px)
}
