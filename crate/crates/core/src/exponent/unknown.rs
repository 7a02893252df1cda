//! Exponents parameterized by the normalized rate `gamma = R / I(p_X)`,
//! used when the outer rate must be chosen without knowing the channel.

use super::concatenated::Bracket;
use super::{check_px, optimize, Engine};
use crate::channel::{self, InputDistribution, Nats};
use crate::error::{Error, Result};

/// Channel-independent outer rate `(sqrt(gamma^2 + 8 gamma) - gamma) / 2`.
pub fn suboptimal_outer_rate(gamma: f64) -> f64 {
    ((gamma * gamma + 8.0 * gamma).sqrt() - gamma) / 2.0
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

impl Engine {
    /// One-level exponent at `R = gamma I(p_X)` for fixed `p_X` and `r_o`.
    pub fn e_fc_gamma(&self, gamma: f64, px: &InputDistribution, ro: f64) -> Result<Nats> {
        check_gamma(gamma)?;
        check_px(&self.ch, px)?;
        if !(ro >= gamma && ro <= 1.0) {
            return Err(Error::Infeasible(format!("r_o = {ro} outside [gamma, 1] = [{gamma}, 1]")));
        }
        if gamma == 1.0 || ro == 1.0 {
            return Ok(Nats(0.0));
        }
        let rate = gamma * channel::mutual_information_raw(&self.ch, px.probs());
        let prof = self.profile(px.probs());
        let (_, v) = Engine::one_level_inner(&prof, rate, ro, Bracket::Fountain);
        Ok(Nats(v.max(0.0)))
    }

    /// `max_{r_o in [gamma, 1]}` of [`Engine::e_fc_gamma`], with the maximizer.
    pub fn e_fc_gamma_opt(&self, gamma: f64, px: &InputDistribution) -> Result<(Nats, f64)> {
        check_gamma(gamma)?;
        check_px(&self.ch, px)?;
        if gamma == 1.0 {
            return Ok((Nats(0.0), 1.0));
        }
        let rate = gamma * channel::mutual_information_raw(&self.ch, px.probs());
        let prof = self.profile(px.probs());
        let g = &self.grid;
        let (ro, v) = optimize::maximize(
            |ro| Engine::one_level_inner(&prof, rate, ro, Bracket::Fountain).1,
            gamma,
            1.0,
            g.ro_steps,
            g.refine_rounds,
            g.xtol(),
        );
        Ok((Nats(v.max(0.0)), ro))
    }

    /// The exponent at the channel-independent outer rate.
    pub fn e_fcs(&self, gamma: f64, px: &InputDistribution) -> Result<Nats> {
        check_gamma(gamma)?;
        self.e_fc_gamma(gamma, px, suboptimal_outer_rate(gamma).min(1.0))
    }
}
