//! Min-max verifier for the one-level exponent.
//!
//! The one-level exponent can also be derived as
//!
//! ```text
//! min_{z0, gamma} max_s  gamma phi(z0, s) + (1 - gamma) phi(z1, s)
//!                        + gamma / (1 - gamma) * (1 - z0)^2 / 2
//! ```
//!
//! with `z1 = (1 - gamma z0) / (1 - gamma)`, a two-point density of
//! normalized inner-code lengths. Solving it numerically gives an
//! independent check of the closed form.

use serde::{Deserialize, Serialize};

use super::concatenated::Bracket;
use super::{check_px, optimize, Engine, RateRegime, RhoProfile};
use crate::channel::{self, Channel, InputDistribution, Nats};
use crate::error::{Error, Result};

/// Grids for the min-max program. `s_max = None` means `4 E0(1, p_X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleConfig {
    pub z0_steps: usize,
    pub gamma_steps: usize,
    pub s_steps: usize,
    pub s_max: Option<f64>,
}

impl Default for SaddleConfig {
    fn default() -> Self {
        SaddleConfig {
            z0_steps: 401,
            gamma_steps: 199,
            s_steps: 256,
            s_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    /// Min-max value after local refinement.
    pub value: f64,
    /// Minimizer on the grid, then refined.
    pub gamma_star: f64,
    pub z0_star: f64,
    pub gamma_step: f64,
    pub z0_step: f64,
    /// Grid cells where some grid `s` beat both `E_z(z0)` and `E_z(z1)`.
    pub s_star_violations: usize,
    pub cells: usize,
}

/// `E_z(z) = max(0, max_rho (-rho x + z E0(rho)))` with `x = R / r_o`.
pub fn adjusted_exponent_ez(z: f64, rate_over_ro: Nats, ch: &Channel, px: &InputDistribution) -> Result<Nats> {
    if !(z >= 0.0) {
        return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
    }
    check_px(ch, px)?;
    let prof = RhoProfile::new(ch, px.probs(), &super::OptimizerGrid::default());
    Ok(Nats(ez(&prof, z, rate_over_ro.get())))
}

pub(crate) fn ez(prof: &RhoProfile<'_>, z: f64, x: f64) -> f64 {
    prof.maximize(|rho, e| -rho * x + z * e).1.max(0.0)
}

/// Three-branch `phi` given a precomputed `E_z(z)`.
pub(crate) fn phi_from_ez(ez: f64, s: f64, ro: f64) -> f64 {
    if ez < 0.5 * s {
        -s * ro
    } else if ez < s {
        2.0 * ez - (1.0 + ro) * s
    } else {
        (1.0 - ro) * s
    }
}

pub fn phi(
    z: f64,
    s: f64,
    rate_over_ro: Nats,
    ro: f64,
    ch: &Channel,
    px: &InputDistribution,
) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("s must be >= 0, got {s}")));
    }
    let e = adjusted_exponent_ez(z, rate_over_ro, ch, px)?.get();
    Ok(phi_from_ez(e, s, ro))
}

/// `z0* = 1 - (1 + r_o) E0`, valid while `(1 + r_o) E0 <= 1`.
pub fn closed_form_witness_z0(ro: f64, e0: Nats) -> Result<f64> {
    let t = (1.0 + ro) * e0.get();
    if t > 1.0 {
        return Err(Error::OutsideClosedForm(t));
    }
    Ok(1.0 - t)
}

struct Program<'a> {
    prof: RhoProfile<'a>,
    x: f64,
    ro: f64,
    s_grid: Vec<f64>,
}

impl Program<'_> {
    fn z1(z0: f64, g: f64) -> f64 {
        (1.0 - z0 * g) / (1.0 - g)
    }

    fn mix(&self, g: f64, a: f64, b: f64, s: f64) -> f64 {
        g * phi_from_ez(a, s, self.ro) + (1.0 - g) * phi_from_ez(b, s, self.ro)
    }

    /// Inner maximum over `s`; also reports whether the `s` grid beat the
    /// two candidate values.
    fn inner(&self, z0: f64, g: f64, scan: bool) -> (f64, bool) {
        let a = ez(&self.prof, z0, self.x);
        let b = ez(&self.prof, Self::z1(z0, g), self.x);
        let cand = self.mix(g, a, b, a).max(self.mix(g, a, b, b));
        let mut beaten = false;
        let mut best = cand;
        if scan {
            for &s in &self.s_grid {
                let v = self.mix(g, a, b, s);
                if v > cand + 1e-12 {
                    beaten = true;
                }
                best = best.max(v);
            }
        }
        (best + g / (1.0 - g) * (1.0 - z0).powi(2) / 2.0, beaten)
    }
}

impl Engine {
    pub fn saddle_one_level(
        &self,
        rate: Nats,
        px: &InputDistribution,
        ro: f64,
        sconf: &SaddleConfig,
    ) -> Result<SaddleResult> {
        check_px(&self.ch, px)?;
        if self.check_rate(rate)? == RateRegime::AtCapacity {
            return Err(Error::Infeasible("rate at capacity leaves no outer rate".into()));
        }
        let r = rate.get();
        if !(ro > self.ro_min(r) && ro < 1.0) {
            return Err(Error::Infeasible(format!(
                "r_o = {ro} outside ({}, 1)",
                self.ro_min(r)
            )));
        }
        if sconf.z0_steps < 2 || sconf.gamma_steps < 1 || sconf.s_steps < 2 {
            return Err(Error::Infeasible("saddle grid is empty".into()));
        }
        let s_max = sconf
            .s_max
            .unwrap_or_else(|| 4.0 * channel::gallager_e0(&self.ch, px, 1.0));
        if !(s_max > 0.0) {
            return Err(Error::Infeasible(format!("s_max must be positive, got {s_max}")));
        }
        let s_grid = (0..sconf.s_steps)
            .map(|i| s_max * i as f64 / (sconf.s_steps - 1) as f64)
            .collect();
        let prog = Program {
            prof: self.profile(px.probs()),
            x: r / ro,
            ro,
            s_grid,
        };

        let z0_step = 1.0 / (sconf.z0_steps - 1) as f64;
        let gamma_step = 1.0 / (sconf.gamma_steps + 1) as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let mut violations = 0;
        for gi in 1..=sconf.gamma_steps {
            let g = gi as f64 * gamma_step;
            for zi in 0..sconf.z0_steps {
                let z0 = zi as f64 * z0_step;
                let (v, beaten) = prog.inner(z0, g, true);
                violations += beaten as usize;
                if v < best.0 {
                    best = (v, g, z0);
                }
            }
        }

        // Local refinement around the grid minimizer. The objective has
        // kinks, so each gamma line is searched with a fine grid first.
        let tol = self.grid.xtol();
        let g_lo = (best.1 - gamma_step).max(gamma_step * 0.5);
        let g_hi = (best.1 + gamma_step).min(1.0 - gamma_step * 0.5);
        let z_lo = (best.2 - z0_step).max(0.0);
        let z_hi = (best.2 + z0_step).min(1.0);
        let line = |g: f64| {
            let (z, v) = optimize::maximize(|z| -prog.inner(z, g, false).0, z_lo, z_hi, 64, 2, tol);
            (z, -v)
        };
        let (g_ref, neg) = optimize::maximize(|g| -line(g).1, g_lo, g_hi, 32, 2, tol);
        let (z_ref, v_ref) = line(g_ref);
        if -neg <= best.0 && v_ref <= best.0 {
            best = (v_ref, g_ref, z_ref);
        }

        Ok(SaddleResult {
            value: best.0,
            gamma_star: best.1,
            z0_star: best.2,
            gamma_step,
            z0_step,
            s_star_violations: violations,
            cells: sconf.gamma_steps * sconf.z0_steps,
        })
    }

    /// Closed-form one-level objective at fixed `(p_X, r_o)` and its `rho*`.
    pub fn one_level_fixed(&self, rate: Nats, px: &InputDistribution, ro: f64) -> Result<(f64, f64)> {
        check_px(&self.ch, px)?;
        let prof = self.profile(px.probs());
        let (rho, v) = Engine::one_level_inner(&prof, rate.get(), ro, Bracket::Fountain);
        Ok((v, rho))
    }
}
