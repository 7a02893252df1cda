//! Self-checks that pit independent computations against each other: the
//! min-max program against the closed form, the ordering of the exponents,
//! the multilevel identities, the limiting ratios and GMD soundness.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, Nats};
use crate::codec::gmd_decode;
use crate::codec::{ConcatConfig, InnerDecision};
use crate::error::{Error, Result};
use crate::exponent::curve::{linspace, CurveKind, DEFAULT_QUAD_STEPS};
use crate::exponent::{Engine, OptimizerGrid, SaddleConfig};
use crate::outer::{OuterCodeSpec, ReedSolomon, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Saddle,
    Sandwich,
    Mcollapse,
    Limits,
    Gmd,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Saddle, Suite::Sandwich, Suite::Mcollapse, Suite::Limits, Suite::Gmd];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Saddle => "saddle",
            Suite::Sandwich => "sandwich",
            Suite::Mcollapse => "mcollapse",
            Suite::Limits => "limits",
            Suite::Gmd => "gmd",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}; expected one of saddle, sandwich, mcollapse, limits, gmd")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|observed - expected| <= tolerance`
    Eq,
    /// `observed <= expected + tolerance`
    Le,
    /// `observed >= expected - tolerance`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
    /// Reported for information only; does not affect the suite outcome.
    pub advisory: bool,
}

impl Check {
    fn new(name: impl Into<String>, observed: f64, relation: Relation, expected: f64, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::Eq => (observed - expected).abs() <= tolerance,
            Relation::Le => observed <= expected + tolerance,
            Relation::Ge => observed >= expected - tolerance,
        };
        Check { name: name.into(), observed, expected, tolerance, relation, passed, advisory: false }
    }

    fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.relation {
            Relation::Eq => "==",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        };
        let tag = match (self.passed, self.advisory) {
            (true, _) => "ok",
            (false, false) => "FAIL",
            (false, true) => "note",
        };
        write!(
            f,
            "{tag:>4}  {}: observed {:.6e} {op} {:.6e} (tol {:.1e})",
            self.name, self.observed, self.expected, self.tolerance
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed || c.advisory);
        SuiteReport { suite, passed, checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed && !c.advisory)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    /// One line per check plus a verdict per suite.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.suites {
            s += &format!("[{}] {}\n", if r.passed { "PASS" } else { "FAIL" }, r.suite);
            for c in &r.checks {
                s += &format!("  {c}\n");
            }
        }
        s += if self.passed { "all suites passed\n" } else { "verification FAILED\n" };
        s
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub channel: Channel,
    pub grid: OptimizerGrid,
    pub saddle: SaddleConfig,
    /// Replaces the tolerance of every non-advisory check.
    pub tolerance: Option<f64>,
    /// Restricts the saddle suite to one outer rate.
    pub ro: Option<f64>,
    pub quad_steps: usize,
    /// Number of rates on the grid over `(0.05 C, 0.99 C)`.
    pub rate_points: usize,
}

impl VerifyOptions {
    pub fn new(channel: Channel) -> Self {
        VerifyOptions {
            channel,
            grid: OptimizerGrid::default(),
            saddle: SaddleConfig::default(),
            tolerance: None,
            ro: None,
            quad_steps: DEFAULT_QUAD_STEPS,
            rate_points: 32,
        }
    }
}

/// `(R / C, r_o)` pairs probed by the saddle suite.
pub const SADDLE_POINTS: [(f64, f64); 10] = [
    (0.3, 0.5),
    (0.3, 0.7),
    (0.5, 0.6),
    (0.5, 0.75),
    (0.5, 0.9),
    (0.6, 0.8),
    (0.7, 0.85),
    (0.7, 0.95),
    (0.8, 0.9),
    (0.9, 0.95),
];

pub fn run(suites: &[Suite], opts: &VerifyOptions) -> Result<VerifyReport> {
    let engine = Engine::new(&opts.channel, opts.grid.clone())?;
    let mut out = Vec::new();
    for &s in suites {
        let mut checks = match s {
            Suite::Saddle => saddle(&engine, opts)?,
            Suite::Sandwich => sandwich(&engine, opts)?,
            Suite::Mcollapse => mcollapse(&engine, opts)?,
            Suite::Limits => limits(&engine)?,
            Suite::Gmd => gmd()?,
        };
        if let Some(t) = opts.tolerance {
            for c in checks.iter_mut().filter(|c| !c.advisory) {
                *c = Check::new(std::mem::take(&mut c.name), c.observed, c.relation, c.expected, t);
            }
        }
        out.push(SuiteReport::new(s, checks));
    }
    Ok(VerifyReport { passed: out.iter().all(|r| r.passed), suites: out })
}

fn rate_grid(engine: &Engine, points: usize) -> Vec<f64> {
    let c = engine.capacity().get();
    linspace(0.05 * c, 0.99 * c, points)
}

fn saddle(engine: &Engine, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let c = engine.capacity().get();
    let px = engine.capacity_px().clone();
    let points: Vec<(f64, f64)> = match opts.ro {
        Some(ro) => [0.3, 0.5, 0.7].into_iter().filter(|&f| f < ro).map(|f| (f, ro)).collect(),
        None => SADDLE_POINTS.to_vec(),
    };
    if points.is_empty() {
        return Err(Error::InvalidArgument(format!("no probe rate lies below r_o = {:?} C", opts.ro)));
    }
    let results = points
        .par_iter()
        .map(|&(f, ro)| {
            let rate = Nats(f * c);
            let sr = engine.saddle_one_level(rate, &px, ro, &opts.saddle)?;
            let (closed, rho) = engine.one_level_fixed(rate, &px, ro)?;
            let e0 = crate::channel::gallager_e0(engine.channel(), &px, rho);
            Ok((f, ro, sr, closed, e0))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for (f, ro, sr, closed, e0) in results {
        let tag = format!("R={f}C r_o={ro}");
        checks.push(Check::new(format!("{tag} min-max value"), sr.value, Relation::Eq, closed, 1e-3));
        checks.push(Check::new(
            format!("{tag} gamma*"),
            sr.gamma_star,
            Relation::Eq,
            (1.0 - ro) / 2.0,
            sr.gamma_step + 1e-12,
        ));
        // The minimizer in z0 sits where E_z(z1) = 2 E_z(z0), which is not
        // the closed-form point; reported, not enforced.
        if let Ok(z0) = crate::exponent::closed_form_witness_z0(ro, Nats(e0)) {
            checks.push(Check::new(format!("{tag} z0*"), sr.z0_star, Relation::Eq, z0, sr.z0_step + 1e-12).advisory());
        }
        checks.push(Check::new(format!("{tag} s grid never beats E_z candidates"), sr.s_star_violations as f64, Relation::Eq, 0.0, 0.0));
    }
    Ok(checks)
}

fn sandwich(engine: &Engine, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let rates = rate_grid(engine, opts.rate_points);
    let lower = engine.rate_curve(CurveKind::EfcTilde, &rates, opts.quad_steps)?;
    let mid = engine.rate_curve(CurveKind::Efc, &rates, opts.quad_steps)?;
    let upper = engine.rate_curve(CurveKind::Ec, &rates, opts.quad_steps)?;
    let fl = engine.rate_curve(CurveKind::Efr, &rates, opts.quad_steps)?;
    let worst = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max);
    let v = |c: &crate::exponent::curve::Curve| c.rows.iter().map(|r| r.value).collect::<Vec<_>>();
    let (lo, md, up, fl) = (v(&lower), v(&mid), v(&upper), v(&fl));
    Ok(vec![
        Check::new("max(E~_Fc - E_Fc)", worst(&lo, &md), Relation::Le, 0.0, 1e-6),
        Check::new("max(E_Fc - E_c)", worst(&md, &up), Relation::Le, 0.0, 1e-6),
        Check::new("max(E_c - E_FL)", worst(&up, &fl), Relation::Le, 0.0, 1e-6),
        Check::new("min E~_Fc", lo.iter().copied().fold(f64::INFINITY, f64::min), Relation::Ge, 0.0, 0.0),
    ])
}

fn mcollapse(engine: &Engine, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let c = engine.capacity().get();
    let rates = rate_grid(engine, opts.rate_points);
    let tilde = engine.rate_curve(CurveKind::EfcTilde, &rates, opts.quad_steps)?;
    let levels = [1usize, 2, 4, 8, 16, 64];
    let curves = levels
        .iter()
        .map(|&m| engine.rate_curve(CurveKind::EfcM(m), &rates, opts.quad_steps))
        .collect::<Result<Vec<_>>>()?;
    let inf = engine.rate_curve(CurveKind::EfcInf, &rates, opts.quad_steps)?;
    let val = |c: &crate::exponent::curve::Curve, i: usize| c.rows[i].value;

    let identity = (0..rates.len())
        .map(|i| (val(&curves[0], i) - val(&tilde, i)).abs())
        .fold(0.0, f64::max);
    let drop = (0..rates.len())
        .flat_map(|i| curves.windows(2).map(move |w| (w, i)))
        .map(|(w, i)| val(&w[0], i) - val(&w[1], i))
        .fold(f64::NEG_INFINITY, f64::max);
    let rel_gap = |curve: &crate::exponent::curve::Curve, keep: &dyn Fn(f64) -> bool| {
        (0..rates.len())
            .filter(|&i| keep(rates[i] / c) && val(&inf, i) > 0.0)
            .map(|i| (val(&inf, i) - val(curve, i)) / val(&inf, i))
            .fold(0.0, f64::max)
    };
    let m16 = &curves[4];
    let m64 = &curves[5];
    Ok(vec![
        Check::new("max |E^(1) - E~_Fc|", identity, Relation::Le, 0.0, 1e-9),
        Check::new("max(E^(m) - E^(next m))", drop, Relation::Le, 0.0, 1e-9),
        Check::new("max(E^(64) - E^(inf))", -rel_gap(m64, &|_| true).min(0.0), Relation::Le, 0.0, 1e-9),
        Check::new(
            "relative gap E^(64) vs E^(inf), R <= 0.3 C",
            rel_gap(m64, &|f| f <= 0.3),
            Relation::Le,
            0.02,
            0.0,
        ),
        Check::new(
            "gap shrinks from m = 16 to 64",
            rel_gap(m64, &|_| true) - rel_gap(m16, &|_| true),
            Relation::Le,
            0.0,
            0.0,
        ),
        // the left-endpoint sum converges slowly where 1/E_FLp blows up
        Check::new("relative gap E^(64) vs E^(inf), full grid", rel_gap(m64, &|_| true), Relation::Le, 0.02, 0.0)
            .advisory(),
    ])
}

fn limits(engine: &Engine) -> Result<Vec<Check>> {
    let c = engine.capacity().get();
    let px = engine.capacity_px().clone();
    let mut checks = Vec::new();

    let fr = [0.5, 0.9, 0.99];
    let ratio = fr
        .iter()
        .map(|&f| {
            let r = Nats(f * c);
            Ok(engine.one_level_lower_bound(r)?.value.get() / engine.one_level(r)?.value.get())
        })
        .collect::<Result<Vec<f64>>>()?;
    let gamma = [0.5, 0.9, 0.99];
    let sub = gamma
        .iter()
        .map(|&g| Ok(engine.e_fcs(g, &px)?.get() / engine.e_fc_gamma_opt(g, &px)?.0.get()))
        .collect::<Result<Vec<f64>>>()?;

    for (name, xs, r) in [("R/C", &fr, &ratio), ("gamma", &gamma, &sub)] {
        let label = if name == "R/C" { "E~_Fc/E_Fc" } else { "E_Fcs/E_Fc" };
        for i in 1..xs.len() {
            checks.push(Check::new(
                format!("{label} nondecreasing {name} {} -> {}", xs[i - 1], xs[i]),
                r[i],
                Relation::Ge,
                r[i - 1],
                1e-9,
            ));
        }
        checks.push(Check::new(format!("{label} at {name} = {}", xs[xs.len() - 1]), r[r.len() - 1], Relation::Eq, 1.0, 0.1));
        checks.push(Check::new(format!("{label} at {name} = {} is at most 1", xs[0]), r[0], Relation::Le, 1.0, 1e-9));
    }

    let gs = linspace(0.02, 0.99, 50);
    let opt = engine.gamma_curve(CurveKind::EfcGamma, &gs, &px)?;
    let subc = engine.gamma_curve(CurveKind::Efcs, &gs, &px)?;
    let worst = opt
        .rows
        .iter()
        .zip(&subc.rows)
        .map(|(o, s)| s.value - o.value)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new("max(E_Fcs - E_Fc) over gamma grid", worst, Relation::Le, 0.0, 1e-9));
    Ok(checks)
}

/// Outcome of the exhaustive GMD soundness check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmdSoundness {
    /// Received words whose weighted agreement with the sent codeword
    /// exceeds `k_o`.
    pub qualifying: usize,
    /// Qualifying words GMD failed to return the sent codeword for.
    pub misses: usize,
    pub total: usize,
}

/// Every error pattern of the (8, 4) code over GF(256) combined with every
/// weight vector in `{0, 1/2, 1}^8`: whenever `sum alpha mu > k_o` for the
/// sent codeword, GMD must return it.
pub fn gmd_soundness(seed: u64) -> Result<GmdSoundness> {
    let spec = OuterCodeSpec::new(8, 4, 8)?;
    let rs = ReedSolomon::new(spec)?;
    let cfg = ConcatConfig::new(spec, 60, Channel::bsc(0.1)?, 0);
    let levels = [0.0, 0.5, 1.0];
    let n_weights = 3usize.pow(8);
    let counts = (0..256u32)
        .into_par_iter()
        .map(|mask| -> Result<GmdSoundness> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((mask as u64) << 32));
            let msg: Vec<Symbol> = (0..4).map(|_| rng.random_range(0..256)).collect();
            let cw = rs.encode(&msg)?;
            let mut rx = cw.clone();
            for (k, s) in rx.iter_mut().enumerate() {
                if mask >> k & 1 == 1 {
                    *s ^= rng.random_range(1..256);
                }
            }
            let mut acc = GmdSoundness { total: n_weights, ..Default::default() };
            for w in 0..n_weights {
                let mut code = w;
                let alpha: Vec<f64> = (0..8)
                    .map(|_| {
                        let a = levels[code % 3];
                        code /= 3;
                        a
                    })
                    .collect();
                let score: f64 = (0..8).map(|k| if rx[k] == cw[k] { alpha[k] } else { -alpha[k] }).sum();
                if score <= spec.k_o as f64 {
                    continue;
                }
                acc.qualifying += 1;
                let decisions: Vec<InnerDecision> = rx
                    .iter()
                    .zip(&alpha)
                    .map(|(&x, &a)| InnerDecision { xi_hat: x as u32, alpha: a, z: 1.0, loglik_best: 0.0, loglik_second: 0.0 })
                    .collect();
                match gmd_decode(&cfg, &decisions)? {
                    Some(o) if o.codeword == cw => {}
                    _ => acc.misses += 1,
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(counts.into_iter().fold(GmdSoundness::default(), |a, b| GmdSoundness {
        qualifying: a.qualifying + b.qualifying,
        misses: a.misses + b.misses,
        total: a.total + b.total,
    }))
}

fn gmd() -> Result<Vec<Check>> {
    let s = gmd_soundness(0x6d64)?;
    Ok(vec![
        Check::new("GMD misses among qualifying words", s.misses as f64, Relation::Eq, 0.0, 0.0),
        Check::new("qualifying words exercised", s.qualifying as f64, Relation::Ge, 1.0, 0.0),
    ])
}
