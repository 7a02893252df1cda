//! Monte Carlo sweeps of the error probability `P_e(N)`, Wilson intervals,
//! slope fits and reproducible manifests.

use std::io::Write;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{Channel, InputDistribution};
use crate::codec::{random_fountain_sim_at, Codec, ConcatConfig, RateCompatible, Schedule, ScheduleKind};
use crate::error::{Error, Result};
use crate::outer::Symbol;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Smallest failure count a point needs to enter a slope fit.
pub const MIN_FAILURES: usize = 5;

pub const MIN_TRIALS: usize = 100;

/// Empirical error probability at one length, with a 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeEstimate {
    pub n: usize,
    pub failures: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PeEstimate {
    pub fn new(n: usize, failures: usize, trials: usize) -> Self {
        assert!(trials > 0 && failures <= trials, "{failures} failures in {trials} trials");
        let (lo, hi) = wilson(failures, trials, Z95);
        let p_hat = failures as f64 / trials as f64;
        PeEstimate { n, failures, trials, p_hat, ci_low: lo.min(p_hat), ci_high: hi.max(p_hat) }
    }

    pub fn overlaps(&self, other: &PeEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Independent seeds for the random parts of one trial. They depend only on
/// the master seed and the trial index, so every length in a sweep sees the
/// same codebook, message and noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSeeds {
    pub codebook: u64,
    pub message: u64,
    pub noise: u64,
    pub schedule: u64,
}

pub fn trial_seeds(master: u64, trial: u64) -> TrialSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    TrialSeeds {
        codebook: rng.next_u64(),
        message: rng.next_u64(),
        noise: rng.next_u64(),
        schedule: rng.next_u64(),
    }
}

/// Sub-messages `known` are handed to the decoder; the rest are decoded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCompatibleSpec {
    pub parts: usize,
    #[serde(default)]
    pub known: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Experiment {
    Concatenated {
        config: ConcatConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_compatible: Option<RateCompatibleSpec>,
    },
    RandomFountain {
        channel: Channel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        px: Option<InputDistribution>,
        /// Number of messages `W`.
        messages: usize,
    },
}

fn default_true() -> bool {
    true
}

fn default_schedule() -> ScheduleKind {
    ScheduleKind::Prefix
}

/// Everything needed to rerun a sweep exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub experiment: Experiment,
    #[serde(default = "default_schedule")]
    pub schedule: ScheduleKind,
    pub n_values: Vec<usize>,
    pub trials_per_point: usize,
    pub master_seed: u64,
    /// Draw new inner codebooks for every trial (an ensemble average)
    /// rather than reuse the configured seed.
    #[serde(default = "default_true")]
    pub fresh_codebook: bool,
}

impl ExperimentManifest {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_point < MIN_TRIALS {
            return Err(Error::InvalidArgument(format!(
                "trials_per_point = {} is below {MIN_TRIALS}",
                self.trials_per_point
            )));
        }
        if self.n_values.is_empty() || self.n_values[0] == 0 || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "n_values must be positive and strictly increasing, got {:?}",
                self.n_values
            )));
        }
        Schedule { kind: self.schedule, received_total: 1, seed: 0 }.validate()?;
        match &self.experiment {
            Experiment::RandomFountain { .. } if self.schedule != ScheduleKind::Prefix => Err(Error::InvalidArgument(
                "random fountain sweeps support only the prefix schedule".into(),
            )),
            Experiment::Concatenated { rate_compatible: Some(rc), .. } => {
                let mut known = rc.known.clone();
                known.sort_unstable();
                known.dedup();
                if known.len() != rc.known.len() || known.iter().any(|&i| i >= rc.parts) || known.len() >= rc.parts {
                    return Err(Error::InvalidArgument(format!(
                        "known parts {:?} must be distinct, below {} and leave one unknown",
                        rc.known, rc.parts
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

fn random_message(k: usize, bits: u32, seed: u64) -> Vec<Symbol> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random_range(0..1u32 << bits) as Symbol).collect()
}

fn at(n: usize) -> impl Fn(Error) -> Error {
    move |e| Error::AtLength { n, source: Box::new(e) }
}

/// Runs every trial at every length. The result depends only on the
/// manifest, not on the thread count.
pub fn run_sweep(m: &ExperimentManifest) -> Result<Vec<PeEstimate>> {
    m.validate()?;
    let trials = m.trials_per_point;
    let schedule = |n: usize, s: &TrialSeeds| Schedule { kind: m.schedule, received_total: n, seed: s.schedule };

    let outcomes: Vec<Vec<bool>> = match &m.experiment {
        Experiment::RandomFountain { channel, px, messages } => {
            let px = px.clone().unwrap_or_else(|| InputDistribution::uniform(channel.input_size()));
            return random_fountain_sim_at(channel, &px, *messages, m.master_seed, trials, &m.n_values);
        }
        Experiment::Concatenated { config, rate_compatible: None } => {
            let codec = Codec::new(config)?;
            (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let s = trial_seeds(m.master_seed, t);
                    let fresh;
                    let c = if m.fresh_codebook {
                        fresh = codec.with_codebook(s.codebook);
                        &fresh
                    } else {
                        &codec
                    };
                    let msg = random_message(config.outer.k_o, config.outer.field_bits, s.message);
                    m.n_values
                        .iter()
                        .map(|&n| c.roundtrip(&msg, &schedule(n, &s), s.noise).map(|r| !r.success).map_err(at(n)))
                        .collect()
                })
                .collect::<Result<_>>()?
        }
        Experiment::Concatenated { config, rate_compatible: Some(spec) } => {
            let rc = RateCompatible::new(config, spec.parts)?;
            (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let s = trial_seeds(m.master_seed, t);
                    let fresh;
                    let c = if m.fresh_codebook {
                        fresh = rc.with_codebook(s.codebook);
                        &fresh
                    } else {
                        &rc
                    };
                    let mut rng = ChaCha8Rng::seed_from_u64(s.message);
                    let parts: Vec<Vec<Symbol>> = (0..spec.parts)
                        .map(|_| random_message(config.outer.k_o, config.outer.field_bits, rng.next_u64()))
                        .collect();
                    m.n_values
                        .iter()
                        .map(|&n| {
                            c.roundtrip(&parts, &spec.known, &schedule(n, &s), s.noise)
                                .map(|r| !r.success)
                                .map_err(at(n))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?
        }
    };

    Ok(m.n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| PeEstimate::new(n, outcomes.iter().filter(|o| o[i]).count(), trials))
        .collect())
}

/// Least-squares slope of `-ln p_hat` against `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Nats per received symbol.
    pub slope: f64,
    pub se: f64,
    pub intercept: f64,
    /// Lengths used in the fit.
    pub used: Vec<usize>,
    /// Lengths with no failures at all.
    pub censored: Vec<usize>,
    /// Lengths with fewer than [`MIN_FAILURES`] failures.
    pub sparse: Vec<usize>,
}

pub fn fit_exponent(estimates: &[PeEstimate]) -> Result<ExponentFit> {
    let mut used = Vec::new();
    let mut censored = Vec::new();
    let mut sparse = Vec::new();
    let mut pts = Vec::new();
    for e in estimates {
        if e.failures == 0 {
            censored.push(e.n);
        } else if e.failures < MIN_FAILURES {
            sparse.push(e.n);
        } else {
            used.push(e.n);
            pts.push((e.n as f64, -e.p_hat.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs 3 points with at least {MIN_FAILURES} failures, have {} (censored {censored:?}, sparse {sparse:?})",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct lengths".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, se, intercept, used, censored, sparse })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionTest {
    pub z: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

impl ProportionTest {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Pooled two-proportion z-test of equal error probabilities.
pub fn two_proportion_test(a: &PeEstimate, b: &PeEstimate) -> ProportionTest {
    let (n1, n2) = (a.trials as f64, b.trials as f64);
    let pooled = (a.failures + b.failures) as f64 / (n1 + n2);
    let var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
    if var == 0.0 {
        return ProportionTest { z: 0.0, p_value: 1.0 };
    }
    let z = (a.p_hat - b.p_hat) / var.sqrt();
    let normal = Normal::standard();
    ProportionTest { z, p_value: 2.0 * normal.cdf(-z.abs()) }
}

pub const CSV_HEADER: &str = "n,trials,failures,p_hat,ci_low,ci_high";

pub fn write_csv(estimates: &[PeEstimate], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for e in estimates {
        writeln!(w, "{},{},{},{:.9e},{:.9e},{:.9e}", e.n, e.trials, e.failures, e.p_hat, e.ci_low, e.ci_high)?;
    }
    Ok(())
}
