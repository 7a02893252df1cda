//! One-level concatenated fountain codec.
//!
//! The encoder Reed-Solomon encodes the message into `n_o` outer symbols,
//! maps each outer symbol through its own random fountain code (an endless
//! codeword drawn from a shared seed), and at every channel use a random
//! switch picks which inner code emits its next symbol. The decoder groups
//! received symbols by inner code, runs maximum-likelihood decoding per inner
//! code with a reliability weight, and finishes with GMD decoding of the
//! outer code.

mod codebook;
mod concat;
mod gmd;
mod inner;
mod random_fountain;
mod rate_compatible;
mod schedule;
mod transmit;

use serde::{Deserialize, Serialize};

use crate::channel::{self, Channel, InputDistribution};
use crate::error::{Error, Result};
use crate::exponent::{self, OptimizerGrid};
use crate::outer::{OuterCodeSpec, ReedSolomon};

pub use codebook::{inner_symbol, CodebookSeed};
pub use concat::{concat_roundtrip, RoundTrip};
pub use gmd::{gmd_decode, GmdOutcome};
pub use inner::{inner_ml_decode, InnerDecision};
pub use random_fountain::{random_fountain_sim, random_fountain_sim_at, random_fountain_union_bound};
pub use rate_compatible::{rate_compatible_decode, rate_compatible_encode, RateCompatible, RcRoundTrip};
pub use schedule::{apply_schedule, Received, Schedule, ScheduleKind};
pub use transmit::{transmit_stream, StreamItem};

use codebook::InputSampler;

/// Largest inner message space searched exhaustively, in bits.
pub const MAX_INNER_BITS: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcatConfig {
    pub outer: OuterCodeSpec,
    /// Expected received symbols per inner code, `N / N_o`.
    pub n_i: usize,
    pub channel: Channel,
    pub px: InputDistribution,
    pub seed: CodebookSeed,
    /// Scale of reliability weights; `None` uses `E_z(1)` at the inner rate.
    #[serde(default)]
    pub weight_scale: Option<f64>,
    /// Per-code truncation at `z_cap * n_i` symbols.
    #[serde(default = "default_z_cap")]
    pub z_cap: f64,
}

fn default_z_cap() -> f64 {
    2.0
}

impl ConcatConfig {
    pub fn new(outer: OuterCodeSpec, n_i: usize, channel: Channel, seed: u64) -> Self {
        let px = InputDistribution::uniform(channel.input_size());
        ConcatConfig {
            outer,
            n_i,
            channel,
            px,
            seed: CodebookSeed::new(seed),
            weight_scale: None,
            z_cap: default_z_cap(),
        }
    }

    /// Fountain rate `r_o * field_bits * ln 2 / n_i` in nats per symbol.
    pub fn rate(&self) -> f64 {
        self.outer.rate() * self.outer.field_bits as f64 * std::f64::consts::LN_2 / self.n_i as f64
    }

    /// Total received symbols at the design point, `N_o * N_i`.
    pub fn design_length(&self) -> usize {
        self.outer.n_o * self.n_i
    }
}

/// A validated configuration with its tables prepared.
#[derive(Clone, Debug)]
pub struct Codec {
    cfg: ConcatConfig,
    rs: ReedSolomon,
    key: [u8; 32],
    sampler: InputSampler,
    log_table: Vec<f64>,
    outputs: usize,
    weight_scale: f64,
    /// Bits per inner message; `L * field_bits` for macro symbols.
    message_bits: u32,
    parts: usize,
}

impl Codec {
    pub fn new(cfg: &ConcatConfig) -> Result<Self> {
        Self::with_parts(cfg, 1)
    }

    /// A codec whose inner codes carry `parts` stacked outer symbols.
    pub fn with_parts(cfg: &ConcatConfig, parts: usize) -> Result<Self> {
        cfg.outer.validate()?;
        if parts == 0 {
            return Err(Error::InvalidArgument("need at least one sub-message".into()));
        }
        let message_bits = cfg.outer.field_bits * parts as u32;
        if message_bits > MAX_INNER_BITS {
            return Err(Error::InvalidArgument(format!(
                "inner message space 2^{message_bits} exceeds the 2^{MAX_INNER_BITS} cap"
            )));
        }
        if cfg.n_i == 0 {
            return Err(Error::InvalidArgument("n_i must be >= 1".into()));
        }
        if cfg.px.len() != cfg.channel.input_size() {
            return Err(Error::InvalidDistribution(format!(
                "length {} does not match channel input size {}",
                cfg.px.len(),
                cfg.channel.input_size()
            )));
        }
        if !(cfg.z_cap > 0.0) {
            return Err(Error::InvalidArgument(format!("z_cap must be positive, got {}", cfg.z_cap)));
        }
        let (cap, _) = channel::capacity(&cfg.channel, 1e-12)?;
        let rate = cfg.rate() * parts as f64;
        if rate >= cap.get() {
            return Err(Error::RateNotAchievable { rate, capacity: cap.get() });
        }
        let weight_scale = match cfg.weight_scale {
            Some(s) if s > 0.0 => s,
            Some(s) => return Err(Error::InvalidArgument(format!("weight_scale must be positive, got {s}"))),
            None => default_weight_scale(cfg, message_bits)?,
        };
        Ok(Codec {
            rs: ReedSolomon::new(cfg.outer)?,
            key: cfg.seed.key(),
            sampler: InputSampler::new(&cfg.px),
            log_table: cfg.channel.log_table(),
            outputs: cfg.channel.output_size(),
            weight_scale,
            message_bits,
            parts,
            cfg: cfg.clone(),
        })
    }

    /// The same code with its inner codebooks redrawn from `seed`.
    pub fn with_codebook(&self, seed: u64) -> Codec {
        let seed = CodebookSeed::new(seed);
        let mut c = self.clone();
        c.key = seed.key();
        c.cfg.seed = seed;
        c
    }

    pub fn config(&self) -> &ConcatConfig {
        &self.cfg
    }

    pub fn weight_scale(&self) -> f64 {
        self.weight_scale
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    /// Per-code symbol limit `floor(z_cap * n_norm)`.
    pub(crate) fn truncation_cap(&self, n_norm: f64) -> usize {
        let c = self.cfg.z_cap * n_norm;
        if c.is_finite() {
            c.floor() as usize
        } else {
            usize::MAX
        }
    }
}

/// `E_z(1) = E_FL(R_i, p_X)` at the inner rate `message_bits ln 2 / n_i`,
/// or `E0(1, p_X)` when the inner rate is above `I(p_X)`.
fn default_weight_scale(cfg: &ConcatConfig, message_bits: u32) -> Result<f64> {
    let ri = message_bits as f64 * std::f64::consts::LN_2 / cfg.n_i as f64;
    let grid = OptimizerGrid::default();
    let v = exponent::e_fl(channel::Nats(ri), &cfg.channel, &cfg.px, &grid)?.value.get();
    if v > 0.0 {
        return Ok(v);
    }
    let e1 = channel::gallager_e0(&cfg.channel, &cfg.px, 1.0);
    if e1 > 0.0 {
        Ok(e1)
    } else {
        Err(Error::Infeasible("channel carries no information".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ConcatConfig {
        ConcatConfig::new(OuterCodeSpec::new(64, 48, 8).unwrap(), 60, Channel::bsc(0.1).unwrap(), 1)
    }

    #[test]
    fn rate_and_validation() {
        let c = cfg();
        let r = 0.75 * 8.0 * std::f64::consts::LN_2 / 60.0;
        assert!((c.rate() - r).abs() < 1e-15);
        assert_eq!(c.design_length(), 3840);
        let codec = Codec::new(&c).unwrap();
        assert!(codec.weight_scale() > 0.0);

        let mut bad = c.clone();
        bad.n_i = 10;
        assert!(matches!(Codec::new(&bad), Err(Error::RateNotAchievable { .. })));
        let mut bad = c.clone();
        bad.weight_scale = Some(0.0);
        assert!(Codec::new(&bad).is_err());
        assert!(Codec::with_parts(&c, 3).is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let c = cfg();
        let text = serde_json::to_string(&c).unwrap();
        let back: ConcatConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
