use serde::{Deserialize, Serialize};

use super::schedule::Receiver;
use super::transmit::Transmitter;
use super::{Codec, ConcatConfig, InnerDecision, Received, Schedule};
use crate::error::{Error, Result};
use crate::outer::Symbol;

/// Result of one end-to-end transmission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub success: bool,
    pub decoded: Option<Vec<Symbol>>,
    /// Symbols received per inner code before truncation.
    pub counts: Vec<usize>,
    /// Reliability weight per inner code.
    pub alpha: Vec<f64>,
    /// Inner codes whose decision differs from the transmitted symbol.
    pub inner_errors: usize,
    /// Symbols discarded by the per-code truncation.
    pub dropped: usize,
}

impl RoundTrip {
    /// Normalized effective lengths `z_k` before truncation; they sum to
    /// `n_o` whenever `N_o N_i` symbols were received.
    pub fn z(&self, n_i: usize) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / n_i as f64).collect()
    }

    /// Histogram of `z` over `bins` equal cells of `[0, z_max)`; the last
    /// cell also collects everything above.
    pub fn z_histogram(&self, n_i: usize, z_max: f64, bins: usize) -> Vec<usize> {
        let mut h = vec![0; bins];
        for z in self.z(n_i) {
            let b = ((z / z_max) * bins as f64) as usize;
            h[b.min(bins - 1)] += 1;
        }
        h
    }
}

impl Codec {
    /// Runs the switch and channel until the schedule is satisfied.
    pub(crate) fn receive(&self, macros: &[u32], schedule: &Schedule, noise_seed: u64, cap: usize) -> Result<Received> {
        schedule.validate()?;
        let mut rx = Receiver::new(schedule, &self.cfg.channel, noise_seed, self.cfg.outer.n_o, cap);
        let budget = schedule.slot_budget();
        for item in Transmitter::new(self, macros).take(budget) {
            rx.push(&item);
            if rx.done() {
                return Ok(rx.out);
            }
        }
        Err(Error::Infeasible(format!(
            "schedule delivered fewer than {} symbols in {budget} slots",
            schedule.received_total
        )))
    }

    pub(crate) fn decide_all(&self, rx: &Received, n_norm: f64) -> Vec<InnerDecision> {
        let all = 1u32 << self.message_bits;
        rx.symbols
            .iter()
            .enumerate()
            .map(|(k, s)| self.decide(k, s, 0..all, n_norm))
            .collect()
    }

    /// Encode, transmit, receive and decode one message.
    pub fn roundtrip(&self, message: &[Symbol], schedule: &Schedule, noise_seed: u64) -> Result<RoundTrip> {
        let codeword = self.rs.encode(message)?;
        let macros: Vec<u32> = codeword.iter().map(|&s| s as u32).collect();
        let n_i = self.cfg.n_i as f64;
        let rx = self.receive(&macros, schedule, noise_seed, self.truncation_cap(n_i))?;
        let decisions = self.decide_all(&rx, n_i);
        let inner_errors = decisions
            .iter()
            .zip(&codeword)
            .filter(|(d, &c)| d.xi_hat != c as u32)
            .count();
        let decoded = self.gmd(&decisions).map(|o| o.message);
        Ok(RoundTrip {
            success: decoded.as_deref() == Some(message),
            decoded,
            counts: rx.counts,
            alpha: decisions.iter().map(|d| d.alpha).collect(),
            inner_errors,
            dropped: rx.dropped,
        })
    }
}

/// One full pass: outer encode, transmit, schedule, inner decode, GMD.
pub fn concat_roundtrip(cfg: &ConcatConfig, message: &[Symbol], schedule: &Schedule, noise_seed: u64) -> Result<RoundTrip> {
    Codec::new(cfg)?.roundtrip(message, schedule, noise_seed)
}
