use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StreamItem;
use crate::channel::Channel;
use crate::error::{Error, Result};

/// Which transmitted symbols the erasure device lets through.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// The first symbols sent.
    Prefix,
    /// Each symbol independently with probability `p_keep`.
    IidThinning { p_keep: f64 },
    /// A `fraction` of the inner codes is never heard; everything else is.
    PerCodeStarve { fraction: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// Stop once this many symbols have been received.
    pub received_total: usize,
    /// Drives the thinning coin flips and the choice of starved codes.
    pub seed: u64,
}

impl Schedule {
    pub fn prefix(n: usize) -> Self {
        Schedule { kind: ScheduleKind::Prefix, received_total: n, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ScheduleKind::Prefix => Ok(()),
            ScheduleKind::IidThinning { p_keep } if p_keep > 0.0 && p_keep <= 1.0 => Ok(()),
            ScheduleKind::PerCodeStarve { fraction } if (0.0..1.0).contains(&fraction) => Ok(()),
            k => Err(Error::InvalidArgument(format!("invalid schedule parameters {k:?}"))),
        }
    }

    /// Slots a stream must run for to deliver `received_total` symbols with
    /// overwhelming probability.
    pub(crate) fn slot_budget(&self) -> usize {
        let n = self.received_total as f64;
        let rate = match self.kind {
            ScheduleKind::Prefix => 1.0,
            ScheduleKind::IidThinning { p_keep } => p_keep,
            ScheduleKind::PerCodeStarve { fraction } => 1.0 - fraction,
        };
        (4.0 * n / rate + 1000.0).ceil() as usize
    }

    pub(crate) fn filter(&self, n_o: usize) -> ScheduleFilter {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let starved = match self.kind {
            ScheduleKind::PerCodeStarve { fraction } => {
                let count = (fraction * n_o as f64).round() as usize;
                let mut s = vec![false; n_o];
                for k in sample(&mut rng, n_o, count.min(n_o)) {
                    s[k] = true;
                }
                s
            }
            _ => vec![false; n_o],
        };
        ScheduleFilter { kind: self.kind, rng, starved }
    }
}

pub(crate) struct ScheduleFilter {
    kind: ScheduleKind,
    rng: ChaCha8Rng,
    starved: Vec<bool>,
}

impl ScheduleFilter {
    pub(crate) fn keep(&mut self, item: &StreamItem) -> bool {
        match self.kind {
            ScheduleKind::Prefix => true,
            ScheduleKind::IidThinning { p_keep } => self.rng.random::<f64>() < p_keep,
            ScheduleKind::PerCodeStarve { .. } => !self.starved[item.code],
        }
    }
}

/// Received symbols grouped by inner code.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Received {
    /// `(position, channel output)` per inner code, after truncation.
    pub symbols: Vec<Vec<(u64, usize)>>,
    /// Symbols received per inner code before truncation; sums to the total.
    pub counts: Vec<usize>,
    /// Slots of the received symbols, strictly increasing.
    pub slots: Vec<u64>,
    /// Symbols discarded by truncation.
    pub dropped: usize,
}

impl Received {
    pub fn total(&self) -> usize {
        self.slots.len()
    }

    /// Normalized effective lengths `z_k = counts[k] / n_norm`, untruncated.
    pub fn z_raw(&self, n_norm: f64) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / n_norm).collect()
    }
}

/// Incrementally builds a [`Received`] from a stream.
pub(crate) struct Receiver<'a> {
    channel: &'a Channel,
    filter: ScheduleFilter,
    noise: ChaCha8Rng,
    cap: usize,
    target: usize,
    pub(crate) out: Received,
}

impl<'a> Receiver<'a> {
    pub(crate) fn new(schedule: &Schedule, channel: &'a Channel, noise_seed: u64, n_o: usize, cap: usize) -> Self {
        Receiver {
            channel,
            filter: schedule.filter(n_o),
            noise: ChaCha8Rng::seed_from_u64(noise_seed),
            cap,
            target: schedule.received_total,
            out: Received {
                symbols: vec![Vec::new(); n_o],
                counts: vec![0; n_o],
                slots: Vec::new(),
                dropped: 0,
            },
        }
    }

    pub(crate) fn done(&self) -> bool {
        self.out.slots.len() >= self.target
    }

    pub(crate) fn push(&mut self, item: &StreamItem) {
        if self.done() || !self.filter.keep(item) {
            return;
        }
        let y = self.channel.sample_output(item.input, self.noise.random::<f64>());
        self.out.slots.push(item.slot);
        self.out.counts[item.code] += 1;
        let bucket = &mut self.out.symbols[item.code];
        if bucket.len() < self.cap {
            bucket.push((item.pos, y));
        } else {
            self.out.dropped += 1;
        }
    }
}

/// Passes the scheduled part of a finite stream through the channel.
/// `cap` limits the symbols kept per inner code (`usize::MAX` for none).
pub fn apply_schedule(
    stream: &[StreamItem],
    schedule: &Schedule,
    channel: &Channel,
    noise_seed: u64,
    n_o: usize,
    cap: usize,
) -> Result<Received> {
    schedule.validate()?;
    if let Some(bad) = stream.iter().find(|it| it.code >= n_o || it.input >= channel.input_size()) {
        return Err(Error::InvalidArgument(format!("stream item {bad:?} does not fit the code or channel")));
    }
    let mut rx = Receiver::new(schedule, channel, noise_seed, n_o, cap);
    for it in stream {
        if rx.done() {
            break;
        }
        rx.push(it);
    }
    Ok(rx.out)
}
