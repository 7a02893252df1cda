//! Rate-compatible operation: `L` sub-messages are outer encoded separately
//! and their symbols stacked into macro symbols, one inner code per macro
//! symbol. A decoder that already knows some sub-messages keeps only the
//! inner codewords consistent with them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::gmd::gmd_symbols;
use super::transmit::Transmitter;
use super::{Codec, ConcatConfig, Received, Schedule, StreamItem};
use crate::error::{Error, Result};
use crate::outer::Symbol;

#[derive(Clone, Debug)]
pub struct RateCompatible {
    codec: Codec,
}

/// Outcome of a rate-compatible transmission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcRoundTrip {
    pub success: bool,
    /// All sub-messages, known ones included, when decoding succeeded.
    pub decoded: Option<Vec<Vec<Symbol>>>,
    pub received: usize,
}

impl RateCompatible {
    pub fn new(cfg: &ConcatConfig, parts: usize) -> Result<Self> {
        Ok(RateCompatible { codec: Codec::with_parts(cfg, parts)? })
    }

    /// The same scheme with its inner codebooks redrawn from `seed`.
    pub fn with_codebook(&self, seed: u64) -> Self {
        RateCompatible { codec: self.codec.with_codebook(seed) }
    }

    pub fn parts(&self) -> usize {
        self.codec.parts
    }

    fn bits(&self) -> u32 {
        self.codec.cfg.outer.field_bits
    }

    /// `N_l = N_o N_i * unknown / L`: symbols needed when `unknown` of the
    /// equal-rate sub-messages are still unknown.
    pub fn decode_length(&self, unknown: usize) -> usize {
        let n = self.codec.cfg.design_length() * unknown;
        n.div_ceil(self.parts())
    }

    fn check_part(&self, m: &[Symbol]) -> Result<()> {
        let spec = &self.codec.cfg.outer;
        if m.len() != spec.k_o {
            return Err(Error::InvalidArgument(format!("sub-message has {} symbols, expected {}", m.len(), spec.k_o)));
        }
        if let Some(s) = m.iter().find(|&&s| s as usize >= spec.alphabet_size()) {
            return Err(Error::InvalidArgument(format!("symbol {s} outside GF(2^{})", spec.field_bits)));
        }
        Ok(())
    }

    /// Outer codewords and the packed macro symbols, part `i` in bits
    /// `i * field_bits ..`.
    pub fn macros(&self, submessages: &[Vec<Symbol>]) -> Result<Vec<u32>> {
        if submessages.len() != self.parts() {
            return Err(Error::InvalidArgument(format!(
                "{} sub-messages, expected {}",
                submessages.len(),
                self.parts()
            )));
        }
        let mut macros = vec![0u32; self.codec.cfg.outer.n_o];
        for (i, m) in submessages.iter().enumerate() {
            self.check_part(m)?;
            let cw = self.codec.rs.encode(m)?;
            for (acc, &s) in macros.iter_mut().zip(&cw) {
                *acc |= (s as u32) << (i as u32 * self.bits());
            }
        }
        Ok(macros)
    }

    pub fn encode(&self, submessages: &[Vec<Symbol>], length: usize) -> Result<Vec<StreamItem>> {
        let macros = self.macros(submessages)?;
        Ok(Transmitter::new(&self.codec, &macros).take(length).collect())
    }

    /// Decodes the unknown sub-messages, conditioning on `known`.
    pub fn decode(&self, rx: &Received, known: &BTreeMap<usize, Vec<Symbol>>) -> Result<Option<Vec<Vec<Symbol>>>> {
        let parts = self.parts();
        let bits = self.bits();
        let n_o = self.codec.cfg.outer.n_o;
        if rx.symbols.len() != n_o {
            return Err(Error::InvalidArgument(format!("{} received groups for {n_o} inner codes", rx.symbols.len())));
        }
        let mut fixed = vec![0u32; n_o];
        for (&i, m) in known {
            if i >= parts {
                return Err(Error::InvalidArgument(format!("known sub-message {i} out of range 0..{parts}")));
            }
            self.check_part(m)?;
            let cw = self.codec.rs.encode(m)?;
            for (acc, &s) in fixed.iter_mut().zip(&cw) {
                *acc |= (s as u32) << (i as u32 * bits);
            }
        }
        let unknown: Vec<usize> = (0..parts).filter(|i| !known.contains_key(i)).collect();
        if unknown.is_empty() {
            return Ok(Some(known.values().cloned().collect()));
        }

        let mask = (1u32 << bits) - 1;
        let free_bits = bits * unknown.len() as u32;
        let scatter = |t: u32| -> u32 {
            unknown
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &i)| acc | (((t >> (j as u32 * bits)) & mask) << (i as u32 * bits)))
        };
        let n_norm = self.codec.cfg.n_i as f64 * unknown.len() as f64 / parts as f64;
        let decisions: Vec<_> = rx
            .symbols
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let base = fixed[k];
                self.codec.decide(k, s, (0..1u32 << free_bits).map(|t| base | scatter(t)), n_norm)
            })
            .collect();
        let alpha: Vec<f64> = decisions.iter().map(|d| d.alpha).collect();

        let mut out = vec![Vec::new(); parts];
        for (&i, m) in known {
            out[i] = m.clone();
        }
        for &i in &unknown {
            let xi: Vec<Symbol> = decisions
                .iter()
                .map(|d| ((d.xi_hat >> (i as u32 * bits)) & mask) as Symbol)
                .collect();
            match gmd_symbols(&self.codec.rs, &xi, &alpha) {
                Some(o) => out[i] = o.message,
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// Transmits all sub-messages until `schedule` is satisfied and decodes
    /// with the parts listed in `known` supplied to the decoder.
    pub fn roundtrip(
        &self,
        submessages: &[Vec<Symbol>],
        known: &[usize],
        schedule: &Schedule,
        noise_seed: u64,
    ) -> Result<RcRoundTrip> {
        let macros = self.macros(submessages)?;
        let known_map: BTreeMap<usize, Vec<Symbol>> = known
            .iter()
            .map(|&i| {
                submessages
                    .get(i)
                    .cloned()
                    .map(|m| (i, m))
                    .ok_or_else(|| Error::InvalidArgument(format!("known sub-message {i} out of range")))
            })
            .collect::<Result<_>>()?;
        let unknown = self.parts() - known_map.len();
        let n_norm = self.codec.cfg.n_i as f64 * unknown.max(1) as f64 / self.parts() as f64;
        let rx = self.codec.receive(&macros, schedule, noise_seed, self.codec.truncation_cap(n_norm))?;
        let decoded = self.decode(&rx, &known_map)?;
        Ok(RcRoundTrip {
            success: decoded.as_deref() == Some(submessages),
            decoded,
            received: rx.total(),
        })
    }
}

pub fn rate_compatible_encode(cfg: &ConcatConfig, submessages: &[Vec<Symbol>], length: usize) -> Result<Vec<StreamItem>> {
    RateCompatible::new(cfg, submessages.len())?.encode(submessages, length)
}

pub fn rate_compatible_decode(
    cfg: &ConcatConfig,
    parts: usize,
    received: &Received,
    known: &BTreeMap<usize, Vec<Symbol>>,
) -> Result<Option<Vec<Vec<Symbol>>>> {
    RateCompatible::new(cfg, parts)?.decode(received, known)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::codec::{apply_schedule, transmit_stream};
    use crate::outer::{outer_encode, OuterCodeSpec};

    fn cfg(field_bits: u32, n_o: usize, k_o: usize, n_i: usize, ch: Channel) -> ConcatConfig {
        ConcatConfig::new(OuterCodeSpec::new(n_o, k_o, field_bits).unwrap(), n_i, ch, 21)
    }

    fn part(k: usize, bits: u32, salt: u16) -> Vec<Symbol> {
        (0..k as u16).map(|i| (i * 7 + salt) & ((1 << bits) - 1)).collect()
    }

    #[test]
    fn single_part_matches_plain_encoding() {
        let c = cfg(8, 16, 8, 30, Channel::bsc(0.05).unwrap());
        let m = part(8, 8, 3);
        let a = rate_compatible_encode(&c, &[m.clone()], 400).unwrap();
        let b = transmit_stream(&c, &outer_encode(&c.outer, &m).unwrap(), 400).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_small_parts_round_trip_noiselessly() {
        let c = cfg(4, 15, 7, 12, Channel::identity(2).unwrap());
        let parts = vec![part(7, 4, 1), part(7, 4, 9)];
        let rc = RateCompatible::new(&c, 2).unwrap();
        let out = rc.roundtrip(&parts, &[], &Schedule::prefix(rc.decode_length(2)), 5).unwrap();
        assert!(out.success);
        assert_eq!(out.received, 180);
        let out = rc.roundtrip(&parts, &[1], &Schedule::prefix(rc.decode_length(1)), 5).unwrap();
        assert!(out.success);
        assert_eq!(out.received, 90);
    }

    #[test]
    fn everything_known_needs_nothing() {
        let c = cfg(4, 15, 7, 12, Channel::identity(2).unwrap());
        let parts = vec![part(7, 4, 1), part(7, 4, 2)];
        let known: BTreeMap<usize, Vec<Symbol>> = parts.iter().cloned().enumerate().collect();
        let rx = Received { symbols: vec![Vec::new(); 15], counts: vec![0; 15], ..Default::default() };
        assert_eq!(rate_compatible_decode(&c, 2, &rx, &known).unwrap(), Some(parts));
    }

    #[test]
    fn known_values_are_side_information() {
        // a wrong known part is trusted; the unknown part is still decoded
        // against the codebooks it selects, and the output repeats it
        let c = cfg(4, 15, 7, 12, Channel::identity(2).unwrap());
        let parts = vec![part(7, 4, 1), part(7, 4, 2)];
        let rc = RateCompatible::new(&c, 2).unwrap();
        let stream = rc.encode(&parts, 200).unwrap();
        let rx = apply_schedule(&stream, &Schedule::prefix(90), &c.channel, 1, 15, 24).unwrap();
        let wrong = part(7, 4, 5);
        let known = BTreeMap::from([(1, wrong.clone())]);
        if let Some(out) = rc.decode(&rx, &known).unwrap() {
            assert_eq!(out[1], wrong);
        }
    }

    #[test]
    fn inconsistent_known_values_are_errors() {
        let c = cfg(4, 15, 7, 12, Channel::identity(2).unwrap());
        let rc = RateCompatible::new(&c, 2).unwrap();
        let rx = Received { symbols: vec![Vec::new(); 15], counts: vec![0; 15], ..Default::default() };
        assert!(rc.decode(&rx, &BTreeMap::from([(2, part(7, 4, 0))])).is_err());
        assert!(rc.decode(&rx, &BTreeMap::from([(0, part(6, 4, 0))])).is_err());
        assert!(rc.decode(&rx, &BTreeMap::from([(0, vec![16; 7])])).is_err());
        assert!(rc.macros(&[part(7, 4, 0)]).is_err());
    }

    #[test]
    fn macro_space_is_capped() {
        let c = cfg(8, 16, 8, 200, Channel::bsc(0.01).unwrap());
        assert!(RateCompatible::new(&c, 2).is_ok());
        assert!(RateCompatible::new(&c, 3).is_err());
    }
}
