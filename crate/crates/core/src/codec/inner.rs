use serde::{Deserialize, Serialize};

use super::codebook::CodewordReader;
use super::{Codec, ConcatConfig};
use crate::error::{Error, Result};

/// Outcome of maximum-likelihood decoding of one inner code.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerDecision {
    /// Most likely inner message (an outer symbol, or a packed macro symbol).
    pub xi_hat: u32,
    /// Reliability weight in `[0, 1]`.
    pub alpha: f64,
    /// Symbols used, over the expected count.
    pub z: f64,
    pub loglik_best: f64,
    pub loglik_second: f64,
}

impl InnerDecision {
    fn empty() -> Self {
        InnerDecision {
            xi_hat: 0,
            alpha: 0.0,
            z: 0.0,
            loglik_best: 0.0,
            loglik_second: 0.0,
        }
    }
}

impl Codec {
    /// ML decoding of inner code `k` over `candidates` (ascending; ties go
    /// to the earliest). `n_norm` is the expected symbol count at the
    /// decoding point.
    pub(crate) fn decide<I>(&self, k: usize, rx: &[(u64, usize)], candidates: I, n_norm: f64) -> InnerDecision
    where
        I: IntoIterator<Item = u32>,
    {
        if rx.is_empty() {
            let mut d = InnerDecision::empty();
            d.xi_hat = candidates.into_iter().next().unwrap_or(0);
            return d;
        }
        let outs = self.outputs;
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        let mut arg = None;
        for m in candidates {
            let mut reader = CodewordReader::new(&self.key, &self.sampler, k, m);
            let mut ll = 0.0;
            for &(pos, y) in rx {
                ll += self.log_table[reader.symbol(pos) * outs + y];
                // log-likelihoods only fall; this one can no longer place
                if ll < second {
                    break;
                }
            }
            if arg.is_none() || ll > best {
                second = best;
                best = ll;
                arg = Some(m);
            } else if ll > second {
                second = ll;
            }
        }
        let gap = best - second;
        let alpha = if best == f64::NEG_INFINITY || gap.is_nan() {
            0.0
        } else {
            (gap / (self.weight_scale * n_norm)).clamp(0.0, 1.0)
        };
        InnerDecision {
            xi_hat: arg.unwrap_or(0),
            alpha,
            z: rx.len() as f64 / n_norm,
            loglik_best: best,
            loglik_second: second,
        }
    }
}

/// Decodes inner code `k` from its received `(position, output)` pairs over
/// all `2^field_bits` messages.
pub fn inner_ml_decode(cfg: &ConcatConfig, k: usize, received_k: &[(u64, usize)]) -> Result<InnerDecision> {
    let codec = Codec::new(cfg)?;
    if k >= cfg.outer.n_o {
        return Err(Error::InvalidArgument(format!("inner code {k} out of range 0..{}", cfg.outer.n_o)));
    }
    if let Some(bad) = received_k.iter().find(|(p, y)| *p == 0 || *y >= cfg.channel.output_size()) {
        return Err(Error::InvalidArgument(format!("received pair {bad:?} is malformed")));
    }
    let all = 0..(1u32 << codec.message_bits);
    Ok(codec.decide(k, received_k, all, cfg.n_i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::codec::inner_symbol;
    use crate::outer::OuterCodeSpec;
    use crate::sim::PeEstimate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(ch: Channel, n_i: usize) -> ConcatConfig {
        ConcatConfig::new(OuterCodeSpec::new(64, 32, 8).unwrap(), n_i, ch, 77)
    }

    fn observe(cfg: &ConcatConfig, k: usize, m: u32, n: usize, rng: &mut ChaCha8Rng) -> Vec<(u64, usize)> {
        (1..=n as u64)
            .map(|j| {
                let x = inner_symbol(&cfg.seed, &cfg.px, k, m, j);
                (j, cfg.channel.sample_output(x, rng.random::<f64>()))
            })
            .collect()
    }

    #[test]
    fn noiseless_decodes_with_confidence() {
        let c = cfg(Channel::identity(2).unwrap(), 60);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rx = observe(&c, 3, 201, 60, &mut rng);
        let d = inner_ml_decode(&c, 3, &rx).unwrap();
        assert_eq!(d.xi_hat, 201);
        assert_eq!(d.alpha, 1.0);
        assert_eq!(d.z, 1.0);
        assert_eq!(d.loglik_best, 0.0);
    }

    #[test]
    fn empty_input_has_zero_weight() {
        let c = cfg(Channel::bsc(0.1).unwrap(), 60);
        let d = inner_ml_decode(&c, 0, &[]).unwrap();
        assert_eq!((d.xi_hat, d.alpha, d.z), (0, 0.0, 0.0));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // a flat likelihood table makes every message equally likely
        let base = Codec::new(&cfg(Channel::bsc(0.1).unwrap(), 60)).unwrap();
        let codec = Codec { log_table: vec![0.5f64.ln(); 4], ..base };
        let d = codec.decide(5, &[(1, 0), (2, 1), (3, 1)], 0..256, 60.0);
        assert_eq!(d.xi_hat, 0);
        assert_eq!(d.alpha, 0.0);
        let d = codec.decide(5, &[(1, 0)], 17..40, 60.0);
        assert_eq!(d.xi_hat, 17);
    }

    #[test]
    fn rejects_malformed_pairs() {
        let c = cfg(Channel::bsc(0.1).unwrap(), 60);
        assert!(inner_ml_decode(&c, 64, &[]).is_err());
        assert!(inner_ml_decode(&c, 0, &[(0, 1)]).is_err());
        assert!(inner_ml_decode(&c, 0, &[(1, 2)]).is_err());
    }

    #[test]
    fn error_rate_falls_with_length() {
        // 8 bits over 20 expected symbols is 0.277 nats, below C = 0.368
        let c = cfg(Channel::bsc(0.1).unwrap(), 20);
        let codec = Codec::new(&c).unwrap();
        let trials = 2000;
        let mut est = Vec::new();
        for z in [0.5f64, 1.0, 2.0] {
            let n = (z * 20.0) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(z.to_bits());
            let errors = (0..trials)
                .filter(|t| {
                    let k = t % 64;
                    let m = rng.random_range(0..256u32);
                    let rx = observe(&c, k, m, n, &mut rng);
                    codec.decide(k, &rx, 0..256, 20.0).xi_hat != m
                })
                .count();
            est.push(PeEstimate::new(n, errors, trials));
        }
        for w in est.windows(2) {
            assert!(w[1].ci_high < w[0].ci_low, "{est:?}");
        }
    }
}
