//! Shared random codebooks from a counter-based generator.
//!
//! Symbol `j` of the codeword for message `m` of inner code `k` is drawn from
//! ChaCha8 keyed by the master seed, on stream `(k << 32) | m`, at word
//! offset `2 (j - 1)`. Any symbol can be regenerated independently, so the
//! encoder and decoder agree exactly without storing codebooks.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::InputDistribution;

/// Stream reserved for the random switch. Codeword streams never reach it
/// because inner code indices stay below `2^31`.
const SWITCH_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodebookSeed {
    pub master_seed: u64,
}

impl CodebookSeed {
    pub fn new(master_seed: u64) -> Self {
        CodebookSeed { master_seed }
    }

    pub(crate) fn key(&self) -> [u8; 32] {
        ChaCha8Rng::seed_from_u64(self.master_seed).get_seed()
    }

    pub(crate) fn switch_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(SWITCH_STREAM);
        rng
    }
}

/// Inverse-CDF sampler for an input distribution.
#[derive(Clone, Debug)]
pub(crate) struct InputSampler {
    cdf: Vec<f64>,
}

impl InputSampler {
    pub(crate) fn new(px: &InputDistribution) -> Self {
        let mut acc = 0.0;
        let cdf = px
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        InputSampler { cdf }
    }

    #[inline]
    pub(crate) fn sample(&self, word: u64) -> usize {
        let u = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let last = self.cdf.len() - 1;
        self.cdf[..last].iter().position(|&c| u < c).unwrap_or(last)
    }
}

/// Reads one codeword, sequentially where possible.
pub(crate) struct CodewordReader<'a> {
    rng: ChaCha8Rng,
    sampler: &'a InputSampler,
    /// Position the generator will produce next.
    next: u64,
}

impl<'a> CodewordReader<'a> {
    pub(crate) fn new(key: &[u8; 32], sampler: &'a InputSampler, code: usize, message: u32) -> Self {
        let mut rng = ChaCha8Rng::from_seed(*key);
        rng.set_stream(((code as u64) << 32) | message as u64);
        CodewordReader { rng, sampler, next: 1 }
    }

    /// Symbol at position `j >= 1`.
    #[inline]
    pub(crate) fn symbol(&mut self, j: u64) -> usize {
        debug_assert!(j >= 1);
        if j != self.next {
            self.rng.set_word_pos(2 * (j as u128 - 1));
        }
        self.next = j + 1;
        self.sampler.sample(self.rng.next_u64())
    }
}

/// `C_theta(m)_j` for inner code `k`: a deterministic channel input.
pub fn inner_symbol(seed: &CodebookSeed, px: &InputDistribution, k: usize, message: u32, j: u64) -> usize {
    assert!(j >= 1, "codeword positions start at 1");
    let sampler = InputSampler::new(px);
    CodewordReader::new(&seed.key(), &sampler, k, message).symbol(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_random_access() {
        let seed = CodebookSeed::new(42);
        let u = InputDistribution::uniform(2);
        let a: Vec<usize> = (1..=50).map(|j| inner_symbol(&seed, &u, 3, 17, j)).collect();
        let b: Vec<usize> = (1..=50).map(|j| inner_symbol(&seed, &u, 3, 17, j)).collect();
        assert_eq!(a, b);
        let sampler = InputSampler::new(&u);
        let key = seed.key();
        let mut seq = CodewordReader::new(&key, &sampler, 3, 17);
        let c: Vec<usize> = (1..=50).map(|j| seq.symbol(j)).collect();
        assert_eq!(a, c);
        let mut jumpy = CodewordReader::new(&key, &sampler, 3, 17);
        for j in [40u64, 2, 33, 34, 1, 50] {
            assert_eq!(jumpy.symbol(j), a[j as usize - 1]);
        }
    }

    #[test]
    fn marginal_matches_input_distribution() {
        let px = InputDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let sampler = InputSampler::new(&px);
        let key = CodebookSeed::new(7).key();
        let mut r = CodewordReader::new(&key, &sampler, 0, 5);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for j in 1..=n {
            counts[r.symbol(j)] += 1;
        }
        let mut chi2 = 0.0;
        for (c, p) in counts.iter().zip(px.probs()) {
            let e = n as f64 * p;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - e).abs() < 3.0 * sigma, "{counts:?}");
            chi2 += (*c as f64 - e).powi(2) / e;
        }
        // chi-square with 2 degrees of freedom, 0.999 quantile
        assert!(chi2 < 13.82, "chi2 = {chi2}");
    }

    #[test]
    fn distinct_codes_are_uncorrelated() {
        let u = InputDistribution::uniform(2);
        let sampler = InputSampler::new(&u);
        let key = CodebookSeed::new(9).key();
        let mut a = CodewordReader::new(&key, &sampler, 1, 0);
        let mut b = CodewordReader::new(&key, &sampler, 2, 0);
        let n = 100_000;
        let mut s = 0.0;
        for j in 1..=n {
            let x = a.symbol(j) as f64 * 2.0 - 1.0;
            let y = b.symbol(j) as f64 * 2.0 - 1.0;
            s += x * y;
        }
        let corr = s / n as f64;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn sampler_edges() {
        let px = InputDistribution::new(vec![0.0, 1.0]).unwrap();
        let s = InputSampler::new(&px);
        assert_eq!(s.sample(0), 1);
        assert_eq!(s.sample(u64::MAX), 1);
        let px = InputDistribution::new(vec![1.0, 0.0]).unwrap();
        let s = InputSampler::new(&px);
        assert_eq!(s.sample(u64::MAX), 0);
    }
}
