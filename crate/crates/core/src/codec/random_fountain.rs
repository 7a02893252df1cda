//! Plain random fountain codes with maximum-likelihood decoding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::codebook::{CodewordReader, InputSampler};
use super::CodebookSeed;
use crate::channel::{self, Channel, InputDistribution, Nats};
use crate::error::{Error, Result};
use crate::sim::{trial_seeds, PeEstimate};

/// Largest message set decoded exhaustively.
pub const MAX_MESSAGES: usize = 64;

/// Error probability of a random fountain code with `w` messages, decoded
/// after the first `N` received symbols, for each `N` in `n_values`
/// (strictly increasing). Every trial draws a fresh codebook, message and
/// noise; larger `N` extend the same trial's prefix.
pub fn random_fountain_sim_at(
    ch: &Channel,
    px: &InputDistribution,
    w: usize,
    seed: u64,
    trials: usize,
    n_values: &[usize],
) -> Result<Vec<PeEstimate>> {
    if !(2..=MAX_MESSAGES).contains(&w) {
        return Err(Error::InvalidArgument(format!("need 2 <= W <= {MAX_MESSAGES}, got {w}")));
    }
    if trials == 0 || n_values.is_empty() || n_values[0] == 0 || n_values.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidArgument("need trials > 0 and strictly increasing positive N".into()));
    }
    if px.len() != ch.input_size() {
        return Err(Error::InvalidDistribution("input distribution does not match channel".into()));
    }
    let sampler = InputSampler::new(px);
    let logs = ch.log_table();
    let outs = ch.output_size();
    let n_max = *n_values.last().unwrap();

    let failures: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seeds(seed, t as u64);
            let key = CodebookSeed::new(s.codebook).key();
            let mut msg_rng = ChaCha8Rng::seed_from_u64(s.message);
            let truth = msg_rng.random_range(0..w);
            let mut noise = ChaCha8Rng::seed_from_u64(s.noise);
            let mut readers: Vec<CodewordReader<'_>> =
                (0..w).map(|m| CodewordReader::new(&key, &sampler, 0, m as u32)).collect();
            let mut ll = vec![0.0f64; w];
            let mut errors = vec![0usize; n_values.len()];
            let mut next = 0;
            for j in 1..=n_max as u64 {
                let x = readers[truth].symbol(j);
                let y = ch.sample_output(x, noise.random::<f64>());
                for (m, r) in readers.iter_mut().enumerate() {
                    let xm = if m == truth { x } else { r.symbol(j) };
                    ll[m] += logs[xm * outs + y];
                }
                if j as usize == n_values[next] {
                    // ties go to the lowest index, as in the inner decoder
                    let mut arg = 0;
                    for m in 1..w {
                        if ll[m] > ll[arg] {
                            arg = m;
                        }
                    }
                    errors[next] = (arg != truth) as usize;
                    next += 1;
                }
            }
            errors.iter().enumerate().fold(0usize, |acc, (i, &e)| acc | (e << i))
        })
        .collect();

    Ok(n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let f = failures.iter().filter(|&&bits| bits >> i & 1 == 1).count();
            PeEstimate::new(n, f, trials)
        })
        .collect())
}

/// [`random_fountain_sim_at`] at `N = ceil(ln W / rate)` and three
/// doublings of it.
pub fn random_fountain_sim(
    ch: &Channel,
    px: &InputDistribution,
    rate: Nats,
    w: usize,
    seed: u64,
    trials: usize,
) -> Result<Vec<PeEstimate>> {
    if !(rate.get() > 0.0) {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {}", rate.get())));
    }
    let n0 = ((w as f64).ln() / rate.get()).ceil().max(1.0) as usize;
    let ns: Vec<usize> = (0..4).map(|i| n0 << i).collect();
    random_fountain_sim_at(ch, px, w, seed, trials, &ns)
}

/// Gallager's ensemble bound `min_rho (W - 1)^rho exp(-N E0(rho))`.
pub fn random_fountain_union_bound(ch: &Channel, px: &InputDistribution, w: usize, n: usize) -> f64 {
    let lw = ((w - 1) as f64).ln();
    (0..=1000)
        .map(|i| {
            let rho = i as f64 / 1000.0;
            (rho * lw - n as f64 * channel::gallager_e0(ch, px, rho)).exp()
        })
        .fold(1.0, f64::min)
}
