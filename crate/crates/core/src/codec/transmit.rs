use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codebook::CodewordReader;
use super::{Codec, ConcatConfig};
use crate::error::{Error, Result};
use crate::outer::Symbol;

/// One transmitted channel input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamItem {
    /// Time index, from 1.
    pub slot: u64,
    /// Inner code chosen by the switch, `0..n_o`.
    pub code: usize,
    /// Position within that inner codeword, from 1.
    pub pos: u64,
    pub input: usize,
}

/// Endless transmitter: the switch picks a code uniformly per slot and that
/// code emits its next codeword symbol.
pub(crate) struct Transmitter<'a> {
    switch: ChaCha8Rng,
    readers: Vec<CodewordReader<'a>>,
    counts: Vec<u64>,
    slot: u64,
}

impl<'a> Transmitter<'a> {
    /// `macros[k]` is the inner message of code `k`.
    pub(crate) fn new(codec: &'a Codec, macros: &[u32]) -> Self {
        let readers = macros
            .iter()
            .enumerate()
            .map(|(k, &m)| CodewordReader::new(&codec.key, &codec.sampler, k, m))
            .collect();
        Transmitter {
            switch: codec.cfg.seed.switch_rng(),
            readers,
            counts: vec![0; macros.len()],
            slot: 0,
        }
    }
}

impl Iterator for Transmitter<'_> {
    type Item = StreamItem;

    fn next(&mut self) -> Option<StreamItem> {
        let k = self.switch.random_range(0..self.readers.len());
        self.slot += 1;
        self.counts[k] += 1;
        let pos = self.counts[k];
        Some(StreamItem {
            slot: self.slot,
            code: k,
            pos,
            input: self.readers[k].symbol(pos),
        })
    }
}

/// The first `length` channel inputs sent for an outer codeword.
pub fn transmit_stream(cfg: &ConcatConfig, outer_codeword: &[Symbol], length: usize) -> Result<Vec<StreamItem>> {
    if length == 0 {
        return Err(Error::InvalidArgument("stream length must be >= 1".into()));
    }
    let codec = Codec::new(cfg)?;
    if outer_codeword.len() != cfg.outer.n_o {
        return Err(Error::OuterCode(format!(
            "codeword has {} symbols, expected {}",
            outer_codeword.len(),
            cfg.outer.n_o
        )));
    }
    let macros: Vec<u32> = outer_codeword.iter().map(|&s| s as u32).collect();
    Ok(Transmitter::new(&codec, &macros).take(length).collect())
}
