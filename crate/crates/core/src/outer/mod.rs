//! Reed-Solomon outer code with errors-and-erasures decoding, and the
//! erasure patterns tried by generalized minimum distance decoding.

pub mod gf;
mod rs;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use gf::Field;
pub use rs::ReedSolomon;

/// An outer code symbol, a field element in `[0, 2^field_bits)`.
pub type Symbol = u16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterCodeSpec {
    pub n_o: usize,
    pub k_o: usize,
    /// 8 by default; 4 is accepted for rate-compatible macro symbols.
    pub field_bits: u32,
}

impl OuterCodeSpec {
    pub fn new(n_o: usize, k_o: usize, field_bits: u32) -> Result<Self> {
        let spec = OuterCodeSpec { n_o, k_o, field_bits };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if Field::get(self.field_bits).is_none() {
            return Err(Error::OuterCode(format!(
                "field_bits must be 4 or 8, got {}",
                self.field_bits
            )));
        }
        let max_n = (1usize << self.field_bits) - 1;
        if !(1 <= self.k_o && self.k_o < self.n_o && self.n_o <= max_n) {
            return Err(Error::OuterCode(format!(
                "need 1 <= k_o < n_o <= {max_n}, got n_o = {}, k_o = {}",
                self.n_o, self.k_o
            )));
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        self.k_o as f64 / self.n_o as f64
    }

    /// `n_o - k_o`, the number of erasures correctable.
    pub fn redundancy(&self) -> usize {
        self.n_o - self.k_o
    }

    pub fn alphabet_size(&self) -> usize {
        1usize << self.field_bits
    }
}

/// Systematic encoding: the first `k_o` symbols are the message.
pub fn outer_encode(spec: &OuterCodeSpec, message: &[Symbol]) -> Result<Vec<Symbol>> {
    ReedSolomon::new(*spec)?.encode(message)
}

/// Decodes a received word in which `erased[i]` marks erasures. Returns
/// `Ok(None)` when the word is not within `2t + d <= n_o - k_o` of a
/// codeword (or no codeword could be confirmed).
pub fn decode_errors_erasures(spec: &OuterCodeSpec, received: &[Symbol], erased: &[bool]) -> Result<Option<Vec<Symbol>>> {
    ReedSolomon::new(*spec)?.decode(received, erased)
}

/// GMD erasure patterns: pattern `j` erases the `j` positions of lowest
/// weight, for `j = 0..=max_erasures`. Equal weights erase the lower
/// index first.
pub fn gmd_candidate_set(weights: &[f64], max_erasures: usize) -> Vec<Vec<usize>> {
    let order = reliability_order(weights);
    (0..=max_erasures.min(weights.len()))
        .map(|j| {
            let mut p = order[..j].to_vec();
            p.sort_unstable();
            p
        })
        .collect()
}

/// Positions sorted by increasing weight, ties by index.
pub(crate) fn reliability_order(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    order
}

/// Lowercase hex of a symbol sequence, two or one digits per symbol.
pub fn hex_dump(spec: &OuterCodeSpec, symbols: &[Symbol]) -> String {
    let w = spec.field_bits.div_ceil(4) as usize;
    symbols.iter().map(|s| format!("{s:0w$x}")).collect()
}
