use serde::{Deserialize, Serialize};

use super::{Codec, ConcatConfig, InnerDecision};
use crate::error::{Error, Result};
use crate::outer::{reliability_order, ReedSolomon, Symbol};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmdOutcome {
    pub message: Vec<Symbol>,
    pub codeword: Vec<Symbol>,
    /// Erasures in the trial that produced the codeword.
    pub erasures: usize,
    /// `sum_k alpha_k mu_k` for the accepted codeword.
    pub score: f64,
}

/// `sum_k alpha_k mu_k`, with `mu_k = +1` where the codeword agrees with the
/// inner decision and `-1` elsewhere.
pub(crate) fn gmd_score(codeword: &[Symbol], xi: &[Symbol], alpha: &[f64]) -> f64 {
    codeword
        .iter()
        .zip(xi)
        .zip(alpha)
        .map(|((c, x), a)| if c == x { *a } else { -*a })
        .sum()
}

/// Generalized minimum distance decoding: for `j = 0..=n_o - k_o`, erase the
/// `j` least reliable symbols and run errors-and-erasures decoding; accept
/// the first codeword with `sum alpha mu > r_o n_o`.
pub(crate) fn gmd_symbols(rs: &ReedSolomon, xi: &[Symbol], alpha: &[f64]) -> Option<GmdOutcome> {
    let spec = rs.spec();
    let n = spec.n_o;
    let threshold = spec.k_o as f64;
    let order = reliability_order(alpha);
    let mut erased = vec![false; n];
    let mut last: Option<Vec<Symbol>> = None;
    for j in 0..=spec.redundancy() {
        if j > 0 {
            erased[order[j - 1]] = true;
        }
        let Some(cw) = rs.decode_word(xi, &erased) else { continue };
        // consecutive trials often land on the same codeword
        if last.as_ref() == Some(&cw) {
            continue;
        }
        let score = gmd_score(&cw, xi, alpha);
        if score > threshold {
            return Some(GmdOutcome {
                message: cw[..spec.k_o].to_vec(),
                codeword: cw,
                erasures: j,
                score,
            });
        }
        last = Some(cw);
    }
    None
}

impl Codec {
    pub(crate) fn gmd(&self, decisions: &[InnerDecision]) -> Option<GmdOutcome> {
        let xi: Vec<Symbol> = decisions.iter().map(|d| d.xi_hat as Symbol).collect();
        let alpha: Vec<f64> = decisions.iter().map(|d| d.alpha).collect();
        gmd_symbols(&self.rs, &xi, &alpha)
    }
}

/// GMD decoding of the outer code from `n_o` inner decisions. `Ok(None)`
/// signals a decoding failure.
pub fn gmd_decode(cfg: &ConcatConfig, decisions: &[InnerDecision]) -> Result<Option<GmdOutcome>> {
    let n = cfg.outer.n_o;
    if decisions.len() != n {
        return Err(Error::OuterCode(format!("{} decisions for {n} inner codes", decisions.len())));
    }
    let size = cfg.outer.alphabet_size() as u32;
    if let Some(d) = decisions.iter().find(|d| d.xi_hat >= size || !(0.0..=1.0).contains(&d.alpha)) {
        return Err(Error::OuterCode(format!("malformed inner decision {d:?}")));
    }
    let rs = ReedSolomon::new(cfg.outer)?;
    let xi: Vec<Symbol> = decisions.iter().map(|d| d.xi_hat as Symbol).collect();
    let alpha: Vec<f64> = decisions.iter().map(|d| d.alpha).collect();
    Ok(gmd_symbols(&rs, &xi, &alpha))
}
