//! Discrete memoryless channels and the information functionals evaluated
//! against them: Gallager's E0, mutual information and capacity.
//!
//! Every quantity is in nats. The conventions `0 * ln 0 = 0` and
//! `0^(1/(1+rho)) = 0` hold throughout.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum and symmetry comparisons use this absolute tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

const CAPACITY_MAX_ITERATIONS: usize = 100_000;

/// An amount of information in nats.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Nats(pub f64);

impl Nats {
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn to_bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }
}

impl fmt::Display for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nats", self.0)
    }
}

/// A finite-alphabet memoryless channel `p(y|x)`. Serializes as its rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    // row-major, row x holds p(.|x)
    transition: Vec<f64>,
    symmetric: bool,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs < 2 {
            return Err(Error::InvalidChannel(format!(
                "need at least 2 input symbols, got {inputs}"
            )));
        }
        let outputs = rows[0].len();
        if outputs < 2 {
            return Err(Error::InvalidChannel(format!(
                "need at least 2 output symbols, got {outputs}"
            )));
        }
        let mut transition = Vec::with_capacity(inputs * outputs);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has entry {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidChannel(format!(
                    "row {x} sums to {sum}, deviation {:e}",
                    (sum - 1.0).abs()
                )));
            }
            transition.extend_from_slice(row);
        }
        let mut ch = Channel {
            inputs,
            outputs,
            transition,
            symmetric: false,
        };
        ch.symmetric = ch.detect_symmetry();
        Ok(ch)
    }

    /// Binary symmetric channel in canonical form, `crossover` in `[0, 1/2]`.
    pub fn bsc(crossover: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&crossover) {
            return Err(Error::InvalidArgument(format!(
                "BSC crossover {crossover} outside [0, 1/2]"
            )));
        }
        Channel::new(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Result<Self> {
        Channel::new(
            (0..n)
                .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.inputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.transition[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inputs).map(|x| self.row(x).to_vec()).collect()
    }

    /// Symmetric in Gallager's sense: the outputs split into groups in which
    /// every row is a permutation of every other row and every column is a
    /// permutation of every other column. The uniform input then maximizes
    /// both E0 and mutual information.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn detect_symmetry(&self) -> bool {
        let column = |y: usize| {
            let mut c: Vec<f64> = (0..self.inputs).map(|x| self.prob(x, y)).collect();
            c.sort_by(f64::total_cmp);
            c
        };
        let same = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(u, v)| (u - v).abs() <= STOCHASTIC_TOL)
        };
        // Group columns by their sorted multiset of entries.
        let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
        for y in 0..self.outputs {
            let c = column(y);
            match groups.iter_mut().find(|(key, _)| same(key, &c)) {
                Some((_, members)) => members.push(y),
                None => groups.push((c, vec![y])),
            }
        }
        groups.iter().all(|(_, cols)| {
            let sorted_row = |x: usize| {
                let mut r: Vec<f64> = cols.iter().map(|&y| self.prob(x, y)).collect();
                r.sort_by(f64::total_cmp);
                r
            };
            let first = sorted_row(0);
            (1..self.inputs).all(|x| same(&first, &sorted_row(x)))
        })
    }

    /// Samples an output symbol for input `x` from a uniform draw in `[0, 1)`.
    pub fn sample_output(&self, x: usize, u: f64) -> usize {
        let row = self.row(x);
        let mut acc = 0.0;
        for (y, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        // u landed in the rounding slack above the last partial sum
        row.iter().rposition(|&p| p > 0.0).unwrap_or(self.outputs - 1)
    }

    /// Natural-log transition table, `-inf` where `p(y|x) = 0`.
    pub fn log_table(&self) -> Vec<f64> {
        self.transition.iter().map(|p| p.ln()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Channel {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Channel::new(rows)
    }
}

impl From<Channel> for Vec<Vec<f64>> {
    fn from(ch: Channel) -> Self {
        ch.rows()
    }
}

/// A probability vector over the channel input alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution(Vec<f64>);

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidDistribution(format!("entry {bad} is negative")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(InputDistribution(probs))
    }

    pub fn uniform(n: usize) -> Self {
        InputDistribution(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_against(&self, ch: &Channel) -> Result<()> {
        if self.0.len() != ch.input_size() {
            return Err(Error::InvalidDistribution(format!(
                "length {} does not match channel input size {}",
                self.0.len(),
                ch.input_size()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        InputDistribution::new(v)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(d: InputDistribution) -> Self {
        d.0
    }
}

/// On-disk channel description: `{"transition": [[..],..], "input_dist": [..]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub transition: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dist: Option<Vec<f64>>,
}

impl ChannelDocument {
    pub fn parse(text: &str) -> Result<(Channel, Option<InputDistribution>)> {
        let doc: ChannelDocument = serde_json::from_str(text)?;
        let ch = Channel::new(doc.transition)?;
        let px = doc.input_dist.map(InputDistribution::new).transpose()?;
        if let Some(px) = &px {
            px.check_against(&ch)?;
        }
        Ok((ch, px))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Channel, Option<InputDistribution>)> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Gallager's function
/// `E0(rho, p_X) = -ln sum_y (sum_x p_X(x) p(y|x)^(1/(1+rho)))^(1+rho)`.
///
/// Defined for `rho > -1`; the public precondition is `rho` in `[0, 1]`.
pub fn gallager_e0(ch: &Channel, px: &InputDistribution, rho: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&rho), "rho = {rho}");
    debug_assert_eq!(px.len(), ch.input_size());
    e0_raw(ch, px.probs(), rho)
}

pub(crate) fn e0_raw(ch: &Channel, px: &[f64], rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let a = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for y in 0..ch.output_size() {
        let mut inner = 0.0;
        for (x, &q) in px.iter().enumerate() {
            let p = ch.prob(x, y);
            if q > 0.0 && p > 0.0 {
                inner += q * p.powf(a);
            }
        }
        if inner > 0.0 {
            total += inner.powf(1.0 + rho);
        }
    }
    -total.ln()
}

/// `I(X;Y)` in nats.
pub fn mutual_information(ch: &Channel, px: &InputDistribution) -> f64 {
    mutual_information_raw(ch, px.probs())
}

fn output_marginal(ch: &Channel, px: &[f64]) -> Vec<f64> {
    (0..ch.output_size())
        .map(|y| px.iter().enumerate().map(|(x, &q)| q * ch.prob(x, y)).sum())
        .collect()
}

pub(crate) fn mutual_information_raw(ch: &Channel, px: &[f64]) -> f64 {
    let qy = output_marginal(ch, px);
    let mut info = 0.0;
    for (x, &q) in px.iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        for (y, &py) in qy.iter().enumerate() {
            let p = ch.prob(x, y);
            if p > 0.0 {
                info += q * p * (p / py).ln();
            }
        }
    }
    info.max(0.0)
}

/// Per-input divergences `D(p(.|x) || q)` used by the capacity iteration.
fn divergences(ch: &Channel, qy: &[f64]) -> Vec<f64> {
    (0..ch.input_size())
        .map(|x| {
            ch.row(x)
                .iter()
                .zip(qy)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, q)| p * (p / q).ln())
                .sum()
        })
        .collect()
}

/// Channel capacity and a capacity-achieving input distribution.
///
/// Symmetric channels take the uniform input directly. Everything else runs
/// the Blahut-Arimoto iteration until the gap between its upper and lower
/// capacity bounds drops below `tol`.
pub fn capacity(ch: &Channel, tol: f64) -> Result<(Nats, InputDistribution)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let n = ch.input_size();
    if ch.is_symmetric() {
        let px = InputDistribution::uniform(n);
        return Ok((Nats(mutual_information(ch, &px)), px));
    }
    let mut px = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..CAPACITY_MAX_ITERATIONS {
        let qy = output_marginal(ch, &px);
        let d = divergences(ch, &qy);
        let lower: f64 = px.iter().zip(&d).map(|(p, d)| p * d).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        residual = upper - lower;
        if residual < tol {
            let info = mutual_information_raw(ch, &px);
            return Ok((Nats(info), InputDistribution(px)));
        }
        let weights: Vec<f64> = px.iter().zip(&d).map(|(p, d)| p * d.exp()).collect();
        let z: f64 = weights.iter().sum();
        px = weights.into_iter().map(|w| w / z).collect();
    }
    Err(Error::NotConverged {
        iterations: CAPACITY_MAX_ITERATIONS,
        residual,
    })
}

/// Central-difference estimate of `dE0/drho` at `rho = 0`.
pub fn e0_slope_at_zero(ch: &Channel, px: &InputDistribution, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::InvalidArgument(format!("step h = {h} outside (0, 1e-3]")));
    }
    let p = px.probs();
    Ok((e0_raw(ch, p, h) - e0_raw(ch, p, -h)) / (2.0 * h))
}
