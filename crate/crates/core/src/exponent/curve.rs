//! Exponent curves over rate or normalized-rate grids, and their CSV form.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::concatenated::Bracket;
use super::unknown::suboptimal_outer_rate;
use super::Engine;
use crate::channel::{self, InputDistribution, Nats};
use crate::error::{Error, Result};

pub const DEFAULT_QUAD_STEPS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Efr,
    Efc,
    EfcTilde,
    Ec,
    EfcM(usize),
    EfcInf,
    /// Infinite-level integral without the fountain penalty, a comparison
    /// curve only.
    BzAnalog,
    Efcs,
    EfcGamma,
}

impl CurveKind {
    /// Curves indexed by `gamma = R / I(p_X)` instead of `R`.
    pub fn is_gamma_curve(self) -> bool {
        matches!(self, CurveKind::Efcs | CurveKind::EfcGamma)
    }

    pub fn name(self) -> String {
        self.to_string().replace(':', "_")
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::Efr => f.write_str("efr"),
            CurveKind::Efc => f.write_str("efc"),
            CurveKind::EfcTilde => f.write_str("efc_tilde"),
            CurveKind::Ec => f.write_str("ec"),
            CurveKind::EfcM(m) => write!(f, "efc_m:{m}"),
            CurveKind::EfcInf => f.write_str("efc_inf"),
            CurveKind::BzAnalog => f.write_str("bz_analog"),
            CurveKind::Efcs => f.write_str("efcs"),
            CurveKind::EfcGamma => f.write_str("efc_gamma"),
        }
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "efr" => CurveKind::Efr,
            "efc" => CurveKind::Efc,
            "efc_tilde" => CurveKind::EfcTilde,
            "ec" => CurveKind::Ec,
            "efc_inf" => CurveKind::EfcInf,
            "bz_analog" => CurveKind::BzAnalog,
            "efcs" => CurveKind::Efcs,
            "efc_gamma" => CurveKind::EfcGamma,
            _ => {
                let m = s
                    .strip_prefix("efc_m:")
                    .and_then(|m| m.parse::<usize>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown curve '{s}'")))?;
                CurveKind::EfcM(m)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    /// Rate in nats, or `gamma` for normalized-rate curves.
    pub x: f64,
    pub value: f64,
    pub rho_star: f64,
    pub ro_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub kind: CurveKind,
    pub rows: Vec<CurveRow>,
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

impl Engine {
    /// Evaluates a rate-indexed curve, in parallel over the grid.
    pub fn rate_curve(&self, kind: CurveKind, rates: &[f64], quad_steps: usize) -> Result<Curve> {
        if kind.is_gamma_curve() {
            return Err(Error::InvalidArgument(format!("{kind} is indexed by gamma, not rate")));
        }
        let rows = rates
            .par_iter()
            .map(|&r| {
                let r = Nats(r);
                let p = match kind {
                    CurveKind::Efr => self.random_fountain(r),
                    CurveKind::Efc => self.one_level(r),
                    CurveKind::EfcTilde => self.one_level_lower_bound(r),
                    CurveKind::Ec => self.forney(r),
                    CurveKind::EfcM(m) => self.multilevel(r, m),
                    CurveKind::EfcInf => self.infinite_level(r, quad_steps),
                    CurveKind::BzAnalog => self.blokh_zyablov_analog(r, quad_steps),
                    CurveKind::Efcs | CurveKind::EfcGamma => unreachable!(),
                }?;
                Ok(CurveRow {
                    x: r.get(),
                    value: p.value.get(),
                    rho_star: p.witness_rho,
                    ro_star: p.witness_ro,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Curve { kind, rows })
    }

    /// Evaluates `efc_gamma` (optimal outer rate) or `efcs` (the
    /// channel-independent outer rate) over a `gamma` grid.
    pub fn gamma_curve(&self, kind: CurveKind, gammas: &[f64], px: &InputDistribution) -> Result<Curve> {
        if !kind.is_gamma_curve() {
            return Err(Error::InvalidArgument(format!("{kind} is indexed by rate, not gamma")));
        }
        let info = channel::mutual_information_raw(&self.ch, px.probs());
        let rows = gammas
            .par_iter()
            .map(|&g| {
                let (value, ro) = match kind {
                    CurveKind::EfcGamma => {
                        let (v, ro) = self.e_fc_gamma_opt(g, px)?;
                        (v.get(), ro)
                    }
                    _ => {
                        let ro = suboptimal_outer_rate(g).min(1.0);
                        (self.e_fcs(g, px)?.get(), ro)
                    }
                };
                let rho_star = if ro < 1.0 {
                    let prof = self.profile(px.probs());
                    Engine::one_level_inner(&prof, g * info, ro, Bracket::Fountain).0
                } else {
                    0.0
                };
                Ok(CurveRow { x: g, value, rho_star, ro_star: ro })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Curve { kind, rows })
    }
}

/// Writes the curve as CSV, twelve significant digits per number.
pub fn write_csv<W: Write>(curve: &Curve, units: Units, mut w: W) -> Result<()> {
    let scale = match units {
        Units::Nats => 1.0,
        Units::Bits => 1.0 / std::f64::consts::LN_2,
    };
    let unit = match units {
        Units::Nats => "nats",
        Units::Bits => "bits",
    };
    let gamma = curve.kind.is_gamma_curve();
    let m = match curve.kind {
        CurveKind::EfcM(m) => Some(m),
        _ => None,
    };
    if gamma {
        write!(w, "gamma,exponent_{unit},rho_star,ro_star")?;
    } else {
        write!(w, "rate_{unit},exponent_{unit},rho_star,ro_star")?;
    }
    writeln!(w, "{}", if m.is_some() { ",m" } else { "" })?;
    for row in &curve.rows {
        let x = if gamma { row.x } else { row.x * scale };
        write!(
            w,
            "{:.11e},{:.11e},{:.11e},{:.11e}",
            x,
            row.value * scale,
            row.rho_star,
            row.ro_star
        )?;
        match m {
            Some(m) => writeln!(w, ",{m}")?,
            None => writeln!(w)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::exponent::OptimizerGrid;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["efr", "efc", "efc_tilde", "ec", "efc_m:4", "efc_inf", "bz_analog", "efcs", "efc_gamma"] {
            let k: CurveKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("efc_m:0".parse::<CurveKind>().is_err());
        assert!("efc_m:x".parse::<CurveKind>().is_err());
        assert!("nope".parse::<CurveKind>().is_err());
        assert_eq!(CurveKind::EfcM(8).name(), "efc_m_8");
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.1, 0.9, 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[4], 0.9);
        assert_eq!(linspace(0.3, 1.0, 1), vec![0.3]);
    }

    #[test]
    fn csv_layout() {
        let e = Engine::new(&Channel::bsc(0.1).unwrap(), OptimizerGrid::default()).unwrap();
        let c = e.capacity().get();
        let curve = e.rate_curve(CurveKind::EfcM(2), &[0.25 * c, 0.5 * c, c], 256).unwrap();
        let mut buf = Vec::new();
        write_csv(&curve, Units::Nats, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "rate_nats,exponent_nats,rho_star,ro_star,m");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with(&format!("{:.11e},0.00000000000e0", c)));
        assert!(lines[1].ends_with(",2"));

        let mut bits = Vec::new();
        write_csv(&curve, Units::Bits, &mut bits).unwrap();
        let bits = String::from_utf8(bits).unwrap();
        assert!(bits.starts_with("rate_bits,exponent_bits"));
    }

    #[test]
    fn curve_is_order_independent() {
        let e = Engine::new(&Channel::bsc(0.1).unwrap(), OptimizerGrid::default()).unwrap();
        let c = e.capacity().get();
        let rates = linspace(0.1 * c, 0.9 * c, 9);
        let a = e.rate_curve(CurveKind::Efc, &rates, 256).unwrap();
        let rev: Vec<f64> = rates.iter().rev().copied().collect();
        let b = e.rate_curve(CurveKind::Efc, &rev, 256).unwrap();
        for (x, y) in a.rows.iter().zip(b.rows.iter().rev()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn gamma_curve_ordering() {
        let e = Engine::new(&Channel::bsc(0.1).unwrap(), OptimizerGrid::default()).unwrap();
        let u = InputDistribution::uniform(2);
        let gs = linspace(0.05, 0.99, 12);
        let opt = e.gamma_curve(CurveKind::EfcGamma, &gs, &u).unwrap();
        let sub = e.gamma_curve(CurveKind::Efcs, &gs, &u).unwrap();
        for (o, s) in opt.rows.iter().zip(&sub.rows) {
            assert!(s.value <= o.value + 1e-12);
        }
        let mut buf = Vec::new();
        write_csv(&sub, Units::Nats, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("gamma,exponent_nats,rho_star,ro_star\n"));
    }
}
