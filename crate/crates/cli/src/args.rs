//! Parsers for the compact argument forms: channels, rate grids, schedules.

use fel_core::codec::ScheduleKind;
use fel_core::exponent::curve::linspace;
use fel_core::sim::RateCompatibleSpec;
use fel_core::{Channel, InputDistribution};

use crate::CliError;

/// `bsc:<p>` or a path to a JSON channel document.
pub fn channel(spec: &str) -> Result<(Channel, Option<InputDistribution>), CliError> {
    if let Some(p) = spec.strip_prefix("bsc:") {
        let p: f64 = p.parse().map_err(|_| CliError::usage(format!("bad crossover probability in {spec:?}")))?;
        return Ok((Channel::bsc(p).map_err(CliError::usage)?, None));
    }
    fel_core::channel::ChannelDocument::load(spec).map_err(|e| CliError::usage(format!("channel {spec:?}: {e}")))
}

/// A rate in nats, or a fraction of capacity with suffix `c`.
pub fn rate(s: &str, capacity: f64) -> Result<f64, CliError> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix('c') {
        Some(n) => (n, capacity),
        None => (s, 1.0),
    };
    let v: f64 = num.parse().map_err(|_| CliError::usage(format!("bad rate {s:?}")))?;
    Ok(v * scale)
}

/// `lo:hi:n` (inclusive, `n` points) or a comma list. Bounds go through
/// `value`.
pub fn grid(s: &str, value: impl Fn(&str) -> Result<f64, CliError>) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let n: usize = n.parse().map_err(|_| CliError::usage(format!("bad point count in {s:?}")))?;
            if n == 0 {
                return Err(CliError::usage(format!("empty grid {s:?}")));
            }
            Ok(linspace(value(lo)?, value(hi)?, n))
        }
        [_] => s.split(',').map(&value).collect(),
        _ => Err(CliError::usage(format!("grid {s:?} is neither lo:hi:n nor a comma list"))),
    }
}

pub fn plain(s: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::usage(format!("bad number {s:?}")))
}

/// `prefix`, `thin:<p_keep>` or `starve:<fraction>`.
pub fn schedule(s: &str) -> Result<ScheduleKind, CliError> {
    let bad = || CliError::usage(format!("bad schedule {s:?}; expected prefix, thin:<p> or starve:<f>"));
    let kind = if s == "prefix" {
        ScheduleKind::Prefix
    } else if let Some(p) = s.strip_prefix("thin:") {
        ScheduleKind::IidThinning { p_keep: p.parse().map_err(|_| bad())? }
    } else if let Some(f) = s.strip_prefix("starve:") {
        ScheduleKind::PerCodeStarve { fraction: f.parse().map_err(|_| bad())? }
    } else {
        return Err(bad());
    };
    Ok(kind)
}

/// `L=<parts>,known=<l>`; the first `l` sub-messages are known.
pub fn rate_compatible(s: &str) -> Result<RateCompatibleSpec, CliError> {
    let bad = || CliError::usage(format!("bad rate-compatible spec {s:?}; expected L=<parts>,known=<l>"));
    let mut parts = None;
    let mut known = 0usize;
    for kv in s.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(bad)?;
        let v: usize = v.trim().parse().map_err(|_| bad())?;
        match k.trim() {
            "L" => parts = Some(v),
            "known" => known = v,
            _ => return Err(bad()),
        }
    }
    let parts = parts.ok_or_else(bad)?;
    if parts == 0 || known >= parts {
        return Err(CliError::usage(format!("need L >= 1 and known < L in {s:?}")));
    }
    Ok(RateCompatibleSpec { parts, known: (0..known).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_accept_capacity_fractions() {
        assert_eq!(rate("0.5c", 0.4).unwrap(), 0.2);
        assert_eq!(rate("0.125", 0.4).unwrap(), 0.125);
        assert!(rate("c", 0.4).is_err());
    }

    #[test]
    fn grids() {
        let g = grid("0.1c:0.5c:3", |s| rate(s, 1.0)).unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 0.3).abs() < 1e-15);
        assert_eq!(grid("0.1,0.2", plain).unwrap(), vec![0.1, 0.2]);
        assert!(grid("0.1:0.2", plain).is_err());
        assert!(grid("0.1:0.2:0", plain).is_err());
    }

    #[test]
    fn schedules() {
        assert_eq!(schedule("prefix").unwrap(), ScheduleKind::Prefix);
        assert_eq!(schedule("starve:0.1").unwrap(), ScheduleKind::PerCodeStarve { fraction: 0.1 });
        assert_eq!(schedule("thin:0.5").unwrap(), ScheduleKind::IidThinning { p_keep: 0.5 });
        assert!(schedule("starve").is_err());
    }

    #[test]
    fn rate_compatible_specs() {
        let s = rate_compatible("L=2,known=1").unwrap();
        assert_eq!((s.parts, s.known), (2, vec![0]));
        assert!(rate_compatible("L=2,known=2").is_err());
        assert!(rate_compatible("known=1").is_err());
        assert!(rate_compatible("L=2,extra=1").is_err());
    }

    #[test]
    fn channels() {
        assert!(channel("bsc:0.1").is_ok());
        assert!(channel("bsc:x").is_err());
        assert!(channel("bsc:1.5").is_err());
        assert!(channel("/nonexistent/channel.json").is_err());
    }
}
