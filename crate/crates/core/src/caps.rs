use crate::error::{Error, Result};

/// Enumeration guardrails. Exceeding a cap is an explicit error, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of policies a brute-force oracle may enumerate.
    pub policies: u64,
    /// Maximum number of flat states produced by an expansion.
    pub states: u64,
    /// Maximum number of memoized belief nodes in the history oracle.
    pub nodes: u64,
    /// Maximum number of variables for SAT/SSAT sweeps.
    pub vars: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { policies: 1 << 20, states: 1 << 16, nodes: 1 << 20, vars: 24 }
    }
}

/// Environment variable holding cap overrides, e.g. `policies=4096,states=256`.
pub const CAPS_ENV: &str = "HARDNESS_FORGE_CAPS";

impl Caps {
    /// Parse `key=value` pairs separated by commas on top of the defaults.
    pub fn parse_overrides(text: &str) -> Result<Caps> {
        let mut caps = Caps::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                item.split_once('=').ok_or_else(|| Error::InvalidArgument(format!("bad cap override {item:?}")))?;
            let n: u64 =
                value.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad cap value {value:?}")))?;
            match key.trim() {
                "policies" => caps.policies = n,
                "states" => caps.states = n,
                "nodes" => caps.nodes = n,
                "vars" => caps.vars = n.min(u32::MAX as u64) as u32,
                other => return Err(Error::InvalidArgument(format!("unknown cap {other:?}"))),
            }
        }
        Ok(caps)
    }

    pub fn from_env() -> Result<Caps> {
        match std::env::var(CAPS_ENV) {
            Ok(text) => Caps::parse_overrides(&text),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub(crate) fn check(what: &'static str, needed: u128, cap: u64) -> Result<()> {
        if needed > cap as u128 {
            Err(Error::CapExceeded { what, needed: needed.to_string(), cap })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: u128) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let caps = Caps::parse_overrides("policies=10, states=7").unwrap();
        assert_eq!(caps.policies, 10);
        assert_eq!(caps.states, 7);
        assert_eq!(caps.nodes, Caps::default().nodes);
        assert!(Caps::parse_overrides("bogus=1").is_err());
        assert!(Caps::parse_overrides("policies").is_err());
    }

    #[test]
    fn check_reports_needed() {
        let err = Caps::check("policies", 11, 10).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { cap: 10, .. }));
        assert!(Caps::check("policies", 10, 10).is_ok());
        assert_eq!(saturating_pow(2, 10), 1024);
        assert_eq!(saturating_pow(2, 200), u128::MAX);
    }
}
