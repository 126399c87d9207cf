use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use v2x_core::scms::{RaConfig, TimePeriods};
use v2x_core::time::Duration;

use crate::init::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Rca,
    Ica,
    Eca,
    Ra,
    Aca,
    Ea,
    Aa,
}

impl Role {
    pub const ALL: [Role; 7] = [Role::Rca, Role::Ica, Role::Eca, Role::Ra, Role::Aca, Role::Ea, Role::Aa];

    pub fn name(self) -> &'static str {
        match self {
            Role::Rca => "rca",
            Role::Ica => "ica",
            Role::Eca => "eca",
            Role::Ra => "ra",
            Role::Aca => "aca",
            Role::Ea => "ea",
            Role::Aa => "aa",
        }
    }

    /// Hierarchy the role's key material comes from. The RCA exists in both;
    /// it is attributed to the IEEE tree.
    pub fn topology(self) -> Topology {
        match self {
            Role::Ea | Role::Aa => Topology::Etsi,
            _ => Topology::Ieee,
        }
    }

    /// Roots and intermediates only sign certificates and have no online service.
    pub fn is_online(self) -> bool {
        !matches!(self, Role::Rca | Role::Ica)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown role {s:?} (expected one of rca, ica, eca, ra, aca, ea, aa)"))
    }
}

#[derive(Debug, Clone)]
pub struct AuthorityConfig {
    pub role: Role,
    pub listen: String,
    pub keys_dir: PathBuf,
    pub upstream_ea: Option<String>,
    pub upstream_aca: Option<String>,
    pub download_delay_ms: u64,
    /// Length of one batch period (the unit of `currentI`).
    pub period: Duration,
    pub at_validity: Duration,
}

impl AuthorityConfig {
    pub fn new(role: Role, listen: impl Into<String>, keys_dir: impl Into<PathBuf>) -> Self {
        let ra = RaConfig::default();
        AuthorityConfig {
            role,
            listen: listen.into(),
            keys_dir: keys_dir.into(),
            upstream_ea: None,
            upstream_aca: None,
            download_delay_ms: 0,
            period: ra.periods.period,
            at_validity: ra.at_validity,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.role.is_online() {
            return Err(ConfigError::Offline(self.role));
        }
        match self.role {
            Role::Aa if self.upstream_ea.is_none() => Err(ConfigError::MissingUpstream { role: self.role, flag: "--upstream-ea" }),
            Role::Ra if self.upstream_aca.is_none() => {
                Err(ConfigError::MissingUpstream { role: self.role, flag: "--upstream-aca" })
            }
            _ if self.period.0 == 0 => Err(ConfigError::ZeroDuration("batch period")),
            _ if self.at_validity.0 == 0 => Err(ConfigError::ZeroDuration("authorization validity")),
            _ => Ok(()),
        }
    }

    pub fn ra_config(&self) -> RaConfig {
        RaConfig {
            download_delay_micros: self.download_delay_ms.saturating_mul(1_000),
            periods: TimePeriods { period: self.period, ..TimePeriods::default() },
            at_validity: self.at_validity,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("role {0} has no online service")]
    Offline(Role),
    #[error("role {role} requires {flag}")]
    MissingUpstream { role: Role, flag: &'static str },
    #[error("{0} must be positive")]
    ZeroDuration(&'static str),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upstreams_are_required_per_role() {
        let mut aa = AuthorityConfig::new(Role::Aa, "127.0.0.1:0", "k");
        assert_eq!(aa.validate(), Err(ConfigError::MissingUpstream { role: Role::Aa, flag: "--upstream-ea" }));
        aa.upstream_ea = Some("127.0.0.1:1".into());
        assert_eq!(aa.validate(), Ok(()));

        let mut ra = AuthorityConfig::new(Role::Ra, "127.0.0.1:0", "k");
        assert!(matches!(ra.validate(), Err(ConfigError::MissingUpstream { .. })));
        ra.upstream_aca = Some("127.0.0.1:1".into());
        assert_eq!(ra.validate(), Ok(()));

        for role in [Role::Eca, Role::Aca, Role::Ea] {
            assert_eq!(AuthorityConfig::new(role, "127.0.0.1:0", "k").validate(), Ok(()));
        }
    }

    #[test]
    fn offline_roles_and_zero_durations() {
        assert_eq!(AuthorityConfig::new(Role::Rca, "x", "k").validate(), Err(ConfigError::Offline(Role::Rca)));
        assert_eq!(AuthorityConfig::new(Role::Ica, "x", "k").validate(), Err(ConfigError::Offline(Role::Ica)));
        let mut eca = AuthorityConfig::new(Role::Eca, "x", "k");
        eca.period = Duration(0);
        assert_eq!(eca.validate(), Err(ConfigError::ZeroDuration("batch period")));
    }

    #[test]
    fn roles_parse_by_name() {
        for role in Role::ALL {
            assert_eq!(role.name().parse::<Role>().unwrap(), role);
        }
        assert!("ca".parse::<Role>().is_err());
    }

    #[test]
    fn download_delay_converts_to_micros() {
        let mut ra = AuthorityConfig::new(Role::Ra, "x", "k");
        ra.download_delay_ms = 250;
        assert_eq!(ra.ra_config().download_delay_micros, 250_000);
    }
}
