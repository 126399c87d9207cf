//! Bootstraps a hierarchy into a keys directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand_core::CryptoRngCore;
use thiserror::Error;
use v2x_core::cert::{CertificateChain, ValidityPolicy};
use v2x_core::pki::{Authority, EtsiHierarchy, IeeeHierarchy, PkiError, DEFAULT_CHAIN_DEPTH};
use v2x_core::time::Time64;

use crate::keystore::{KeyStore, KeystoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// RCA, ICA(s), ECA, RA, ACA.
    Ieee,
    /// RCA, EA, AA.
    Etsi,
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ieee" => Ok(Topology::Ieee),
            "etsi" => Ok(Topology::Etsi),
            _ => Err(format!("unknown topology {s:?} (expected ieee or etsi)")),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Ieee => "ieee",
            Topology::Etsi => "etsi",
        })
    }
}

#[derive(Debug, Clone)]
pub struct InitOptions {
    pub chain_depth: usize,
    pub policy: ValidityPolicy,
    pub force: bool,
}

impl Default for InitOptions {
    fn default() -> Self {
        InitOptions { chain_depth: DEFAULT_CHAIN_DEPTH, policy: ValidityPolicy::default(), force: false }
    }
}

#[derive(Debug, Error)]
pub enum InitError {
    #[error("{0} already exists (pass --force to overwrite)")]
    Exists(PathBuf),
    #[error(transparent)]
    Pki(#[from] PkiError),
    #[error(transparent)]
    Keystore(#[from] KeystoreError),
}

fn ieee_entries(h: &IeeeHierarchy) -> Vec<(String, &Authority, CertificateChain)> {
    let mut entries = vec![("rca".to_string(), &h.rca, CertificateChain(vec![h.rca.certificate.clone()]))];
    for (n, ica) in h.icas.iter().enumerate() {
        let mut certs: Vec<_> = h.icas[..=n].iter().rev().map(|a| a.certificate.clone()).collect();
        certs.push(h.rca.certificate.clone());
        entries.push((format!("ica{}", n + 1), ica, CertificateChain(certs)));
    }
    entries.push(("eca".into(), &h.eca, h.eca_chain()));
    entries.push(("ra".into(), &h.ra, h.ra_chain()));
    entries.push(("aca".into(), &h.aca, h.aca_chain()));
    entries
}

fn etsi_entries(h: &EtsiHierarchy) -> Vec<(String, &Authority, CertificateChain)> {
    vec![
        ("rca".into(), &h.rca, CertificateChain(vec![h.rca.certificate.clone()])),
        ("ea".into(), &h.ea, h.ea_chain()),
        ("aa".into(), &h.aa, h.aa_chain()),
    ]
}

/// Generates a fresh hierarchy and writes every authority into `dir`. Without
/// `force`, nothing is written if any target file already exists.
pub fn pki_init(
    topology: Topology,
    dir: &Path,
    options: &InitOptions,
    rng: &mut impl CryptoRngCore,
    now: Time64,
) -> Result<Vec<PathBuf>, InitError> {
    let store = KeyStore::new(dir);
    let ieee;
    let etsi;
    let entries = match topology {
        Topology::Ieee => {
            ieee = IeeeHierarchy::generate(rng, now, &options.policy, options.chain_depth)?;
            ieee_entries(&ieee)
        }
        Topology::Etsi => {
            etsi = EtsiHierarchy::generate(rng, now, &options.policy)?;
            etsi_entries(&etsi)
        }
    };
    let paths: Vec<PathBuf> =
        entries.iter().flat_map(|(name, a, _)| store.paths(name, a.encryption_key.is_some())).collect();
    if !options.force {
        if let Some(existing) = paths.iter().find(|p| p.exists()) {
            return Err(InitError::Exists(existing.clone()));
        }
    }
    for (name, authority, chain) in &entries {
        store.save_authority(name, authority, chain)?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use v2x_core::crypto::drbg_from_seed;

    #[test]
    fn ieee_tree_has_correct_issuance_edges() {
        let dir = tempfile::tempdir().unwrap();
        let now = Time64::from_secs(10_000);
        pki_init(Topology::Ieee, dir.path(), &InitOptions::default(), &mut drbg_from_seed(1), now).unwrap();
        let store = KeyStore::new(dir.path());
        let rca = store.load_certificate("rca").unwrap();
        for name in ["eca", "ra", "aca"] {
            let chain = store.load_chain(name).unwrap();
            assert_eq!(chain.0.len(), 3);
            chain.verify(&rca, now).unwrap();
            assert_eq!(chain.0[0], store.load_authority(name).unwrap().certificate);
        }
        assert_eq!(store.load_chain("ica1").unwrap().0.len(), 2);
        assert!(store.load_encryption_key("ra").unwrap().is_some());
        assert!(store.load_encryption_key("eca").unwrap().is_none());
    }

    #[test]
    fn etsi_tree_is_flat() {
        let dir = tempfile::tempdir().unwrap();
        let now = Time64::from_secs(10_000);
        pki_init(Topology::Etsi, dir.path(), &InitOptions::default(), &mut drbg_from_seed(1), now).unwrap();
        let store = KeyStore::new(dir.path());
        let rca = store.load_certificate("rca").unwrap();
        for name in ["ea", "aa"] {
            let chain = store.load_chain(name).unwrap();
            assert_eq!(chain.0.len(), 2);
            chain.verify(&rca, now).unwrap();
        }
        assert!(!store.cert_path("ica1").exists());
    }

    #[test]
    fn deeper_chains_write_every_intermediate() {
        let dir = tempfile::tempdir().unwrap();
        let options = InitOptions { chain_depth: 5, ..InitOptions::default() };
        pki_init(Topology::Ieee, dir.path(), &options, &mut drbg_from_seed(1), Time64::from_secs(1)).unwrap();
        let store = KeyStore::new(dir.path());
        assert_eq!(store.load_chain("ica3").unwrap().0.len(), 4);
        assert_eq!(store.load_chain("eca").unwrap().0.len(), 5);
    }

    #[test]
    fn topology_parses() {
        assert_eq!("ieee".parse::<Topology>().unwrap(), Topology::Ieee);
        assert!("x509".parse::<Topology>().is_err());
    }
}
