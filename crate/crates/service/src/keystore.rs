//! On-disk authority material.
//!
//! For an authority named `n` the keys directory holds `n.key` (32-byte
//! signing scalar), `n.enc.key` (encryption scalar, when the authority has
//! one), `n.cert` (codec-encoded certificate) and `n.chain` (the chain from
//! `n` up to the root). Key files are created with mode 0600 on Unix.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use v2x_core::cert::{Certificate, CertificateChain};
use v2x_core::codec::{decode, encode, DecodeError};
use v2x_core::crypto::{CryptoError, PrivateKey};
use v2x_core::pki::Authority;

#[derive(Debug, Error)]
pub enum KeystoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: key file must hold exactly 32 bytes, found {len}")]
    KeyLength { path: PathBuf, len: usize },
    #[error("{path}: {source}")]
    Key { path: PathBuf, source: CryptoError },
    #[error("{path}: {source}")]
    Decode { path: PathBuf, source: DecodeError },
    #[error("{path}: key does not match the stored certificate")]
    KeyMismatch { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct KeyStore {
    dir: PathBuf,
}

impl KeyStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        KeyStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.key"))
    }

    pub fn encryption_key_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.enc.key"))
    }

    pub fn cert_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.cert"))
    }

    pub fn chain_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.chain"))
    }

    /// Every file `save_authority` would write for `name`.
    pub fn paths(&self, name: &str, has_encryption_key: bool) -> Vec<PathBuf> {
        let mut paths = vec![self.key_path(name), self.cert_path(name), self.chain_path(name)];
        if has_encryption_key {
            paths.insert(1, self.encryption_key_path(name));
        }
        paths
    }

    pub fn save_authority(&self, name: &str, authority: &Authority, chain: &CertificateChain) -> Result<(), KeystoreError> {
        create_dir(&self.dir)?;
        write_key(&self.key_path(name), &authority.key)?;
        if let Some(k) = &authority.encryption_key {
            write_key(&self.encryption_key_path(name), k)?;
        }
        write(&self.cert_path(name), &encode(&authority.certificate))?;
        write(&self.chain_path(name), &encode(chain))
    }

    pub fn load_key(&self, name: &str) -> Result<PrivateKey, KeystoreError> {
        read_key(&self.key_path(name))
    }

    pub fn load_encryption_key(&self, name: &str) -> Result<Option<PrivateKey>, KeystoreError> {
        let path = self.encryption_key_path(name);
        if !path.exists() {
            return Ok(None);
        }
        read_key(&path).map(Some)
    }

    pub fn load_certificate(&self, name: &str) -> Result<Certificate, KeystoreError> {
        read_decoded(&self.cert_path(name))
    }

    pub fn load_chain(&self, name: &str) -> Result<CertificateChain, KeystoreError> {
        read_decoded(&self.chain_path(name))
    }

    /// Loads key, optional encryption key and certificate, checking that the
    /// signing key matches the certificate.
    pub fn load_authority(&self, name: &str) -> Result<Authority, KeystoreError> {
        let key = self.load_key(name)?;
        let certificate = self.load_certificate(name)?;
        if key.public_key() != certificate.tbs.verification_key {
            return Err(KeystoreError::KeyMismatch { path: self.key_path(name) });
        }
        let encryption_key = self.load_encryption_key(name)?;
        if let (Some(k), Some(q)) = (&encryption_key, &certificate.tbs.encryption_key) {
            if k.public_key() != *q {
                return Err(KeystoreError::KeyMismatch { path: self.encryption_key_path(name) });
            }
        }
        Ok(Authority { key, encryption_key, certificate })
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> KeystoreError + '_ {
    move |source| KeystoreError::Io { path: path.to_path_buf(), source }
}

fn create_dir(dir: &Path) -> Result<(), KeystoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), KeystoreError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn write_key(path: &Path, key: &PrivateKey) -> Result<(), KeystoreError> {
    let mut options = OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::{OpenOptionsExt, PermissionsExt};
        options.mode(0o600);
        // An existing file keeps its mode through `open`; reset it.
        if path.exists() {
            fs::set_permissions(path, fs::Permissions::from_mode(0o600)).map_err(io_err(path))?;
        }
    }
    let mut file = options.open(path).map_err(io_err(path))?;
    file.write_all(&key.to_bytes()).map_err(io_err(path))
}

fn read_key(path: &Path) -> Result<PrivateKey, KeystoreError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let bytes: [u8; 32] =
        bytes.as_slice().try_into().map_err(|_| KeystoreError::KeyLength { path: path.to_path_buf(), len: bytes.len() })?;
    PrivateKey::from_bytes(&bytes).map_err(|source| KeystoreError::Key { path: path.to_path_buf(), source })
}

fn read_decoded<T: v2x_core::codec::Decode>(path: &Path) -> Result<T, KeystoreError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode(&bytes).map_err(|source| KeystoreError::Decode { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use v2x_core::cert::ValidityPolicy;
    use v2x_core::crypto::drbg_from_seed;
    use v2x_core::pki::EtsiHierarchy;
    use v2x_core::time::Time64;

    fn hierarchy() -> EtsiHierarchy {
        EtsiHierarchy::generate(&mut drbg_from_seed(4), Time64::from_secs(1_000), &ValidityPolicy::default()).unwrap()
    }

    #[test]
    fn authority_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = KeyStore::new(dir.path());
        let h = hierarchy();
        store.save_authority("ea", &h.ea, &h.ea_chain()).unwrap();
        assert_eq!(store.load_authority("ea").unwrap(), h.ea);
        assert_eq!(store.load_chain("ea").unwrap(), h.ea_chain());
    }

    #[cfg(unix)]
    #[test]
    fn key_files_are_private() {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let store = KeyStore::new(dir.path());
        let h = hierarchy();
        store.save_authority("aa", &h.aa, &h.aa_chain()).unwrap();
        for path in [store.key_path("aa"), store.encryption_key_path("aa")] {
            assert_eq!(fs::metadata(path).unwrap().permissions().mode() & 0o777, 0o600);
        }
    }

    #[test]
    fn corrupt_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let store = KeyStore::new(dir.path());
        let h = hierarchy();
        store.save_authority("ea", &h.ea, &h.ea_chain()).unwrap();
        fs::write(store.key_path("ea"), [1u8; 31]).unwrap();
        assert!(matches!(store.load_authority("ea"), Err(KeystoreError::KeyLength { len: 31, .. })));
        fs::write(store.key_path("ea"), [0u8; 32]).unwrap();
        assert!(matches!(store.load_authority("ea"), Err(KeystoreError::Key { .. })));
        store.save_authority("ea", &h.ea, &h.ea_chain()).unwrap();
        fs::write(store.key_path("ea"), h.aa.key.to_bytes()).unwrap();
        assert!(matches!(store.load_authority("ea"), Err(KeystoreError::KeyMismatch { .. })));
        fs::write(store.cert_path("ea"), [9u8; 10]).unwrap();
        assert!(matches!(store.load_authority("ea"), Err(KeystoreError::Decode { .. })));
    }
}
