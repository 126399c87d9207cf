//! P-256 / SHA-256 primitives shared by both provisioning protocols.
//!
//! Everything here is a pure function of its inputs plus an explicit
//! randomness source; signing is deterministic (RFC 6979 nonces).

mod aead;
mod butterfly;
mod ecies;

use std::cell::Cell;
use std::fmt;

use p256::ecdsa::signature::{Signer, Verifier};
use p256::ecdsa::{SigningKey, VerifyingKey};
use p256::elliptic_curve::sec1::ToEncodedPoint;
use p256::elliptic_curve::subtle::ConstantTimeEq;
use p256::elliptic_curve::PrimeField;
use p256::{AffinePoint, FieldBytes, NonZeroScalar, ProjectivePoint, Scalar};
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRngCore, SeedableRng};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use aead::{aead_decrypt, aead_encrypt, aead_open, aead_seal, AEAD_NONCE_LEN, AEAD_TAG_LEN};
pub use butterfly::{
    butterfly_finalize, butterfly_public, cocoon_derive, cocoon_derive_with, cocoon_public_derive,
    expansion_scalar, ButterflyKeyMaterial, EXPANSION_KEY_LEN,
};
pub use ecies::{ecies_decapsulate, ecies_encapsulate, EciesEncap, ECIES_ENCAP_LEN};

/// Deterministic random bit generator used by every actor.
pub type Drbg = ChaCha20Rng;

pub fn drbg_from_seed(seed: u64) -> Drbg {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn drbg_from_entropy() -> Drbg {
    ChaCha20Rng::from_entropy()
}

pub const PUBLIC_KEY_LEN: usize = 33;
pub const SIGNATURE_LEN: usize = 64;
pub const SYMMETRIC_KEY_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("randomness source failed")]
    Randomness,
    #[error("private key scalar is zero or not below the group order")]
    InvalidPrivateKey,
    #[error("public key is not a valid compressed P-256 point")]
    InvalidPublicKey,
    #[error("authentication failed")]
    AuthenticationFailed,
    #[error("key derivation produced a degenerate key")]
    DegenerateKey,
    #[error("scalar is not below the group order")]
    ScalarOutOfRange,
}

/// A P-256 private scalar in `[1, n-1]`.
#[derive(Clone)]
pub struct PrivateKey(NonZeroScalar);

impl PartialEq for PrivateKey {
    fn eq(&self, other: &Self) -> bool {
        bool::from(self.0.ct_eq(&other.0))
    }
}

impl Eq for PrivateKey {}

impl PrivateKey {
    /// Uniform in `[1, n-1]` by rejection sampling.
    pub fn generate(rng: &mut impl CryptoRngCore) -> Result<Self, CryptoError> {
        loop {
            let mut bytes = FieldBytes::default();
            rng.try_fill_bytes(&mut bytes)
                .map_err(|_| CryptoError::Randomness)?;
            if let Some(k) = Option::<NonZeroScalar>::from(NonZeroScalar::from_repr(bytes)) {
                return Ok(PrivateKey(k));
            }
        }
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        Option::<NonZeroScalar>::from(NonZeroScalar::from_repr((*bytes).into()))
            .map(PrivateKey)
            .ok_or(CryptoError::InvalidPrivateKey)
    }

    pub(crate) fn from_scalar(s: Scalar) -> Result<Self, CryptoError> {
        Option::<NonZeroScalar>::from(NonZeroScalar::new(s))
            .map(PrivateKey)
            .ok_or(CryptoError::DegenerateKey)
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_repr().into()
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey(p256::PublicKey::from_secret_scalar(&self.0))
    }

    pub(crate) fn scalar(&self) -> &NonZeroScalar {
        &self.0
    }
}

impl fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PrivateKey(..)")
    }
}

/// A P-256 point other than the identity.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PublicKey(p256::PublicKey);

impl PublicKey {
    pub fn from_compressed(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != PUBLIC_KEY_LEN {
            return Err(CryptoError::InvalidPublicKey);
        }
        p256::PublicKey::from_sec1_bytes(bytes)
            .map(PublicKey)
            .map_err(|_| CryptoError::InvalidPublicKey)
    }

    pub fn to_compressed(&self) -> [u8; PUBLIC_KEY_LEN] {
        let point = self.0.to_encoded_point(true);
        let mut out = [0u8; PUBLIC_KEY_LEN];
        out.copy_from_slice(point.as_bytes());
        out
    }

    /// Uncompressed `(x, y)` affine coordinates, big-endian.
    pub fn to_xy(&self) -> ([u8; 32], [u8; 32]) {
        let point = self.0.to_encoded_point(false);
        let mut x = [0u8; 32];
        let mut y = [0u8; 32];
        x.copy_from_slice(point.x().expect("non-identity point"));
        y.copy_from_slice(point.y().expect("uncompressed point"));
        (x, y)
    }

    pub(crate) fn from_projective(p: ProjectivePoint) -> Result<Self, CryptoError> {
        p256::PublicKey::from_affine(p.to_affine())
            .map(PublicKey)
            .map_err(|_| CryptoError::DegenerateKey)
    }

    pub(crate) fn to_projective(self) -> ProjectivePoint {
        self.0.to_projective()
    }

    pub(crate) fn as_affine(&self) -> &AffinePoint {
        self.0.as_affine()
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", hex::encode(self.to_compressed()))
    }
}

impl std::hash::Hash for PublicKey {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.to_compressed().hash(state);
    }
}

pub fn generate_keypair(rng: &mut impl CryptoRngCore) -> Result<(PrivateKey, PublicKey), CryptoError> {
    let private = PrivateKey::generate(rng)?;
    let public = private.public_key();
    Ok((private, public))
}

/// Raw ECDSA signature `(r, s)`. Range checks happen at verification, so a
/// decoded signature may hold out-of-range values.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r: [u8; 32],
    pub s: [u8; 32],
}

impl Signature {
    pub fn from_bytes(bytes: &[u8; SIGNATURE_LEN]) -> Self {
        let mut r = [0u8; 32];
        let mut s = [0u8; 32];
        r.copy_from_slice(&bytes[..32]);
        s.copy_from_slice(&bytes[32..]);
        Signature { r, s }
    }

    pub fn to_bytes(&self) -> [u8; SIGNATURE_LEN] {
        let mut out = [0u8; SIGNATURE_LEN];
        out[..32].copy_from_slice(&self.r);
        out[32..].copy_from_slice(&self.s);
        out
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", hex::encode(self.to_bytes()))
    }
}

thread_local! {
    static SIGNATURES_MADE: Cell<u64> = const { Cell::new(0) };
}

/// Number of ECDSA signatures produced on the current thread.
pub fn signature_count() -> u64 {
    SIGNATURES_MADE.with(Cell::get)
}

/// Runs `f` and reports how many ECDSA signatures it produced on this thread.
pub fn count_signatures<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = signature_count();
    let out = f();
    (out, signature_count() - before)
}

/// ECDSA-SHA256 with RFC 6979 nonces.
pub fn ecdsa_sign(key: &PrivateKey, message: &[u8]) -> Signature {
    SIGNATURES_MADE.with(|c| c.set(c.get() + 1));
    let signing_key = SigningKey::from(key.0);
    let sig: p256::ecdsa::Signature = signing_key.sign(message);
    let bytes: [u8; SIGNATURE_LEN] = sig.to_bytes().into();
    Signature::from_bytes(&bytes)
}

pub fn ecdsa_verify(key: &PublicKey, message: &[u8], sig: &Signature) -> bool {
    let Ok(sig) = p256::ecdsa::Signature::from_scalars(sig.r, sig.s) else {
        return false;
    };
    VerifyingKey::from(&key.0).verify(message, &sig).is_ok()
}

pub fn sha256(input: &[u8]) -> [u8; 32] {
    Sha256::digest(input).into()
}

/// Low-order 8 bytes of a SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashedId8(pub [u8; 8]);

impl fmt::Debug for HashedId8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashedId8({})", hex::encode(self.0))
    }
}

impl fmt::Display for HashedId8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

pub fn hashed_id8(input: &[u8]) -> HashedId8 {
    let digest = sha256(input);
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[24..]);
    HashedId8(out)
}

/// Low-order 16 bytes of a SHA-256 digest.
pub fn hashed_id16(input: &[u8]) -> [u8; 16] {
    let digest = sha256(input);
    let mut out = [0u8; 16];
    out.copy_from_slice(&digest[16..]);
    out
}

/// AES-128 key.
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey([u8; SYMMETRIC_KEY_LEN]);

impl SymmetricKey {
    pub fn generate(rng: &mut impl CryptoRngCore) -> Result<Self, CryptoError> {
        let mut k = [0u8; SYMMETRIC_KEY_LEN];
        rng.try_fill_bytes(&mut k)
            .map_err(|_| CryptoError::Randomness)?;
        Ok(SymmetricKey(k))
    }

    pub const fn from_bytes(bytes: [u8; SYMMETRIC_KEY_LEN]) -> Self {
        SymmetricKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SYMMETRIC_KEY_LEN] {
        &self.0
    }

    /// Identifier carried in pre-shared-key recipient infos.
    pub fn hashed_id8(&self) -> HashedId8 {
        hashed_id8(&self.0)
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

pub fn random_bytes<const N: usize>(rng: &mut impl CryptoRngCore) -> Result<[u8; N], CryptoError> {
    let mut out = [0u8; N];
    rng.try_fill_bytes(&mut out)
        .map_err(|_| CryptoError::Randomness)?;
    Ok(out)
}
