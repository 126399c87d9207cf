//! AES-128-CCM with a 12-byte nonce and 16-byte tag.

use aes::Aes128;
use ccm::aead::{Aead, KeyInit};
use ccm::consts::{U12, U16};
use ccm::Ccm;
use rand_core::CryptoRngCore;

use super::{random_bytes, CryptoError, SymmetricKey};

type Aes128Ccm = Ccm<Aes128, U16, U12>;

pub const AEAD_NONCE_LEN: usize = 12;
pub const AEAD_TAG_LEN: usize = 16;

/// Returns `ciphertext ‖ tag`.
pub fn aead_encrypt(key: &SymmetricKey, nonce: &[u8; AEAD_NONCE_LEN], plaintext: &[u8]) -> Vec<u8> {
    Aes128Ccm::new(key.as_bytes().into())
        .encrypt(nonce.into(), plaintext)
        .expect("CCM with a 3-byte length field accepts payloads under 16 MiB")
}

pub fn aead_decrypt(
    key: &SymmetricKey,
    nonce: &[u8; AEAD_NONCE_LEN],
    ciphertext: &[u8],
) -> Result<Vec<u8>, CryptoError> {
    Aes128Ccm::new(key.as_bytes().into())
        .decrypt(nonce.into(), ciphertext)
        .map_err(|_| CryptoError::AuthenticationFailed)
}

/// Encrypts under a fresh random nonce; output is `nonce ‖ ciphertext ‖ tag`.
pub fn aead_seal(
    key: &SymmetricKey,
    plaintext: &[u8],
    rng: &mut impl CryptoRngCore,
) -> Result<Vec<u8>, CryptoError> {
    let nonce: [u8; AEAD_NONCE_LEN] = random_bytes(rng)?;
    let mut out = nonce.to_vec();
    out.extend(aead_encrypt(key, &nonce, plaintext));
    Ok(out)
}

/// Inverse of [`aead_seal`].
pub fn aead_open(key: &SymmetricKey, sealed: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if sealed.len() < AEAD_NONCE_LEN + AEAD_TAG_LEN {
        return Err(CryptoError::AuthenticationFailed);
    }
    let (nonce, ciphertext) = sealed.split_at(AEAD_NONCE_LEN);
    let nonce: [u8; AEAD_NONCE_LEN] = nonce.try_into().expect("split at nonce length");
    aead_decrypt(key, &nonce, ciphertext)
}
