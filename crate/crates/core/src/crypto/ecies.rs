//! ECIES key encapsulation of a 16-byte data key.
//!
//! ECDH on P-256, then `SHA-256(x ‖ ephemeral_compressed)`: the first half
//! is XORed onto the data key, the second half keys an HMAC-SHA256 over the
//! wrapped key, truncated to 16 bytes.

use hmac::{Hmac, Mac};
use rand_core::CryptoRngCore;
use sha2::{Digest, Sha256};

use super::{generate_keypair, CryptoError, PrivateKey, PublicKey, SymmetricKey, PUBLIC_KEY_LEN, SYMMETRIC_KEY_LEN};

type HmacSha256 = Hmac<Sha256>;

pub const ECIES_TAG_LEN: usize = 16;
pub const ECIES_ENCAP_LEN: usize = PUBLIC_KEY_LEN + SYMMETRIC_KEY_LEN + ECIES_TAG_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EciesEncap {
    pub ephemeral_public: PublicKey,
    pub wrapped_key: [u8; SYMMETRIC_KEY_LEN],
    pub tag: [u8; ECIES_TAG_LEN],
}

impl EciesEncap {
    pub fn to_bytes(&self) -> [u8; ECIES_ENCAP_LEN] {
        let mut out = [0u8; ECIES_ENCAP_LEN];
        out[..PUBLIC_KEY_LEN].copy_from_slice(&self.ephemeral_public.to_compressed());
        out[PUBLIC_KEY_LEN..PUBLIC_KEY_LEN + SYMMETRIC_KEY_LEN].copy_from_slice(&self.wrapped_key);
        out[PUBLIC_KEY_LEN + SYMMETRIC_KEY_LEN..].copy_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8; ECIES_ENCAP_LEN]) -> Result<Self, CryptoError> {
        let ephemeral_public = PublicKey::from_compressed(&bytes[..PUBLIC_KEY_LEN])?;
        let mut wrapped_key = [0u8; SYMMETRIC_KEY_LEN];
        wrapped_key.copy_from_slice(&bytes[PUBLIC_KEY_LEN..PUBLIC_KEY_LEN + SYMMETRIC_KEY_LEN]);
        let mut tag = [0u8; ECIES_TAG_LEN];
        tag.copy_from_slice(&bytes[PUBLIC_KEY_LEN + SYMMETRIC_KEY_LEN..]);
        Ok(EciesEncap { ephemeral_public, wrapped_key, tag })
    }
}

struct DerivedKeys {
    kek: [u8; 16],
    mac_key: [u8; 16],
}

fn derive(shared_x: &[u8], ephemeral_public: &PublicKey) -> DerivedKeys {
    let mut h = Sha256::new();
    h.update(shared_x);
    h.update(ephemeral_public.to_compressed());
    let out = h.finalize();
    let mut kek = [0u8; 16];
    let mut mac_key = [0u8; 16];
    kek.copy_from_slice(&out[..16]);
    mac_key.copy_from_slice(&out[16..]);
    DerivedKeys { kek, mac_key }
}

fn mac(mac_key: &[u8; 16], wrapped: &[u8]) -> HmacSha256 {
    let mut m = <HmacSha256 as Mac>::new_from_slice(mac_key).expect("HMAC accepts any key length");
    m.update(wrapped);
    m
}

pub fn ecies_encapsulate(
    recipient: &PublicKey,
    key: &SymmetricKey,
    rng: &mut impl CryptoRngCore,
) -> Result<EciesEncap, CryptoError> {
    let (ephemeral_private, ephemeral_public) = generate_keypair(rng)?;
    let shared = p256::ecdh::diffie_hellman(ephemeral_private.scalar(), recipient.as_affine());
    let keys = derive(shared.raw_secret_bytes(), &ephemeral_public);

    let mut wrapped_key = [0u8; SYMMETRIC_KEY_LEN];
    for (w, (k, e)) in wrapped_key.iter_mut().zip(key.as_bytes().iter().zip(keys.kek.iter())) {
        *w = k ^ e;
    }
    let full = mac(&keys.mac_key, &wrapped_key).finalize().into_bytes();
    let mut tag = [0u8; ECIES_TAG_LEN];
    tag.copy_from_slice(&full[..ECIES_TAG_LEN]);
    Ok(EciesEncap { ephemeral_public, wrapped_key, tag })
}

pub fn ecies_decapsulate(recipient: &PrivateKey, encap: &EciesEncap) -> Result<SymmetricKey, CryptoError> {
    let shared = p256::ecdh::diffie_hellman(recipient.scalar(), encap.ephemeral_public.as_affine());
    let keys = derive(shared.raw_secret_bytes(), &encap.ephemeral_public);
    mac(&keys.mac_key, &encap.wrapped_key)
        .verify_truncated_left(&encap.tag)
        .map_err(|_| CryptoError::AuthenticationFailed)?;
    let mut key = [0u8; SYMMETRIC_KEY_LEN];
    for (k, (w, e)) in key.iter_mut().zip(encap.wrapped_key.iter().zip(keys.kek.iter())) {
        *k = w ^ e;
    }
    Ok(SymmetricKey::from_bytes(key))
}
