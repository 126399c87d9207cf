//! Butterfly key expansion.
//!
//! The end entity holds a caterpillar keypair `(a, A)` and an expansion key
//! `ck`. Cocoon keys are `a_i = a + f(ck, i)` and `A_i = A + f(ck, i)·G`, where
//! `f(ck, i) = SHA-256(ck ‖ be32(i)) mod n`. The RA computes `A_i` without
//! knowing `a`. The ACA adds its own contribution `c` (carried back as
//! `privateKeyInfo`), so the final butterfly key is `a_i + c` with public half
//! `A_i + c·G`.

use p256::elliptic_curve::ops::Reduce;
use p256::elliptic_curve::PrimeField;
use p256::{ProjectivePoint, Scalar, U256};
use rand_core::CryptoRngCore;
use sha2::{Digest, Sha256};

use super::{random_bytes, CryptoError, PrivateKey, PublicKey};

pub const EXPANSION_KEY_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ButterflyKeyMaterial {
    caterpillar_private: PrivateKey,
    caterpillar_public: PublicKey,
    expansion_key: [u8; EXPANSION_KEY_LEN],
}

impl ButterflyKeyMaterial {
    pub fn generate(rng: &mut impl CryptoRngCore) -> Result<Self, CryptoError> {
        let caterpillar_private = PrivateKey::generate(rng)?;
        let expansion_key = random_bytes(rng)?;
        Ok(Self::new(caterpillar_private, expansion_key))
    }

    pub fn new(caterpillar_private: PrivateKey, expansion_key: [u8; EXPANSION_KEY_LEN]) -> Self {
        let caterpillar_public = caterpillar_private.public_key();
        ButterflyKeyMaterial { caterpillar_private, caterpillar_public, expansion_key }
    }

    pub fn caterpillar_private(&self) -> &PrivateKey {
        &self.caterpillar_private
    }

    pub fn caterpillar_public(&self) -> &PublicKey {
        &self.caterpillar_public
    }

    pub fn expansion_key(&self) -> &[u8; EXPANSION_KEY_LEN] {
        &self.expansion_key
    }
}

/// `f(ck, i) = SHA-256(ck ‖ be32(i)) mod n`.
pub fn expansion_scalar(expansion_key: &[u8; EXPANSION_KEY_LEN], i: u32) -> Scalar {
    let mut h = Sha256::new();
    h.update(expansion_key);
    h.update(i.to_be_bytes());
    <Scalar as Reduce<U256>>::reduce_bytes(&h.finalize())
}

pub fn cocoon_derive(material: &ButterflyKeyMaterial, i: u32) -> Result<(PrivateKey, PublicKey), CryptoError> {
    cocoon_derive_with(material, i, expansion_scalar)
}

/// [`cocoon_derive`] with a substitute expansion function (test hook).
pub fn cocoon_derive_with(
    material: &ButterflyKeyMaterial,
    i: u32,
    f: impl Fn(&[u8; EXPANSION_KEY_LEN], u32) -> Scalar,
) -> Result<(PrivateKey, PublicKey), CryptoError> {
    let offset = f(&material.expansion_key, i);
    let private = PrivateKey::from_scalar(*material.caterpillar_private.scalar().as_ref() + offset)?;
    let public = PublicKey::from_projective(
        material.caterpillar_public.to_projective() + ProjectivePoint::GENERATOR * offset,
    )?;
    Ok((private, public))
}

/// Public half of [`cocoon_derive`], computable without the caterpillar
/// private key.
pub fn cocoon_public_derive(
    caterpillar_public: &PublicKey,
    expansion_key: &[u8; EXPANSION_KEY_LEN],
    i: u32,
) -> Result<PublicKey, CryptoError> {
    let offset = expansion_scalar(expansion_key, i);
    PublicKey::from_projective(caterpillar_public.to_projective() + ProjectivePoint::GENERATOR * offset)
}

fn info_scalar(private_key_info: &[u8; 32]) -> Result<Scalar, CryptoError> {
    Option::<Scalar>::from(Scalar::from_repr((*private_key_info).into())).ok_or(CryptoError::ScalarOutOfRange)
}

/// `cocoon_private + c mod n`.
pub fn butterfly_finalize(cocoon_private: &PrivateKey, private_key_info: &[u8; 32]) -> Result<PrivateKey, CryptoError> {
    let c = info_scalar(private_key_info)?;
    PrivateKey::from_scalar(*cocoon_private.scalar().as_ref() + c)
}

/// `cocoon_public + c·G`, the key the ACA certifies.
pub fn butterfly_public(cocoon_public: &PublicKey, private_key_info: &[u8; 32]) -> Result<PublicKey, CryptoError> {
    let c = info_scalar(private_key_info)?;
    PublicKey::from_projective(cocoon_public.to_projective() + ProjectivePoint::GENERATOR * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::drbg_from_seed;
    use p256::elliptic_curve::Field;

    #[test]
    fn zero_expansion_yields_caterpillar() {
        let m = ButterflyKeyMaterial::generate(&mut drbg_from_seed(30)).unwrap();
        let (d, q) = cocoon_derive_with(&m, 3, |_, _| Scalar::ZERO).unwrap();
        assert_eq!(&d, m.caterpillar_private());
        assert_eq!(&q, m.caterpillar_public());
    }

    #[test]
    fn cocoon_pairs_and_matches_public_derivation() {
        let m = ButterflyKeyMaterial::generate(&mut drbg_from_seed(31)).unwrap();
        let (d, q) = cocoon_derive(&m, 7).unwrap();
        assert_eq!(d.public_key(), q);
        assert_eq!(cocoon_public_derive(m.caterpillar_public(), m.expansion_key(), 7).unwrap(), q);
        assert_ne!(cocoon_derive(&m, 8).unwrap().1, q);
    }

    #[test]
    fn degenerate_cocoon_is_an_error() {
        let m = ButterflyKeyMaterial::generate(&mut drbg_from_seed(32)).unwrap();
        let neg = -*m.caterpillar_private().scalar().as_ref();
        assert_eq!(cocoon_derive_with(&m, 0, |_, _| neg), Err(CryptoError::DegenerateKey));
    }

    #[test]
    fn finalize_identity_and_pairing() {
        let mut rng = drbg_from_seed(33);
        let m = ButterflyKeyMaterial::generate(&mut rng).unwrap();
        let (d, q) = cocoon_derive(&m, 0).unwrap();
        assert_eq!(butterfly_finalize(&d, &[0; 32]).unwrap(), d);
        let c: [u8; 32] = Scalar::random(&mut rng).to_repr().into();
        let b = butterfly_finalize(&d, &c).unwrap();
        assert_eq!(b.public_key(), butterfly_public(&q, &c).unwrap());
    }

    #[test]
    fn finalize_rejects_out_of_range_and_zero() {
        let mut rng = drbg_from_seed(34);
        let (d, _) = crate::crypto::generate_keypair(&mut rng).unwrap();
        assert_eq!(butterfly_finalize(&d, &[0xff; 32]), Err(CryptoError::ScalarOutOfRange));
        let neg: [u8; 32] = (-*d.scalar().as_ref()).to_repr().into();
        assert_eq!(butterfly_finalize(&d, &neg), Err(CryptoError::DegenerateKey));
    }
}
