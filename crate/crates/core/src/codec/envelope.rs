//! The secured-data container family shared by both standards.
//!
//! `Envelope` stands in for both `Ieee1609Dot2Data` and `EtsiTs103097Data`;
//! the flow-specific structure lives in the payloads.

use rand_core::CryptoRngCore;
use thiserror::Error;

use super::{unknown_tag, Decode, DecodeError, DecodeErrorKind, Encode, Reader, Writer};
use crate::cert::Certificate;
use crate::crypto::{
    aead_decrypt, aead_encrypt, ecdsa_sign, ecdsa_verify, ecies_decapsulate, ecies_encapsulate, random_bytes,
    CryptoError, EciesEncap, HashedId8, PrivateKey, PublicKey, Signature, SymmetricKey, AEAD_NONCE_LEN,
};
use crate::time::Time64;

const TAG_UNSECURED: u8 = 0;
const TAG_SIGNED: u8 = 1;
const TAG_ENCRYPTED: u8 = 2;
const TAG_SIGNED_EXTERNAL: u8 = 3;

/// Length of the digest carried by a signed-external-payload envelope.
pub const EXTERNAL_DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Envelope {
    Unsecured(Vec<u8>),
    Signed(SignedData),
    Encrypted(EncryptedData),
    /// Signed data whose payload is only the SHA-256 digest of content carried
    /// elsewhere.
    SignedExternalPayload(SignedData),
}

impl Envelope {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Envelope::Unsecured(_) => "unsecured",
            Envelope::Signed(_) => "signed",
            Envelope::Encrypted(_) => "encrypted",
            Envelope::SignedExternalPayload(_) => "signed-external-payload",
        }
    }
}

impl Encode for Envelope {
    fn encode_to(&self, w: &mut Writer) {
        match self {
            Envelope::Unsecured(payload) => {
                w.u8(TAG_UNSECURED).var_bytes(payload);
            }
            Envelope::Signed(sd) => {
                w.u8(TAG_SIGNED).put(sd);
            }
            Envelope::Encrypted(ed) => {
                w.u8(TAG_ENCRYPTED).put(ed);
            }
            Envelope::SignedExternalPayload(sd) => {
                w.u8(TAG_SIGNED_EXTERNAL).put(sd);
            }
        }
    }
}

impl Decode for Envelope {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.tag()? {
            (TAG_UNSECURED, _) => Ok(Envelope::Unsecured(r.var_bytes()?)),
            (TAG_SIGNED, _) => Ok(Envelope::Signed(r.get()?)),
            (TAG_ENCRYPTED, _) => Ok(Envelope::Encrypted(r.get()?)),
            (TAG_SIGNED_EXTERNAL, _) => {
                let at = r.offset();
                let sd: SignedData = r.get()?;
                if sd.tbs.payload.len() != EXTERNAL_DIGEST_LEN {
                    return Err(Reader::error_at(
                        at,
                        DecodeErrorKind::Invalid("external payload must be a 32-byte digest"),
                    ));
                }
                Ok(Envelope::SignedExternalPayload(sd))
            }
            (t, at) => Err(unknown_tag(t, at)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignerIdentifier {
    /// The verification key is carried inside the signed payload (proof of
    /// possession).
    SelfSigned,
    Digest(HashedId8),
    Certificate(Box<Certificate>),
}

impl Encode for SignerIdentifier {
    fn encode_to(&self, w: &mut Writer) {
        match self {
            SignerIdentifier::SelfSigned => {
                w.u8(0);
            }
            SignerIdentifier::Digest(id) => {
                w.u8(1).put(id);
            }
            SignerIdentifier::Certificate(cert) => {
                w.u8(2).put(cert);
            }
        }
    }
}

impl Decode for SignerIdentifier {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.tag()? {
            (0, _) => Ok(SignerIdentifier::SelfSigned),
            (1, _) => Ok(SignerIdentifier::Digest(r.get()?)),
            (2, _) => Ok(SignerIdentifier::Certificate(r.get()?)),
            (t, at) => Err(unknown_tag(t, at)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeaderInfo {
    pub psid: u32,
    pub generation_time: Time64,
}

impl Encode for HeaderInfo {
    fn encode_to(&self, w: &mut Writer) {
        w.u32(self.psid).put(&self.generation_time);
    }
}

impl Decode for HeaderInfo {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(HeaderInfo { psid: r.u32()?, generation_time: r.get()? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToBeSignedData {
    pub payload: Vec<u8>,
    pub header: HeaderInfo,
}

impl Encode for ToBeSignedData {
    fn encode_to(&self, w: &mut Writer) {
        w.var_bytes(&self.payload).put(&self.header);
    }
}

impl Decode for ToBeSignedData {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(ToBeSignedData { payload: r.var_bytes()?, header: r.get()? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedData {
    pub signer: SignerIdentifier,
    pub tbs: ToBeSignedData,
    pub signature: Signature,
}

impl SignedData {
    /// Signs `encode(tbs)` with `key`.
    pub fn sign(signer: SignerIdentifier, payload: Vec<u8>, header: HeaderInfo, key: &PrivateKey) -> Self {
        let tbs = ToBeSignedData { payload, header };
        let signature = ecdsa_sign(key, &tbs.encode());
        SignedData { signer, tbs, signature }
    }

    pub fn verify(&self, key: &PublicKey) -> bool {
        ecdsa_verify(key, &self.tbs.encode(), &self.signature)
    }
}

impl Encode for SignedData {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.signer).put(&self.tbs).put(&self.signature);
    }
}

impl Decode for SignedData {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(SignedData { signer: r.get()?, tbs: r.get()?, signature: r.get()? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipientInfo {
    /// Data key encapsulated toward a certificate's (or bare key's) encryption
    /// key, identified by its HashedId8.
    Cert { recipient_id: HashedId8, encap: EciesEncap },
    /// Data key is a pre-shared key; the identifier is `hashed_id8(psk)`.
    Psk { recipient_id: HashedId8 },
}

impl Encode for RecipientInfo {
    fn encode_to(&self, w: &mut Writer) {
        match self {
            RecipientInfo::Cert { recipient_id, encap } => {
                w.u8(0).put(recipient_id).put(encap);
            }
            RecipientInfo::Psk { recipient_id } => {
                w.u8(1).put(recipient_id);
            }
        }
    }
}

impl Decode for RecipientInfo {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.tag()? {
            (0, _) => Ok(RecipientInfo::Cert { recipient_id: r.get()?, encap: r.get()? }),
            (1, _) => Ok(RecipientInfo::Psk { recipient_id: r.get()? }),
            (t, at) => Err(unknown_tag(t, at)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedData {
    pub recipients: Vec<RecipientInfo>,
    pub nonce: [u8; AEAD_NONCE_LEN],
    /// AES-CCM ciphertext including the 16-byte tag.
    pub ciphertext: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("no recipient info matches this key")]
    NoMatchingRecipient,
    #[error("decryption failed: {0}")]
    Crypto(#[from] CryptoError),
}

impl EncryptedData {
    /// Encrypts under a fresh data key encapsulated toward `recipient_key`.
    /// Returns the data key so it can serve as the PSK for a response.
    pub fn seal_for(
        recipient_id: HashedId8,
        recipient_key: &PublicKey,
        plaintext: &[u8],
        rng: &mut impl CryptoRngCore,
    ) -> Result<(Self, SymmetricKey), CryptoError> {
        let data_key = SymmetricKey::generate(rng)?;
        let sealed = Self::seal_for_with_key(recipient_id, recipient_key, &data_key, plaintext, rng)?;
        Ok((sealed, data_key))
    }

    pub fn seal_for_with_key(
        recipient_id: HashedId8,
        recipient_key: &PublicKey,
        data_key: &SymmetricKey,
        plaintext: &[u8],
        rng: &mut impl CryptoRngCore,
    ) -> Result<Self, CryptoError> {
        let encap = ecies_encapsulate(recipient_key, data_key, rng)?;
        let nonce = random_bytes(rng)?;
        Ok(EncryptedData {
            recipients: vec![RecipientInfo::Cert { recipient_id, encap }],
            nonce,
            ciphertext: aead_encrypt(data_key, &nonce, plaintext),
        })
    }

    pub fn seal_with_psk(psk: &SymmetricKey, plaintext: &[u8], rng: &mut impl CryptoRngCore) -> Result<Self, CryptoError> {
        let nonce = random_bytes(rng)?;
        Ok(EncryptedData {
            recipients: vec![RecipientInfo::Psk { recipient_id: psk.hashed_id8() }],
            nonce,
            ciphertext: aead_encrypt(psk, &nonce, plaintext),
        })
    }

    /// Decrypts as the holder of `private`, identified by `recipient_id`.
    /// Returns the plaintext and the recovered data key.
    pub fn open_as(&self, recipient_id: &HashedId8, private: &PrivateKey) -> Result<(Vec<u8>, SymmetricKey), EnvelopeError> {
        let encap = self
            .recipients
            .iter()
            .find_map(|ri| match ri {
                RecipientInfo::Cert { recipient_id: id, encap } if id == recipient_id => Some(encap),
                _ => None,
            })
            .ok_or(EnvelopeError::NoMatchingRecipient)?;
        let data_key = ecies_decapsulate(private, encap)?;
        let plaintext = aead_decrypt(&data_key, &self.nonce, &self.ciphertext)?;
        Ok((plaintext, data_key))
    }

    pub fn open_with_psk(&self, psk: &SymmetricKey) -> Result<Vec<u8>, EnvelopeError> {
        let id = psk.hashed_id8();
        if !self
            .recipients
            .iter()
            .any(|ri| matches!(ri, RecipientInfo::Psk { recipient_id } if *recipient_id == id))
        {
            return Err(EnvelopeError::NoMatchingRecipient);
        }
        Ok(aead_decrypt(psk, &self.nonce, &self.ciphertext)?)
    }
}

impl Encode for EncryptedData {
    fn encode_to(&self, w: &mut Writer) {
        w.list(&self.recipients).raw(&self.nonce).var_bytes(&self.ciphertext);
    }
}

impl Decode for EncryptedData {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.offset();
        let recipients: Vec<RecipientInfo> = r.list()?;
        if recipients.is_empty() {
            return Err(Reader::error_at(at, DecodeErrorKind::Invalid("encrypted data needs a recipient")));
        }
        Ok(EncryptedData { recipients, nonce: r.array()?, ciphertext: r.var_bytes()? })
    }
}
