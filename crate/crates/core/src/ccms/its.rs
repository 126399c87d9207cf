use std::sync::Arc;

use thiserror::Error;

use super::messages::{InnerAtRequest, InnerAtResponse, InnerEcRequest, InnerEcResponse, ResponseCode, SharedAtRequest};
use super::{header, request_hash};
use crate::cert::{verify_certificate, Certificate, PsidSsp};
use crate::codec::{decode, encode, DecodeError, EncryptedData, Envelope, SignedData, SignerIdentifier};
use crate::crypto::{generate_keypair, random_bytes, sha256, CryptoError, Drbg, PrivateKey, PublicKey, SymmetricKey};
use crate::time::{Clock, Duration, Validity};

#[derive(Debug, Clone)]
pub struct ItsConfig {
    pub its_id: Vec<u8>,
    pub app_permissions: Vec<PsidSsp>,
    pub enrolment_validity: Duration,
    pub at_validity: Duration,
    pub ea_certificate: Certificate,
    pub aa_certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ItsError {
    #[error("malformed message: {0}")]
    Malformed(#[from] DecodeError),
    #[error("expected a {expected} envelope, got {actual}")]
    UnexpectedEnvelope { expected: &'static str, actual: &'static str },
    #[error("no request is awaiting this response")]
    NoPendingRequest,
    #[error("no enrolment credential yet")]
    NotEnrolled,
    #[error("response is not encrypted under this request's PSK")]
    PskMismatch,
    #[error("response is not signed by the expected authority")]
    SignerMismatch,
    #[error("response signature does not verify")]
    BadSignature,
    #[error("response answers a different request")]
    HashMismatch,
    #[error("authority answered {0}")]
    Rejected(ResponseCode),
    #[error("issued certificate is not signed by the authority")]
    UntrustedCertificate,
    #[error("issued certificate does not carry our public key")]
    KeyMismatch,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

struct Pending {
    psk: SymmetricKey,
    request: Vec<u8>,
    key: PrivateKey,
}

/// ETSI ITS station. Single owner; not shared between threads.
pub struct ItsStation {
    config: ItsConfig,
    canonical_key: PrivateKey,
    clock: Arc<dyn Clock>,
    rng: Drbg,
    enrolment: Option<(PrivateKey, Certificate)>,
    pending_enrolment: Option<Pending>,
    pending_authorization: Option<Pending>,
    tickets: Vec<(PrivateKey, Certificate)>,
}

fn envelope_kind(expected: &'static str, env: &Envelope) -> ItsError {
    ItsError::UnexpectedEnvelope { expected, actual: env.variant_name() }
}

impl ItsStation {
    /// `canonical_key` must be registered at the EA under `config.its_id`.
    pub fn new(config: ItsConfig, canonical_key: PrivateKey, clock: Arc<dyn Clock>, rng: Drbg) -> Self {
        ItsStation {
            config,
            canonical_key,
            clock,
            rng,
            enrolment: None,
            pending_enrolment: None,
            pending_authorization: None,
            tickets: Vec::new(),
        }
    }

    pub fn its_id(&self) -> &[u8] {
        &self.config.its_id
    }

    pub fn canonical_public_key(&self) -> PublicKey {
        self.canonical_key.public_key()
    }

    pub fn enrolment_credential(&self) -> Option<&Certificate> {
        self.enrolment.as_ref().map(|(_, c)| c)
    }

    pub fn tickets(&self) -> &[(PrivateKey, Certificate)] {
        &self.tickets
    }

    pub fn enrolment_psk(&self) -> Option<&SymmetricKey> {
        self.pending_enrolment.as_ref().map(|p| &p.psk)
    }

    pub fn authorization_psk(&self) -> Option<&SymmetricKey> {
        self.pending_authorization.as_ref().map(|p| &p.psk)
    }

    /// Test hook: flips one bit of the stored copy of the pending enrolment request.
    pub fn flip_stored_enrolment_request_bit(&mut self, bit: usize) {
        if let Some(p) = self.pending_enrolment.as_mut() {
            let len = p.request.len();
            p.request[(bit / 8) % len] ^= 1 << (bit % 8);
        }
    }

    /// Builds an EnrolmentRequest: InnerEcRequest signed by a fresh enrolment
    /// key, re-signed by the canonical key, encrypted toward the EA.
    pub fn build_enrolment_request(&mut self) -> Result<Vec<u8>, ItsError> {
        let (key, public) = generate_keypair(&mut self.rng)?;
        let now = self.clock.now();
        let req = InnerEcRequest {
            its_id: self.config.its_id.clone(),
            app_permissions: self.config.app_permissions.clone(),
            enrolment_public_key: public,
            requested_validity: Validity::new(now, self.config.enrolment_validity),
        };
        let inner = Envelope::Signed(SignedData::sign(SignerIdentifier::SelfSigned, encode(&req), header(now), &key));
        let outer = Envelope::Signed(SignedData::sign(
            SignerIdentifier::SelfSigned,
            encode(&inner),
            header(now),
            &self.canonical_key,
        ));
        let ea = &self.config.ea_certificate;
        let (sealed, psk) = EncryptedData::seal_for(ea.hashed_id8(), ea.encryption_key(), &encode(&outer), &mut self.rng)?;
        let request = encode(&Envelope::Encrypted(sealed));
        self.pending_enrolment = Some(Pending { psk, request: request.clone(), key });
        Ok(request)
    }

    /// Opens a response: PSK decryption, then the authority's signature.
    /// Returns the signed payload and whether it was encrypted.
    fn open_response(pending: &Pending, response: &[u8], authority: &Certificate) -> Result<(Vec<u8>, bool), ItsError> {
        let (signed, encrypted) = match decode::<Envelope>(response)? {
            Envelope::Encrypted(ed) => {
                let plaintext = ed.open_with_psk(&pending.psk).map_err(|_| ItsError::PskMismatch)?;
                (decode::<Envelope>(&plaintext)?, true)
            }
            other => (other, false),
        };
        let Envelope::Signed(sd) = signed else {
            return Err(envelope_kind("signed", &signed));
        };
        if sd.signer != SignerIdentifier::Digest(authority.hashed_id8()) {
            return Err(ItsError::SignerMismatch);
        }
        if !sd.verify(authority.verification_key()) {
            return Err(ItsError::BadSignature);
        }
        Ok((sd.tbs.payload, encrypted))
    }

    fn check_issued(
        pending: &Pending,
        code: ResponseCode,
        hash: &[u8; 16],
        encrypted: bool,
        cert: Option<Certificate>,
        authority: &Certificate,
    ) -> Result<Certificate, ItsError> {
        if *hash != request_hash(&pending.request) {
            return Err(ItsError::HashMismatch);
        }
        if code != ResponseCode::Ok {
            return Err(ItsError::Rejected(code));
        }
        if !encrypted {
            return Err(ItsError::UnexpectedEnvelope { expected: "encrypted", actual: "signed" });
        }
        let cert = cert.expect("decoder enforces a certificate on ok");
        if !verify_certificate(&cert, authority) {
            return Err(ItsError::UntrustedCertificate);
        }
        if cert.tbs.verification_key != pending.key.public_key() {
            return Err(ItsError::KeyMismatch);
        }
        Ok(cert)
    }

    /// Checks an EnrolmentResponse and stores the enrolment credential.
    pub fn process_enrolment_response(&mut self, response: &[u8]) -> Result<Certificate, ItsError> {
        let pending = self.pending_enrolment.as_ref().ok_or(ItsError::NoPendingRequest)?;
        let ea = &self.config.ea_certificate;
        let (payload, encrypted) = Self::open_response(pending, response, ea)?;
        let resp: InnerEcResponse = decode(&payload)?;
        let ec = Self::check_issued(pending, resp.response_code, &resp.request_hash, encrypted, resp.enrolment_credential, ea)?;
        let pending = self.pending_enrolment.take().expect("checked above");
        self.enrolment = Some((pending.key, ec.clone()));
        Ok(ec)
    }

    /// Builds an AuthorizationRequest with an EcSignature encrypted toward
    /// the EA, signed by a fresh authorization key, encrypted toward the AA.
    pub fn build_authorization_request(&mut self) -> Result<Vec<u8>, ItsError> {
        let (ec_key, ec) = self.enrolment.as_ref().ok_or(ItsError::NotEnrolled)?;
        let (key, public) = generate_keypair(&mut self.rng)?;
        let now = self.clock.now();
        let ea = &self.config.ea_certificate;
        let shared = SharedAtRequest {
            ea_id: ea.hashed_id8(),
            key_tag: random_bytes(&mut self.rng)?,
            app_permissions: self.config.app_permissions.clone(),
            requested_validity: Validity::new(now, self.config.at_validity),
        };
        let digest = sha256(&encode(&shared)).to_vec();
        let external = Envelope::SignedExternalPayload(SignedData::sign(
            SignerIdentifier::Digest(ec.hashed_id8()),
            digest,
            header(now),
            ec_key,
        ));
        let (ec_signature, _) =
            EncryptedData::seal_for(ea.hashed_id8(), ea.encryption_key(), &encode(&external), &mut self.rng)?;
        let inner = InnerAtRequest {
            public_key: public,
            shared_at_request: shared,
            ec_signature: Envelope::Encrypted(ec_signature),
        };
        let pop = Envelope::Signed(SignedData::sign(SignerIdentifier::SelfSigned, encode(&inner), header(now), &key));
        let aa = &self.config.aa_certificate;
        let (sealed, psk) = EncryptedData::seal_for(aa.hashed_id8(), aa.encryption_key(), &encode(&pop), &mut self.rng)?;
        let request = encode(&Envelope::Encrypted(sealed));
        self.pending_authorization = Some(Pending { psk, request: request.clone(), key });
        Ok(request)
    }

    /// Checks an AuthorizationResponse and stores the ticket with its key.
    pub fn process_authorization_response(&mut self, response: &[u8]) -> Result<Certificate, ItsError> {
        let pending = self.pending_authorization.as_ref().ok_or(ItsError::NoPendingRequest)?;
        let aa = &self.config.aa_certificate;
        let (payload, encrypted) = Self::open_response(pending, response, aa)?;
        let resp: InnerAtResponse = decode(&payload)?;
        let at = Self::check_issued(pending, resp.response_code, &resp.request_hash, encrypted, resp.authorization_ticket, aa)?;
        let pending = self.pending_authorization.take().expect("checked above");
        self.tickets.push((pending.key, at.clone()));
        Ok(at)
    }
}
