use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use super::messages::{
    AuthorizationValidationRequest, AuthorizationValidationResponse, InnerEcRequest, InnerEcResponse, ResponseCode,
};
use super::{build_response, request_hash};
use crate::cert::{issue, Certificate, CertificateTbs};
use crate::codec::{decode, encode, Envelope, SignerIdentifier};
use crate::crypto::{sha256, Drbg, HashedId8, PrivateKey, PublicKey, SymmetricKey};
use crate::link::{EaLink, LinkError};
use crate::time::Clock;

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Enrolment authority: enrols registered stations and vouches for their
/// enrolment credentials to the AA.
pub struct EnrolmentAuthority {
    key: PrivateKey,
    decryption_key: PrivateKey,
    certificate: Certificate,
    clock: Arc<dyn Clock>,
    rng: Mutex<Drbg>,
    canonical_keys: Mutex<HashMap<Vec<u8>, PublicKey>>,
    issued: Mutex<HashMap<HashedId8, Certificate>>,
}

impl EnrolmentAuthority {
    pub fn new(
        key: PrivateKey,
        decryption_key: PrivateKey,
        certificate: Certificate,
        clock: Arc<dyn Clock>,
        rng: Drbg,
    ) -> Self {
        EnrolmentAuthority {
            key,
            decryption_key,
            certificate,
            clock,
            rng: Mutex::new(rng),
            canonical_keys: Mutex::default(),
            issued: Mutex::default(),
        }
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// Out-of-band provisioning of a station's canonical key.
    pub fn register(&self, its_id: impl Into<Vec<u8>>, canonical_public_key: PublicKey) {
        lock(&self.canonical_keys).insert(its_id.into(), canonical_public_key);
    }

    pub fn issued_count(&self) -> usize {
        lock(&self.issued).len()
    }

    /// Handles an EnrolmentRequest. Always answers; failures travel as
    /// response codes. If the data key cannot be recovered the response is
    /// signed but not encrypted.
    pub fn process_enrolment_request(&self, request: &[u8]) -> Vec<u8> {
        let mut psk = None;
        let (code, credential) = match self.enrol(request, &mut psk) {
            Ok(cert) => (ResponseCode::Ok, Some(cert)),
            Err(code) => (code, None),
        };
        let response = InnerEcResponse { request_hash: request_hash(request), response_code: code, enrolment_credential: credential };
        self.respond(encode(&response), psk.as_ref())
    }

    fn respond(&self, payload: Vec<u8>, psk: Option<&SymmetricKey>) -> Vec<u8> {
        let mut rng = lock(&self.rng);
        let now = self.clock.now();
        build_response(payload.clone(), &self.key, &self.certificate, psk, now, &mut *rng)
            .or_else(|_| build_response(payload, &self.key, &self.certificate, None, now, &mut *rng))
            .expect("signing without encryption draws no randomness")
    }

    fn enrol(&self, request: &[u8], psk: &mut Option<SymmetricKey>) -> Result<Certificate, ResponseCode> {
        let Ok(Envelope::Encrypted(ed)) = decode::<Envelope>(request) else {
            return Err(ResponseCode::CantParse);
        };
        let (plaintext, data_key) = ed
            .open_as(&self.certificate.hashed_id8(), &self.decryption_key)
            .map_err(|_| ResponseCode::InvalidEncryptionKey)?;
        *psk = Some(data_key);
        let Ok(Envelope::Signed(outer)) = decode::<Envelope>(&plaintext) else {
            return Err(ResponseCode::BadContentType);
        };
        let Ok(Envelope::Signed(inner)) = decode::<Envelope>(&outer.tbs.payload) else {
            return Err(ResponseCode::BadContentType);
        };
        let req: InnerEcRequest = decode(&inner.tbs.payload).map_err(|_| ResponseCode::CantParse)?;
        let canonical = lock(&self.canonical_keys).get(&req.its_id).copied().ok_or(ResponseCode::UnknownIts)?;
        if outer.signer != SignerIdentifier::SelfSigned || !outer.verify(&canonical) {
            return Err(ResponseCode::InvalidSignature);
        }
        if inner.signer != SignerIdentifier::SelfSigned || !inner.verify(&req.enrolment_public_key) {
            return Err(ResponseCode::InvalidSignature);
        }
        if req.app_permissions.is_empty() {
            return Err(ResponseCode::DeniedPermissions);
        }
        let tbs = CertificateTbs {
            subject_name: req.its_id,
            app_permissions: req.app_permissions,
            validity: req.requested_validity,
            verification_key: req.enrolment_public_key,
            encryption_key: None,
        };
        let ec = issue(&self.key, &self.certificate, tbs).map_err(|_| ResponseCode::DeniedPermissions)?;
        lock(&self.issued).insert(ec.hashed_id8(), ec.clone());
        Ok(ec)
    }

    /// Checks the EcSignature forwarded by the AA.
    pub fn process_validation_request(&self, request: &[u8]) -> AuthorizationValidationResponse {
        let response_code = match self.validate_ec_signature(request) {
            Ok(()) => ResponseCode::Ok,
            Err(code) => code,
        };
        AuthorizationValidationResponse { request_hash: request_hash(request), response_code }
    }

    fn validate_ec_signature(&self, request: &[u8]) -> Result<(), ResponseCode> {
        let req: AuthorizationValidationRequest = decode(request).map_err(|_| ResponseCode::CantParse)?;
        let Envelope::Encrypted(ed) = &req.ec_signature else {
            return Err(ResponseCode::BadContentType);
        };
        let (plaintext, _) = ed
            .open_as(&self.certificate.hashed_id8(), &self.decryption_key)
            .map_err(|_| ResponseCode::InvalidEncryptionKey)?;
        let Ok(Envelope::SignedExternalPayload(sd)) = decode::<Envelope>(&plaintext) else {
            return Err(ResponseCode::BadContentType);
        };
        let SignerIdentifier::Digest(ec_id) = sd.signer else {
            return Err(ResponseCode::BadContentType);
        };
        let ec = lock(&self.issued).get(&ec_id).cloned().ok_or(ResponseCode::UnknownIts)?;
        if !ec.tbs.validity.contains(self.clock.now()) {
            return Err(ResponseCode::BadItsStatus);
        }
        if sd.tbs.payload != sha256(&encode(&req.shared_at_request)) || !sd.verify(ec.verification_key()) {
            return Err(ResponseCode::InvalidSignature);
        }
        let shared = &req.shared_at_request;
        if shared.ea_id != self.certificate.hashed_id8() {
            return Err(ResponseCode::DeniedPermissions);
        }
        if shared.app_permissions.is_empty() || !shared.app_permissions.iter().all(|p| ec.tbs.app_permissions.contains(p)) {
            return Err(ResponseCode::DeniedPermissions);
        }
        Ok(())
    }
}

impl EaLink for EnrolmentAuthority {
    fn validate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError> {
        Ok(encode(&self.process_validation_request(request)))
    }
}
