use std::sync::{Arc, Mutex};

use super::messages::{
    AuthorizationValidationRequest, AuthorizationValidationResponse, InnerAtRequest, InnerAtResponse, ResponseCode,
};
use super::{build_response, request_hash};
use crate::cert::{issue, Certificate, CertificateTbs};
use crate::codec::{decode, encode, Envelope, SignerIdentifier};
use crate::crypto::{Drbg, HashedId8, PrivateKey, SymmetricKey};
use crate::link::EaLink;
use crate::time::Clock;

/// Authorization authority: issues tickets after the EA vouches for the
/// requester's enrolment credential. Holds no EA key material.
pub struct AuthorizationAuthority {
    key: PrivateKey,
    decryption_key: PrivateKey,
    certificate: Certificate,
    ea_id: HashedId8,
    clock: Arc<dyn Clock>,
    rng: Mutex<Drbg>,
}

impl AuthorizationAuthority {
    pub fn new(
        key: PrivateKey,
        decryption_key: PrivateKey,
        certificate: Certificate,
        ea_certificate: &Certificate,
        clock: Arc<dyn Clock>,
        rng: Drbg,
    ) -> Self {
        AuthorizationAuthority {
            key,
            decryption_key,
            certificate,
            ea_id: ea_certificate.hashed_id8(),
            clock,
            rng: Mutex::new(rng),
        }
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// Handles an AuthorizationRequest, consulting the EA through `ea`.
    pub fn process_authorization_request(&self, ea: &dyn EaLink, request: &[u8]) -> Vec<u8> {
        let mut psk = None;
        let (code, ticket) = match self.authorize(ea, request, &mut psk) {
            Ok(cert) => (ResponseCode::Ok, Some(cert)),
            Err(code) => (code, None),
        };
        let response = InnerAtResponse { request_hash: request_hash(request), response_code: code, authorization_ticket: ticket };
        let payload = encode(&response);
        let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
        let now = self.clock.now();
        build_response(payload.clone(), &self.key, &self.certificate, psk.as_ref(), now, &mut *rng)
            .or_else(|_| build_response(payload, &self.key, &self.certificate, None, now, &mut *rng))
            .expect("signing without encryption draws no randomness")
    }

    fn authorize(
        &self,
        ea: &dyn EaLink,
        request: &[u8],
        psk: &mut Option<SymmetricKey>,
    ) -> Result<Certificate, ResponseCode> {
        let Ok(Envelope::Encrypted(ed)) = decode::<Envelope>(request) else {
            return Err(ResponseCode::CantParse);
        };
        let (plaintext, data_key) = ed
            .open_as(&self.certificate.hashed_id8(), &self.decryption_key)
            .map_err(|_| ResponseCode::InvalidEncryptionKey)?;
        *psk = Some(data_key);
        let Ok(Envelope::Signed(pop)) = decode::<Envelope>(&plaintext) else {
            return Err(ResponseCode::BadContentType);
        };
        let req: InnerAtRequest = decode(&pop.tbs.payload).map_err(|_| ResponseCode::CantParse)?;
        if pop.signer != SignerIdentifier::SelfSigned || !pop.verify(&req.public_key) {
            return Err(ResponseCode::InvalidSignature);
        }
        let shared = &req.shared_at_request;
        if shared.ea_id != self.ea_id || shared.app_permissions.is_empty() {
            return Err(ResponseCode::DeniedPermissions);
        }
        let validation = encode(&AuthorizationValidationRequest {
            shared_at_request: shared.clone(),
            ec_signature: req.ec_signature.clone(),
        });
        let reply = ea.validate(&validation).map_err(|_| ResponseCode::InternalServerError)?;
        let reply: AuthorizationValidationResponse =
            decode(&reply).map_err(|_| ResponseCode::InternalServerError)?;
        if reply.request_hash != request_hash(&validation) {
            return Err(ResponseCode::InternalServerError);
        }
        match reply.response_code {
            ResponseCode::Ok => {}
            ResponseCode::InvalidSignature => return Err(ResponseCode::InvalidSignature),
            _ => return Err(ResponseCode::DeniedPermissions),
        }
        let tbs = CertificateTbs {
            subject_name: Vec::new(),
            app_permissions: shared.app_permissions.clone(),
            validity: shared.requested_validity,
            verification_key: req.public_key,
            encryption_key: None,
        };
        issue(&self.key, &self.certificate, tbs).map_err(|_| ResponseCode::DeniedPermissions)
    }
}
