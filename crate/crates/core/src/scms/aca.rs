use std::sync::{Arc, Mutex};

use thiserror::Error;

use super::messages::{AcaEeCertResponse, AcaRaCertResponse, RaAcaCertRequest};
use super::{key_recipient_id, PSID_SCMS};
use crate::cert::{issue, CertError, Certificate, CertificateTbs};
use crate::codec::{decode, encode, DecodeError, Encode, EncryptedData, Envelope, HeaderInfo, SignedData, SignerIdentifier};
use crate::crypto::{butterfly_public, CryptoError, Drbg, PrivateKey};
use crate::link::{AcaLink, LinkError};
use crate::time::Clock;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AcaError {
    #[error("malformed request: {0}")]
    Malformed(#[from] DecodeError),
    #[error("request has no application permissions")]
    EmptyPermissions,
    #[error("cannot issue: {0}")]
    Issue(#[from] CertError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// Authorization CA. Sees one cocoon public key per request and nothing that
/// links it to the caterpillar key or to other requests.
pub struct AuthorizationCa {
    key: PrivateKey,
    certificate: Certificate,
    clock: Arc<dyn Clock>,
    rng: Mutex<Drbg>,
    forced_private_key_info: Option<[u8; 32]>,
}

impl AuthorizationCa {
    pub fn new(key: PrivateKey, certificate: Certificate, clock: Arc<dyn Clock>, rng: Drbg) -> Self {
        AuthorizationCa { key, certificate, clock, rng: Mutex::new(rng), forced_private_key_info: None }
    }

    /// Test hook: use `c` as every response's privateKeyInfo.
    pub fn with_fixed_private_key_info(mut self, c: [u8; 32]) -> Self {
        self.forced_private_key_info = Some(c);
        self
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// Handles an encoded RaAcaCertRequest; returns an encoded AcaRaCertResponse.
    pub fn process_cert_request(&self, request: &[u8]) -> Result<Vec<u8>, AcaError> {
        let req: RaAcaCertRequest = decode(request)?;
        if req.app_permissions.is_empty() {
            return Err(AcaError::EmptyPermissions);
        }
        let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
        let private_key_info = match self.forced_private_key_info {
            Some(c) => c,
            None => PrivateKey::generate(&mut *rng)?.to_bytes(),
        };
        let tbs = CertificateTbs {
            subject_name: Vec::new(),
            app_permissions: req.app_permissions,
            validity: req.validity,
            verification_key: butterfly_public(&req.cocoon_public, &private_key_info)?,
            encryption_key: None,
        };
        let authorization_certificate = issue(&self.key, &self.certificate, tbs)?;
        let now = self.clock.now();
        let inner = AcaEeCertResponse { generation_time: now, private_key_info, authorization_certificate };
        let signed = SignedData::sign(
            SignerIdentifier::Digest(self.certificate.hashed_id8()),
            inner.encode(),
            HeaderInfo { psid: PSID_SCMS, generation_time: now },
            &self.key,
        );
        let (sealed, _) = EncryptedData::seal_for(
            key_recipient_id(&req.cocoon_public),
            &req.cocoon_public,
            &encode(&Envelope::Signed(signed)),
            &mut *rng,
        )?;
        Ok(encode(&AcaRaCertResponse { aca_response: encode(&Envelope::Encrypted(sealed)) }))
    }
}

impl AcaLink for AuthorizationCa {
    fn request_certificate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError> {
        self.process_cert_request(request).map_err(|e| LinkError::Rejected(e.to_string()))
    }
}
