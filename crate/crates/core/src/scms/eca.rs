use std::sync::Arc;

use thiserror::Error;

use super::messages::{EcaEeCertResponse, EeEcaCertRequest};
use super::{signed_spdu, PSID_SCMS};
use crate::cert::{issue, CertError, Certificate, CertificateChain, CertificateTbs};
use crate::codec::{decode, DecodeError, Envelope, SignerIdentifier};
use crate::crypto::{hashed_id8, PrivateKey};
use crate::time::Clock;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnrollmentRejection {
    #[error("malformed request: {0}")]
    Malformed(#[from] DecodeError),
    #[error("request is not a self-signed SPDU")]
    NotSelfSigned,
    #[error("proof-of-possession signature does not verify")]
    BadSignature,
    #[error("request carries psid {0}")]
    WrongPsid(u32),
    #[error("request has no application permissions")]
    EmptyPermissions,
    #[error("cannot issue: {0}")]
    Issue(#[from] CertError),
}

/// Enrollment CA: verifies proof of possession and issues enrollment
/// certificates.
pub struct EnrollmentCa {
    key: PrivateKey,
    chain: CertificateChain,
    clock: Arc<dyn Clock>,
}

impl EnrollmentCa {
    /// `chain` starts with the ECA's own certificate and ends at the RCA.
    pub fn new(key: PrivateKey, chain: CertificateChain, clock: Arc<dyn Clock>) -> Self {
        assert!(chain.leaf().is_some(), "ECA chain must contain the ECA certificate");
        EnrollmentCa { key, chain, clock }
    }

    pub fn certificate(&self) -> &Certificate {
        &self.chain.0[0]
    }

    pub fn chain(&self) -> &CertificateChain {
        &self.chain
    }

    /// Handles an EeEcaCertRequestSpdu and returns an EcaEeCertResponseSpdu.
    pub fn process_enrollment_request(&self, request: &[u8]) -> Result<Vec<u8>, EnrollmentRejection> {
        let sd = match decode::<Envelope>(request)? {
            Envelope::Signed(sd) if sd.signer == SignerIdentifier::SelfSigned => sd,
            _ => return Err(EnrollmentRejection::NotSelfSigned),
        };
        if sd.tbs.header.psid != PSID_SCMS {
            return Err(EnrollmentRejection::WrongPsid(sd.tbs.header.psid));
        }
        let req: EeEcaCertRequest = decode(&sd.tbs.payload)?;
        if !sd.verify(&req.verification_key) {
            return Err(EnrollmentRejection::BadSignature);
        }
        if req.app_permissions.is_empty() {
            return Err(EnrollmentRejection::EmptyPermissions);
        }
        let tbs = CertificateTbs {
            subject_name: Vec::new(),
            app_permissions: req.app_permissions,
            validity: req.requested_validity,
            verification_key: req.verification_key,
            encryption_key: None,
        };
        let enrollment_certificate = issue(&self.key, self.certificate(), tbs)?;
        let response = EcaEeCertResponse {
            request_hash: hashed_id8(request),
            eca_cert_chain: self.chain.0.clone(),
            enrollment_certificate,
        };
        let signer = SignerIdentifier::Certificate(Box::new(self.certificate().clone()));
        Ok(signed_spdu(signer, &response, self.clock.now(), &self.key))
    }
}
