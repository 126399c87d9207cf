use std::sync::Arc;

use thiserror::Error;

use super::archive::{ArchiveError, CertBatchArchive};
use super::messages::{
    AcaEeCertResponse, AckCode, AckResult, ButterflyParams, EcaEeCertResponse, EeEcaCertRequest, EeRaCertRequest,
    EeRaDownloadRequest, RaEeCertAck, RaEeCertInfo,
};
use super::{cocoon_index, key_recipient_id, signed_spdu, unsecured_spdu};
use crate::cert::{verify_chain, Certificate, CertificateChain, ChainRejection, PsidSsp};
use crate::codec::{decode, encode, DecodeError, EncryptedData, Envelope, EnvelopeError, SignerIdentifier};
use crate::crypto::{
    butterfly_finalize, cocoon_derive, generate_keypair, hashed_id8, ButterflyKeyMaterial, CryptoError, Drbg,
    HashedId8, PrivateKey,
};
use crate::time::{Clock, Duration, Validity};

#[derive(Debug, Clone)]
pub struct EeConfig {
    pub app_permissions: Vec<PsidSsp>,
    pub enrollment_validity: Duration,
    pub rca: Certificate,
    pub ra_certificate: Certificate,
    /// ACA first, RCA last.
    pub aca_chain: CertificateChain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScmsClientError {
    #[error("malformed message: {0}")]
    Malformed(#[from] DecodeError),
    #[error("expected a {expected} envelope, got {actual}")]
    UnexpectedEnvelope { expected: &'static str, actual: &'static str },
    #[error("no request is awaiting this response")]
    NoPendingRequest,
    #[error("no enrollment certificate yet")]
    NotEnrolled,
    #[error("response answers a different request")]
    RequestHashMismatch,
    #[error("signer does not match the expected authority")]
    SignerMismatch,
    #[error("signature does not verify")]
    BadSignature,
    #[error("certificate chain rejected: {0}")]
    Chain(#[from] ChainRejection),
    #[error("issued certificate does not carry our public key")]
    KeyMismatch,
    #[error("RA rejected the request: {0:?}")]
    Rejected(AckCode),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// Why one archive entry could not be turned into a credential.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntryError {
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("malformed entry: {0}")]
    Malformed(#[from] DecodeError),
    #[error("entry is not an encrypted envelope")]
    NotEncrypted,
    #[error("entry does not decrypt: {0}")]
    Decrypt(#[from] EnvelopeError),
    #[error("entry does not carry signed data")]
    NotSigned,
    #[error("entry is not signed by the ACA")]
    SignerMismatch,
    #[error("ACA signature does not verify")]
    BadSignature,
    #[error("authorization certificate rejected: {0}")]
    Chain(#[from] ChainRejection),
    #[error("butterfly key does not match the certificate")]
    KeyMismatch,
    #[error("cocoon index overflows")]
    IndexOverflow,
    #[error("no downloaded batch to open entries against")]
    NoBatch,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DownloadSchedule {
    pub current_i: u32,
    pub next_di_time: crate::time::Time64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorizationCredential {
    pub index: u32,
    pub private_key: PrivateKey,
    pub certificate: Certificate,
}

/// Result of unpacking a batch: one result per `aca_NNNN.spdu` entry.
#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub info: RaEeCertInfo,
    pub entries: Vec<Result<AuthorizationCredential, EntryError>>,
}

struct PendingAuthorization {
    request_hash: HashedId8,
    material: ButterflyKeyMaterial,
}

/// IEEE end entity. Single owner; not shared between threads.
pub struct EndEntity {
    config: EeConfig,
    clock: Arc<dyn Clock>,
    rng: Drbg,
    pending_enrollment: Option<(PrivateKey, HashedId8)>,
    enrollment: Option<(PrivateKey, Certificate)>,
    pending_authorization: Option<PendingAuthorization>,
    schedule: Option<DownloadSchedule>,
    credentials: Vec<AuthorizationCredential>,
}

fn envelope_kind(expected: &'static str, env: &Envelope) -> ScmsClientError {
    ScmsClientError::UnexpectedEnvelope { expected, actual: env.variant_name() }
}

impl EndEntity {
    pub fn new(config: EeConfig, clock: Arc<dyn Clock>, rng: Drbg) -> Self {
        EndEntity {
            config,
            clock,
            rng,
            pending_enrollment: None,
            enrollment: None,
            pending_authorization: None,
            schedule: None,
            credentials: Vec::new(),
        }
    }

    pub fn config(&self) -> &EeConfig {
        &self.config
    }

    pub fn enrollment_certificate(&self) -> Option<&Certificate> {
        self.enrollment.as_ref().map(|(_, c)| c)
    }

    pub fn schedule(&self) -> Option<DownloadSchedule> {
        self.schedule
    }

    pub fn credentials(&self) -> &[AuthorizationCredential] {
        &self.credentials
    }

    /// Hash of the outstanding authorization request, if any.
    pub fn pending_request_hash(&self) -> Option<HashedId8> {
        self.pending_authorization.as_ref().map(|p| p.request_hash)
    }

    /// Permissions requested from now on.
    pub fn set_app_permissions(&mut self, app_permissions: Vec<PsidSsp>) {
        self.config.app_permissions = app_permissions;
    }

    /// Caterpillar material of the outstanding authorization request.
    pub fn butterfly_material(&self) -> Option<&ButterflyKeyMaterial> {
        self.pending_authorization.as_ref().map(|p| &p.material)
    }

    /// Builds an EeEcaCertRequestSpdu signed by a fresh enrollment key.
    pub fn build_enrollment_request(&mut self) -> Result<Vec<u8>, ScmsClientError> {
        let (key, public) = generate_keypair(&mut self.rng)?;
        let now = self.clock.now();
        let req = EeEcaCertRequest {
            app_permissions: self.config.app_permissions.clone(),
            verification_key: public,
            requested_validity: Validity::new(now, self.config.enrollment_validity),
        };
        let spdu = signed_spdu(SignerIdentifier::SelfSigned, &req, now, &key);
        self.pending_enrollment = Some((key, hashed_id8(&spdu)));
        Ok(spdu)
    }

    /// Checks an EcaEeCertResponseSpdu and stores the enrollment certificate.
    pub fn process_enrollment_response(&mut self, response: &[u8]) -> Result<Certificate, ScmsClientError> {
        let (key, request_hash) = self.pending_enrollment.as_ref().ok_or(ScmsClientError::NoPendingRequest)?;
        let sd = match decode::<Envelope>(response)? {
            Envelope::Signed(sd) => sd,
            other => return Err(envelope_kind("signed", &other)),
        };
        let SignerIdentifier::Certificate(signer) = &sd.signer else {
            return Err(ScmsClientError::SignerMismatch);
        };
        let resp: EcaEeCertResponse = decode(&sd.tbs.payload)?;
        if resp.request_hash != *request_hash {
            return Err(ScmsClientError::RequestHashMismatch);
        }
        if resp.eca_cert_chain.first() != Some(&**signer) {
            return Err(ScmsClientError::SignerMismatch);
        }
        if !sd.verify(signer.verification_key()) {
            return Err(ScmsClientError::BadSignature);
        }
        let mut chain = Vec::with_capacity(resp.eca_cert_chain.len() + 1);
        chain.push(resp.enrollment_certificate.clone());
        chain.extend(resp.eca_cert_chain);
        verify_chain(&chain, &self.config.rca, self.clock.now())?;
        if resp.enrollment_certificate.tbs.verification_key != key.public_key() {
            return Err(ScmsClientError::KeyMismatch);
        }
        let (key, _) = self.pending_enrollment.take().expect("checked above");
        self.enrollment = Some((key, resp.enrollment_certificate.clone()));
        Ok(resp.enrollment_certificate)
    }

    /// Builds an EeRaCertRequestSpdu: signed with the enrollment key, then
    /// encrypted toward the RA. Retains the caterpillar material.
    pub fn build_auth_cert_request(&mut self, cert_count: u8) -> Result<Vec<u8>, ScmsClientError> {
        let (ec_key, ec) = self.enrollment.as_ref().ok_or(ScmsClientError::NotEnrolled)?;
        let material = ButterflyKeyMaterial::generate(&mut self.rng)?;
        let now = self.clock.now();
        let req = EeRaCertRequest {
            app_permissions: self.config.app_permissions.clone(),
            butterfly_params: ButterflyParams {
                caterpillar_public: *material.caterpillar_public(),
                expansion_key: *material.expansion_key(),
            },
            cert_count,
            requested_start: now,
        };
        let signed = signed_spdu(SignerIdentifier::Certificate(Box::new(ec.clone())), &req, now, ec_key);
        let ra = &self.config.ra_certificate;
        let (sealed, _) = EncryptedData::seal_for(ra.hashed_id8(), ra.encryption_key(), &signed, &mut self.rng)?;
        let spdu = encode(&Envelope::Encrypted(sealed));
        self.pending_authorization = Some(PendingAuthorization { request_hash: hashed_id8(&spdu), material });
        Ok(spdu)
    }

    /// Reads a RaEeCertAck; an ok ack returns the download time.
    pub fn process_cert_ack(&mut self, ack: &[u8]) -> Result<RaEeCertAck, ScmsClientError> {
        let pending = self.pending_authorization.as_ref().ok_or(ScmsClientError::NoPendingRequest)?;
        let ack: RaEeCertAck = match decode::<Envelope>(ack)? {
            Envelope::Unsecured(payload) => decode(&payload)?,
            other => return Err(envelope_kind("unsecured", &other)),
        };
        if ack.request_hash != pending.request_hash {
            return Err(ScmsClientError::RequestHashMismatch);
        }
        match ack.result {
            AckResult::Ok => Ok(ack),
            AckResult::Rejected(code) => Err(ScmsClientError::Rejected(code)),
        }
    }

    /// Download request for the outstanding authorization request.
    pub fn build_download_request(&self) -> Result<Vec<u8>, ScmsClientError> {
        let pending = self.pending_authorization.as_ref().ok_or(ScmsClientError::NoPendingRequest)?;
        Ok(unsecured_spdu(&EeRaDownloadRequest { request_hash: pending.request_hash }))
    }

    /// Opens a downloaded batch. Archive-level problems fail the whole call;
    /// per-entry problems are reported by index. Successful entries are stored.
    pub fn download_and_unpack(&mut self, archive: &[u8]) -> Result<BatchOutcome, ScmsClientError> {
        let pending = self.pending_authorization.as_ref().ok_or(ScmsClientError::NoPendingRequest)?;
        let entries = CertBatchArchive::read_entries(archive)?;
        let info: RaEeCertInfo = match decode::<Envelope>(&entries.info)? {
            Envelope::Unsecured(payload) => decode(&payload)?,
            other => return Err(envelope_kind("unsecured", &other)),
        };
        if info.request_hash != pending.request_hash {
            return Err(ScmsClientError::RequestHashMismatch);
        }
        let now = self.clock.now();
        self.config.aca_chain.verify(&self.config.rca, now)?;
        self.schedule = Some(DownloadSchedule { current_i: info.current_i, next_di_time: info.next_di_time });
        let results: Vec<_> = entries
            .aca_responses
            .into_iter()
            .enumerate()
            .map(|(j, entry)| {
                let index = u32::try_from(j).ok().and_then(|j| cocoon_index(info.current_i, j));
                let index = index.ok_or(EntryError::IndexOverflow)?;
                self.open_entry(&pending.material, index, &entry?, now)
            })
            .collect();
        self.credentials.extend(results.iter().filter_map(|r| r.as_ref().ok().cloned()));
        Ok(BatchOutcome { info, entries: results })
    }

    /// Opens the `j`-th AcaResponse of the most recently downloaded batch
    /// without storing the credential.
    pub fn process_aca_response(&self, j: u32, entry: &[u8]) -> Result<AuthorizationCredential, EntryError> {
        let pending = self.pending_authorization.as_ref().ok_or(EntryError::NoBatch)?;
        let schedule = self.schedule.ok_or(EntryError::NoBatch)?;
        let index = cocoon_index(schedule.current_i, j).ok_or(EntryError::IndexOverflow)?;
        self.open_entry(&pending.material, index, entry, self.clock.now())
    }

    fn open_entry(
        &self,
        material: &ButterflyKeyMaterial,
        index: u32,
        entry: &[u8],
        now: crate::time::Time64,
    ) -> Result<AuthorizationCredential, EntryError> {
        let (cocoon_private, cocoon_public) = cocoon_derive(material, index)?;
        let Envelope::Encrypted(ed) = decode::<Envelope>(entry)? else {
            return Err(EntryError::NotEncrypted);
        };
        let (plaintext, _) = ed.open_as(&key_recipient_id(&cocoon_public), &cocoon_private)?;
        let Envelope::Signed(sd) = decode::<Envelope>(&plaintext)? else {
            return Err(EntryError::NotSigned);
        };
        let aca = &self.config.aca_chain.0[0];
        if sd.signer != SignerIdentifier::Digest(aca.hashed_id8()) {
            return Err(EntryError::SignerMismatch);
        }
        if !sd.verify(aca.verification_key()) {
            return Err(EntryError::BadSignature);
        }
        let resp: AcaEeCertResponse = decode(&sd.tbs.payload)?;
        let mut chain = Vec::with_capacity(self.config.aca_chain.0.len() + 1);
        chain.push(resp.authorization_certificate.clone());
        chain.extend(self.config.aca_chain.0.iter().cloned());
        verify_chain(&chain, &self.config.rca, now)?;
        let private_key = butterfly_finalize(&cocoon_private, &resp.private_key_info)?;
        if private_key.public_key() != resp.authorization_certificate.tbs.verification_key {
            return Err(EntryError::KeyMismatch);
        }
        Ok(AuthorizationCredential { index, private_key, certificate: resp.authorization_certificate })
    }
}
