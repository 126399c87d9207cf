use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, MutexGuard};

use thiserror::Error;

use super::archive::CertBatchArchive;
use super::messages::{
    AcaRaCertResponse, AckCode, AckResult, EeRaCertRequest, EeRaDownloadRequest, RaAcaCertRequest, RaEeCertAck,
    RaEeCertInfo,
};
use super::{cocoon_index, unsecured_spdu, TimePeriods};
use crate::cert::{verify_chain, Certificate, CertificateChain, ChainRejection};
use crate::codec::{decode, encode, DecodeError, Envelope, SignerIdentifier};
use crate::crypto::{cocoon_public_derive, hashed_id8, CryptoError, HashedId8, PrivateKey};
use crate::link::{AcaLink, LinkError};
use crate::time::{Clock, Duration, Time64, Validity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaConfig {
    /// Delay between acknowledging a request and the batch becoming downloadable.
    pub download_delay_micros: u64,
    pub periods: TimePeriods,
    pub at_validity: Duration,
}

impl Default for RaConfig {
    fn default() -> Self {
        RaConfig { download_delay_micros: 0, periods: TimePeriods::default(), at_validity: Duration::WEEK }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RaError {
    #[error("no request with hash {0}")]
    UnknownRequest(HashedId8),
    #[error("batch not ready before {0:?}")]
    NotReady(Time64),
    #[error("batch has not been collected yet")]
    NotCollected,
    #[error("malformed download request: {0}")]
    Malformed(#[from] DecodeError),
    #[error("download request must be an unsecured envelope")]
    NotUnsecured,
    #[error("cocoon index overflows for period {0}")]
    IndexOverflow(u32),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("ACA request {index} failed: {source}")]
    Aca { index: u32, source: LinkError },
    #[error("ACA response {index} is malformed: {source}")]
    AcaMalformed { index: u32, source: DecodeError },
}

struct CollectedBatch {
    info: RaEeCertInfo,
    aca_responses: Vec<Vec<u8>>,
}

struct Job {
    request: EeRaCertRequest,
    download_time: Time64,
    batch: Option<CollectedBatch>,
}

#[derive(Default)]
struct Registry {
    seen: HashSet<HashedId8>,
    jobs: HashMap<HashedId8, Arc<Mutex<Job>>>,
}

/// Registration authority. Holds only public butterfly material.
pub struct RegistrationAuthority {
    certificate: Certificate,
    encryption_key: PrivateKey,
    eca_chain: CertificateChain,
    clock: Arc<dyn Clock>,
    config: RaConfig,
    registry: Mutex<Registry>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl RegistrationAuthority {
    /// `eca_chain` runs from the ECA that enrolls this RA's clients to the RCA.
    pub fn new(
        certificate: Certificate,
        encryption_key: PrivateKey,
        eca_chain: CertificateChain,
        clock: Arc<dyn Clock>,
        config: RaConfig,
    ) -> Self {
        RegistrationAuthority { certificate, encryption_key, eca_chain, clock, config, registry: Mutex::default() }
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn config(&self) -> &RaConfig {
        &self.config
    }

    pub fn pending_jobs(&self) -> usize {
        lock(&self.registry).jobs.len()
    }

    /// Handles an EeRaCertRequestSpdu. Failures are reported inside the ack.
    pub fn process_auth_request(&self, request: &[u8]) -> RaEeCertAck {
        let now = self.clock.now();
        let request_hash = hashed_id8(request);
        let result = match self.check_request(request, request_hash, now) {
            Ok(req) => {
                let download_time = now.saturating_add_micros(self.config.download_delay_micros);
                let mut registry = lock(&self.registry);
                if registry.seen.insert(request_hash) {
                    let job = Job { request: req, download_time, batch: None };
                    registry.jobs.insert(request_hash, Arc::new(Mutex::new(job)));
                    return RaEeCertAck { request_hash, result: AckResult::Ok, download_time };
                }
                AckResult::Rejected(AckCode::Duplicate)
            }
            Err(code) => AckResult::Rejected(code),
        };
        RaEeCertAck { request_hash, result, download_time: now }
    }

    /// Encoded ack as sent on the wire.
    pub fn process_auth_request_spdu(&self, request: &[u8]) -> Vec<u8> {
        unsecured_spdu(&self.process_auth_request(request))
    }

    fn check_request(&self, request: &[u8], request_hash: HashedId8, now: Time64) -> Result<EeRaCertRequest, AckCode> {
        if lock(&self.registry).seen.contains(&request_hash) {
            return Err(AckCode::Duplicate);
        }
        let Ok(Envelope::Encrypted(ed)) = decode::<Envelope>(request) else {
            return Err(AckCode::Malformed);
        };
        let (plaintext, _) = ed
            .open_as(&self.certificate.hashed_id8(), &self.encryption_key)
            .map_err(|_| AckCode::DecryptionFailed)?;
        let Ok(Envelope::Signed(sd)) = decode::<Envelope>(&plaintext) else {
            return Err(AckCode::Malformed);
        };
        let SignerIdentifier::Certificate(ec) = &sd.signer else {
            return Err(AckCode::Malformed);
        };
        let mut chain = Vec::with_capacity(self.eca_chain.0.len() + 1);
        chain.push((**ec).clone());
        chain.extend(self.eca_chain.0.iter().cloned());
        let anchor = self.eca_chain.root().ok_or(AckCode::UntrustedCertificate)?;
        match verify_chain(&chain, anchor, now) {
            Ok(()) => {}
            Err(ChainRejection::Expired { .. }) => return Err(AckCode::Expired),
            Err(_) => return Err(AckCode::UntrustedCertificate),
        }
        if !sd.verify(ec.verification_key()) {
            return Err(AckCode::BadSignature);
        }
        let req: EeRaCertRequest = decode(&sd.tbs.payload).map_err(|_| AckCode::Malformed)?;
        if req.app_permissions.is_empty() || !req.app_permissions.iter().all(|p| ec.tbs.app_permissions.contains(p)) {
            return Err(AckCode::PermissionDenied);
        }
        Ok(req)
    }

    fn job(&self, request_hash: &HashedId8) -> Result<Arc<Mutex<Job>>, RaError> {
        lock(&self.registry).jobs.get(request_hash).cloned().ok_or(RaError::UnknownRequest(*request_hash))
    }

    /// Derives the cocoon public keys for a pending job and collects one ACA
    /// response per key. Idempotent once a batch has been collected.
    pub fn expand_and_collect(&self, aca: &dyn AcaLink, request_hash: &HashedId8) -> Result<(), RaError> {
        let job = self.job(request_hash)?;
        let mut job = lock(&job);
        if job.batch.is_some() {
            return Ok(());
        }
        let now = self.clock.now();
        let current_i = self.config.periods.current_i(now);
        let params = job.request.butterfly_params;
        let validity = Validity::new(job.request.requested_start, self.config.at_validity);
        let mut aca_responses = Vec::with_capacity(job.request.cert_count.into());
        for j in 0..u32::from(job.request.cert_count) {
            let index = cocoon_index(current_i, j).ok_or(RaError::IndexOverflow(current_i))?;
            let cocoon_public = cocoon_public_derive(&params.caterpillar_public, &params.expansion_key, index)?;
            let req = RaAcaCertRequest { cocoon_public, app_permissions: job.request.app_permissions.clone(), validity };
            let bytes = aca.request_certificate(&encode(&req)).map_err(|source| RaError::Aca { index, source })?;
            let resp: AcaRaCertResponse = decode(&bytes).map_err(|source| RaError::AcaMalformed { index, source })?;
            aca_responses.push(resp.aca_response);
        }
        let info = RaEeCertInfo {
            request_hash: *request_hash,
            generation_time: now,
            current_i,
            next_di_time: self.config.periods.next_download_time(current_i),
        };
        job.batch = Some(CollectedBatch { info, aca_responses });
        Ok(())
    }

    /// Serializes a collected batch as a CertBatchArchive.
    pub fn build_batch(&self, request_hash: &HashedId8) -> Result<Vec<u8>, RaError> {
        let job = self.job(request_hash)?;
        let job = lock(&job);
        let batch = job.batch.as_ref().ok_or(RaError::NotCollected)?;
        let archive = CertBatchArchive { info: unsecured_spdu(&batch.info), aca_responses: batch.aca_responses.clone() };
        Ok(archive.to_zip())
    }

    /// Serves a download once the ack's download time has passed, collecting
    /// the batch first if needed.
    pub fn download(&self, aca: &dyn AcaLink, request_hash: &HashedId8) -> Result<Vec<u8>, RaError> {
        let job = self.job(request_hash)?;
        let download_time = lock(&job).download_time;
        if self.clock.now() < download_time {
            return Err(RaError::NotReady(download_time));
        }
        self.expand_and_collect(aca, request_hash)?;
        self.build_batch(request_hash)
    }

    /// Handles an encoded download request envelope.
    pub fn process_download_request(&self, aca: &dyn AcaLink, request: &[u8]) -> Result<Vec<u8>, RaError> {
        let payload = match decode::<Envelope>(request)? {
            Envelope::Unsecured(p) => p,
            _ => return Err(RaError::NotUnsecured),
        };
        let req: EeRaDownloadRequest = decode(&payload)?;
        self.download(aca, &req.request_hash)
    }
}
