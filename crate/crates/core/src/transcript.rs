//! Deterministic end-to-end runs of both flows that record every message.

use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::ccms::ItsStation;
use crate::cert::{PsidSsp, ValidityPolicy};
use crate::codec::{decode, Envelope};
use crate::crypto::{drbg_from_seed, generate_keypair};
use crate::link::{AcaLink, EaLink, LinkError};
use crate::pki::{default_permissions, EtsiHierarchy, IeeeHierarchy, DEFAULT_CHAIN_DEPTH};
use crate::scms::{CertBatchArchive, EndEntity, RaConfig};
use crate::time::{ManualClock, Time64};

/// 2026-01-01T00:00:00Z.
pub const SAMPLE_TIME: Time64 = Time64::from_secs(694_310_400);

#[derive(Debug, Clone)]
pub struct FlowParams {
    pub seed: u64,
    pub chain_depth: usize,
    pub cert_count: u8,
    pub app_permissions: Vec<PsidSsp>,
    /// Extra permissions requested only by the IEEE end entity.
    pub ieee_padding: Vec<PsidSsp>,
    pub now: Time64,
    pub policy: ValidityPolicy,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            seed: 1,
            chain_depth: DEFAULT_CHAIN_DEPTH,
            cert_count: 5,
            app_permissions: default_permissions(),
            ieee_padding: Vec::new(),
            now: SAMPLE_TIME,
            policy: ValidityPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{stage} failed: {reason}")]
pub struct FlowError {
    pub stage: &'static str,
    pub reason: String,
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> FlowError {
    move |e| FlowError { stage, reason: e.to_string() }
}

/// Every message of one IEEE run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IeeeTranscript {
    pub ee_eca_cert_request: Vec<u8>,
    pub eca_ee_cert_response: Vec<u8>,
    pub ee_ra_cert_request: Vec<u8>,
    /// The signed SPDU inside `ee_ra_cert_request`, before encryption.
    pub ee_ra_cert_request_plaintext: Vec<u8>,
    pub ra_ee_cert_ack: Vec<u8>,
    pub ee_ra_download_request: Vec<u8>,
    pub ra_aca_cert_requests: Vec<Vec<u8>>,
    pub aca_ra_cert_responses: Vec<Vec<u8>>,
    pub cert_batch_archive: Vec<u8>,
    pub ra_ee_cert_info: Vec<u8>,
    pub aca_responses: Vec<Vec<u8>>,
    pub authorization_certificates: usize,
}

/// Every message of one ETSI run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtsiTranscript {
    pub enrolment_request: Vec<u8>,
    pub enrolment_response: Vec<u8>,
    pub authorization_request: Vec<u8>,
    pub authorization_validation_request: Vec<u8>,
    pub authorization_validation_response: Vec<u8>,
    pub authorization_response: Vec<u8>,
}

struct Recording<'a, L: ?Sized> {
    inner: &'a L,
    log: Mutex<Vec<(Vec<u8>, Vec<u8>)>>,
}

impl<'a, L: ?Sized> Recording<'a, L> {
    fn new(inner: &'a L) -> Self {
        Recording { inner, log: Mutex::new(Vec::new()) }
    }

    fn record(&self, request: &[u8], result: Result<Vec<u8>, LinkError>) -> Result<Vec<u8>, LinkError> {
        if let Ok(response) = &result {
            self.log.lock().unwrap_or_else(|e| e.into_inner()).push((request.to_vec(), response.clone()));
        }
        result
    }

    fn into_log(self) -> Vec<(Vec<u8>, Vec<u8>)> {
        self.log.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl<L: AcaLink + ?Sized> AcaLink for Recording<'_, L> {
    fn request_certificate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError> {
        self.record(request, self.inner.request_certificate(request))
    }
}

impl<L: EaLink + ?Sized> EaLink for Recording<'_, L> {
    fn validate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError> {
        self.record(request, self.inner.validate(request))
    }
}

pub fn run_ieee(params: &FlowParams) -> Result<IeeeTranscript, FlowError> {
    let clock = Arc::new(ManualClock::new(params.now));
    let mut rng = drbg_from_seed(params.seed);
    let h = IeeeHierarchy::generate(&mut rng, params.now, &params.policy, params.chain_depth)
        .map_err(stage("hierarchy"))?;
    let eca = h.enrollment_ca(clock.clone());
    let ra = h.registration_authority(clock.clone(), RaConfig::default());
    let aca = h.authorization_ca(clock.clone(), drbg_from_seed(params.seed.wrapping_add(1)));
    let mut permissions = params.app_permissions.clone();
    permissions.extend(params.ieee_padding.iter().cloned());
    let mut ee =
        EndEntity::new(h.ee_config(permissions, &params.policy), clock, drbg_from_seed(params.seed.wrapping_add(2)));

    let ee_eca_cert_request = ee.build_enrollment_request().map_err(stage("enrollment request"))?;
    let eca_ee_cert_response =
        eca.process_enrollment_request(&ee_eca_cert_request).map_err(stage("ECA"))?;
    ee.process_enrollment_response(&eca_ee_cert_response).map_err(stage("enrollment response"))?;

    let ee_ra_cert_request = ee.build_auth_cert_request(params.cert_count).map_err(stage("RA request"))?;
    let ee_ra_cert_request_plaintext = match decode::<Envelope>(&ee_ra_cert_request) {
        Ok(Envelope::Encrypted(ed)) => ed
            .open_as(&h.ra.certificate.hashed_id8(), h.ra.decryption_key())
            .map_err(stage("RA decryption"))?
            .0,
        _ => return Err(FlowError { stage: "RA request", reason: "not encrypted".into() }),
    };
    let ra_ee_cert_ack = ra.process_auth_request_spdu(&ee_ra_cert_request);
    ee.process_cert_ack(&ra_ee_cert_ack).map_err(stage("ack"))?;
    let ee_ra_download_request = ee.build_download_request().map_err(stage("download request"))?;
    let recording = Recording::new(&aca);
    let cert_batch_archive =
        ra.process_download_request(&recording, &ee_ra_download_request).map_err(stage("download"))?;
    let (ra_aca_cert_requests, aca_ra_cert_responses) = recording.into_log().into_iter().unzip();
    let outcome = ee.download_and_unpack(&cert_batch_archive).map_err(stage("unpack"))?;
    let authorization_certificates = outcome.entries.iter().filter(|e| e.is_ok()).count();
    if authorization_certificates != outcome.entries.len() {
        return Err(FlowError { stage: "unpack", reason: "an archive entry failed".into() });
    }
    let archive = CertBatchArchive::from_zip(&cert_batch_archive).map_err(stage("archive"))?;
    Ok(IeeeTranscript {
        ee_eca_cert_request,
        eca_ee_cert_response,
        ee_ra_cert_request,
        ee_ra_cert_request_plaintext,
        ra_ee_cert_ack,
        ee_ra_download_request,
        ra_aca_cert_requests,
        aca_ra_cert_responses,
        cert_batch_archive,
        ra_ee_cert_info: archive.info,
        aca_responses: archive.aca_responses,
        authorization_certificates,
    })
}

pub fn run_etsi(params: &FlowParams) -> Result<EtsiTranscript, FlowError> {
    let clock = Arc::new(ManualClock::new(params.now));
    let mut rng = drbg_from_seed(params.seed);
    let h = EtsiHierarchy::generate(&mut rng, params.now, &params.policy).map_err(stage("hierarchy"))?;
    let ea = h.enrolment_authority(clock.clone(), drbg_from_seed(params.seed.wrapping_add(1)));
    let aa = h.authorization_authority(clock.clone(), drbg_from_seed(params.seed.wrapping_add(2)));
    let (canonical, canonical_public) = generate_keypair(&mut rng).map_err(stage("canonical key"))?;
    let its_id = b"its-station-0001";
    ea.register(its_id.to_vec(), canonical_public);
    let config = h.its_config(its_id, params.app_permissions.clone(), &params.policy);
    let mut its = ItsStation::new(config, canonical, clock, drbg_from_seed(params.seed.wrapping_add(3)));

    let enrolment_request = its.build_enrolment_request().map_err(stage("enrolment request"))?;
    let enrolment_response = ea.process_enrolment_request(&enrolment_request);
    its.process_enrolment_response(&enrolment_response).map_err(stage("enrolment response"))?;

    let authorization_request = its.build_authorization_request().map_err(stage("authorization request"))?;
    let recording = Recording::new(&ea);
    let authorization_response = aa.process_authorization_request(&recording, &authorization_request);
    let mut log = recording.into_log();
    its.process_authorization_response(&authorization_response).map_err(stage("authorization response"))?;
    let (authorization_validation_request, authorization_validation_response) =
        log.pop().ok_or(FlowError { stage: "validation", reason: "AA never contacted the EA".into() })?;
    Ok(EtsiTranscript {
        enrolment_request,
        enrolment_response,
        authorization_request,
        authorization_validation_request,
        authorization_validation_response,
        authorization_response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_are_deterministic() {
        let params = FlowParams { cert_count: 2, ..FlowParams::default() };
        assert_eq!(run_ieee(&params).unwrap(), run_ieee(&params).unwrap());
        assert_eq!(run_etsi(&params).unwrap(), run_etsi(&params).unwrap());
    }

    #[test]
    fn seeds_change_bytes() {
        let a = run_etsi(&FlowParams::default()).unwrap();
        let b = run_etsi(&FlowParams { seed: 2, ..FlowParams::default() }).unwrap();
        assert_ne!(a.enrolment_request, b.enrolment_request);
    }

    #[test]
    fn ieee_run_records_every_aca_exchange() {
        let t = run_ieee(&FlowParams::default()).unwrap();
        assert_eq!(t.ra_aca_cert_requests.len(), 5);
        assert_eq!(t.aca_responses.len(), 5);
        assert_eq!(t.authorization_certificates, 5);
    }
}
