//! Client flows that reach the authorities over TCP.

use std::fmt;
use std::thread;

use v2x_core::ccms::{ItsConfig, ItsStation};
use v2x_core::cert::{Certificate, PsidSsp, ValidityPolicy};
use v2x_core::codec::encode;
use v2x_core::scms::{BatchOutcome, EeConfig, EndEntity};
use v2x_core::time::Clock;

use crate::client::Client;
use crate::frame::kind;
use crate::handlers::ItsRegistration;
use crate::keystore::{KeyStore, KeystoreError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteError {
    pub stage: &'static str,
    pub reason: String,
}

impl fmt::Display for RemoteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.reason)
    }
}

impl std::error::Error for RemoteError {}

fn stage<E: fmt::Display>(stage: &'static str) -> impl Fn(E) -> RemoteError {
    move |e| RemoteError { stage, reason: e.to_string() }
}

fn call(addr: &str, request_kind: u8, payload: &[u8], name: &'static str) -> Result<Vec<u8>, RemoteError> {
    Client::connect(addr).and_then(|mut c| c.call(request_kind, payload)).map_err(stage(name))
}

/// EE trust material from an IEEE keys directory.
pub fn ee_config(store: &KeyStore, app_permissions: Vec<PsidSsp>, policy: &ValidityPolicy) -> Result<EeConfig, KeystoreError> {
    Ok(EeConfig {
        app_permissions,
        enrollment_validity: policy.enrollment,
        rca: store.load_certificate("rca")?,
        ra_certificate: store.load_certificate("ra")?,
        aca_chain: store.load_chain("aca")?,
    })
}

/// ITS station trust material from an ETSI keys directory.
pub fn its_config(
    store: &KeyStore,
    its_id: &[u8],
    app_permissions: Vec<PsidSsp>,
    policy: &ValidityPolicy,
) -> Result<ItsConfig, KeystoreError> {
    Ok(ItsConfig {
        its_id: its_id.to_vec(),
        app_permissions,
        enrolment_validity: policy.enrollment,
        at_validity: policy.authorization,
        ea_certificate: store.load_certificate("ea")?,
        aa_certificate: store.load_certificate("aa")?,
    })
}

/// Enrolls with the ECA, requests `cert_count` authorization certificates
/// from the RA, waits for the download time, and unpacks the batch.
pub fn run_ieee(
    ee: &mut EndEntity,
    eca: &str,
    ra: &str,
    cert_count: u8,
    clock: &dyn Clock,
) -> Result<BatchOutcome, RemoteError> {
    let request = ee.build_enrollment_request().map_err(stage("enrollment request"))?;
    let response = call(eca, kind::EE_ECA_CERT_REQUEST, &request, "ECA")?;
    ee.process_enrollment_response(&response).map_err(stage("enrollment response"))?;

    let request = ee.build_auth_cert_request(cert_count).map_err(stage("authorization request"))?;
    let ack = call(ra, kind::EE_RA_CERT_REQUEST, &request, "RA")?;
    let ack = ee.process_cert_ack(&ack).map_err(stage("ack"))?;
    let wait = ack.download_time.0.saturating_sub(clock.now().0);
    if wait > 0 {
        thread::sleep(std::time::Duration::from_micros(wait));
    }
    let request = ee.build_download_request().map_err(stage("download request"))?;
    let archive = call(ra, kind::EE_RA_DOWNLOAD_REQUEST, &request, "RA download")?;
    ee.download_and_unpack(&archive).map_err(stage("unpack"))
}

/// Registers the station with the EA, enrols, and obtains one authorization
/// ticket from the AA. Returns the enrolment credential and the ticket.
pub fn run_etsi(its: &mut ItsStation, ea: &str, aa: &str) -> Result<(Certificate, Certificate), RemoteError> {
    let registration =
        ItsRegistration { its_id: its.its_id().to_vec(), canonical_public_key: its.canonical_public_key() };
    call(ea, kind::REGISTER_ITS, &encode(&registration), "registration")?;
    let request = its.build_enrolment_request().map_err(stage("enrolment request"))?;
    let response = call(ea, kind::ENROLMENT_REQUEST, &request, "EA")?;
    let ec = its.process_enrolment_response(&response).map_err(stage("enrolment response"))?;
    let request = its.build_authorization_request().map_err(stage("authorization request"))?;
    let response = call(aa, kind::AUTHORIZATION_REQUEST, &request, "AA")?;
    let at = its.process_authorization_response(&response).map_err(stage("authorization response"))?;
    Ok((ec, at))
}
