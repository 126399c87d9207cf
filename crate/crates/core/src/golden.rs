//! Golden vectors: deterministic encodings of every wire structure, stored as
//! hex dumps under `testdata/golden/`.

use std::fs;
use std::io;
use std::path::Path;

use crate::ccms::{
    AuthorizationValidationRequest, AuthorizationValidationResponse, InnerAtRequest, InnerAtResponse, InnerEcRequest,
    InnerEcResponse, SharedAtRequest,
};
use crate::cert::{Certificate, CertificateChain};
use crate::codec::{decode, encode, Decode, DecodeError, Encode, Envelope};
use crate::crypto::{drbg_from_seed, SymmetricKey};
use crate::crypto::{HashedId8, PrivateKey};
use crate::pki::{EtsiHierarchy, IeeeHierarchy};
use crate::scms::{
    AcaEeCertResponse, AcaRaCertResponse, EcaEeCertResponse, EeEcaCertRequest, EeRaCertRequest, EeRaDownloadRequest,
    RaAcaCertRequest, RaEeCertAck, RaEeCertInfo,
};
use crate::transcript::{run_etsi, run_ieee, FlowError, FlowParams};

const BYTES_PER_LINE: usize = 32;

/// Decodes `bytes` as the vector's type and re-encodes the result.
pub type Reencode = fn(&[u8]) -> Result<Vec<u8>, DecodeError>;

#[derive(Debug, Clone)]
pub struct GoldenVector {
    pub name: &'static str,
    pub bytes: Vec<u8>,
    pub reencode: Reencode,
}

fn reencode<T: Decode + Encode>(bytes: &[u8]) -> Result<Vec<u8>, DecodeError> {
    decode::<T>(bytes).map(|v| encode(&v))
}

fn vector<T: Decode + Encode>(name: &'static str, bytes: Vec<u8>) -> GoldenVector {
    GoldenVector { name, bytes, reencode: reencode::<T> }
}

fn payload(envelope: &[u8]) -> Vec<u8> {
    match decode::<Envelope>(envelope) {
        Ok(Envelope::Signed(sd)) | Ok(Envelope::SignedExternalPayload(sd)) => sd.tbs.payload,
        Ok(Envelope::Unsecured(p)) => p,
        _ => Vec::new(),
    }
}

fn open_with(envelope: &[u8], psk: &SymmetricKey) -> Vec<u8> {
    match decode::<Envelope>(envelope) {
        Ok(Envelope::Encrypted(ed)) => ed.open_with_psk(psk).unwrap_or_default(),
        _ => Vec::new(),
    }
}

/// Builds every golden vector from a fixed-seed run of both flows.
pub fn generate() -> Result<Vec<GoldenVector>, FlowError> {
    let params = FlowParams { cert_count: 2, ..FlowParams::default() };
    let ieee = run_ieee(&params)?;
    let etsi = run_etsi(&params)?;
    let h = IeeeHierarchy::generate(&mut drbg_from_seed(params.seed), params.now, &params.policy, params.chain_depth)
        .map_err(|e| FlowError { stage: "hierarchy", reason: e.to_string() })?;

    let mut v = vec![
        vector::<Certificate>("certificate", encode(&h.rca.certificate)),
        vector::<CertificateChain>("certificate_chain", encode(&h.eca_chain())),
        vector::<Envelope>("envelope_unsecured_empty", encode(&Envelope::Unsecured(Vec::new()))),
        vector::<Envelope>("ee_eca_cert_request_spdu", ieee.ee_eca_cert_request.clone()),
        vector::<EeEcaCertRequest>("ee_eca_cert_request", payload(&ieee.ee_eca_cert_request)),
        vector::<Envelope>("eca_ee_cert_response_spdu", ieee.eca_ee_cert_response.clone()),
        vector::<EcaEeCertResponse>("eca_ee_cert_response", payload(&ieee.eca_ee_cert_response)),
        vector::<Envelope>("ee_ra_cert_request_spdu", ieee.ee_ra_cert_request.clone()),
        vector::<Envelope>("ee_ra_cert_request_signed", ieee.ee_ra_cert_request_plaintext.clone()),
        vector::<EeRaCertRequest>("ee_ra_cert_request", payload(&ieee.ee_ra_cert_request_plaintext)),
        vector::<Envelope>("ra_ee_cert_ack_spdu", ieee.ra_ee_cert_ack.clone()),
        vector::<RaEeCertAck>("ra_ee_cert_ack", payload(&ieee.ra_ee_cert_ack)),
        vector::<EeRaDownloadRequest>("ee_ra_download_request", payload(&ieee.ee_ra_download_request)),
        vector::<RaAcaCertRequest>("ra_aca_cert_request", ieee.ra_aca_cert_requests[0].clone()),
        vector::<AcaRaCertResponse>("aca_ra_cert_response", ieee.aca_ra_cert_responses[0].clone()),
        vector::<Envelope>("ra_ee_cert_info_spdu", ieee.ra_ee_cert_info.clone()),
        vector::<RaEeCertInfo>("ra_ee_cert_info", payload(&ieee.ra_ee_cert_info)),
        vector::<Envelope>("aca_response", ieee.aca_responses[0].clone()),
        vector::<Envelope>("enrolment_request", etsi.enrolment_request.clone()),
        vector::<Envelope>("enrolment_response", etsi.enrolment_response.clone()),
        vector::<Envelope>("authorization_request", etsi.authorization_request.clone()),
        vector::<AuthorizationValidationRequest>(
            "authorization_validation_request",
            etsi.authorization_validation_request.clone(),
        ),
        vector::<AuthorizationValidationResponse>(
            "authorization_validation_response",
            etsi.authorization_validation_response.clone(),
        ),
        vector::<Envelope>("authorization_response", etsi.authorization_response.clone()),
    ];

    // The ETSI inner structures sit under encryption; re-derive the keys the
    // same way the fixed-seed run did.
    let etsi_h = EtsiHierarchy::generate(&mut drbg_from_seed(params.seed), params.now, &params.policy)
        .map_err(|e| FlowError { stage: "hierarchy", reason: e.to_string() })?;
    let open_as = |bytes: &[u8], id: &HashedId8, key: &PrivateKey| -> (Vec<u8>, Option<SymmetricKey>) {
        match decode::<Envelope>(bytes) {
            Ok(Envelope::Encrypted(ed)) => {
                ed.open_as(id, key).map_or((Vec::new(), None), |(p, k)| (p, Some(k)))
            }
            _ => (Vec::new(), None),
        }
    };
    let (enrolment_outer, enrolment_psk) =
        open_as(&etsi.enrolment_request, &etsi_h.ea.certificate.hashed_id8(), etsi_h.ea.decryption_key());
    let inner_ec_request = payload(&payload(&enrolment_outer));
    let (authorization_pop, authorization_psk) =
        open_as(&etsi.authorization_request, &etsi_h.aa.certificate.hashed_id8(), etsi_h.aa.decryption_key());
    let inner_at_request = payload(&authorization_pop);
    let shared = decode::<InnerAtRequest>(&inner_at_request).map(|r| encode(&r.shared_at_request)).unwrap_or_default();
    let missing = |what: &str| FlowError { stage: "golden", reason: format!("could not recover {what}") };
    let enrolment_psk = enrolment_psk.ok_or_else(|| missing("enrolment PSK"))?;
    let authorization_psk = authorization_psk.ok_or_else(|| missing("authorization PSK"))?;
    v.extend([
        vector::<InnerEcRequest>("inner_ec_request", inner_ec_request),
        vector::<InnerEcResponse>("inner_ec_response", payload(&open_with(&etsi.enrolment_response, &enrolment_psk))),
        vector::<SharedAtRequest>("shared_at_request", shared),
        vector::<InnerAtRequest>("inner_at_request", inner_at_request),
        vector::<InnerAtResponse>(
            "inner_at_response",
            payload(&open_with(&etsi.authorization_response, &authorization_psk)),
        ),
    ]);
    v.push(vector::<AcaEeCertResponse>(
        "aca_ee_cert_response",
        encode(&AcaEeCertResponse {
            generation_time: params.now,
            private_key_info: [0x5a; 32],
            authorization_certificate: h.aca.certificate.clone(),
        }),
    ));
    if let Some(bad) = v.iter().find(|g| (g.reencode)(&g.bytes).as_deref() != Ok(&g.bytes[..])) {
        return Err(FlowError { stage: "golden", reason: format!("{} does not round-trip", bad.name) });
    }
    Ok(v)
}

/// Lowercase hex, 32 bytes per line.
pub fn to_hex_dump(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2 + bytes.len() / BYTES_PER_LINE + 1);
    for line in bytes.chunks(BYTES_PER_LINE) {
        out.push_str(&hex::encode(line));
        out.push('\n');
    }
    out
}

pub fn parse_hex_dump(text: &str) -> Result<Vec<u8>, hex::FromHexError> {
    let joined: String = text.split_whitespace().collect();
    hex::decode(joined)
}

/// Writes `<name>.hex` for every vector into `dir`.
pub fn write_dir(dir: &Path, vectors: &[GoldenVector]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for v in vectors {
        fs::write(dir.join(format!("{}.hex", v.name)), to_hex_dump(&v.bytes))?;
    }
    Ok(())
}
