//! IEEE 1609.2.1 flow structures carried inside envelopes.

use crate::cert::{Certificate, PsidSsp};
use crate::codec::{unknown_tag, Decode, DecodeError, DecodeErrorKind, Encode, Reader, Writer};
use crate::crypto::{HashedId8, PublicKey, EXPANSION_KEY_LEN};
use crate::time::{Time64, Validity};

/// Payload of EeEcaCertRequestSpdu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EeEcaCertRequest {
    pub app_permissions: Vec<PsidSsp>,
    pub verification_key: PublicKey,
    pub requested_validity: Validity,
}

/// Payload of EcaEeCertResponseSpdu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcaEeCertResponse {
    pub request_hash: HashedId8,
    /// ECA first, RCA last.
    pub eca_cert_chain: Vec<Certificate>,
    pub enrollment_certificate: Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ButterflyParams {
    pub caterpillar_public: PublicKey,
    pub expansion_key: [u8; EXPANSION_KEY_LEN],
}

/// Payload of EeRaCertRequestSpdu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EeRaCertRequest {
    pub app_permissions: Vec<PsidSsp>,
    pub butterfly_params: ButterflyParams,
    pub cert_count: u8,
    pub requested_start: Time64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum AckCode {
    Malformed = 1,
    DecryptionFailed = 2,
    BadSignature = 3,
    UntrustedCertificate = 4,
    Expired = 5,
    Duplicate = 6,
    PermissionDenied = 7,
}

impl AckCode {
    fn from_u8(v: u8) -> Option<Self> {
        use AckCode::*;
        [Malformed, DecryptionFailed, BadSignature, UntrustedCertificate, Expired, Duplicate, PermissionDenied]
            .into_iter()
            .find(|c| *c as u8 == v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckResult {
    Ok,
    Rejected(AckCode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaEeCertAck {
    pub request_hash: HashedId8,
    pub result: AckResult,
    pub download_time: Time64,
}

/// Pull request for a prepared batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EeRaDownloadRequest {
    pub request_hash: HashedId8,
}

/// Payload of RaEeCertInfoSpdu.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaEeCertInfo {
    pub request_hash: HashedId8,
    pub generation_time: Time64,
    pub current_i: u32,
    pub next_di_time: Time64,
}

/// Signed payload inside each AcaResponse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcaEeCertResponse {
    pub generation_time: Time64,
    pub private_key_info: [u8; 32],
    pub authorization_certificate: Certificate,
}

/// One certificate request from the RA to the ACA, for one cocoon key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaAcaCertRequest {
    pub cocoon_public: PublicKey,
    pub app_permissions: Vec<PsidSsp>,
    pub validity: Validity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcaRaCertResponse {
    /// Encoded AcaResponse envelope, opaque to the RA.
    pub aca_response: Vec<u8>,
}

impl Encode for EeEcaCertRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.list(&self.app_permissions).put(&self.verification_key).put(&self.requested_validity);
    }
}

impl Decode for EeEcaCertRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(EeEcaCertRequest { app_permissions: r.list()?, verification_key: r.get()?, requested_validity: r.get()? })
    }
}

impl Encode for EcaEeCertResponse {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.request_hash).list(&self.eca_cert_chain).put(&self.enrollment_certificate);
    }
}

impl Decode for EcaEeCertResponse {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(EcaEeCertResponse {
            request_hash: r.get()?,
            eca_cert_chain: r.list()?,
            enrollment_certificate: r.get()?,
        })
    }
}

impl Encode for ButterflyParams {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.caterpillar_public).raw(&self.expansion_key);
    }
}

impl Decode for ButterflyParams {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(ButterflyParams { caterpillar_public: r.get()?, expansion_key: r.array()? })
    }
}

impl Encode for EeRaCertRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.list(&self.app_permissions)
            .put(&self.butterfly_params)
            .u8(self.cert_count)
            .put(&self.requested_start);
    }
}

impl Decode for EeRaCertRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let app_permissions = r.list()?;
        let butterfly_params = r.get()?;
        let at = r.offset();
        let cert_count = r.u8()?;
        if cert_count == 0 {
            return Err(Reader::error_at(at, DecodeErrorKind::Invalid("cert_count must be at least 1")));
        }
        Ok(EeRaCertRequest { app_permissions, butterfly_params, cert_count, requested_start: r.get()? })
    }
}

impl Encode for AckResult {
    fn encode_to(&self, w: &mut Writer) {
        match self {
            AckResult::Ok => w.u8(0),
            AckResult::Rejected(code) => w.u8(*code as u8),
        };
    }
}

impl Decode for AckResult {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.tag()? {
            (0, _) => Ok(AckResult::Ok),
            (t, at) => AckCode::from_u8(t).map(AckResult::Rejected).ok_or_else(|| unknown_tag(t, at)),
        }
    }
}

impl Encode for RaEeCertAck {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.request_hash).put(&self.result).put(&self.download_time);
    }
}

impl Decode for RaEeCertAck {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(RaEeCertAck { request_hash: r.get()?, result: r.get()?, download_time: r.get()? })
    }
}

impl Encode for EeRaDownloadRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.request_hash);
    }
}

impl Decode for EeRaDownloadRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(EeRaDownloadRequest { request_hash: r.get()? })
    }
}

impl Encode for RaEeCertInfo {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.request_hash)
            .put(&self.generation_time)
            .u32(self.current_i)
            .put(&self.next_di_time);
    }
}

impl Decode for RaEeCertInfo {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let request_hash = r.get()?;
        let generation_time: Time64 = r.get()?;
        let current_i = r.u32()?;
        let at = r.offset();
        let next_di_time: Time64 = r.get()?;
        if next_di_time <= generation_time {
            return Err(Reader::error_at(at, DecodeErrorKind::Invalid("next_di_time must follow generation_time")));
        }
        Ok(RaEeCertInfo { request_hash, generation_time, current_i, next_di_time })
    }
}

impl Encode for AcaEeCertResponse {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.generation_time)
            .raw(&self.private_key_info)
            .put(&self.authorization_certificate);
    }
}

impl Decode for AcaEeCertResponse {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(AcaEeCertResponse {
            generation_time: r.get()?,
            private_key_info: r.array()?,
            authorization_certificate: r.get()?,
        })
    }
}

impl Encode for RaAcaCertRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.cocoon_public).list(&self.app_permissions).put(&self.validity);
    }
}

impl Decode for RaAcaCertRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(RaAcaCertRequest { cocoon_public: r.get()?, app_permissions: r.list()?, validity: r.get()? })
    }
}

impl Encode for AcaRaCertResponse {
    fn encode_to(&self, w: &mut Writer) {
        w.var_bytes(&self.aca_response);
    }
}

impl Decode for AcaRaCertResponse {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(AcaRaCertResponse { aca_response: r.var_bytes()? })
    }
}
