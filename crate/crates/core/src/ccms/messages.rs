//! ETSI TS 102 941 flow structures carried inside envelopes.

use crate::cert::{Certificate, PsidSsp};
use crate::codec::{unknown_tag, Decode, DecodeError, DecodeErrorKind, Encode, Envelope, Reader, Writer};
use crate::crypto::{HashedId8, PublicKey};
use crate::time::Validity;

pub const MAX_ITS_ID_LEN: usize = 32;
pub const KEY_TAG_LEN: usize = 16;
pub const REQUEST_HASH_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerEcRequest {
    pub its_id: Vec<u8>,
    pub app_permissions: Vec<PsidSsp>,
    pub enrolment_public_key: PublicKey,
    pub requested_validity: Validity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ResponseCode {
    Ok = 0,
    CantParse = 1,
    BadContentType = 2,
    UnknownIts = 3,
    InvalidSignature = 4,
    InvalidEncryptionKey = 5,
    BadItsStatus = 6,
    DeniedPermissions = 7,
    InternalServerError = 8,
}

impl ResponseCode {
    pub const ALL: [ResponseCode; 9] = [
        ResponseCode::Ok,
        ResponseCode::CantParse,
        ResponseCode::BadContentType,
        ResponseCode::UnknownIts,
        ResponseCode::InvalidSignature,
        ResponseCode::InvalidEncryptionKey,
        ResponseCode::BadItsStatus,
        ResponseCode::DeniedPermissions,
        ResponseCode::InternalServerError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResponseCode::Ok => "ok",
            ResponseCode::CantParse => "cantparse",
            ResponseCode::BadContentType => "badcontenttype",
            ResponseCode::UnknownIts => "unknownits",
            ResponseCode::InvalidSignature => "invalidsignature",
            ResponseCode::InvalidEncryptionKey => "invalidencryptionkey",
            ResponseCode::BadItsStatus => "baditsstatus",
            ResponseCode::DeniedPermissions => "deniedpermissions",
            ResponseCode::InternalServerError => "internalservererror",
        }
    }
}

impl std::fmt::Display for ResponseCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerEcResponse {
    pub request_hash: [u8; REQUEST_HASH_LEN],
    pub response_code: ResponseCode,
    /// Present exactly when `response_code` is ok.
    pub enrolment_credential: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedAtRequest {
    pub ea_id: HashedId8,
    pub key_tag: [u8; KEY_TAG_LEN],
    pub app_permissions: Vec<PsidSsp>,
    pub requested_validity: Validity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerAtRequest {
    pub public_key: PublicKey,
    pub shared_at_request: SharedAtRequest,
    /// Encrypted toward the EA; opaque to the AA.
    pub ec_signature: Envelope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerAtResponse {
    pub request_hash: [u8; REQUEST_HASH_LEN],
    pub response_code: ResponseCode,
    /// Present exactly when `response_code` is ok.
    pub authorization_ticket: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorizationValidationRequest {
    pub shared_at_request: SharedAtRequest,
    pub ec_signature: Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuthorizationValidationResponse {
    pub request_hash: [u8; REQUEST_HASH_LEN],
    pub response_code: ResponseCode,
}

impl Encode for ResponseCode {
    fn encode_to(&self, w: &mut Writer) {
        w.u8(*self as u8);
    }
}

impl Decode for ResponseCode {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let (t, at) = r.tag()?;
        ResponseCode::ALL.into_iter().find(|c| *c as u8 == t).ok_or_else(|| unknown_tag(t, at))
    }
}

fn decode_credential(
    r: &mut Reader<'_>,
    code: ResponseCode,
) -> Result<Option<Certificate>, DecodeError> {
    let at = r.offset();
    let cert: Option<Certificate> = r.get()?;
    if cert.is_some() != (code == ResponseCode::Ok) {
        return Err(Reader::error_at(at, DecodeErrorKind::Invalid("certificate must be present exactly when ok")));
    }
    Ok(cert)
}

impl Encode for InnerEcRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.var_bytes(&self.its_id)
            .list(&self.app_permissions)
            .put(&self.enrolment_public_key)
            .put(&self.requested_validity);
    }
}

impl Decode for InnerEcRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(InnerEcRequest {
            its_id: r.var_bytes_max(MAX_ITS_ID_LEN)?,
            app_permissions: r.list()?,
            enrolment_public_key: r.get()?,
            requested_validity: r.get()?,
        })
    }
}

impl Encode for InnerEcResponse {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.request_hash).put(&self.response_code).put(&self.enrolment_credential);
    }
}

impl Decode for InnerEcResponse {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let request_hash = r.array()?;
        let response_code = r.get()?;
        let enrolment_credential = decode_credential(r, response_code)?;
        Ok(InnerEcResponse { request_hash, response_code, enrolment_credential })
    }
}

impl Encode for SharedAtRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.ea_id).raw(&self.key_tag).list(&self.app_permissions).put(&self.requested_validity);
    }
}

impl Decode for SharedAtRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(SharedAtRequest {
            ea_id: r.get()?,
            key_tag: r.array()?,
            app_permissions: r.list()?,
            requested_validity: r.get()?,
        })
    }
}

impl Encode for InnerAtRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.public_key).put(&self.shared_at_request).put(&self.ec_signature);
    }
}

impl Decode for InnerAtRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(InnerAtRequest { public_key: r.get()?, shared_at_request: r.get()?, ec_signature: r.get()? })
    }
}

impl Encode for InnerAtResponse {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.request_hash).put(&self.response_code).put(&self.authorization_ticket);
    }
}

impl Decode for InnerAtResponse {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let request_hash = r.array()?;
        let response_code = r.get()?;
        let authorization_ticket = decode_credential(r, response_code)?;
        Ok(InnerAtResponse { request_hash, response_code, authorization_ticket })
    }
}

impl Encode for AuthorizationValidationRequest {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.shared_at_request).put(&self.ec_signature);
    }
}

impl Decode for AuthorizationValidationRequest {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(AuthorizationValidationRequest { shared_at_request: r.get()?, ec_signature: r.get()? })
    }
}

impl Encode for AuthorizationValidationResponse {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.request_hash).put(&self.response_code);
    }
}

impl Decode for AuthorizationValidationResponse {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(AuthorizationValidationResponse { request_hash: r.array()?, response_code: r.get()? })
    }
}
