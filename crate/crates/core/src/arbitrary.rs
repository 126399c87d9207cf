//! Proptest strategies for every wire structure.
//!
//! Public keys come from a fixed pool so generation stays cheap; signatures are
//! arbitrary bytes since the codec does not check them.

use std::sync::OnceLock;

use proptest::collection::vec;
use proptest::prelude::*;

use crate::ccms::{
    AuthorizationValidationRequest, AuthorizationValidationResponse, InnerAtRequest, InnerAtResponse, InnerEcRequest,
    InnerEcResponse, ResponseCode, SharedAtRequest, KEY_TAG_LEN, MAX_ITS_ID_LEN, REQUEST_HASH_LEN,
};
use crate::cert::{Certificate, CertificateChain, CertificateTbs, IssuerIdentifier, PsidSsp, MAX_SSP_LEN, MAX_SUBJECT_NAME_LEN};
use crate::codec::{EncryptedData, Envelope, HeaderInfo, RecipientInfo, SignedData, SignerIdentifier, ToBeSignedData};
use crate::crypto::{drbg_from_seed, EciesEncap, HashedId8, PrivateKey, PublicKey, Signature, AEAD_NONCE_LEN};
use crate::scms::{
    AcaEeCertResponse, AcaRaCertResponse, AckCode, AckResult, ButterflyParams, EcaEeCertResponse, EeEcaCertRequest,
    EeRaCertRequest, EeRaDownloadRequest, RaAcaCertRequest, RaEeCertAck, RaEeCertInfo,
};
use crate::time::{Duration, Time64, Validity};

const POOL_SIZE: usize = 32;

fn key_pool() -> &'static [PublicKey] {
    static POOL: OnceLock<Vec<PublicKey>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut rng = drbg_from_seed(0x6b65_7973);
        (0..POOL_SIZE)
            .map(|_| PrivateKey::generate(&mut rng).expect("seeded rng").public_key())
            .collect()
    })
}

fn bytes(max: usize) -> impl Strategy<Value = Vec<u8>> {
    vec(any::<u8>(), 0..=max)
}

pub fn public_key() -> impl Strategy<Value = PublicKey> {
    (0..POOL_SIZE).prop_map(|i| key_pool()[i])
}

pub fn hashed_id8() -> impl Strategy<Value = HashedId8> {
    any::<[u8; 8]>().prop_map(HashedId8)
}

pub fn signature() -> impl Strategy<Value = Signature> {
    (any::<[u8; 32]>(), any::<[u8; 32]>()).prop_map(|(r, s)| Signature { r, s })
}

pub fn time64() -> impl Strategy<Value = Time64> {
    any::<u64>().prop_map(Time64)
}

pub fn validity() -> impl Strategy<Value = Validity> {
    (time64(), 1..=u32::MAX).prop_map(|(start, d)| Validity { start, duration: Duration(d) })
}

pub fn psid_ssp() -> impl Strategy<Value = PsidSsp> {
    (any::<u32>(), bytes(MAX_SSP_LEN)).prop_map(|(psid, ssp)| PsidSsp { psid, ssp })
}

pub fn permissions() -> impl Strategy<Value = Vec<PsidSsp>> {
    vec(psid_ssp(), 0..4)
}

pub fn certificate() -> impl Strategy<Value = Certificate> {
    let issuer = prop_oneof![Just(IssuerIdentifier::SelfSigned), hashed_id8().prop_map(IssuerIdentifier::Digest)];
    let tbs = (bytes(MAX_SUBJECT_NAME_LEN), permissions(), validity(), public_key(), proptest::option::of(public_key()))
        .prop_map(|(subject_name, app_permissions, validity, verification_key, encryption_key)| CertificateTbs {
            subject_name,
            app_permissions,
            validity,
            verification_key,
            encryption_key,
        });
    (issuer, tbs, signature()).prop_map(|(issuer, tbs, signature)| Certificate { issuer, tbs, signature })
}

pub fn certificate_chain() -> impl Strategy<Value = CertificateChain> {
    vec(certificate(), 0..4).prop_map(CertificateChain)
}

pub fn signer_identifier() -> impl Strategy<Value = SignerIdentifier> {
    prop_oneof![
        Just(SignerIdentifier::SelfSigned),
        hashed_id8().prop_map(SignerIdentifier::Digest),
        certificate().prop_map(|c| SignerIdentifier::Certificate(Box::new(c))),
    ]
}

fn signed_data(payload: impl Strategy<Value = Vec<u8>>) -> impl Strategy<Value = SignedData> {
    (signer_identifier(), payload, any::<u32>(), time64(), signature()).prop_map(
        |(signer, payload, psid, generation_time, signature)| SignedData {
            signer,
            tbs: ToBeSignedData { payload, header: HeaderInfo { psid, generation_time } },
            signature,
        },
    )
}

pub fn recipient_info() -> impl Strategy<Value = RecipientInfo> {
    let encap = (public_key(), any::<[u8; 16]>(), any::<[u8; 16]>())
        .prop_map(|(ephemeral_public, wrapped_key, tag)| EciesEncap { ephemeral_public, wrapped_key, tag });
    prop_oneof![
        (hashed_id8(), encap).prop_map(|(recipient_id, encap)| RecipientInfo::Cert { recipient_id, encap }),
        hashed_id8().prop_map(|recipient_id| RecipientInfo::Psk { recipient_id }),
    ]
}

pub fn encrypted_data() -> impl Strategy<Value = EncryptedData> {
    (vec(recipient_info(), 1..4), any::<[u8; AEAD_NONCE_LEN]>(), bytes(96))
        .prop_map(|(recipients, nonce, ciphertext)| EncryptedData { recipients, nonce, ciphertext })
}

pub fn envelope() -> impl Strategy<Value = Envelope> {
    prop_oneof![
        bytes(96).prop_map(Envelope::Unsecured),
        signed_data(bytes(96)).prop_map(Envelope::Signed),
        encrypted_data().prop_map(Envelope::Encrypted),
        signed_data(vec(any::<u8>(), 32)).prop_map(Envelope::SignedExternalPayload),
    ]
}

pub fn ee_eca_cert_request() -> impl Strategy<Value = EeEcaCertRequest> {
    (permissions(), public_key(), validity()).prop_map(|(app_permissions, verification_key, requested_validity)| {
        EeEcaCertRequest { app_permissions, verification_key, requested_validity }
    })
}

pub fn eca_ee_cert_response() -> impl Strategy<Value = EcaEeCertResponse> {
    (hashed_id8(), vec(certificate(), 0..4), certificate()).prop_map(
        |(request_hash, eca_cert_chain, enrollment_certificate)| EcaEeCertResponse {
            request_hash,
            eca_cert_chain,
            enrollment_certificate,
        },
    )
}

pub fn ee_ra_cert_request() -> impl Strategy<Value = EeRaCertRequest> {
    (permissions(), public_key(), any::<[u8; 16]>(), 1..=u8::MAX, time64()).prop_map(
        |(app_permissions, caterpillar_public, expansion_key, cert_count, requested_start)| EeRaCertRequest {
            app_permissions,
            butterfly_params: ButterflyParams { caterpillar_public, expansion_key },
            cert_count,
            requested_start,
        },
    )
}

pub fn ack_result() -> impl Strategy<Value = AckResult> {
    prop_oneof![
        Just(AckResult::Ok),
        prop::sample::select(vec![
            AckCode::Malformed,
            AckCode::DecryptionFailed,
            AckCode::BadSignature,
            AckCode::UntrustedCertificate,
            AckCode::Expired,
            AckCode::Duplicate,
            AckCode::PermissionDenied,
        ])
        .prop_map(AckResult::Rejected),
    ]
}

pub fn ra_ee_cert_ack() -> impl Strategy<Value = RaEeCertAck> {
    (hashed_id8(), ack_result(), time64())
        .prop_map(|(request_hash, result, download_time)| RaEeCertAck { request_hash, result, download_time })
}

pub fn ee_ra_download_request() -> impl Strategy<Value = EeRaDownloadRequest> {
    hashed_id8().prop_map(|request_hash| EeRaDownloadRequest { request_hash })
}

pub fn ra_ee_cert_info() -> impl Strategy<Value = RaEeCertInfo> {
    (hashed_id8(), 0..u64::MAX, any::<u32>(), any::<u64>()).prop_map(|(request_hash, generation, current_i, gap)| {
        let next = generation + 1 + gap % (u64::MAX - generation);
        RaEeCertInfo { request_hash, generation_time: Time64(generation), current_i, next_di_time: Time64(next) }
    })
}

pub fn aca_ee_cert_response() -> impl Strategy<Value = AcaEeCertResponse> {
    (time64(), any::<[u8; 32]>(), certificate()).prop_map(
        |(generation_time, private_key_info, authorization_certificate)| AcaEeCertResponse {
            generation_time,
            private_key_info,
            authorization_certificate,
        },
    )
}

pub fn ra_aca_cert_request() -> impl Strategy<Value = RaAcaCertRequest> {
    (public_key(), permissions(), validity()).prop_map(|(cocoon_public, app_permissions, validity)| RaAcaCertRequest {
        cocoon_public,
        app_permissions,
        validity,
    })
}

pub fn aca_ra_cert_response() -> impl Strategy<Value = AcaRaCertResponse> {
    bytes(256).prop_map(|aca_response| AcaRaCertResponse { aca_response })
}

pub fn response_code() -> impl Strategy<Value = ResponseCode> {
    prop::sample::select(ResponseCode::ALL.to_vec())
}

fn code_with_certificate() -> impl Strategy<Value = (ResponseCode, Option<Certificate>)> {
    prop_oneof![
        certificate().prop_map(|c| (ResponseCode::Ok, Some(c))),
        response_code().prop_filter("non-ok", |c| *c != ResponseCode::Ok).prop_map(|c| (c, None)),
    ]
}

pub fn inner_ec_request() -> impl Strategy<Value = InnerEcRequest> {
    (bytes(MAX_ITS_ID_LEN), permissions(), public_key(), validity()).prop_map(
        |(its_id, app_permissions, enrolment_public_key, requested_validity)| InnerEcRequest {
            its_id,
            app_permissions,
            enrolment_public_key,
            requested_validity,
        },
    )
}

pub fn inner_ec_response() -> impl Strategy<Value = InnerEcResponse> {
    (any::<[u8; REQUEST_HASH_LEN]>(), code_with_certificate()).prop_map(|(request_hash, (response_code, cert))| {
        InnerEcResponse { request_hash, response_code, enrolment_credential: cert }
    })
}

pub fn shared_at_request() -> impl Strategy<Value = SharedAtRequest> {
    (hashed_id8(), any::<[u8; KEY_TAG_LEN]>(), permissions(), validity()).prop_map(
        |(ea_id, key_tag, app_permissions, requested_validity)| SharedAtRequest {
            ea_id,
            key_tag,
            app_permissions,
            requested_validity,
        },
    )
}

pub fn inner_at_request() -> impl Strategy<Value = InnerAtRequest> {
    (public_key(), shared_at_request(), envelope()).prop_map(|(public_key, shared_at_request, ec_signature)| {
        InnerAtRequest { public_key, shared_at_request, ec_signature }
    })
}

pub fn inner_at_response() -> impl Strategy<Value = InnerAtResponse> {
    (any::<[u8; REQUEST_HASH_LEN]>(), code_with_certificate()).prop_map(|(request_hash, (response_code, cert))| {
        InnerAtResponse { request_hash, response_code, authorization_ticket: cert }
    })
}

pub fn authorization_validation_request() -> impl Strategy<Value = AuthorizationValidationRequest> {
    (shared_at_request(), envelope()).prop_map(|(shared_at_request, ec_signature)| AuthorizationValidationRequest {
        shared_at_request,
        ec_signature,
    })
}

pub fn authorization_validation_response() -> impl Strategy<Value = AuthorizationValidationResponse> {
    (any::<[u8; REQUEST_HASH_LEN]>(), response_code())
        .prop_map(|(request_hash, response_code)| AuthorizationValidationResponse { request_hash, response_code })
}
