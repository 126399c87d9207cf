use std::sync::Arc;

use super::*;
use crate::cert::{issue, CertificateTbs, ValidityPolicy};
use crate::codec::{decode, encode, EncryptedData, Envelope, SignedData, SignerIdentifier};
use crate::crypto::{
    count_signatures, drbg_from_seed, ecdsa_sign, ecdsa_verify, generate_keypair, hashed_id8, sha256, SymmetricKey,
};
use crate::link::{EaLink, LinkError};
use crate::pki::{default_permissions, EtsiHierarchy};
use crate::time::{Duration, ManualClock, Time64};

const NOW: Time64 = Time64(720_000_000_000_000);

struct Fixture {
    clock: Arc<ManualClock>,
    h: EtsiHierarchy,
    ea: EnrolmentAuthority,
    aa: AuthorizationAuthority,
    its: ItsStation,
}

fn station(h: &EtsiHierarchy, ea: &EnrolmentAuthority, clock: Arc<ManualClock>, seed: u64, register: bool) -> ItsStation {
    let its_id = format!("its-{seed}").into_bytes();
    let (canonical, canonical_pub) = generate_keypair(&mut drbg_from_seed(seed)).unwrap();
    if register {
        ea.register(its_id.clone(), canonical_pub);
    }
    let config = h.its_config(&its_id, default_permissions(), &ValidityPolicy::default());
    ItsStation::new(config, canonical, clock, drbg_from_seed(seed + 1))
}

fn fixture(seed: u64) -> Fixture {
    let clock = Arc::new(ManualClock::new(NOW));
    let h = EtsiHierarchy::generate(&mut drbg_from_seed(seed), NOW, &ValidityPolicy::default()).unwrap();
    let ea = h.enrolment_authority(clock.clone(), drbg_from_seed(seed + 10));
    let aa = h.authorization_authority(clock.clone(), drbg_from_seed(seed + 11));
    let its = station(&h, &ea, clock.clone(), seed + 12, true);
    Fixture { clock, h, ea, aa, its }
}

fn enrolled(seed: u64) -> Fixture {
    let mut f = fixture(seed);
    let req = f.its.build_enrolment_request().unwrap();
    f.its.process_enrolment_response(&f.ea.process_enrolment_request(&req)).unwrap();
    f
}

/// Decrypts and verifies an authority response the way a client would,
/// given the PSK.
fn open(response: &[u8], psk: &SymmetricKey) -> Vec<u8> {
    let Envelope::Encrypted(ed) = decode::<Envelope>(response).unwrap() else { panic!("response not encrypted") };
    let Envelope::Signed(sd) = decode::<Envelope>(&ed.open_with_psk(psk).unwrap()).unwrap() else { panic!() };
    sd.tbs.payload
}

fn ec_code(f: &Fixture, request: &[u8]) -> ResponseCode {
    let response = f.ea.process_enrolment_request(request);
    let psk = f.its.enrolment_psk().unwrap();
    decode::<InnerEcResponse>(&open(&response, psk)).unwrap().response_code
}

fn at_code(f: &Fixture, ea: &dyn EaLink, request: &[u8], psk: &SymmetricKey) -> ResponseCode {
    let response = f.aa.process_authorization_request(ea, request);
    decode::<InnerAtResponse>(&open(&response, psk)).unwrap().response_code
}

/// Decrypts an AuthorizationRequest as the AA would.
fn unwrap_authorization(f: &Fixture, request: &[u8]) -> InnerAtRequest {
    let Envelope::Encrypted(ed) = decode::<Envelope>(request).unwrap() else { panic!() };
    let (plain, _) = ed.open_as(&f.h.aa.certificate.hashed_id8(), f.h.aa.decryption_key()).unwrap();
    let Envelope::Signed(pop) = decode::<Envelope>(&plain).unwrap() else { panic!() };
    decode(&pop.tbs.payload).unwrap()
}

/// Re-signs `inner` under a fresh attacker key (replacing its public key) and
/// encrypts it toward the AA. Returns the request and its PSK.
fn forge_authorization(f: &Fixture, mut inner: InnerAtRequest, seed: u64) -> (Vec<u8>, SymmetricKey) {
    let mut rng = drbg_from_seed(seed);
    let (key, public) = generate_keypair(&mut rng).unwrap();
    inner.public_key = public;
    let pop = Envelope::Signed(SignedData::sign(SignerIdentifier::SelfSigned, encode(&inner), header(NOW), &key));
    let aa = &f.h.aa.certificate;
    let (sealed, psk) = EncryptedData::seal_for(aa.hashed_id8(), aa.encryption_key(), &encode(&pop), &mut rng).unwrap();
    (encode(&Envelope::Encrypted(sealed)), psk)
}

fn validation_request(inner: &InnerAtRequest) -> Vec<u8> {
    encode(&AuthorizationValidationRequest {
        shared_at_request: inner.shared_at_request.clone(),
        ec_signature: inner.ec_signature.clone(),
    })
}

/// Opens an EnrolmentRequest to its two signature layers.
fn unwrap_enrolment(f: &Fixture, request: &[u8]) -> (SignedData, SignedData, SymmetricKey) {
    let Envelope::Encrypted(ed) = decode::<Envelope>(request).unwrap() else { panic!() };
    let (plain, psk) = ed.open_as(&f.h.ea.certificate.hashed_id8(), f.h.ea.decryption_key()).unwrap();
    let Envelope::Signed(outer) = decode::<Envelope>(&plain).unwrap() else { panic!() };
    let Envelope::Signed(inner) = decode::<Envelope>(&outer.tbs.payload).unwrap() else { panic!() };
    (outer, inner, psk)
}

fn rewrap_enrolment(f: &Fixture, outer: &SignedData, psk: &SymmetricKey) -> Vec<u8> {
    let ea = &f.h.ea.certificate;
    let sealed = EncryptedData::seal_for_with_key(
        ea.hashed_id8(),
        ea.encryption_key(),
        psk,
        &encode(&Envelope::Signed(outer.clone())),
        &mut drbg_from_seed(5),
    )
    .unwrap();
    encode(&Envelope::Encrypted(sealed))
}

#[test]
fn enrolment_request_nests_two_signatures() {
    let mut f = fixture(1);
    let (req, signs) = count_signatures(|| f.its.build_enrolment_request().unwrap());
    assert_eq!(signs, 2);
    let (outer, inner, psk) = unwrap_enrolment(&f, &req);
    assert!(outer.verify(&f.its.canonical_public_key()));
    let body: InnerEcRequest = decode(&inner.tbs.payload).unwrap();
    assert!(inner.verify(&body.enrolment_public_key));
    assert_eq!(body.its_id, f.its.its_id());
    assert_eq!(&psk, f.its.enrolment_psk().unwrap());
}

#[test]
fn registered_station_enrols() {
    let mut f = fixture(2);
    let req = f.its.build_enrolment_request().unwrap();
    let resp = f.ea.process_enrolment_request(&req);
    let psk = f.its.enrolment_psk().unwrap().clone();
    let Envelope::Encrypted(ed) = decode::<Envelope>(&resp).unwrap() else { panic!() };
    assert_eq!(ed.recipients, vec![crate::codec::RecipientInfo::Psk { recipient_id: hashed_id8(psk.as_bytes()) }]);
    let body: InnerEcResponse = decode(&open(&resp, &psk)).unwrap();
    assert_eq!(body.response_code, ResponseCode::Ok);
    assert_eq!(body.request_hash, sha256(&req)[16..]);
    let ec = f.its.process_enrolment_response(&resp).unwrap();
    assert_eq!(Some(&ec), f.its.enrolment_credential());
    assert_eq!(f.ea.issued_count(), 1);
    let mut chain = vec![ec];
    chain.extend(f.h.ea_chain().0);
    crate::cert::verify_chain(&chain, &f.h.rca.certificate, NOW).unwrap();
}

#[test]
fn unregistered_station_is_unknown() {
    let f = fixture(3);
    let mut stranger = station(&f.h, &f.ea, f.clock.clone(), 50, false);
    let req = stranger.build_enrolment_request().unwrap();
    let resp = f.ea.process_enrolment_request(&req);
    let body: InnerEcResponse = decode(&open(&resp, stranger.enrolment_psk().unwrap())).unwrap();
    assert_eq!(body.response_code, ResponseCode::UnknownIts);
    assert!(body.enrolment_credential.is_none());
    assert_eq!(stranger.process_enrolment_response(&resp), Err(ItsError::Rejected(ResponseCode::UnknownIts)));
    assert!(stranger.enrolment_credential().is_none());
}

#[test]
fn broken_inner_pop_is_invalid_signature() {
    let mut f = fixture(4);
    let req = f.its.build_enrolment_request().unwrap();
    let (mut outer, mut inner, psk) = unwrap_enrolment(&f, &req);
    let mut sig = inner.signature.to_bytes();
    sig[40] ^= 0x01;
    inner.signature = crate::crypto::Signature::from_bytes(&sig);
    outer.tbs.payload = encode(&Envelope::Signed(inner));
    let canonical_resigned = {
        let (key, public) = generate_keypair(&mut drbg_from_seed(16)).unwrap();
        assert_eq!(public, f.its.canonical_public_key());
        SignedData::sign(SignerIdentifier::SelfSigned, outer.tbs.payload.clone(), outer.tbs.header, &key)
    };
    let forged = rewrap_enrolment(&f, &canonical_resigned, &psk);
    assert_eq!(ec_code(&f, &forged), ResponseCode::InvalidSignature);
}

#[test]
fn broken_outer_signature_is_invalid_signature() {
    let mut f = fixture(5);
    let req = f.its.build_enrolment_request().unwrap();
    let (mut outer, _, psk) = unwrap_enrolment(&f, &req);
    let mut sig = outer.signature.to_bytes();
    sig[3] ^= 0x80;
    outer.signature = crate::crypto::Signature::from_bytes(&sig);
    assert_eq!(ec_code(&f, &rewrap_enrolment(&f, &outer, &psk)), ResponseCode::InvalidSignature);
}

#[test]
fn undecryptable_request_gets_a_signed_plain_answer() {
    let f = fixture(6);
    let other = EtsiHierarchy::generate(&mut drbg_from_seed(60), NOW, &ValidityPolicy::default()).unwrap();
    let other_ea = other.enrolment_authority(f.clock.clone(), drbg_from_seed(61));
    let mut its = station(&other, &other_ea, f.clock.clone(), 62, true);
    let req = its.build_enrolment_request().unwrap();
    let resp = f.ea.process_enrolment_request(&req);
    let Envelope::Signed(sd) = decode::<Envelope>(&resp).unwrap() else { panic!("expected plain signed") };
    assert!(sd.verify(f.h.ea.certificate.verification_key()));
    let body: InnerEcResponse = decode(&sd.tbs.payload).unwrap();
    assert_eq!(body.response_code, ResponseCode::InvalidEncryptionKey);
    let garbage = f.ea.process_enrolment_request(&[0xFF, 0x00]);
    let Envelope::Signed(sd) = decode::<Envelope>(&garbage).unwrap() else { panic!() };
    assert_eq!(decode::<InnerEcResponse>(&sd.tbs.payload).unwrap().response_code, ResponseCode::CantParse);
}

#[test]
fn response_under_another_psk_is_rejected() {
    let mut f = fixture(7);
    let req = f.its.build_enrolment_request().unwrap();
    let genuine = f.ea.process_enrolment_request(&req);
    let Envelope::Encrypted(ed) = decode::<Envelope>(&genuine).unwrap() else { panic!() };
    let plain = ed.open_with_psk(f.its.enrolment_psk().unwrap()).unwrap();
    let wrong = SymmetricKey::from_bytes([7; 16]);
    let resealed = encode(&Envelope::Encrypted(EncryptedData::seal_with_psk(&wrong, &plain, &mut drbg_from_seed(1)).unwrap()));
    assert_eq!(f.its.process_enrolment_response(&resealed), Err(ItsError::PskMismatch));
    let mut spoofed = EncryptedData::seal_with_psk(&wrong, &plain, &mut drbg_from_seed(1)).unwrap();
    spoofed.recipients = ed.recipients.clone();
    assert_eq!(f.its.process_enrolment_response(&encode(&Envelope::Encrypted(spoofed))), Err(ItsError::PskMismatch));
    assert!(f.its.process_enrolment_response(&genuine).is_ok());
}

#[test]
fn stored_request_copy_mismatch_is_detected() {
    let mut f = fixture(8);
    let req = f.its.build_enrolment_request().unwrap();
    let resp = f.ea.process_enrolment_request(&req);
    f.its.flip_stored_enrolment_request_bit(123);
    assert_eq!(f.its.process_enrolment_response(&resp), Err(ItsError::HashMismatch));
}

#[test]
fn enrolment_response_signed_by_aa_is_rejected() {
    let mut f = fixture(9);
    let req = f.its.build_enrolment_request().unwrap();
    let resp = f.ea.process_enrolment_request(&req);
    let payload = open(&resp, f.its.enrolment_psk().unwrap());
    let psk = f.its.enrolment_psk().unwrap().clone();
    let forged = build_response(payload, &f.h.aa.key, &f.h.ea.certificate, Some(&psk), NOW, &mut drbg_from_seed(2)).unwrap();
    assert_eq!(f.its.process_enrolment_response(&forged), Err(ItsError::BadSignature));
}

#[test]
fn authorization_request_hides_ec_signature_from_the_aa() {
    let mut f = enrolled(10);
    let (req, signs) = count_signatures(|| f.its.build_authorization_request().unwrap());
    assert_eq!(signs, 2);
    let Envelope::Encrypted(ed) = decode::<Envelope>(&req).unwrap() else { panic!() };
    let (plain, psk) = ed.open_as(&f.h.aa.certificate.hashed_id8(), f.h.aa.decryption_key()).unwrap();
    assert_eq!(&psk, f.its.authorization_psk().unwrap());
    let Envelope::Signed(pop) = decode::<Envelope>(&plain).unwrap() else { panic!() };
    let inner: InnerAtRequest = decode(&pop.tbs.payload).unwrap();
    assert!(pop.verify(&inner.public_key));
    let Envelope::Encrypted(ec_sig) = &inner.ec_signature else { panic!("EcSignature not encrypted") };
    assert!(ec_sig.open_as(&f.h.ea.certificate.hashed_id8(), f.h.aa.decryption_key()).is_err());
    assert!(ec_sig.open_as(&f.h.ea.certificate.hashed_id8(), &f.h.aa.key).is_err());
    let (ext, _) = ec_sig.open_as(&f.h.ea.certificate.hashed_id8(), f.h.ea.decryption_key()).unwrap();
    let Envelope::SignedExternalPayload(sd) = decode::<Envelope>(&ext).unwrap() else { panic!() };
    assert_eq!(sd.tbs.payload, sha256(&encode(&inner.shared_at_request)));
    assert_eq!(sd.signer, SignerIdentifier::Digest(f.its.enrolment_credential().unwrap().hashed_id8()));
}

#[test]
fn authorization_needs_enrolment() {
    let mut f = fixture(11);
    assert_eq!(f.its.build_authorization_request(), Err(ItsError::NotEnrolled));
}

#[test]
fn enrolled_station_gets_a_ticket() {
    let mut f = enrolled(12);
    let req = f.its.build_authorization_request().unwrap();
    let resp = f.aa.process_authorization_request(&f.ea, &req);
    let psk = f.its.authorization_psk().unwrap().clone();
    let body: InnerAtResponse = decode(&open(&resp, &psk)).unwrap();
    assert_eq!(body.response_code, ResponseCode::Ok);
    let at = f.its.process_authorization_response(&resp).unwrap();
    let (key, stored) = &f.its.tickets()[0];
    assert_eq!(stored, &at);
    assert_eq!(key.public_key(), at.tbs.verification_key);
    let sig = ecdsa_sign(key, b"cam");
    assert!(ecdsa_verify(&at.tbs.verification_key, b"cam", &sig));
    crate::cert::verify_chain(&[at, f.h.aa.certificate.clone(), f.h.rca.certificate.clone()], &f.h.rca.certificate, NOW)
        .unwrap();
}

#[test]
fn ea_accepts_a_valid_triple() {
    let mut f = enrolled(13);
    let req = f.its.build_authorization_request().unwrap();
    let avr = validation_request(&unwrap_authorization(&f, &req));
    let resp = f.ea.process_validation_request(&avr);
    assert_eq!(resp.response_code, ResponseCode::Ok);
    assert_eq!(resp.request_hash, request_hash(&avr));
}

#[test]
fn ec_unknown_to_the_ea_is_denied() {
    let mut f = enrolled(14);
    let req = f.its.build_authorization_request().unwrap();
    let mut inner = unwrap_authorization(&f, &req);
    let (rogue, _) = generate_keypair(&mut drbg_from_seed(140)).unwrap();
    let digest = sha256(&encode(&inner.shared_at_request)).to_vec();
    let external = Envelope::SignedExternalPayload(SignedData::sign(
        SignerIdentifier::Digest(hashed_id8(b"never issued")),
        digest,
        header(NOW),
        &rogue,
    ));
    let ea = &f.h.ea.certificate;
    let (sealed, _) =
        EncryptedData::seal_for(ea.hashed_id8(), ea.encryption_key(), &encode(&external), &mut drbg_from_seed(141)).unwrap();
    inner.ec_signature = Envelope::Encrypted(sealed);
    assert_eq!(f.ea.process_validation_request(&validation_request(&inner)).response_code, ResponseCode::UnknownIts);
    let (forged, psk) = forge_authorization(&f, inner, 142);
    assert_eq!(at_code(&f, &f.ea, &forged, &psk), ResponseCode::DeniedPermissions);
}

#[test]
fn tampered_shared_request_is_invalid_signature() {
    let mut f = enrolled(15);
    let req = f.its.build_authorization_request().unwrap();
    let mut inner = unwrap_authorization(&f, &req);
    inner.shared_at_request.key_tag[0] ^= 1;
    let (forged, psk) = forge_authorization(&f, inner, 150);
    assert_eq!(at_code(&f, &f.ea, &forged, &psk), ResponseCode::InvalidSignature);
}

#[test]
fn swapped_shared_request_is_invalid_signature() {
    let mut f = enrolled(16);
    let (a, b) = (f.its.build_authorization_request().unwrap(), f.its.build_authorization_request().unwrap());
    let (first, second) = (unwrap_authorization(&f, &a), unwrap_authorization(&f, &b));
    let swapped = InnerAtRequest { shared_at_request: second.shared_at_request, ..first };
    let avr = validation_request(&swapped);
    assert_eq!(f.ea.process_validation_request(&avr).response_code, ResponseCode::InvalidSignature);
    let (forged, psk) = forge_authorization(&f, swapped, 160);
    assert_eq!(at_code(&f, &f.ea, &forged, &psk), ResponseCode::InvalidSignature);
}

#[test]
fn expired_ec_has_bad_status() {
    let mut f = enrolled(17);
    let req = f.its.build_authorization_request().unwrap();
    let avr = validation_request(&unwrap_authorization(&f, &req));
    f.clock.set(NOW.saturating_add(Duration::years(3)));
    assert_eq!(f.ea.process_validation_request(&avr).response_code, ResponseCode::BadItsStatus);
}

struct Broken;

impl EaLink for Broken {
    fn validate(&self, _: &[u8]) -> Result<Vec<u8>, LinkError> {
        Err(LinkError::Transport("connection refused".into()))
    }
}

/// Answers ok for a different request.
struct Misaddressed;

impl EaLink for Misaddressed {
    fn validate(&self, _: &[u8]) -> Result<Vec<u8>, LinkError> {
        Ok(encode(&AuthorizationValidationResponse { request_hash: [0; 16], response_code: ResponseCode::Ok }))
    }
}

#[test]
fn ea_link_failures_are_internal_errors() {
    let mut f = enrolled(18);
    let req = f.its.build_authorization_request().unwrap();
    let psk = f.its.authorization_psk().unwrap().clone();
    assert_eq!(at_code(&f, &Broken, &req, &psk), ResponseCode::InternalServerError);
    assert_eq!(at_code(&f, &Misaddressed, &req, &psk), ResponseCode::InternalServerError);
}

#[test]
fn ticket_for_another_key_is_rejected() {
    let mut f = enrolled(19);
    let req = f.its.build_authorization_request().unwrap();
    let inner = unwrap_authorization(&f, &req);
    let tbs = CertificateTbs {
        subject_name: Vec::new(),
        app_permissions: inner.shared_at_request.app_permissions.clone(),
        validity: inner.shared_at_request.requested_validity,
        verification_key: generate_keypair(&mut drbg_from_seed(190)).unwrap().1,
        encryption_key: None,
    };
    let at = issue(&f.h.aa.key, &f.h.aa.certificate, tbs).unwrap();
    let body = InnerAtResponse { request_hash: request_hash(&req), response_code: ResponseCode::Ok, authorization_ticket: Some(at) };
    let psk = f.its.authorization_psk().unwrap().clone();
    let resp = build_response(encode(&body), &f.h.aa.key, &f.h.aa.certificate, Some(&psk), NOW, &mut drbg_from_seed(191)).unwrap();
    assert_eq!(f.its.process_authorization_response(&resp), Err(ItsError::KeyMismatch));
    assert!(f.its.tickets().is_empty());
}

#[test]
fn denied_response_stores_nothing() {
    let mut f = enrolled(20);
    let req = f.its.build_authorization_request().unwrap();
    let body =
        InnerAtResponse { request_hash: request_hash(&req), response_code: ResponseCode::DeniedPermissions, authorization_ticket: None };
    let psk = f.its.authorization_psk().unwrap().clone();
    let resp = build_response(encode(&body), &f.h.aa.key, &f.h.aa.certificate, Some(&psk), NOW, &mut drbg_from_seed(200)).unwrap();
    assert_eq!(f.its.process_authorization_response(&resp), Err(ItsError::Rejected(ResponseCode::DeniedPermissions)));
    assert!(f.its.tickets().is_empty());
}

#[test]
fn responses_open_only_under_their_psk() {
    let mut f = enrolled(21);
    let req = f.its.build_authorization_request().unwrap();
    let resp = f.aa.process_authorization_request(&f.ea, &req);
    let psk = f.its.authorization_psk().unwrap().clone();
    let Envelope::Encrypted(ed) = decode::<Envelope>(&resp).unwrap() else { panic!() };
    assert_eq!(ed.recipients, vec![crate::codec::RecipientInfo::Psk { recipient_id: psk.hashed_id8() }]);
    for seed in 0..20 {
        let other = SymmetricKey::generate(&mut drbg_from_seed(seed)).unwrap();
        let mut retargeted = ed.clone();
        retargeted.recipients = vec![crate::codec::RecipientInfo::Psk { recipient_id: other.hashed_id8() }];
        assert!(retargeted.open_with_psk(&other).is_err());
    }
    assert!(ed.open_with_psk(&psk).is_ok());
}

#[test]
fn aa_rejects_foreign_ea_and_bad_pop() {
    let mut f = enrolled(22);
    let req = f.its.build_authorization_request().unwrap();
    let mut inner = unwrap_authorization(&f, &req);
    inner.shared_at_request.ea_id = hashed_id8(b"other ea");
    let (forged, psk) = forge_authorization(&f, inner.clone(), 220);
    assert_eq!(at_code(&f, &f.ea, &forged, &psk), ResponseCode::DeniedPermissions);

    let Envelope::Encrypted(ed) = decode::<Envelope>(&forged).unwrap() else { panic!() };
    let (plain, psk) = ed.open_as(&f.h.aa.certificate.hashed_id8(), f.h.aa.decryption_key()).unwrap();
    let Envelope::Signed(mut pop) = decode::<Envelope>(&plain).unwrap() else { panic!() };
    pop.tbs.header.generation_time = Time64(1);
    let aa = &f.h.aa.certificate;
    let sealed = EncryptedData::seal_for_with_key(
        aa.hashed_id8(),
        aa.encryption_key(),
        &psk,
        &encode(&Envelope::Signed(pop)),
        &mut drbg_from_seed(221),
    )
    .unwrap();
    assert_eq!(at_code(&f, &f.ea, &encode(&Envelope::Encrypted(sealed)), &psk), ResponseCode::InvalidSignature);
}

#[test]
fn concurrent_stations_are_isolated() {
    let f = fixture(23);
    std::thread::scope(|s| {
        for t in 0..8u64 {
            let f = &f;
            s.spawn(move || {
                let mut its = station(&f.h, &f.ea, f.clock.clone(), 1000 + 3 * t, true);
                let req = its.build_enrolment_request().unwrap();
                its.process_enrolment_response(&f.ea.process_enrolment_request(&req)).unwrap();
                let req = its.build_authorization_request().unwrap();
                its.process_authorization_response(&f.aa.process_authorization_request(&f.ea, &req)).unwrap();
            });
        }
    });
    assert_eq!(f.ea.issued_count(), 8);
}
