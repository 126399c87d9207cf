//! Arbitrary and mutated inputs must produce a value or a decode error, never
//! a panic.

use proptest::prelude::*;
use v2x_core::ccms::{
    AuthorizationValidationRequest, AuthorizationValidationResponse, InnerAtRequest, InnerAtResponse, InnerEcRequest,
    InnerEcResponse, SharedAtRequest,
};
use v2x_core::cert::{Certificate, CertificateChain};
use v2x_core::codec::{decode, encode, Decode, Encode, Envelope};
use v2x_core::golden;
use v2x_core::scms::{
    AcaEeCertResponse, AcaRaCertResponse, CertBatchArchive, EcaEeCertResponse, EeEcaCertRequest, EeRaCertRequest,
    EeRaDownloadRequest, RaAcaCertRequest, RaEeCertAck, RaEeCertInfo,
};

/// Decodes as `T`; on success the value must re-encode to the same bytes.
fn check<T: Decode + Encode>(bytes: &[u8]) {
    if let Ok(v) = decode::<T>(bytes) {
        assert_eq!(encode(&v), bytes);
    }
}

fn all_decoders(bytes: &[u8]) {
    check::<Envelope>(bytes);
    check::<Certificate>(bytes);
    check::<CertificateChain>(bytes);
    check::<EeEcaCertRequest>(bytes);
    check::<EcaEeCertResponse>(bytes);
    check::<EeRaCertRequest>(bytes);
    check::<RaEeCertAck>(bytes);
    check::<EeRaDownloadRequest>(bytes);
    check::<RaEeCertInfo>(bytes);
    check::<AcaEeCertResponse>(bytes);
    check::<RaAcaCertRequest>(bytes);
    check::<AcaRaCertResponse>(bytes);
    check::<InnerEcRequest>(bytes);
    check::<InnerEcResponse>(bytes);
    check::<SharedAtRequest>(bytes);
    check::<InnerAtRequest>(bytes);
    check::<InnerAtResponse>(bytes);
    check::<AuthorizationValidationRequest>(bytes);
    check::<AuthorizationValidationResponse>(bytes);
    let _ = CertBatchArchive::from_zip(bytes);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        all_decoders(&bytes);
    }

    #[test]
    fn tag_prefixed_bytes(tag in 0u8..6, bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let mut input = vec![tag];
        input.extend(bytes);
        all_decoders(&input);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn mutated_golden_vectors(
        which in any::<prop::sample::Index>(),
        edits in proptest::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..4),
    ) {
        let vectors = vectors();
        let v = &vectors[which.index(vectors.len())];
        let mut bytes = v.bytes.clone();
        for (at, value) in edits {
            let i = at.index(bytes.len());
            bytes[i] = value;
        }
        let _ = (v.reencode)(&bytes);
        all_decoders(&bytes);
    }
}

fn vectors() -> &'static [golden::GoldenVector] {
    static V: std::sync::OnceLock<Vec<golden::GoldenVector>> = std::sync::OnceLock::new();
    V.get_or_init(|| golden::generate().unwrap())
}
