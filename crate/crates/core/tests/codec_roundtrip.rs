use proptest::prelude::*;
use v2x_core::arbitrary as gen;
use v2x_core::codec::{decode, encode, Decode, DecodeError};

fn decode_as<T: Decode>(_: &T, bytes: &[u8]) -> Result<T, DecodeError> {
    decode(bytes)
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(10_000)
}

macro_rules! round_trip {
    ($($name:ident => $strategy:expr),* $(,)?) => {
        proptest! {
            #![proptest_config(config())]
            $(
                #[test]
                fn $name(v in $strategy) {
                    let bytes = encode(&v);
                    prop_assert_eq!(&decode_as(&v, &bytes).unwrap(), &v);
                    prop_assert_eq!(encode(&v), bytes);
                }
            )*
        }
    };
}

round_trip! {
    certificate => gen::certificate(),
    certificate_chain => gen::certificate_chain(),
    envelope => gen::envelope(),
    ee_eca_cert_request => gen::ee_eca_cert_request(),
    eca_ee_cert_response => gen::eca_ee_cert_response(),
    ee_ra_cert_request => gen::ee_ra_cert_request(),
    ra_ee_cert_ack => gen::ra_ee_cert_ack(),
    ee_ra_download_request => gen::ee_ra_download_request(),
    ra_ee_cert_info => gen::ra_ee_cert_info(),
    aca_ee_cert_response => gen::aca_ee_cert_response(),
    ra_aca_cert_request => gen::ra_aca_cert_request(),
    aca_ra_cert_response => gen::aca_ra_cert_response(),
    inner_ec_request => gen::inner_ec_request(),
    inner_ec_response => gen::inner_ec_response(),
    shared_at_request => gen::shared_at_request(),
    inner_at_request => gen::inner_at_request(),
    inner_at_response => gen::inner_at_response(),
    authorization_validation_request => gen::authorization_validation_request(),
    authorization_validation_response => gen::authorization_validation_response(),
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn trailing_bytes_are_rejected(v in gen::envelope(), extra in proptest::collection::vec(any::<u8>(), 1..8)) {
        let mut bytes = encode(&v);
        bytes.extend(extra);
        prop_assert!(decode::<v2x_core::codec::Envelope>(&bytes).is_err());
    }
}
