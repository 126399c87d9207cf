//! ETSI TS 102 941 certificate provisioning: ITS station, EA and AA.
//!
//! Enrolment requests are signed twice (enrolment key inside, canonical key
//! outside) and encrypted toward the EA. Authorization requests carry an
//! EcSignature that only the EA can open; the AA forwards it for validation
//! before issuing a ticket. Every response is encrypted under the data key
//! the client encapsulated in its request.

mod aa;
mod ea;
mod its;
#[cfg(test)]
mod tests;
pub mod messages;

pub use aa::AuthorizationAuthority;
pub use ea::EnrolmentAuthority;
pub use its::{ItsConfig, ItsError, ItsStation};
pub use messages::*;

use rand_core::CryptoRngCore;

use crate::cert::Certificate;
use crate::codec::{encode, EncryptedData, Envelope, HeaderInfo, SignedData, SignerIdentifier};
use crate::crypto::{hashed_id16, CryptoError, PrivateKey, SymmetricKey};
use crate::time::Time64;

/// PSID stamped on every CCMS provisioning message.
pub const PSID_CCMS: u32 = 623;

/// Low-order 16 bytes of SHA-256 over the full encoded request.
pub fn request_hash(request: &[u8]) -> [u8; REQUEST_HASH_LEN] {
    hashed_id16(request)
}

/// Signs `payload` as the authority holding `cert` and, when a PSK is known,
/// encrypts the signed envelope under it.
pub fn build_response(
    payload: Vec<u8>,
    key: &PrivateKey,
    cert: &Certificate,
    psk: Option<&SymmetricKey>,
    now: Time64,
    rng: &mut impl CryptoRngCore,
) -> Result<Vec<u8>, CryptoError> {
    let header = HeaderInfo { psid: PSID_CCMS, generation_time: now };
    let signed = Envelope::Signed(SignedData::sign(SignerIdentifier::Digest(cert.hashed_id8()), payload, header, key));
    match psk {
        Some(psk) => Ok(encode(&Envelope::Encrypted(EncryptedData::seal_with_psk(psk, &encode(&signed), rng)?))),
        None => Ok(encode(&signed)),
    }
}

pub(crate) fn header(now: Time64) -> HeaderInfo {
    HeaderInfo { psid: PSID_CCMS, generation_time: now }
}
