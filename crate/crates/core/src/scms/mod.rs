//! IEEE 1609.2.1 certificate provisioning: end entity, ECA, RA and ACA.
//!
//! Enrollment is a single signed round trip with the ECA. Authorization goes
//! through the RA, which expands the EE's caterpillar key into per-index
//! cocoon keys and asks the ACA for one certificate per cocoon key. The EE
//! later downloads a ZIP of ACA responses and finalizes each butterfly key.

mod aca;
mod archive;
mod eca;
mod ee;
pub mod messages;
mod ra;

pub use aca::{AcaError, AuthorizationCa};
pub use archive::{aca_entry_name, ArchiveEntries, ArchiveError, CertBatchArchive, INFO_ENTRY};
pub use eca::{EnrollmentCa, EnrollmentRejection};
pub use ee::{
    AuthorizationCredential, BatchOutcome, DownloadSchedule, EeConfig, EndEntity, EntryError, ScmsClientError,
};
pub use messages::*;
pub use ra::{RaConfig, RaError, RegistrationAuthority};

use crate::codec::{encode, Encode, Envelope, HeaderInfo, SignedData, SignerIdentifier};
use crate::crypto::{hashed_id8, HashedId8, PrivateKey, PublicKey};
use crate::time::{Duration, Time64};

/// PSID stamped on every SCMS provisioning SPDU.
pub const PSID_SCMS: u32 = 0x23;

/// Time-period arithmetic behind `current_i` and `next_di_time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimePeriods {
    pub epoch: Time64,
    pub period: Duration,
}

impl Default for TimePeriods {
    fn default() -> Self {
        TimePeriods { epoch: Time64(0), period: Duration::WEEK }
    }
}

impl TimePeriods {
    /// `floor((now - epoch) / period)`, zero before the epoch.
    pub fn current_i(&self, now: Time64) -> u32 {
        let elapsed = now.0.saturating_sub(self.epoch.0);
        let i = elapsed / self.period.as_micros().max(1);
        u32::try_from(i).unwrap_or(u32::MAX)
    }

    /// `epoch + (i + 1) * period`.
    pub fn next_download_time(&self, current_i: u32) -> Time64 {
        let offset = (u64::from(current_i) + 1).saturating_mul(self.period.as_micros());
        self.epoch.saturating_add_micros(offset)
    }
}

/// Cocoon index for the `j`-th certificate of a batch in period `current_i`.
pub fn cocoon_index(current_i: u32, j: u32) -> Option<u32> {
    if j >= 256 {
        return None;
    }
    current_i.checked_mul(256)?.checked_add(j)
}

/// Recipient identifier used when encrypting toward a bare public key.
pub fn key_recipient_id(key: &PublicKey) -> HashedId8 {
    hashed_id8(&key.to_compressed())
}

pub(crate) fn signed_spdu(signer: SignerIdentifier, payload: &impl Encode, now: Time64, key: &PrivateKey) -> Vec<u8> {
    let header = HeaderInfo { psid: PSID_SCMS, generation_time: now };
    encode(&Envelope::Signed(SignedData::sign(signer, payload.encode(), header, key)))
}

pub(crate) fn unsecured_spdu(payload: &impl Encode) -> Vec<u8> {
    encode(&Envelope::Unsecured(payload.encode()))
}
