//! Certificate provisioning for vehicular PKIs.
//!
//! Two provisioning protocols are implemented side by side on a shared set of
//! primitives:
//!
//! * [`scms`]: the IEEE 1609.2.1 flow. An end entity enrolls with the ECA,
//!   then requests a batch of authorization certificates through the RA using
//!   butterfly key expansion, and downloads them from the RA as a ZIP archive.
//! * [`ccms`]: the ETSI TS 102 941 flow. An ITS station enrols with the EA
//!   using a doubly signed request and obtains an authorization ticket from
//!   the AA, which validates the station's enrolment with the EA.
//!
//! Both flows are built from [`crypto`] (P-256 ECDSA/ECIES, AES-CCM, butterfly
//! key arithmetic), the [`codec`] envelope family, and the explicit
//! certificates of [`cert`].

pub mod ccms;
pub mod cert;
pub mod codec;
pub mod crypto;
pub mod golden;
pub mod link;
pub mod pki;
pub mod scms;
pub mod time;
pub mod transcript;

#[cfg(feature = "arbitrary")]
pub mod arbitrary;
