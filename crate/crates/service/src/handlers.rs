//! Maps request frames onto authority operations.

use std::sync::Arc;

use rand_core::SeedableRng;
use thiserror::Error;
use v2x_core::ccms::{AuthorizationAuthority, EnrolmentAuthority};
use v2x_core::codec::{decode, encode, Decode, DecodeError, Encode, Reader, Writer};
use v2x_core::crypto::{drbg_from_entropy, Drbg, PublicKey};
use v2x_core::link::{AcaLink, EaLink};
use v2x_core::scms::{AuthorizationCa, EnrollmentCa, RegistrationAuthority};
use v2x_core::time::Clock;

use crate::client::{TcpAcaLink, TcpEaLink};
use crate::config::{AuthorityConfig, ConfigError, Role};
use crate::frame::{kind, Frame};
use crate::keystore::{KeyStore, KeystoreError};

pub trait Handler: Send + Sync {
    fn handle(&self, request: &Frame) -> Frame;
}

fn unsupported(role: Role, request: &Frame) -> Frame {
    Frame::error(format!("{role} does not handle frame kind {:#04x}", request.kind))
}

fn reply<E: std::fmt::Display>(request: &Frame, result: Result<Vec<u8>, E>) -> Frame {
    match result {
        Ok(payload) => Frame::new(kind::response(request.kind), payload),
        Err(e) => Frame::error(e),
    }
}

/// Registers an ITS station's canonical key with the EA ahead of enrolment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItsRegistration {
    pub its_id: Vec<u8>,
    pub canonical_public_key: PublicKey,
}

impl Encode for ItsRegistration {
    fn encode_to(&self, w: &mut Writer) {
        w.var_bytes(&self.its_id).put(&self.canonical_public_key);
    }
}

impl Decode for ItsRegistration {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(ItsRegistration { its_id: r.var_bytes_max(v2x_core::ccms::MAX_ITS_ID_LEN)?, canonical_public_key: r.get()? })
    }
}

pub struct EcaHandler(pub EnrollmentCa);

impl Handler for EcaHandler {
    fn handle(&self, request: &Frame) -> Frame {
        match request.kind {
            kind::EE_ECA_CERT_REQUEST => reply(request, self.0.process_enrollment_request(&request.payload)),
            _ => unsupported(Role::Eca, request),
        }
    }
}

pub struct RaHandler {
    pub ra: RegistrationAuthority,
    pub aca: Box<dyn AcaLink>,
}

impl Handler for RaHandler {
    fn handle(&self, request: &Frame) -> Frame {
        match request.kind {
            kind::EE_RA_CERT_REQUEST => {
                Frame::new(kind::response(request.kind), self.ra.process_auth_request_spdu(&request.payload))
            }
            kind::EE_RA_DOWNLOAD_REQUEST => {
                reply(request, self.ra.process_download_request(self.aca.as_ref(), &request.payload))
            }
            _ => unsupported(Role::Ra, request),
        }
    }
}

pub struct AcaHandler(pub AuthorizationCa);

impl Handler for AcaHandler {
    fn handle(&self, request: &Frame) -> Frame {
        match request.kind {
            kind::RA_ACA_CERT_REQUEST => reply(request, self.0.process_cert_request(&request.payload)),
            _ => unsupported(Role::Aca, request),
        }
    }
}

pub struct EaHandler(pub EnrolmentAuthority);

impl Handler for EaHandler {
    fn handle(&self, request: &Frame) -> Frame {
        let response = kind::response(request.kind);
        match request.kind {
            kind::ENROLMENT_REQUEST => Frame::new(response, self.0.process_enrolment_request(&request.payload)),
            kind::AUTHORIZATION_VALIDATION_REQUEST => {
                Frame::new(response, encode(&self.0.process_validation_request(&request.payload)))
            }
            kind::REGISTER_ITS => match decode::<ItsRegistration>(&request.payload) {
                Ok(r) => {
                    self.0.register(r.its_id, r.canonical_public_key);
                    Frame::new(response, Vec::new())
                }
                Err(e) => Frame::error(e),
            },
            _ => unsupported(Role::Ea, request),
        }
    }
}

pub struct AaHandler {
    pub aa: AuthorizationAuthority,
    pub ea: Box<dyn EaLink>,
}

impl Handler for AaHandler {
    fn handle(&self, request: &Frame) -> Frame {
        match request.kind {
            kind::AUTHORIZATION_REQUEST => Frame::new(
                kind::response(request.kind),
                self.aa.process_authorization_request(self.ea.as_ref(), &request.payload),
            ),
            _ => unsupported(Role::Aa, request),
        }
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Keystore(#[from] KeystoreError),
    #[error("{0} certificate carries no encryption key")]
    NoEncryptionKey(Role),
}

/// Loads the role's key material and wires up its upstream links. With
/// `rng_seed` the authority's randomness is reproducible.
pub fn build_handler(
    config: &AuthorityConfig,
    clock: Arc<dyn Clock>,
    rng_seed: Option<u64>,
) -> Result<Arc<dyn Handler>, BuildError> {
    config.validate()?;
    let store = KeyStore::new(&config.keys_dir);
    let rng = || rng_seed.map_or_else(drbg_from_entropy, Drbg::seed_from_u64);
    let role = config.role;
    let name = role.name();
    let handler: Arc<dyn Handler> = match role {
        Role::Eca => Arc::new(EcaHandler(EnrollmentCa::new(store.load_key(name)?, store.load_chain(name)?, clock))),
        Role::Ra => {
            let ra = store.load_authority(name)?;
            let decryption = ra.encryption_key.clone().ok_or(BuildError::NoEncryptionKey(role))?;
            let ra =
                RegistrationAuthority::new(ra.certificate, decryption, store.load_chain("eca")?, clock, config.ra_config());
            let aca = config.upstream_aca.clone().expect("validated");
            Arc::new(RaHandler { ra, aca: Box::new(TcpAcaLink::new(aca)) })
        }
        Role::Aca => {
            let aca = store.load_authority(name)?;
            Arc::new(AcaHandler(AuthorizationCa::new(aca.key, aca.certificate, clock, rng())))
        }
        Role::Ea => {
            let ea = store.load_authority(name)?;
            let decryption = ea.encryption_key.clone().ok_or(BuildError::NoEncryptionKey(role))?;
            Arc::new(EaHandler(EnrolmentAuthority::new(ea.key, decryption, ea.certificate, clock, rng())))
        }
        Role::Aa => {
            let aa = store.load_authority(name)?;
            let decryption = aa.encryption_key.clone().ok_or(BuildError::NoEncryptionKey(role))?;
            let ea_cert = store.load_certificate("ea")?;
            let aa = AuthorizationAuthority::new(aa.key, decryption, aa.certificate, &ea_cert, clock, rng());
            let ea = config.upstream_ea.clone().expect("validated");
            Arc::new(AaHandler { aa, ea: Box::new(TcpEaLink::new(ea)) })
        }
        Role::Rca | Role::Ica => unreachable!("offline roles fail validation"),
    };
    Ok(handler)
}
