//! Authorities and clients shared by the timing and signature-count runs.

use std::fmt;
use std::sync::Arc;

use v2x_core::ccms::{AuthorizationAuthority, EnrolmentAuthority, ItsStation};
use v2x_core::crypto::{drbg_from_seed, generate_keypair};
use v2x_core::pki::{EtsiHierarchy, IeeeHierarchy};
use v2x_core::scms::{AuthorizationCa, EndEntity, EnrollmentCa, RaConfig, RegistrationAuthority};
use v2x_core::time::ManualClock;
use v2x_core::transcript::{FlowError, FlowParams};

pub(crate) fn fail<E: fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> FlowError {
    move |e| FlowError { stage, reason: e.to_string() }
}

pub(crate) struct Ieee {
    params: FlowParams,
    clock: Arc<ManualClock>,
    h: IeeeHierarchy,
    eca: EnrollmentCa,
    ra: RegistrationAuthority,
    aca: AuthorizationCa,
}

impl Ieee {
    pub(crate) fn new(params: &FlowParams) -> Result<Self, FlowError> {
        let clock = Arc::new(ManualClock::new(params.now));
        let mut rng = drbg_from_seed(params.seed);
        let h = IeeeHierarchy::generate(&mut rng, params.now, &params.policy, params.chain_depth)
            .map_err(fail("hierarchy"))?;
        Ok(Ieee {
            eca: h.enrollment_ca(clock.clone()),
            ra: h.registration_authority(clock.clone(), RaConfig::default()),
            aca: h.authorization_ca(clock.clone(), drbg_from_seed(params.seed.wrapping_add(1))),
            params: params.clone(),
            clock,
            h,
        })
    }

    pub(crate) fn end_entity(&self, k: u64) -> EndEntity {
        let mut permissions = self.params.app_permissions.clone();
        permissions.extend(self.params.ieee_padding.iter().cloned());
        let rng = drbg_from_seed(self.params.seed.wrapping_add(1_000).wrapping_add(k));
        EndEntity::new(self.h.ee_config(permissions, &self.params.policy), self.clock.clone(), rng)
    }

    pub(crate) fn eca_response(&self, request: &[u8]) -> Result<Vec<u8>, FlowError> {
        self.eca.process_enrollment_request(request).map_err(fail("ECA"))
    }

    pub(crate) fn enrollment_response(&self, ee: &mut EndEntity) -> Result<Vec<u8>, FlowError> {
        let request = ee.build_enrollment_request().map_err(fail("enrollment request"))?;
        self.eca_response(&request)
    }

    pub(crate) fn enrolled(&self, k: u64) -> Result<EndEntity, FlowError> {
        let mut ee = self.end_entity(k);
        let response = self.enrollment_response(&mut ee)?;
        ee.process_enrollment_response(&response).map_err(fail("enrollment response"))?;
        Ok(ee)
    }

    /// An enrolled end entity with an outstanding request and its archive.
    pub(crate) fn with_batch(&self, k: u64, cert_count: u8) -> Result<(EndEntity, Vec<u8>), FlowError> {
        let mut ee = self.enrolled(k)?;
        let request = ee.build_auth_cert_request(cert_count).map_err(fail("RA request"))?;
        let ack = self.ra.process_auth_request_spdu(&request);
        ee.process_cert_ack(&ack).map_err(fail("ack"))?;
        let download = ee.build_download_request().map_err(fail("download request"))?;
        let archive = self.ra.process_download_request(&self.aca, &download).map_err(fail("download"))?;
        Ok((ee, archive))
    }
}

pub(crate) struct Etsi {
    params: FlowParams,
    clock: Arc<ManualClock>,
    h: EtsiHierarchy,
    pub(crate) ea: EnrolmentAuthority,
    pub(crate) aa: AuthorizationAuthority,
}

impl Etsi {
    pub(crate) fn new(params: &FlowParams) -> Result<Self, FlowError> {
        let clock = Arc::new(ManualClock::new(params.now));
        let mut rng = drbg_from_seed(params.seed);
        let h = EtsiHierarchy::generate(&mut rng, params.now, &params.policy).map_err(fail("hierarchy"))?;
        Ok(Etsi {
            ea: h.enrolment_authority(clock.clone(), drbg_from_seed(params.seed.wrapping_add(1))),
            aa: h.authorization_authority(clock.clone(), drbg_from_seed(params.seed.wrapping_add(2))),
            params: params.clone(),
            clock,
            h,
        })
    }

    /// A fresh station whose canonical key is registered with the EA.
    pub(crate) fn station(&self, k: u64) -> Result<ItsStation, FlowError> {
        let mut rng = drbg_from_seed(self.params.seed.wrapping_add(1_000).wrapping_add(k));
        let (canonical, canonical_public) = generate_keypair(&mut rng).map_err(fail("canonical key"))?;
        let its_id = format!("its-{k:012}").into_bytes();
        self.ea.register(its_id.clone(), canonical_public);
        let config = self.h.its_config(&its_id, self.params.app_permissions.clone(), &self.params.policy);
        Ok(ItsStation::new(config, canonical, self.clock.clone(), rng))
    }

    pub(crate) fn enrolment_response(&self, its: &mut ItsStation) -> Result<Vec<u8>, FlowError> {
        let request = its.build_enrolment_request().map_err(fail("enrolment request"))?;
        Ok(self.ea.process_enrolment_request(&request))
    }

    pub(crate) fn enrolled(&self, k: u64) -> Result<ItsStation, FlowError> {
        let mut its = self.station(k)?;
        let response = self.enrolment_response(&mut its)?;
        its.process_enrolment_response(&response).map_err(fail("enrolment response"))?;
        Ok(its)
    }
}
