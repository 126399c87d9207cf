//! In-memory generation of both authority hierarchies.

use std::sync::Arc;

use rand_core::CryptoRngCore;
use thiserror::Error;

use crate::ccms::{AuthorizationAuthority, EnrolmentAuthority, ItsConfig};
use crate::cert::{issue, self_sign_root, CertError, Certificate, CertificateChain, CertificateTbs, PsidSsp, ValidityPolicy};
use crate::crypto::{generate_keypair, CryptoError, Drbg, PrivateKey};
use crate::scms::{AuthorizationCa, EeConfig, EnrollmentCa, RaConfig, RegistrationAuthority};
use crate::time::{Clock, Time64, Validity};

/// Smallest and default number of authority certificates from ECA to RCA.
pub const MIN_CHAIN_DEPTH: usize = 2;
pub const DEFAULT_CHAIN_DEPTH: usize = 3;

/// Permissions requested by the sample end entities.
pub fn default_permissions() -> Vec<PsidSsp> {
    vec![PsidSsp::new(32, vec![1])]
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PkiError {
    #[error("chain depth must be at least {MIN_CHAIN_DEPTH}, got {0}")]
    ChainDepth(usize),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Cert(#[from] CertError),
}

/// One authority's signing key, optional separate encryption key, and certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Authority {
    pub key: PrivateKey,
    pub encryption_key: Option<PrivateKey>,
    pub certificate: Certificate,
}

impl Authority {
    /// Key that opens data encapsulated toward this authority's certificate.
    pub fn decryption_key(&self) -> &PrivateKey {
        self.encryption_key.as_ref().unwrap_or(&self.key)
    }
}

struct Issuer<'a> {
    rng: &'a mut dyn CryptoRngCore,
    validity: Validity,
}

impl Issuer<'_> {
    fn root(&mut self, name: &str, psid: u32) -> Result<Authority, PkiError> {
        let (key, _) = generate_keypair(&mut self.rng)?;
        let certificate = self_sign_root(&key, name.as_bytes(), self.validity, vec![PsidSsp::new(psid, vec![])])?;
        Ok(Authority { key, encryption_key: None, certificate })
    }

    fn sub(&mut self, parent: &Authority, name: &str, psid: u32, encrypting: bool) -> Result<Authority, PkiError> {
        let (key, public) = generate_keypair(&mut self.rng)?;
        let encryption_key = if encrypting { Some(generate_keypair(&mut self.rng)?.0) } else { None };
        let tbs = CertificateTbs {
            subject_name: name.as_bytes().to_vec(),
            app_permissions: vec![PsidSsp::new(psid, vec![])],
            validity: self.validity,
            verification_key: public,
            encryption_key: encryption_key.as_ref().map(PrivateKey::public_key),
        };
        let certificate = issue(&parent.key, &parent.certificate, tbs)?;
        Ok(Authority { key, encryption_key, certificate })
    }
}

/// RCA → ICA(s) → {ECA, RA, ACA}.
#[derive(Debug, Clone)]
pub struct IeeeHierarchy {
    pub rca: Authority,
    /// Top-down: `icas[0]` is issued by the RCA.
    pub icas: Vec<Authority>,
    pub eca: Authority,
    pub ra: Authority,
    pub aca: Authority,
}

impl IeeeHierarchy {
    /// `chain_depth` counts authority certificates from the ECA up to and
    /// including the RCA, so 3 means RCA → ICA → ECA.
    pub fn generate(
        rng: &mut impl CryptoRngCore,
        now: Time64,
        policy: &ValidityPolicy,
        chain_depth: usize,
    ) -> Result<Self, PkiError> {
        if chain_depth < MIN_CHAIN_DEPTH {
            return Err(PkiError::ChainDepth(chain_depth));
        }
        let psid = crate::scms::PSID_SCMS;
        let mut issuer = Issuer { rng, validity: Validity::new(now, policy.root) };
        let rca = issuer.root("rca", psid)?;
        issuer.validity = Validity::new(now, policy.intermediate);
        let mut icas: Vec<Authority> = Vec::new();
        for n in 1..chain_depth - 1 {
            let parent = icas.last().unwrap_or(&rca);
            let ica = issuer.sub(parent, &format!("ica{n}"), psid, false)?;
            icas.push(ica);
        }
        let parent = icas.last().unwrap_or(&rca).clone();
        Ok(IeeeHierarchy {
            eca: issuer.sub(&parent, "eca", psid, false)?,
            ra: issuer.sub(&parent, "ra", psid, true)?,
            aca: issuer.sub(&parent, "aca", psid, false)?,
            rca,
            icas,
        })
    }

    fn chain_from(&self, leaf: &Authority) -> CertificateChain {
        let mut certs = vec![leaf.certificate.clone()];
        certs.extend(self.icas.iter().rev().map(|a| a.certificate.clone()));
        certs.push(self.rca.certificate.clone());
        CertificateChain(certs)
    }

    pub fn eca_chain(&self) -> CertificateChain {
        self.chain_from(&self.eca)
    }

    pub fn ra_chain(&self) -> CertificateChain {
        self.chain_from(&self.ra)
    }

    pub fn aca_chain(&self) -> CertificateChain {
        self.chain_from(&self.aca)
    }

    pub fn enrollment_ca(&self, clock: Arc<dyn Clock>) -> EnrollmentCa {
        EnrollmentCa::new(self.eca.key.clone(), self.eca_chain(), clock)
    }

    pub fn registration_authority(&self, clock: Arc<dyn Clock>, config: RaConfig) -> RegistrationAuthority {
        RegistrationAuthority::new(
            self.ra.certificate.clone(),
            self.ra.decryption_key().clone(),
            self.eca_chain(),
            clock,
            config,
        )
    }

    pub fn authorization_ca(&self, clock: Arc<dyn Clock>, rng: Drbg) -> AuthorizationCa {
        AuthorizationCa::new(self.aca.key.clone(), self.aca.certificate.clone(), clock, rng)
    }

    pub fn ee_config(&self, app_permissions: Vec<PsidSsp>, policy: &ValidityPolicy) -> EeConfig {
        EeConfig {
            app_permissions,
            enrollment_validity: policy.enrollment,
            rca: self.rca.certificate.clone(),
            ra_certificate: self.ra.certificate.clone(),
            aca_chain: self.aca_chain(),
        }
    }
}

/// RCA → {EA, AA}, no intermediates.
#[derive(Debug, Clone)]
pub struct EtsiHierarchy {
    pub rca: Authority,
    pub ea: Authority,
    pub aa: Authority,
}

impl EtsiHierarchy {
    pub fn generate(rng: &mut impl CryptoRngCore, now: Time64, policy: &ValidityPolicy) -> Result<Self, PkiError> {
        let psid = crate::ccms::PSID_CCMS;
        let mut issuer = Issuer { rng, validity: Validity::new(now, policy.root) };
        let rca = issuer.root("rca", psid)?;
        issuer.validity = Validity::new(now, policy.intermediate);
        Ok(EtsiHierarchy {
            ea: issuer.sub(&rca, "ea", psid, true)?,
            aa: issuer.sub(&rca, "aa", psid, true)?,
            rca,
        })
    }

    pub fn ea_chain(&self) -> CertificateChain {
        CertificateChain(vec![self.ea.certificate.clone(), self.rca.certificate.clone()])
    }

    pub fn aa_chain(&self) -> CertificateChain {
        CertificateChain(vec![self.aa.certificate.clone(), self.rca.certificate.clone()])
    }

    pub fn enrolment_authority(&self, clock: Arc<dyn Clock>, rng: Drbg) -> EnrolmentAuthority {
        EnrolmentAuthority::new(
            self.ea.key.clone(),
            self.ea.decryption_key().clone(),
            self.ea.certificate.clone(),
            clock,
            rng,
        )
    }

    pub fn authorization_authority(&self, clock: Arc<dyn Clock>, rng: Drbg) -> AuthorizationAuthority {
        AuthorizationAuthority::new(
            self.aa.key.clone(),
            self.aa.decryption_key().clone(),
            self.aa.certificate.clone(),
            &self.ea.certificate,
            clock,
            rng,
        )
    }

    pub fn its_config(&self, its_id: &[u8], app_permissions: Vec<PsidSsp>, policy: &ValidityPolicy) -> ItsConfig {
        ItsConfig {
            its_id: its_id.to_vec(),
            app_permissions,
            enrolment_validity: policy.enrollment,
            at_validity: policy.authorization,
            ea_certificate: self.ea.certificate.clone(),
            aa_certificate: self.aa.certificate.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::verify_chain;
    use crate::crypto::drbg_from_seed;

    const NOW: Time64 = Time64(700_000_000_000_000);

    #[test]
    fn ieee_default_depth() {
        let h = IeeeHierarchy::generate(&mut drbg_from_seed(1), NOW, &ValidityPolicy::default(), DEFAULT_CHAIN_DEPTH)
            .unwrap();
        assert_eq!(h.icas.len(), 1);
        for chain in [h.eca_chain(), h.ra_chain(), h.aca_chain()] {
            assert_eq!(chain.0.len(), 3);
            chain.verify(&h.rca.certificate, NOW).unwrap();
        }
        assert!(h.ra.certificate.tbs.encryption_key.is_some());
        assert_eq!(h.ra.decryption_key().public_key(), *h.ra.certificate.encryption_key());
    }

    #[test]
    fn ieee_depths() {
        let policy = ValidityPolicy::default();
        for depth in 2..=5 {
            let h = IeeeHierarchy::generate(&mut drbg_from_seed(depth as u64), NOW, &policy, depth).unwrap();
            assert_eq!(h.eca_chain().0.len(), depth);
            h.eca_chain().verify(&h.rca.certificate, NOW).unwrap();
        }
        assert_eq!(
            IeeeHierarchy::generate(&mut drbg_from_seed(0), NOW, &policy, 1).unwrap_err(),
            PkiError::ChainDepth(1)
        );
    }

    #[test]
    fn etsi_is_flat() {
        let h = EtsiHierarchy::generate(&mut drbg_from_seed(2), NOW, &ValidityPolicy::default()).unwrap();
        verify_chain(&h.ea_chain().0, &h.rca.certificate, NOW).unwrap();
        verify_chain(&h.aa_chain().0, &h.rca.certificate, NOW).unwrap();
        assert_ne!(h.ea.decryption_key(), &h.ea.key);
    }
}
