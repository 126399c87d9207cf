//! Explicit certificates and chain validation for both hierarchies.
//!
//! IEEE: RCA → ICA → {ECA, RA, ACA} → end-entity certificates.
//! ETSI: RCA → {EA, AA} → enrolment credentials and authorization tickets.

use thiserror::Error;

use crate::codec::{unknown_tag, Decode, DecodeError, Encode, Reader, Writer};
use crate::crypto::{ecdsa_sign, ecdsa_verify, hashed_id8, HashedId8, PrivateKey, PublicKey, Signature};
use crate::time::{Duration, Time64, Validity};

pub const MAX_SUBJECT_NAME_LEN: usize = 32;
pub const MAX_SSP_LEN: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IssuerIdentifier {
    SelfSigned,
    Digest(HashedId8),
}

/// One application permission: a PSID with opaque service-specific bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PsidSsp {
    pub psid: u32,
    pub ssp: Vec<u8>,
}

impl PsidSsp {
    pub fn new(psid: u32, ssp: impl Into<Vec<u8>>) -> Self {
        PsidSsp { psid, ssp: ssp.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateTbs {
    pub subject_name: Vec<u8>,
    pub app_permissions: Vec<PsidSsp>,
    pub validity: Validity,
    pub verification_key: PublicKey,
    pub encryption_key: Option<PublicKey>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub issuer: IssuerIdentifier,
    pub tbs: CertificateTbs,
    pub signature: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("subject validity does not nest inside the issuer's validity")]
    ValidityViolation,
    #[error("issuing key does not match the issuer certificate")]
    IssuerKeyMismatch,
    #[error("subject name longer than {MAX_SUBJECT_NAME_LEN} bytes")]
    SubjectNameTooLong,
    #[error("ssp longer than {MAX_SSP_LEN} bytes")]
    SspTooLong,
    #[error("validity duration must be positive")]
    EmptyValidity,
}

/// Why a chain was rejected; `index` is the position in the leaf-first chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ChainRejection {
    #[error("certificate {index} has a bad signature")]
    BadSignature { index: usize },
    #[error("certificate {index} does not name the next certificate as its issuer")]
    BrokenLink { index: usize },
    #[error("certificate {index} is outside its validity period")]
    Expired { index: usize },
    #[error("certificate {index} is valid longer than its issuer")]
    InconsistentValidity { index: usize },
    #[error("chain does not end at the trust anchor")]
    UntrustedRoot,
}

impl Certificate {
    /// Signs `tbs` as-is. [`issue`] and [`self_sign_root`] add the policy checks.
    pub fn sign(issuer: IssuerIdentifier, tbs: CertificateTbs, key: &PrivateKey) -> Certificate {
        let signature = ecdsa_sign(key, &tbs.encode());
        Certificate { issuer, tbs, signature }
    }

    pub fn hashed_id8(&self) -> HashedId8 {
        hashed_id8(&self.encode())
    }

    pub fn verify_signature(&self, issuer_key: &PublicKey) -> bool {
        ecdsa_verify(issuer_key, &self.tbs.encode(), &self.signature)
    }

    pub fn verification_key(&self) -> &PublicKey {
        &self.tbs.verification_key
    }

    /// Key to encapsulate toward; falls back to the verification key.
    pub fn encryption_key(&self) -> &PublicKey {
        self.tbs.encryption_key.as_ref().unwrap_or(&self.tbs.verification_key)
    }

    pub fn validity(&self) -> &Validity {
        &self.tbs.validity
    }

    pub fn is_self_signed(&self) -> bool {
        self.issuer == IssuerIdentifier::SelfSigned
    }
}

fn check_tbs(tbs: &CertificateTbs) -> Result<(), CertError> {
    if tbs.subject_name.len() > MAX_SUBJECT_NAME_LEN {
        return Err(CertError::SubjectNameTooLong);
    }
    if tbs.app_permissions.iter().any(|p| p.ssp.len() > MAX_SSP_LEN) {
        return Err(CertError::SspTooLong);
    }
    if tbs.validity.duration.0 == 0 {
        return Err(CertError::EmptyValidity);
    }
    Ok(())
}

pub fn self_sign_root(
    key: &PrivateKey,
    name: &[u8],
    validity: Validity,
    app_permissions: Vec<PsidSsp>,
) -> Result<Certificate, CertError> {
    let tbs = CertificateTbs {
        subject_name: name.to_vec(),
        app_permissions,
        validity,
        verification_key: key.public_key(),
        encryption_key: None,
    };
    check_tbs(&tbs)?;
    Ok(Certificate::sign(IssuerIdentifier::SelfSigned, tbs, key))
}

pub fn issue(issuer_key: &PrivateKey, issuer_cert: &Certificate, subject: CertificateTbs) -> Result<Certificate, CertError> {
    check_tbs(&subject)?;
    if issuer_key.public_key() != issuer_cert.tbs.verification_key {
        return Err(CertError::IssuerKeyMismatch);
    }
    if !subject.validity.nests_within(&issuer_cert.tbs.validity) {
        return Err(CertError::ValidityViolation);
    }
    Ok(Certificate::sign(IssuerIdentifier::Digest(issuer_cert.hashed_id8()), subject, issuer_key))
}

/// Verifies one certificate against its issuer (pass the certificate itself
/// for a self-signed root). Checks the issuer link and the signature only.
pub fn verify_certificate(cert: &Certificate, issuer: &Certificate) -> bool {
    let linked = match cert.issuer {
        IssuerIdentifier::SelfSigned => cert == issuer,
        IssuerIdentifier::Digest(id) => id == issuer.hashed_id8(),
    };
    linked && cert.verify_signature(issuer.verification_key())
}

/// Validates a leaf-first chain ending at `anchor`, at time `now`.
pub fn verify_chain(chain: &[Certificate], anchor: &Certificate, now: Time64) -> Result<(), ChainRejection> {
    let Some(root) = chain.last() else {
        return Err(ChainRejection::UntrustedRoot);
    };
    if root != anchor {
        return Err(ChainRejection::UntrustedRoot);
    }
    let issuer_of = |index: usize| chain.get(index + 1).unwrap_or(&chain[index]);
    for (index, cert) in chain.iter().enumerate() {
        let issuer = issuer_of(index);
        match (cert.issuer, index + 1 == chain.len()) {
            (IssuerIdentifier::SelfSigned, true) => {}
            (IssuerIdentifier::Digest(id), false) if id == issuer.hashed_id8() => {}
            _ => return Err(ChainRejection::BrokenLink { index }),
        }
        if !cert.verify_signature(issuer.verification_key()) {
            return Err(ChainRejection::BadSignature { index });
        }
    }
    if let Some(index) = chain.iter().position(|c| !c.tbs.validity.contains(now)) {
        return Err(ChainRejection::Expired { index });
    }
    if let Some(index) = (0..chain.len()).find(|&i| !chain[i].tbs.validity.nests_within(&issuer_of(i).tbs.validity)) {
        return Err(ChainRejection::InconsistentValidity { index });
    }
    Ok(())
}

/// Leaf-first list of certificates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CertificateChain(pub Vec<Certificate>);

impl CertificateChain {
    pub fn leaf(&self) -> Option<&Certificate> {
        self.0.first()
    }

    pub fn root(&self) -> Option<&Certificate> {
        self.0.last()
    }

    pub fn verify(&self, anchor: &Certificate, now: Time64) -> Result<(), ChainRejection> {
        verify_chain(&self.0, anchor, now)
    }
}

/// Default certificate lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidityPolicy {
    pub root: Duration,
    pub intermediate: Duration,
    pub enrollment: Duration,
    pub authorization: Duration,
}

impl Default for ValidityPolicy {
    fn default() -> Self {
        ValidityPolicy {
            root: Duration::years(10),
            intermediate: Duration::years(5),
            enrollment: Duration::years(3),
            authorization: Duration::WEEK,
        }
    }
}

impl Encode for IssuerIdentifier {
    fn encode_to(&self, w: &mut Writer) {
        match self {
            IssuerIdentifier::SelfSigned => {
                w.u8(0);
            }
            IssuerIdentifier::Digest(id) => {
                w.u8(1).put(id);
            }
        }
    }
}

impl Decode for IssuerIdentifier {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.tag()? {
            (0, _) => Ok(IssuerIdentifier::SelfSigned),
            (1, _) => Ok(IssuerIdentifier::Digest(r.get()?)),
            (t, at) => Err(unknown_tag(t, at)),
        }
    }
}

impl Encode for PsidSsp {
    fn encode_to(&self, w: &mut Writer) {
        w.u32(self.psid).var_bytes(&self.ssp);
    }
}

impl Decode for PsidSsp {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(PsidSsp { psid: r.u32()?, ssp: r.var_bytes_max(MAX_SSP_LEN)? })
    }
}

impl Encode for CertificateTbs {
    fn encode_to(&self, w: &mut Writer) {
        w.var_bytes(&self.subject_name)
            .list(&self.app_permissions)
            .put(&self.validity)
            .put(&self.verification_key)
            .put(&self.encryption_key);
    }
}

impl Decode for CertificateTbs {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(CertificateTbs {
            subject_name: r.var_bytes_max(MAX_SUBJECT_NAME_LEN)?,
            app_permissions: r.list()?,
            validity: r.get()?,
            verification_key: r.get()?,
            encryption_key: r.get()?,
        })
    }
}

impl Encode for Certificate {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.issuer).put(&self.tbs).put(&self.signature);
    }
}

impl Decode for Certificate {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Certificate { issuer: r.get()?, tbs: r.get()?, signature: r.get()? })
    }
}

impl Encode for CertificateChain {
    fn encode_to(&self, w: &mut Writer) {
        w.list(&self.0);
    }
}

impl Decode for CertificateChain {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(CertificateChain(r.list()?))
    }
}
