//! Message-length and processing-time measurements for the IEEE and ETSI
//! provisioning flows, with checks of how the two compare.

pub mod checks;
pub mod emit;
mod fixture;
pub mod lengths;
pub mod timings;

use std::fmt;

use thiserror::Error;
use v2x_core::cert::PsidSsp;
use v2x_core::transcript::{FlowError, FlowParams};

pub use checks::{check_orderings, measure_signature_counts, CheckKind, Operand, Relation, SignatureCount, Unit, Verdict};
pub use lengths::{measure_lengths, LengthRow};
pub use timings::{measure_timings, Phase, TimingOptions, TimingRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Standard {
    Ieee,
    Etsi,
}

impl fmt::Display for Standard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Standard::Ieee => "IEEE",
            Standard::Etsi => "ETSI",
        })
    }
}

/// Message names as they appear in reports.
pub mod messages {
    pub const EE_ECA_CERT_REQUEST: &str = "EeEcaCertRequestSpdu";
    pub const ECA_EE_CERT_RESPONSE: &str = "EcaEeCertResponseSpdu";
    pub const EE_RA_CERT_REQUEST: &str = "EeRaCertRequestSpdu";
    pub const EE_RA_CERT_REQUEST_PLAINTEXT: &str = "EeRaCertRequestSpdu (signed, before encryption)";
    pub const RA_EE_CERT_ACK: &str = "RaEeCertAckSpdu";
    pub const EE_RA_DOWNLOAD_REQUEST: &str = "EeRaDownloadRequestSpdu";
    pub const RA_EE_CERT_INFO: &str = "RaEeCertInfoSpdu";
    pub const ACA_RESPONSE: &str = "AcaResponse";
    pub const RA_EE_CERT_INFO_AND_ACA_RESPONSE: &str = "RaEeCertInfoSpdu + AcaResponse";
    pub const CERT_BATCH_ARCHIVE: &str = "certificate batch archive";
    pub const ENROLMENT_REQUEST: &str = "EnrolmentRequest";
    pub const ENROLMENT_RESPONSE: &str = "EnrolmentResponse";
    pub const AUTHORIZATION_REQUEST: &str = "AuthorizationRequest";
    pub const AUTHORIZATION_RESPONSE: &str = "AuthorizationResponse";
    pub const AUTHORIZATION_VALIDATION_REQUEST: &str = "AuthorizationValidationRequest";
    pub const AUTHORIZATION_VALIDATION_RESPONSE: &str = "AuthorizationValidationResponse";
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("at least {min} timed iterations are required, got {got}", min = timings::MIN_ITERATIONS)]
    TooFewIterations { got: usize },
    #[error("timings are taken without concurrent load; {0} threads requested")]
    ConcurrentLoad(usize),
}

/// `count` extra permissions with 31-byte SSPs for the IEEE end entity only.
/// Used to check that the ordering checks can fail.
pub fn ieee_padding(count: usize) -> Vec<PsidSsp> {
    (0..count).map(|i| PsidSsp::new(0x7000 + i as u32, vec![0xaa; 31])).collect()
}

/// Everything one `check` run measures.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub lengths: Vec<LengthRow>,
    pub timings: Vec<TimingRow>,
    pub signatures: Vec<SignatureCount>,
    pub verdicts: Vec<Verdict>,
}

impl BenchReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }
}

/// Measures lengths, signature counts and (unless `timing` is `None`) timings,
/// then evaluates every check. `strict` tightens the timing checks to
/// non-overlapping p10/p90 bands.
pub fn run_report(
    params: &FlowParams,
    timing: Option<&TimingOptions>,
    strict: bool,
) -> Result<BenchReport, BenchError> {
    let lengths = measure_lengths(params)?;
    let signatures = measure_signature_counts(params)?;
    let timings = match timing {
        Some(options) => measure_timings(params, options)?,
        None => Vec::new(),
    };
    let verdicts = check_orderings(&lengths, &timings, &signatures, strict);
    Ok(BenchReport { lengths, timings, signatures, verdicts })
}
