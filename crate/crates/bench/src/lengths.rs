//! Encoded message lengths from one deterministic run of each flow.

use v2x_core::scms::CertBatchArchive;
use v2x_core::transcript::{run_etsi, run_ieee, FlowError, FlowParams};

use crate::{messages as m, Standard};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthRow {
    pub message: &'static str,
    pub standard: Standard,
    pub measured_bytes: usize,
    /// Length reported in the comparison table; `None` for messages the table
    /// does not list.
    pub paper_bytes: Option<u32>,
}

impl LengthRow {
    fn new(message: &'static str, standard: Standard, measured_bytes: usize, paper_bytes: Option<u32>) -> Self {
        debug_assert!(measured_bytes > 0, "{message} measured as empty");
        LengthRow { message, standard, measured_bytes, paper_bytes }
    }

    /// Whether the row is one of the compared messages.
    pub fn in_table(&self) -> bool {
        self.paper_bytes.is_some()
    }
}

/// Runs both flows once. With `cert_count = 0` the flows run with a single
/// certificate (the RA refuses empty requests), the AcaResponse row is
/// dropped, and the archive row measures an archive holding only the info
/// entry.
pub fn measure_lengths(params: &FlowParams) -> Result<Vec<LengthRow>, FlowError> {
    let effective = FlowParams { cert_count: params.cert_count.max(1), ..params.clone() };
    let ieee = run_ieee(&effective)?;
    let etsi = run_etsi(&effective)?;
    let archive_len = if params.cert_count == 0 {
        CertBatchArchive { info: ieee.ra_ee_cert_info.clone(), aca_responses: Vec::new() }.to_zip().len()
    } else {
        ieee.cert_batch_archive.len()
    };

    use Standard::{Etsi, Ieee};
    let mut rows = vec![
        LengthRow::new(m::EE_ECA_CERT_REQUEST, Ieee, ieee.ee_eca_cert_request.len(), Some(151)),
        LengthRow::new(m::ECA_EE_CERT_RESPONSE, Ieee, ieee.eca_ee_cert_response.len(), Some(957)),
        LengthRow::new(m::EE_RA_CERT_REQUEST, Ieee, ieee.ee_ra_cert_request.len(), Some(369)),
        LengthRow::new(m::RA_EE_CERT_INFO, Ieee, ieee.ra_ee_cert_info.len(), Some(26)),
    ];
    if params.cert_count > 0 {
        rows.push(LengthRow::new(m::ACA_RESPONSE, Ieee, ieee.aca_responses[0].len(), Some(464)));
    }
    rows.extend([
        LengthRow::new(m::EE_RA_CERT_REQUEST_PLAINTEXT, Ieee, ieee.ee_ra_cert_request_plaintext.len(), None),
        LengthRow::new(m::RA_EE_CERT_ACK, Ieee, ieee.ra_ee_cert_ack.len(), None),
        LengthRow::new(m::EE_RA_DOWNLOAD_REQUEST, Ieee, ieee.ee_ra_download_request.len(), None),
        LengthRow::new(m::CERT_BATCH_ARCHIVE, Ieee, archive_len, None),
        LengthRow::new(m::ENROLMENT_REQUEST, Etsi, etsi.enrolment_request.len(), Some(424)),
        LengthRow::new(m::ENROLMENT_RESPONSE, Etsi, etsi.enrolment_response.len(), Some(562)),
        LengthRow::new(m::AUTHORIZATION_REQUEST, Etsi, etsi.authorization_request.len(), Some(590)),
        LengthRow::new(m::AUTHORIZATION_RESPONSE, Etsi, etsi.authorization_response.len(), Some(627)),
        LengthRow::new(
            m::AUTHORIZATION_VALIDATION_REQUEST,
            Etsi,
            etsi.authorization_validation_request.len(),
            None,
        ),
        LengthRow::new(
            m::AUTHORIZATION_VALIDATION_RESPONSE,
            Etsi,
            etsi.authorization_validation_response.len(),
            None,
        ),
    ]);
    Ok(rows)
}

pub fn find<'a>(rows: &'a [LengthRow], message: &str) -> Option<&'a LengthRow> {
    rows.iter().find(|r| r.message == message)
}
