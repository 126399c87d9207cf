//! Authority-to-authority channels (RA→ACA, AA→EA).
//!
//! Both carry encoded messages so the in-process and TCP transports exchange
//! identical bytes.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("peer rejected the request: {0}")]
    Rejected(String),
}

/// RA side of the RaAcaCertRequest / AcaRaCertResponse exchange.
pub trait AcaLink: Send + Sync {
    fn request_certificate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError>;
}

/// AA side of the AuthorizationValidationRequest / Response exchange.
pub trait EaLink: Send + Sync {
    fn validate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError>;
}
