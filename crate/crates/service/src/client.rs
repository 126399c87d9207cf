//! Blocking frame client plus TCP-backed upstream links.

use std::io;
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use thiserror::Error;
use v2x_core::link::{AcaLink, EaLink, LinkError};

use crate::frame::{kind, read_frame, write_frame, Frame, FrameError};

const IO_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("server closed the connection")]
    Closed,
    #[error("server error: {0}")]
    Remote(String),
    #[error("expected a frame of kind {expected:#04x}, got {actual:#04x}")]
    UnexpectedKind { expected: u8, actual: u8 },
}

pub struct Client {
    stream: TcpStream,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self, ClientError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(IO_TIMEOUT))?;
        stream.set_write_timeout(Some(IO_TIMEOUT))?;
        Ok(Client { stream })
    }

    pub fn send(&mut self, frame: &Frame) -> Result<(), ClientError> {
        Ok(write_frame(&mut self.stream, frame)?)
    }

    pub fn receive(&mut self) -> Result<Frame, ClientError> {
        read_frame(&mut self.stream)?.ok_or(ClientError::Closed)
    }

    /// Sends one request frame and returns the payload of its response.
    pub fn call(&mut self, request_kind: u8, payload: &[u8]) -> Result<Vec<u8>, ClientError> {
        self.send(&Frame::new(request_kind, payload.to_vec()))?;
        let response = self.receive()?;
        if let Some(reason) = response.error_text() {
            return Err(ClientError::Remote(reason));
        }
        let expected = kind::response(request_kind);
        if response.kind != expected {
            return Err(ClientError::UnexpectedKind { expected, actual: response.kind });
        }
        Ok(response.payload)
    }
}

fn link_call(addr: &str, request_kind: u8, payload: &[u8]) -> Result<Vec<u8>, LinkError> {
    let mut client = Client::connect(addr).map_err(|e| LinkError::Transport(e.to_string()))?;
    client.call(request_kind, payload).map_err(|e| match e {
        ClientError::Remote(reason) => LinkError::Rejected(reason),
        other => LinkError::Transport(other.to_string()),
    })
}

/// Reaches an ACA service; one connection per request.
#[derive(Debug, Clone)]
pub struct TcpAcaLink {
    addr: String,
}

impl TcpAcaLink {
    pub fn new(addr: impl Into<String>) -> Self {
        TcpAcaLink { addr: addr.into() }
    }
}

impl AcaLink for TcpAcaLink {
    fn request_certificate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError> {
        link_call(&self.addr, kind::RA_ACA_CERT_REQUEST, request)
    }
}

/// Reaches an EA service for authorization validation.
#[derive(Debug, Clone)]
pub struct TcpEaLink {
    addr: String,
}

impl TcpEaLink {
    pub fn new(addr: impl Into<String>) -> Self {
        TcpEaLink { addr: addr.into() }
    }
}

impl EaLink for TcpEaLink {
    fn validate(&self, request: &[u8]) -> Result<Vec<u8>, LinkError> {
        link_call(&self.addr, kind::AUTHORIZATION_VALIDATION_REQUEST, request)
    }
}
