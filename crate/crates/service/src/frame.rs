//! Length-prefixed frames: `u32` big-endian length (kind byte plus payload),
//! one kind byte, then the payload.

use std::io::{self, Read, Write};

use thiserror::Error;

/// Largest accepted value of the length field.
pub const MAX_FRAME_LEN: u32 = 1 << 20;

/// Frame kinds. A response kind is its request kind with the high bit set.
pub mod kind {
    pub const EE_ECA_CERT_REQUEST: u8 = 0x01;
    pub const EE_RA_CERT_REQUEST: u8 = 0x02;
    pub const EE_RA_DOWNLOAD_REQUEST: u8 = 0x03;
    pub const RA_ACA_CERT_REQUEST: u8 = 0x04;
    pub const ENROLMENT_REQUEST: u8 = 0x11;
    pub const AUTHORIZATION_REQUEST: u8 = 0x12;
    pub const AUTHORIZATION_VALIDATION_REQUEST: u8 = 0x13;
    pub const REGISTER_ITS: u8 = 0x14;
    pub const ERROR: u8 = 0x7f;

    pub const RESPONSE_BIT: u8 = 0x80;

    pub const fn response(request: u8) -> u8 {
        request | RESPONSE_BIT
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: u8, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    /// Error frame carrying a UTF-8 reason.
    pub fn error(reason: impl std::fmt::Display) -> Self {
        Frame { kind: kind::ERROR, payload: reason.to_string().into_bytes() }
    }

    pub fn is_error(&self) -> bool {
        self.kind == kind::ERROR
    }

    pub fn error_text(&self) -> Option<String> {
        self.is_error().then(|| String::from_utf8_lossy(&self.payload).into_owned())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32 + 1).to_be_bytes());
        out.push(self.kind);
        out.extend_from_slice(&self.payload);
        out
    }
}

#[derive(Debug, Error)]
pub enum FrameError {
    /// The declared body was read and discarded, so the stream stays aligned.
    #[error("frame length {0} exceeds the {MAX_FRAME_LEN}-byte cap")]
    Oversized(u32),
    #[error("frame length 0 leaves no room for a kind byte")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl FrameError {
    /// Whether the connection can carry on after this error.
    pub fn is_recoverable(&self) -> bool {
        matches!(self, FrameError::Oversized(_) | FrameError::Empty)
    }
}

pub fn write_frame(w: &mut impl Write, frame: &Frame) -> io::Result<()> {
    if frame.payload.len() >= MAX_FRAME_LEN as usize {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "payload exceeds the frame cap"));
    }
    w.write_all(&frame.to_bytes())?;
    w.flush()
}

/// Reads one frame; `Ok(None)` on a clean end of stream before a frame starts.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Frame>, FrameError> {
    let mut len = [0u8; 4];
    match r.read(&mut len[..1])? {
        0 => return Ok(None),
        _ => r.read_exact(&mut len[1..])?,
    }
    let len = u32::from_be_bytes(len);
    if len == 0 {
        return Err(FrameError::Empty);
    }
    if len > MAX_FRAME_LEN {
        let drained = io::copy(&mut r.take(u64::from(len)), &mut io::sink())?;
        if drained < u64::from(len) {
            return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into());
        }
        return Err(FrameError::Oversized(len));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    let payload = body.split_off(1);
    Ok(Some(Frame { kind: body[0], payload }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn layout_is_length_kind_payload() {
        let f = Frame::new(0x11, vec![0xaa, 0xbb]);
        assert_eq!(f.to_bytes(), [0, 0, 0, 3, 0x11, 0xaa, 0xbb]);
        assert_eq!(read_frame(&mut Cursor::new(f.to_bytes())).unwrap(), Some(f));
    }

    #[test]
    fn clean_eof_and_truncation() {
        assert!(read_frame(&mut Cursor::new(Vec::new())).unwrap().is_none());
        let err = read_frame(&mut Cursor::new(vec![0, 0, 0, 5, 1])).unwrap_err();
        assert!(matches!(err, FrameError::Io(ref e) if e.kind() == io::ErrorKind::UnexpectedEof));
    }

    #[test]
    fn oversized_body_is_drained() {
        let len = MAX_FRAME_LEN + 1;
        let mut bytes = len.to_be_bytes().to_vec();
        bytes.resize(4 + len as usize, 0);
        bytes.extend(Frame::new(0x01, vec![7]).to_bytes());
        let mut cursor = Cursor::new(bytes);
        assert!(matches!(read_frame(&mut cursor), Err(FrameError::Oversized(l)) if l == len));
        assert_eq!(read_frame(&mut cursor).unwrap(), Some(Frame::new(0x01, vec![7])));
    }

    #[test]
    fn largest_frame_is_accepted() {
        let f = Frame::new(0x02, vec![1; MAX_FRAME_LEN as usize - 1]);
        assert_eq!(read_frame(&mut Cursor::new(f.to_bytes())).unwrap(), Some(f));
        let too_big = Frame::new(0x02, vec![1; MAX_FRAME_LEN as usize]);
        assert!(write_frame(&mut Vec::new(), &too_big).is_err());
    }

    #[test]
    fn empty_frame_rejected() {
        assert!(matches!(read_frame(&mut Cursor::new(vec![0, 0, 0, 0])), Err(FrameError::Empty)));
    }

    #[test]
    fn response_kinds_set_the_high_bit() {
        assert_eq!(kind::response(kind::ENROLMENT_REQUEST), 0x91);
        assert_eq!(kind::response(kind::RA_ACA_CERT_REQUEST), 0x84);
    }
}
