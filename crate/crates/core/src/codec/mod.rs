//! Deterministic binary encoding for envelopes, certificates and flow messages.
//!
//! Layout rules: integers are big-endian and fixed width, byte strings carry
//! a `u16` length prefix, lists a `u8` element count, and enum variants a
//! single tag byte. Fixed-size values (keys, signatures, digests) are written
//! without a prefix.

mod envelope;

use thiserror::Error;

use crate::crypto::{EciesEncap, HashedId8, PublicKey, Signature, ECIES_ENCAP_LEN, PUBLIC_KEY_LEN, SIGNATURE_LEN};
use crate::time::{Duration, Time64, Validity};

pub use envelope::{
    EncryptedData, Envelope, EnvelopeError, HeaderInfo, RecipientInfo, SignedData, SignerIdentifier, ToBeSignedData,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeErrorKind {
    #[error("input ends early; {needed} more byte(s) needed")]
    Truncated { needed: usize },
    #[error("{0} trailing byte(s) after the value")]
    TrailingBytes(usize),
    #[error("unknown tag {0:#04x}")]
    UnknownTag(u8),
    #[error("invalid public key")]
    InvalidPublicKey,
    #[error("length {actual} exceeds the maximum of {max}")]
    TooLong { max: usize, actual: usize },
    #[error("{0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("decode error at byte {offset}: {kind}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

#[derive(Debug, Default, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    /// Fixed-size field, no length prefix.
    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    /// `u16` length prefix followed by the bytes.
    ///
    /// # Panics
    ///
    /// If `bytes` is longer than `u16::MAX`; no wire structure admits that.
    pub fn var_bytes(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u16::try_from(bytes.len()).expect("byte string exceeds the u16 length prefix");
        self.u16(len);
        self.raw(bytes)
    }

    /// `u8` count followed by the elements.
    ///
    /// # Panics
    ///
    /// If there are more than 255 elements.
    pub fn list<T: Encode>(&mut self, items: &[T]) -> &mut Self {
        let count = u8::try_from(items.len()).expect("list exceeds the u8 element count");
        self.u8(count);
        for item in items {
            item.encode_to(self);
        }
        self
    }

    pub fn put<T: Encode + ?Sized>(&mut self, value: &T) -> &mut Self {
        value.encode_to(self);
        self
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn error(&self, kind: DecodeErrorKind) -> DecodeError {
        DecodeError { offset: self.pos, kind }
    }

    pub fn error_at(offset: usize, kind: DecodeErrorKind) -> DecodeError {
        DecodeError { offset, kind }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(self.error(DecodeErrorKind::Truncated { needed: n - self.remaining() }));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        Ok(self.take(N)?.try_into().expect("took exactly N bytes"))
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.array()?))
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.array()?))
    }

    pub fn var_bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        let len = self.u16()? as usize;
        Ok(self.take(len)?.to_vec())
    }

    /// Length-prefixed byte string no longer than `max`.
    pub fn var_bytes_max(&mut self, max: usize) -> Result<Vec<u8>, DecodeError> {
        let start = self.pos;
        let len = self.u16()? as usize;
        if len > max {
            return Err(Reader::error_at(start, DecodeErrorKind::TooLong { max, actual: len }));
        }
        Ok(self.take(len)?.to_vec())
    }

    pub fn list<T: Decode>(&mut self) -> Result<Vec<T>, DecodeError> {
        let count = self.u8()?;
        (0..count).map(|_| T::decode_from(self)).collect()
    }

    pub fn get<T: Decode>(&mut self) -> Result<T, DecodeError> {
        T::decode_from(self)
    }

    /// Reads a tag byte; the returned offset locates it for error reporting.
    pub fn tag(&mut self) -> Result<(u8, usize), DecodeError> {
        let at = self.pos;
        Ok((self.u8()?, at))
    }
}

pub trait Encode {
    fn encode_to(&self, w: &mut Writer);

    fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode_to(&mut w);
        w.into_bytes()
    }
}

pub trait Decode: Sized {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError>;
}

pub fn encode<T: Encode + ?Sized>(value: &T) -> Vec<u8> {
    value.encode()
}

/// Decodes exactly one `T`, rejecting trailing bytes.
pub fn decode<T: Decode>(bytes: &[u8]) -> Result<T, DecodeError> {
    let mut r = Reader::new(bytes);
    let value = T::decode_from(&mut r)?;
    if r.remaining() != 0 {
        return Err(r.error(DecodeErrorKind::TrailingBytes(r.remaining())));
    }
    Ok(value)
}

pub(crate) fn unknown_tag(tag: u8, at: usize) -> DecodeError {
    Reader::error_at(at, DecodeErrorKind::UnknownTag(tag))
}

impl<T: Encode> Encode for Option<T> {
    fn encode_to(&self, w: &mut Writer) {
        match self {
            None => {
                w.u8(0);
            }
            Some(v) => {
                w.u8(1).put(v);
            }
        }
    }
}

impl<T: Decode> Decode for Option<T> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.tag()? {
            (0, _) => Ok(None),
            (1, _) => Ok(Some(T::decode_from(r)?)),
            (t, at) => Err(unknown_tag(t, at)),
        }
    }
}

impl<T: Encode + ?Sized> Encode for Box<T> {
    fn encode_to(&self, w: &mut Writer) {
        (**self).encode_to(w)
    }
}

impl<T: Decode> Decode for Box<T> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        T::decode_from(r).map(Box::new)
    }
}

impl Encode for PublicKey {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.to_compressed());
    }
}

impl Decode for PublicKey {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.offset();
        let bytes: [u8; PUBLIC_KEY_LEN] = r.array()?;
        PublicKey::from_compressed(&bytes).map_err(|_| Reader::error_at(at, DecodeErrorKind::InvalidPublicKey))
    }
}

impl Encode for Signature {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.to_bytes());
    }
}

impl Decode for Signature {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Signature::from_bytes(&r.array::<SIGNATURE_LEN>()?))
    }
}

impl Encode for HashedId8 {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.0);
    }
}

impl Decode for HashedId8 {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(HashedId8(r.array()?))
    }
}

impl Encode for EciesEncap {
    fn encode_to(&self, w: &mut Writer) {
        w.raw(&self.to_bytes());
    }
}

impl Decode for EciesEncap {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let at = r.offset();
        let bytes: [u8; ECIES_ENCAP_LEN] = r.array()?;
        EciesEncap::from_bytes(&bytes).map_err(|_| Reader::error_at(at, DecodeErrorKind::InvalidPublicKey))
    }
}

impl Encode for Time64 {
    fn encode_to(&self, w: &mut Writer) {
        w.u64(self.0);
    }
}

impl Decode for Time64 {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Time64(r.u64()?))
    }
}

impl Encode for Duration {
    fn encode_to(&self, w: &mut Writer) {
        w.u32(self.0);
    }
}

impl Decode for Duration {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(Duration(r.u32()?))
    }
}

impl Encode for Validity {
    fn encode_to(&self, w: &mut Writer) {
        w.put(&self.start).put(&self.duration);
    }
}

impl Decode for Validity {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let start = r.get()?;
        let at = r.offset();
        let duration: Duration = r.get()?;
        if duration.0 == 0 {
            return Err(Reader::error_at(at, DecodeErrorKind::Invalid("validity duration must be positive")));
        }
        Ok(Validity { start, duration })
    }
}
