//! The ZIP container the RA hands out on download.

use std::io::{Cursor, Read, Write};

use thiserror::Error;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipArchive, ZipWriter};

pub const INFO_ENTRY: &str = "info.spdu";

pub fn aca_entry_name(index: usize) -> String {
    format!("aca_{index:04}.spdu")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchiveError {
    #[error("not a readable zip archive: {0}")]
    Zip(String),
    #[error("archive has no {0} entry")]
    MissingEntry(String),
    #[error("archive has an unexpected entry {0}")]
    UnexpectedEntry(String),
    #[error("entry {name} is unreadable: {reason}")]
    Entry { name: String, reason: String },
}

/// `info.spdu` plus one `aca_NNNN.spdu` per authorization certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertBatchArchive {
    pub info: Vec<u8>,
    pub aca_responses: Vec<Vec<u8>>,
}

/// Archive contents with per-entry read results.
#[derive(Debug, Clone)]
pub struct ArchiveEntries {
    pub info: Vec<u8>,
    pub aca_responses: Vec<Result<Vec<u8>, ArchiveError>>,
}

impl CertBatchArchive {
    /// Writes stored (uncompressed) entries with a fixed timestamp, so equal
    /// contents always give equal bytes.
    pub fn to_zip(&self) -> Vec<u8> {
        let options = SimpleFileOptions::default()
            .compression_method(CompressionMethod::Stored)
            .last_modified_time(DateTime::default())
            .unix_permissions(0o644);
        let mut writer = ZipWriter::new(Cursor::new(Vec::new()));
        let entries = std::iter::once((INFO_ENTRY.to_string(), &self.info))
            .chain(self.aca_responses.iter().enumerate().map(|(i, r)| (aca_entry_name(i), r)));
        for (name, data) in entries {
            // Writing into a Vec cannot fail, and stored entries have no size limit we approach.
            writer.start_file(name, options).expect("in-memory zip write");
            writer.write_all(data).expect("in-memory zip write");
        }
        writer.finish().expect("in-memory zip write").into_inner()
    }

    /// Reads an archive, failing if any entry is unreadable.
    pub fn from_zip(bytes: &[u8]) -> Result<Self, ArchiveError> {
        let entries = Self::read_entries(bytes)?;
        Ok(CertBatchArchive {
            info: entries.info,
            aca_responses: entries.aca_responses.into_iter().collect::<Result<_, _>>()?,
        })
    }

    /// Reads an archive, reporting unreadable `aca_*` entries individually.
    pub fn read_entries(bytes: &[u8]) -> Result<ArchiveEntries, ArchiveError> {
        let mut zip = ZipArchive::new(Cursor::new(bytes)).map_err(|e| ArchiveError::Zip(e.to_string()))?;
        let names: Vec<String> = zip.file_names().map(str::to_string).collect();
        if !names.iter().any(|n| n == INFO_ENTRY) {
            return Err(ArchiveError::MissingEntry(INFO_ENTRY.into()));
        }
        let count = names.len() - 1;
        let expected: Vec<String> = (0..count).map(aca_entry_name).collect();
        if let Some(extra) = names.iter().find(|n| *n != INFO_ENTRY && !expected.contains(n)) {
            return Err(ArchiveError::UnexpectedEntry(extra.clone()));
        }
        let info = read_entry(&mut zip, INFO_ENTRY)?;
        let aca_responses = expected.iter().map(|name| read_entry(&mut zip, name)).collect();
        Ok(ArchiveEntries { info, aca_responses })
    }
}

fn read_entry(zip: &mut ZipArchive<Cursor<&[u8]>>, name: &str) -> Result<Vec<u8>, ArchiveError> {
    let entry_error = |e: &dyn std::fmt::Display| ArchiveError::Entry { name: name.to_string(), reason: e.to_string() };
    let mut file = zip.by_name(name).map_err(|e| entry_error(&e))?;
    let mut data = Vec::new();
    file.read_to_end(&mut data).map_err(|e| entry_error(&e))?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> CertBatchArchive {
        CertBatchArchive { info: vec![0, 0, 3, 1, 2, 3], aca_responses: (0..n).map(|i| vec![i as u8; 40 + i]).collect() }
    }

    #[test]
    fn round_trip_and_entry_count() {
        let archive = sample(5);
        let bytes = archive.to_zip();
        assert_eq!(CertBatchArchive::from_zip(&bytes).unwrap(), archive);
        let zip = ZipArchive::new(Cursor::new(&bytes[..])).unwrap();
        assert_eq!(zip.len(), 6);
        let names: Vec<_> = zip.file_names().collect();
        assert!(names.contains(&"info.spdu") && names.contains(&"aca_0004.spdu"));
    }

    #[test]
    fn entries_are_stored_in_order() {
        let bytes = sample(3).to_zip();
        let mut zip = ZipArchive::new(Cursor::new(&bytes[..])).unwrap();
        let order: Vec<_> = (0..zip.len()).map(|i| zip.name_for_index(i).unwrap().to_string()).collect();
        assert_eq!(order, ["info.spdu", "aca_0000.spdu", "aca_0001.spdu", "aca_0002.spdu"]);
        for i in 0..zip.len() {
            assert_eq!(zip.by_index(i).unwrap().compression(), CompressionMethod::Stored);
        }
    }

    #[test]
    fn deterministic_bytes() {
        assert_eq!(sample(4).to_zip(), sample(4).to_zip());
    }

    #[test]
    fn empty_batch_holds_only_info() {
        let bytes = sample(0).to_zip();
        let back = CertBatchArchive::from_zip(&bytes).unwrap();
        assert!(back.aca_responses.is_empty());
    }

    #[test]
    fn corrupted_entry_fails_alone() {
        let archive = sample(3);
        let mut bytes = archive.to_zip();
        let target = &archive.aca_responses[1];
        let pos = bytes.windows(target.len()).position(|w| w == &target[..]).unwrap();
        bytes[pos + 5] ^= 0x01;
        let entries = CertBatchArchive::read_entries(&bytes).unwrap();
        assert!(entries.aca_responses[0].is_ok());
        assert!(entries.aca_responses[1].is_err());
        assert!(entries.aca_responses[2].is_ok());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(matches!(CertBatchArchive::read_entries(b"not a zip"), Err(ArchiveError::Zip(_))));
    }
}
