//! Binary codec for time-tag streams (`.qttg`).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! header, 40 bytes:
//!   0..8    magic "QEOSTTG1"
//!   8..12   format version (u32, currently 1)
//!   12..16  reserved (u32, must be 0)
//!   16..24  record count (u64)
//!   24..32  repetition rate in Hz (u64)
//!   32..40  modulation frequency in Hz (u64)
//! record, 16 bytes each:
//!   0..8    timestamp in ps (u64)
//!   8       channel (0 = detector 1, 1 = detector 2, 2 = marker)
//!   9..16   padding (must be 0)
//! ```
//!
//! Parsing is strict: a wrong magic, an unknown version, a nonzero reserved
//! field, an unassigned channel byte, nonzero padding, a timestamp that runs
//! backwards, or a truncated record all fail with the byte offset of the
//! offending data. The parser reads the source in fixed-size chunks and
//! never consumes bytes beyond the declared record count, so a stream can be
//! followed by unrelated data.

use std::io::Read;

use thiserror::Error;

use super::{Channel, TimeTagRecord};

/// File magic of a time-tag stream.
pub const MAGIC: [u8; 8] = *b"QEOSTTG1";
/// Current (and only) format version.
pub const FORMAT_VERSION: u32 = 1;
/// Encoded header size in bytes.
pub const HEADER_LEN: usize = 40;
/// Encoded record size in bytes.
pub const RECORD_LEN: usize = 16;

/// Read chunk size of the streaming parser.
const CHUNK_LEN: usize = 64 * 1024;

/// Errors from encoding or parsing a time-tag stream.
#[derive(Debug, Error)]
pub enum StreamError {
    #[error("bad magic at offset 0: not a time-tag stream")]
    BadMagic,
    #[error("unsupported format version {found} at offset 8 (supported: {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("nonzero reserved field at offset 12")]
    NonzeroReserved,
    #[error("truncated header: got {got} of {HEADER_LEN} bytes")]
    TruncatedHeader { got: usize },
    #[error("truncated record at offset {offset}: got {got} of {RECORD_LEN} bytes")]
    TruncatedRecord { offset: u64, got: usize },
    #[error("unassigned channel byte {channel:#04x} at offset {offset}")]
    InvalidChannel { channel: u8, offset: u64 },
    #[error("nonzero record padding at offset {offset}")]
    NonzeroPadding { offset: u64 },
    #[error("timestamp runs backwards at offset {offset}: {current} ps after {previous} ps")]
    TimestampRegression {
        offset: u64,
        previous: u64,
        current: u64,
    },
    #[error("header declares {header} records but {actual} were provided")]
    RecordCountMismatch { header: u64, actual: u64 },
    #[error("stream I/O failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Decoded stream header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u32,
    pub record_count: u64,
    pub rep_rate_hz: u64,
    pub f_mod_hz: u64,
}

impl StreamHeader {
    pub fn new(record_count: u64, rep_rate_hz: u64, f_mod_hz: u64) -> Self {
        Self {
            version: FORMAT_VERSION,
            record_count,
            rep_rate_hz,
            f_mod_hz,
        }
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..8].copy_from_slice(&MAGIC);
        out[8..12].copy_from_slice(&self.version.to_le_bytes());
        // bytes 12..16 stay zero (reserved)
        out[16..24].copy_from_slice(&self.record_count.to_le_bytes());
        out[24..32].copy_from_slice(&self.rep_rate_hz.to_le_bytes());
        out[32..40].copy_from_slice(&self.f_mod_hz.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8; HEADER_LEN]) -> Result<Self, StreamError> {
        if bytes[0..8] != MAGIC {
            return Err(StreamError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(StreamError::UnsupportedVersion { found: version });
        }
        if bytes[12..16] != [0u8; 4] {
            return Err(StreamError::NonzeroReserved);
        }
        Ok(Self {
            version,
            record_count: u64::from_le_bytes(bytes[16..24].try_into().unwrap()),
            rep_rate_hz: u64::from_le_bytes(bytes[24..32].try_into().unwrap()),
            f_mod_hz: u64::from_le_bytes(bytes[32..40].try_into().unwrap()),
        })
    }
}

/// Encodes a header and its records into one byte buffer.
///
/// Fails when the header's record count disagrees with `records.len()` or
/// when timestamps are not non-decreasing.
pub fn encode_stream(
    header: &StreamHeader,
    records: &[TimeTagRecord],
) -> Result<Vec<u8>, StreamError> {
    if header.record_count != records.len() as u64 {
        return Err(StreamError::RecordCountMismatch {
            header: header.record_count,
            actual: records.len() as u64,
        });
    }
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * records.len());
    out.extend_from_slice(&header.encode());
    let mut previous = 0u64;
    for (index, record) in records.iter().enumerate() {
        if record.timestamp_ps < previous {
            return Err(StreamError::TimestampRegression {
                offset: (HEADER_LEN + RECORD_LEN * index) as u64,
                previous,
                current: record.timestamp_ps,
            });
        }
        previous = record.timestamp_ps;
        out.extend_from_slice(&record.timestamp_ps.to_le_bytes());
        out.push(record.channel.to_byte());
        out.extend_from_slice(&[0u8; 7]);
    }
    Ok(out)
}

/// Streaming record reader returned by [`parse_stream`].
///
/// Yields records in stream order and stops at the first malformed record;
/// after an error the iterator is fused. Memory use is bounded by the fixed
/// internal chunk size regardless of stream length.
pub struct StreamParser<R: Read> {
    source: R,
    header: StreamHeader,
    buf: Vec<u8>,
    /// Valid bytes in `buf` not yet parsed.
    filled: usize,
    /// Parse position within `buf`.
    pos: usize,
    /// Records yielded so far.
    parsed: u64,
    /// Absolute byte offset of the next unparsed byte.
    offset: u64,
    previous_timestamp: u64,
    failed: bool,
}

impl<R: Read> StreamParser<R> {
    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Bytes of record payload still expected from the source.
    fn remaining_bytes(&self) -> u64 {
        (self.header.record_count - self.parsed) * RECORD_LEN as u64
            - (self.filled - self.pos) as u64
    }

    /// Ensures a full record is buffered; returns the available byte count.
    fn refill(&mut self) -> Result<usize, StreamError> {
        if self.filled - self.pos >= RECORD_LEN {
            return Ok(RECORD_LEN);
        }
        self.buf.copy_within(self.pos..self.filled, 0);
        self.filled -= self.pos;
        self.pos = 0;
        while self.filled < RECORD_LEN {
            let want = (self.buf.len() - self.filled).min(self.remaining_bytes() as usize);
            if want == 0 {
                break;
            }
            let got = self
                .source
                .read(&mut self.buf[self.filled..self.filled + want])?;
            if got == 0 {
                break;
            }
            self.filled += got;
        }
        Ok(self.filled)
    }

    fn parse_one(&mut self) -> Result<TimeTagRecord, StreamError> {
        let available = self.refill()?;
        if available < RECORD_LEN {
            return Err(StreamError::TruncatedRecord {
                offset: self.offset,
                got: available,
            });
        }
        let record = &self.buf[self.pos..self.pos + RECORD_LEN];
        let timestamp_ps = u64::from_le_bytes(record[0..8].try_into().unwrap());
        let channel = Channel::from_byte(record[8]).ok_or(StreamError::InvalidChannel {
            channel: record[8],
            offset: self.offset + 8,
        })?;
        if let Some(bad) = record[9..16].iter().position(|&b| b != 0) {
            return Err(StreamError::NonzeroPadding {
                offset: self.offset + 9 + bad as u64,
            });
        }
        if timestamp_ps < self.previous_timestamp {
            return Err(StreamError::TimestampRegression {
                offset: self.offset,
                previous: self.previous_timestamp,
                current: timestamp_ps,
            });
        }
        self.previous_timestamp = timestamp_ps;
        self.pos += RECORD_LEN;
        self.offset += RECORD_LEN as u64;
        self.parsed += 1;
        Ok(TimeTagRecord {
            timestamp_ps,
            channel,
        })
    }
}

impl<R: Read> Iterator for StreamParser<R> {
    type Item = Result<TimeTagRecord, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.parsed == self.header.record_count {
            return None;
        }
        match self.parse_one() {
            Ok(record) => Some(Ok(record)),
            Err(err) => {
                self.failed = true;
                Some(Err(err))
            }
        }
    }
}

/// Validates the header of a stream and returns a streaming record parser.
pub fn parse_stream<R: Read>(mut source: R) -> Result<StreamParser<R>, StreamError> {
    let mut header_bytes = [0u8; HEADER_LEN];
    let mut got = 0usize;
    while got < HEADER_LEN {
        let n = source.read(&mut header_bytes[got..])?;
        if n == 0 {
            return Err(StreamError::TruncatedHeader { got });
        }
        got += n;
    }
    let header = StreamHeader::decode(&header_bytes)?;
    Ok(StreamParser {
        source,
        header,
        buf: vec![0u8; CHUNK_LEN],
        filled: 0,
        pos: 0,
        parsed: 0,
        offset: HEADER_LEN as u64,
        previous_timestamp: 0,
        failed: false,
    })
}

/// Parses a complete in-memory stream into its header and records.
pub fn decode_stream(bytes: &[u8]) -> Result<(StreamHeader, Vec<TimeTagRecord>), StreamError> {
    let parser = parse_stream(bytes)?;
    let header = *parser.header();
    let records = parser.collect::<Result<Vec<_>, _>>()?;
    Ok((header, records))
}
