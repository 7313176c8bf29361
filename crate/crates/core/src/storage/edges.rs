//! Packed binary edge files.
//!
//! Each record is `source | destination | payload`, ids little-endian with
//! `id_bytes` (4 or 8) each, followed by a fixed number of payload bytes.
//! Every record in a file has the same size ψ.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::io::{open_reader, open_writer, read_full, CountingReader, CountingWriter, IoCounters};
use crate::error::{Error, Result};
use crate::partition::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFormat {
    pub id_bytes: usize,
    pub payload_bytes: usize,
}

impl EdgeFormat {
    pub fn new(id_bytes: usize, payload_bytes: usize) -> Result<Self> {
        if id_bytes != 4 && id_bytes != 8 {
            return Err(Error::Config(format!("id width must be 4 or 8 bytes, got {id_bytes}")));
        }
        Ok(EdgeFormat { id_bytes, payload_bytes })
    }

    /// 4-byte ids when every id fits in 32 bits, else 8.
    pub fn id_bytes_for(v_count: u64) -> usize {
        if v_count <= 1 << 32 {
            4
        } else {
            8
        }
    }

    /// Record size ψ.
    pub fn record_bytes(&self) -> usize {
        2 * self.id_bytes + self.payload_bytes
    }

    #[inline]
    pub fn read_id(&self, bytes: &[u8]) -> VertexId {
        read_id(bytes, self.id_bytes)
    }

    #[inline]
    pub fn source(&self, record: &[u8]) -> VertexId {
        self.read_id(record)
    }

    #[inline]
    pub fn destination(&self, record: &[u8]) -> VertexId {
        self.read_id(&record[self.id_bytes..])
    }

    #[inline]
    pub fn payload<'a>(&self, record: &'a [u8]) -> &'a [u8] {
        &record[2 * self.id_bytes..self.record_bytes()]
    }

    pub fn encode(&self, source: VertexId, destination: VertexId, payload: &[u8], out: &mut [u8]) {
        debug_assert_eq!(payload.len(), self.payload_bytes);
        write_id(source, self.id_bytes, out);
        write_id(destination, self.id_bytes, &mut out[self.id_bytes..]);
        out[2 * self.id_bytes..self.record_bytes()].copy_from_slice(payload);
    }

    pub fn decode(&self, record: &[u8]) -> EdgeRecord {
        EdgeRecord {
            source: self.source(record),
            destination: self.destination(record),
            payload: self.payload(record).to_vec(),
        }
    }
}

#[inline]
pub(crate) fn read_id(bytes: &[u8], width: usize) -> VertexId {
    if width == 4 {
        u64::from(u32::from_le_bytes(bytes[..4].try_into().unwrap()))
    } else {
        u64::from_le_bytes(bytes[..8].try_into().unwrap())
    }
}

#[inline]
pub(crate) fn write_id(id: VertexId, width: usize, out: &mut [u8]) {
    if width == 4 {
        debug_assert!(id <= u64::from(u32::MAX));
        out[..4].copy_from_slice(&(id as u32).to_le_bytes());
    } else {
        out[..8].copy_from_slice(&id.to_le_bytes());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub source: VertexId,
    pub destination: VertexId,
    pub payload: Vec<u8>,
}

impl EdgeRecord {
    pub fn new(source: VertexId, destination: VertexId) -> Self {
        EdgeRecord { source, destination, payload: Vec::new() }
    }
}

/// Sequential reader over a packed edge file.
pub struct EdgeReader {
    path: PathBuf,
    format: EdgeFormat,
    reader: BufReader<CountingReader<File>>,
    remaining: u64,
}

impl EdgeReader {
    pub fn open(path: &Path, format: EdgeFormat, buffer_size: usize, counters: &IoCounters) -> Result<Self> {
        let size = std::fs::metadata(path).map_err(|e| Error::io(path, e))?.len();
        let psi = format.record_bytes() as u64;
        if size % psi != 0 {
            return Err(Error::format(path, format!("size {size} is not a multiple of the record size {psi}")));
        }
        Ok(EdgeReader {
            path: path.to_path_buf(),
            format,
            reader: open_reader(path, counters, buffer_size)?,
            remaining: size / psi,
        })
    }

    pub fn format(&self) -> EdgeFormat {
        self.format
    }

    /// Records not yet read.
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Fills `buf` with up to `max_records` raw records; returns how many.
    pub fn read_chunk(&mut self, buf: &mut Vec<u8>, max_records: usize) -> Result<usize> {
        let psi = self.format.record_bytes();
        let n = (max_records as u64).min(self.remaining) as usize;
        buf.resize(n * psi, 0);
        let got = read_full(&mut self.reader, buf).map_err(|e| Error::io(&self.path, e))?;
        if got != buf.len() {
            return Err(Error::format(&self.path, "file truncated while reading"));
        }
        self.remaining -= n as u64;
        Ok(n)
    }

    pub fn next_record(&mut self) -> Result<Option<EdgeRecord>> {
        if self.remaining == 0 {
            return Ok(None);
        }
        let mut buf = vec![0u8; self.format.record_bytes()];
        let got = read_full(&mut self.reader, &mut buf).map_err(|e| Error::io(&self.path, e))?;
        if got != buf.len() {
            return Err(Error::format(&self.path, "file truncated while reading"));
        }
        self.remaining -= 1;
        Ok(Some(self.format.decode(&buf)))
    }
}

impl Iterator for EdgeReader {
    type Item = Result<EdgeRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

/// Streams the records of `path` in file order.
pub fn stream_edges(path: &Path, format: EdgeFormat, buffer_size: usize, counters: &IoCounters) -> Result<EdgeReader> {
    EdgeReader::open(path, format, buffer_size, counters)
}

/// Sequential writer producing a packed edge file.
pub struct EdgeWriter {
    path: PathBuf,
    format: EdgeFormat,
    writer: BufWriter<CountingWriter<File>>,
    scratch: Vec<u8>,
    written: u64,
}

impl EdgeWriter {
    pub fn create(path: &Path, format: EdgeFormat, buffer_size: usize, counters: &IoCounters) -> Result<Self> {
        Self::open(path, format, buffer_size, counters, false)
    }

    pub fn append(path: &Path, format: EdgeFormat, buffer_size: usize, counters: &IoCounters) -> Result<Self> {
        Self::open(path, format, buffer_size, counters, true)
    }

    fn open(path: &Path, format: EdgeFormat, buffer_size: usize, counters: &IoCounters, append: bool) -> Result<Self> {
        Ok(EdgeWriter {
            path: path.to_path_buf(),
            format,
            writer: open_writer(path, counters, buffer_size, append)?,
            scratch: vec![0u8; format.record_bytes()],
            written: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn push(&mut self, source: VertexId, destination: VertexId, payload: &[u8]) -> Result<()> {
        if payload.len() != self.format.payload_bytes {
            return Err(Error::Config(format!(
                "payload of {} bytes, format expects {}",
                payload.len(),
                self.format.payload_bytes
            )));
        }
        self.format.encode(source, destination, payload, &mut self.scratch);
        self.writer.write_all(&self.scratch).map_err(|e| Error::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    /// Appends one already-encoded record.
    pub fn push_raw(&mut self, record: &[u8]) -> Result<()> {
        debug_assert_eq!(record.len(), self.format.record_bytes());
        self.writer.write_all(record).map_err(|e| Error::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> Result<u64> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.written)
    }
}

/// Writes `records` as a packed edge file.
pub fn write_edges(path: &Path, format: EdgeFormat, records: &[EdgeRecord], counters: &IoCounters) -> Result<()> {
    let mut w = EdgeWriter::create(path, format, super::io::DEFAULT_BUFFER_SIZE, counters)?;
    for r in records {
        w.push(r.source, r.destination, &r.payload)?;
    }
    w.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fmt4() -> EdgeFormat {
        EdgeFormat::new(4, 0).unwrap()
    }

    #[test]
    fn empty_file_streams_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.edges");
        std::fs::write(&path, []).unwrap();
        let c = IoCounters::new();
        let records: Vec<_> = stream_edges(&path, fmt4(), 64, &c).unwrap().collect::<Result<_>>().unwrap();
        assert!(records.is_empty());
        assert_eq!(c.snapshot().seeks, 1);
    }

    #[test]
    fn write_then_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.edges");
        let c = IoCounters::new();
        write_edges(&path, fmt4(), &[EdgeRecord::new(0, 1), EdgeRecord::new(2, 3)], &c).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), vec![0, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0]);
        let reads = IoCounters::new();
        let records: Vec<_> = stream_edges(&path, fmt4(), 64, &reads).unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(records, vec![EdgeRecord::new(0, 1), EdgeRecord::new(2, 3)]);
        assert_eq!(reads.snapshot().bytes_read, 16);
        assert_eq!(reads.snapshot().seeks, 1);
    }

    #[test]
    fn truncated_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.edges");
        std::fs::write(&path, [0u8; 17]).unwrap();
        assert!(matches!(stream_edges(&path, fmt4(), 64, &IoCounters::new()), Err(Error::Format { .. })));
    }

    #[test]
    fn payload_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.edges");
        let f = EdgeFormat::new(8, 8).unwrap();
        assert_eq!(f.record_bytes(), 24);
        let rec = EdgeRecord { source: 1 << 40, destination: 7, payload: 2.5f64.to_le_bytes().to_vec() };
        write_edges(&path, f, std::slice::from_ref(&rec), &IoCounters::new()).unwrap();
        let back: Vec<_> = stream_edges(&path, f, 8, &IoCounters::new()).unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(back, vec![rec]);
    }

    proptest! {
        #[test]
        fn stream_counts_bytes(edges in proptest::collection::vec((0u64..1000, 0u64..1000), 0..500), buf in 1usize..100) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("e.edges");
            let records: Vec<_> = edges.iter().map(|&(s, d)| EdgeRecord::new(s, d)).collect();
            write_edges(&path, fmt4(), &records, &IoCounters::new()).unwrap();
            let c = IoCounters::new();
            let mut reader = stream_edges(&path, fmt4(), buf, &c).unwrap();
            let mut chunk = Vec::new();
            let mut seen = Vec::new();
            while reader.read_chunk(&mut chunk, 13).unwrap() > 0 {
                for r in chunk.chunks_exact(8) {
                    seen.push(fmt4().decode(r));
                }
            }
            prop_assert_eq!(seen, records);
            prop_assert_eq!(c.snapshot().bytes_read, edges.len() as u64 * 8);
        }
    }
}
