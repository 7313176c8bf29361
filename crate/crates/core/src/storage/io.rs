//! Instrumented file access: every byte moved and every seek is counted.

use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::ops::Sub;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const DEFAULT_BUFFER_SIZE: usize = 4 << 20;

#[derive(Debug, Default)]
struct Counters {
    bytes_read: AtomicU64,
    bytes_written: AtomicU64,
    seeks: AtomicU64,
    parent: Option<IoCounters>,
}

/// Shared, atomically updated I/O counters.
///
/// Counters form a tree: a child created with [`IoCounters::child`] forwards
/// every update to its parent, so a run can keep per-purpose tallies (e.g.
/// destination-vector reads) alongside the overall total.
#[derive(Debug, Clone, Default)]
pub struct IoCounters(Arc<Counters>);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoSnapshot {
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub seeks: u64,
}

impl IoSnapshot {
    pub fn bytes_moved(&self) -> u64 {
        self.bytes_read + self.bytes_written
    }
}

impl Sub for IoSnapshot {
    type Output = IoSnapshot;

    fn sub(self, rhs: IoSnapshot) -> IoSnapshot {
        IoSnapshot {
            bytes_read: self.bytes_read - rhs.bytes_read,
            bytes_written: self.bytes_written - rhs.bytes_written,
            seeks: self.seeks - rhs.seeks,
        }
    }
}

impl IoCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn child(&self) -> Self {
        IoCounters(Arc::new(Counters { parent: Some(self.clone()), ..Counters::default() }))
    }

    pub fn add_read(&self, n: u64) {
        let mut node = Some(self);
        while let Some(c) = node {
            c.0.bytes_read.fetch_add(n, Ordering::Relaxed);
            node = c.0.parent.as_ref();
        }
    }

    pub fn add_written(&self, n: u64) {
        let mut node = Some(self);
        while let Some(c) = node {
            c.0.bytes_written.fetch_add(n, Ordering::Relaxed);
            node = c.0.parent.as_ref();
        }
    }

    pub fn add_seek(&self) {
        let mut node = Some(self);
        while let Some(c) = node {
            c.0.seeks.fetch_add(1, Ordering::Relaxed);
            node = c.0.parent.as_ref();
        }
    }

    pub fn snapshot(&self) -> IoSnapshot {
        IoSnapshot {
            bytes_read: self.0.bytes_read.load(Ordering::Relaxed),
            bytes_written: self.0.bytes_written.load(Ordering::Relaxed),
            seeks: self.0.seeks.load(Ordering::Relaxed),
        }
    }
}

pub struct CountingReader<R> {
    inner: R,
    counters: IoCounters,
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.counters.add_read(n as u64);
        Ok(n)
    }
}

pub struct CountingWriter<W> {
    inner: W,
    counters: IoCounters,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.counters.add_written(n as u64);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Opens `path` for sequential reading; counts one seek.
pub fn open_reader(path: &Path, counters: &IoCounters, buffer_size: usize) -> Result<BufReader<CountingReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    counters.add_seek();
    Ok(BufReader::with_capacity(buffer_size.max(1), CountingReader { inner: file, counters: counters.clone() }))
}

/// Creates (truncating) or appends to `path` for sequential writing; counts one seek.
pub fn open_writer(
    path: &Path,
    counters: &IoCounters,
    buffer_size: usize,
    append: bool,
) -> Result<BufWriter<CountingWriter<File>>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut opts = OpenOptions::new();
    if append {
        opts.create(true).append(true);
    } else {
        opts.create(true).write(true).truncate(true);
    }
    let file = opts.open(path).map_err(|e| Error::io(path, e))?;
    counters.add_seek();
    Ok(BufWriter::with_capacity(buffer_size.max(1), CountingWriter { inner: file, counters: counters.clone() }))
}

/// Reads until `buf` is full or EOF; returns the bytes filled.
pub(crate) fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}
