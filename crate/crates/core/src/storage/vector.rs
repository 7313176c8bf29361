//! Disk-resident per-vertex arrays.
//!
//! A vector file is a flat little-endian array: element `i` lives at byte
//! offset `φ·i` and the file is exactly `φ·|V|` bytes long.

use std::fmt::Debug;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::io::IoCounters;
use crate::error::{Error, Result};
use crate::partition::{Interval, VertexId};

const CHUNK_BYTES: usize = 64 << 10;

/// A fixed-width value that can live in a vertex vector.
pub trait VertexValue: Copy + Send + Sync + PartialEq + Debug + 'static {
    const WIDTH: usize;

    fn read_le(bytes: &[u8]) -> Self;
    fn write_le(self, out: &mut [u8]);
}

macro_rules! impl_vertex_value {
    ($($t:ty),*) => {$(
        impl VertexValue for $t {
            const WIDTH: usize = std::mem::size_of::<$t>();

            #[inline]
            fn read_le(bytes: &[u8]) -> Self {
                <$t>::from_le_bytes(bytes[..Self::WIDTH].try_into().unwrap())
            }

            #[inline]
            fn write_le(self, out: &mut [u8]) {
                out[..Self::WIDTH].copy_from_slice(&self.to_le_bytes());
            }
        }
    )*};
}

impl_vertex_value!(u32, u64, f32, f64);

pub fn encode_values<V: VertexValue>(values: &[V]) -> Vec<u8> {
    let mut out = vec![0u8; values.len() * V::WIDTH];
    for (v, chunk) in values.iter().zip(out.chunks_exact_mut(V::WIDTH)) {
        v.write_le(chunk);
    }
    out
}

pub fn decode_values<V: VertexValue>(bytes: &[u8]) -> Vec<V> {
    bytes.chunks_exact(V::WIDTH).map(V::read_le).collect()
}

#[derive(Debug, Clone)]
pub struct VertexVector {
    path: PathBuf,
    width: usize,
    length: u64,
    counters: IoCounters,
}

impl VertexVector {
    /// Creates a zero-filled vector file of `length` elements.
    pub fn create(path: impl Into<PathBuf>, width: usize, length: u64, counters: &IoCounters) -> Result<Self> {
        let path = path.into();
        if width == 0 {
            return Err(Error::Config("vertex vector width must be positive".into()));
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        file.set_len(width as u64 * length).map_err(|e| Error::io(&path, e))?;
        Ok(VertexVector { path, width, length, counters: counters.clone() })
    }

    pub fn open(path: impl Into<PathBuf>, width: usize, counters: &IoCounters) -> Result<Self> {
        let path = path.into();
        if width == 0 {
            return Err(Error::Config("vertex vector width must be positive".into()));
        }
        let size = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?.len();
        if size % width as u64 != 0 {
            return Err(Error::format(&path, format!("size {size} is not a multiple of the element width {width}")));
        }
        Ok(VertexVector { path, width, length: size / width as u64, counters: counters.clone() })
    }

    /// Same file, with I/O charged to different counters.
    pub fn with_counters(&self, counters: &IoCounters) -> Self {
        VertexVector { counters: counters.clone(), ..self.clone() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> u64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn counters(&self) -> &IoCounters {
        &self.counters
    }

    fn check_interval(&self, interval: &Interval) -> Result<()> {
        if interval.end() > self.length {
            return Err(Error::Config(format!(
                "interval [{}, {}) exceeds vector length {}",
                interval.start,
                interval.end(),
                self.length
            )));
        }
        Ok(())
    }

    fn check_width<V: VertexValue>(&self) -> Result<()> {
        if V::WIDTH != self.width {
            return Err(Error::Config(format!(
                "{}: value width {} does not match vector width {}",
                self.path.display(),
                V::WIDTH,
                self.width
            )));
        }
        Ok(())
    }

    fn open_at(&self, interval: &Interval, write: bool) -> Result<File> {
        let mut file =
            OpenOptions::new().read(true).write(write).open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        file.seek(SeekFrom::Start(interval.start * self.width as u64)).map_err(|e| Error::io(&self.path, e))?;
        self.counters.add_seek();
        Ok(file)
    }

    pub fn read_interval(&self, interval: &Interval) -> Result<Vec<u8>> {
        self.check_interval(interval)?;
        let mut buf = vec![0u8; interval.length as usize * self.width];
        if buf.is_empty() {
            return Ok(buf);
        }
        let mut file = self.open_at(interval, false)?;
        file.read_exact(&mut buf).map_err(|e| Error::io(&self.path, e))?;
        self.counters.add_read(buf.len() as u64);
        Ok(buf)
    }

    pub fn write_interval(&self, interval: &Interval, values: &[u8]) -> Result<()> {
        self.check_interval(interval)?;
        let expected = interval.length as usize * self.width;
        if values.len() != expected {
            return Err(Error::Config(format!("buffer of {} bytes for an interval of {expected} bytes", values.len())));
        }
        if values.is_empty() {
            return Ok(());
        }
        let mut file = self.open_at(interval, true)?;
        file.write_all(values).map_err(|e| Error::io(&self.path, e))?;
        self.counters.add_written(values.len() as u64);
        Ok(())
    }

    /// Decodes the interval into `out` through a bounded scratch buffer.
    pub fn read_values<V: VertexValue>(&self, interval: &Interval, out: &mut [V]) -> Result<()> {
        self.check_width::<V>()?;
        self.check_interval(interval)?;
        if out.len() as u64 != interval.length {
            return Err(Error::Config(format!(
                "output slice of {} values for an interval of {}",
                out.len(),
                interval.length
            )));
        }
        if out.is_empty() {
            return Ok(());
        }
        let mut file = self.open_at(interval, false)?;
        let per_chunk = (CHUNK_BYTES / V::WIDTH).max(1);
        let mut scratch = vec![0u8; per_chunk.min(out.len()) * V::WIDTH];
        for dst in out.chunks_mut(per_chunk) {
            let bytes = &mut scratch[..dst.len() * V::WIDTH];
            file.read_exact(bytes).map_err(|e| Error::io(&self.path, e))?;
            self.counters.add_read(bytes.len() as u64);
            for (d, b) in dst.iter_mut().zip(bytes.chunks_exact(V::WIDTH)) {
                *d = V::read_le(b);
            }
        }
        Ok(())
    }

    pub fn write_values<V: VertexValue>(&self, interval: &Interval, values: &[V]) -> Result<()> {
        self.check_width::<V>()?;
        self.check_interval(interval)?;
        if values.len() as u64 != interval.length {
            return Err(Error::Config(format!("{} values for an interval of {}", values.len(), interval.length)));
        }
        if values.is_empty() {
            return Ok(());
        }
        let mut file = self.open_at(interval, true)?;
        let per_chunk = (CHUNK_BYTES / V::WIDTH).max(1);
        let mut scratch = vec![0u8; per_chunk.min(values.len()) * V::WIDTH];
        for src in values.chunks(per_chunk) {
            let bytes = &mut scratch[..src.len() * V::WIDTH];
            for (v, b) in src.iter().zip(bytes.chunks_exact_mut(V::WIDTH)) {
                v.write_le(b);
            }
            file.write_all(bytes).map_err(|e| Error::io(&self.path, e))?;
            self.counters.add_written(bytes.len() as u64);
        }
        Ok(())
    }

    /// Streams the whole vector front to back, chunk by chunk.
    pub fn for_each_chunk<V: VertexValue>(&self, f: impl FnMut(VertexId, &[V]) -> Result<()>) -> Result<()> {
        let all = Interval { index: 0, start: 0, length: self.length };
        self.for_each_chunk_in(&all, f)
    }

    /// Streams `interval` in bounded chunks; `f` receives the id of each
    /// chunk's first vertex.
    pub fn for_each_chunk_in<V: VertexValue>(
        &self,
        interval: &Interval,
        mut f: impl FnMut(VertexId, &[V]) -> Result<()>,
    ) -> Result<()> {
        self.check_width::<V>()?;
        self.check_interval(interval)?;
        if interval.length == 0 {
            return Ok(());
        }
        let mut file = self.open_at(interval, false)?;
        let per_chunk = (CHUNK_BYTES / V::WIDTH).max(1);
        let mut bytes = vec![0u8; per_chunk.min(interval.length as usize) * V::WIDTH];
        let mut values = Vec::with_capacity(per_chunk);
        let mut start = interval.start;
        while start < interval.end() {
            let n = per_chunk.min((interval.end() - start) as usize);
            let b = &mut bytes[..n * V::WIDTH];
            file.read_exact(b).map_err(|e| Error::io(&self.path, e))?;
            self.counters.add_read(b.len() as u64);
            values.clear();
            values.extend(b.chunks_exact(V::WIDTH).map(V::read_le));
            f(start, &values)?;
            start += n as u64;
        }
        Ok(())
    }

    /// Overwrites the whole vector sequentially with `f(v)` for every vertex.
    pub fn fill_with<V: VertexValue>(&self, mut f: impl FnMut(VertexId) -> V) -> Result<()> {
        self.check_width::<V>()?;
        let mut file = OpenOptions::new().write(true).open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        self.counters.add_seek();
        let per_chunk = (CHUNK_BYTES / V::WIDTH).max(1);
        let mut bytes = vec![0u8; per_chunk * V::WIDTH];
        let mut start = 0u64;
        while start < self.length {
            let n = per_chunk.min((self.length - start) as usize);
            let b = &mut bytes[..n * V::WIDTH];
            for (i, slot) in b.chunks_exact_mut(V::WIDTH).enumerate() {
                f(start + i as u64).write_le(slot);
            }
            file.write_all(b).map_err(|e| Error::io(&self.path, e))?;
            self.counters.add_written(b.len() as u64);
            start += n as u64;
        }
        Ok(())
    }

    /// Loads the entire vector; for small graphs, tests and reporting.
    pub fn read_all<V: VertexValue>(&self) -> Result<Vec<V>> {
        let mut out = Vec::with_capacity(self.length as usize);
        self.for_each_chunk::<V>(|_, chunk| {
            out.extend_from_slice(chunk);
            Ok(())
        })?;
        Ok(out)
    }

    /// Creates a vector file holding `values`.
    pub fn from_values<V: VertexValue>(path: impl Into<PathBuf>, values: &[V], counters: &IoCounters) -> Result<Self> {
        let vec = Self::create(path, V::WIDTH, values.len() as u64, counters)?;
        vec.fill_with(|v| values[v as usize])?;
        Ok(vec)
    }
}
