//! Two-pass graph preprocessing.
//!
//! Pass 1 streams the input once, appending every edge to the source
//! partition of its source interval while counting edges per block. The
//! block table is then classified. Pass 2 re-streams each source partition,
//! moving the edges of dense blocks into their own files and leaving the
//! sparse edges behind; out-degrees are counted on the way. Edges are never
//! sorted, so each output file keeps the relative input order.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use log::info;

use crate::error::{Error, Result};
use crate::partition::{
    beta_for_layout, classify_block, BlockId, BlockInfo, BlockKind, CostParams, Partitioning, VertexId,
};
use crate::storage::io::open_reader;
use crate::storage::{
    save_manifest, EdgeFormat, EdgeReader, EdgeWriter, GraphDir, GraphManifest, IoCounters, IoSnapshot, VertexVector,
    DEFAULT_BUFFER_SIZE, DEGREES, MANIFEST_VERSION,
};

const MIN_WRITER_BUFFER: usize = 4 << 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// One edge per line: `src dst [payload...]`, `#` comments.
    Text,
    /// Packed little-endian records.
    Binary(EdgeFormat),
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub format: InputFormat,
    pub one_based_ids: bool,
    /// Emit `(v, u)` alongside every `(u, v)`.
    pub symmetrize: bool,
    pub drop_self_loops: bool,
    /// Text input only: parse the third column as an `f64` edge weight.
    pub weighted: bool,
    /// Declared |V|; discovered with an extra scan of the input when absent.
    pub v_count: Option<u64>,
    pub buffer_size: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            format: InputFormat::Text,
            one_based_ids: false,
            symmetrize: false,
            drop_self_loops: false,
            weighted: false,
            v_count: None,
            buffer_size: DEFAULT_BUFFER_SIZE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub manifest: GraphManifest,
    /// All bytes moved, including the |V| discovery scan when one was needed.
    pub io: IoSnapshot,
    /// The discovery scan alone (zero when |V| was declared).
    pub discovery_io: IoSnapshot,
    /// Largest buffer footprint (writer buffers, block counters, degree slice).
    pub peak_buffer_bytes: u64,
}

/// Decoded input edge, ids already 0-based.
struct InputEdge<'a> {
    source: VertexId,
    destination: VertexId,
    payload: &'a [u8],
}

/// Streams the raw input, handing each edge to `f` along with its position
/// (line number for text, record index for binary).
fn scan_input(
    input: &Path,
    options: &IngestOptions,
    counters: &IoCounters,
    mut f: impl FnMut(u64, InputEdge<'_>) -> Result<()>,
) -> Result<()> {
    let shift = |id: u64, at: u64| -> Result<u64> {
        if options.one_based_ids {
            id.checked_sub(1).ok_or_else(|| Error::Parse { line: at, message: "vertex id 0 in 1-based input".into() })
        } else {
            Ok(id)
        }
    };
    match options.format {
        InputFormat::Text => {
            let reader = open_reader(input, counters, options.buffer_size)?;
            let mut payload: [u8; 8];
            for (n, line) in reader.lines().enumerate() {
                let line_no = n as u64 + 1;
                let line = line.map_err(|e| Error::io(input, e))?;
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut fields = line.split_whitespace();
                let mut id = |what: &str| -> Result<u64> {
                    let tok = fields
                        .next()
                        .ok_or_else(|| Error::Parse { line: line_no, message: format!("missing {what} id") })?;
                    let raw = tok
                        .parse::<u64>()
                        .map_err(|_| Error::Parse { line: line_no, message: format!("`{tok}` is not a vertex id") })?;
                    shift(raw, line_no)
                };
                let source = id("source")?;
                let destination = id("destination")?;
                let payload: &[u8] = if options.weighted {
                    let tok = fields
                        .next()
                        .ok_or_else(|| Error::Parse { line: line_no, message: "missing edge weight".into() })?;
                    let w: f64 = tok
                        .parse()
                        .map_err(|_| Error::Parse { line: line_no, message: format!("`{tok}` is not a number") })?;
                    payload = w.to_le_bytes();
                    &payload
                } else {
                    &[]
                };
                f(line_no, InputEdge { source, destination, payload })?;
            }
        }
        InputFormat::Binary(format) => {
            let mut reader = EdgeReader::open(input, format, options.buffer_size, counters)?;
            let psi = format.record_bytes();
            let per_chunk = (options.buffer_size / psi).max(1);
            let mut chunk = Vec::new();
            let mut index = 0u64;
            while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
                for rec in chunk.chunks_exact(psi) {
                    index += 1;
                    let source = shift(format.source(rec), index)?;
                    let destination = shift(format.destination(rec), index)?;
                    f(index, InputEdge { source, destination, payload: format.payload(rec) })?;
                }
            }
        }
    }
    Ok(())
}

fn payload_bytes(options: &IngestOptions) -> Result<usize> {
    match options.format {
        InputFormat::Text => Ok(if options.weighted { 8 } else { 0 }),
        InputFormat::Binary(f) => {
            if options.weighted && f.payload_bytes != 8 {
                return Err(Error::Config("weighted binary input needs 8-byte payloads".into()));
            }
            Ok(f.payload_bytes)
        }
    }
}

/// Splits `input` into a graph directory at `out_dir`.
pub fn preprocess(input: &Path, options: &IngestOptions, params: &CostParams, out_dir: &Path) -> Result<Preprocessed> {
    params.validate()?;
    let total = IoCounters::new();
    let discovery = total.child();

    let v_count = match options.v_count {
        Some(v) => v,
        None => {
            let mut max_id: Option<u64> = None;
            scan_input(input, options, &discovery, |_, e| {
                let m = e.source.max(e.destination);
                max_id = Some(max_id.map_or(m, |x| x.max(m)));
                Ok(())
            })?;
            max_id.map_or(1, |m| m + 1)
        }
    };
    if v_count == 0 {
        return Err(Error::Config("declared vertex count must be positive".into()));
    }
    let format = EdgeFormat::new(EdgeFormat::id_bytes_for(v_count), payload_bytes(options)?)?;
    let psi = format.record_bytes() as u64;
    let layout_params = CostParams { psi, ..*params };
    let beta = beta_for_layout(v_count, &layout_params)?;
    let part = Partitioning::new(v_count, beta)?;
    let dir = GraphDir::new(out_dir);
    prepare_dirs(&dir)?;

    let b = beta as usize;
    let writer_buf =
        (params.memory as usize / (2 * b + 2)).clamp(MIN_WRITER_BUFFER, options.buffer_size.max(MIN_WRITER_BUFFER));
    let counts_bytes = (b * b * 8) as u64;
    let mut peak = counts_bytes + (b * writer_buf) as u64 + options.buffer_size as u64;

    // Pass 1: partition by source interval, count blocks.
    let pass1 = total.child();
    let mut counts = vec![0u64; b * b];
    {
        let mut writers = (0..beta)
            .map(|p| EdgeWriter::create(&dir.partition(p), format, writer_buf, &pass1))
            .collect::<Result<Vec<_>>>()?;
        let mut emit = |u: u64, v: u64, payload: &[u8]| -> Result<()> {
            let (p, q) = (part.interval_of_unchecked(u), part.interval_of_unchecked(v));
            counts[p as usize * b + q as usize] += 1;
            writers[p as usize].push(u, v, payload)
        };
        scan_input(input, options, &pass1, |at, e| {
            for id in [e.source, e.destination] {
                if id >= v_count {
                    return Err(Error::Parse { line: at, message: format!("vertex id {id} ≥ |V| = {v_count}") });
                }
            }
            if e.source == e.destination && options.drop_self_loops {
                return Ok(());
            }
            emit(e.source, e.destination, e.payload)?;
            if options.symmetrize && e.source != e.destination {
                emit(e.destination, e.source, e.payload)?;
            }
            Ok(())
        })?;
        for w in writers {
            w.finish()?;
        }
    }
    let e_count: u64 = counts.iter().sum();

    let block_table: Vec<BlockInfo> = counts
        .iter()
        .enumerate()
        .map(|(i, &edge_count)| {
            let (p, q) = ((i / b) as u32, (i % b) as u32);
            let theta = part.interval(p).length;
            BlockInfo {
                block: BlockId { p, q },
                edge_count,
                kind: classify_block(edge_count, theta, params.phi, psi, beta),
            }
        })
        .collect();
    let manifest = GraphManifest {
        version: MANIFEST_VERSION,
        v_count,
        e_count,
        beta,
        id_bytes: format.id_bytes,
        vertex_bytes: params.phi,
        edge_bytes: psi,
        block_table,
    };

    // Pass 2: extract dense blocks, count out-degrees.
    let pass2 = total.child();
    let degree_width = degree_width(v_count);
    let degrees = VertexVector::create(dir.vector(DEGREES), degree_width, v_count, &pass2)?;
    for p in 0..beta {
        let interval = part.interval(p);
        let dense_qs: Vec<u32> = (0..beta).filter(|&q| manifest.block(p, q).kind == BlockKind::Dense).collect();
        let mut degree = vec![0u64; interval.length as usize];
        let row_peak = (interval.length as usize * degree_width) as u64
            + ((dense_qs.len() + 1) * writer_buf) as u64
            + options.buffer_size as u64
            + counts_bytes;
        peak = peak.max(row_peak);

        let sp = dir.partition(p);
        let mut reader = EdgeReader::open(&sp, format, options.buffer_size, &pass2)?;
        let per_chunk = (options.buffer_size / psi as usize).max(1);
        let mut chunk = Vec::new();
        if dense_qs.is_empty() {
            while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
                for rec in chunk.chunks_exact(psi as usize) {
                    degree[(format.source(rec) - interval.start) as usize] += 1;
                }
            }
        } else {
            let tmp = sp.with_extension("edges.tmp");
            let mut sparse = EdgeWriter::create(&tmp, format, writer_buf, &pass2)?;
            let mut dense: Vec<Option<EdgeWriter>> = (0..beta).map(|_| None).collect();
            for &q in &dense_qs {
                dense[q as usize] = Some(EdgeWriter::create(&dir.dense_block(p, q), format, writer_buf, &pass2)?);
            }
            while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
                for rec in chunk.chunks_exact(psi as usize) {
                    degree[(format.source(rec) - interval.start) as usize] += 1;
                    let q = part.interval_of_unchecked(format.destination(rec));
                    match dense[q as usize].as_mut() {
                        Some(w) => w.push_raw(rec)?,
                        None => sparse.push_raw(rec)?,
                    }
                }
            }
            drop(reader);
            sparse.finish()?;
            for w in dense.into_iter().flatten() {
                w.finish()?;
            }
            std::fs::rename(&tmp, &sp).map_err(|e| Error::io(&sp, e))?;
        }
        write_degree_interval(&degrees, &interval, &degree)?;
    }

    save_manifest(&dir.manifest(), &manifest, &total)?;
    let io = total.snapshot();
    info!(
        "preprocessed |V|={} |E|={} beta={} dense_blocks={} bytes_read={} bytes_written={} seeks={}",
        v_count,
        e_count,
        beta,
        manifest.dense_blocks().count(),
        io.bytes_read,
        io.bytes_written,
        io.seeks
    );
    Ok(Preprocessed { manifest, io, discovery_io: discovery.snapshot(), peak_buffer_bytes: peak })
}

fn prepare_dirs(dir: &GraphDir) -> Result<()> {
    for sub in ["partitions", "dense", "spp", "vectors"] {
        let path = dir.root().join(sub);
        if sub == "dense" && path.exists() {
            // Stale dense files from an earlier layout would be misread.
            std::fs::remove_dir_all(&path).map_err(|e| Error::io(&path, e))?;
        }
        std::fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Bytes per out-degree entry.
pub fn degree_width(v_count: u64) -> usize {
    if v_count > 1 << 32 {
        8
    } else {
        4
    }
}

fn write_degree_interval(degrees: &VertexVector, interval: &crate::partition::Interval, counts: &[u64]) -> Result<()> {
    if degrees.width() == 4 {
        let narrow = counts
            .iter()
            .map(|&c| u32::try_from(c).map_err(|_| Error::Overflow(format!("out-degree {c} exceeds 32 bits"))))
            .collect::<Result<Vec<u32>>>()?;
        degrees.write_values(interval, &narrow)
    } else {
        degrees.write_values(interval, counts)
    }
}

/// Recounts out-degrees from the edge files of a preprocessed graph and
/// rewrites `vectors/degrees.vec`.
pub fn compute_out_degrees(graph_dir: &Path, buffer_size: usize, counters: &IoCounters) -> Result<VertexVector> {
    let dir = GraphDir::new(graph_dir);
    let manifest = dir.load_manifest(counters)?;
    let part = manifest.partitioning()?;
    let format = manifest.edge_format()?;
    let psi = format.record_bytes();
    let degrees =
        VertexVector::create(dir.vector(DEGREES), degree_width(manifest.v_count), manifest.v_count, counters)?;
    let per_chunk = (buffer_size / psi).max(1);
    let mut chunk = Vec::new();
    for p in 0..manifest.beta {
        let interval = part.interval(p);
        let mut degree = vec![0u64; interval.length as usize];
        let mut files: Vec<PathBuf> = vec![dir.partition(p)];
        files.extend(
            (0..manifest.beta)
                .filter(|&q| manifest.block(p, q).kind == BlockKind::Dense)
                .map(|q| dir.dense_block(p, q)),
        );
        for file in files {
            let mut reader = EdgeReader::open(&file, format, buffer_size, counters)?;
            while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
                for rec in chunk.chunks_exact(psi) {
                    let u = format.source(rec);
                    if !interval.contains(u) {
                        return Err(Error::Corruption(format!("{}: source {u} outside interval {p}", file.display())));
                    }
                    degree[(u - interval.start) as usize] += 1;
                }
            }
        }
        write_degree_interval(&degrees, &interval, &degree)?;
    }
    Ok(degrees)
}

/// Reads the out-degree vector as `u64`s regardless of on-disk width.
pub fn read_degrees(vec: &VertexVector) -> Result<Vec<u64>> {
    match vec.width() {
        4 => Ok(vec.read_all::<u32>()?.into_iter().map(u64::from).collect()),
        8 => vec.read_all::<u64>(),
        w => Err(Error::Config(format!("degree vector width {w}"))),
    }
}

/// Reads a whole packed edge file into memory; for tests and small tools.
pub fn read_edge_file(path: &Path, format: EdgeFormat) -> Result<Vec<(VertexId, VertexId)>> {
    EdgeReader::open(path, format, DEFAULT_BUFFER_SIZE, &IoCounters::new())?
        .map(|r| r.map(|e| (e.source, e.destination)))
        .collect()
}
