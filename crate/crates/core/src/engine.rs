//! Bimodal block execution.
//!
//! One pass over the graph:
//!
//! 1. Every source partition with sparse edges is *shuffled*: its edges are
//!    streamed against the source view of `I(p)` and `(destination, value)`
//!    records are appended to one bucket file per destination interval.
//! 2. For each destination interval `I(q)`: its previous values are loaded and
//!    seeded into thread 0's accumulator, bucket `q` is streamed, then the
//!    dense blocks of column `q` are streamed in zigzag source order (even
//!    columns ascending, odd columns descending, so consecutive columns share
//!    the source interval at the turn). Thread buffers are gathered, applied
//!    and written to the next vector.
//!
//! Vectors are double-buffered: reads come from the previous pass's vector,
//! writes go to the next one.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{debug, info};

use crate::error::{Error, Result};
use crate::memory::MemoryTracker;
use crate::partition::{BlockId, BlockKind, Interval, Partitioning, VertexId};
use crate::program::MAlgorithm;
use crate::storage::edges::write_id;
use crate::storage::io::open_writer;
use crate::storage::{
    EdgeFormat, EdgeReader, EdgeWriter, GraphDir, GraphManifest, IoCounters, IoSnapshot, VertexValue, VertexVector,
    DEFAULT_BUFFER_SIZE, DEGREES,
};

const MIN_BUCKET_BUFFER: usize = 4 << 10;

/// Which processing scheme blocks get.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForceMode {
    /// Per-block choice recorded in the manifest.
    #[default]
    Bbp,
    /// Every non-empty block is processed densely.
    Dense,
    /// Every non-empty block goes through the shuffle.
    Sparse,
}

impl FromStr for ForceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bbp" => Ok(ForceMode::Bbp),
            "dense" => Ok(ForceMode::Dense),
            "sparse" => Ok(ForceMode::Sparse),
            _ => Err(Error::Config(format!("unknown mode `{s}` (expected dense, sparse or bbp)"))),
        }
    }
}

impl fmt::Display for ForceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ForceMode::Bbp => "bbp",
            ForceMode::Dense => "dense",
            ForceMode::Sparse => "sparse",
        })
    }
}

/// Where a dense step's edges come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseSource {
    /// `dense/b_<p>_<q>.edges`.
    BlockFile,
    /// `partitions/sp_<p>.edges`, keeping only edges into `I(q)` (forced dense mode).
    FilteredPartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseStep {
    pub block: BlockId,
    pub edges: u64,
    pub source: DenseSource,
}

/// Inputs of the shuffle for one source partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShuffleSource {
    Partition,
    DenseBlock(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionPlan {
    pub beta: u32,
    /// Dense steps of each column, in zigzag order.
    pub columns: Vec<Vec<DenseStep>>,
    /// Shuffle inputs of each source partition.
    pub shuffle: Vec<Vec<ShuffleSource>>,
    /// Whether bucket `q` receives any records.
    pub has_bucket: Vec<bool>,
}

impl ExecutionPlan {
    /// Source order for column `q` (0-based): ascending for even `q`,
    /// descending for odd `q`.
    pub fn zigzag_order(beta: u32, q: u32) -> Vec<u32> {
        if q.is_multiple_of(2) {
            (0..beta).collect()
        } else {
            (0..beta).rev().collect()
        }
    }

    pub fn new(manifest: &GraphManifest, mode: ForceMode) -> Self {
        let beta = manifest.beta;
        let processed_dense = |kind: BlockKind, edges: u64| match mode {
            ForceMode::Bbp => kind == BlockKind::Dense,
            ForceMode::Dense => kind == BlockKind::Dense || edges > 0,
            ForceMode::Sparse => false,
        };
        let columns = (0..beta)
            .map(|q| {
                Self::zigzag_order(beta, q)
                    .into_iter()
                    .filter_map(|p| {
                        let b = manifest.block(p, q);
                        processed_dense(b.kind, b.edge_count).then_some(DenseStep {
                            block: b.block,
                            edges: b.edge_count,
                            source: match b.kind {
                                BlockKind::Dense => DenseSource::BlockFile,
                                BlockKind::Sparse => DenseSource::FilteredPartition,
                            },
                        })
                    })
                    .collect()
            })
            .collect();
        let shuffle = (0..beta)
            .map(|p| {
                let mut inputs = Vec::new();
                if mode != ForceMode::Dense && manifest.row_edges(p, BlockKind::Sparse) > 0 {
                    inputs.push(ShuffleSource::Partition);
                }
                if mode == ForceMode::Sparse {
                    inputs.extend(
                        (0..beta)
                            .filter(|&q| {
                                let b = manifest.block(p, q);
                                b.kind == BlockKind::Dense && b.edge_count > 0
                            })
                            .map(ShuffleSource::DenseBlock),
                    );
                }
                inputs
            })
            .collect();
        let has_bucket = (0..beta)
            .map(|q| {
                (0..beta).any(|p| {
                    let b = manifest.block(p, q);
                    b.edge_count > 0
                        && match mode {
                            ForceMode::Bbp => b.kind == BlockKind::Sparse,
                            ForceMode::Dense => false,
                            ForceMode::Sparse => true,
                        }
                })
            })
            .collect();
        ExecutionPlan { beta, columns, shuffle, has_bucket }
    }

    pub fn dense_steps(&self) -> impl Iterator<Item = &DenseStep> {
        self.columns.iter().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub threads: usize,
    pub memory: u64,
    pub buffer_size: usize,
    pub mode: ForceMode,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { threads: 1, memory: 1 << 30, buffer_size: DEFAULT_BUFFER_SIZE, mode: ForceMode::Bbp }
    }
}

/// Per-purpose I/O tallies; all roll up into `total`.
#[derive(Debug, Clone)]
pub struct EngineIo {
    pub total: IoCounters,
    /// Vector initialization and the final rename bookkeeping.
    pub setup: IoCounters,
    /// Source-interval loads (values and degrees).
    pub source: IoCounters,
    /// Destination-interval loads.
    pub destination: IoCounters,
    pub vector_writes: IoCounters,
    pub edges: IoCounters,
    pub buckets: IoCounters,
    /// Re-reads used only to count changed vertices.
    pub convergence: IoCounters,
}

impl EngineIo {
    fn new() -> Self {
        let total = IoCounters::new();
        EngineIo {
            setup: total.child(),
            source: total.child(),
            destination: total.child(),
            vector_writes: total.child(),
            edges: total.child(),
            buckets: total.child(),
            convergence: total.child(),
            total,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Passes to run (an upper bound when `until_stable`).
    pub iterations: usize,
    /// Stop after the first pass that changes no vertex value.
    pub until_stable: bool,
    /// Result lands in `vectors/<output>.vec`.
    pub output: String,
    /// Start from this vector instead of the program's initial values.
    pub initial: Option<PathBuf>,
}

impl RunOptions {
    pub fn iterations(n: usize, output: &str) -> Self {
        RunOptions { iterations: n, until_stable: false, output: output.to_string(), initial: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassStats {
    pub iteration: usize,
    /// Vertices whose value changed (tracked only with `until_stable`).
    pub changed: Option<u64>,
    pub io: IoSnapshot,
    pub source: IoSnapshot,
    pub destination: IoSnapshot,
    pub edges: IoSnapshot,
    pub buckets: IoSnapshot,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub result: VertexVector,
    pub passes: Vec<PassStats>,
    pub converged: bool,
    /// Peak bytes of vertex buffers (source view plus thread accumulators).
    pub peak_vertex_bytes: u64,
    pub io: IoSnapshot,
}

pub struct Engine {
    dir: GraphDir,
    manifest: GraphManifest,
    part: Partitioning,
    format: EdgeFormat,
    config: EngineConfig,
    io: EngineIo,
    memory: MemoryTracker,
}

impl Engine {
    pub fn open(graph_dir: &Path, config: EngineConfig) -> Result<Self> {
        if config.threads == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        let io = EngineIo::new();
        let dir = GraphDir::new(graph_dir);
        let manifest = dir.load_manifest(&io.setup)?;
        Ok(Engine {
            part: manifest.partitioning()?,
            format: manifest.edge_format()?,
            dir,
            manifest,
            config,
            io,
            memory: MemoryTracker::new(),
        })
    }

    pub fn manifest(&self) -> &GraphManifest {
        &self.manifest
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn io(&self) -> &EngineIo {
        &self.io
    }

    pub fn memory(&self) -> &MemoryTracker {
        &self.memory
    }

    pub fn graph_dir(&self) -> &GraphDir {
        &self.dir
    }

    pub fn plan(&self) -> ExecutionPlan {
        ExecutionPlan::new(&self.manifest, self.config.mode)
    }

    /// Bytes of the `T + 1` interval-sized vertex buffers a run allocates.
    pub fn vertex_buffer_bytes(&self) -> u64 {
        (self.config.threads as u64 + 1) * self.part.width() * self.manifest.vertex_bytes
    }

    fn check<P: MAlgorithm>(&self, program: &P, plan: &ExecutionPlan) -> Result<()> {
        if P::Value::WIDTH as u64 != self.manifest.vertex_bytes {
            return Err(Error::Config(format!(
                "{} uses {}-byte values but the graph was laid out for φ = {}",
                program.name(),
                P::Value::WIDTH,
                self.manifest.vertex_bytes
            )));
        }
        let needed = self.vertex_buffer_bytes();
        if needed > self.config.memory {
            return Err(Error::Resource(format!(
                "{} threads need {needed} bytes of vertex buffers for intervals of {} vertices; budget is {}",
                self.config.threads,
                self.part.width(),
                self.config.memory
            )));
        }
        if program.needs_edge_data() && self.format.payload_bytes == 0 {
            return Err(Error::Config(format!("{} needs edge data but the graph has no payloads", program.name())));
        }
        if program.needs_edge_data() && plan.has_bucket.iter().any(|&b| b) {
            return Err(Error::Config(format!(
                "{} reads edge data, which shuffle records do not carry; run with forced dense mode",
                program.name()
            )));
        }
        Ok(())
    }

    pub fn run<P: MAlgorithm>(&self, program: &P, options: &RunOptions) -> Result<RunReport> {
        let plan = self.plan();
        self.check(program, &plan)?;
        let v_count = self.manifest.v_count;
        let start_io = self.io.total.snapshot();

        let work = [
            self.dir.vector(&format!("{}.work0", options.output)),
            self.dir.vector(&format!("{}.work1", options.output)),
        ];
        let phi = P::Value::WIDTH;
        let mut prev = VertexVector::create(&work[0], phi, v_count, &self.io.setup)?;
        let mut next = VertexVector::create(&work[1], phi, v_count, &self.io.setup)?;
        match &options.initial {
            Some(path) => copy_vector(path, &prev, &self.io.setup)?,
            None => prev.fill_with(|v| program.initial_value(v))?,
        }
        let degrees = if program.needs_degrees() {
            let path = self.dir.vector(DEGREES);
            if !path.exists() {
                return Err(Error::Config(format!(
                    "{} needs out-degrees but {} is missing",
                    program.name(),
                    path.display()
                )));
            }
            let d = VertexVector::open(path, crate::preprocess::degree_width(v_count), &self.io.source)?;
            if d.len() != v_count {
                return Err(Error::Corruption(format!("degree vector has {} entries, |V| = {v_count}", d.len())));
            }
            Some(d)
        } else {
            None
        };

        let width = self.part.width() as usize;
        let threads = self.config.threads;
        let _buffers = self.memory.track((threads as u64 + 1) * width as u64 * phi as u64);
        let mut view = vec![program.neutral(); width];
        let mut accs = vec![vec![program.neutral(); width]; threads];

        let mut passes = Vec::with_capacity(options.iterations);
        let mut converged = false;
        for iteration in 0..options.iterations {
            let before = self.snapshots();
            let changed =
                self.pass(program, &plan, &prev, &next, degrees.as_ref(), &mut view, &mut accs, options.until_stable)?;
            let after = self.snapshots();
            let stats = PassStats {
                iteration,
                changed,
                io: after[0] - before[0],
                source: after[1] - before[1],
                destination: after[2] - before[2],
                edges: after[3] - before[3],
                buckets: after[4] - before[4],
            };
            info!(
                "pass iteration={} program={} changed={:?} bytes_read={} bytes_written={} seeks={}",
                iteration,
                program.name(),
                changed,
                stats.io.bytes_read,
                stats.io.bytes_written,
                stats.io.seeks
            );
            passes.push(stats);
            std::mem::swap(&mut prev, &mut next);
            if options.until_stable && changed == Some(0) {
                converged = true;
                break;
            }
        }

        let final_path = self.dir.vector(&options.output);
        std::fs::rename(prev.path(), &final_path).map_err(|e| Error::io(&final_path, e))?;
        std::fs::remove_file(next.path()).map_err(|e| Error::io(next.path(), e))?;
        Ok(RunReport {
            result: VertexVector::open(final_path, phi, &self.io.total)?,
            passes,
            converged,
            peak_vertex_bytes: self.memory.peak(),
            io: self.io.total.snapshot() - start_io,
        })
    }

    fn snapshots(&self) -> [IoSnapshot; 5] {
        [
            self.io.total.snapshot(),
            self.io.source.snapshot(),
            self.io.destination.snapshot(),
            self.io.edges.snapshot(),
            self.io.buckets.snapshot(),
        ]
    }

    #[allow(clippy::too_many_arguments)]
    fn pass<P: MAlgorithm>(
        &self,
        program: &P,
        plan: &ExecutionPlan,
        prev: &VertexVector,
        next: &VertexVector,
        degrees: Option<&VertexVector>,
        view: &mut [P::Value],
        accs: &mut [Vec<P::Value>],
        count_changes: bool,
    ) -> Result<Option<u64>> {
        let source_values = prev.with_counters(&self.io.source);
        let dest_values = prev.with_counters(&self.io.destination);
        let out = next.with_counters(&self.io.vector_writes);
        let mut loaded: Option<u32> = None;

        // Shuffle step for every sparse source partition.
        if plan.shuffle.iter().any(|inputs| !inputs.is_empty()) {
            let mut buckets = Buckets::create(
                &self.dir,
                self.manifest.beta,
                self.format.id_bytes,
                P::Value::WIDTH,
                self.config.buffer_size,
                &self.io.buckets,
            )?;
            for p in 0..plan.beta {
                let inputs = &plan.shuffle[p as usize];
                if inputs.is_empty() {
                    continue;
                }
                self.load_source(program, p, &source_values, degrees, view, &mut loaded)?;
                let files: Vec<PathBuf> = inputs
                    .iter()
                    .map(|s| match *s {
                        ShuffleSource::Partition => self.dir.partition(p),
                        ShuffleSource::DenseBlock(q) => self.dir.dense_block(p, q),
                    })
                    .collect();
                self.spp_shuffle(p, &view[..self.part.interval(p).length as usize], &files, &mut buckets)?;
            }
            buckets.finish()?;
        }

        let mut changed = count_changes.then_some(0u64);
        for q in 0..plan.beta {
            let iq = self.part.interval(q);
            let len = iq.length as usize;
            if len == 0 {
                continue;
            }
            // Seed thread 0 from the previous values, the rest with the neutral element.
            dest_values.read_values(&iq, &mut accs[0][..len])?;
            for (i, slot) in accs[0][..len].iter_mut().enumerate() {
                *slot = program.initialize(iq.start + i as u64, *slot);
            }
            for acc in accs[1..].iter_mut() {
                acc[..len].fill(program.neutral());
            }

            if plan.has_bucket[q as usize] {
                self.spp_apply(program, &iq, &self.dir.bucket(q), accs)?;
            }
            for step in &plan.columns[q as usize] {
                if step.edges == 0 {
                    continue;
                }
                let p = step.block.p;
                self.load_source(program, p, &source_values, degrees, view, &mut loaded)?;
                let ip = self.part.interval(p);
                self.dbp_process(program, step, &ip, &iq, &view[..ip.length as usize], accs)?;
                debug!(
                    "block p={} q={} edges={} edge_bytes_read={} seeks={}",
                    p,
                    q,
                    step.edges,
                    self.io.edges.snapshot().bytes_read,
                    self.io.total.snapshot().seeks
                );
            }

            gather_and_apply(program, iq.start, accs, len);
            if let Some(count) = changed.as_mut() {
                let convergence = prev.with_counters(&self.io.convergence);
                let fresh = &accs[0][..len];
                convergence.for_each_chunk_in::<P::Value>(&iq, |first, old| {
                    let off = (first - iq.start) as usize;
                    *count += old.iter().zip(&fresh[off..off + old.len()]).filter(|(a, b)| a != b).count() as u64;
                    Ok(())
                })?;
            }
            out.write_values(&iq, &accs[0][..len])?;
        }
        Ok(changed)
    }

    /// Loads the source view of `I(p)` unless it is already resident.
    fn load_source<P: MAlgorithm>(
        &self,
        program: &P,
        p: u32,
        values: &VertexVector,
        degrees: Option<&VertexVector>,
        view: &mut [P::Value],
        loaded: &mut Option<u32>,
    ) -> Result<()> {
        if *loaded == Some(p) {
            return Ok(());
        }
        let ip = self.part.interval(p);
        let len = ip.length as usize;
        values.read_values(&ip, &mut view[..len])?;
        match degrees {
            Some(d) if d.width() == 4 => d.for_each_chunk_in::<u32>(&ip, |first, chunk| {
                let off = (first - ip.start) as usize;
                for (i, &deg) in chunk.iter().enumerate() {
                    let slot = &mut view[off + i];
                    *slot = program.source_view(first + i as u64, *slot, u64::from(deg));
                }
                Ok(())
            })?,
            Some(d) => d.for_each_chunk_in::<u64>(&ip, |first, chunk| {
                let off = (first - ip.start) as usize;
                for (i, &deg) in chunk.iter().enumerate() {
                    let slot = &mut view[off + i];
                    *slot = program.source_view(first + i as u64, *slot, deg);
                }
                Ok(())
            })?,
            None => {
                for (i, slot) in view[..len].iter_mut().enumerate() {
                    *slot = program.source_view(ip.start + i as u64, *slot, 0);
                }
            }
        }
        *loaded = Some(p);
        Ok(())
    }

    /// Appends `(destination, source view)` records for every edge of
    /// `files` (all with sources in `I(p)`) to the destination buckets.
    pub fn spp_shuffle<V: VertexValue>(
        &self,
        p: u32,
        view: &[V],
        files: &[PathBuf],
        buckets: &mut Buckets,
    ) -> Result<()> {
        let ip = self.part.interval(p);
        let psi = self.format.record_bytes();
        let per_chunk = (self.config.buffer_size / psi).max(1);
        let mut chunk = Vec::new();
        let mut record = vec![0u8; buckets.record_bytes()];
        let id_bytes = self.format.id_bytes;
        for file in files {
            let mut reader = EdgeReader::open(file, self.format, self.config.buffer_size, &self.io.edges)?;
            while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
                for rec in chunk.chunks_exact(psi) {
                    let (u, v) = (self.format.source(rec), self.format.destination(rec));
                    if !ip.contains(u) || v >= self.part.v_count() {
                        return Err(Error::Corruption(format!(
                            "{}: edge ({u}, {v}) does not belong to source partition {p}",
                            file.display()
                        )));
                    }
                    write_id(v, id_bytes, &mut record);
                    view[(u - ip.start) as usize].write_le(&mut record[id_bytes..]);
                    buckets.push(self.part.interval_of_unchecked(v), &record)?;
                }
            }
        }
        Ok(())
    }

    /// Streams bucket `q` into the thread accumulators.
    fn spp_apply<P: MAlgorithm>(
        &self,
        program: &P,
        iq: &Interval,
        bucket: &Path,
        accs: &mut [Vec<P::Value>],
    ) -> Result<()> {
        let id_bytes = self.format.id_bytes;
        let rec = id_bytes + P::Value::WIDTH;
        let size = std::fs::metadata(bucket).map_err(|e| Error::io(bucket, e))?.len();
        if size % rec as u64 != 0 {
            return Err(Error::format(bucket, format!("size {size} is not a multiple of {rec}")));
        }
        let mut reader = crate::storage::io::open_reader(bucket, &self.io.buckets, self.config.buffer_size)?;
        let per_chunk = (self.config.buffer_size / rec).max(1);
        let mut chunk = vec![0u8; per_chunk * rec];
        let mut remaining = size as usize / rec;
        while remaining > 0 {
            let n = per_chunk.min(remaining);
            let bytes = &mut chunk[..n * rec];
            std::io::Read::read_exact(&mut reader, bytes).map_err(|e| Error::io(bucket, e))?;
            remaining -= n;
            parallel_records(accs, bytes, rec, |records, acc| {
                for r in records.chunks_exact(rec) {
                    let v = crate::storage::edges::read_id(r, id_bytes);
                    if !iq.contains(v) {
                        return Err(Error::Corruption(format!(
                            "{}: destination {v} outside interval {}",
                            bucket.display(),
                            iq.index
                        )));
                    }
                    program.process(P::Value::read_le(&r[id_bytes..]), &mut acc[(v - iq.start) as usize], &[]);
                }
                Ok(())
            })?;
        }
        Ok(())
    }

    /// Streams one dense step's edges into the thread accumulators.
    fn dbp_process<P: MAlgorithm>(
        &self,
        program: &P,
        step: &DenseStep,
        ip: &Interval,
        iq: &Interval,
        view: &[P::Value],
        accs: &mut [Vec<P::Value>],
    ) -> Result<()> {
        let BlockId { p, q } = step.block;
        let (path, filtered) = match step.source {
            DenseSource::BlockFile => (self.dir.dense_block(p, q), false),
            DenseSource::FilteredPartition => (self.dir.partition(p), true),
        };
        let format = self.format;
        let psi = format.record_bytes();
        let per_chunk = (self.config.buffer_size / psi).max(1);
        let mut reader = EdgeReader::open(&path, format, self.config.buffer_size, &self.io.edges)?;
        let mut chunk = Vec::new();
        while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
            parallel_records(accs, &chunk, psi, |records, acc| {
                for r in records.chunks_exact(psi) {
                    let (u, v) = (format.source(r), format.destination(r));
                    if !ip.contains(u) {
                        return Err(Error::Corruption(format!("{}: source {u} outside interval {p}", path.display())));
                    }
                    if !iq.contains(v) {
                        if filtered {
                            continue;
                        }
                        return Err(Error::Corruption(format!(
                            "{}: destination {v} outside interval {q}",
                            path.display()
                        )));
                    }
                    program.process(
                        view[(u - ip.start) as usize],
                        &mut acc[(v - iq.start) as usize],
                        format.payload(r),
                    );
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}

/// Splits `records` into one contiguous run per accumulator and processes the
/// runs concurrently; worker `i` only touches `accs[i]`.
fn parallel_records<V, F>(accs: &mut [Vec<V>], records: &[u8], record_bytes: usize, f: F) -> Result<()>
where
    V: Send,
    F: Fn(&[u8], &mut [V]) -> Result<()> + Sync,
{
    let n = records.len() / record_bytes;
    if accs.len() == 1 || n == 0 {
        return f(records, &mut accs[0]);
    }
    let per = n.div_ceil(accs.len()) * record_bytes;
    let f = &f;
    std::thread::scope(|s| {
        let workers: Vec<_> =
            accs.iter_mut().zip(records.chunks(per)).map(|(acc, part)| s.spawn(move || f(part, acc))).collect();
        workers.into_iter().try_for_each(|w| w.join().expect("worker panicked"))
    })
}

/// Folds thread buffers `1..T` into buffer 0 with `gather`, then applies.
pub fn gather_and_apply<P: MAlgorithm>(program: &P, start: VertexId, accs: &mut [Vec<P::Value>], len: usize) {
    let (first, rest) = accs.split_at_mut(1);
    let target = &mut first[0][..len];
    for other in rest.iter() {
        for (a, b) in target.iter_mut().zip(&other[..len]) {
            *a = program.gather(*a, *b);
        }
    }
    for (i, a) in target.iter_mut().enumerate() {
        *a = program.apply(start + i as u64, *a);
    }
}

/// The β destination bucket files of one shuffle step.
pub struct Buckets {
    writers: Vec<EdgeWriter>,
    record_bytes: usize,
}

impl Buckets {
    /// Truncates and opens `spp/dp_0.tmp … dp_{β−1}.tmp`.
    pub fn create(
        dir: &GraphDir,
        beta: u32,
        id_bytes: usize,
        value_bytes: usize,
        buffer_size: usize,
        counters: &IoCounters,
    ) -> Result<Self> {
        // Bucket records are written raw; the payload slot stands in for the value.
        let format = EdgeFormat { id_bytes, payload_bytes: value_bytes.saturating_sub(id_bytes) };
        let record_bytes = id_bytes + value_bytes;
        let per_bucket = (buffer_size / beta as usize).clamp(MIN_BUCKET_BUFFER, buffer_size.max(MIN_BUCKET_BUFFER));
        let writers = (0..beta)
            .map(|q| EdgeWriter::create(&dir.bucket(q), format, per_bucket, counters))
            .collect::<Result<_>>()?;
        Ok(Buckets { writers, record_bytes })
    }

    pub fn record_bytes(&self) -> usize {
        self.record_bytes
    }

    fn push(&mut self, q: u32, record: &[u8]) -> Result<()> {
        self.writers[q as usize].push_raw(record)
    }

    pub fn finish(self) -> Result<()> {
        for w in self.writers {
            w.finish()?;
        }
        Ok(())
    }
}

/// Decodes a bucket file into `(destination, value)` pairs.
pub fn read_bucket<V: VertexValue>(path: &Path, id_bytes: usize) -> Result<Vec<(VertexId, V)>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let rec = id_bytes + V::WIDTH;
    if bytes.len() % rec != 0 {
        return Err(Error::format(path, "truncated bucket"));
    }
    Ok(bytes
        .chunks_exact(rec)
        .map(|r| (crate::storage::edges::read_id(r, id_bytes), V::read_le(&r[id_bytes..])))
        .collect())
}

fn copy_vector(src: &Path, dst: &VertexVector, counters: &IoCounters) -> Result<()> {
    let input = VertexVector::open(src, dst.width(), counters)?;
    if input.len() != dst.len() {
        return Err(Error::Config(format!("{} has {} entries, graph has {}", src.display(), input.len(), dst.len())));
    }
    let mut w = open_writer(dst.path(), counters, 1 << 16, false)?;
    let width = dst.width();
    let whole = Interval { index: 0, start: 0, length: input.len() };
    let mut copy = |chunk: &[u8]| w.write_all(chunk).map_err(|e| Error::io(dst.path(), e));
    match width {
        4 => input.for_each_chunk_in::<u32>(&whole, |_, c| copy(&crate::storage::encode_values(c)))?,
        8 => input.for_each_chunk_in::<u64>(&whole, |_, c| copy(&crate::storage::encode_values(c)))?,
        w => return Err(Error::Config(format!("unsupported vector width {w}"))),
    }
    w.flush().map_err(|e| Error::io(dst.path(), e))
}
