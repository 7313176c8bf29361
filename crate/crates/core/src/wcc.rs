//! Weakly connected components in a single pass over the edges, using an
//! in-memory disjoint-set forest.

use std::path::Path;

use crate::error::{Error, Result};
use crate::memory::MemoryTracker;
use crate::partition::VertexId;
use crate::program::LabelValue;
use crate::storage::{EdgeReader, GraphDir, IoCounters, IoSnapshot, VertexVector, DEFAULT_BUFFER_SIZE};

/// Union by rank with full path compression over ids `0..n`.
#[derive(Debug, Clone)]
pub struct DisjointSet<L = u64> {
    parent: Vec<L>,
    rank: Vec<u8>,
    steps: u64,
}

impl<L: LabelValue> DisjointSet<L> {
    pub fn new(n: u64) -> Result<Self> {
        if n > 0 {
            L::from_id(n - 1)?;
        }
        let parent = (0..n).map(|v| L::from_id(v)).collect::<Result<Vec<_>>>()?;
        Ok(DisjointSet { parent, rank: vec![0; n as usize], steps: 0 })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Parent-pointer hops taken by all `find` calls so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn find(&mut self, v: VertexId) -> VertexId {
        let mut root = v;
        loop {
            let p = self.parent[root as usize].to_id();
            if p == root {
                break;
            }
            self.steps += 1;
            root = p;
        }
        let mut cur = v;
        while cur != root {
            let next = self.parent[cur as usize].to_id();
            // `root` came out of the array, so it fits `L`.
            self.parent[cur as usize] = L::from_id(root).unwrap_or(L::MAX);
            cur = next;
        }
        root
    }

    /// Returns true when `a` and `b` were in different sets.
    pub fn union(&mut self, a: VertexId, b: VertexId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (hi, lo) = match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Equal => {
                self.rank[ra as usize] += 1;
                (ra, rb)
            }
        };
        self.parent[lo as usize] = L::from_id(hi).unwrap_or(L::MAX);
        true
    }

    /// Rewrites every entry to the minimum id of its set and returns the
    /// labels. Each vertex is visited in increasing order, so the first
    /// member seen of each set is its minimum.
    pub fn into_min_labels(mut self) -> Vec<L> {
        let n = self.parent.len();
        let mut min_of_root: Vec<L> = vec![L::MAX; n];
        let mut labels = Vec::with_capacity(n);
        for v in 0..n as u64 {
            let r = self.find(v) as usize;
            if min_of_root[r] == L::MAX {
                min_of_root[r] = L::from_id(v).unwrap_or(L::MAX);
            }
            labels.push(min_of_root[r]);
        }
        labels
    }
}

/// Bytes of in-memory state needed for `v_count` vertices with labels of
/// `id_bytes` bytes and one rank byte each.
pub fn union_find_bytes(v_count: u64, id_bytes: usize) -> u64 {
    v_count.saturating_mul(id_bytes as u64 + 1)
}

pub fn union_find_fits(v_count: u64, id_bytes: usize, memory: u64) -> bool {
    union_find_bytes(v_count, id_bytes) <= memory
}

#[derive(Debug, Clone)]
pub struct UnionFindOptions {
    pub memory: u64,
    pub buffer_size: usize,
    /// Result vector name under `vectors/`.
    pub output: String,
}

impl Default for UnionFindOptions {
    fn default() -> Self {
        UnionFindOptions { memory: 1 << 30, buffer_size: DEFAULT_BUFFER_SIZE, output: "wcc".into() }
    }
}

#[derive(Debug, Clone)]
pub struct UnionFindReport {
    pub labels: VertexVector,
    pub components: u64,
    pub edges: u64,
    pub find_steps: u64,
    pub io: IoSnapshot,
    pub peak_bytes: u64,
}

/// Labels every vertex with the minimum id of its weakly connected
/// component. Edge direction is ignored and every edge file is read once.
/// Labels are `u32` when the graph uses 4-byte ids, else `u64`.
pub fn wcc_union_find(graph_dir: &Path, options: &UnionFindOptions) -> Result<UnionFindReport> {
    let dir = GraphDir::new(graph_dir);
    let counters = IoCounters::new();
    let manifest = dir.load_manifest(&counters)?;
    match manifest.id_bytes {
        4 => run::<u32>(&dir, &manifest, options, &counters),
        _ => run::<u64>(&dir, &manifest, options, &counters),
    }
}

fn run<L: LabelValue>(
    dir: &GraphDir,
    manifest: &crate::storage::GraphManifest,
    options: &UnionFindOptions,
    counters: &IoCounters,
) -> Result<UnionFindReport> {
    let v_count = manifest.v_count;
    let need = union_find_bytes(v_count, L::WIDTH);
    if need > options.memory {
        return Err(Error::Resource(format!(
            "union-find needs {need} bytes for {v_count} vertices but the budget is {}; \
             use the iterative label-propagation WCC instead",
            options.memory
        )));
    }
    let tracker = MemoryTracker::new();
    let _state = tracker.track(need);
    let mut set = DisjointSet::<L>::new(v_count)?;
    let format = manifest.edge_format()?;
    let psi = format.record_bytes();
    let per_chunk = (options.buffer_size / psi).max(1);
    let mut chunk = Vec::new();
    let mut edges = 0u64;
    let mut components = v_count;
    for path in dir.edge_files(manifest) {
        let mut reader = EdgeReader::open(&path, format, options.buffer_size, counters)?;
        while reader.read_chunk(&mut chunk, per_chunk)? > 0 {
            for rec in chunk.chunks_exact(psi) {
                let (u, v) = (format.source(rec), format.destination(rec));
                if u >= v_count || v >= v_count {
                    return Err(Error::VertexOutOfRange { vertex: u.max(v), v_count });
                }
                if set.union(u, v) {
                    components -= 1;
                }
                edges += 1;
            }
        }
    }
    if edges != manifest.e_count {
        return Err(Error::Corruption(format!(
            "edge files hold {edges} edges, manifest declares {}",
            manifest.e_count
        )));
    }
    let find_steps = set.steps();
    let labels = set.into_min_labels();
    let out = VertexVector::from_values(dir.vector(&options.output), &labels, counters)?;
    Ok(UnionFindReport {
        labels: out,
        components,
        edges,
        find_steps,
        io: counters.snapshot(),
        peak_bytes: tracker.peak(),
    })
}
