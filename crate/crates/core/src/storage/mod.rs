//! On-disk formats and instrumented file access.
//!
//! A graph directory holds one artifact per physical concept:
//!
//! ```text
//! manifest                 graph metadata and block table
//! partitions/sp_<p>.edges  sparse-block edges with source in I(p)
//! dense/b_<p>_<q>.edges    edges of dense block G(p, q)
//! spp/dp_<q>.tmp           per-iteration shuffle buckets for I(q)
//! vectors/<name>.vec       vertex vectors
//! ```

pub mod edges;
pub mod io;
pub mod manifest;
pub mod vector;

use std::path::{Path, PathBuf};

pub use edges::{stream_edges, write_edges, EdgeFormat, EdgeReader, EdgeRecord, EdgeWriter};
pub use io::{IoCounters, IoSnapshot, DEFAULT_BUFFER_SIZE};
pub use manifest::{load_manifest, save_manifest, GraphManifest, MANIFEST_VERSION};
pub use vector::{decode_values, encode_values, VertexValue, VertexVector};

/// Name of the out-degree vector written by preprocessing.
pub const DEGREES: &str = "degrees";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDir {
    root: PathBuf,
}

impl GraphDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        GraphDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest")
    }

    pub fn partition(&self, p: u32) -> PathBuf {
        self.root.join("partitions").join(format!("sp_{p}.edges"))
    }

    pub fn dense_block(&self, p: u32, q: u32) -> PathBuf {
        self.root.join("dense").join(format!("b_{p}_{q}.edges"))
    }

    pub fn bucket(&self, q: u32) -> PathBuf {
        self.root.join("spp").join(format!("dp_{q}.tmp"))
    }

    pub fn vector(&self, name: &str) -> PathBuf {
        self.root.join("vectors").join(format!("{name}.vec"))
    }

    pub fn load_manifest(&self, counters: &IoCounters) -> crate::Result<GraphManifest> {
        load_manifest(&self.manifest(), counters)
    }

    /// Every edge file of the graph: partitions first, then dense blocks.
    pub fn edge_files(&self, manifest: &GraphManifest) -> Vec<PathBuf> {
        let mut files: Vec<PathBuf> = (0..manifest.beta).map(|p| self.partition(p)).collect();
        files.extend(manifest.dense_blocks().map(|b| self.dense_block(b.block.p, b.block.q)));
        files
    }
}
