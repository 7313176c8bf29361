//! The graph manifest: a line-oriented `key=value` header followed by a
//! `blocks` section with one `p q edge_count kind` line per block.
//!
//! ```text
//! version=1
//! v_count=4
//! e_count=3
//! beta=2
//! id_bytes=4
//! vertex_bytes=8
//! edge_bytes=8
//! blocks
//! 0 0 0 sparse
//! 0 1 2 sparse
//! 1 0 1 sparse
//! 1 1 0 sparse
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::edges::EdgeFormat;
use super::io::{open_reader, open_writer, IoCounters};
use crate::error::{Error, Result};
use crate::partition::{BlockId, BlockInfo, BlockKind, Partitioning};

pub const MANIFEST_VERSION: u32 = 1;

const KEYS: [&str; 7] = ["version", "v_count", "e_count", "beta", "id_bytes", "vertex_bytes", "edge_bytes"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphManifest {
    pub version: u32,
    pub v_count: u64,
    pub e_count: u64,
    pub beta: u32,
    pub id_bytes: usize,
    /// φ used when the blocks were classified.
    pub vertex_bytes: u64,
    /// ψ, the on-disk edge record size.
    pub edge_bytes: u64,
    /// Row-major: entry `p·β + q` describes block `G(p, q)`.
    pub block_table: Vec<BlockInfo>,
}

impl GraphManifest {
    pub fn partitioning(&self) -> Result<Partitioning> {
        Partitioning::new(self.v_count, self.beta)
    }

    pub fn edge_format(&self) -> Result<EdgeFormat> {
        let id = self.id_bytes;
        let payload = (self.edge_bytes as usize)
            .checked_sub(2 * id)
            .ok_or_else(|| Error::Config(format!("edge_bytes {} smaller than two ids", self.edge_bytes)))?;
        EdgeFormat::new(id, payload)
    }

    pub fn block(&self, p: u32, q: u32) -> &BlockInfo {
        &self.block_table[p as usize * self.beta as usize + q as usize]
    }

    pub fn dense_blocks(&self) -> impl Iterator<Item = &BlockInfo> {
        self.block_table.iter().filter(|b| b.kind == BlockKind::Dense)
    }

    /// Edges of source interval `p` living in blocks of the given kind.
    pub fn row_edges(&self, p: u32, kind: BlockKind) -> u64 {
        (0..self.beta).map(|q| self.block(p, q)).filter(|b| b.kind == kind).map(|b| b.edge_count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Config(format!("unsupported manifest version {}", self.version)));
        }
        if self.v_count == 0 || self.beta == 0 {
            return Err(Error::Config("v_count and beta must be positive".into()));
        }
        if self.id_bytes != 4 && self.id_bytes != 8 {
            return Err(Error::Config(format!("id_bytes must be 4 or 8, got {}", self.id_bytes)));
        }
        if self.id_bytes == 4 && self.v_count > 1 << 32 {
            return Err(Error::Config("4-byte ids cannot address more than 2^32 vertices".into()));
        }
        self.edge_format()?;
        let beta = self.beta as usize;
        if self.block_table.len() != beta * beta {
            return Err(Error::Config(format!(
                "block table has {} entries, β² = {}",
                self.block_table.len(),
                beta * beta
            )));
        }
        for (i, b) in self.block_table.iter().enumerate() {
            let expected = BlockId { p: (i / beta) as u32, q: (i % beta) as u32 };
            if b.block != expected {
                return Err(Error::Config(format!("block table entry {i} is {:?}, expected {expected:?}", b.block)));
            }
        }
        let total: u64 = self.block_table.iter().map(|b| b.edge_count).sum();
        if total != self.e_count {
            return Err(Error::Config(format!("block edge counts sum to {total}, e_count is {}", self.e_count)));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "version={}\nv_count={}\ne_count={}\nbeta={}\nid_bytes={}\nvertex_bytes={}\nedge_bytes={}\nblocks\n",
            self.version, self.v_count, self.e_count, self.beta, self.id_bytes, self.vertex_bytes, self.edge_bytes
        );
        for b in &self.block_table {
            s.push_str(&format!("{} {} {} {}\n", b.block.p, b.block.q, b.edge_count, b.kind));
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |msg: String| Error::format(path, msg);
        let mut header: BTreeMap<&str, u64> = BTreeMap::new();
        let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
        let mut saw_blocks = false;
        for (n, line) in lines.by_ref() {
            if line.is_empty() {
                continue;
            }
            if line == "blocks" {
                saw_blocks = true;
                break;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("line {}: expected key=value", n + 1)))?;
            if !KEYS.contains(&key) {
                return Err(err(format!("line {}: unknown key `{key}`", n + 1)));
            }
            let value: u64 =
                value.parse().map_err(|_| err(format!("line {}: `{value}` is not an unsigned integer", n + 1)))?;
            if header.insert(key, value).is_some() {
                return Err(err(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        if !saw_blocks {
            return Err(err("missing `blocks` section".into()));
        }
        let get = |key: &str| header.get(key).copied().ok_or_else(|| err(format!("missing key `{key}`")));
        let version = get("version")?;
        if version != u64::from(MANIFEST_VERSION) {
            return Err(err(format!("version {version} is not supported (expected {MANIFEST_VERSION})")));
        }
        let beta = u32::try_from(get("beta")?).map_err(|_| err("beta out of range".into()))?;
        let mut manifest = GraphManifest {
            version: MANIFEST_VERSION,
            v_count: get("v_count")?,
            e_count: get("e_count")?,
            beta,
            id_bytes: get("id_bytes")? as usize,
            vertex_bytes: get("vertex_bytes")?,
            edge_bytes: get("edge_bytes")?,
            block_table: Vec::new(),
        };
        let beta = beta as usize;
        let mut slots: Vec<Option<BlockInfo>> = vec![None; beta * beta];
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(format!("line {}: expected `p q edge_count kind`", n + 1)));
            }
            let num = |s: &str| -> Result<u64> {
                s.parse().map_err(|_| err(format!("line {}: `{s}` is not an unsigned integer", n + 1)))
            };
            let (p, q, count) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
            let kind = BlockKind::parse(fields[3])
                .ok_or_else(|| err(format!("line {}: unknown block kind `{}`", n + 1, fields[3])))?;
            if p >= beta as u64 || q >= beta as u64 {
                return Err(err(format!("line {}: block ({p}, {q}) outside β = {beta}", n + 1)));
            }
            let slot = &mut slots[p as usize * beta + q as usize];
            if slot.is_some() {
                return Err(err(format!("line {}: duplicate block ({p}, {q})", n + 1)));
            }
            *slot = Some(BlockInfo { block: BlockId { p: p as u32, q: q as u32 }, edge_count: count, kind });
        }
        let found = slots.iter().filter(|s| s.is_some()).count();
        if found != beta * beta {
            return Err(err(format!("{found} block lines, β = {beta} requires {}", beta * beta)));
        }
        manifest.block_table = slots.into_iter().map(Option::unwrap).collect();
        manifest.validate().map_err(|e| err(e.to_string()))?;
        Ok(manifest)
    }
}

pub fn save_manifest(path: &Path, manifest: &GraphManifest, counters: &IoCounters) -> Result<()> {
    manifest.validate()?;
    let mut w = open_writer(path, counters, 1 << 16, false)?;
    w.write_all(manifest.to_text().as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: &Path, counters: &IoCounters) -> Result<GraphManifest> {
    let mut text = String::new();
    open_reader(path, counters, 1 << 16)?.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    GraphManifest::parse(&text, path)
}
