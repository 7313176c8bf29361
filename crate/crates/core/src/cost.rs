//! Analytic I/O cost of one full pass under dense-only, sparse-only and
//! per-block bimodal processing, plus memory sweeps over those costs.
//!
//! Bytes are computed exactly: every per-block cost is a rational with
//! denominator β², so totals are accumulated as `u128` numerators scaled by
//! β² and only divided out for reporting. Comparisons between the three
//! schemes therefore carry no rounding.
//!
//! Per block with source interval length ϑ and ξ edges:
//!
//! * dense: `ϑφ(1 + 1/β) + ξψ`
//! * sparse: `2ϑφ/β + 2ξ(φ + ψ) + ξψ`, where a shuffled record is modeled
//!   as `φ + ψ` bytes.

use std::io::Write;

use crate::error::{Error, Result};
use crate::partition::{compute_beta, BlockKind, CostParams};
use crate::storage::GraphManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphSummary {
    pub v_count: u64,
    pub e_count: u64,
}

impl GraphSummary {
    pub const LIVEJOURNAL: GraphSummary = GraphSummary { v_count: 4_847_571, e_count: 68_993_773 };
    pub const TWITTER: GraphSummary = GraphSummary { v_count: 41_652_230, e_count: 1_468_365_182 };
    pub const YAHOO_WEB: GraphSummary = GraphSummary { v_count: 1_413_511_391, e_count: 6_636_600_779 };

    /// `|E| = k|V|`.
    pub fn with_density(v_count: u64, k: u64) -> Self {
        GraphSummary { v_count, e_count: v_count.saturating_mul(k) }
    }
}

/// Bytes and seeks of one scheme for one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostComponent {
    pub bytes: f64,
    /// `bytes / B`.
    pub disk_blocks: f64,
    pub seeks: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub beta: u32,
    pub dbp: CostComponent,
    pub spp: CostComponent,
    pub bbp: CostComponent,
    /// The shuffled-record term `2|E|(φ + ψ)` of the sparse cost.
    pub shuffle_bytes: f64,
    pub dense_blocks: u64,
    pub sparse_blocks: u64,
}

impl CostBreakdown {
    /// Block kind chosen for the majority of blocks (ties go to dense).
    pub fn majority(&self) -> BlockKind {
        if self.sparse_blocks > self.dense_blocks {
            BlockKind::Sparse
        } else {
            BlockKind::Dense
        }
    }
}

/// A β² grid of blocks, each with its source interval length and edge count.
#[derive(Debug, Clone)]
pub enum BlockTable {
    /// Every block holds `|E|/β²` edges and every interval `|V|/β` vertices.
    Uniform { summary: GraphSummary, beta: u32 },
    /// Explicit counts; `edges` is row-major over `(p, q)`.
    Explicit { beta: u32, interval_lengths: Vec<u64>, edges: Vec<u64> },
}

impl BlockTable {
    pub fn uniform(summary: GraphSummary, beta: u32) -> Result<Self> {
        if beta == 0 {
            return Err(Error::Config("β must be at least 1".into()));
        }
        Ok(BlockTable::Uniform { summary, beta })
    }

    pub fn explicit(beta: u32, interval_lengths: Vec<u64>, edges: Vec<u64>) -> Result<Self> {
        let b = beta as usize;
        if beta == 0 || interval_lengths.len() != b || edges.len() != b * b {
            return Err(Error::Config(format!(
                "block table for β = {beta} needs {b} intervals and {} blocks, got {} and {}",
                b * b,
                interval_lengths.len(),
                edges.len()
            )));
        }
        Ok(BlockTable::Explicit { beta, interval_lengths, edges })
    }

    pub fn from_manifest(manifest: &GraphManifest) -> Result<Self> {
        let part = manifest.partitioning()?;
        let lengths = part.intervals().map(|i| i.length).collect();
        let edges = manifest.block_table.iter().map(|b| b.edge_count).collect();
        BlockTable::explicit(manifest.beta, lengths, edges)
    }

    pub fn beta(&self) -> u32 {
        match self {
            BlockTable::Uniform { beta, .. } | BlockTable::Explicit { beta, .. } => *beta,
        }
    }

    pub fn summary(&self) -> GraphSummary {
        match self {
            BlockTable::Uniform { summary, .. } => *summary,
            BlockTable::Explicit { interval_lengths, edges, .. } => {
                GraphSummary { v_count: interval_lengths.iter().sum(), e_count: edges.iter().sum() }
            }
        }
    }
}

fn check_params(params: &CostParams) -> Result<()> {
    if params.phi == 0 || params.psi == 0 || params.disk_block == 0 {
        return Err(Error::Config("φ, ψ and B must be positive".into()));
    }
    Ok(())
}

fn overflow() -> Error {
    Error::Overflow("cost numerator exceeds 128 bits".into())
}

/// Dense and sparse cost of one block, scaled by β².
fn block_costs_scaled(
    theta_scaled_by_beta: u128,
    xi_scaled_by_beta2: u128,
    beta: u128,
    phi: u128,
    psi: u128,
) -> Option<(u128, u128)> {
    // ϑ·β and ξ·β² are passed in so uniform tables stay integral.
    // β²·ϑφ(1 + 1/β) = (ϑβ)·φ·(β + 1)
    let dense = theta_scaled_by_beta
        .checked_mul(phi)?
        .checked_mul(beta + 1)?
        .checked_add(xi_scaled_by_beta2.checked_mul(psi)?)?;
    // β²·2ϑφ/β = 2·(ϑβ)·φ
    let sparse =
        theta_scaled_by_beta.checked_mul(2 * phi)?.checked_add(xi_scaled_by_beta2.checked_mul(2 * phi + 3 * psi)?)?;
    Some((dense, sparse))
}

fn component(scaled_bytes: u128, beta: u32, seeks: f64, disk_block: u64) -> CostComponent {
    let b2 = u128::from(beta) * u128::from(beta);
    // Whole bytes convert once; only the fractional part is divided in floating point.
    let bytes = (scaled_bytes / b2) as f64 + (scaled_bytes % b2) as f64 / b2 as f64;
    CostComponent { bytes, disk_blocks: bytes / disk_block as f64, seeks }
}

fn dbp_scaled(s: GraphSummary, beta: u32, params: &CostParams) -> Option<u128> {
    let (v, e, b) = (s.v_count as u128, s.e_count as u128, beta as u128);
    let (phi, psi) = (params.phi as u128, params.psi as u128);
    let inner = (b + 1).checked_mul(v)?.checked_mul(phi)?.checked_add(e.checked_mul(psi)?)?;
    inner.checked_mul(b * b)
}

fn spp_scaled(s: GraphSummary, beta: u32, params: &CostParams) -> Option<u128> {
    let (v, e, b) = (s.v_count as u128, s.e_count as u128, beta as u128);
    let (phi, psi) = (params.phi as u128, params.psi as u128);
    let inner = (2 * phi).checked_mul(v)?.checked_add(e.checked_mul(2 * phi + 3 * psi)?)?;
    inner.checked_mul(b * b)
}

/// `(β + 1)|V|φ + |E|ψ` bytes and β² seeks.
pub fn dbp_cost(summary: GraphSummary, beta: u32, params: &CostParams) -> Result<CostComponent> {
    check_params(params)?;
    if beta == 0 {
        return Err(Error::Config("β must be at least 1".into()));
    }
    let scaled = dbp_scaled(summary, beta, params).ok_or_else(overflow)?;
    Ok(component(scaled, beta, f64::from(beta) * f64::from(beta), params.disk_block))
}

/// `2|V|φ + |E|ψ + 2|E|(φ + ψ)` bytes and β seeks.
pub fn spp_cost(summary: GraphSummary, beta: u32, params: &CostParams) -> Result<CostComponent> {
    check_params(params)?;
    if beta == 0 {
        return Err(Error::Config("β must be at least 1".into()));
    }
    let scaled = spp_scaled(summary, beta, params).ok_or_else(overflow)?;
    Ok(component(scaled, beta, f64::from(beta), params.disk_block))
}

/// Sums the cheaper of the dense and sparse cost over every block. A block
/// is counted sparse only when its sparse cost is strictly lower. Dense
/// blocks cost one seek each; sparse blocks share one seek per source
/// partition, i.e. 1/β each.
pub fn bbp_cost(table: &BlockTable, params: &CostParams) -> Result<CostBreakdown> {
    check_params(params)?;
    let beta = table.beta();
    let b = beta as u128;
    let (phi, psi) = (params.phi as u128, params.psi as u128);
    let summary = table.summary();
    let mut bbp = 0u128;
    let (mut dense_blocks, mut sparse_blocks) = (0u64, 0u64);
    match table {
        BlockTable::Uniform { summary, .. } => {
            let (d, s) = block_costs_scaled(summary.v_count as u128, summary.e_count as u128, b, phi, psi)
                .ok_or_else(overflow)?;
            let blocks = u64::from(beta) * u64::from(beta);
            if s < d {
                sparse_blocks = blocks;
            } else {
                dense_blocks = blocks;
            }
            // `d` and `s` are β² times one block's cost; there are β² blocks.
            bbp = d.min(s).checked_mul(b * b).ok_or_else(overflow)?;
        }
        BlockTable::Explicit { interval_lengths, edges, .. } => {
            for (i, &xi) in edges.iter().enumerate() {
                let theta = interval_lengths[i / beta as usize] as u128;
                let (d, s) = block_costs_scaled(theta * b, xi as u128 * b * b, b, phi, psi).ok_or_else(overflow)?;
                if s < d {
                    sparse_blocks += 1;
                } else {
                    dense_blocks += 1;
                }
                bbp = bbp.checked_add(d.min(s)).ok_or_else(overflow)?;
            }
        }
    }
    let seeks = dense_blocks as f64 + sparse_blocks as f64 / f64::from(beta);
    let e = summary.e_count as f64;
    Ok(CostBreakdown {
        beta,
        dbp: dbp_cost(summary, beta, params)?,
        spp: spp_cost(summary, beta, params)?,
        bbp: component(bbp, beta, seeks, params.disk_block),
        shuffle_bytes: 2.0 * e * (params.phi + params.psi) as f64,
        dense_blocks,
        sparse_blocks,
    })
}

/// `2|V| + |E|`: one read and one write of the vertices plus one read of the edges.
pub fn t_cost(v_count: u64, e_count: u64) -> u128 {
    2 * v_count as u128 + e_count as u128
}

/// Bytes of one t-cost unit: `2|V|φ + |E|ψ`.
pub fn t_cost_bytes(summary: GraphSummary, params: &CostParams) -> f64 {
    2.0 * summary.v_count as f64 * params.phi as f64 + summary.e_count as f64 * params.psi as f64
}

pub const CSV_HEADER: &str = "memory_bytes,beta,dbp_bytes,spp_bytes,bbp_bytes,dbp_seeks,spp_seeks";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub memory: u64,
    pub costs: CostBreakdown,
}

impl SweepRow {
    pub fn csv(&self) -> String {
        let c = &self.costs;
        format!(
            "{},{},{},{},{},{},{}",
            self.memory, c.beta, c.dbp.bytes, c.spp.bytes, c.bbp.bytes, c.dbp.seeks, c.spp.seeks
        )
    }
}

/// Powers of two from `lo` to `hi` inclusive; both must be powers of two.
pub fn memory_range(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo == 0 || !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
        return Err(Error::Config(format!("memory range {lo}..{hi} must be ascending powers of two")));
    }
    let mut out = Vec::new();
    let mut m = lo;
    while m <= hi {
        out.push(m);
        match m.checked_mul(2) {
            Some(n) => m = n,
            None => break,
        }
    }
    Ok(out)
}

/// For each memory size, recomputes β and evaluates all three schemes on a
/// uniform block table.
pub fn sweep(summary: GraphSummary, memories: &[u64], params: &CostParams) -> Result<Vec<SweepRow>> {
    if memories.is_empty() || memories.windows(2).any(|w| w[0] >= w[1]) || memories[0] == 0 {
        return Err(Error::Config("memory sizes must be positive and strictly ascending".into()));
    }
    memories
        .iter()
        .map(|&memory| {
            let p = CostParams { memory, ..*params };
            let beta = compute_beta(summary.v_count, &p)?;
            let costs = bbp_cost(&BlockTable::uniform(summary, beta)?, &p)?;
            Ok(SweepRow { memory, costs })
        })
        .collect()
}

pub fn write_csv(rows: &[SweepRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::classify_block;
    use proptest::prelude::*;

    fn params() -> CostParams {
        CostParams { phi: 8, psi: 8, threads: 4, memory: 1 << 30, disk_block: 4096 }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn dbp_formula() {
        let s = GraphSummary { v_count: 1000, e_count: 5000 };
        let c = dbp_cost(s, 1, &params()).unwrap();
        assert_eq!(c.bytes, (2.0 * 1000.0 * 8.0) + 5000.0 * 8.0);
        assert_eq!(c.seeks, 1.0);
        assert!(close(c.disk_blocks, c.bytes / 4096.0));
        let c23 = dbp_cost(s, 23, &params()).unwrap();
        assert_eq!(c23.bytes, 24.0 * 1000.0 * 8.0 + 5000.0 * 8.0);
        assert_eq!(c23.seeks, 529.0);
        let empty = dbp_cost(GraphSummary { v_count: 1000, e_count: 0 }, 3, &params()).unwrap();
        assert_eq!(empty.bytes, 4.0 * 8000.0);
    }

    #[test]
    fn spp_formula() {
        let s = GraphSummary { v_count: 1000, e_count: 0 };
        let c = spp_cost(s, 7, &params()).unwrap();
        assert_eq!((c.bytes, c.seeks), (16000.0, 7.0));
        let one = spp_cost(GraphSummary { v_count: 1000, e_count: 100 }, 7, &params()).unwrap();
        let two = spp_cost(GraphSummary { v_count: 1000, e_count: 200 }, 7, &params()).unwrap();
        assert_eq!(two.bytes - c.bytes, 2.0 * (one.bytes - c.bytes));
    }

    #[test]
    fn per_block_sums_match_whole_graph() {
        // Summing the per-block costs over β² equal blocks gives back the
        // whole-graph formulas.
        let s = GraphSummary { v_count: 12_000, e_count: 90_000 };
        let p = params();
        for beta in [1, 2, 3, 7, 40] {
            let (phi, psi) = (p.phi as f64, p.psi as f64);
            let (theta, xi, b) = (s.v_count as f64 / beta as f64, s.e_count as f64 / (beta * beta) as f64, beta as f64);
            let dense = theta * phi * (1.0 + 1.0 / b) + xi * psi;
            let sparse = 2.0 * theta * phi / b + 2.0 * xi * (phi + psi) + xi * psi;
            let dbp = dbp_cost(s, beta, &p).unwrap().bytes;
            let spp = spp_cost(s, beta, &p).unwrap().bytes;
            assert!((dense * b * b - dbp).abs() <= 0.01 * dbp);
            assert!((sparse * b * b - spp).abs() <= 0.01 * spp);
        }
    }

    #[test]
    fn all_dense_or_all_sparse_tables() {
        let p = params();
        // β = 2, intervals of 10, 50 edges per block: dense everywhere.
        let dense = BlockTable::explicit(2, vec![10, 10], vec![50; 4]).unwrap();
        let c = bbp_cost(&dense, &p).unwrap();
        assert_eq!((c.dense_blocks, c.sparse_blocks), (4, 0));
        assert_eq!(c.bbp.bytes, c.dbp.bytes);
        assert_eq!(c.bbp.seeks, 4.0);
        // β = 4, intervals of 100, one edge per block: sparse everywhere.
        let sparse = BlockTable::explicit(4, vec![100; 4], vec![1; 16]).unwrap();
        let c = bbp_cost(&sparse, &p).unwrap();
        assert_eq!((c.dense_blocks, c.sparse_blocks), (0, 16));
        assert_eq!(c.bbp.bytes, c.spp.bytes);
        assert_eq!(c.bbp.seeks, 4.0);
    }

    #[test]
    fn mixed_table_beats_both_pure_schemes() {
        let p = params();
        let mut edges = vec![1u64; 16];
        edges[0] = 5000;
        edges[5] = 5000;
        let table = BlockTable::explicit(4, vec![100; 4], edges).unwrap();
        let c = bbp_cost(&table, &p).unwrap();
        assert_eq!((c.dense_blocks, c.sparse_blocks), (2, 14));
        assert!(c.bbp.bytes < c.dbp.bytes && c.bbp.bytes < c.spp.bytes);
    }

    #[test]
    fn t_cost_examples() {
        assert_eq!(t_cost(0, 0), 0);
        assert_eq!(t_cost(10, 5), 25);
    }

    #[test]
    fn memory_range_powers() {
        assert_eq!(memory_range(1 << 28, 1 << 34).unwrap().len(), 7);
        assert!(memory_range(3, 8).is_err());
        assert!(memory_range(16, 8).is_err());
        assert!(sweep(GraphSummary::LIVEJOURNAL, &[8, 4], &params()).is_err());
    }

    #[test]
    fn csv_shape() {
        let rows = sweep(GraphSummary::LIVEJOURNAL, &memory_range(1 << 28, 1 << 30).unwrap(), &params()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn normalizing_by_t_cost_keeps_order() {
        let p = params();
        let s = GraphSummary::TWITTER;
        let unit = t_cost_bytes(s, &p);
        for row in sweep(s, &memory_range(1 << 28, 1 << 34).unwrap(), &p).unwrap() {
            let c = row.costs;
            let raw = [c.dbp.bytes, c.spp.bytes, c.bbp.bytes];
            let norm = raw.map(|x| x / unit);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(raw[i] < raw[j], norm[i] < norm[j]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bbp_never_exceeds_pure_schemes(
            beta in 1u32..12,
            lens in proptest::collection::vec(0u64..10_000, 12),
            edges in proptest::collection::vec(0u64..50_000, 144),
            phi in 1u64..16,
            psi in 1u64..24,
        ) {
            let b = beta as usize;
            let p = CostParams { phi, psi, threads: 1, memory: 1 << 30, disk_block: 4096 };
            let table = BlockTable::explicit(beta, lens[..b].to_vec(), edges[..b * b].to_vec()).unwrap();
            let c = bbp_cost(&table, &p).unwrap();
            prop_assert!(c.bbp.bytes <= c.dbp.bytes && c.bbp.bytes <= c.spp.bytes);
            // Per-block choice agrees with the ratio rule.
            let mut sparse = 0u64;
            for (i, &xi) in edges[..b * b].iter().enumerate() {
                if classify_block(xi, lens[i / b], phi, psi, beta) == BlockKind::Sparse {
                    sparse += 1;
                }
            }
            prop_assert_eq!(c.sparse_blocks, sparse);
        }

        #[test]
        fn dbp_non_increasing_in_memory(v in 1u64..1_000_000_000, k in 1u64..50) {
            let s = GraphSummary::with_density(v, k);
            let rows = sweep(s, &memory_range(1 << 20, 1 << 36).unwrap(), &params()).unwrap();
            for w in rows.windows(2) {
                prop_assert!(w[1].costs.beta <= w[0].costs.beta);
                prop_assert!(w[1].costs.dbp.bytes <= w[0].costs.dbp.bytes);
                prop_assert_eq!(w[1].costs.spp.bytes, w[0].costs.spp.bytes);
            }
        }
    }
}
