//! In-memory reference implementations and graph builders shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::Path;

use bimodal::rmat::{RmatGenerator, RmatProbabilities};
use bimodal::storage::{write_edges, EdgeFormat, EdgeRecord, IoCounters};
use bimodal::{preprocess, CostParams, IngestOptions, InputFormat, Preprocessed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Edges = Vec<(u64, u64)>;

pub fn uniform_edges(v_count: u64, e_count: u64, seed: u64) -> Edges {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..e_count).map(|_| (rng.random_range(0..v_count), rng.random_range(0..v_count))).collect()
}

pub fn rmat_edges(v_count: u64, e_count: u64, seed: u64, probabilities: RmatProbabilities) -> Edges {
    RmatGenerator::new(v_count, probabilities, seed).unwrap().take(e_count as usize).collect()
}

/// Both directions of every edge, self-loops once.
pub fn symmetrized(edges: &[(u64, u64)]) -> Edges {
    let mut out = Vec::with_capacity(edges.len() * 2);
    for &(u, v) in edges {
        out.push((u, v));
        if u != v {
            out.push((v, u));
        }
    }
    out
}

/// Writes `edges` as packed binary input and preprocesses it with a declared |V|.
pub fn build_graph(
    dir: &Path,
    edges: &[(u64, u64)],
    v_count: u64,
    params: &CostParams,
    symmetrize: bool,
) -> Preprocessed {
    let format = EdgeFormat::new(EdgeFormat::id_bytes_for(v_count), 0).unwrap();
    let input = dir.join("input.bin");
    let records: Vec<EdgeRecord> = edges.iter().map(|&(u, v)| EdgeRecord::new(u, v)).collect();
    write_edges(&input, format, &records, &IoCounters::new()).unwrap();
    let options = IngestOptions {
        format: InputFormat::Binary(format),
        symmetrize,
        v_count: Some(v_count),
        ..IngestOptions::default()
    };
    let graph = dir.join("graph");
    preprocess(&input, &options, params, &graph).unwrap()
}

pub fn out_degrees(v_count: u64, edges: &[(u64, u64)]) -> Vec<u64> {
    let mut deg = vec![0u64; v_count as usize];
    for &(u, _) in edges {
        deg[u as usize] += 1;
    }
    deg
}

/// `r'(v) = (1 - d) + d · Σ_{(u,v)} r(u) / outdeg(u)`, starting from all ones.
pub fn pagerank_reference(v_count: u64, edges: &[(u64, u64)], damping: f64, iterations: usize) -> Vec<f64> {
    let deg = out_degrees(v_count, edges);
    let mut rank = vec![1.0f64; v_count as usize];
    for _ in 0..iterations {
        let mut acc = vec![0.0f64; v_count as usize];
        for &(u, v) in edges {
            acc[v as usize] += rank[u as usize] / deg[u as usize] as f64;
        }
        rank = acc.into_iter().map(|a| (1.0 - damping) + damping * a).collect();
    }
    rank
}

/// `y(v) = Σ_{(u,v)} x(u)`.
pub fn spmv_reference(v_count: u64, edges: &[(u64, u64)], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0f64; v_count as usize];
    for &(u, v) in edges {
        y[v as usize] += x[u as usize];
    }
    y
}

/// Component labels by breadth-first search over the undirected graph; each
/// vertex gets the smallest id in its component.
pub fn bfs_labels(v_count: u64, edges: &[(u64, u64)]) -> Vec<u64> {
    let n = v_count as usize;
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    let mut label = vec![u64::MAX; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if label[root] != u64::MAX {
            continue;
        }
        label[root] = root as u64;
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if label[y] == u64::MAX {
                    label[y] = root as u64;
                    queue.push_back(y);
                }
            }
        }
    }
    label
}

/// Dense matrix with `a[v][u]` counting edges `(u, v)`.
pub fn dense_adjacency(v_count: u64, edges: &[(u64, u64)]) -> Vec<Vec<f64>> {
    let n = v_count as usize;
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        a[v as usize][u as usize] += 1.0;
    }
    a
}

pub fn max_relative_error(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    got.iter().zip(want).map(|(g, w)| (g - w).abs() / w.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}
