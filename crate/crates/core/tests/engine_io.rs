mod common;

use bimodal::cost::{bbp_cost, BlockTable};
use bimodal::program::{PageRank, SpMV};
use bimodal::rmat::RmatProbabilities;
use bimodal::storage::{IoCounters, VertexVector};
use bimodal::{CostParams, Engine, EngineConfig, ForceMode, RunOptions};
use common::*;
use proptest::prelude::*;

fn engine(graph: &std::path::Path, threads: usize, memory: u64, mode: ForceMode) -> Engine {
    Engine::open(graph, EngineConfig { threads, memory, mode, ..EngineConfig::default() }).unwrap()
}

#[test]
fn measured_pass_bytes_track_the_model() {
    for (g, (v_count, degree)) in [(1u64 << 14, 4u64), (1 << 14, 32), (1 << 16, 8)].into_iter().enumerate() {
        let edges = rmat_edges(v_count, v_count * degree, 40 + g as u64, RmatProbabilities::GRAPH500);
        let tmp = tempfile::tempdir().unwrap();
        let memory = 8 * 2 * v_count / 8;
        let params = CostParams { threads: 1, memory, ..CostParams::default() };
        let pre = build_graph(tmp.path(), &edges, v_count, &params, false);
        let m = &pre.manifest;
        let model = bbp_cost(
            &BlockTable::from_manifest(m).unwrap(),
            &CostParams { phi: m.vertex_bytes, psi: m.edge_bytes, ..params },
        )
        .unwrap()
        .bbp
        .bytes;
        let graph = tmp.path().join("graph");
        let report = engine(&graph, 1, memory, ForceMode::Bbp)
            .run(&SpMV::<f64>::new(false), &RunOptions::iterations(1, "y"))
            .unwrap();
        let measured = report.passes[0].io.bytes_moved() as f64;
        let ratio = measured / model;
        assert!((0.5..=2.0).contains(&ratio), "graph {g}: measured {measured} vs model {model}");
    }
}

#[test]
fn spmv_matches_reference_in_every_mode() {
    let v_count = 1 << 12;
    let edges = rmat_edges(v_count, 30_000, 9, RmatProbabilities::GRAPH500);
    let tmp = tempfile::tempdir().unwrap();
    let memory = 8 * 3 * v_count / 6;
    build_graph(tmp.path(), &edges, v_count, &CostParams { threads: 2, memory, ..CostParams::default() }, false);
    let graph = tmp.path().join("graph");
    let x: Vec<f64> = (0..v_count).map(|i| (i % 17) as f64 - 8.0).collect();
    let input = graph.join("vectors").join("x.vec");
    std::fs::create_dir_all(input.parent().unwrap()).unwrap();
    VertexVector::from_values(&input, &x, &IoCounters::new()).unwrap();
    let want = spmv_reference(v_count, &edges, &x);
    for mode in [ForceMode::Dense, ForceMode::Sparse, ForceMode::Bbp] {
        let options = RunOptions { initial: Some(input.clone()), ..RunOptions::iterations(1, "y") };
        let got = engine(&graph, 2, memory, mode).run(&SpMV::<f64>::new(false), &options).unwrap();
        let got = got.result.read_all::<f64>().unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{mode}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pagerank_is_mode_and_thread_invariant(
        v_count in 2u64..400,
        raw in prop::collection::vec((0u64..400, 0u64..400), 0..2000),
        beta_hint in 1u64..6,
        threads in 1usize..4,
    ) {
        let edges: Vec<(u64, u64)> = raw.into_iter().map(|(u, v)| (u % v_count, v % v_count)).collect();
        let tmp = tempfile::tempdir().unwrap();
        let per_vertex = 8 * (threads as u64 + 1);
        let memory = (per_vertex * v_count).div_ceil(beta_hint).max(per_vertex);
        build_graph(tmp.path(), &edges, v_count, &CostParams { threads: threads as u32, memory, ..CostParams::default() }, false);
        let graph = tmp.path().join("graph");
        let want = pagerank_reference(v_count, &edges, 0.85, 5);
        for mode in [ForceMode::Dense, ForceMode::Sparse, ForceMode::Bbp] {
            let report = engine(&graph, threads, memory, mode)
                .run(&PageRank::<f64>::new(0.85).unwrap(), &RunOptions::iterations(5, "pr"))
                .unwrap();
            let got = report.result.read_all::<f64>().unwrap();
            prop_assert!(max_relative_error(&got, &want) <= 1e-12);
        }
    }
}
