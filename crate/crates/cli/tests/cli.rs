use std::path::Path;
use std::process::{Command, Output};

fn bimodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bimodal")).args(args).output().expect("spawn bimodal")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_edges(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn preprocess(dir: &Path, edges: &str, extra: &[&str]) -> String {
    let input = dir.join("edges.txt");
    write_edges(&input, edges);
    let graph = dir.join("graph");
    let mut args =
        vec!["preprocess", "--input", input.to_str().unwrap(), "--output", graph.to_str().unwrap(), "--memory", "1M"];
    args.extend_from_slice(extra);
    let out = bimodal(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    graph.to_str().unwrap().to_string()
}

fn dump_values(path: &Path) -> Vec<(u64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(bimodal(&["--help"]).status.code(), Some(0));
    assert_eq!(bimodal(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bimodal(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bimodal(&["run", "pagerank"]).status.code(), Some(1));
    let out = bimodal(&["cost-sim", "--graph", "twitter", "--min-memory", "4G", "--max-memory", "1G"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bimodal(&["cost-sim", "--graph", "twitter", "--min-memory", "3G", "--max-memory", "8G"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_graph_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("none");
    let out = bimodal(&["run", "pagerank", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_edge_list_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("bad.txt");
    write_edges(&input, "0 1\n1 banana\n");
    let graph = tmp.path().join("g");
    let out = bimodal(&["preprocess", "--input", input.to_str().unwrap(), "--output", graph.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tiny_memory_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = preprocess(tmp.path(), "0 1\n", &[]);
    let out = bimodal(&["run", "pagerank", "--input", &graph, "--memory", "64K"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn wcc_union_find_and_iterative_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = preprocess(tmp.path(), "0 1\n2 3\n3 4\n6 5\n", &["--symmetrize"]);
    let uf = tmp.path().join("uf.txt");
    let it = tmp.path().join("it.txt");
    let out = bimodal(&["run", "wcc", "--input", &graph, "--wcc-method", "union-find", "--dump", uf.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("components=3"), "{}", stdout(&out));
    let out = bimodal(&[
        "run",
        "wcc",
        "--input",
        &graph,
        "--wcc-method",
        "iterative",
        "--output",
        "wcc_it",
        "--dump",
        it.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = vec![(0, 0.0), (1, 0.0), (2, 2.0), (3, 2.0), (4, 2.0), (5, 5.0), (6, 5.0)];
    assert_eq!(dump_values(&uf), expected);
    assert_eq!(dump_values(&it), expected);
}

#[test]
fn spmv_of_ones_counts_in_degree() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = preprocess(tmp.path(), "0 2\n1 2\n3 2\n2 0\n", &[]);
    let dump = tmp.path().join("y.txt");
    for mode in ["bbp", "dense", "sparse"] {
        let out = bimodal(&["run", "spmv", "--input", &graph, "--force-mode", mode, "--dump", dump.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(dump_values(&dump), vec![(0, 1.0), (1, 0.0), (2, 3.0), (3, 0.0)]);
    }
}

#[test]
fn weighted_spmv_uses_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = preprocess(tmp.path(), "0 1 2.5\n2 1 0.5\n1 0 4\n", &["--weighted"]);
    let dump = tmp.path().join("y.txt");
    let out = bimodal(&["run", "spmv", "--input", &graph, "--weighted", "--dump", dump.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(dump_values(&dump), vec![(0, 4.0), (1, 3.0), (2, 0.0)]);
}

#[test]
fn pagerank_is_uniform_on_a_cycle() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = preprocess(tmp.path(), "0 1\n1 2\n2 3\n3 0\n", &[]);
    let dump = tmp.path().join("pr.txt");
    let out = bimodal(&[
        "run",
        "pagerank",
        "--input",
        &graph,
        "--iterations",
        "20",
        "--io-stats",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("iterations=20"));
    assert_eq!(text.lines().filter(|l| l.starts_with("pass=")).count(), 20);
    for (_, r) in dump_values(&dump) {
        assert!((r - 1.0).abs() < 1e-12, "{r}");
    }
}

#[test]
fn eigen_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = preprocess(tmp.path(), "0 1\n1 2\n2 0\n", &["--symmetrize"]);
    let csv = tmp.path().join("eig.csv");
    let out = bimodal(&["run", "eigen", "--input", &graph, "--k", "3", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,lambda,residual"));
    let lambdas: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(lambdas.len(), 3);
    for (got, want) in lambdas.iter().zip([2.0, -1.0, -1.0]) {
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

#[test]
fn cost_sim_writes_one_row_per_power_of_two() {
    let out = bimodal(&["cost-sim", "--graph", "livejournal", "--min-memory", "256M", "--max-memory", "1G"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "memory_bytes,beta,dbp_bytes,spp_bytes,bbp_bytes,dbp_seeks,spp_seeks");
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 7);
        assert!(cols[4] <= cols[2].min(cols[3]));
    }
}

#[test]
fn generate_then_inspect() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("r.txt");
    let out = bimodal(&[
        "generate",
        "--output",
        edges.to_str().unwrap(),
        "--vertices",
        "256",
        "--edges",
        "1000",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&edges).unwrap().lines().count(), 1000);
    let graph = tmp.path().join("g");
    let out = bimodal(&[
        "preprocess",
        "--input",
        edges.to_str().unwrap(),
        "--output",
        graph.to_str().unwrap(),
        "--vertices",
        "256",
    ]);
    assert!(out.status.success());
    let out = bimodal(&["inspect", "--input", graph.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("vertices=256 edges=1000"));
}

#[test]
fn preprocess_reports_beta_and_symmetrized_count() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("e.txt");
    write_edges(&input, "0 1\n5 199999\n7 3\n");
    let graph = tmp.path().join("g");
    let out = bimodal(&[
        "preprocess",
        "--input",
        input.to_str().unwrap(),
        "--output",
        graph.to_str().unwrap(),
        "--memory",
        "1M",
        "--vertices",
        "200000",
        "--symmetrize",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // ceil(φ(T+1)|V| / M) with φ = 8, T = 1.
    let beta = (8u64 * 2 * 200_000).div_ceil(1 << 20);
    assert!(stdout(&out).contains(&format!("vertices=200000 edges=6 beta={beta} ")), "{}", stdout(&out));
}

#[test]
fn eigen_emits_k_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let edges: String = (0..40).map(|i| format!("{i} {}\n{i} {}\n", (i + 1) % 40, (i * 7 + 3) % 40)).collect();
    let graph = preprocess(tmp.path(), &edges, &["--symmetrize"]);
    let out = bimodal(&["run", "eigen", "--input", &graph, "--k", "4", "--seed", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 5);
}
