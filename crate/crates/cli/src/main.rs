use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bimodal::cost::{self, BlockTable, GraphSummary};
use bimodal::eigen::{self, LanczosOptions, Orthogonalization};
use bimodal::engine::{Engine, EngineConfig, ForceMode, RunOptions, RunReport};
use bimodal::preprocess::{preprocess, IngestOptions, InputFormat};
use bimodal::program::{PageRank, SpMV};
use bimodal::rmat::{generate_rmat, generate_rmat_text, RmatProbabilities};
use bimodal::storage::{EdgeFormat, GraphDir, IoCounters, IoSnapshot, VertexVector};
use bimodal::wcc::{union_find_fits, wcc_union_find, UnionFindOptions};
use bimodal::{wcc_program, CostParams, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

const MIN_MEMORY: u64 = 1 << 20;

#[derive(Parser, Debug)]
#[command(name = "bimodal", version, about = "Out-of-core graph processing with bimodal block scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition an edge list into a graph directory.
    Preprocess(PreprocessArgs),
    /// Run an algorithm over a preprocessed graph.
    Run(RunArgs),
    /// Evaluate the analytic I/O cost model over a range of memory sizes.
    CostSim(CostSimArgs),
    /// Summarize a graph directory.
    Inspect(InspectArgs),
    /// Write a synthetic R-MAT edge list.
    Generate(GenerateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EdgeInput {
    /// `src dst [weight]` per line.
    Text,
    /// Packed little-endian 4-byte ids.
    Bin32,
    /// Packed little-endian 8-byte ids.
    Bin64,
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    #[arg(long)]
    input: PathBuf,
    /// Graph directory to create.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: EdgeInput,
    /// Payload bytes per record in binary input.
    #[arg(long, default_value_t = 0)]
    payload_bytes: usize,
    /// Memory budget, e.g. 512M or 4G.
    #[arg(long, default_value = "1G", value_parser = parse_memory)]
    memory: u64,
    #[arg(long, default_value_t = 1)]
    threads: u32,
    /// Bytes per vertex value the graph is laid out for.
    #[arg(long, default_value_t = 8)]
    vertex_bytes: u64,
    /// Declared vertex count; scanned from the input when absent.
    #[arg(long)]
    vertices: Option<u64>,
    /// Add the reverse of every edge (required for WCC and eigen).
    #[arg(long)]
    symmetrize: bool,
    #[arg(long)]
    one_based: bool,
    #[arg(long)]
    drop_self_loops: bool,
    /// Read a third text column as an f64 edge weight.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    io_stats: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Algorithm {
    Pagerank,
    Wcc,
    Spmv,
    Eigen,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum WccMethod {
    Auto,
    UnionFind,
    Iterative,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Bbp,
    Dense,
    Sparse,
}

impl From<ModeArg> for ForceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bbp => ForceMode::Bbp,
            ModeArg::Dense => ForceMode::Dense,
            ModeArg::Sparse => ForceMode::Sparse,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(value_enum)]
    algorithm: Algorithm,
    /// Graph directory.
    #[arg(long)]
    input: PathBuf,
    /// Result vector name under `vectors/` (defaults to the algorithm name).
    #[arg(long)]
    output: Option<String>,
    #[arg(long, default_value = "1G", value_parser = parse_memory)]
    memory: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Passes to run; for iterative WCC, an upper bound.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, value_enum)]
    force_mode: Option<ModeArg>,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    #[arg(long, value_enum, default_value = "auto")]
    wcc_method: WccMethod,
    /// SpMV input vector (raw little-endian f64 per vertex); all ones when absent.
    #[arg(long)]
    vector: Option<PathBuf>,
    /// SpMV: use edge weights (needs dense processing).
    #[arg(long)]
    weighted: bool,
    /// Eigenpairs to compute.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 300)]
    max_steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-orthogonalize against every Lanczos vector.
    #[arg(long)]
    full_reorth: bool,
    /// Eigenvalue CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the result as `vertex value` text lines.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    io_stats: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    Livejournal,
    Twitter,
    Yahooweb,
}

#[derive(Args, Debug)]
struct CostSimArgs {
    #[arg(long, value_enum, conflicts_with_all = ["vertices", "edges", "input"])]
    graph: Option<Preset>,
    #[arg(long)]
    vertices: Option<u64>,
    #[arg(long, conflicts_with = "density")]
    edges: Option<u64>,
    /// Average degree k, giving |E| = k|V|.
    #[arg(long)]
    density: Option<u64>,
    /// Use the size of a preprocessed graph.
    #[arg(long, conflicts_with_all = ["vertices", "edges", "density"])]
    input: Option<PathBuf>,
    #[arg(long, default_value = "256M", value_parser = parse_memory)]
    min_memory: u64,
    #[arg(long, default_value = "16G", value_parser = parse_memory)]
    max_memory: u64,
    #[arg(long, default_value_t = 4)]
    threads: u32,
    #[arg(long, default_value_t = 8)]
    vertex_bytes: u64,
    #[arg(long, default_value_t = 8)]
    edge_bytes: u64,
    #[arg(long, default_value_t = 4096)]
    disk_block: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Print every block.
    #[arg(long)]
    blocks: bool,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    output: PathBuf,
    /// Vertex count, a power of two.
    #[arg(long)]
    vertices: u64,
    #[arg(long)]
    edges: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: GenFormat,
    /// Quadrant probabilities `a,b,c,d`.
    #[arg(long, default_value = "0.57,0.19,0.19,0.05", value_parser = parse_probabilities)]
    probabilities: RmatProbabilities,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenFormat {
    Text,
    Binary,
}

fn parse_memory(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let t = t.strip_suffix("iB").or_else(|| t.strip_suffix('B')).unwrap_or(t);
    let (digits, shift) = match t.chars().last() {
        Some('K' | 'k') => (&t[..t.len() - 1], 10),
        Some('M' | 'm') => (&t[..t.len() - 1], 20),
        Some('G' | 'g') => (&t[..t.len() - 1], 30),
        Some('T' | 't') => (&t[..t.len() - 1], 40),
        _ => (t, 0),
    };
    let n: u64 = digits.trim().parse().map_err(|_| format!("`{s}` is not a memory size"))?;
    n.checked_mul(1 << shift).ok_or_else(|| format!("`{s}` is too large"))
}

fn parse_probabilities(s: &str) -> Result<RmatProbabilities, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    let arr: [f64; 4] = parts.try_into().map_err(|_| "expected four comma-separated probabilities".to_string())?;
    let probs = RmatProbabilities(arr);
    probs.validate().map_err(|e| e.to_string())?;
    Ok(probs)
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Lib(Error::Config(_)) => 1,
            Failure::Lib(Error::Resource(_)) => 3,
            Failure::Lib(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Lib(Error::Io { path: path.to_path_buf(), source: e })
}

fn check_memory(memory: u64) -> CliResult {
    if memory < MIN_MEMORY {
        return Err(Failure::Usage(format!("--memory must be at least 1M, got {memory} bytes")));
    }
    Ok(())
}

fn print_io(label: &str, io: &IoSnapshot) {
    println!("{label}: bytes_read={} bytes_written={} seeks={}", io.bytes_read, io.bytes_written, io.seeks);
}

fn cmd_preprocess(a: &PreprocessArgs) -> CliResult {
    check_memory(a.memory)?;
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let format = match a.format {
        EdgeInput::Text => InputFormat::Text,
        EdgeInput::Bin32 => InputFormat::Binary(EdgeFormat::new(4, a.payload_bytes)?),
        EdgeInput::Bin64 => InputFormat::Binary(EdgeFormat::new(8, a.payload_bytes)?),
    };
    let options = IngestOptions {
        format,
        one_based_ids: a.one_based,
        symmetrize: a.symmetrize,
        drop_self_loops: a.drop_self_loops,
        weighted: a.weighted,
        v_count: a.vertices,
        ..IngestOptions::default()
    };
    let params = CostParams { phi: a.vertex_bytes, threads: a.threads, memory: a.memory, ..CostParams::default() };
    let start = Instant::now();
    let res = preprocess(&a.input, &options, &params, &a.output)?;
    let m = &res.manifest;
    let dense = m.dense_blocks().count();
    println!("vertices={} edges={} beta={} blocks={}", m.v_count, m.e_count, m.beta, m.block_table.len());
    println!(
        "dense_blocks={dense} sparse_blocks={} dense_edges={} sparse_edges={}",
        m.block_table.len() - dense,
        m.dense_blocks().map(|b| b.edge_count).sum::<u64>(),
        m.block_table.iter().filter(|b| !b.kind.eq(&bimodal::BlockKind::Dense)).map(|b| b.edge_count).sum::<u64>()
    );
    println!(
        "preprocess: bytes_moved={} bytes_read={} bytes_written={} seeks={} wall_time={:.3}s",
        res.io.bytes_moved(),
        res.io.bytes_read,
        res.io.bytes_written,
        res.io.seeks,
        start.elapsed().as_secs_f64()
    );
    if a.io_stats {
        print_io("vertex_count_scan", &res.discovery_io);
        println!("peak_buffer_bytes={}", res.peak_buffer_bytes);
    }
    Ok(())
}

fn engine_config(a: &RunArgs, mode: ForceMode) -> EngineConfig {
    EngineConfig { threads: a.threads, memory: a.memory, mode, ..EngineConfig::default() }
}

fn report_run(name: &str, report: &RunReport, start: Instant, io_stats: bool) {
    println!(
        "{name}: iterations={} converged={} bytes_read={} bytes_written={} seeks={} wall_time={:.3}s output={}",
        report.passes.len(),
        report.converged,
        report.io.bytes_read,
        report.io.bytes_written,
        report.io.seeks,
        start.elapsed().as_secs_f64(),
        report.result.path().display()
    );
    if io_stats {
        for p in &report.passes {
            println!(
                "pass={} bytes_read={} bytes_written={} seeks={} source_read={} destination_read={} edges_read={} buckets_moved={}{}",
                p.iteration,
                p.io.bytes_read,
                p.io.bytes_written,
                p.io.seeks,
                p.source.bytes_read,
                p.destination.bytes_read,
                p.edges.bytes_read,
                p.buckets.bytes_moved(),
                p.changed.map(|c| format!(" changed={c}")).unwrap_or_default()
            );
        }
        println!("peak_vertex_bytes={}", report.peak_vertex_bytes);
    }
}

fn dump_vector(vec: &VertexVector, float: bool, path: &Path) -> CliResult {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write =
        |line: String| writeln!(out, "{line}").map_err(|e| Error::Io { path: path.to_path_buf(), source: e });
    match (vec.width(), float) {
        (4, true) => vec.for_each_chunk::<f32>(|s, c| {
            c.iter().enumerate().try_for_each(|(i, x)| write(format!("{} {x}", s + i as u64)))
        })?,
        (8, true) => vec.for_each_chunk::<f64>(|s, c| {
            c.iter().enumerate().try_for_each(|(i, x)| write(format!("{} {x}", s + i as u64)))
        })?,
        (4, false) => vec.for_each_chunk::<u32>(|s, c| {
            c.iter().enumerate().try_for_each(|(i, x)| write(format!("{} {x}", s + i as u64)))
        })?,
        (8, false) => vec.for_each_chunk::<u64>(|s, c| {
            c.iter().enumerate().try_for_each(|(i, x)| write(format!("{} {x}", s + i as u64)))
        })?,
        (w, _) => return Err(Failure::Lib(Error::Config(format!("cannot print {w}-byte values")))),
    }
    out.flush().map_err(|e| io_failure(path, e))
}

fn cmd_run(a: &RunArgs) -> CliResult {
    check_memory(a.memory)?;
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let counters = IoCounters::new();
    let dir = GraphDir::new(&a.input);
    let manifest = dir.load_manifest(&counters)?;
    let phi = manifest.vertex_bytes;
    let name = a.output.clone().unwrap_or_else(|| format!("{:?}", a.algorithm).to_lowercase());
    let mode = a.force_mode.map(ForceMode::from);
    let start = Instant::now();
    match a.algorithm {
        Algorithm::Pagerank => {
            let engine = Engine::open(&a.input, engine_config(a, mode.unwrap_or(ForceMode::Bbp)))?;
            let options = RunOptions::iterations(a.iterations.unwrap_or(10), &name);
            let report = match phi {
                4 => engine.run(&PageRank::<f32>::new(a.damping)?, &options)?,
                8 => engine.run(&PageRank::<f64>::new(a.damping)?, &options)?,
                w => {
                    return Err(Failure::Lib(Error::Config(format!(
                        "PageRank needs 4- or 8-byte values, graph has {w}"
                    ))))
                }
            };
            report_run("pagerank", &report, start, a.io_stats);
            if let Some(p) = &a.dump {
                dump_vector(&report.result, true, p)?;
            }
        }
        Algorithm::Wcc => {
            let fits = union_find_fits(manifest.v_count, manifest.id_bytes, a.memory);
            let union_find = match a.wcc_method {
                WccMethod::UnionFind => true,
                WccMethod::Iterative => false,
                WccMethod::Auto => fits,
            };
            if union_find {
                info!("wcc: union-find");
                let report = wcc_union_find(
                    &a.input,
                    &UnionFindOptions { memory: a.memory, output: name, ..UnionFindOptions::default() },
                )?;
                println!(
                    "wcc: method=union-find components={} edges={} bytes_read={} bytes_written={} seeks={} wall_time={:.3}s output={}",
                    report.components,
                    report.edges,
                    report.io.bytes_read,
                    report.io.bytes_written,
                    report.io.seeks,
                    start.elapsed().as_secs_f64(),
                    report.labels.path().display()
                );
                if a.io_stats {
                    println!("peak_state_bytes={} find_steps={}", report.peak_bytes, report.find_steps);
                }
                if let Some(p) = &a.dump {
                    dump_vector(&report.labels, false, p)?;
                }
            } else {
                info!("wcc: iterative label propagation");
                let engine = Engine::open(&a.input, engine_config(a, mode.unwrap_or(ForceMode::Bbp)))?;
                let options =
                    RunOptions { until_stable: true, ..RunOptions::iterations(a.iterations.unwrap_or(10_000), &name) };
                let report = match phi {
                    4 => {
                        if manifest.v_count > u64::from(u32::MAX) {
                            return Err(Failure::Lib(Error::Overflow(
                                "4-byte labels cannot name every vertex; preprocess with --vertex-bytes 8".into(),
                            )));
                        }
                        engine.run(&wcc_program::<u32>(), &options)?
                    }
                    8 => engine.run(&wcc_program::<u64>(), &options)?,
                    w => {
                        return Err(Failure::Lib(Error::Config(format!(
                            "WCC needs 4- or 8-byte labels, graph has {w}"
                        ))))
                    }
                };
                report_run("wcc", &report, start, a.io_stats);
                if !report.converged {
                    warn!("wcc stopped before labels stabilized");
                }
                if let Some(p) = &a.dump {
                    dump_vector(&report.result, false, p)?;
                }
            }
        }
        Algorithm::Spmv => {
            if phi != 8 {
                return Err(Failure::Lib(Error::Config(format!("SpMV needs 8-byte values, graph has {phi}"))));
            }
            let mode = match (mode, a.weighted) {
                (Some(m), _) => m,
                (None, true) => ForceMode::Dense,
                (None, false) => ForceMode::Bbp,
            };
            let engine = Engine::open(&a.input, engine_config(a, mode))?;
            let input = match &a.vector {
                Some(p) => p.clone(),
                None => {
                    let p = dir.vector(&format!("{name}.ones"));
                    let v = VertexVector::create(&p, 8, manifest.v_count, &counters)?;
                    v.fill_with(|_| 1.0f64)?;
                    p
                }
            };
            let options =
                RunOptions { initial: Some(input), ..RunOptions::iterations(a.iterations.unwrap_or(1), &name) };
            let report = engine.run(&SpMV::<f64>::new(a.weighted), &options)?;
            report_run("spmv", &report, start, a.io_stats);
            if let Some(p) = &a.dump {
                dump_vector(&report.result, true, p)?;
            }
        }
        Algorithm::Eigen => {
            let options = LanczosOptions {
                k: a.k,
                max_steps: a.max_steps,
                tol: a.tol,
                seed: a.seed,
                orthogonalization: if a.full_reorth { Orthogonalization::Full } else { Orthogonalization::Selective },
                engine: engine_config(a, mode.unwrap_or(ForceMode::Bbp)),
                output: name,
                ..LanczosOptions::default()
            };
            let report = eigen::lanczos_so(&a.input, &options)?;
            match &a.csv {
                Some(p) => {
                    let f = File::create(p).map_err(|e| io_failure(p, e))?;
                    let mut w = BufWriter::new(f);
                    eigen::write_eigen_csv(&report.pairs, &mut w).map_err(|e| io_failure(p, e))?;
                    w.flush().map_err(|e| io_failure(p, e))?;
                }
                None => {
                    let stdout = std::io::stdout();
                    eigen::write_eigen_csv(&report.pairs, stdout.lock())
                        .map_err(|e| io_failure(Path::new("<stdout>"), e))?;
                }
            }
            eprintln!(
                "eigen: steps={} restarts={} orthogonalized_against={} converged={} wall_time={:.3}s",
                report.steps,
                report.restarts,
                report.orthogonalized_against,
                report.converged,
                start.elapsed().as_secs_f64()
            );
            if !report.converged {
                warn!("eigen: not all pairs reached the tolerance");
            }
        }
    }
    Ok(())
}

fn cmd_cost_sim(a: &CostSimArgs) -> CliResult {
    let summary = if let Some(g) = a.graph {
        match g {
            Preset::Livejournal => GraphSummary::LIVEJOURNAL,
            Preset::Twitter => GraphSummary::TWITTER,
            Preset::Yahooweb => GraphSummary::YAHOO_WEB,
        }
    } else if let Some(dir) = &a.input {
        let m = GraphDir::new(dir).load_manifest(&IoCounters::new())?;
        GraphSummary { v_count: m.v_count, e_count: m.e_count }
    } else {
        let v = a.vertices.unwrap_or(GraphSummary::YAHOO_WEB.v_count);
        match (a.edges, a.density) {
            (Some(e), None) => GraphSummary { v_count: v, e_count: e },
            (None, Some(k)) => GraphSummary::with_density(v, k),
            _ => return Err(Failure::Usage("give --graph, --input, or --vertices with --edges or --density".into())),
        }
    };
    let memories = cost::memory_range(a.min_memory, a.max_memory)
        .map_err(|e| Failure::Usage(format!("malformed memory range: {e}")))?;
    let params = CostParams {
        phi: a.vertex_bytes,
        psi: a.edge_bytes,
        threads: a.threads,
        memory: a.min_memory,
        disk_block: a.disk_block,
    };
    let rows = cost::sweep(summary, &memories, &params)?;
    match &a.output {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_failure(p, e))?;
            let mut w = BufWriter::new(f);
            cost::write_csv(&rows, &mut w).map_err(|e| io_failure(p, e))?;
            w.flush().map_err(|e| io_failure(p, e))?;
        }
        None => cost::write_csv(&rows, std::io::stdout().lock()).map_err(|e| io_failure(Path::new("<stdout>"), e))?,
    }
    Ok(())
}

fn cmd_inspect(a: &InspectArgs) -> CliResult {
    let m = GraphDir::new(&a.input).load_manifest(&IoCounters::new())?;
    let dense = m.dense_blocks().count();
    println!("vertices={} edges={} beta={}", m.v_count, m.e_count, m.beta);
    println!("id_bytes={} vertex_bytes={} edge_bytes={}", m.id_bytes, m.vertex_bytes, m.edge_bytes);
    println!("dense_blocks={dense} sparse_blocks={}", m.block_table.len() - dense);
    let params = CostParams { phi: m.vertex_bytes, psi: m.edge_bytes, ..CostParams::default() };
    let c = cost::bbp_cost(&BlockTable::from_manifest(&m)?, &params)?;
    println!("pass_cost_bytes: dbp={} spp={} bbp={}", c.dbp.bytes, c.spp.bytes, c.bbp.bytes);
    if a.blocks {
        println!("p,q,edges,kind");
        for b in &m.block_table {
            println!("{},{},{},{}", b.block.p, b.block.q, b.edge_count, b.kind);
        }
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> CliResult {
    match a.format {
        GenFormat::Text => generate_rmat_text(&a.output, a.vertices, a.edges, a.seed, a.probabilities)?,
        GenFormat::Binary => {
            let f = generate_rmat(&a.output, a.vertices, a.edges, a.seed, a.probabilities)?;
            println!("id_bytes={}", f.id_bytes);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Run(a) => cmd_run(a),
        Command::CostSim(a) => cmd_cost_sim(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
