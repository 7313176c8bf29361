//! Top-k eigenpairs of a symmetric adjacency matrix by Lanczos iteration
//! with selective orthogonalization.
//!
//! The Lanczos basis lives on disk, one `f64` vertex vector per step, and
//! every matrix-vector product is an engine pass of the SpMV program. The
//! recurrence is kept orthogonal to the wanted Ritz vectors once they have
//! converged to within `√ε‖T‖`, and those are the only vectors read back
//! during the recurrence. A full re-orthogonalization mode is available for
//! testing.

use std::io::Write;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Engine, EngineConfig, RunOptions};
use crate::error::{Error, Result};
use crate::partition::Interval;
use crate::program::SpMV;
use crate::storage::{GraphDir, IoCounters, VertexVector};

/// Default elements per streamed chunk.
pub const DEFAULT_CHUNK: usize = 1 << 16;

fn chunks(len: u64, chunk: usize) -> impl Iterator<Item = Interval> {
    let chunk = chunk.max(1) as u64;
    (0..len.div_ceil(chunk)).map(move |i| Interval { index: 0, start: i * chunk, length: chunk.min(len - i * chunk) })
}

fn same_len(x: &VertexVector, y: &VertexVector) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Config(format!(
            "vector lengths differ: {} has {}, {} has {}",
            x.path().display(),
            x.len(),
            y.path().display(),
            y.len()
        )));
    }
    Ok(())
}

fn check_finite(values: &[f64], path: &Path) -> Result<()> {
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!("{}: entry {} is {}", path.display(), i, values[i])));
    }
    Ok(())
}

/// `x · y`, summed per chunk and then across chunks in order.
pub fn ooc_dot_chunked(x: &VertexVector, y: &VertexVector, chunk: usize) -> Result<f64> {
    same_len(x, y)?;
    let mut total = 0.0;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for iv in chunks(x.len(), chunk) {
        a.resize(iv.length as usize, 0.0);
        b.resize(iv.length as usize, 0.0);
        x.read_values(&iv, &mut a)?;
        y.read_values(&iv, &mut b)?;
        total += a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>();
    }
    if !total.is_finite() {
        return Err(Error::Numerical(format!("dot product is {total}")));
    }
    Ok(total)
}

/// `y ← a·x + y`.
pub fn ooc_axpy_chunked(a: f64, x: &VertexVector, y: &VertexVector, chunk: usize) -> Result<()> {
    same_len(x, y)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for iv in chunks(x.len(), chunk) {
        xs.resize(iv.length as usize, 0.0);
        ys.resize(iv.length as usize, 0.0);
        x.read_values(&iv, &mut xs)?;
        y.read_values(&iv, &mut ys)?;
        for (yv, xv) in ys.iter_mut().zip(&xs) {
            *yv += a * xv;
        }
        check_finite(&ys, y.path())?;
        y.write_values(&iv, &ys)?;
    }
    Ok(())
}

/// `x ← a·x`.
pub fn ooc_scale_chunked(a: f64, x: &VertexVector, chunk: usize) -> Result<()> {
    let mut xs = Vec::new();
    for iv in chunks(x.len(), chunk) {
        xs.resize(iv.length as usize, 0.0);
        x.read_values(&iv, &mut xs)?;
        for v in xs.iter_mut() {
            *v *= a;
        }
        check_finite(&xs, x.path())?;
        x.write_values(&iv, &xs)?;
    }
    Ok(())
}

pub fn ooc_norm_chunked(x: &VertexVector, chunk: usize) -> Result<f64> {
    Ok(ooc_dot_chunked(x, x, chunk)?.sqrt())
}

pub fn ooc_dot(x: &VertexVector, y: &VertexVector) -> Result<f64> {
    ooc_dot_chunked(x, y, DEFAULT_CHUNK)
}

pub fn ooc_axpy(a: f64, x: &VertexVector, y: &VertexVector) -> Result<()> {
    ooc_axpy_chunked(a, x, y, DEFAULT_CHUNK)
}

pub fn ooc_scale(a: f64, x: &VertexVector) -> Result<()> {
    ooc_scale_chunked(a, x, DEFAULT_CHUNK)
}

pub fn ooc_norm(x: &VertexVector) -> Result<f64> {
    ooc_norm_chunked(x, DEFAULT_CHUNK)
}

/// Rejects vectors holding NaN or infinite entries.
pub fn ooc_check_finite(x: &VertexVector) -> Result<()> {
    x.for_each_chunk::<f64>(|_, c| check_finite(c, x.path()))
}

/// `out_i ← Σ_j coeffs[i][j] · basis_j` for every output, in one pass over
/// the basis.
pub fn ooc_combine(basis: &[VertexVector], coeffs: &[Vec<f64>], outputs: &[VertexVector], chunk: usize) -> Result<()> {
    let Some(first) = basis.first() else {
        return Err(Error::Config("empty basis".into()));
    };
    for v in basis.iter().chain(outputs) {
        same_len(first, v)?;
    }
    if coeffs.len() != outputs.len() || coeffs.iter().any(|c| c.len() != basis.len()) {
        return Err(Error::Config("coefficient matrix does not match basis and outputs".into()));
    }
    let mut acc = vec![Vec::new(); outputs.len()];
    let mut buf = Vec::new();
    for iv in chunks(first.len(), chunk) {
        let n = iv.length as usize;
        for a in acc.iter_mut() {
            a.clear();
            a.resize(n, 0.0);
        }
        buf.resize(n, 0.0);
        for (j, q) in basis.iter().enumerate() {
            q.read_values(&iv, &mut buf)?;
            for (a, c) in acc.iter_mut().zip(coeffs) {
                let s = c[j];
                for (x, b) in a.iter_mut().zip(&buf) {
                    *x += s * b;
                }
            }
        }
        for (a, out) in acc.iter().zip(outputs) {
            check_finite(a, out.path())?;
            out.write_values(&iv, a)?;
        }
    }
    Ok(())
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples `i` and `i + 1`), by QL
/// iteration with implicit Wilkinson shifts.
///
/// Only the rows of the eigenvector matrix listed in `rows` are
/// accumulated: `z[r][i]` is entry `rows[r]` of eigenvector `i`. Eigenvalues
/// come back in non-increasing order with the columns permuted to match.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], rows: &[usize]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), vec![Vec::new(); rows.len()]));
    }
    if off.len() + 1 != n {
        return Err(Error::Config(format!(
            "tridiagonal matrix of order {n} needs {} off-diagonal entries, got {}",
            n - 1,
            off.len()
        )));
    }
    if let Some(&r) = rows.iter().find(|&&r| r >= n) {
        return Err(Error::Config(format!("row {r} out of range for order {n}")));
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(Error::Numerical("tridiagonal matrix has non-finite entries".into()));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z: Vec<Vec<f64>> = rows.iter().map(|&r| (0..n).map(|c| if c == r { 1.0 } else { 0.0 }).collect()).collect();

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Numerical("tridiagonal QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = order.iter().map(|&i| d[i]).collect();
    let z = z.into_iter().map(|row| order.iter().map(|&i| row[i]).collect()).collect();
    Ok((values, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orthogonalization {
    /// Against converged Ritz vectors among the k wanted ones.
    Selective,
    /// Against every stored Lanczos vector, twice per step (test mode).
    Full,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub k: usize,
    pub max_steps: usize,
    /// Residual target relative to the largest Ritz value magnitude.
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
    pub orthogonalization: Orthogonalization,
    pub engine: EngineConfig,
    /// Eigenvectors land in `vectors/<output>_<i>.vec`.
    pub output: String,
    /// Keep the Lanczos basis files after the run.
    pub keep_basis: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            k: 5,
            max_steps: 300,
            tol: 1e-6,
            seed: 0,
            max_restarts: 8,
            orthogonalization: Orthogonalization::Selective,
            engine: EngineConfig::default(),
            output: "eigvec".into(),
            keep_basis: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Explicit `‖Av − λv‖` for the unit vector `v`.
    pub residual: f64,
    pub vector: VertexVector,
}

#[derive(Debug, Clone)]
pub struct LanczosReport {
    pub pairs: Vec<EigenPair>,
    pub alphas: Vec<f64>,
    /// `betas[j]` couples steps `j` and `j + 1`; zero after a restart.
    pub betas: Vec<f64>,
    pub steps: usize,
    pub restarts: usize,
    /// Ritz vectors that entered the selective orthogonalization set.
    pub orthogonalized_against: usize,
    pub converged: bool,
    /// Largest Ritz value magnitude at the end of the run.
    pub norm_estimate: f64,
    /// Present when `keep_basis` was set.
    pub basis: Vec<VertexVector>,
}

impl LanczosReport {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

pub fn write_eigen_csv(pairs: &[EigenPair], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "index,lambda,residual")?;
    for (i, p) in pairs.iter().enumerate() {
        writeln!(out, "{i},{},{}", p.value, p.residual)?;
    }
    Ok(())
}

struct GoodRitz {
    value: f64,
    vector: VertexVector,
}

struct Lanczos<'a> {
    engine: Engine,
    dir: GraphDir,
    options: &'a LanczosOptions,
    counters: IoCounters,
    chunk: usize,
    n: u64,
    rng: ChaCha8Rng,
    basis: Vec<VertexVector>,
    good: Vec<GoodRitz>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl Lanczos<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.vector(&format!("{}.{name}", self.options.output))
    }

    fn random_vector(&mut self, name: &str) -> Result<VertexVector> {
        let v = VertexVector::create(self.path(name), 8, self.n, &self.counters)?;
        let rng = &mut self.rng;
        v.fill_with::<f64>(|_| rng.random::<f64>() * 2.0 - 1.0)?;
        Ok(v)
    }

    fn spmv(&self, x: &VertexVector, name: &str) -> Result<VertexVector> {
        let options = RunOptions {
            iterations: 1,
            until_stable: false,
            output: format!("{}.{name}", self.options.output),
            initial: Some(x.path().to_path_buf()),
        };
        let report = self.engine.run(&SpMV::<f64>::new(false), &options)?;
        Ok(report.result.with_counters(&self.counters))
    }

    fn orthogonalize(&self, w: &VertexVector, against: &[&VertexVector]) -> Result<()> {
        for q in against {
            let c = ooc_dot_chunked(q, w, self.chunk)?;
            ooc_axpy_chunked(-c, q, w, self.chunk)?;
        }
        Ok(())
    }

    /// Turns `w` into the next basis vector.
    fn push_basis(&mut self, w: VertexVector, norm: f64) -> Result<()> {
        ooc_scale_chunked(1.0 / norm, &w, self.chunk)?;
        let path = self.path(&format!("q{}", self.basis.len()));
        std::fs::rename(w.path(), &path).map_err(|e| Error::io(&path, e))?;
        self.basis.push(VertexVector::open(path, 8, &self.counters)?);
        Ok(())
    }

    /// A random unit vector orthogonal to the whole basis, or `None` when
    /// the basis already spans the space.
    fn restart_vector(&mut self) -> Result<Option<(VertexVector, f64)>> {
        let w = self.random_vector("restart")?;
        let start = ooc_norm_chunked(&w, self.chunk)?;
        let basis: Vec<&VertexVector> = self.basis.iter().collect();
        for _ in 0..2 {
            self.orthogonalize(&w, &basis)?;
        }
        let norm = ooc_norm_chunked(&w, self.chunk)?;
        if norm <= 1e-8 * start {
            std::fs::remove_file(w.path()).map_err(|e| Error::io(w.path(), e))?;
            return Ok(None);
        }
        Ok(Some((w, norm)))
    }

    fn ritz_vectors(&self, coeffs: &[Vec<f64>], names: &[String]) -> Result<Vec<VertexVector>> {
        let outputs = names
            .iter()
            .map(|n| VertexVector::create(self.dir.vector(n), 8, self.n, &self.counters))
            .collect::<Result<Vec<_>>>()?;
        ooc_combine(&self.basis, coeffs, &outputs, self.chunk)?;
        for y in &outputs {
            let norm = ooc_norm_chunked(y, self.chunk)?;
            if norm > 0.0 {
                ooc_scale_chunked(1.0 / norm, y, self.chunk)?;
            }
        }
        Ok(outputs)
    }

    /// Eigenvector columns `cols` of the current tridiagonal matrix.
    fn ritz_coefficients(&self, cols: &[usize]) -> Result<Vec<Vec<f64>>> {
        let m = self.alphas.len();
        let rows: Vec<usize> = (0..m).collect();
        let (_, z) = tridiagonal_eigen(&self.alphas, &self.betas[..m - 1], &rows)?;
        Ok(cols.iter().map(|&c| (0..m).map(|r| z[r][c]).collect()).collect())
    }

    fn explicit_pairs(&self, values: &[f64], cols: &[usize]) -> Result<Vec<EigenPair>> {
        let coeffs = self.ritz_coefficients(cols)?;
        let names: Vec<String> = (0..cols.len()).map(|i| format!("{}_{i}", self.options.output)).collect();
        let vectors = self.ritz_vectors(&coeffs, &names)?;
        let mut pairs = Vec::with_capacity(cols.len());
        for (&c, y) in cols.iter().zip(vectors) {
            let ay = self.spmv(&y, "residual")?;
            ooc_axpy_chunked(-values[c], &y, &ay, self.chunk)?;
            let residual = ooc_norm_chunked(&ay, self.chunk)?;
            std::fs::remove_file(ay.path()).map_err(|e| Error::io(ay.path(), e))?;
            pairs.push(EigenPair { value: values[c], residual, vector: y });
        }
        Ok(pairs)
    }

    fn cleanup(&self) -> Result<()> {
        let mut doomed: Vec<&Path> = self.good.iter().map(|g| g.vector.path()).collect();
        if !self.options.keep_basis {
            doomed.extend(self.basis.iter().map(|q| q.path()));
        }
        for p in doomed {
            if p.exists() {
                std::fs::remove_file(p).map_err(|e| Error::io(p, e))?;
            }
        }
        Ok(())
    }
}

/// Computes the `k` algebraically largest eigenpairs of the adjacency
/// matrix of the graph at `graph_dir`, which must be symmetrized and laid
/// out for 8-byte vertex values.
pub fn lanczos_so(graph_dir: &Path, options: &LanczosOptions) -> Result<LanczosReport> {
    let engine = Engine::open(graph_dir, options.engine)?;
    let n = engine.manifest().v_count;
    if options.k == 0 || options.k as u64 > n {
        return Err(Error::Config(format!("k = {} must be in 1..={n}", options.k)));
    }
    if options.max_steps < options.k {
        return Err(Error::Config(format!("max_steps = {} is below k = {}", options.max_steps, options.k)));
    }
    if !(options.tol > 0.0 && options.tol < 1.0) {
        return Err(Error::Config(format!("tolerance {} must be in (0, 1)", options.tol)));
    }
    // Three vectors are live in memory per BLAS step.
    let chunk = ((options.engine.memory / 24) as usize).clamp(1, DEFAULT_CHUNK);
    let mut lz = Lanczos {
        dir: GraphDir::new(graph_dir),
        engine,
        options,
        counters: IoCounters::new(),
        chunk,
        n,
        rng: ChaCha8Rng::seed_from_u64(options.seed),
        basis: Vec::new(),
        good: Vec::new(),
        alphas: Vec::new(),
        betas: Vec::new(),
    };
    let result = run(&mut lz);
    lz.cleanup()?;
    let (pairs, converged, norm_estimate, restarts) = result?;
    let basis = if options.keep_basis { lz.basis.clone() } else { Vec::new() };
    Ok(LanczosReport {
        pairs,
        steps: lz.alphas.len(),
        alphas: lz.alphas,
        betas: lz.betas,
        restarts,
        orthogonalized_against: lz.good.len(),
        converged,
        norm_estimate,
        basis,
    })
}

fn run(lz: &mut Lanczos<'_>) -> Result<(Vec<EigenPair>, bool, f64, usize)> {
    let opts = lz.options;
    let sqrt_eps = f64::EPSILON.sqrt();
    let first = lz.random_vector("start")?;
    let norm = ooc_norm_chunked(&first, lz.chunk)?;
    lz.push_basis(first, norm)?;
    let mut restarts = 0;
    // After a failed explicit check, wait for the bounds to halve.
    let mut recheck_below = f64::INFINITY;

    loop {
        let j = lz.alphas.len();
        let q = lz.basis[j].clone();
        let w = lz.spmv(&q, "w")?;
        if j > 0 && lz.betas[j - 1] != 0.0 {
            ooc_axpy_chunked(-lz.betas[j - 1], &lz.basis[j - 1], &w, lz.chunk)?;
        }
        let alpha = ooc_dot_chunked(&q, &w, lz.chunk)?;
        ooc_axpy_chunked(-alpha, &q, &w, lz.chunk)?;
        lz.alphas.push(alpha);

        match opts.orthogonalization {
            Orthogonalization::Full => {
                let basis: Vec<&VertexVector> = lz.basis.iter().collect();
                for _ in 0..2 {
                    lz.orthogonalize(&w, &basis)?;
                }
            }
            Orthogonalization::Selective => {
                let good: Vec<&VertexVector> = lz.good.iter().map(|g| &g.vector).collect();
                lz.orthogonalize(&w, &good)?;
            }
        }
        let mut beta = ooc_norm_chunked(&w, lz.chunk)?;

        let m = j + 1;
        let (values, last) = tridiagonal_eigen(&lz.alphas, &lz.betas, &[j])?;
        let last = &last[0];
        let t_norm = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let scale = t_norm.max(f64::MIN_POSITIVE);

        if opts.orthogonalization == Orthogonalization::Selective {
            // Only the wanted end: drift toward an unwanted converged vector
            // merely duplicates that unwanted value.
            let fresh: Vec<usize> = (0..opts.k.min(m))
                .filter(|&i| beta * last[i].abs() <= sqrt_eps * scale)
                .filter(|&i| !lz.good.iter().any(|g| (g.value - values[i]).abs() <= sqrt_eps * scale))
                .collect();
            if !fresh.is_empty() && beta > 0.0 {
                let coeffs = lz.ritz_coefficients(&fresh)?;
                let names: Vec<String> =
                    (0..fresh.len()).map(|i| format!("{}.good{}", opts.output, lz.good.len() + i)).collect();
                let vectors = lz.ritz_vectors(&coeffs, &names)?;
                for (&i, vector) in fresh.iter().zip(vectors) {
                    lz.orthogonalize(&w, &[&vector])?;
                    lz.good.push(GoodRitz { value: values[i], vector });
                }
                beta = ooc_norm_chunked(&w, lz.chunk)?;
                debug!("step {m}: {} good Ritz vectors", lz.good.len());
            }
        }

        let exhausted = m as u64 == lz.n;
        let top: Vec<usize> = (0..opts.k.min(m)).collect();
        let bound = top.iter().fold(0.0f64, |a, &i| a.max(beta * last[i].abs()));
        let bounded = m >= opts.k && bound <= opts.tol * scale && bound < recheck_below;
        if bounded || exhausted {
            let pairs = lz.explicit_pairs(&values, &top)?;
            let ok = pairs.iter().all(|p| p.residual <= opts.tol * scale);
            if ok || exhausted {
                if !ok {
                    warn!("Krylov space exhausted with residuals above tolerance");
                }
                info!("lanczos converged after {m} steps, {restarts} restarts");
                std::fs::remove_file(w.path()).map_err(|e| Error::io(w.path(), e))?;
                return Ok((pairs, ok, t_norm, restarts));
            }
            debug!("step {m}: residual bounds met but explicit residuals are not");
            recheck_below = bound / 2.0;
        }
        if m >= opts.max_steps {
            warn!("lanczos stopped at max_steps = {} without converging", opts.max_steps);
            let pairs = lz.explicit_pairs(&values, &top)?;
            std::fs::remove_file(w.path()).map_err(|e| Error::io(w.path(), e))?;
            return Ok((pairs, false, t_norm, restarts));
        }

        if beta <= 1e-10 * scale.max(1.0) {
            std::fs::remove_file(w.path()).map_err(|e| Error::io(w.path(), e))?;
            restarts += 1;
            if restarts > opts.max_restarts {
                return Err(Error::Numerical(format!(
                    "Lanczos broke down {restarts} times before {} pairs converged",
                    opts.k
                )));
            }
            match lz.restart_vector()? {
                Some((v, norm)) => {
                    debug!("step {m}: breakdown, restarting");
                    lz.betas.push(0.0);
                    lz.push_basis(v, norm)?;
                }
                None => {
                    // The basis spans an invariant subspace containing the
                    // whole space; every Ritz pair is exact.
                    let pairs = lz.explicit_pairs(&values, &top)?;
                    let ok = m >= opts.k;
                    return Ok((pairs, ok, t_norm, restarts));
                }
            }
        } else {
            lz.betas.push(beta);
            lz.push_basis(w, beta)?;
        }
    }
}
