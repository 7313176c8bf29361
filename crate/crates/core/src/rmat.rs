//! Recursive-matrix (R-MAT) synthetic edge generator.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::VertexId;
use crate::storage::io::open_writer;
use crate::storage::{EdgeFormat, EdgeWriter, IoCounters, DEFAULT_BUFFER_SIZE};

/// Quadrant probabilities `(a, b, c, d)`: top-left, top-right, bottom-left, bottom-right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatProbabilities(pub [f64; 4]);

impl RmatProbabilities {
    /// The skewed setting common in benchmark suites.
    pub const GRAPH500: RmatProbabilities = RmatProbabilities([0.57, 0.19, 0.19, 0.05]);
    pub const UNIFORM: RmatProbabilities = RmatProbabilities([0.25; 4]);

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Config(format!("R-MAT probabilities must be non-negative: {:?}", self.0)));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("R-MAT probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RmatGenerator {
    levels: u32,
    cumulative: [f64; 3],
    rng: ChaCha8Rng,
}

impl RmatGenerator {
    pub fn new(v_count: u64, probabilities: RmatProbabilities, seed: u64) -> Result<Self> {
        if !v_count.is_power_of_two() {
            return Err(Error::Config(format!("R-MAT vertex count {v_count} is not a power of two")));
        }
        probabilities.validate()?;
        let [a, b, c, _] = probabilities.0;
        Ok(RmatGenerator {
            levels: v_count.trailing_zeros(),
            cumulative: [a, a + b, a + b + c],
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn next_edge(&mut self) -> (VertexId, VertexId) {
        let (mut u, mut v) = (0u64, 0u64);
        for _ in 0..self.levels {
            let r: f64 = self.rng.random();
            let (du, dv) = if r < self.cumulative[0] {
                (0, 0)
            } else if r < self.cumulative[1] {
                (0, 1)
            } else if r < self.cumulative[2] {
                (1, 0)
            } else {
                (1, 1)
            };
            u = (u << 1) | du;
            v = (v << 1) | dv;
        }
        (u, v)
    }
}

impl Iterator for RmatGenerator {
    type Item = (VertexId, VertexId);

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_edge())
    }
}

/// Writes `e_count` R-MAT edges as packed binary records (id width chosen from `v_count`).
pub fn generate_rmat(
    path: &Path,
    v_count: u64,
    e_count: u64,
    seed: u64,
    probabilities: RmatProbabilities,
) -> Result<EdgeFormat> {
    let gen = RmatGenerator::new(v_count, probabilities, seed)?;
    let format = EdgeFormat::new(EdgeFormat::id_bytes_for(v_count), 0)?;
    let mut w = EdgeWriter::create(path, format, DEFAULT_BUFFER_SIZE, &IoCounters::new())?;
    for (u, v) in gen.take(e_count as usize) {
        w.push(u, v, &[])?;
    }
    w.finish()?;
    Ok(format)
}

/// Writes `e_count` R-MAT edges as `src dst` text lines.
pub fn generate_rmat_text(
    path: &Path,
    v_count: u64,
    e_count: u64,
    seed: u64,
    probabilities: RmatProbabilities,
) -> Result<()> {
    let gen = RmatGenerator::new(v_count, probabilities, seed)?;
    let mut w = open_writer(path, &IoCounters::new(), DEFAULT_BUFFER_SIZE, false)?;
    for (u, v) in gen.take(e_count as usize) {
        writeln!(w, "{u} {v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_edges_gives_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.edges");
        generate_rmat(&path, 16, 0, 1, RmatProbabilities::GRAPH500).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 0);
    }

    #[test]
    fn deterministic_for_seed() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.edges");
        let b = dir.path().join("b.edges");
        generate_rmat(&a, 1024, 5000, 42, RmatProbabilities::GRAPH500).unwrap();
        generate_rmat(&b, 1024, 5000, 42, RmatProbabilities::GRAPH500).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let c = dir.path().join("c.edges");
        generate_rmat(&c, 1024, 5000, 43, RmatProbabilities::GRAPH500).unwrap();
        assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(RmatGenerator::new(1000, RmatProbabilities::UNIFORM, 0).is_err());
        assert!(RmatGenerator::new(1024, RmatProbabilities([0.5, 0.5, 0.5, -0.5]), 0).is_err());
        assert!(RmatGenerator::new(1024, RmatProbabilities([0.3, 0.3, 0.3, 0.3]), 0).is_err());
    }

    #[test]
    fn uniform_quadrants_pass_chi_square() {
        // Top-level quadrant of each edge is decided by the first draw; with
        // uniform probabilities the four counts are multinomial(n, 1/4).
        let n = 40_000u64;
        let v = 1u64 << 10;
        let half = v / 2;
        let mut counts = [0u64; 4];
        for (u, w) in RmatGenerator::new(v, RmatProbabilities::UNIFORM, 1).unwrap().take(n as usize) {
            counts[(2 * u64::from(u >= half) + u64::from(w >= half)) as usize] += 1;
        }
        let expected = n as f64 / 4.0;
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() <= 3.0 * sd, "{counts:?}");
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 3 degrees of freedom; 99.9th percentile is 16.27.
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn text_output_matches_binary() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("r.txt");
        generate_rmat_text(&t, 64, 10, 3, RmatProbabilities::GRAPH500).unwrap();
        let expected: Vec<_> = RmatGenerator::new(64, RmatProbabilities::GRAPH500, 3).unwrap().take(10).collect();
        let got: Vec<(u64, u64)> = std::fs::read_to_string(&t)
            .unwrap()
            .lines()
            .map(|l| {
                let mut it = l.split(' ').map(|x| x.parse().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        assert_eq!(got, expected);
    }
}
