//! Vertex-centric programs.
//!
//! A program is four callbacks over a fixed-width value type:
//!
//! * `initialize` seeds a destination vertex's accumulator from its value in
//!   the previous pass,
//! * `process` folds one incoming edge into a destination accumulator,
//! * `gather` merges two accumulators (per-thread buffers are reduced with it),
//! * `apply` finalizes a gathered accumulator into the vertex's new value.
//!
//! Values travel along edges as a *source view*: `source_view` maps a source
//! vertex's current value (and out-degree, when requested) to the quantity
//! each of its out-edges delivers. This is what sparse-mode shuffle records
//! carry, so `process` never needs random access to other vertices.

use std::fmt::Debug;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::partition::VertexId;
use crate::storage::VertexValue;

pub trait MAlgorithm: Sync {
    type Value: VertexValue;

    fn name(&self) -> &str;

    /// Identity element of `gather`; fills the non-primary thread buffers.
    fn neutral(&self) -> Self::Value;

    /// Value of `v` before the first pass.
    fn initial_value(&self, v: VertexId) -> Self::Value;

    fn initialize(&self, v: VertexId, previous: Self::Value) -> Self::Value;

    fn source_view(&self, _u: VertexId, value: Self::Value, _out_degree: u64) -> Self::Value {
        value
    }

    fn process(&self, source: Self::Value, acc: &mut Self::Value, edge_data: &[u8]);

    /// Must be associative and commutative.
    fn gather(&self, a: Self::Value, b: Self::Value) -> Self::Value;

    fn apply(&self, _v: VertexId, acc: Self::Value) -> Self::Value {
        acc
    }

    fn needs_degrees(&self) -> bool {
        false
    }

    fn needs_edge_data(&self) -> bool {
        false
    }
}

/// Floating vertex values; arithmetic is carried out in `f64`.
pub trait FloatValue: VertexValue {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl FloatValue for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl FloatValue for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Integer vertex labels.
pub trait LabelValue: VertexValue + Ord {
    const MAX: Self;
    fn from_id(v: VertexId) -> Result<Self>;
    fn to_id(self) -> VertexId;
}

impl LabelValue for u32 {
    const MAX: Self = u32::MAX;
    fn from_id(v: VertexId) -> Result<Self> {
        u32::try_from(v).map_err(|_| Error::Overflow(format!("vertex {v} does not fit a 32-bit label")))
    }
    fn to_id(self) -> VertexId {
        u64::from(self)
    }
}

impl LabelValue for u64 {
    const MAX: Self = u64::MAX;
    fn from_id(v: VertexId) -> Result<Self> {
        Ok(v)
    }
    fn to_id(self) -> VertexId {
        self
    }
}

/// PageRank in unnormalized form: `v = (1 − d) + d · Σ u / deg(u)` over
/// in-neighbors `u`, starting from all ones. Dangling vertices contribute
/// nothing.
#[derive(Debug, Clone, Copy)]
pub struct PageRank<F = f64> {
    pub damping: f64,
    _value: PhantomData<F>,
}

impl<F> PageRank<F> {
    pub fn new(damping: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&damping) {
            return Err(Error::Config(format!("damping {damping} outside [0, 1]")));
        }
        Ok(PageRank { damping, _value: PhantomData })
    }
}

impl<F> Default for PageRank<F> {
    fn default() -> Self {
        PageRank { damping: 0.85, _value: PhantomData }
    }
}

pub fn pagerank_program(damping: f64) -> Result<PageRank<f64>> {
    PageRank::new(damping)
}

impl<F: FloatValue> MAlgorithm for PageRank<F> {
    type Value = F;

    fn name(&self) -> &str {
        "pagerank"
    }

    fn neutral(&self) -> F {
        F::from_f64(0.0)
    }

    fn initial_value(&self, _v: VertexId) -> F {
        F::from_f64(1.0)
    }

    fn initialize(&self, _v: VertexId, _previous: F) -> F {
        F::from_f64(0.0)
    }

    fn source_view(&self, _u: VertexId, value: F, out_degree: u64) -> F {
        if out_degree == 0 {
            F::from_f64(0.0)
        } else {
            F::from_f64(value.to_f64() / out_degree as f64)
        }
    }

    #[inline]
    fn process(&self, source: F, acc: &mut F, _edge_data: &[u8]) {
        *acc = F::from_f64(acc.to_f64() + source.to_f64());
    }

    fn gather(&self, a: F, b: F) -> F {
        F::from_f64(a.to_f64() + b.to_f64())
    }

    fn apply(&self, _v: VertexId, acc: F) -> F {
        F::from_f64((1.0 - self.damping) + self.damping * acc.to_f64())
    }

    fn needs_degrees(&self) -> bool {
        true
    }
}

/// Label propagation: every vertex repeatedly takes the minimum label among
/// itself and its in-neighbors. On a symmetrized graph the fixed point labels
/// each weakly connected component with its minimum vertex id.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinLabel<L = u64> {
    _label: PhantomData<L>,
}

pub fn wcc_program<L: LabelValue>() -> MinLabel<L> {
    MinLabel { _label: PhantomData }
}

impl<L: LabelValue> MAlgorithm for MinLabel<L> {
    type Value = L;

    fn name(&self) -> &str {
        "wcc"
    }

    fn neutral(&self) -> L {
        L::MAX
    }

    fn initial_value(&self, v: VertexId) -> L {
        // Engine checks |V| against the label width before running.
        L::from_id(v).unwrap_or(L::MAX)
    }

    fn initialize(&self, _v: VertexId, previous: L) -> L {
        previous
    }

    #[inline]
    fn process(&self, source: L, acc: &mut L, _edge_data: &[u8]) {
        if source < *acc {
            *acc = source;
        }
    }

    fn gather(&self, a: L, b: L) -> L {
        a.min(b)
    }
}

/// `y[v] = Σ_{(u,v) ∈ E} w(u,v) · x[u]`, with `w = 1` when unweighted and the
/// weight read from an 8-byte little-endian `f64` edge payload otherwise.
#[derive(Debug, Clone, Copy)]
pub struct SpMV<F = f64> {
    pub weighted: bool,
    _value: PhantomData<F>,
}

pub fn spmv_program(weighted: bool) -> SpMV<f64> {
    SpMV { weighted, _value: PhantomData }
}

impl<F> SpMV<F> {
    pub fn new(weighted: bool) -> Self {
        SpMV { weighted, _value: PhantomData }
    }
}

impl<F: FloatValue> MAlgorithm for SpMV<F> {
    type Value = F;

    fn name(&self) -> &str {
        "spmv"
    }

    fn neutral(&self) -> F {
        F::from_f64(0.0)
    }

    /// SpMV always runs from a supplied input vector; zero is only a fallback.
    fn initial_value(&self, _v: VertexId) -> F {
        F::from_f64(0.0)
    }

    fn initialize(&self, _v: VertexId, _previous: F) -> F {
        F::from_f64(0.0)
    }

    #[inline]
    fn process(&self, source: F, acc: &mut F, edge_data: &[u8]) {
        let w = if self.weighted { f64::from_le_bytes(edge_data[..8].try_into().unwrap()) } else { 1.0 };
        *acc = F::from_f64(acc.to_f64() + w * source.to_f64());
    }

    fn gather(&self, a: F, b: F) -> F {
        F::from_f64(a.to_f64() + b.to_f64())
    }

    fn needs_edge_data(&self) -> bool {
        self.weighted
    }
}

/// Checks `gather` for commutativity and associativity on `samples`,
/// using `close` to compare values.
pub fn check_gather_laws<P: MAlgorithm>(
    program: &P,
    samples: &[(P::Value, P::Value, P::Value)],
    close: impl Fn(P::Value, P::Value) -> bool,
) -> std::result::Result<(), String>
where
    P::Value: Debug,
{
    for &(a, b, c) in samples {
        if !close(program.gather(a, b), program.gather(b, a)) {
            return Err(format!("gather not commutative on {a:?}, {b:?}"));
        }
        let left = program.gather(program.gather(a, b), c);
        let right = program.gather(a, program.gather(b, c));
        if !close(left, right) {
            return Err(format!("gather not associative on {a:?}, {b:?}, {c:?}"));
        }
        if !close(program.gather(a, program.neutral()), a) {
            return Err(format!("neutral element is not an identity for {a:?}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn pagerank_callbacks() {
        let pr = PageRank::<f64>::default();
        assert_eq!(pr.initial_value(3), 1.0);
        assert_eq!(pr.initialize(3, 7.0), 0.0);
        assert_eq!(pr.source_view(0, 1.0, 4), 0.25);
        assert_eq!(pr.source_view(0, 1.0, 0), 0.0);
        let mut acc = 0.0;
        pr.process(0.5, &mut acc, &[]);
        pr.process(0.5, &mut acc, &[]);
        assert!((pr.apply(0, acc) - 1.0).abs() < 1e-15);
        assert!(PageRank::<f64>::new(1.5).is_err());
    }

    #[test]
    fn min_label_callbacks() {
        let w = wcc_program::<u32>();
        assert_eq!(w.neutral(), u32::MAX);
        assert_eq!(w.initial_value(5), 5);
        let mut acc = w.initialize(5, 5);
        w.process(3, &mut acc, &[]);
        w.process(4, &mut acc, &[]);
        assert_eq!(acc, 3);
    }

    #[test]
    fn spmv_weights() {
        let s = spmv_program(true);
        let mut acc = 0.0;
        s.process(3.0, &mut acc, &2.0f64.to_le_bytes());
        assert_eq!(acc, 6.0);
        let u = spmv_program(false);
        u.process(3.0, &mut acc, &[]);
        assert_eq!(acc, 9.0);
        assert!(s.needs_edge_data() && !u.needs_edge_data());
    }

    proptest! {
        #[test]
        fn float_sum_gather_laws(samples in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6, -1e6f64..1e6), 1..50)) {
            let close = |a: f64, b: f64| rel_close(a, b, 1e-12);
            prop_assert!(check_gather_laws(&PageRank::<f64>::default(), &samples, close).is_ok());
            prop_assert!(check_gather_laws(&spmv_program(false), &samples, close).is_ok());
        }

        #[test]
        fn min_gather_laws_exact(samples in proptest::collection::vec((any::<u64>(), any::<u64>(), any::<u64>()), 1..50)) {
            prop_assert!(check_gather_laws(&wcc_program::<u64>(), &samples, |a, b| a == b).is_ok());
            let narrow: Vec<(u32, u32, u32)> = samples.iter().map(|&(a, b, c)| (a as u32, b as u32, c as u32)).collect();
            prop_assert!(check_gather_laws(&wcc_program::<u32>(), &narrow, |a, b| a == b).is_ok());
        }
    }
}
