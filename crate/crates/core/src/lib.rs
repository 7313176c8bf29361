//! Out-of-core graph processing over a grid of edge blocks, each processed
//! either densely (streaming the source interval) or sparsely (shuffling
//! source values into per-destination buckets), whichever moves fewer bytes.

pub mod cost;
pub mod eigen;
pub mod engine;
pub mod error;
pub mod memory;
pub mod partition;
pub mod preprocess;
pub mod program;
pub mod rmat;
pub mod storage;
pub mod wcc;

pub use engine::{Engine, EngineConfig, ForceMode, RunOptions, RunReport};
pub use error::{Error, Result};
pub use partition::{BlockId, BlockKind, CostParams, Partitioning, VertexId};
pub use preprocess::{preprocess, IngestOptions, InputFormat, Preprocessed};
pub use program::{pagerank_program, spmv_program, wcc_program, MAlgorithm};
