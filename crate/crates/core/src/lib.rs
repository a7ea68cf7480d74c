//! Vertex embeddings learned from truncated random walks.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! pieces: a compressed adjacency [`Graph`], synthetic generators, walk
//! generation, Huffman-coded hierarchical softmax, the SkipGram trainer and
//! the one-vs-rest evaluation harness. File formats, threads and the command
//! line live in the `walkembed` crate.
//!
//! Training parameters are stored in [`SharedMatrix`], a matrix of relaxed
//! atomics. A [`Trainer`] only ever needs `&self`, so any number of workers can
//! drive it at once without locks; with one worker the result is a pure
//! function of the inputs.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod eval;
pub mod generate;
pub mod graph;
pub mod hsoftmax;
pub mod math;
pub mod matrix;
pub mod rng;
pub mod trainer;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{Graph, GraphBuilder, IdMap, LabelTable};
pub use hsoftmax::{CodeTree, HuffmanTree, LeafId};
pub use matrix::{EmbeddingMatrix, SharedMatrix};
pub use trainer::{
    init_embeddings, learning_rate, StreamingTrainer, TrainConfig, TrainMode, TrainState, Trainer,
};
pub use walks::{FrequencyTable, Walk, WalkConfig};

/// Dense internal vertex identifier.
pub type VertexId = u32;
