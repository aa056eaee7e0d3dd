//! Special factors and simplicity of collections of elements in generalized
//! Baumslag-Solitar groups, via Whitehead graphs on the Bass-Serre tree.

pub mod cli;
pub mod cover;
pub mod error;
pub mod factors;
pub mod graph;
pub mod moves;
pub mod whitehead;
pub mod words;

pub use error::{Error, Result};
pub use graph::{parse_graph, serialize_graph, AllowedFamily, EdgeId, Elementary, MarkedGraph, VertexId};
pub use words::{parse_word, BassWord};
