//! Distributed degree splitting, sinkless orientation and edge coloring,
//! executed on a synchronous message-passing simulator.

pub mod artifact;
pub mod color;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod orient;
pub mod sim;
pub mod sinkless;
pub mod split;

pub use artifact::{Color, ForestDecomposition, Orientation, PaletteColoring, TwoColoring};
pub use error::{Error, Result};
pub use graph::generate::{generate, Family};
pub use graph::{EdgeId, Graph, NodeId};
