//! Typed heterogeneous information network: schema, immutable sparse
//! adjacency storage, label state and the on-disk formats.

mod graph;
pub mod io;
mod labels;
mod schema;

pub use graph::Hin;
pub use io::{load_hin, Dataset, DatasetPaths, Labels};
pub use labels::{LabelMode, LabelState, Split};
pub use schema::{
    Cardinality, HinSchema, LinkId, LinkTypeDef, NodeRole, NodeTypeDef, NodeTypeId, INVERSE_SUFFIX,
};
