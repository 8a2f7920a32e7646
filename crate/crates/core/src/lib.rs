//! Product-space analytics: Balassa revealed comparative advantage,
//! co-specialization proximity networks, specialization dynamics and
//! threshold diffusion over the resulting product graph.
//!
//! The pipeline runs ingest -> rca -> proximity, after which the graph,
//! dynamics and diffusion modules all operate on the same immutable
//! [`proximity::ProximityMatrix`].

pub mod diffusion;
pub mod dynamics;
pub mod graph;
pub mod ingest;
pub mod proximity;
pub mod specialization;
pub mod stats;

mod error;

pub use error::{Error, Result};
