//! Fixed-memory summaries of labeled graph streams.
//!
//! [`SbgSketch`] keeps one `d x d` matrix per edge label and lets edges of
//! busy labels borrow cells in the matrices of quiet labels, arbitrated by a
//! per-edge rank vector. [`TcmSketch`] is the same layout without ranking,
//! and [`ExactGraph`] is the exact reference both are checked against.
//!
//! ```
//! use sbg_sketch::{EdgeEvent, EdgeQuery, SbgSketch, SketchConfig};
//!
//! let mut sketch = SbgSketch::new(SketchConfig::new(3, 2, 64 * 1024).seed(7)).unwrap();
//! sketch.insert(&EdgeEvent::unit(1, 2, 0)).unwrap();
//! sketch.insert(&EdgeEvent::unit(1, 2, 0)).unwrap();
//! assert!(sketch.estimate_edge(&EdgeQuery::new(1, 2, 0)).unwrap() >= 2.0);
//! assert_eq!(sketch.estimate_edge(&EdgeQuery::new(2, 1, 0)).unwrap(), 0.0);
//! ```

pub mod bench;
pub mod bounds;
pub mod error;
mod frequency;
pub mod hash;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod query;
pub mod query_file;
pub mod rank;
pub mod sketch;
pub mod snapshot;
pub mod stream;
pub mod tcm;
mod traversal;
pub mod workload;

pub type VertexId = u64;

pub use error::{Result, SketchError};
pub use oracle::ExactGraph;
pub use query::{EdgeQuery, GraphSketch, ReachabilityQuery, SubgraphQuery};
pub use rank::{Priority, RankTable, RankVector};
pub use sketch::{AggregateMode, Cell, EdgeEvent, SbgSketch, SketchConfig};
pub use tcm::{TcmConfig, TcmSketch};
