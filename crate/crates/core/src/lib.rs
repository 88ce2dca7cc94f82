//! Reconnecting top-l relationships (RTlR) over evolving graphs.
//!
//! Given the history of a directed social graph, predict the next snapshot
//! `G_t` and pick `l` formerly existing edges whose reconnection most enlarges
//! a user group's independent-cascade influence spread in `G_t`.
//!
//! * [`graph`]: temporal edge lists, snapshot partitioning, IC probabilities.
//! * [`predictor`]: next-snapshot heuristics and the candidate edge set.
//! * [`oracle`]: Monte-Carlo and exact spread, used to check everything else.
//! * [`sketch`]: forward-influence sketches and per-sketch reach marks.
//! * [`query`]: the SBG, CE-SBG and O-SBG query algorithms.
//! * [`bench`]: query pipelines, parameter sweeps and CSV output.
//! * [`synth`]: synthetic temporal graphs.

pub mod bench;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod predictor;
pub mod query;
pub mod reach;
pub mod rng;
pub mod sketch;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{Edge, EvolvingGraph, SnapshotGraph, TemporalEdge, VertexId};
pub use predictor::{CandidateEdgeSet, PredictorKind};
pub use query::{Algorithm, QueryResult, UblIndex};
pub use sketch::{ReachMarks, SketchSet};
