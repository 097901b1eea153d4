//! Reverse greedy for k-center.
//!
//! The crate provides the cost model and the reverse greedy engine
//! ([`kcenter`]), exact small-instance oracles ([`exact`]), the consolidation
//! number and its decrement check ([`consolidation`]), the adversarial star
//! family with its scripted run ([`lowerbound`]), and the file formats and
//! experiment drivers used by the `revgreedy` command-line tool ([`cli`]).

pub mod cli;
pub mod consolidation;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod format;
pub mod kcenter;
pub mod lowerbound;
pub mod metric;

pub use error::{Error, Result};
pub use exact::{exact_opt, ExactConfig, OptimalSolution};
pub use kcenter::{cost, reverse_greedy, FacilitySet, TiePolicy, Trace};
pub use lowerbound::{known_opt, scripted_schedule, verify_schedule, LowerBoundInstance};
pub use metric::{metric_from_graph, validate_metric, Arithmetic, MetricSpace, WeightedGraph};
