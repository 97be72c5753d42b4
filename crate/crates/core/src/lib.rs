//! Circle patterns with spherical conical metrics and prescribed total
//! geodesic curvatures.
//!
//! A [`WeightedCellGraph`] carries one intersection angle per edge and one
//! disk per face. Given a target total curvature for every face boundary,
//! [`find_coherent_system`] decides whether a pattern exists and [`solve`]
//! finds it by Newton's method on a convex functional of the log
//! curvatures. [`reconstruct`] then rebuilds and audits the metric.

pub mod cellgraph;
pub mod document;
pub mod feasibility;
pub mod geometry;
pub mod linalg;
pub mod samples;
pub mod simplex;
pub mod solver;
pub mod sphertrig;

pub use cellgraph::{CurvatureTarget, GraphDocument, GraphError, Id, Orientation, Side, ValidationOptions, WeightedCellGraph};
pub use document::{DocumentError, RestartCheck, SolutionDocument, Verification};
pub use feasibility::{exhaustive_subset_check, find_coherent_system, Certificate, CertificateSource, Feasibility};
pub use geometry::{export_net, reconstruct, Audit, NetDocument, PatternMetric};
pub use solver::{solve, SolveError, SolveOptions, SolveReport};
pub use sphertrig::{bigon_from_k, bigon_from_totals, primitive_value, BigonShape, TrigError};
