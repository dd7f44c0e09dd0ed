//! Genus-zero Gromov–Witten invariants of smooth projective toric varieties
//! by torus localization over fixed-point graphs, including invariants with
//! the Poincaré dual of a point pulled back from the Deligne–Mumford space,
//! and the multiple quantum products they determine.
//!
//! Everything is exact: weights are integer vectors, evaluated at generic
//! integer points, and all formula arithmetic happens over `BigRational`.

pub mod cache;
pub mod fan;
pub mod graph_enum;
pub mod gw;
pub mod linalg;
pub mod localization;
pub mod moment_graph;
pub mod psi;
pub mod quantum;
pub mod rational;
pub mod standard;

pub use fan::{parse_fan, validate, CohomClass, CohomMonomial, CurveClass, Fan, FanError};
pub use moment_graph::{build_moment_graph, EvalPoint, MomentGraph};
pub use rational::Q;
