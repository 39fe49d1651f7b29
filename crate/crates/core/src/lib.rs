//! Stable Roommates toolkit: instances, stable partitions, stable matchings,
//! random preference cultures, exhaustive enumeration and experiment drivers.
//!
//! ```
//! use roommates::{format, partition};
//!
//! let inst = format::parse_instance("3\n2 3\n3 1\n1 2\n").unwrap();
//! assert!(!partition::is_solvable(&inst));
//! let p = partition::stable_partition(&inst);
//! assert_eq!(p.cycles().len(), 1);
//! ```

pub mod derive;
pub mod enumeration;
pub mod experiments;
pub mod format;
pub mod generators;
pub mod model;
pub mod partition;
pub mod stability;

pub use derive::CycleStats;
pub use enumeration::{Enumeration, SolutionSets};
pub use generators::{Culture, CultureKind};
pub use model::{AgentId, Cycle, HalfMatching, Instance, Matching, Partition};

/// Curve fit with `f64` parameters.
pub type Fit = experiments::FitResult<f64>;
/// Fitted model with `f64` parameters.
pub type FitModel = experiments::Model<f64>;
/// Point in the unit square used by the spatial cultures.
pub type Point = generators::Point<f64>;

/// Toolkit version string.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
