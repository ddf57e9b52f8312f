//! Lasso and Group-Lasso solvers accelerated by safe screening.
//!
//! Problems are solved by first-order methods (ISTA, FISTA, TwIST,
//! SpaRSA, Chambolle–Pock). Screening tests certify that some atoms are
//! inactive at the optimum so that they can be removed from the
//! dictionary, either once before iterating (static) or at every
//! iteration from the current dual point (dynamic).

pub mod bench;
pub mod datagen;
pub mod dictionary;
pub mod error;
pub mod instrument;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod parallel;
pub mod problem;
pub mod screening;
pub mod solvers;

pub use dictionary::{Dictionary, GroupPartition, IndexSet};
pub use error::{Error, Result};
pub use instrument::{SolveTrace, Strategy};
pub use problem::{Problem, ProblemKind};
pub use screening::TestKind;
pub use solvers::{run, Algorithm, SolveResult, SolverConfig};
