//! Polynomial methods, spectral sets and extremal problems for quadratic
//! min-max optimization.

pub mod conformal;
pub mod error;
pub mod extremal;
pub mod poly;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use extremal::{BoundaryMesh, MinimaxCertificate};
pub use poly::{NormalizationClass, Polynomial};
pub use problems::{QuadraticSaddleProblem, SpectralMeasure, SpectralSetDescriptor, SpectralSetKind};
pub use solvers::{StepSchedule, SymmetricBaseline, Trajectory};
