pub mod admm;
pub mod diagnostics;
pub mod error;
pub mod krylov;
pub mod linalg;
pub mod precond;
pub mod problem;
pub mod report;
pub mod sdp;

pub use error::{Error, Result};
pub use report::{Metric, SolveReport, Status};
