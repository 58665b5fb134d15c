//! Exact construction of tautological systems of differential equations for
//! Calabi-Yau hypersurfaces and complete intersections in toric varieties,
//! Grassmannians and partial flag varieties, together with their period
//! power series and zero-tolerance annihilation checks.
//!
//! Everything is computed over the integers and rationals. Nothing in this
//! crate uses floating point.

pub mod error;
pub mod exact;
pub mod json;
pub mod periods;
pub mod polyalg;
pub mod systems;
pub mod topology;
pub mod varieties;
pub mod verify;
pub mod volform;
pub mod weyl;

pub use error::{Error, Result};
pub use exact::{Int, IntMatrix, LatticeBasis, Rat, RatMatrix, SignPattern};
pub use polyalg::{ExpVec, LaurentPoly};
pub use systems::{GOperator, TautSystem};
pub use varieties::{MonomialBasis, PluckerIndex, ToricData, Variety};
pub use verify::AnnihilationReport;
pub use volform::{PolyForm, VectorField};
pub use weyl::{DiffOp, SparseSeries};
