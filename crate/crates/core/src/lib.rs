//! Quadratic finite elements on structured triangulations of a rectangle,
//! the linearized split backward-Euler scheme for a four-field wound-healing
//! model with nonlocal cell adhesion, and condition-number analysis of the
//! resulting linear systems.
//!
//! The geometric and linear-algebra layers are generic over [`Real`]; the
//! model layers work in `f64` through the aliases below.

pub mod assembly;
pub mod conditioning;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fe;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod nonlocal;
pub mod real;
pub mod sparse;
pub mod stepper;

pub use error::{Error, Result};
pub use fe::FeField;
pub use real::Real;

pub type Mesh = mesh::TriMesh<f64>;
pub type SparseMatrix = sparse::CsrMatrix<f64>;
pub type Field = fe::FeField<f64>;
pub type Rect = mesh::Rect<f64>;
