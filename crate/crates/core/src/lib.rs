//! Cohesion over triplet comparison spaces.
//!
//! Cohesion `C(x, w)` measures how much support `w` lends the focal point `x`
//! against every opposing point, using only outlier-type comparisons
//! `d(x, y) < min(d(x, z), d(y, z))`. Its inputs can be distances, coordinates,
//! or aggregated human judgments; its mass-weighted average is always one half.
//!
//! * [`spaces`]: dissimilarity and triplet comparison spaces and their builders.
//! * [`cohesion`]: local mass, the cohesion matrix, local depth, community graphs.
//! * [`structure`]: point-like sets, their laminar family, quotients and subspaces.
//! * [`verify`]: executable property checks and a brute-force oracle.
//! * [`generate`] and [`io`]: synthetic configurations and file formats.

pub mod cohesion;
pub mod error;
pub mod generate;
pub mod io;
pub mod matrix;
pub mod spaces;
pub mod structure;
pub mod verify;

pub use cohesion::{cohesion_matrix, CohesionMatrix};
pub use error::{Error, Result};
pub use matrix::SquareMatrix;
pub use spaces::{induced_triplet, DissimilaritySpace, TiePolicy, TripletComparisonSpace};
