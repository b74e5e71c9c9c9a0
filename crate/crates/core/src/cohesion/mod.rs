//! The cohesion function and quantities derived from it.

mod community;
mod kernel;
mod legacy;

pub use community::{community_graph, default_threshold, CommunityEdge, CommunityGraph};
pub use kernel::{cohesion_matrix, local_mass, local_mass_matrix, CohesionMatrix};
pub use legacy::{cohesion_from_legacy, legacy_cohesion, local_depth, LocalDepthVector};
