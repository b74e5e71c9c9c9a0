//! Point-like sets, their laminar family, quotients and subspaces.

mod pointlike;
mod quotient;
mod transform;

pub use pointlike::{
    count_point_like_partitions, enumerate_exhaustive, enumerate_point_like, is_point_like,
    point_like_partitions, PointLikeFamily, PointLikePartition, DEFAULT_BRUTE_FORCE_CAP,
    POINT_LIKE_TOLERANCE,
};
pub use quotient::{quotient, subspace, QuotientSpace};
pub use transform::{apply_x_transformation, XTransformation};
