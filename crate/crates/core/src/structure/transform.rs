use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::spaces::{induced_triplet, DissimilaritySpace, TiePolicy};

use super::pointlike::PointLikePartition;

/// Shrinks each block by its own factor and stretches every cross-block
/// dissimilarity by a common factor.
#[derive(Debug, Clone, PartialEq)]
pub struct XTransformation {
    partition: PointLikePartition,
    alphas: Vec<f64>,
    beta: f64,
}

impl XTransformation {
    /// `alphas[i]` scales block `i` of `partition.blocks()`.
    pub fn new(partition: PointLikePartition, alphas: Vec<f64>, beta: f64) -> Result<Self> {
        if alphas.len() != partition.len() {
            return Err(Error::InvalidTransformation(format!(
                "{} scale factors for {} blocks",
                alphas.len(),
                partition.len()
            )));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::InvalidTransformation(format!(
                "within-block factor {a} is outside (0, 1]"
            )));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::InvalidTransformation(format!(
                "cross-block factor {beta} is below 1"
            )));
        }
        Ok(XTransformation {
            partition,
            alphas,
            beta,
        })
    }

    pub fn partition(&self) -> &PointLikePartition {
        &self.partition
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Rescales `space` by `xt`. The partition must be point-like for the space
/// under the default tie policy; otherwise the comparisons are not preserved
/// and the call fails. Coordinates are dropped since the result is generally
/// not embeddable by the same map.
pub fn apply_x_transformation(
    space: &DissimilaritySpace,
    xt: &XTransformation,
) -> Result<DissimilaritySpace> {
    let n = space.len();
    if xt.partition.n_points() != n {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} points but the space has {n}",
            xt.partition.n_points()
        )));
    }
    let t = induced_triplet(space, TiePolicy::default())?;
    PointLikePartition::certify(&t, xt.partition.blocks().to_vec())?;

    let block = xt.partition.assignment();
    let d = SquareMatrix::from_fn(n, |x, y| {
        let factor = if block[x] == block[y] {
            xt.alphas[block[x]]
        } else {
            xt.beta
        };
        factor * space.d(x, y)
    });
    DissimilaritySpace::new(space.labels().to_vec(), d, Some(space.mass().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohesion::cohesion_matrix;
    use crate::spaces::{default_labels, Metric};

    fn two_clusters() -> DissimilaritySpace {
        let coords = [0.0, 0.4, 1.0, 10.0, 10.5]
            .iter()
            .map(|&x| vec![x])
            .collect();
        DissimilaritySpace::from_coords(default_labels(5), coords, Metric::Euclidean, None).unwrap()
    }

    fn partition() -> PointLikePartition {
        PointLikePartition::from_blocks(5, vec![vec![0, 1, 2], vec![3, 4]]).unwrap()
    }

    #[test]
    fn identity_transformation() {
        let s = two_clusters();
        let xt = XTransformation::new(partition(), vec![1.0, 1.0], 1.0).unwrap();
        let out = apply_x_transformation(&s, &xt).unwrap();
        assert_eq!(out.distances(), s.distances());
        assert_eq!(out.mass(), s.mass());
    }

    #[test]
    fn comparisons_and_cohesion_are_preserved() {
        let s = two_clusters();
        let xt = XTransformation::new(partition(), vec![0.3, 0.9], 4.0).unwrap();
        let out = apply_x_transformation(&s, &xt).unwrap();
        assert_eq!(out.d(0, 1), 0.4 * 0.3);
        assert_eq!(out.d(0, 3), 40.0);
        let before = induced_triplet(&s, TiePolicy::default()).unwrap();
        let after = induced_triplet(&out, TiePolicy::default()).unwrap();
        assert_eq!(before.to_dense(), after.to_dense());
        let c0 = cohesion_matrix(&before).unwrap();
        let c1 = cohesion_matrix(&after).unwrap();
        assert_eq!(c0.values(), c1.values());
    }

    #[test]
    fn invalid_factors() {
        assert!(XTransformation::new(partition(), vec![0.0, 1.0], 1.0).is_err());
        assert!(XTransformation::new(partition(), vec![1.2, 1.0], 1.0).is_err());
        assert!(XTransformation::new(partition(), vec![1.0, 1.0], 0.9).is_err());
        assert!(XTransformation::new(partition(), vec![1.0], 1.0).is_err());
    }

    #[test]
    fn non_point_like_partition_is_rejected() {
        let p = PointLikePartition::from_blocks(5, vec![vec![0, 1], vec![2, 3, 4]]).unwrap();
        let xt = XTransformation::new(p, vec![1.0, 1.0], 2.0).unwrap();
        assert!(matches!(
            apply_x_transformation(&two_clusters(), &xt),
            Err(Error::NotPointLike(_))
        ));
    }
}
