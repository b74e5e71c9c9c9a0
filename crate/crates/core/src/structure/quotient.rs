use crate::error::{Error, Result};
use crate::spaces::TripletComparisonSpace;

use super::pointlike::{normalize_subset, PointLikePartition};

/// A space in which every block of a point-like partition has been replaced
/// by one representative carrying the block's mass.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpace {
    representatives: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    space: TripletComparisonSpace,
}

impl QuotientSpace {
    /// Original index of each block's representative.
    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block masses.
    pub fn pbar(&self) -> &[f64] {
        self.space.mass()
    }

    pub fn space(&self) -> &TripletComparisonSpace {
        &self.space
    }

    pub fn into_space(self) -> TripletComparisonSpace {
        self.space
    }
}

/// Quotient of `t` by `partition`. Representatives default to the lowest
/// index of each block; the values do not depend on the choice.
pub fn quotient(
    t: &TripletComparisonSpace,
    partition: &PointLikePartition,
    reps: Option<&[usize]>,
) -> Result<QuotientSpace> {
    if partition.n_points() != t.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} points but the space has {}",
            partition.n_points(),
            t.len()
        )));
    }
    let blocks = PointLikePartition::certify(t, partition.blocks().to_vec())?
        .blocks()
        .to_vec();
    let representatives = match reps {
        None => blocks.iter().map(|b| b[0]).collect::<Vec<_>>(),
        Some(r) => {
            if r.len() != blocks.len() {
                return Err(Error::InvalidPartition(format!(
                    "{} representatives for {} blocks",
                    r.len(),
                    blocks.len()
                )));
            }
            for (i, (&x, b)) in r.iter().zip(&blocks).enumerate() {
                if b.binary_search(&x).is_err() {
                    return Err(Error::InvalidPartition(format!(
                        "representative {x} is not in block {i}"
                    )));
                }
            }
            r.to_vec()
        }
    };
    let pbar = blocks.iter().map(|b| t.block_mass(b)).collect();
    let space = t.restrict(&representatives, pbar);
    Ok(QuotientSpace {
        representatives,
        blocks,
        space,
    })
}

/// `t` restricted to `set` with masses renormalized to sum to one.
pub fn subspace(t: &TripletComparisonSpace, set: &[usize]) -> Result<TripletComparisonSpace> {
    let set = normalize_subset(t.len(), set)?;
    if set.len() == t.len() {
        return Ok(t.clone());
    }
    let m = t.block_mass(&set);
    if m <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mass = set.iter().map(|&x| t.mass()[x] / m).collect();
    Ok(t.restrict(&set, mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use crate::spaces::{
        default_labels, induced_triplet, validate_axioms, AxiomScope, DissimilaritySpace, Metric,
        TiePolicy,
    };
    use approx::assert_abs_diff_eq;

    fn clusters() -> TripletComparisonSpace {
        let coords = [0.0, 0.4, 1.0, 10.0, 10.5, 30.0]
            .iter()
            .map(|&x| vec![x])
            .collect();
        let s = DissimilaritySpace::from_coords(default_labels(6), coords, Metric::Euclidean, None)
            .unwrap();
        induced_triplet(&s, TiePolicy::default()).unwrap()
    }

    fn partition() -> PointLikePartition {
        PointLikePartition::from_blocks(6, vec![vec![0, 1, 2], vec![3, 4], vec![5]]).unwrap()
    }

    #[test]
    fn block_masses_and_default_representatives() {
        let q = quotient(&clusters(), &partition(), None).unwrap();
        assert_eq!(q.representatives(), &[0, 3, 5]);
        assert_abs_diff_eq!(q.pbar()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q.pbar()[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.pbar().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(q.space().labels(), &["0", "3", "5"]);
        assert!(validate_axioms(&q.space().to_dense(), &AxiomScope::Exhaustive).passed);
    }

    #[test]
    fn representative_choice_does_not_matter() {
        let t = clusters();
        let a = quotient(&t, &partition(), None).unwrap();
        let b = quotient(&t, &partition(), Some(&[2, 4, 5])).unwrap();
        let (da, db) = (a.space().to_dense(), b.space().to_dense());
        assert_eq!(da.dense_tensor(), db.dense_tensor());
    }

    #[test]
    fn singleton_partition_reproduces_the_space() {
        let t = clusters();
        let q = quotient(&t, &PointLikePartition::singletons(6), None).unwrap();
        assert_eq!(q.space().mass(), t.mass());
        assert_eq!(q.space().to_dense(), t.to_dense());
    }

    #[test]
    fn quotient_errors() {
        let t = clusters();
        assert!(matches!(
            quotient(&t, &partition(), Some(&[3, 0, 5])),
            Err(Error::InvalidPartition(_))
        ));
        let bad = PointLikePartition::from_blocks(6, vec![vec![0, 1], vec![2, 3, 4, 5]]).unwrap();
        assert!(matches!(
            quotient(&t, &bad, None),
            Err(Error::NotPointLike(_))
        ));
    }

    #[test]
    fn subspace_renormalizes() {
        let t = clusters();
        let s = subspace(&t, &[4, 3]).unwrap();
        assert_eq!(s.mass(), &[0.5, 0.5]);
        assert_eq!(s.labels(), &["3", "4"]);
        let whole = subspace(&t, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(whole.to_dense(), t.to_dense());
    }

    #[test]
    fn subspace_errors() {
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = DissimilaritySpace::new(default_labels(2), d, Some(vec![1.0, 0.0])).unwrap();
        let t = induced_triplet(&s, TiePolicy::default()).unwrap();
        assert!(matches!(subspace(&t, &[1]), Err(Error::ZeroMass)));
        assert!(matches!(subspace(&t, &[]), Err(Error::EmptySet)));
    }
}
