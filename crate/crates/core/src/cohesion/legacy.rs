use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::spaces::{induced_triplet, DissimilaritySpace, TiePolicy};

use super::kernel::CohesionMatrix;

/// Cohesion as originally defined on unweighted, tie-free dissimilarities.
///
/// `C_{x,w}` averages, over opposing points `y != x`, the chance that a point
/// drawn uniformly from the local set `{z : min(d(x, z), d(y, z)) < d(x, y)}`
/// is `w` and sides with `x`.
pub fn legacy_cohesion(space: &DissimilaritySpace) -> Result<SquareMatrix> {
    let n = space.len();
    if n < 2 {
        return Err(Error::InvalidSpace(
            "legacy cohesion needs at least two points".into(),
        ));
    }
    if !space.has_uniform_mass() {
        return Err(Error::NonUniformMass);
    }
    induced_triplet(space, TiePolicy::strict())?;

    let mut c = SquareMatrix::zeros(n);
    let mut local = Vec::with_capacity(n);
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            let dxy = space.d(x, y);
            local.clear();
            local.extend((0..n).filter(|&z| space.d(x, z).min(space.d(y, z)) < dxy));
            let share = 1.0 / local.len() as f64;
            for &w in &local {
                if space.d(w, x) < space.d(w, y) {
                    c[(x, w)] += share;
                }
            }
        }
    }
    Ok(c.map(|v| v / (n - 1) as f64))
}

/// Converts original cohesion values to the mass-weighted definition for a
/// uniform space of `n` points: `(n - 1) C_{x,w}`, plus one half on the
/// diagonal.
pub fn cohesion_from_legacy(legacy: &SquareMatrix) -> SquareMatrix {
    let n = legacy.dim();
    let scale = n.saturating_sub(1) as f64;
    SquareMatrix::from_fn(n, |x, w| {
        scale * legacy.get(x, w) + if x == w { 0.5 } else { 0.0 }
    })
}

/// Local depth of every point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalDepthVector {
    pub labels: Vec<String>,
    /// `Σ_w C_{x,w}` over the original unweighted cohesion, when requested.
    pub legacy: Option<Vec<f64>>,
    /// `Σ_w C(x, w) p_w`.
    pub generalized: Vec<f64>,
}

/// Local depth from a cohesion matrix. Passing the (uniform-mass) space the
/// matrix came from also fills the legacy depths.
pub fn local_depth(
    c: &CohesionMatrix,
    legacy_source: Option<&DissimilaritySpace>,
) -> Result<LocalDepthVector> {
    let p = c.mass();
    let generalized = c
        .values()
        .rows()
        .map(|row| row.iter().zip(p).map(|(v, pw)| v * pw).sum())
        .collect();
    let legacy = match legacy_source {
        Some(space) => {
            if space.len() != c.len() {
                return Err(Error::InvalidSpace(format!(
                    "cohesion matrix has {} points but the space has {}",
                    c.len(),
                    space.len()
                )));
            }
            let m = legacy_cohesion(space)?;
            Some(m.rows().map(|r| r.iter().sum()).collect())
        }
        None => None,
    };
    Ok(LocalDepthVector {
        labels: c.labels().to_vec(),
        legacy,
        generalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohesion::cohesion_matrix;
    use crate::spaces::{default_labels, Metric};
    use approx::assert_abs_diff_eq;

    fn line(xs: &[f64]) -> DissimilaritySpace {
        let coords = xs.iter().map(|&x| vec![x]).collect();
        DissimilaritySpace::from_coords(default_labels(xs.len()), coords, Metric::Euclidean, None)
            .unwrap()
    }

    #[test]
    fn two_points_have_no_cross_cohesion() {
        let c = legacy_cohesion(&line(&[0.0, 1.0])).unwrap();
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(1, 0), 0.0);
        // the local set of (x1, x2) is both endpoints, each siding with itself
        assert_eq!(c.get(0, 0), 0.5);
    }

    #[test]
    fn rejects_weighted_and_tied_spaces() {
        let s = line(&[0.0, 1.0, 3.0])
            .with_mass(vec![0.5, 0.25, 0.25])
            .unwrap();
        assert!(matches!(legacy_cohesion(&s), Err(Error::NonUniformMass)));
        assert!(matches!(
            legacy_cohesion(&line(&[0.0, 1.0, 2.0])),
            Err(Error::Tie { .. })
        ));
        assert!(legacy_cohesion(&line(&[0.0])).is_err());
    }

    #[test]
    fn conversion_matches_weighted_definition() {
        let s = line(&[0.0, 0.3, 1.1, 2.9, 3.05, 7.0]);
        let legacy = legacy_cohesion(&s).unwrap();
        let t = induced_triplet(&s, TiePolicy::strict()).unwrap();
        let c = cohesion_matrix(&t).unwrap();
        assert!(cohesion_from_legacy(&legacy).max_abs_diff(c.values()) <= 1e-12);
    }

    #[test]
    fn legacy_depths_average_one_half() {
        let s = line(&[0.0, 0.3, 1.1, 2.9, 3.05, 7.0]);
        let t = induced_triplet(&s, TiePolicy::strict()).unwrap();
        let c = cohesion_matrix(&t).unwrap();
        let depth = local_depth(&c, Some(&s)).unwrap();
        let legacy = depth.legacy.unwrap();
        assert_abs_diff_eq!(legacy.iter().sum::<f64>() / 6.0, 0.5, epsilon = 1e-12);
        let mean: f64 = depth
            .generalized
            .iter()
            .zip(s.mass())
            .map(|(l, p)| l * p)
            .sum();
        assert_abs_diff_eq!(mean, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn generalized_depth_of_weighted_example() {
        let d = SquareMatrix::from_rows(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 3.0],
            vec![2.0, 3.0, 0.0],
        ])
        .unwrap();
        let s = DissimilaritySpace::new(default_labels(3), d, Some(vec![0.2, 0.3, 0.5])).unwrap();
        let c = cohesion_matrix(&induced_triplet(&s, TiePolicy::strict()).unwrap()).unwrap();
        let depth = local_depth(&c, None).unwrap();
        assert_abs_diff_eq!(depth.generalized[0], 1.6 * 0.2 + 0.5 * 0.3, epsilon = 1e-12);
        assert!(depth.legacy.is_none());
        assert!(local_depth(&c, Some(&s)).is_err());
    }

    #[test]
    fn single_point_depth() {
        let s = line(&[2.0]);
        let c = cohesion_matrix(&induced_triplet(&s, TiePolicy::default()).unwrap()).unwrap();
        assert_abs_diff_eq!(local_depth(&c, None).unwrap().generalized[0], 0.5);
    }
}
