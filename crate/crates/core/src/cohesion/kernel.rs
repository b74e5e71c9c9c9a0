use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::spaces::TripletComparisonSpace;

/// Cohesion values `C(x, w)`, rows indexed by the focal point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CohesionMatrix {
    labels: Vec<String>,
    mass: Vec<f64>,
    values: SquareMatrix,
}

impl CohesionMatrix {
    /// Assembles a matrix from raw values. Panics if the dimensions disagree.
    pub fn from_parts(labels: Vec<String>, mass: Vec<f64>, values: SquareMatrix) -> Self {
        assert_eq!(labels.len(), values.dim());
        assert_eq!(mass.len(), values.dim());
        CohesionMatrix {
            labels,
            mass,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn get(&self, x: usize, w: usize) -> f64 {
        self.values.get(x, w)
    }

    pub fn values(&self) -> &SquareMatrix {
        &self.values
    }

    pub fn into_values(self) -> SquareMatrix {
        self.values
    }

    /// `Σ C(x, w) p_x p_w`, which is one half for any valid space.
    pub fn weighted_mean(&self) -> f64 {
        let p = &self.mass;
        self.values
            .rows()
            .zip(p)
            .map(|(row, &px)| px * row.iter().zip(p).map(|(c, pw)| c * pw).sum::<f64>())
            .sum()
    }
}

/// `U(x, y) = Σ_z (T({x, z}, y) + T({y, z}, x)) p_z`, the mass of the fuzzy
/// `(x, y)`-local set.
pub fn local_mass(t: &TripletComparisonSpace, x: usize, y: usize) -> f64 {
    t.mass()
        .iter()
        .enumerate()
        .map(|(z, &pz)| (t.value(x, z, y) + t.value(y, z, x)) * pz)
        .sum()
}

/// All local masses. Symmetric; rows are computed in parallel.
pub fn local_mass_matrix(t: &TripletComparisonSpace) -> SquareMatrix {
    let n = t.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| (x..n).map(|y| local_mass(t, x, y)).collect())
        .collect();
    let mut u = SquareMatrix::zeros(n);
    for (x, row) in upper.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let y = x + offset;
            u[(x, y)] = v;
            u[(y, x)] = v;
        }
    }
    u
}

/// `C(x, w) = Σ_y T({x, w}, y) / U(x, y) · p_y`.
///
/// Each focal row is independent: the outer loop runs over opposing points
/// `y`, reusing `U(x, y)` across every `w`. Opposing points of zero mass
/// contribute nothing, even where their local mass vanishes.
pub fn cohesion_matrix(t: &TripletComparisonSpace) -> Result<CohesionMatrix> {
    let n = t.len();
    let p = t.mass();
    let u = local_mass_matrix(t);
    let mut values = SquareMatrix::zeros(n);
    if n > 0 {
        values
            .as_mut_slice()
            .par_chunks_mut(n)
            .enumerate()
            .try_for_each(|(x, row)| {
                for (y, &py) in p.iter().enumerate() {
                    if py == 0.0 {
                        continue;
                    }
                    let uxy = u.get(x, y);
                    if uxy.is_nan() || uxy <= 0.0 {
                        return Err(Error::Inconsistent(format!(
                            "U({}, {}) = {uxy} while p_{} = {py} > 0",
                            t.label(x),
                            t.label(y),
                            t.label(y)
                        )));
                    }
                    let scale = py / uxy;
                    for (w, c) in row.iter_mut().enumerate() {
                        let v = t.value(x, w, y);
                        if v != 0.0 {
                            *c += v * scale;
                        }
                    }
                }
                Ok(())
            })?;
    }
    Ok(CohesionMatrix {
        labels: t.labels().to_vec(),
        mass: p.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{
        default_labels, induced_triplet, DenseTriplets, DissimilaritySpace, TiePolicy,
    };
    use approx::assert_abs_diff_eq;

    fn three_point(mass: [f64; 3]) -> TripletComparisonSpace {
        // d(1,2) < d(1,3) < d(2,3)
        let d = SquareMatrix::from_rows(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 3.0],
            vec![2.0, 3.0, 0.0],
        ])
        .unwrap();
        let s = DissimilaritySpace::new(default_labels(3), d, Some(mass.to_vec())).unwrap();
        induced_triplet(&s, TiePolicy::strict()).unwrap()
    }

    #[test]
    fn self_local_mass() {
        let t = three_point([0.2, 0.3, 0.5]);
        for x in 0..3 {
            assert_abs_diff_eq!(
                local_mass(&t, x, x),
                2.0 * t.mass()[x] / 3.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn two_point_local_mass_is_one() {
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = DissimilaritySpace::new(default_labels(2), d, Some(vec![0.9, 0.1])).unwrap();
        let t = induced_triplet(&s, TiePolicy::default()).unwrap();
        assert_abs_diff_eq!(local_mass(&t, 0, 1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(local_mass(&t, 1, 0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weighted_three_point_local_mass() {
        let t = three_point([0.2, 0.3, 0.5]);
        assert_abs_diff_eq!(local_mass(&t, 0, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(local_mass(&t, 0, 2), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weighted_three_point_cohesion() {
        let c = cohesion_matrix(&three_point([0.2, 0.3, 0.5])).unwrap();
        let expected = [[1.6, 0.5, 0.0], [0.5, 1.4, 0.0], [0.0, 0.0, 1.0]];
        for (x, row) in expected.iter().enumerate() {
            for (w, &v) in row.iter().enumerate() {
                assert_abs_diff_eq!(c.get(x, w), v, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(c.weighted_mean(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn single_point_self_cohesion_is_half() {
        let t = TripletComparisonSpace::from_dense(default_labels(1), None, DenseTriplets::new(1))
            .unwrap();
        let c = cohesion_matrix(&t).unwrap();
        assert_abs_diff_eq!(c.get(0, 0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn weighted_responses_example() {
        // T({■,●},○) = α, T({●,○},■) = 1 − α
        let alpha = 0.7;
        let mut d = DenseTriplets::new(3);
        d.set(0, 1, 2, alpha);
        d.set(1, 2, 0, 1.0 - alpha);
        d.set(0, 2, 1, 0.0);
        let t = TripletComparisonSpace::from_dense(default_labels(3), None, d).unwrap();
        let c = cohesion_matrix(&t).unwrap();
        assert_abs_diff_eq!(c.get(0, 1), alpha / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.get(2, 1), (1.0 - alpha) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_mass_points_are_inert_as_opponents() {
        let t = three_point([0.4, 0.6, 0.0]);
        let c = cohesion_matrix(&t).unwrap();
        assert!(c
            .values()
            .as_slice()
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0));
        assert_abs_diff_eq!(c.weighted_mean(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn inconsistent_tensor_reports_error() {
        // Breaks the degenerate entries so that U(0, 1) = 0 with p_1 > 0.
        let mut d = DenseTriplets::new(2);
        d.set(0, 0, 1, 0.0);
        d.set(1, 1, 0, 0.0);
        let t = TripletComparisonSpace::from_dense(default_labels(2), None, d).unwrap();
        assert!(matches!(cohesion_matrix(&t), Err(Error::Inconsistent(_))));
    }
}
