use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Masses must sum to one within this tolerance.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Distance used to turn coordinates into dissimilarities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

/// A finite labeled point set with a symmetric dissimilarity and a
/// probability mass function.
///
/// Every point is strictly closer to itself than to any other point. There is
/// no metric requirement: only comparisons between dissimilarities are ever
/// consumed downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilaritySpace {
    labels: Vec<String>,
    dist: SquareMatrix,
    mass: Vec<f64>,
    coords: Option<Vec<Vec<f64>>>,
}

impl DissimilaritySpace {
    /// Builds a space from a dissimilarity matrix. `mass = None` means uniform.
    pub fn new(labels: Vec<String>, dist: SquareMatrix, mass: Option<Vec<f64>>) -> Result<Self> {
        let n = dist.dim();
        let mass = mass.unwrap_or_else(|| uniform_mass(n));
        validate_labels(&labels, n)?;
        validate_dissimilarity(&dist, &labels)?;
        validate_mass(&mass, n)?;
        Ok(DissimilaritySpace {
            labels,
            dist,
            mass,
            coords: None,
        })
    }

    /// Builds a space from coordinate rows, deriving `d` with `metric`.
    pub fn from_coords(
        labels: Vec<String>,
        coords: Vec<Vec<f64>>,
        metric: Metric,
        mass: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = coords.len();
        if let Some(k) = coords.first().map(Vec::len) {
            if let Some((i, _)) = coords.iter().enumerate().find(|(_, c)| c.len() != k) {
                return Err(Error::InvalidSpace(format!(
                    "coordinate row {i} has a different dimension than row 0"
                )));
            }
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace("coordinates must be finite".into()));
        }
        let dist = SquareMatrix::from_fn(n, |i, j| {
            if i == j {
                0.0
            } else {
                metric.distance(&coords[i], &coords[j])
            }
        });
        let mut space = DissimilaritySpace::new(labels, dist, mass)?;
        space.coords = Some(coords);
        Ok(space)
    }

    /// Same points and dissimilarities with a different mass function.
    pub fn with_mass(mut self, mass: Vec<f64>) -> Result<Self> {
        validate_mass(&mass, self.len())?;
        self.mass = mass;
        Ok(self)
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

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn distances(&self) -> &SquareMatrix {
        &self.dist
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    /// `m(S)`, the total mass of a subset.
    pub fn block_mass(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.mass[i]).sum()
    }

    pub fn has_uniform_mass(&self) -> bool {
        is_uniform(&self.mass)
    }
}

pub(crate) fn uniform_mass(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub(crate) fn is_uniform(mass: &[f64]) -> bool {
    match mass.first() {
        Some(&first) => mass.iter().all(|&p| (p - first).abs() <= MASS_TOLERANCE),
        None => true,
    }
}

/// `"0"`, `"1"`, ... used whenever input carries no labels.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

pub(crate) fn validate_labels(labels: &[String], n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpace(
            "a space needs at least one point".into(),
        ));
    }
    if labels.len() != n {
        return Err(Error::InvalidSpace(format!(
            "{} labels given for {n} points",
            labels.len()
        )));
    }
    let mut seen = HashSet::with_capacity(n);
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

pub(crate) fn validate_mass(mass: &[f64], n: usize) -> Result<()> {
    if mass.len() != n {
        return Err(Error::InvalidMass(format!(
            "{} masses given for {n} points",
            mass.len()
        )));
    }
    if let Some((i, p)) = mass
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::InvalidMass(format!(
            "mass of point {i} is {p}; masses must be finite and non-negative"
        )));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidMass(format!("masses sum to {total}, not 1")));
    }
    Ok(())
}

fn validate_dissimilarity(dist: &SquareMatrix, labels: &[String]) -> Result<()> {
    let n = dist.dim();
    for i in 0..n {
        for j in 0..n {
            let v = dist.get(i, j);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "d({}, {}) = {v}; dissimilarities must be finite and non-negative",
                    labels[i], labels[j]
                )));
            }
            if v != dist.get(j, i) {
                return Err(Error::InvalidSpace(format!(
                    "d({}, {}) = {v} but d({}, {}) = {}",
                    labels[i],
                    labels[j],
                    labels[j],
                    labels[i],
                    dist.get(j, i)
                )));
            }
            if i != j && dist.get(i, i) >= v {
                return Err(Error::InvalidSpace(format!(
                    "d({0}, {0}) = {1} is not strictly below d({0}, {2}) = {v}",
                    labels[i],
                    dist.get(i, i),
                    labels[j]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> DissimilaritySpace {
        let coords = xs.iter().map(|&x| vec![x]).collect();
        DissimilaritySpace::from_coords(default_labels(xs.len()), coords, Metric::Euclidean, None)
            .unwrap()
    }

    #[test]
    fn coords_give_symmetric_distances() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(s.d(0, 2), 2.0 + 1.0);
        assert_eq!(s.d(2, 1), 2.0);
        assert_eq!(s.mass(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn manhattan_metric() {
        assert_eq!(Metric::Manhattan.distance(&[0.0, 0.0], &[3.0, -4.0]), 7.0);
        assert_eq!(Metric::Euclidean.distance(&[0.0, 0.0], &[3.0, -4.0]), 5.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let err = DissimilaritySpace::new(default_labels(2), d, None).unwrap_err();
        assert!(matches!(err, Error::InvalidSpace(_)), "{err}");
    }

    #[test]
    fn rejects_negative() {
        let d = SquareMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(DissimilaritySpace::new(default_labels(2), d, None).is_err());
    }

    #[test]
    fn rejects_non_minimal_self_dissimilarity() {
        // coincident points
        let d = SquareMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(DissimilaritySpace::new(default_labels(2), d, None).is_err());
    }

    #[test]
    fn rejects_bad_mass() {
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let labels = default_labels(2);
        assert!(DissimilaritySpace::new(labels.clone(), d.clone(), Some(vec![0.5, 0.6])).is_err());
        assert!(DissimilaritySpace::new(labels.clone(), d.clone(), Some(vec![1.5, -0.5])).is_err());
        assert!(DissimilaritySpace::new(labels.clone(), d.clone(), Some(vec![1.0])).is_err());
        // zero mass is allowed
        assert!(DissimilaritySpace::new(labels, d, Some(vec![1.0, 0.0])).is_ok());
    }

    #[test]
    fn rejects_empty_and_duplicate_labels() {
        assert!(DissimilaritySpace::new(vec![], SquareMatrix::zeros(0), None).is_err());
        let d = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let err = DissimilaritySpace::new(vec!["a".into(), "a".into()], d, None).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel(_)));
    }

    #[test]
    fn single_point_is_valid() {
        let s = line(&[4.0]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.mass(), &[1.0]);
    }
}
