use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

use super::dissimilarity::{uniform_mass, validate_labels, validate_mass};

pub(crate) const ONE_THIRD: f64 = 1.0 / 3.0;

/// How equal dissimilarities are treated when inducing outlier comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieMode {
    /// Equal distances from a shared point are an error.
    Strict,
    /// Pairs tied at the minimum of a triple share its unit of mass equally.
    #[default]
    UniformSplit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TiePolicy {
    mode: TieMode,
    epsilon: f64,
}

impl TiePolicy {
    /// `epsilon` widens "equal" to `|a - b| <= epsilon`; zero means exact.
    pub fn new(mode: TieMode, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "tie epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        Ok(TiePolicy { mode, epsilon })
    }

    pub fn strict() -> Self {
        TiePolicy {
            mode: TieMode::Strict,
            epsilon: 0.0,
        }
    }

    pub fn uniform_split() -> Self {
        TiePolicy::default()
    }

    pub fn mode(&self) -> TieMode {
        self.mode
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Explicit tensor of outlier weights, stored once per unordered pair.
///
/// Layout: `values[pair_index(i, j) * n + k] = T({i, j}, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTriplets {
    n: usize,
    values: Vec<f64>,
}

#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

impl DenseTriplets {
    /// Degenerate entries are filled as the axioms force them; every distinct
    /// triple starts at `1/3` per assignment (no information).
    pub fn new(n: usize) -> Self {
        let mut t = DenseTriplets {
            n,
            values: vec![ONE_THIRD; n * (n + 1) / 2 * n],
        };
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    t.set(x, x, y, 1.0);
                    t.set(x, y, x, 0.0);
                    t.set(x, y, y, 0.0);
                }
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[pair_index(i, j) * self.n + k]
    }

    /// Sets `T({i, j}, k)`; the pair is unordered.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.values[pair_index(i, j) * self.n + k] = v;
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Backend {
    Dense(DenseTriplets),
    Induced {
        dist: SquareMatrix,
        policy: TiePolicy,
    },
}

/// `(X, T, p)`: points, a triplet comparison function `T({x, y}, z)` giving the
/// weight with which `z` is the outlier of the triple, and a mass function.
///
/// Spaces induced by a dissimilarity keep the matrix and evaluate entries on
/// demand; all other spaces hold a [`DenseTriplets`] tensor. Both are
/// immutable and `Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletComparisonSpace {
    labels: Vec<String>,
    mass: Vec<f64>,
    backend: Backend,
}

impl TripletComparisonSpace {
    /// Wraps an explicit tensor. Axioms are not checked here; see
    /// [`validate_axioms`](crate::spaces::validate_axioms).
    pub fn from_dense(
        labels: Vec<String>,
        mass: Option<Vec<f64>>,
        tensor: DenseTriplets,
    ) -> Result<Self> {
        let n = tensor.len();
        let mass = mass.unwrap_or_else(|| uniform_mass(n));
        validate_labels(&labels, n)?;
        validate_mass(&mass, n)?;
        Ok(TripletComparisonSpace {
            labels,
            mass,
            backend: Backend::Dense(tensor),
        })
    }

    pub(crate) fn induced(
        labels: Vec<String>,
        mass: Vec<f64>,
        dist: SquareMatrix,
        policy: TiePolicy,
    ) -> Self {
        TripletComparisonSpace {
            labels,
            mass,
            backend: Backend::Induced { dist, policy },
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

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn block_mass(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.mass[i]).sum()
    }

    /// Whether entries are computed from a retained dissimilarity matrix.
    pub fn is_induced(&self) -> bool {
        matches!(self.backend, Backend::Induced { .. })
    }

    /// The dissimilarity matrix of an induced space.
    pub fn induced_distances(&self) -> Option<&SquareMatrix> {
        match &self.backend {
            Backend::Induced { dist, .. } => Some(dist),
            Backend::Dense(_) => None,
        }
    }

    pub fn tie_policy(&self) -> Option<TiePolicy> {
        match &self.backend {
            Backend::Induced { policy, .. } => Some(*policy),
            Backend::Dense(_) => None,
        }
    }

    /// `T({i, j}, k)`.
    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        match &self.backend {
            Backend::Dense(t) => t.get(i, j, k),
            Backend::Induced { dist, policy } => induced_value(dist, policy.epsilon, i, j, k),
        }
    }

    /// Same points and comparisons with a different mass function.
    pub fn with_mass(mut self, mass: Vec<f64>) -> Result<Self> {
        validate_mass(&mass, self.len())?;
        self.mass = mass;
        Ok(self)
    }

    /// Materializes every entry into a dense tensor.
    pub fn to_dense(&self) -> TripletComparisonSpace {
        match &self.backend {
            Backend::Dense(_) => self.clone(),
            Backend::Induced { .. } => {
                let n = self.len();
                let mut t = DenseTriplets::new(n);
                for i in 0..n {
                    for j in i..n {
                        for k in 0..n {
                            t.set(i, j, k, self.value(i, j, k));
                        }
                    }
                }
                TripletComparisonSpace {
                    labels: self.labels.clone(),
                    mass: self.mass.clone(),
                    backend: Backend::Dense(t),
                }
            }
        }
    }

    /// The tensor, when the backend is dense.
    pub fn dense_tensor(&self) -> Option<&DenseTriplets> {
        match &self.backend {
            Backend::Dense(t) => Some(t),
            Backend::Induced { .. } => None,
        }
    }

    /// Comparisons restricted to `indices` (in order) carrying `mass`.
    ///
    /// Restricting an induced space is the space induced by the restricted
    /// matrix, so the lazy backend is preserved.
    pub(crate) fn restrict(&self, indices: &[usize], mass: Vec<f64>) -> TripletComparisonSpace {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let backend = match &self.backend {
            Backend::Induced { dist, policy } => Backend::Induced {
                dist: dist.select(indices),
                policy: *policy,
            },
            Backend::Dense(src) => {
                let m = indices.len();
                let mut t = DenseTriplets::new(m);
                for a in 0..m {
                    for b in a..m {
                        for c in 0..m {
                            t.set(a, b, c, src.get(indices[a], indices[b], indices[c]));
                        }
                    }
                }
                Backend::Dense(t)
            }
        };
        TripletComparisonSpace {
            labels,
            mass,
            backend,
        }
    }
}

/// Outlier weight of `k` against the pair `{i, j}` under a dissimilarity.
///
/// Pairs whose dissimilarity lies within `epsilon` of the triple's minimum
/// share the unit of mass equally.
#[inline]
pub(crate) fn induced_value(d: &SquareMatrix, epsilon: f64, i: usize, j: usize, k: usize) -> f64 {
    if i == j {
        return if k == i { ONE_THIRD } else { 1.0 };
    }
    if k == i || k == j {
        return 0.0;
    }
    let a = d.get(i, j);
    let b = d.get(i, k);
    let c = d.get(j, k);
    if epsilon == 0.0 {
        if a < b && a < c {
            return 1.0;
        }
        if a > b || a > c {
            return 0.0;
        }
        let tied = 1 + usize::from(a == b) + usize::from(a == c);
        return 1.0 / tied as f64;
    }
    let min = a.min(b).min(c);
    if a - min > epsilon {
        return 0.0;
    }
    let tied = 1 + usize::from(b - min <= epsilon) + usize::from(c - min <= epsilon);
    1.0 / tied as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(ab: f64, ac: f64, bc: f64) -> SquareMatrix {
        SquareMatrix::from_rows(&[vec![0.0, ab, ac], vec![ab, 0.0, bc], vec![ac, bc, 0.0]]).unwrap()
    }

    #[test]
    fn pair_index_is_a_bijection_on_unordered_pairs() {
        let n = 7;
        let mut seen = vec![false; n * (n + 1) / 2];
        for j in 0..n {
            for i in 0..=j {
                let p = pair_index(i, j);
                assert!(!seen[p]);
                seen[p] = true;
                assert_eq!(p, pair_index(j, i));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn induced_two_way_tie() {
        // d(x,y) = d(x,z) < d(y,z)
        let d = triangle(1.0, 1.0, 2.0);
        assert_eq!(induced_value(&d, 0.0, 0, 1, 2), 0.5);
        assert_eq!(induced_value(&d, 0.0, 0, 2, 1), 0.5);
        assert_eq!(induced_value(&d, 0.0, 1, 2, 0), 0.0);
    }

    #[test]
    fn induced_three_way_tie() {
        let d = triangle(1.0, 1.0, 1.0);
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            assert_eq!(induced_value(&d, 0.0, i, j, k), ONE_THIRD);
        }
    }

    #[test]
    fn epsilon_widens_ties() {
        let d = triangle(1.0, 1.05, 2.0);
        assert_eq!(induced_value(&d, 0.0, 0, 1, 2), 1.0);
        assert_eq!(induced_value(&d, 0.1, 0, 1, 2), 0.5);
        assert_eq!(induced_value(&d, 0.1, 0, 2, 1), 0.5);
        assert_eq!(induced_value(&d, 0.1, 1, 2, 0), 0.0);
    }

    #[test]
    fn dense_defaults_follow_axioms() {
        let t = DenseTriplets::new(3);
        assert_eq!(t.get(1, 1, 1), ONE_THIRD);
        assert_eq!(t.get(1, 1, 2), 1.0);
        assert_eq!(t.get(1, 2, 1), 0.0);
        assert_eq!(t.get(2, 1, 2), 0.0);
        assert_eq!(t.get(0, 1, 2), ONE_THIRD);
    }

    #[test]
    fn negative_epsilon_rejected() {
        assert!(TiePolicy::new(TieMode::UniformSplit, -1e-3).is_err());
        assert!(TiePolicy::new(TieMode::UniformSplit, f64::NAN).is_err());
        assert_eq!(TiePolicy::new(TieMode::Strict, 0.5).unwrap().epsilon(), 0.5);
    }
}
