use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

use super::dissimilarity::{uniform_mass, validate_labels, validate_mass, DissimilaritySpace};
use super::triplet::{DenseTriplets, TieMode, TiePolicy, TripletComparisonSpace, ONE_THIRD};

/// Complementary marginals must sum to one within this tolerance.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// The triplet comparison function induced by a dissimilarity, on the lazy
/// backend. Call [`TripletComparisonSpace::to_dense`] for a tensor.
///
/// Under [`TieMode::Strict`], any two dissimilarities from a shared point that
/// are equal (within the policy's epsilon) are rejected.
pub fn induced_triplet(
    space: &DissimilaritySpace,
    policy: TiePolicy,
) -> Result<TripletComparisonSpace> {
    if policy.mode() == TieMode::Strict {
        check_no_ties(space, policy.epsilon())?;
    }
    Ok(TripletComparisonSpace::induced(
        space.labels().to_vec(),
        space.mass().to_vec(),
        space.distances().clone(),
        policy,
    ))
}

fn check_no_ties(space: &DissimilaritySpace, epsilon: f64) -> Result<()> {
    let n = space.len();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for x in 0..n {
        order.clear();
        order.extend((0..n).filter(|&y| y != x));
        order.sort_by(|&a, &b| space.d(x, a).total_cmp(&space.d(x, b)));
        for w in order.windows(2) {
            if space.d(x, w[1]) - space.d(x, w[0]) <= epsilon {
                return Err(Error::Tie {
                    x: space.label(x).to_owned(),
                    y: space.label(w[0]).to_owned(),
                    z: space.label(w[1]).to_owned(),
                });
            }
        }
    }
    Ok(())
}

/// One answer (or a weighted batch of identical answers) to "which two of
/// these three are most alike?".
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierResponse {
    /// The two points judged most alike.
    pub pair: (String, String),
    /// The remaining point.
    pub outlier: String,
    pub count: f64,
}

impl OutlierResponse {
    pub fn new(a: &str, b: &str, outlier: &str, count: f64) -> Self {
        OutlierResponse {
            pair: (a.to_owned(), b.to_owned()),
            outlier: outlier.to_owned(),
            count,
        }
    }
}

fn index_map(labels: &[String]) -> HashMap<&str, usize> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect()
}

fn lookup(map: &HashMap<&str, usize>, label: &str) -> Result<usize> {
    map.get(label)
        .copied()
        .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
}

fn sorted_triple(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

/// Triplet space from crowdsourced outlier responses.
///
/// For each triple, the weight of `k` as outlier is the fraction of that
/// triple's responses naming `k`. Triples without responses get `1/3` per
/// assignment. `mass = None` means uniform.
pub fn aggregate_outlier_responses(
    labels: Vec<String>,
    mass: Option<Vec<f64>>,
    responses: &[OutlierResponse],
) -> Result<TripletComparisonSpace> {
    let n = labels.len();
    validate_labels(&labels, n)?;
    let index = index_map(&labels);

    // counts[t][r] = weight naming the r-th smallest index of triple t the outlier
    let mut counts: BTreeMap<[usize; 3], [f64; 3]> = BTreeMap::new();
    for r in responses {
        let i = lookup(&index, &r.pair.0)?;
        let j = lookup(&index, &r.pair.1)?;
        let k = lookup(&index, &r.outlier)?;
        if i == j || i == k || j == k {
            return Err(Error::InvalidRecord(format!(
                "({}, {}; {}) does not name three distinct points",
                r.pair.0, r.pair.1, r.outlier
            )));
        }
        if !(r.count >= 0.0 && r.count.is_finite()) {
            return Err(Error::InvalidRecord(format!(
                "({}, {}; {}) has count {}; counts must be finite and non-negative",
                r.pair.0, r.pair.1, r.outlier, r.count
            )));
        }
        let triple = sorted_triple(i, j, k);
        let slot = triple
            .iter()
            .position(|&v| v == k)
            .expect("k is in its triple");
        counts.entry(triple).or_insert([0.0; 3])[slot] += r.count;
    }

    let mut tensor = DenseTriplets::new(n);
    for ([a, b, c], w) in counts {
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            continue;
        }
        tensor.set(b, c, a, w[0] / total);
        tensor.set(a, c, b, w[1] / total);
        tensor.set(a, b, c, w[2] / total);
    }
    TripletComparisonSpace::from_dense(labels, mass, tensor)
}

/// Triplet space from standard-query marginals.
///
/// `marginals[(x, y, z)]` is the weight of "`d(x, y) < d(x, z)`". When only one
/// of `(x, y, z)` and `(x, z, y)` is given the other is its complement; when
/// neither is given both are `1/2`. Each outlier weight combines the
/// concordant reading with a `1/3` share of the two circular (disconcordant)
/// readings.
pub fn aggregate_standard_queries(
    labels: Vec<String>,
    mass: Option<Vec<f64>>,
    marginals: &BTreeMap<(String, String, String), f64>,
) -> Result<TripletComparisonSpace> {
    let n = labels.len();
    validate_labels(&labels, n)?;
    let mass = mass.unwrap_or_else(|| uniform_mass(n));
    validate_mass(&mass, n)?;
    let index = index_map(&labels);

    let mut given: HashMap<(usize, usize, usize), f64> = HashMap::with_capacity(marginals.len());
    for ((x, y, z), &prob) in marginals {
        let key = (lookup(&index, x)?, lookup(&index, y)?, lookup(&index, z)?);
        if key.0 == key.1 || key.0 == key.2 || key.1 == key.2 {
            return Err(Error::InvalidMarginal(format!(
                "({x}, {y}, {z}) does not name three distinct points"
            )));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::InvalidMarginal(format!(
                "P(d({x}, {y}) < d({x}, {z})) = {prob} is outside [0, 1]"
            )));
        }
        given.insert(key, prob);
    }
    for (&(x, y, z), &prob) in &given {
        if let Some(&other) = given.get(&(x, z, y)) {
            if (prob + other - 1.0).abs() > MARGINAL_TOLERANCE {
                return Err(Error::InvalidMarginal(format!(
                    "P(d({0}, {1}) < d({0}, {2})) = {prob} and P(d({0}, {2}) < d({0}, {1})) = {other} do not sum to 1",
                    labels[x], labels[y], labels[z]
                )));
            }
        }
    }
    // One side of each complementary pair is canonical so the pair sums to
    // one exactly.
    let canonical = |x: usize, y: usize, z: usize| -> f64 {
        match (given.get(&(x, y, z)), given.get(&(x, z, y))) {
            (Some(&p), _) => p,
            (None, Some(&q)) => 1.0 - q,
            (None, None) => 0.5,
        }
    };
    let closer = |x: usize, y: usize, z: usize| -> f64 {
        if y < z {
            canonical(x, y, z)
        } else {
            1.0 - canonical(x, z, y)
        }
    };
    // T({x,y},z) = p_xyz p_yxz + (p_xyz p_yzx p_zxy + p_xzy p_yxz p_zyx) / 3
    let outlier = |x: usize, y: usize, z: usize| -> f64 {
        closer(x, y, z) * closer(y, x, z)
            + ONE_THIRD
                * (closer(x, y, z) * closer(y, z, x) * closer(z, x, y)
                    + closer(x, z, y) * closer(y, x, z) * closer(z, y, x))
    };

    let mut tensor = DenseTriplets::new(n);
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                tensor.set(x, y, z, outlier(x, y, z));
                tensor.set(x, z, y, outlier(x, z, y));
                tensor.set(y, z, x, outlier(y, z, x));
            }
        }
    }
    TripletComparisonSpace::from_dense(labels, Some(mass), tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use crate::spaces::default_labels;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn three_point(ab: f64, ac: f64, bc: f64) -> DissimilaritySpace {
        let d = SquareMatrix::from_rows(&[vec![0.0, ab, ac], vec![ab, 0.0, bc], vec![ac, bc, 0.0]])
            .unwrap();
        DissimilaritySpace::new(default_labels(3), d, None).unwrap()
    }

    #[test]
    fn induced_three_points() {
        let t = induced_triplet(&three_point(1.0, 2.0, 3.0), TiePolicy::strict()).unwrap();
        assert_eq!(t.value(0, 1, 2), 1.0);
        assert_eq!(t.value(0, 2, 1), 0.0);
        assert_eq!(t.value(1, 2, 0), 0.0);
    }

    #[test]
    fn induced_degenerate_entries() {
        let t = induced_triplet(&three_point(1.0, 2.0, 3.0), TiePolicy::default()).unwrap();
        for x in 0..3 {
            assert_eq!(t.value(x, x, x), 1.0 / 3.0);
            for y in (0..3).filter(|&y| y != x) {
                assert_eq!(t.value(x, x, y), 1.0);
                assert_eq!(t.value(x, y, x), 0.0);
            }
        }
    }

    #[test]
    fn induced_tie_split() {
        let t = induced_triplet(&three_point(1.0, 1.0, 2.0), TiePolicy::uniform_split()).unwrap();
        assert_eq!(t.value(0, 1, 2), 0.5);
        assert_eq!(t.value(0, 2, 1), 0.5);
        assert_eq!(t.value(1, 2, 0), 0.0);
    }

    #[test]
    fn strict_policy_names_the_tie() {
        let err = induced_triplet(&three_point(1.0, 1.0, 2.0), TiePolicy::strict()).unwrap_err();
        match err {
            Error::Tie { x, y, z } => {
                assert_eq!(x, "0");
                let mut yz = [y, z];
                yz.sort();
                assert_eq!(yz, ["1".to_string(), "2".to_string()]);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn strict_epsilon_catches_near_ties() {
        let s = three_point(1.0, 1.0 + 1e-9, 2.0);
        assert!(induced_triplet(&s, TiePolicy::strict()).is_ok());
        let eps = TiePolicy::new(TieMode::Strict, 1e-6).unwrap();
        assert!(matches!(induced_triplet(&s, eps), Err(Error::Tie { .. })));
    }

    #[test]
    fn dense_on_request_matches_lazy() {
        let t = induced_triplet(&three_point(1.0, 2.0, 3.0), TiePolicy::default()).unwrap();
        let dense = t.to_dense();
        assert!(t.is_induced());
        assert!(!dense.is_induced());
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(t.value(i, j, k), dense.value(i, j, k));
                }
            }
        }
    }

    #[test]
    fn crowdsourced_proportions() {
        // 7 say ■ and ● are alike, 3 say ● and ○ are alike
        let t = aggregate_outlier_responses(
            labels(&["sq", "dot", "ring"]),
            None,
            &[
                OutlierResponse::new("sq", "dot", "ring", 7.0),
                OutlierResponse::new("ring", "dot", "sq", 3.0),
            ],
        )
        .unwrap();
        approx::assert_abs_diff_eq!(t.value(0, 1, 2), 0.7, epsilon = 1e-15);
        approx::assert_abs_diff_eq!(t.value(1, 2, 0), 0.3, epsilon = 1e-15);
        assert_eq!(t.value(0, 2, 1), 0.0);
    }

    #[test]
    fn crowdsourced_missing_triple_is_uniform() {
        let t = aggregate_outlier_responses(
            labels(&["a", "b", "c", "d"]),
            None,
            &[OutlierResponse::new("a", "b", "c", 1.0)],
        )
        .unwrap();
        for (i, j, k) in [(0, 1, 3), (0, 3, 1), (1, 3, 0)] {
            assert_eq!(t.value(i, j, k), 1.0 / 3.0);
        }
        assert_eq!(t.value(0, 1, 2), 1.0);
        assert_eq!(t.value(1, 1, 2), 1.0);
        assert_eq!(t.value(1, 2, 2), 0.0);
    }

    #[test]
    fn crowdsourced_errors() {
        let l = labels(&["a", "b", "c"]);
        let unknown = aggregate_outlier_responses(
            l.clone(),
            None,
            &[OutlierResponse::new("a", "b", "zz", 1.0)],
        );
        assert!(matches!(unknown, Err(Error::UnknownLabel(s)) if s == "zz"));
        let repeated = aggregate_outlier_responses(
            l.clone(),
            None,
            &[OutlierResponse::new("a", "a", "b", 1.0)],
        );
        assert!(matches!(repeated, Err(Error::InvalidRecord(_))));
        let negative =
            aggregate_outlier_responses(l, None, &[OutlierResponse::new("a", "b", "c", -1.0)]);
        assert!(matches!(negative, Err(Error::InvalidRecord(_))));
    }

    fn marginals(entries: &[(&str, &str, &str, f64)]) -> BTreeMap<(String, String, String), f64> {
        entries
            .iter()
            .map(|&(x, y, z, p)| ((x.into(), y.into(), z.into()), p))
            .collect()
    }

    #[test]
    fn standard_concordant() {
        // d(x,y) smallest: x prefers y over z, y prefers x over z
        let m = marginals(&[
            ("x", "y", "z", 1.0),
            ("y", "x", "z", 1.0),
            ("z", "x", "y", 1.0),
        ]);
        let t = aggregate_standard_queries(labels(&["x", "y", "z"]), None, &m).unwrap();
        assert_eq!(t.value(0, 1, 2), 1.0);
        assert_eq!(t.value(0, 2, 1), 0.0);
        assert_eq!(t.value(1, 2, 0), 0.0);
    }

    #[test]
    fn standard_circular() {
        let m = marginals(&[
            ("x", "y", "z", 1.0),
            ("y", "z", "x", 1.0),
            ("z", "x", "y", 1.0),
        ]);
        let t = aggregate_standard_queries(labels(&["x", "y", "z"]), None, &m).unwrap();
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            assert_eq!(t.value(i, j, k), 1.0 / 3.0);
        }
    }

    #[test]
    fn standard_all_half() {
        let m = marginals(&[
            ("x", "y", "z", 0.5),
            ("y", "x", "z", 0.5),
            ("z", "x", "y", 0.5),
        ]);
        let t = aggregate_standard_queries(labels(&["x", "y", "z"]), None, &m).unwrap();
        let expected = 0.25 + (0.125 + 0.125) / 3.0;
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            approx::assert_abs_diff_eq!(t.value(i, j, k), expected, epsilon = 1e-15);
        }
        approx::assert_abs_diff_eq!(expected, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn standard_errors() {
        let l = labels(&["x", "y", "z"]);
        let out_of_range = marginals(&[("x", "y", "z", 1.2)]);
        assert!(matches!(
            aggregate_standard_queries(l.clone(), None, &out_of_range),
            Err(Error::InvalidMarginal(_))
        ));
        let inconsistent = marginals(&[("x", "y", "z", 0.7), ("x", "z", "y", 0.7)]);
        assert!(matches!(
            aggregate_standard_queries(l.clone(), None, &inconsistent),
            Err(Error::InvalidMarginal(_))
        ));
        let consistent = marginals(&[("x", "y", "z", 0.7), ("x", "z", "y", 0.3)]);
        assert!(aggregate_standard_queries(l.clone(), None, &consistent).is_ok());
        let unknown = marginals(&[("x", "y", "w", 0.7)]);
        assert!(matches!(
            aggregate_standard_queries(l, None, &unknown),
            Err(Error::UnknownLabel(_))
        ));
    }
}
