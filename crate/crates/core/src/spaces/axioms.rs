use serde::Serialize;

use super::triplet::TripletComparisonSpace;

/// Residual allowed on each axiom identity.
pub const AXIOM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `T({x, y}, x) = 0` for `y != x`.
    OutlierExcluded,
    /// `T({x, y}, z) = T({y, x}, z)`.
    PairSymmetry,
    /// The three outlier weights of a triple sum to one.
    UnitSum,
    /// Every entry lies in `[0, 1]`.
    Range,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub triple: [usize; 3],
    pub axiom: Axiom,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub passed: bool,
    pub triples_checked: usize,
    pub violations: Vec<Violation>,
}

/// Which triples [`validate_axioms`] visits.
#[derive(Debug, Clone, Default)]
pub enum AxiomScope {
    /// Every multiset `{x, y, z}`; `O(n^3)`.
    #[default]
    Exhaustive,
    /// The given triples plus every degenerate triple.
    Sample(Vec<[usize; 3]>),
}

/// Checks the triplet comparison axioms. Violations are reported, never raised.
pub fn validate_axioms(t: &TripletComparisonSpace, scope: &AxiomScope) -> AxiomReport {
    let n = t.len();
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut visit = |x: usize, y: usize, z: usize| {
        checked += 1;
        check_triple(t, [x, y, z], &mut violations);
    };
    match scope {
        AxiomScope::Exhaustive => {
            for x in 0..n {
                for y in x..n {
                    for z in y..n {
                        visit(x, y, z);
                    }
                }
            }
        }
        AxiomScope::Sample(triples) => {
            for x in 0..n {
                visit(x, x, x);
                for y in x + 1..n {
                    visit(x, x, y);
                    visit(x, y, y);
                }
            }
            for &[x, y, z] in triples {
                if x < n && y < n && z < n && x != y && y != z && x != z {
                    visit(x, y, z);
                }
            }
        }
    }
    AxiomReport {
        passed: violations.is_empty(),
        triples_checked: checked,
        violations,
    }
}

fn check_triple(t: &TripletComparisonSpace, triple: [usize; 3], out: &mut Vec<Violation>) {
    let [x, y, z] = triple;
    let mut flag = |axiom, residual: f64| {
        if residual > AXIOM_TOLERANCE {
            out.push(Violation {
                triple,
                axiom,
                residual,
            });
        }
    };

    let assignments = [(x, y, z), (x, z, y), (y, z, x)];
    let mut sum = 0.0;
    for &(a, b, c) in &assignments {
        let v = t.value(a, b, c);
        sum += v;
        flag(Axiom::Range, (-v).max(v - 1.0).max(0.0));
        flag(Axiom::PairSymmetry, (v - t.value(b, a, c)).abs());
        if c == a && b != a {
            flag(Axiom::OutlierExcluded, v.abs());
        }
    }
    flag(Axiom::UnitSum, (sum - 1.0).abs());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{default_labels, DenseTriplets};

    #[test]
    fn unit_sum_violation_residual() {
        let mut d = DenseTriplets::new(3);
        d.set(0, 1, 2, 0.6);
        d.set(0, 2, 1, 0.6);
        d.set(1, 2, 0, 0.0);
        let t = TripletComparisonSpace::from_dense(default_labels(3), None, d).unwrap();
        let report = validate_axioms(&t, &AxiomScope::Exhaustive);
        assert!(!report.passed);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.axiom, Axiom::UnitSum);
        assert_eq!(v.triple, [0, 1, 2]);
        approx::assert_abs_diff_eq!(v.residual, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_and_range_violations() {
        let mut d = DenseTriplets::new(2);
        d.set(0, 1, 0, 0.25);
        d.set(0, 0, 1, 1.5);
        let t = TripletComparisonSpace::from_dense(default_labels(2), None, d).unwrap();
        let report = validate_axioms(&t, &AxiomScope::Sample(vec![]));
        let kinds: Vec<Axiom> = report.violations.iter().map(|v| v.axiom).collect();
        assert!(kinds.contains(&Axiom::OutlierExcluded));
        assert!(kinds.contains(&Axiom::Range));
        assert!(kinds.contains(&Axiom::UnitSum));
    }

    #[test]
    fn default_dense_tensor_passes() {
        let t = TripletComparisonSpace::from_dense(default_labels(5), None, DenseTriplets::new(5))
            .unwrap();
        let report = validate_axioms(&t, &AxiomScope::Exhaustive);
        assert!(report.passed, "{:?}", report.violations);
        // multisets of size 3 drawn from 5 points
        assert_eq!(report.triples_checked, 35);
    }
}
