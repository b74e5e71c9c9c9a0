//! Executable property checks and a brute-force cohesion oracle.

use serde::Serialize;

use crate::cohesion::{cohesion_matrix, local_mass_matrix, CohesionMatrix};
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::spaces::{induced_triplet, DissimilaritySpace, TiePolicy, TripletComparisonSpace};
use crate::structure::{is_point_like, quotient, subspace, PointLikePartition};

/// Tolerance for identities that only re-sum the same terms.
pub const RESUM_TOLERANCE: f64 = 1e-12;
/// Tolerance for identities that compare values from two different spaces.
pub const CROSS_SPACE_TOLERANCE: f64 = 1e-10;

const MAX_DETAILS: usize = 25;
const ORACLE_MAX_POINTS: usize = 2000;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Violating instances, truncated.
    pub details: Vec<String>,
}

struct Tracker {
    name: String,
    tolerance: f64,
    max_residual: f64,
    violations: usize,
    details: Vec<String>,
}

impl Tracker {
    fn new(name: &str, tolerance: f64) -> Self {
        Tracker {
            name: name.to_string(),
            tolerance,
            max_residual: 0.0,
            violations: 0,
            details: Vec::new(),
        }
    }

    fn observe(&mut self, residual: f64, describe: impl FnOnce() -> String) {
        // NaN must count as a failure
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = if residual.is_nan() {
                f64::INFINITY
            } else {
                residual
            };
        }
        if residual.is_nan() || residual > self.tolerance {
            self.violations += 1;
            if self.details.len() < MAX_DETAILS {
                self.details
                    .push(format!("{} (residual {residual:e})", describe()));
            }
        }
    }

    fn finish(mut self) -> CheckResult {
        if self.violations > self.details.len() {
            self.details
                .push(format!("... {} more", self.violations - self.details.len()));
        }
        CheckResult {
            name: self.name,
            passed: self.violations == 0,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            details: self.details,
        }
    }
}

/// Cohesion by direct evaluation of the defining sums, sharing no code with
/// the optimized kernel.
#[allow(clippy::needless_range_loop)]
pub fn brute_force_cohesion(t: &TripletComparisonSpace) -> Result<CohesionMatrix> {
    let n = t.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::Capability(format!(
            "the brute-force oracle is limited to {ORACLE_MAX_POINTS} points, got {n}"
        )));
    }
    let p = t.mass();
    let mut u = SquareMatrix::zeros(n);
    for x in 0..n {
        for y in 0..n {
            let mut s = 0.0;
            for z in 0..n {
                s += (t.value(x, z, y) + t.value(y, z, x)) * p[z];
            }
            u[(x, y)] = s;
        }
    }
    let mut c = SquareMatrix::zeros(n);
    for x in 0..n {
        for w in 0..n {
            let mut s = 0.0;
            for y in 0..n {
                if p[y] == 0.0 {
                    continue;
                }
                if u[(x, y)] <= 0.0 {
                    return Err(Error::Inconsistent(format!(
                        "local mass of ({x}, {y}) is not positive"
                    )));
                }
                s += t.value(x, w, y) / u[(x, y)] * p[y];
            }
            c[(x, w)] = s;
        }
    }
    Ok(CohesionMatrix::from_parts(
        t.labels().to_vec(),
        p.to_vec(),
        c,
    ))
}

/// Weighted mean of the matrix is one half.
pub fn check_average_half(c: &CohesionMatrix) -> CheckResult {
    let mut tr = Tracker::new("average_half", CROSS_SPACE_TOLERANCE);
    let mean = c.weighted_mean();
    tr.observe((mean - 0.5).abs(), || format!("weighted mean {mean}"));
    tr.finish()
}

/// Optimized kernel agrees with the oracle entrywise.
pub fn check_kernel_oracle(t: &TripletComparisonSpace) -> Result<CheckResult> {
    let fast = cohesion_matrix(t)?;
    let slow = brute_force_cohesion(t)?;
    let mut tr = Tracker::new("kernel_oracle", RESUM_TOLERANCE);
    for x in 0..t.len() {
        for w in 0..t.len() {
            let r = (fast.get(x, w) - slow.get(x, w)).abs();
            tr.observe(r, || format!("C({x}, {w})"));
        }
    }
    Ok(tr.finish())
}

/// `C(x, x) > C(x, w)` for `w != x` and `p_x > 0`, and `C(x, x') > C(x, w)` whenever `x, x'`
/// share a point-like block and `w` lies outside it with positive mass.
pub fn check_dominance(
    t: &TripletComparisonSpace,
    c: &CohesionMatrix,
    partition: Option<&PointLikePartition>,
) -> CheckResult {
    let n = t.len();
    let mut tr = Tracker::new("dominance", 0.0);
    let p = t.mass();
    for x in (0..n).filter(|&x| p[x] > 0.0) {
        for w in (0..n).filter(|&w| w != x) {
            tr.observe(excess(c.get(x, w), c.get(x, x)), || {
                format!("C({x}, {w}) is not below C({x}, {x})")
            });
        }
    }
    if let Some(partition) = partition {
        let block = partition.assignment();
        for x in 0..n {
            for x2 in (0..n).filter(|&v| block[v] == block[x]) {
                for w in (0..n).filter(|&w| block[w] != block[x] && p[w] > 0.0) {
                    tr.observe(excess(c.get(x, w), c.get(x, x2)), || {
                        format!("C({x}, {x2}) is not above C({x}, {w})")
                    });
                }
            }
        }
    }
    tr.finish()
}

/// Positive whenever `lower < upper` fails.
fn excess(lower: f64, upper: f64) -> f64 {
    if lower < upper {
        0.0
    } else {
        (lower - upper).max(f64::MIN_POSITIVE)
    }
}

fn outlying_witness(space: &DissimilaritySpace, x: usize, z: usize) -> Option<usize> {
    let dxz = space.d(x, z);
    (0..space.len()).find(|&y| dxz <= space.d(x, y).min(space.d(y, z)))
}

fn check_pair(space: &DissimilaritySpace, x: usize, z: usize) -> Result<()> {
    let n = space.len();
    for i in [x, z] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
    }
    if x == z {
        return Err(Error::Precondition(
            "a point cannot be mutually outlying with itself".into(),
        ));
    }
    Ok(())
}

/// Every third point is closer to `x` or to `z` than they are to each other.
pub fn mutually_outlying(space: &DissimilaritySpace, x: usize, z: usize) -> Result<bool> {
    check_pair(space, x, z)?;
    Ok(outlying_witness(space, x, z).is_none())
}

/// Adding `z`, mutually outlying with every other point, to the rest of the
/// space: cohesion to and from `z` vanishes, `C(x, w)` rises by `p_z` when `w`
/// is closer to `x` than to `z` and is otherwise unchanged, and `C(z, z)`
/// equals `1/2 + 1 - p_z` (`1` when `p_z = 0`).
pub fn check_outlier_influence(space: &DissimilaritySpace, z: usize) -> Result<CheckResult> {
    let n = space.len();
    if z >= n {
        return Err(Error::IndexOutOfRange { index: z, len: n });
    }
    if n < 2 {
        return Err(Error::Precondition(
            "outlier influence needs at least one other point".into(),
        ));
    }
    for x in (0..n).filter(|&x| x != z) {
        if let Some(y) = outlying_witness(space, x, z) {
            return Err(Error::Precondition(format!(
                "{} and {} are not mutually outlying: witness {}",
                space.label(x),
                space.label(z),
                space.label(y)
            )));
        }
    }
    let t = induced_triplet(space, TiePolicy::default())?;
    let full = cohesion_matrix(&t)?;
    let rest: Vec<usize> = (0..n).filter(|&x| x != z).collect();
    let reduced = cohesion_matrix(&subspace(&t, &rest)?)?;
    let pz = space.mass()[z];

    let mut tr = Tracker::new("outlier_influence", CROSS_SPACE_TOLERANCE);
    for (a, &x) in rest.iter().enumerate() {
        tr.observe(full.get(x, z).abs(), || format!("C({x}, z) should vanish"));
        tr.observe(full.get(z, x).abs(), || format!("C(z, {x}) should vanish"));
        for (b, &w) in rest.iter().enumerate() {
            let shift = if space.d(w, x) < space.d(w, z) {
                pz
            } else {
                0.0
            };
            let expected = reduced.get(a, b) + shift;
            tr.observe((full.get(x, w) - expected).abs(), || {
                format!("C({x}, {w}) = {} but expected {expected}", full.get(x, w))
            });
        }
    }
    // the 1/2 from z's own comparison only counts when z carries mass
    let self_expected = if pz > 0.0 { 1.5 - pz } else { 1.0 };
    tr.observe((full.get(z, z) - self_expected).abs(), || {
        format!("C(z, z) = {} but expected {self_expected}", full.get(z, z))
    });
    Ok(tr.finish())
}

/// Bounds on cohesion with and from a separated outlier set `outliers`.
pub fn check_outlier_bounds(space: &DissimilaritySpace, outliers: &[usize]) -> Result<CheckResult> {
    let n = space.len();
    let mut is_out = vec![false; n];
    for &z in outliers {
        if z >= n {
            return Err(Error::IndexOutOfRange { index: z, len: n });
        }
        is_out[z] = true;
    }
    let inner: Vec<usize> = (0..n).filter(|&x| !is_out[x]).collect();
    let outer: Vec<usize> = (0..n).filter(|&x| is_out[x]).collect();
    if inner.is_empty() {
        return Err(Error::Precondition("every point is an outlier".into()));
    }

    let mut within = (0.0f64, 0, 0);
    for &x in &inner {
        for &w in &inner {
            if space.d(x, w) > within.0 {
                within = (space.d(x, w), x, w);
            }
        }
    }
    for &x in &inner {
        for &z in &outer {
            if space.d(x, z) <= within.0 {
                return Err(Error::Precondition(format!(
                    "d({}, {}) = {} does not exceed the within-set diameter d({}, {}) = {}",
                    space.label(x),
                    space.label(z),
                    space.d(x, z),
                    space.label(within.1),
                    space.label(within.2),
                    within.0
                )));
            }
        }
    }

    let pz: f64 = outer.iter().map(|&z| space.mass()[z]).sum();
    if pz >= 1.0 {
        return Err(Error::Precondition("outliers carry all the mass".into()));
    }
    let bound = pz / (1.0 - pz);
    let t = induced_triplet(space, TiePolicy::default())?;
    let full = cohesion_matrix(&t)?;
    let reduced = cohesion_matrix(&subspace(&t, &inner)?)?;

    let mut tr = Tracker::new("outlier_bounds", CROSS_SPACE_TOLERANCE);
    for &x in &inner {
        for &z in &outer {
            let v = full.get(x, z);
            tr.observe((v - bound).max(0.0), || {
                format!("C({x}, {z}) = {v} exceeds {bound}")
            });
        }
    }
    for (a, &x) in inner.iter().enumerate() {
        for (b, &w) in inner.iter().enumerate() {
            let diff = full.get(x, w) - reduced.get(a, b);
            tr.observe((pz - diff).max(0.0), || {
                format!("C({x}, {w}) rose by {diff}, below {pz}")
            });
            tr.observe((diff - bound).max(0.0), || {
                format!("C({x}, {w}) rose by {diff}, above {bound}")
            });
        }
    }
    Ok(tr.finish())
}

fn block_spaces(
    t: &TripletComparisonSpace,
    partition: &PointLikePartition,
) -> Result<Vec<Option<TripletComparisonSpace>>> {
    partition
        .blocks()
        .iter()
        .map(|b| match subspace(t, b) {
            Ok(s) => Ok(Some(s)),
            Err(Error::ZeroMass) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Local mass factors through a point-like partition: within a block it is
/// the block mass times the block's own local mass, across blocks it is the
/// quotient's local mass between representatives.
pub fn check_local_mass_quotient(
    t: &TripletComparisonSpace,
    partition: &PointLikePartition,
    reps: Option<&[usize]>,
) -> Result<CheckResult> {
    let q = quotient(t, partition, reps)?;
    let u = local_mass_matrix(t);
    let ubar = local_mass_matrix(q.space());
    let blocks = q.blocks();
    let block_u: Vec<Option<SquareMatrix>> = block_spaces(t, partition)?
        .iter()
        .map(|s| s.as_ref().map(local_mass_matrix))
        .collect();

    let mut tr = Tracker::new("local_mass_quotient", RESUM_TOLERANCE);
    for (i, bi) in blocks.iter().enumerate() {
        let mi = q.pbar()[i];
        for (j, bj) in blocks.iter().enumerate() {
            for (a, &x) in bi.iter().enumerate() {
                for (b, &y) in bj.iter().enumerate() {
                    let expected = if i == j {
                        block_u[i].as_ref().map_or(0.0, |ub| mi * ub.get(a, b))
                    } else {
                        ubar.get(i, j)
                    };
                    tr.observe((u.get(x, y) - expected).abs(), || {
                        format!("U({x}, {y}) = {} but expected {expected}", u.get(x, y))
                    });
                }
            }
        }
    }
    Ok(tr.finish())
}

/// Cohesion decomposes over a point-like partition: across blocks it equals
/// the quotient value, within block `i` it equals the quotient's self-cohesion
/// of `i` plus the block's own cohesion minus one half, and block sums
/// aggregate to the quotient.
pub fn check_quotient_fractal(
    t: &TripletComparisonSpace,
    partition: &PointLikePartition,
    reps: Option<&[usize]>,
) -> Result<CheckResult> {
    let q = quotient(t, partition, reps)?;
    let c = cohesion_matrix(t)?;
    let cbar = cohesion_matrix(q.space())?;
    let blocks = q.blocks();
    let block_c: Vec<Option<CohesionMatrix>> = block_spaces(t, partition)?
        .iter()
        .map(|s| s.as_ref().map(cohesion_matrix).transpose())
        .collect::<Result<_>>()?;
    let p = t.mass();

    let mut tr = Tracker::new("quotient_fractal", CROSS_SPACE_TOLERANCE);
    for (i, bi) in blocks.iter().enumerate() {
        for (j, bj) in blocks.iter().enumerate() {
            let mut aggregate = 0.0;
            for (a, &x) in bi.iter().enumerate() {
                for (b, &w) in bj.iter().enumerate() {
                    aggregate += c.get(x, w) * p[x] * p[w];
                    let expected = if i != j {
                        Some(cbar.get(i, j))
                    } else {
                        block_c[i]
                            .as_ref()
                            .map(|cb| cbar.get(i, i) + cb.get(a, b) - 0.5)
                    };
                    if let Some(expected) = expected {
                        tr.observe((c.get(x, w) - expected).abs(), || {
                            format!("C({x}, {w}) = {} but expected {expected}", c.get(x, w))
                        });
                    }
                }
            }
            let expected = cbar.get(i, j) * q.pbar()[i] * q.pbar()[j];
            tr.observe((aggregate - expected).abs(), || {
                format!("blocks ({i}, {j}) aggregate to {aggregate}, expected {expected}")
            });
        }
    }
    Ok(tr.finish())
}

/// The four-point configuration where a heavy fourth point makes the farther
/// of two neighbours the more cohesive one.
pub fn ordering_example_space(p: f64) -> Result<DissimilaritySpace> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidMass(format!("p = {p} must lie in (0, 1)")));
    }
    let q = (1.0 - p) / 3.0;
    let coords = vec![
        vec![0.0, 0.0],
        vec![4.0, 0.0],
        vec![0.0, 5.0],
        vec![6.0, 0.0],
    ];
    DissimilaritySpace::from_coords(
        vec!["x1".into(), "x2".into(), "x3".into(), "x4".into()],
        coords,
        crate::spaces::Metric::Euclidean,
        Some(vec![q, q, q, p]),
    )
}

/// On the four-point configuration, `C(x1, x2) = 1/3` and `C(x1, x3) = p`, so
/// the cohesion order of `x2, x3` from `x1` reverses exactly when `p > 1/3`.
pub fn check_ordering_example(ps: &[f64]) -> Result<CheckResult> {
    let mut tr = Tracker::new("ordering_example", RESUM_TOLERANCE);
    for &p in ps {
        let s = ordering_example_space(p)?;
        let c = cohesion_matrix(&induced_triplet(&s, TiePolicy::default())?)?;
        let (c12, c13) = (c.get(0, 1), c.get(0, 2));
        tr.observe((c12 - 1.0 / 3.0).abs(), || {
            format!("p = {p}: C(x1, x2) = {c12}")
        });
        tr.observe((c13 - p).abs(), || format!("p = {p}: C(x1, x3) = {c13}"));
        let reversed = c12 < c13 - RESUM_TOLERANCE;
        let predicted = p > 1.0 / 3.0 + RESUM_TOLERANCE;
        if (p - 1.0 / 3.0).abs() > RESUM_TOLERANCE {
            tr.observe(if reversed == predicted { 0.0 } else { 1.0 }, || {
                format!("p = {p}: reversal {reversed}, expected {predicted}")
            });
        }
    }
    Ok(tr.finish())
}

/// The grid `0.05, 0.10, ..., 0.95` together with the boundary `1/3`.
pub fn default_ordering_grid() -> Vec<f64> {
    let mut ps: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
    ps.push(1.0 / 3.0);
    ps
}

/// Every check that applies to a dissimilarity space.
///
/// `partition` enables the quotient and dominance checks; `outliers` enables
/// the outlier checks (influence runs per outlier only when it is mutually
/// outlying with all other points).
pub fn run_all(
    space: &DissimilaritySpace,
    policy: TiePolicy,
    partition: Option<&PointLikePartition>,
    outliers: &[usize],
) -> Result<Vec<CheckResult>> {
    let t = induced_triplet(space, policy)?;
    let c = cohesion_matrix(&t)?;
    let mut out = vec![check_average_half(&c)];
    if t.len() <= ORACLE_MAX_POINTS {
        out.push(check_kernel_oracle(&t)?);
    }
    if let Some(partition) = partition {
        for b in partition.blocks() {
            if !is_point_like(&t, b)? {
                return Err(Error::NotPointLike(format!("{b:?}")));
            }
        }
        out.push(check_dominance(&t, &c, Some(partition)));
        out.push(check_local_mass_quotient(&t, partition, None)?);
        out.push(check_quotient_fractal(&t, partition, None)?);
    } else {
        out.push(check_dominance(&t, &c, None));
    }
    if !outliers.is_empty() {
        out.push(check_outlier_bounds(space, outliers)?);
        for &z in outliers {
            let all = (0..space.len())
                .filter(|&x| x != z)
                .all(|x| outlying_witness(space, x, z).is_none());
            if all {
                let mut r = check_outlier_influence(space, z)?;
                r.name = format!("outlier_influence[{}]", space.label(z));
                out.push(r);
            }
        }
    }
    out.push(check_ordering_example(&default_ordering_grid())?);
    Ok(out)
}
