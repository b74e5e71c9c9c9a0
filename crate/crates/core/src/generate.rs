//! Deterministic synthetic configurations.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitDisc};

use crate::error::{Error, Result};
use crate::spaces::{induced_triplet, DissimilaritySpace, Metric, TiePolicy};
use crate::structure::is_point_like;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Points `1/(2 + epsilon)^i` on a line, `i = 1..=n`.
    GeometricChain { n: usize, epsilon: f64 },
    /// Disks of the given sizes and radii whose centres sit on a golden-angle
    /// spiral; block `i > 0` lies at distance `inter_scale (1 + 0.3 (i - 1))`
    /// from block 0 at the origin.
    SeparatedBlocks {
        sizes: Vec<usize>,
        intra_scales: Vec<f64>,
        inter_scale: f64,
    },
    /// Uniform points in a disk of `radius` plus `n_out` points spread evenly
    /// over the circle of radius `outlier_distance`.
    BallWithOutliers {
        n_ball: usize,
        n_out: usize,
        radius: f64,
        outlier_distance: f64,
    },
    /// Four weighted points in the plane; the last carries mass `p`.
    OrderingExample { p: f64 },
    /// Four points of mass 3/16 and one distant point of mass 1/4.
    FourGroupOutlier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec { kind, seed }
    }
}

/// A generated space with the structure it was built to have.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub space: DissimilaritySpace,
    /// Certified point-like blocks, in generation order (empty when the
    /// configuration has none).
    pub blocks: Vec<Vec<usize>>,
    /// Points placed as outliers, separated from the rest.
    pub outliers: Vec<usize>,
}

pub fn generate(spec: &GeneratorSpec) -> Result<Synthetic> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.kind {
        GeneratorKind::GeometricChain { n, epsilon } => geometric_chain(*n, *epsilon),
        GeneratorKind::SeparatedBlocks {
            sizes,
            intra_scales,
            inter_scale,
        } => separated_blocks(&mut rng, sizes, intra_scales, *inter_scale),
        GeneratorKind::BallWithOutliers {
            n_ball,
            n_out,
            radius,
            outlier_distance,
        } => ball_with_outliers(&mut rng, *n_ball, *n_out, *radius, *outlier_distance),
        GeneratorKind::OrderingExample { p } => Ok(Synthetic {
            space: crate::verify::ordering_example_space(*p)?,
            blocks: Vec::new(),
            outliers: Vec::new(),
        }),
        GeneratorKind::FourGroupOutlier => four_group_outlier(),
    }
}

fn geometric_chain(n: usize, epsilon: f64) -> Result<Synthetic> {
    if n == 0 {
        return Err(Error::Generator(
            "the chain needs at least one point".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Generator(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    let base = 2.0 + epsilon;
    let coords = (1..=n).map(|i| vec![base.powi(-(i as i32))]).collect();
    let labels = (1..=n).map(|i| format!("x{i}")).collect();
    Ok(Synthetic {
        space: DissimilaritySpace::from_coords(labels, coords, Metric::Euclidean, None)?,
        blocks: Vec::new(),
        outliers: Vec::new(),
    })
}

fn disk_point(rng: &mut ChaCha8Rng, center: [f64; 2], radius: f64) -> Vec<f64> {
    let [u, v]: [f64; 2] = UnitDisc.sample(rng);
    vec![center[0] + radius * u, center[1] + radius * v]
}

fn separated_blocks(
    rng: &mut ChaCha8Rng,
    sizes: &[usize],
    intra_scales: &[f64],
    inter_scale: f64,
) -> Result<Synthetic> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Generator("block sizes must be positive".into()));
    }
    if intra_scales.len() != sizes.len() {
        return Err(Error::Generator(format!(
            "{} radii for {} blocks",
            intra_scales.len(),
            sizes.len()
        )));
    }
    if intra_scales.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Generator("block radii must be positive".into()));
    }
    if !(inter_scale > 0.0 && inter_scale.is_finite()) {
        return Err(Error::Generator("inter_scale must be positive".into()));
    }

    let golden = PI * (3.0 - 5f64.sqrt());
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut blocks = Vec::with_capacity(sizes.len());
    for (i, (&size, &radius)) in sizes.iter().zip(intra_scales).enumerate() {
        let center = if i == 0 {
            [0.0, 0.0]
        } else {
            let r = inter_scale * (1.0 + 0.3 * (i - 1) as f64);
            let a = golden * i as f64;
            [r * a.cos(), r * a.sin()]
        };
        let start = coords.len();
        for j in 0..size {
            coords.push(disk_point(rng, center, radius));
            labels.push(format!("b{i}_{j}"));
        }
        blocks.push((start..coords.len()).collect::<Vec<_>>());
    }
    let space = DissimilaritySpace::from_coords(labels, coords, Metric::Euclidean, None)?;
    let t = induced_triplet(&space, TiePolicy::default())?;
    for (i, b) in blocks.iter().enumerate() {
        if !is_point_like(&t, b)? {
            return Err(Error::Generator(format!(
                "block {i} is not point-like; increase inter_scale or shrink its radius"
            )));
        }
    }
    Ok(Synthetic {
        space,
        blocks,
        outliers: Vec::new(),
    })
}

fn ball_with_outliers(
    rng: &mut ChaCha8Rng,
    n_ball: usize,
    n_out: usize,
    radius: f64,
    outlier_distance: f64,
) -> Result<Synthetic> {
    if n_ball == 0 {
        return Err(Error::Generator("the ball needs at least one point".into()));
    }
    if !(radius > 0.0 && radius.is_finite() && outlier_distance.is_finite()) {
        return Err(Error::Generator("radius must be positive".into()));
    }
    let mut coords: Vec<Vec<f64>> = (0..n_ball)
        .map(|_| disk_point(rng, [0.0, 0.0], radius))
        .collect();
    let mut labels: Vec<String> = (0..n_ball).map(|j| format!("in{j}")).collect();
    let offset = rng.random::<f64>() * 2.0 * PI;
    for k in 0..n_out {
        let a = offset + 2.0 * PI * k as f64 / n_out as f64;
        coords.push(vec![outlier_distance * a.cos(), outlier_distance * a.sin()]);
        labels.push(format!("out{k}"));
    }
    let space = DissimilaritySpace::from_coords(labels, coords, Metric::Euclidean, None)?;

    // certificate: the interior diameter is below every interior-outlier distance
    let mut diameter = 0.0f64;
    for x in 0..n_ball {
        for w in x + 1..n_ball {
            diameter = diameter.max(space.d(x, w));
        }
    }
    let gap = (0..n_ball)
        .flat_map(|x| (n_ball..n_ball + n_out).map(move |z| (x, z)))
        .map(|(x, z)| space.d(x, z))
        .fold(f64::INFINITY, f64::min);
    if gap <= diameter {
        return Err(Error::Generator(format!(
            "outliers at distance {gap} are not separated from the ball of diameter {diameter}; \
             increase outlier_distance"
        )));
    }
    Ok(Synthetic {
        space,
        blocks: vec![(0..n_ball).collect()],
        outliers: (n_ball..n_ball + n_out).collect(),
    })
}

fn four_group_outlier() -> Result<Synthetic> {
    let coords = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.1],
        vec![0.2, 1.1],
        vec![1.3, 0.9],
        vec![12.0, 9.0],
    ];
    let labels = ["g1", "g2", "g3", "g4", "z"].map(String::from).to_vec();
    let mass = vec![0.1875, 0.1875, 0.1875, 0.1875, 0.25];
    Ok(Synthetic {
        space: DissimilaritySpace::from_coords(labels, coords, Metric::Euclidean, Some(mass))?,
        blocks: vec![vec![0, 1, 2, 3], vec![4]],
        outliers: vec![4],
    })
}
