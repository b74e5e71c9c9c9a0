use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::kernel::CohesionMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityEdge {
    pub x: usize,
    pub w: usize,
    /// `min(C(x, w), C(w, x))`.
    pub weight: f64,
    pub strong: bool,
}

/// Undirected graph of mutual cohesion with a strong/weak split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityGraph {
    pub labels: Vec<String>,
    pub threshold: f64,
    /// Pairs `x < w` with positive mutual cohesion.
    pub edges: Vec<CommunityEdge>,
    /// Connected components of the strong edges, each sorted, ordered by
    /// smallest member.
    pub communities: Vec<Vec<usize>>,
}

/// Half the mass-weighted mean self-cohesion, `½ Σ_x C(x, x) p_x`.
///
/// This mirrors the strong-tie convention used with the original cohesion
/// measure; it is a convention, not a derived quantity.
pub fn default_threshold(c: &CohesionMatrix) -> f64 {
    0.5 * c
        .mass()
        .iter()
        .enumerate()
        .map(|(x, p)| c.get(x, x) * p)
        .sum::<f64>()
}

pub fn community_graph(c: &CohesionMatrix, threshold: Option<f64>) -> CommunityGraph {
    let n = c.len();
    let threshold = threshold.unwrap_or_else(|| default_threshold(c));
    let mut edges = Vec::new();
    let mut components = UnionFind::<usize>::new(n);
    for x in 0..n {
        for w in x + 1..n {
            let weight = c.get(x, w).min(c.get(w, x));
            if weight <= 0.0 {
                continue;
            }
            let strong = weight >= threshold;
            if strong {
                components.union(x, w);
            }
            edges.push(CommunityEdge {
                x,
                w,
                weight,
                strong,
            });
        }
    }

    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for x in 0..n {
        by_root[components.find(x)].push(x);
    }
    let mut communities: Vec<Vec<usize>> = by_root.into_iter().filter(|g| !g.is_empty()).collect();
    communities.sort_by_key(|g| g[0]);

    CommunityGraph {
        labels: c.labels().to_vec(),
        threshold,
        edges,
        communities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use approx::assert_abs_diff_eq;

    fn weighted_example() -> CohesionMatrix {
        let values = SquareMatrix::from_rows(&[
            vec![1.6, 0.5, 0.0],
            vec![0.5, 1.4, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        CohesionMatrix::from_parts(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.2, 0.3, 0.5],
            values,
        )
    }

    #[test]
    fn default_threshold_of_weighted_example() {
        let g = community_graph(&weighted_example(), None);
        assert_abs_diff_eq!(g.threshold, 0.62, epsilon = 1e-12);
        assert_eq!(g.edges.len(), 1);
        assert!(!g.edges[0].strong);
        assert_eq!(g.communities, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn zero_threshold_joins_positive_edges() {
        let g = community_graph(&weighted_example(), Some(0.0));
        assert!(g.edges.iter().all(|e| e.strong));
        assert_eq!(g.communities, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn edge_weight_is_the_smaller_direction() {
        let values = SquareMatrix::from_rows(&[vec![1.0, 0.4], vec![0.1, 1.0]]).unwrap();
        let c = CohesionMatrix::from_parts(vec!["a".into(), "b".into()], vec![0.5, 0.5], values);
        let g = community_graph(&c, Some(0.1));
        assert_eq!(g.edges[0].weight, 0.1);
        assert!(g.edges[0].strong);
    }
}
