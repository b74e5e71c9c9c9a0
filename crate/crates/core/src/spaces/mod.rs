//! Dissimilarity spaces, triplet comparison spaces, and the builders that
//! turn distances or human judgments into triplet comparison functions.

mod axioms;
mod builders;
mod dissimilarity;
mod triplet;

pub use axioms::{validate_axioms, Axiom, AxiomReport, AxiomScope, Violation, AXIOM_TOLERANCE};
pub use builders::{
    aggregate_outlier_responses, aggregate_standard_queries, induced_triplet, OutlierResponse,
    MARGINAL_TOLERANCE,
};
pub use dissimilarity::{default_labels, DissimilaritySpace, Metric, MASS_TOLERANCE};
pub use triplet::{DenseTriplets, TieMode, TiePolicy, TripletComparisonSpace};
