//! Matrix hashing, exact distributions and the inverse-hash lemma.

pub mod distribution;
pub mod lemma5;
pub mod matrix;
pub mod observations;
pub mod verify;

pub use distribution::{ratio, ratio_string, statistical_distance, Distribution, Ratio};
pub use lemma5::{
    exhaustive_adaptive, exhaustive_product, lemma5_check, lemma5_exact, lemma5_montecarlo, CompatibleSets,
    ExactLemma5, Lemma5Mode, Lemma5Report,
};
pub use matrix::{
    collision_fraction, exact_collision_probability, hash_apply, pseudo_inverse, pseudo_inverse_packed,
    MatrixFamily, MatrixHash,
};
pub use observations::{inverse_pair_distribution, support_lower_bound_check, InverseReport, SupportReport};
