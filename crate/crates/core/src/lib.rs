//! Exact homomorphism counts from trees, and a mechanical check that the
//! star maximizes them.
//!
//! - [`graph`]: simple graphs, validated trees, skeletons.
//! - [`hom`]: brute-force and tree-program counting, pinned tables, pair
//!   distributions, weighted counts.
//! - [`sidorenko`]: leaf-migration steps and chains with certificates, the
//!   Hölder and AM-GM bounds, brooms and the `phi` profile.
//! - [`order`]: free-tree enumeration, image suites, the empirical order and
//!   its Hasse diagram.
//! - [`hoffman`]: the walk-sum versus row-power-sum matrix inequality.

pub mod graph;
pub mod hoffman;
pub mod hom;
pub mod order;
pub mod sidorenko;

pub use graph::{as_tree, parse_graph, Graph, GraphError, ParseError, SkeletonInfo, Tree, Vertex};
pub use hoffman::{hoffman_check, parse_matrix, row_power_sum, walk_sum, SymmetricMatrix};
pub use hom::{
    hom_bruteforce, hom_count, hom_tree, pair_distribution, pinned_pair, pinned_single, star_count,
    weighted_hom_tree, HomCount, HomError, PairDistribution,
};
pub use order::{
    class_max_check, dot_export, empirical_order, enumerate_free_trees, filter_by_leaves, hasse,
    image_suite, CanonicalTree, HasseDiagram, OrderRelation, SuiteSpec,
};
pub use sidorenko::{
    broom, broom_chain_check, phi_profile, transform_chain, transform_step, verify_theorem,
    PairStrategy, TransformCertificate, TransformStep,
};
