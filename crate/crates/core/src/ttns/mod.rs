//! Tree tensor network states: tree graphs, dense states on trees, the
//! faithful rank-`r` truncation, the hard instance and copy budgets.

pub mod copies;
pub mod hard_instance;
pub mod state;
pub mod tree;
pub mod truncate;

pub use copies::{few_copy_tree_bounds, lb_copy_threshold, ttns_copy_upper, FewCopyTreeBounds, LbThreshold, LogBase};
pub use hard_instance::{
    farness_hard_instance, hard_instance_spectrum, hard_instance_state, ttns_test_accept_hard_instance, Farness,
    HardAcceptance,
};
pub use state::{edge_schmidt_spectrum, is_ttns, TreeState, TtnsCheck, AMPLITUDE_GUARD};
pub use tree::{edge_bipartition, Tree};
pub use truncate::{faithful_ttns_approx, TruncationCertificate};
