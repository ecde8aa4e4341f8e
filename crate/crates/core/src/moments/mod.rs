//! Exact commutant and Weingarten calculus for up to four tensor copies.

pub mod commutant;
pub mod perm;
pub mod subspace;
pub mod variance;
pub mod weingarten;

pub use commutant::{pi4_matrix, r_pi_matrix, r_t_matrix, rt_inner_product, SparseOperator};
pub use perm::Permutation;
pub use subspace::{sigma_tt_enumerate, CommutantLabel, SubspaceT};
pub use variance::{
    basis_overlap_rt, stabilizer_pair_traces, tcount_bound, tgate_sandwich, thrifty_variance_predict, traces,
    variance_3design, variance_3design_exact, variance_3design_from_traces, vstar_bound, vstar_stabilizer_pair,
    TCountConstants, Traces,
};
pub use weingarten::{gram_matrix, state_average, weingarten_matrix, ExactMatrix, Group, StateAverage, StateInput};
