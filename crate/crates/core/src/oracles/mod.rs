//! Exhaustive and exact reference computations.

mod expand;
mod ground_truth;
mod history;
mod stationary;
mod time_dependent;

pub use expand::{
    assignment_index, expand_2tbn, expand_2tbn_reachable, expand_succinct_mdp, index_assignment, SuccinctWidths,
};
pub(crate) use ground_truth::ssat_game;
pub use ground_truth::{circuit_eval, sat_enumerate, ssat_value, SatSummary};
pub use history::{exact_history_value, HistoryValue};
pub use stationary::{brute_force_stationary_value, brute_force_stationary_value_pruned, Optimum};
pub use time_dependent::brute_force_time_dependent_value;
