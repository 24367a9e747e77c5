//! Exact-arithmetic toolkit for POMDP policy evaluation and the complexity
//! gadgets that map satisfiability, stochastic satisfiability and circuit
//! value problems into POMDPs and 2TBNs.

pub mod approx;
pub mod caps;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod model;
pub mod oracles;
pub mod rat;
pub mod reductions;
pub mod verify;

pub use caps::Caps;
pub use error::{Error, Result};
pub use model::*;
pub use rat::Rat;
