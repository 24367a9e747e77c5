//! Gadget compilers from satisfiability, stochastic satisfiability and
//! circuit value instances to POMDPs, MDPs and 2TBNs.

mod cvp;
mod sat;
mod ssat;
mod succinct;
mod uomdp;

use std::fmt;

pub use cvp::{circuit_to_2tbn, cvp_reward_exponent, cvp_to_mdp, TbnCircuitLayout};
pub use sat::{epsilon_gap_gadget, gap_reward, infinite_horizon_sat_gadget, threesat_to_pomdp};
pub use ssat::{choose_ssat_constants, ssat_consistent_policy, ssat_repeat, ssat_to_pomdp, ExistsStrategy, SsatLayout};
pub use succinct::{
    decode_succinct_instance, succinct_cvp_to_2tbn, succinct_cvp_to_2tbn_with_layout, synthesize_succinct_instance,
    ExponentMode, SuccinctCvpLayout, SuccinctGate,
};
pub use uomdp::{amplify_uomdp, amplify_uomdp_chain_length, threesat_to_uomdp};

use crate::model::{Metric, Pomdp, Tbn};
use crate::rat::{self, Rat};

/// One side of a value dichotomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Eq(Rat),
    Ge(Rat),
    Gt(Rat),
    Le(Rat),
    Lt(Rat),
}

impl Bound {
    pub fn holds(&self, v: &Rat) -> bool {
        match self {
            Bound::Eq(b) => v == b,
            Bound::Ge(b) => v >= b,
            Bound::Gt(b) => v > b,
            Bound::Le(b) => v <= b,
            Bound::Lt(b) => v < b,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, b) = match self {
            Bound::Eq(b) => ("=", b),
            Bound::Ge(b) => (">=", b),
            Bound::Gt(b) => (">", b),
            Bound::Le(b) => ("<=", b),
            Bound::Lt(b) => ("<", b),
        };
        write!(f, "{op} {}", rat::fmt(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyClass {
    Stationary,
    TimeDependent,
    History,
}

impl PolicyClass {
    pub fn name(self) -> &'static str {
        match self {
            PolicyClass::Stationary => "stationary",
            PolicyClass::TimeDependent => "time-dependent",
            PolicyClass::History => "history-dependent",
        }
    }
}

/// Declared value dichotomy of a construction: the optimal value over
/// `class` under `metric` satisfies `yes` on yes-instances and `no` on
/// no-instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub class: PolicyClass,
    pub metric: Metric,
    pub yes: Bound,
    pub no: Bound,
}

impl Claim {
    pub fn check(&self, yes_instance: bool, value: &Rat) -> bool {
        if yes_instance {
            self.yes.holds(value)
        } else {
            self.no.holds(value)
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} value under {}: yes {}, no {}", self.class.name(), self.metric.describe(), self.yes, self.no)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GadgetModel {
    Pomdp(Pomdp),
    Tbn(Tbn),
}

/// A compiled instance with its recommended evaluation setting and the
/// dichotomies it is built to satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetOutput {
    pub model: GadgetModel,
    pub recommended_horizon: usize,
    pub recommended_metric: Metric,
    pub claims: Vec<Claim>,
    /// State and observation map of the stochastic-satisfiability gadgets.
    pub ssat_layout: Option<SsatLayout>,
}

impl GadgetOutput {
    pub fn pomdp(&self) -> Option<&Pomdp> {
        match &self.model {
            GadgetModel::Pomdp(m) => Some(m),
            GadgetModel::Tbn(_) => None,
        }
    }

    pub fn tbn(&self) -> Option<&Tbn> {
        match &self.model {
            GadgetModel::Tbn(t) => Some(t),
            GadgetModel::Pomdp(_) => None,
        }
    }

    /// The first declared claim, if any.
    pub fn claim(&self) -> Option<&Claim> {
        self.claims.first()
    }
}
