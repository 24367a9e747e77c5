//! Exact policy evaluation under every performance metric.

mod finite;
mod infinite;
pub mod linalg;
mod product;

pub use finite::{finite_horizon_performance, initial_distribution, step_distribution, StateDistribution};
pub use infinite::{average_performance_stationary, discounted_performance_stationary};
pub use product::finite_memory_cross_product;

use crate::error::{Error, Result};
use crate::model::{Metric, Policy, Pomdp};
use crate::rat::Rat;

/// Performance of `policy` under any metric it supports. Finite-memory
/// policies are folded into a stationary policy for infinite metrics.
pub fn performance(m: &Pomdp, policy: &Policy, metric: &Metric) -> Result<Rat> {
    metric.validate()?;
    if metric.is_finite() {
        return finite_horizon_performance(m, policy, metric);
    }
    let (model, stationary) = match policy {
        Policy::Stationary(p) => (None, p.clone()),
        Policy::FiniteMemory(p) => {
            let (prod, pi) = finite_memory_cross_product(m, p)?;
            (Some(prod), pi)
        }
        other => {
            return Err(Error::Unsupported(format!("{} policies have no infinite-horizon evaluation", other.kind())))
        }
    };
    let target = model.as_ref().unwrap_or(m);
    match metric {
        Metric::InfiniteDiscounted { beta } => discounted_performance_stationary(target, &stationary, beta),
        Metric::Average => average_performance_stationary(target, &stationary),
        _ => unreachable!("finite metrics handled above"),
    }
}
