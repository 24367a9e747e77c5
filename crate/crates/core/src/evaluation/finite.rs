use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{FiniteMemoryPolicy, HistoryPolicy, Metric, Policy, Pomdp, StationaryPolicy, TimeDependentPolicy};
use crate::rat::Rat;

/// Probability mass per state. Entries are positive; the total may fall below
/// 1 once zero rows have absorbed mass.
pub type StateDistribution = BTreeMap<usize, Rat>;

pub fn initial_distribution(m: &Pomdp) -> StateDistribution {
    BTreeMap::from([(m.initial(), Rat::one())])
}

/// One step of `dist` where state `s` plays `choose(s)`.
pub fn step_distribution(m: &Pomdp, dist: &StateDistribution, choose: impl Fn(usize) -> usize) -> StateDistribution {
    let mut next = StateDistribution::new();
    for (&s, p) in dist {
        for (s2, q) in m.row(s, choose(s)) {
            *next.entry(*s2).or_insert_with(Rat::zero) += p * q;
        }
    }
    next
}

fn expected_reward(m: &Pomdp, dist: &StateDistribution, choose: impl Fn(usize) -> usize) -> Rat {
    let mut acc = Rat::zero();
    for (&s, p) in dist {
        let r = m.reward(s, choose(s));
        if !r.is_zero() {
            acc += p * r;
        }
    }
    acc
}

fn finite_params(metric: &Metric) -> Result<(usize, Rat)> {
    metric.validate()?;
    match metric {
        Metric::FiniteTotal { horizon } => Ok((*horizon, Rat::one())),
        Metric::FiniteDiscounted { beta, horizon } => Ok((*horizon, beta.clone())),
        other => Err(Error::Unsupported(format!(
            "finite-horizon evaluation needs a finite metric, got {}",
            other.describe()
        ))),
    }
}

/// Exact finite-horizon performance of any policy type, by forward
/// propagation of state distributions.
pub fn finite_horizon_performance(m: &Pomdp, policy: &Policy, metric: &Metric) -> Result<Rat> {
    let (h, gamma) = finite_params(metric)?;
    policy.check_domain(m)?;
    match policy {
        Policy::Stationary(p) => Ok(stationary(m, p, h, &gamma)),
        Policy::TimeDependent(p) => time_dependent(m, p, h, &gamma),
        Policy::History(p) => history(m, p, h, &gamma),
        Policy::FiniteMemory(p) => Ok(finite_memory(m, p, h, &gamma)),
    }
}

fn stationary(m: &Pomdp, p: &StationaryPolicy, h: usize, gamma: &Rat) -> Rat {
    let choose = |s: usize| p.action(m.obs(s));
    let mut dist = initial_distribution(m);
    let mut total = Rat::zero();
    let mut weight = Rat::one();
    for i in 0..h {
        total += &weight * expected_reward(m, &dist, choose);
        if i + 1 < h {
            dist = step_distribution(m, &dist, choose);
            if dist.is_empty() {
                break;
            }
            weight *= gamma;
        }
    }
    total
}

fn time_dependent(m: &Pomdp, p: &TimeDependentPolicy, h: usize, gamma: &Rat) -> Result<Rat> {
    if p.horizon() < h {
        return Err(Error::HorizonMismatch { policy: p.horizon(), requested: h });
    }
    let mut dist = initial_distribution(m);
    let mut total = Rat::zero();
    let mut weight = Rat::one();
    for i in 0..h {
        let choose = |s: usize| p.action(m.obs(s), i);
        total += &weight * expected_reward(m, &dist, choose);
        if i + 1 < h {
            dist = step_distribution(m, &dist, choose);
            if dist.is_empty() {
                break;
            }
            weight *= gamma;
        }
    }
    Ok(total)
}

fn history(m: &Pomdp, p: &HistoryPolicy, h: usize, gamma: &Rat) -> Result<Rat> {
    if p.horizon() < h {
        return Err(Error::HorizonMismatch { policy: p.horizon(), requested: h });
    }
    if h == 0 {
        return Ok(Rat::zero());
    }
    let s0 = m.initial();
    let missing = |depth: usize| {
        Error::DomainMismatch(format!("history policy undefined on a realizable sequence of length {depth}"))
    };
    let root = p.child(p.root(), m.obs(s0)).ok_or_else(|| missing(1))?;
    // one distribution per realized observation string
    let mut branches: Vec<(usize, StateDistribution)> = vec![(root, initial_distribution(m))];
    let mut total = Rat::zero();
    let mut weight = Rat::one();
    for i in 0..h {
        let mut next = Vec::new();
        for (node, dist) in &branches {
            let a = p.node_action(*node).ok_or_else(|| missing(i + 1))?;
            total += &weight * expected_reward(m, dist, |_| a);
            if i + 1 == h {
                continue;
            }
            let mut by_obs: BTreeMap<usize, StateDistribution> = BTreeMap::new();
            for (s2, q) in step_distribution(m, dist, |_| a) {
                by_obs.entry(m.obs(s2)).or_default().insert(s2, q);
            }
            for (o, d) in by_obs {
                let child = p.child(*node, o).ok_or_else(|| missing(i + 2))?;
                next.push((child, d));
            }
        }
        branches = next;
        weight *= gamma;
    }
    Ok(total)
}

fn finite_memory(m: &Pomdp, p: &FiniteMemoryPolicy, h: usize, gamma: &Rat) -> Rat {
    let mut dist: BTreeMap<(usize, usize), Rat> = BTreeMap::from([((m.initial(), p.initial_memory()), Rat::one())]);
    let mut total = Rat::zero();
    let mut weight = Rat::one();
    for i in 0..h {
        let mut next = BTreeMap::new();
        for (&(s, q), mass) in &dist {
            let (a, q2) = p.step(m.obs(s), q);
            let r = m.reward(s, a);
            if !r.is_zero() {
                total += &weight * mass * r;
            }
            if i + 1 < h {
                for (s2, t) in m.row(s, a) {
                    *next.entry((*s2, q2)).or_insert_with(Rat::zero) += mass * t;
                }
            }
        }
        dist = next;
        weight *= gamma;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    /// s0 -a0-> s1 (reward 1 at s0 under a0), s0 -a1-> s2 (reward 0), s1/s2 loop.
    fn fork() -> Pomdp {
        let mut m = Pomdp::new(3, 2, 3, 0);
        for s in 0..3 {
            m.set_obs(s, s);
        }
        m.set_prob(0, 0, 1, int(1));
        m.set_prob(0, 1, 2, int(1));
        m.set_forced(1, 1);
        m.set_forced(2, 2);
        m.set_reward(0, 0, int(1));
        m.set_reward(2, 0, int(2));
        m
    }

    #[test]
    fn stationary_total_and_discounted() {
        let m = fork();
        let pi = Policy::Stationary(StationaryPolicy::new(vec![1, 0, 0]));
        assert_eq!(finite_horizon_performance(&m, &pi, &Metric::total(3)).unwrap(), int(4));
        let d = Metric::discounted(rat(1, 2), 3).unwrap();
        assert_eq!(finite_horizon_performance(&m, &pi, &d).unwrap(), int(1) + rat(1, 2));
    }

    #[test]
    fn horizon_zero_is_zero() {
        let m = fork();
        let pi = Policy::Stationary(StationaryPolicy::new(vec![0, 0, 0]));
        assert_eq!(finite_horizon_performance(&m, &pi, &Metric::total(0)).unwrap(), int(0));
    }

    #[test]
    fn reward_at_step_zero_counts() {
        let m = fork();
        let pi = Policy::Stationary(StationaryPolicy::new(vec![0, 0, 0]));
        assert_eq!(finite_horizon_performance(&m, &pi, &Metric::total(1)).unwrap(), int(1));
    }

    #[test]
    fn short_time_dependent_policy_rejected() {
        let m = fork();
        let pi = Policy::TimeDependent(TimeDependentPolicy::new(vec![vec![0, 0, 0]]).unwrap());
        assert!(matches!(
            finite_horizon_performance(&m, &pi, &Metric::total(2)),
            Err(Error::HorizonMismatch { policy: 1, requested: 2 })
        ));
    }

    #[test]
    fn undefined_history_branch_rejected() {
        let m = fork();
        let mut p = HistoryPolicy::new(2);
        p.insert(&[0], 1).unwrap();
        let r = finite_horizon_performance(&m, &Policy::History(p), &Metric::total(2));
        assert!(matches!(r, Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn absorbing_rows_drop_mass() {
        let mut m = Pomdp::new(2, 1, 1, 0);
        m.set_prob(0, 0, 1, int(1));
        m.set_reward(1, 0, int(5));
        // state 1 has an all-zero row: reward at step 1 only
        let pi = Policy::Stationary(StationaryPolicy::new(vec![0]));
        assert_eq!(finite_horizon_performance(&m, &pi, &Metric::total(5)).unwrap(), int(5));
    }

    #[test]
    fn infinite_metric_rejected() {
        let m = fork();
        let pi = Policy::Stationary(StationaryPolicy::new(vec![0, 0, 0]));
        assert!(finite_horizon_performance(&m, &pi, &Metric::Average).is_err());
    }
}
