use crate::caps::{saturating_pow, Caps};
use crate::error::Result;
use crate::evaluation::performance;
use crate::model::{Metric, Policy, Pomdp, StationaryPolicy};
use crate::rat::Rat;

/// Best policy found by an exhaustive search, with the number of policies
/// that were evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum<P> {
    pub value: Rat,
    pub policy: P,
    pub enumerated: u64,
}

/// Exact optimum over all `n_actions^n_obs` stationary policies. Ties go to
/// the lexicographically smallest policy, observation 0 most significant.
pub fn brute_force_stationary_value(m: &Pomdp, metric: &Metric, caps: &Caps) -> Result<Optimum<StationaryPolicy>> {
    let free: Vec<usize> = (0..m.n_obs()).collect();
    search(m, metric, caps, &free)
}

/// Same optimum and witness as [`brute_force_stationary_value`], skipping
/// observations whose action cannot matter: every state carrying them is
/// unreachable, or has identical rows and rewards under all actions. Those
/// observations are pinned to action 0.
pub fn brute_force_stationary_value_pruned(
    m: &Pomdp,
    metric: &Metric,
    caps: &Caps,
) -> Result<Optimum<StationaryPolicy>> {
    let reach = m.reachable();
    let mut relevant = vec![false; m.n_obs()];
    for s in (0..m.n_states()).filter(|&s| reach[s]) {
        let differs = (1..m.n_actions()).any(|a| m.row(s, a) != m.row(s, 0) || m.reward(s, a) != m.reward(s, 0));
        if differs {
            relevant[m.obs(s)] = true;
        }
    }
    let free: Vec<usize> = (0..m.n_obs()).filter(|&o| relevant[o]).collect();
    search(m, metric, caps, &free)
}

fn search(m: &Pomdp, metric: &Metric, caps: &Caps, free: &[usize]) -> Result<Optimum<StationaryPolicy>> {
    metric.validate()?;
    m.ensure_valid()?;
    let a = m.n_actions();
    Caps::check("stationary policies", saturating_pow(a as u128, free.len() as u128), caps.policies)?;
    let mut act = vec![0usize; m.n_obs()];
    let mut best: Option<(Rat, Vec<usize>)> = None;
    let mut enumerated = 0u64;
    loop {
        let pi = Policy::Stationary(StationaryPolicy::new(act.clone()));
        let v = performance(m, &pi, metric)?;
        enumerated += 1;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, act.clone()));
        }
        // odometer over the free observations, last one fastest
        let mut k = free.len();
        loop {
            if k == 0 {
                let (value, act) = best.expect("at least one policy");
                return Ok(Optimum { value, policy: StationaryPolicy::new(act), enumerated });
            }
            k -= 1;
            let o = free[k];
            act[o] += 1;
            if act[o] < a {
                break;
            }
            act[o] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    /// Three observations, only observation 1 matters.
    fn model() -> Pomdp {
        let mut m = Pomdp::new(3, 2, 3, 0);
        m.set_obs(0, 0);
        m.set_obs(1, 1);
        m.set_obs(2, 2);
        m.set_forced(0, 1);
        m.set_prob(1, 0, 2, int(1));
        m.set_prob(1, 1, 2, int(1));
        m.set_reward(1, 1, int(1));
        m.set_forced(2, 2);
        m
    }

    #[test]
    fn full_enumeration_counts_all_policies() {
        let m = model();
        let o = brute_force_stationary_value(&m, &Metric::total(3), &Caps::default()).unwrap();
        assert_eq!(o.enumerated, 8);
        assert_eq!(o.value, int(1));
        assert_eq!(o.policy, StationaryPolicy::new(vec![0, 1, 0]));
    }

    #[test]
    fn pruned_matches_full() {
        let m = model();
        let full = brute_force_stationary_value(&m, &Metric::total(3), &Caps::default()).unwrap();
        let pruned = brute_force_stationary_value_pruned(&m, &Metric::total(3), &Caps::default()).unwrap();
        assert_eq!(pruned.enumerated, 2);
        assert_eq!((full.value, full.policy), (pruned.value, pruned.policy));
    }

    #[test]
    fn cap_enforced() {
        let m = model();
        let caps = Caps { policies: 4, ..Caps::default() };
        assert!(brute_force_stationary_value(&m, &Metric::total(3), &caps).is_err());
        assert!(brute_force_stationary_value_pruned(&m, &Metric::total(3), &caps).is_ok());
    }
}
