use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::model::{Metric, Pomdp};
use crate::rat::Rat;

/// Optimal history-dependent value with the number of memoized beliefs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryValue {
    pub value: Rat,
    pub nodes: u64,
}

/// Exact optimal value over history-dependent policies under a finite metric.
///
/// Backward induction over the beliefs reachable by observation histories:
/// `V(b, d) = max_a [ r(b, a) + gamma * sum_o V(b_{a,o}, d + 1) ]` with
/// unnormalized beliefs. `V` is linear in the belief's total mass, so the
/// memo is keyed on the normalized belief and depth. States that cannot
/// reach a nonzero reward are dropped from beliefs.
pub fn exact_history_value(m: &Pomdp, metric: &Metric, caps: &Caps) -> Result<HistoryValue> {
    metric.validate()?;
    m.ensure_valid()?;
    let (h, gamma) = match metric {
        Metric::FiniteTotal { horizon } => (*horizon, Rat::one()),
        Metric::FiniteDiscounted { beta, horizon } => (*horizon, beta.clone()),
        other => {
            return Err(Error::Unsupported(format!("history value needs a finite metric, got {}", other.describe())))
        }
    };
    let live = m.can_reach_reward();
    let mut solver = Solver { m, gamma, h, caps, live, memo: HashMap::new() };
    let b0: Belief = if solver.live[m.initial()] { vec![(m.initial(), Rat::one())] } else { Vec::new() };
    let value = solver.value(&b0, 0)?;
    Ok(HistoryValue { value, nodes: solver.memo.len() as u64 })
}

/// Sparse belief sorted by state.
type Belief = Vec<(usize, Rat)>;

struct Solver<'a> {
    m: &'a Pomdp,
    gamma: Rat,
    h: usize,
    caps: &'a Caps,
    live: Vec<bool>,
    memo: HashMap<(usize, Belief), Rat>,
}

impl Solver<'_> {
    fn value(&mut self, b: &Belief, d: usize) -> Result<Rat> {
        if d == self.h || b.is_empty() {
            return Ok(Rat::zero());
        }
        let mass: Rat = b.iter().map(|(_, p)| p).sum();
        let norm: Belief = b.iter().map(|(s, p)| (*s, p / &mass)).collect();
        let key = (d, norm);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v * mass);
        }
        let norm = &key.1;
        let m = self.m;
        let mut best: Option<Rat> = None;
        for a in 0..m.n_actions() {
            let mut v = Rat::zero();
            for (s, p) in norm {
                let r = m.reward(*s, a);
                if !r.is_zero() {
                    v += p * r;
                }
            }
            if d + 1 < self.h {
                let mut by_obs: BTreeMap<usize, BTreeMap<usize, Rat>> = BTreeMap::new();
                for (s, p) in norm {
                    for (s2, q) in m.row(*s, a) {
                        if self.live[*s2] {
                            *by_obs.entry(m.obs(*s2)).or_default().entry(*s2).or_insert_with(Rat::zero) += p * q;
                        }
                    }
                }
                let mut future = Rat::zero();
                for (_, post) in by_obs {
                    let post: Belief = post.into_iter().collect();
                    future += self.value(&post, d + 1)?;
                }
                v += &self.gamma * future;
            }
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
        let best = best.expect("models have at least one action");
        if self.memo.len() as u64 >= self.caps.nodes {
            return Err(Error::CapExceeded {
                what: "history oracle beliefs",
                needed: format!("more than {}", self.caps.nodes),
                cap: self.caps.nodes,
            });
        }
        self.memo.insert(key, best.clone());
        Ok(best * mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    /// Coin decides the rewarding action; the outcome is observed.
    fn observed_coin() -> Pomdp {
        let mut m = Pomdp::new(4, 2, 3, 0);
        m.set_obs(0, 0);
        m.set_obs(1, 1);
        m.set_obs(2, 2);
        m.set_obs(3, 0);
        for a in 0..2 {
            m.set_prob(0, a, 1, rat(1, 2));
            m.set_prob(0, a, 2, rat(1, 2));
            m.set_prob(1, a, 3, int(1));
            m.set_prob(2, a, 3, int(1));
            m.set_prob(3, a, 3, int(1));
        }
        m.set_reward(1, 0, int(1));
        m.set_reward(2, 1, int(1));
        m
    }

    #[test]
    fn observation_lets_policy_react() {
        let v = exact_history_value(&observed_coin(), &Metric::total(2), &Caps::default()).unwrap();
        assert_eq!(v.value, int(1));
    }

    #[test]
    fn discounting_applies_per_step() {
        let d = Metric::discounted(rat(1, 3), 2).unwrap();
        let v = exact_history_value(&observed_coin(), &d, &Caps::default()).unwrap();
        assert_eq!(v.value, rat(1, 3));
    }

    #[test]
    fn zero_horizon() {
        let v = exact_history_value(&observed_coin(), &Metric::total(0), &Caps::default()).unwrap();
        assert_eq!(v.value, int(0));
    }

    #[test]
    fn node_cap() {
        let caps = Caps { nodes: 1, ..Caps::default() };
        assert!(exact_history_value(&observed_coin(), &Metric::total(3), &caps).is_err());
    }
}
