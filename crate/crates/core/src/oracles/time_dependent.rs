use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::evaluation::{initial_distribution, StateDistribution};
use crate::model::{Metric, Pomdp, TimeDependentPolicy};
use crate::oracles::Optimum;
use crate::rat::Rat;

/// Exact optimum over all time-dependent policies of horizon `h`.
///
/// The search branches, step by step, only on observations that carry
/// probability mass at that step; the others are pinned to action 0, which
/// changes nothing and keeps the witness lexicographically smallest in
/// (step, observation) order. `enumerated` counts complete action tables
/// that were evaluated.
pub fn brute_force_time_dependent_value(
    m: &Pomdp,
    metric: &Metric,
    caps: &Caps,
) -> Result<Optimum<TimeDependentPolicy>> {
    metric.validate()?;
    m.ensure_valid()?;
    let (h, gamma) = match metric {
        Metric::FiniteTotal { horizon } => (*horizon, Rat::one()),
        Metric::FiniteDiscounted { beta, horizon } => (*horizon, beta.clone()),
        other => {
            return Err(Error::Unsupported(format!(
                "time-dependent optimum needs a finite metric, got {}",
                other.describe()
            )))
        }
    };
    let mut s = Search { m, gamma, h, caps, enumerated: 0, table: vec![vec![0; m.n_obs()]; h], best: None };
    s.descend(0, initial_distribution(m), Rat::zero(), Rat::one())?;
    let (value, table) = s.best.expect("at least one policy");
    Ok(Optimum { value, policy: TimeDependentPolicy::new(table)?, enumerated: s.enumerated })
}

struct Search<'a> {
    m: &'a Pomdp,
    gamma: Rat,
    h: usize,
    caps: &'a Caps,
    enumerated: u64,
    table: Vec<Vec<usize>>,
    best: Option<(Rat, Vec<Vec<usize>>)>,
}

impl Search<'_> {
    fn descend(&mut self, t: usize, dist: StateDistribution, acc: Rat, weight: Rat) -> Result<()> {
        if t == self.h || dist.is_empty() {
            self.enumerated += 1;
            if self.enumerated > self.caps.policies {
                return Err(Error::CapExceeded {
                    what: "time-dependent policies",
                    needed: format!("more than {}", self.caps.policies),
                    cap: self.caps.policies,
                });
            }
            if self.best.as_ref().is_none_or(|(b, _)| acc > *b) {
                self.best = Some((acc, self.table.clone()));
            }
            return Ok(());
        }
        let present: Vec<usize> = dist.keys().map(|&s| self.m.obs(s)).collect::<BTreeSet<_>>().into_iter().collect();
        let a = self.m.n_actions();
        let mut choice = vec![0usize; present.len()];
        loop {
            for (k, &o) in present.iter().enumerate() {
                self.table[t][o] = choice[k];
            }
            let m = self.m;
            let row = &self.table[t];
            let mut gained = Rat::zero();
            let mut next = StateDistribution::new();
            for (&s, p) in &dist {
                let act = row[m.obs(s)];
                let r = m.reward(s, act);
                if !r.is_zero() {
                    gained += p * r;
                }
                if t + 1 < self.h {
                    for (s2, q) in m.row(s, act) {
                        *next.entry(*s2).or_insert_with(Rat::zero) += p * q;
                    }
                }
            }
            let acc2 = &acc + &weight * gained;
            let w2 = &weight * &self.gamma;
            self.descend(t + 1, next, acc2, w2)?;
            let mut k = present.len();
            loop {
                if k == 0 {
                    for &o in &present {
                        self.table[t][o] = 0;
                    }
                    return Ok(());
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < a {
                    break;
                }
                choice[k] = 0;
            }
        }
    }
}
