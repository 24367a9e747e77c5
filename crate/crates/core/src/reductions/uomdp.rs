use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Cnf, Labels, Metric, Pomdp};
use crate::rat::{self, Rat};
use crate::reductions::{Bound, Claim, GadgetModel, GadgetOutput, PolicyClass};

/// Lay out one unobservable clause-sampling copy.
///
/// States `(i, j)` sit at `base + (i-1)*m + (j-1)` and `sat_i` at
/// `base + n*m + (i-1)`. Transitions into `t` pay `reward_t`.
fn add_copy(m: &mut Pomdp, phi: &Cnf, s0: usize, base: usize, t: usize, f: usize, reward_t: &Rat) {
    let (n, mc) = (phi.n_vars(), phi.n_clauses());
    let cell = |i: usize, j: usize| base + (i - 1) * mc + (j - 1);
    let sat = |i: usize| base + n * mc + (i - 1);
    let p = rat::rat(1, mc as i64);
    for a in 0..2 {
        for j in 1..=mc {
            m.set_prob(s0, a, cell(1, j), p.clone());
        }
    }
    for i in 1..=n {
        for j in 1..=mc {
            let s = cell(i, j);
            for a in 0..2 {
                let hit = phi.signum_in(i - 1, j - 1) == Some(a);
                let target = match (hit, i < n) {
                    (true, true) => sat(i + 1),
                    (false, true) => cell(i + 1, j),
                    (true, false) => t,
                    (false, false) => f,
                };
                m.set_prob(s, a, target, Rat::one());
                if target == t {
                    m.set_reward(s, a, reward_t.clone());
                }
            }
        }
        let next = if i < n { sat(i + 1) } else { t };
        for a in 0..2 {
            m.set_prob(sat(i), a, next, Rat::one());
            if next == t {
                m.set_reward(sat(i), a, reward_t.clone());
            }
        }
    }
}

fn copy_labels(phi: &Cnf, suffix: &str) -> Vec<String> {
    let (n, mc) = (phi.n_vars(), phi.n_clauses());
    let mut names = Vec::with_capacity(n * mc + n);
    for i in 1..=n {
        for j in 1..=mc {
            names.push(format!("({i},{j}){suffix}"));
        }
    }
    names.extend((1..=n).map(|i| format!("sat{i}{suffix}")));
    names
}

fn unobservable_labels(states: Vec<String>) -> Labels {
    Labels { states, actions: vec!["0".into(), "1".into()], observations: vec!["*".into()] }
}

/// Unobservable MDP in which a clause is sampled uniformly and then the
/// action at step `i + 1` assigns `x_i`. Reaching `T` pays `m`, so the
/// time-dependent value is the maximum number of satisfiable clauses.
pub fn threesat_to_uomdp(phi: &Cnf) -> GadgetOutput {
    let (n, mc) = (phi.n_vars(), phi.n_clauses());
    let base = 1;
    let t = base + n * mc + n;
    let f = t + 1;
    let mut m = Pomdp::new(f + 1, 2, 1, 0);
    add_copy(&mut m, phi, 0, base, t, f, &rat::int(mc as i64));
    m.set_forced(t, t);
    m.set_forced(f, f);
    let mut names = vec!["s0".to_string()];
    names.extend(copy_labels(phi, ""));
    names.extend(["T".to_string(), "F".to_string()]);
    m.set_labels(unobservable_labels(names));
    let h = n + 1;
    let metric = Metric::total(h);
    let mcr = rat::int(mc as i64);
    GadgetOutput {
        model: GadgetModel::Pomdp(m),
        recommended_horizon: h,
        recommended_metric: metric.clone(),
        claims: vec![Claim {
            class: PolicyClass::TimeDependent,
            metric,
            yes: Bound::Eq(mcr.clone()),
            no: Bound::Le(mcr - Rat::one()),
        }],
        ssat_layout: None,
    }
}

/// Number of chained copies used by [`amplify_uomdp`].
pub fn amplify_uomdp_chain_length(phi: &Cnf) -> usize {
    phi.n_clauses() * phi.n_clauses()
}

/// Chain of `m^2` reward-free copies of the clause-sampling MDP. Each copy's
/// `T` is the next copy's start and all error states merge into one sink
/// `F`. The last `T` is a collecting state paying 1 (or `beta^-(m^2(n+1))`
/// when discounted) on its single step, reached after exactly `m^2 (n+1)`
/// steps. Value 1 when satisfiable, at most `(1 - 1/m)^(m^2)` otherwise.
pub fn amplify_uomdp(phi: &Cnf, discount: Option<&Rat>) -> Result<GadgetOutput> {
    let (n, mc) = (phi.n_vars(), phi.n_clauses());
    let copies = amplify_uomdp_chain_length(phi);
    let run = copies * (n + 1);
    let final_reward = match discount {
        None => Rat::one(),
        Some(beta) => {
            if beta.is_zero() || *beta < Rat::zero() || *beta >= Rat::one() {
                return Err(Error::InvalidArgument("discount factor must lie in (0,1)".into()));
            }
            rat::powi(beta, -(run as i64))
        }
    };
    let block = 1 + n * mc + n;
    let collect = copies * block;
    let f = collect + 1;
    let mut m = Pomdp::new(f + 1, 2, 1, 0);
    let mut names = Vec::with_capacity(f + 1);
    for c in 0..copies {
        let s0 = c * block;
        let t = if c + 1 < copies { (c + 1) * block } else { collect };
        add_copy(&mut m, phi, s0, s0 + 1, t, f, &Rat::zero());
        names.push(format!("s0#{}", c + 1));
        names.extend(copy_labels(phi, &format!("#{}", c + 1)));
    }
    for a in 0..2 {
        m.set_prob(collect, a, f, Rat::one());
        m.set_reward(collect, a, final_reward.clone());
    }
    m.set_forced(f, f);
    names.extend(["T".to_string(), "F".to_string()]);
    m.set_labels(unobservable_labels(names));
    let h = run + 1;
    let metric = match discount {
        None => Metric::total(h),
        Some(beta) => Metric::discounted(beta.clone(), h)?,
    };
    let miss = Rat::one() - rat::rat(1, mc as i64);
    Ok(GadgetOutput {
        model: GadgetModel::Pomdp(m),
        recommended_horizon: h,
        recommended_metric: metric.clone(),
        claims: vec![Claim {
            class: PolicyClass::TimeDependent,
            metric,
            yes: Bound::Eq(Rat::one()),
            no: Bound::Le(rat::powi(&miss, copies as i64)),
        }],
        ssat_layout: None,
    })
}
