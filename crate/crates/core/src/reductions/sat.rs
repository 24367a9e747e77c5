use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Cnf, Labels, Metric, Pomdp};
use crate::rat::{self, Rat};
use crate::reductions::{Bound, Claim, GadgetModel, GadgetOutput, PolicyClass};

/// Clause walk shared by the satisfiability gadgets: one state per literal
/// occurrence, then `T` and `F`. Observations are the variables, then `T`, `F`.
struct ClauseWalk {
    model: Pomdp,
    t: usize,
    f: usize,
}

fn clause_walk(phi: &Cnf, reward_t: &Rat, reward_f: &Rat) -> ClauseWalk {
    let total = phi.n_literals();
    let (t, f) = (total, total + 1);
    let n = phi.n_vars();
    let mut m = Pomdp::new(total + 2, 2, n + 2, 0);
    let mut offsets = Vec::with_capacity(phi.n_clauses());
    let mut acc = 0;
    for c in phi.clauses() {
        offsets.push(acc);
        acc += c.len();
    }
    let mut state_names = Vec::with_capacity(total + 2);
    for (j, clause) in phi.clauses().iter().enumerate() {
        for (i, lit) in clause.iter().enumerate() {
            let s = offsets[j] + i;
            state_names.push(format!("x{}@C{}", lit.var + 1, j + 1));
            m.set_obs(s, lit.var);
            for a in 0..2 {
                let (target, reward) = if lit.signum() == a {
                    if j + 1 < phi.n_clauses() {
                        (offsets[j + 1], Rat::zero())
                    } else {
                        (t, reward_t.clone())
                    }
                } else if i + 1 < clause.len() {
                    (s + 1, Rat::zero())
                } else {
                    (f, reward_f.clone())
                };
                m.set_prob(s, a, target, Rat::one());
                m.set_reward(s, a, reward);
            }
        }
    }
    state_names.push("T".into());
    state_names.push("F".into());
    m.set_obs(t, n);
    m.set_obs(f, n + 1);
    m.set_forced(t, t);
    m.set_forced(f, f);
    let mut observations: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    observations.push("T".into());
    observations.push("F".into());
    m.set_labels(Labels { states: state_names, actions: vec!["0".into(), "1".into()], observations });
    ClauseWalk { model: m, t, f }
}

fn stationary_claim(metric: Metric, yes: Rat, no: Rat) -> Claim {
    Claim { class: PolicyClass::Stationary, metric, yes: Bound::Eq(yes), no: Bound::Eq(no) }
}

/// Deterministic clause-walk POMDP whose stationary value is 1 exactly when
/// `phi` is satisfiable and 0 otherwise. Policies are assignments: the
/// action on observation `x_i` is the value of `x_i`.
pub fn threesat_to_pomdp(phi: &Cnf) -> GadgetOutput {
    let w = clause_walk(phi, &Rat::one(), &Rat::zero());
    let h = w.model.n_states();
    let metric = Metric::total(h);
    GadgetOutput {
        model: GadgetModel::Pomdp(w.model),
        recommended_horizon: h,
        recommended_metric: metric.clone(),
        claims: vec![stationary_claim(metric, Rat::one(), Rat::zero())],
        ssat_layout: None,
    }
}

/// `ceil(2 / (1 - eps))`.
pub fn gap_reward(eps: &Rat) -> Result<BigInt> {
    if *eps < Rat::zero() || *eps >= Rat::one() {
        return Err(Error::InvalidArgument(format!("eps must lie in [0,1), got {}", rat::fmt(eps))));
    }
    Ok(rat::ceil_int(&(rat::int(2) / (Rat::one() - eps))))
}

/// Clause walk paying 1 on entering `F` and `ceil(2/(1-eps))` on entering
/// `T`, so every policy earns more than 1 exactly when it satisfies `phi`.
pub fn epsilon_gap_gadget(phi: &Cnf, eps: &Rat) -> Result<GadgetOutput> {
    let high = Rat::from_integer(gap_reward(eps)?);
    let w = clause_walk(phi, &high, &Rat::one());
    let h = w.model.n_states();
    let metric = Metric::total(h);
    Ok(GadgetOutput {
        model: GadgetModel::Pomdp(w.model),
        recommended_horizon: h,
        recommended_metric: metric.clone(),
        claims: vec![stationary_claim(metric, high, Rat::one())],
        ssat_layout: None,
    })
}

/// Clause walk whose `T` self-loop pays 1 on every action: stationary
/// average value 1 when satisfiable, else 0; discounted value positive
/// exactly when satisfiable.
pub fn infinite_horizon_sat_gadget(phi: &Cnf) -> GadgetOutput {
    let mut w = clause_walk(phi, &Rat::one(), &Rat::zero());
    for a in 0..2 {
        w.model.set_reward(w.t, a, Rat::one());
    }
    debug_assert!(w.f == w.t + 1);
    let disc = Metric::infinite_discounted(rat::rat(1, 2)).expect("1/2 is a valid discount");
    let claims = vec![
        stationary_claim(Metric::Average, Rat::one(), Rat::zero()),
        Claim { class: PolicyClass::Stationary, metric: disc, yes: Bound::Gt(Rat::zero()), no: Bound::Eq(Rat::zero()) },
    ];
    let h = w.model.n_states();
    GadgetOutput {
        model: GadgetModel::Pomdp(w.model),
        recommended_horizon: h,
        recommended_metric: Metric::Average,
        claims,
        ssat_layout: None,
    }
}
