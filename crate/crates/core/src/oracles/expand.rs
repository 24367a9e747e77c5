use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::caps::{saturating_pow, Caps};
use crate::error::{Error, Result};
use crate::model::tbn::bits_to_string;
use crate::model::{Circuit, Labels, Pomdp, SuccinctReward, Tbn};
use crate::rat::{self, Rat};

/// Flat index of an assignment: fluent `k` is bit `k`.
pub fn assignment_index(bits: &[bool]) -> usize {
    bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (b as usize) << k)
}

pub fn index_assignment(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|k| index >> k & 1 == 1).collect()
}

fn tbn_labels(states: &[Vec<bool>], n_actions: usize) -> Labels {
    let names: Vec<String> = states.iter().map(|b| bits_to_string(b)).collect();
    Labels { states: names.clone(), actions: (0..n_actions).map(|a| format!("a{a}")).collect(), observations: names }
}

/// Fully observable flat MDP over all `2^n` fluent assignments.
pub fn expand_2tbn(t: &Tbn, caps: &Caps) -> Result<Pomdp> {
    let n = t.n_fluents();
    let count = saturating_pow(2, n as u128);
    Caps::check("expanded states", count, caps.states)?;
    let count = count as usize;
    let states: Vec<Vec<bool>> = (0..count).map(|i| index_assignment(i, n)).collect();
    let mut m = Pomdp::new(count, t.n_actions(), count, assignment_index(t.initial()));
    for (s, bits) in states.iter().enumerate() {
        m.set_obs(s, s);
        for a in 0..t.n_actions() {
            for (next, p) in t.successors(bits, a) {
                m.set_prob(s, a, assignment_index(&next), p);
            }
            m.set_reward(s, a, t.reward(bits, a)?);
        }
    }
    m.set_labels(tbn_labels(&states, t.n_actions()));
    Ok(m)
}

/// Flat MDP over the assignments reachable from the initial one, in
/// breadth-first order (state 0 is the initial assignment). Returns the
/// assignment behind every state.
pub fn expand_2tbn_reachable(t: &Tbn, caps: &Caps) -> Result<(Pomdp, Vec<Vec<bool>>)> {
    let mut index: HashMap<Vec<bool>, usize> = HashMap::from([(t.initial().to_vec(), 0)]);
    let mut states = vec![t.initial().to_vec()];
    let mut edges: Vec<Vec<Vec<(usize, Rat)>>> = Vec::new();
    let mut rewards: Vec<Vec<Rat>> = Vec::new();
    let mut k = 0;
    while k < states.len() {
        let bits = states[k].clone();
        let mut per_action = Vec::with_capacity(t.n_actions());
        let mut r = Vec::with_capacity(t.n_actions());
        for a in 0..t.n_actions() {
            let mut row = Vec::new();
            for (next, p) in t.successors(&bits, a) {
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        let j = states.len();
                        Caps::check("reachable states", j as u128 + 1, caps.states)?;
                        index.insert(next.clone(), j);
                        states.push(next);
                        j
                    }
                };
                row.push((j, p));
            }
            per_action.push(row);
            r.push(t.reward(&bits, a)?);
        }
        edges.push(per_action);
        rewards.push(r);
        k += 1;
    }
    let n = states.len();
    let mut m = Pomdp::new(n, t.n_actions(), n, 0);
    for s in 0..n {
        m.set_obs(s, s);
        for a in 0..t.n_actions() {
            for (j, p) in &edges[s][a] {
                m.set_prob(s, a, *j, p.clone());
            }
            m.set_reward(s, a, rewards[s][a].clone());
        }
    }
    m.set_labels(tbn_labels(&states, t.n_actions()));
    Ok((m, states))
}

/// Bit widths of a succinctly described MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuccinctWidths {
    pub state_bits: usize,
    pub action_bits: usize,
    /// Width of the probability bit index; bit `i` weighs `2^-i`.
    pub prob_index_bits: usize,
}

/// Assemble a flat MDP from a transition-bit circuit and a reward circuit.
///
/// `ct` reads `(s, a, s', i)`, each least significant bit first, and emits
/// bit `i` of `t(s, a, s')`. State 0 is initial; the model is fully
/// observable.
pub fn expand_succinct_mdp(ct: &Circuit, cr: &SuccinctReward, w: SuccinctWidths, caps: &Caps) -> Result<Pomdp> {
    let want = 2 * w.state_bits + w.action_bits + w.prob_index_bits;
    if ct.n_inputs() != want || ct.outputs().len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "transition circuit needs {want} inputs and one output, has {} and {}",
            ct.n_inputs(),
            ct.outputs().len()
        )));
    }
    if cr.state_bits != w.state_bits || cr.action_bits != w.action_bits {
        return Err(Error::InvalidArgument("reward circuit widths disagree with the transition circuit".into()));
    }
    let n_states = saturating_pow(2, w.state_bits as u128);
    Caps::check("expanded states", n_states, caps.states)?;
    let n_actions = saturating_pow(2, w.action_bits as u128);
    Caps::check("expanded actions", n_actions, caps.states)?;
    if w.prob_index_bits > 16 {
        return Err(Error::CapExceeded {
            what: "probability bit width",
            needed: format!("2^{}", w.prob_index_bits),
            cap: 1 << 16,
        });
    }
    let (n_states, n_actions) = (n_states as usize, n_actions as usize);
    let n_bits = 1usize << w.prob_index_bits;
    let mut m = Pomdp::new(n_states, n_actions, n_states, 0);
    let mut ins = Vec::with_capacity(want);
    for s in 0..n_states {
        m.set_obs(s, s);
        let sbits = index_assignment(s, w.state_bits);
        for a in 0..n_actions {
            let mut sum = Rat::zero();
            for s2 in 0..n_states {
                let mut p = Rat::zero();
                for i in 0..n_bits {
                    ins.clear();
                    ins.extend_from_slice(&sbits);
                    ins.extend((0..w.action_bits).map(|k| a >> k & 1 == 1));
                    ins.extend((0..w.state_bits).map(|k| s2 >> k & 1 == 1));
                    ins.extend((0..w.prob_index_bits).map(|k| i >> k & 1 == 1));
                    if ct.eval(&ins)?[0] {
                        p += Rat::one() / rat::pow2(i as u64);
                    }
                }
                if !p.is_zero() {
                    sum += &p;
                    m.set_prob(s, a, s2, p);
                }
            }
            if !sum.is_zero() && !sum.is_one() {
                return Err(Error::InvalidModel(format!("row ({s}, {a}) sums to {}, expected 0 or 1", rat::fmt(&sum))));
            }
            m.set_reward(s, a, cr.materialize(&sbits, a)?);
        }
    }
    Ok(m)
}
