use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::evaluation::linalg::solve;
use crate::model::{Pomdp, StationaryPolicy};
use crate::rat::Rat;

/// Markov chain induced by a stationary policy, restricted to the states
/// reachable from the initial state. Local index 0 is the initial state.
struct InducedChain {
    states: Vec<usize>,
    rows: Vec<Vec<(usize, Rat)>>,
    rewards: Vec<Rat>,
}

fn induced_chain(m: &Pomdp, p: &StationaryPolicy) -> InducedChain {
    let mut local: BTreeMap<usize, usize> = BTreeMap::from([(m.initial(), 0)]);
    let mut states = vec![m.initial()];
    let mut rows = Vec::new();
    let mut rewards = Vec::new();
    let mut k = 0;
    while k < states.len() {
        let s = states[k];
        let a = p.action(m.obs(s));
        let mut row = Vec::new();
        for (s2, q) in m.row(s, a) {
            let next = states.len();
            let j = *local.entry(*s2).or_insert(next);
            if j == next {
                states.push(*s2);
            }
            row.push((j, q.clone()));
        }
        rows.push(row);
        rewards.push(m.reward(s, a).clone());
        k += 1;
    }
    InducedChain { states, rows, rewards }
}

fn check_beta(beta: &Rat) -> Result<()> {
    if beta.is_zero() || beta.is_negative() || *beta >= Rat::one() {
        return Err(Error::InvalidArgument("discount factor must lie in (0,1)".into()));
    }
    Ok(())
}

/// Exact infinite-horizon discounted value of a stationary policy, from
/// `V = R + beta P V` on the reachable chain.
pub fn discounted_performance_stationary(m: &Pomdp, p: &StationaryPolicy, beta: &Rat) -> Result<Rat> {
    check_beta(beta)?;
    p.check_domain(m)?;
    let chain = induced_chain(m, p);
    let n = chain.states.len();
    let mut a = vec![vec![Rat::zero(); n]; n];
    for (i, row) in chain.rows.iter().enumerate() {
        a[i][i] = Rat::one();
        for (j, q) in row {
            a[i][*j] -= beta * q;
        }
    }
    let v = solve(a, chain.rewards)?;
    Ok(v[0].clone())
}

/// Exact long-run average reward of a stationary policy from the initial
/// state, via recurrent classes and absorption.
pub fn average_performance_stationary(m: &Pomdp, p: &StationaryPolicy) -> Result<Rat> {
    p.check_domain(m)?;
    let chain = induced_chain(m, p);
    let n = chain.states.len();
    // local index n is a zero-reward sink collecting absorbed mass
    let sink = n;
    let mut rows = chain.rows.clone();
    for row in rows.iter_mut() {
        if row.is_empty() {
            row.push((sink, Rat::one()));
        }
    }
    rows.push(vec![(sink, Rat::one())]);
    let mut rewards = chain.rewards.clone();
    rewards.push(Rat::zero());
    let total = n + 1;

    let mut g = DiGraph::<(), ()>::with_capacity(total, 0);
    let nodes: Vec<_> = (0..total).map(|_| g.add_node(())).collect();
    for (i, row) in rows.iter().enumerate() {
        for (j, _) in row {
            g.add_edge(nodes[i], nodes[*j], ());
        }
    }
    let mut class_of = vec![usize::MAX; total];
    let mut gains: Vec<Option<Rat>> = Vec::new();
    for (c, comp) in tarjan_scc(&g).into_iter().enumerate() {
        let members: Vec<usize> = comp.iter().map(|ix| ix.index()).collect();
        for &s in &members {
            class_of[s] = c;
        }
        gains.push(None);
        let closed = members.iter().all(|&s| rows[s].iter().all(|(j, _)| members.contains(j)));
        if closed {
            gains[c] = Some(class_gain(&members, &rows, &rewards)?);
        }
    }

    // gain vector: fixed on recurrent states, harmonic on transient ones
    let transient: Vec<usize> = (0..total).filter(|&s| gains[class_of[s]].is_none()).collect();
    let fixed = |s: usize| gains[class_of[s]].clone();
    if let Some(g0) = fixed(0) {
        return Ok(g0);
    }
    let pos: BTreeMap<usize, usize> = transient.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let t = transient.len();
    let mut a = vec![vec![Rat::zero(); t]; t];
    let mut b = vec![Rat::zero(); t];
    for (k, &s) in transient.iter().enumerate() {
        a[k][k] += Rat::one();
        for (j, q) in &rows[s] {
            match fixed(*j) {
                Some(gj) => b[k] += q * gj,
                None => a[k][pos[j]] -= q,
            }
        }
    }
    let x = solve(a, b)?;
    Ok(x[pos[&0]].clone())
}

/// Stationary gain of a closed communicating class.
fn class_gain(members: &[usize], rows: &[Vec<(usize, Rat)>], rewards: &[Rat]) -> Result<Rat> {
    let k = members.len();
    if members.iter().all(|&s| rewards[s].is_zero()) {
        return Ok(Rat::zero());
    }
    let pos: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    // x (P - I) = 0 with the last balance equation replaced by sum(x) = 1
    let mut a = vec![vec![Rat::zero(); k]; k];
    for (i, &s) in members.iter().enumerate() {
        for (j, q) in &rows[s] {
            a[pos[j]][i] += q;
        }
        a[i][i] -= Rat::one();
    }
    a[k - 1] = vec![Rat::one(); k];
    let mut b = vec![Rat::zero(); k];
    b[k - 1] = Rat::one();
    let x = solve(a, b)?;
    Ok(members.iter().zip(&x).map(|(&s, xi)| xi * &rewards[s]).sum())
}
