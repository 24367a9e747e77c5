use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::circuit::Circuit;
use crate::rat::{self, Rat};

/// Where a fluent's parent value is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parent {
    /// Asynchronous edge from the current slice.
    Current(usize),
    /// Synchronous edge from the next slice.
    Next(usize),
}

/// Conditional distribution of one next-slice fluent.
///
/// `cpt[row]` is `Pr[fluent' = 1]`, where `row` reads the parent values as a
/// binary number with the first parent as the most significant bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentCpt {
    pub parents: Vec<Parent>,
    pub cpt: Vec<Rat>,
}

impl FluentCpt {
    pub fn new(parents: Vec<Parent>, cpt: Vec<Rat>) -> Self {
        FluentCpt { parents, cpt }
    }

    /// Deterministic fluent computed by `f` over the parent bits.
    pub fn deterministic(parents: Vec<Parent>, f: impl Fn(&[bool]) -> bool) -> Self {
        let k = parents.len();
        let cpt = (0..1usize << k)
            .map(|row| {
                let bits = row_bits(row, k);
                if f(&bits) {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        FluentCpt { parents, cpt }
    }

    pub fn probability(&self, current: &[bool], next: &[bool]) -> &Rat {
        let mut row = 0usize;
        for p in &self.parents {
            let bit = match *p {
                Parent::Current(i) => current[i],
                Parent::Next(i) => next[i],
            };
            row = row << 1 | bit as usize;
        }
        &self.cpt[row]
    }
}

/// Parent bits of a CPT row, first parent first.
pub fn row_bits(row: usize, n_parents: usize) -> Vec<bool> {
    (0..n_parents).map(|k| row >> (n_parents - 1 - k) & 1 == 1).collect()
}

/// Reward circuit: on inputs (state bits, action bits, bit index) it emits one
/// bit of `r(state, action)`. Bit `b` carries weight `2^b`; indices at or
/// above `2^index_bits` are 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctReward {
    pub circuit: Circuit,
    pub state_bits: usize,
    pub action_bits: usize,
    pub index_bits: usize,
}

/// Largest index width [`SuccinctReward::materialize`] will sweep.
pub const MAX_MATERIALIZED_INDEX_BITS: usize = 16;

impl SuccinctReward {
    pub fn new(circuit: Circuit, state_bits: usize, action_bits: usize, index_bits: usize) -> Result<Self> {
        let want = state_bits + action_bits + index_bits;
        if circuit.n_inputs() != want {
            return Err(Error::InvalidArgument(format!(
                "reward circuit has {} inputs, expected {want}",
                circuit.n_inputs()
            )));
        }
        if circuit.outputs().len() != 1 {
            return Err(Error::InvalidArgument("reward circuit must have exactly one output".into()));
        }
        Ok(SuccinctReward { circuit, state_bits, action_bits, index_bits })
    }

    pub fn bit(&self, state: &[bool], action: usize, index: &BigUint) -> Result<bool> {
        if state.len() != self.state_bits {
            return Err(Error::InvalidArgument(format!(
                "state has {} bits, reward circuit expects {}",
                state.len(),
                self.state_bits
            )));
        }
        if index.bits() > self.index_bits as u64 {
            return Ok(false);
        }
        let mut ins = Vec::with_capacity(self.state_bits + self.action_bits + self.index_bits);
        ins.extend_from_slice(state);
        ins.extend((0..self.action_bits).map(|k| action >> k & 1 == 1));
        ins.extend((0..self.index_bits).map(|k| index.bit(k as u64)));
        Ok(self.circuit.eval(&ins)?[0])
    }

    /// Assemble the full reward by querying every bit.
    pub fn materialize(&self, state: &[bool], action: usize) -> Result<Rat> {
        if self.index_bits > MAX_MATERIALIZED_INDEX_BITS {
            return Err(Error::CapExceeded {
                what: "reward bit width",
                needed: format!("2^{}", self.index_bits),
                cap: 1 << MAX_MATERIALIZED_INDEX_BITS,
            });
        }
        let mut value = BigUint::zero();
        for b in 0..1u64 << self.index_bits {
            if self.bit(state, action, &BigUint::from(b))? {
                value.set_bit(b, true);
            }
        }
        Ok(Rat::from_integer(value.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TbnReward {
    Zero,
    /// Explicit nonzero entries keyed by (assignment, action).
    Table(BTreeMap<(Vec<bool>, usize), Rat>),
    Circuit(SuccinctReward),
}

/// Two-slice temporal Bayes net over binary fluents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tbn {
    fluents: Vec<String>,
    /// `actions[a][k]` is the model of fluent `k` under action `a`.
    actions: Vec<Vec<FluentCpt>>,
    orders: Vec<Vec<usize>>,
    initial: Vec<bool>,
    reward: TbnReward,
}

impl Tbn {
    pub fn new(
        fluents: Vec<String>,
        actions: Vec<Vec<FluentCpt>>,
        initial: Vec<bool>,
        reward: TbnReward,
    ) -> Result<Self> {
        let n = fluents.len();
        if actions.is_empty() {
            return Err(Error::InvalidArgument("2TBN has no actions".into()));
        }
        for (i, name) in fluents.iter().enumerate() {
            if name.is_empty() || name.ends_with('\'') || name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("bad fluent name {name:?}")));
            }
            if fluents[..i].contains(name) {
                return Err(Error::InvalidArgument(format!("duplicate fluent {name:?}")));
            }
        }
        if initial.len() != n {
            return Err(Error::InvalidArgument(format!("initial assignment has {} bits, expected {n}", initial.len())));
        }
        let mut orders = Vec::with_capacity(actions.len());
        for (a, models) in actions.iter().enumerate() {
            if models.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "action {a} defines {} fluents, expected {n}",
                    models.len()
                )));
            }
            for (k, m) in models.iter().enumerate() {
                if m.cpt.len() != 1 << m.parents.len() {
                    return Err(Error::InvalidArgument(format!(
                        "action {a}, fluent {}: {} CPT rows for {} parents",
                        fluents[k],
                        m.cpt.len(),
                        m.parents.len()
                    )));
                }
                for p in &m.parents {
                    let (Parent::Current(i) | Parent::Next(i)) = *p;
                    if i >= n {
                        return Err(Error::InvalidArgument(format!(
                            "action {a}, fluent {}: parent {i} out of range",
                            fluents[k]
                        )));
                    }
                }
                if let Some(p) = m.cpt.iter().find(|p| !rat::in_unit_interval(p)) {
                    return Err(Error::InvalidArgument(format!(
                        "action {a}, fluent {}: CPT probability {} outside [0,1]",
                        fluents[k],
                        rat::fmt(p)
                    )));
                }
            }
            orders.push(sync_order(models, &fluents, a)?);
        }
        if let TbnReward::Circuit(c) = &reward {
            if c.state_bits != n {
                return Err(Error::InvalidArgument(format!(
                    "reward circuit reads {} state bits, 2TBN has {n} fluents",
                    c.state_bits
                )));
            }
            if (actions.len() - 1) >> c.action_bits.min(63) != 0 {
                return Err(Error::InvalidArgument("reward circuit action width too small".into()));
            }
        }
        if let TbnReward::Table(t) = &reward {
            if let Some(((bits, a), _)) = t.iter().find(|((bits, a), _)| bits.len() != n || *a >= actions.len()) {
                return Err(Error::InvalidArgument(format!(
                    "reward entry ({}, {a}) does not fit the 2TBN",
                    bits_to_string(bits)
                )));
            }
        }
        Ok(Tbn { fluents, actions, orders, initial, reward })
    }

    pub fn fluents(&self) -> &[String] {
        &self.fluents
    }

    pub fn n_fluents(&self) -> usize {
        self.fluents.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn fluent_index(&self, name: &str) -> Option<usize> {
        self.fluents.iter().position(|f| f == name)
    }

    pub fn model(&self, action: usize, fluent: usize) -> &FluentCpt {
        &self.actions[action][fluent]
    }

    pub fn initial(&self) -> &[bool] {
        &self.initial
    }

    pub fn reward_spec(&self) -> &TbnReward {
        &self.reward
    }

    /// Next-slice distribution from `state` under `action`, listing only
    /// assignments of positive probability, sorted.
    pub fn successors(&self, state: &[bool], action: usize) -> Vec<(Vec<bool>, Rat)> {
        let models = &self.actions[action];
        let mut branches: Vec<(Vec<bool>, Rat)> = vec![(vec![false; self.fluents.len()], Rat::one())];
        for &k in &self.orders[action] {
            let mut next = Vec::with_capacity(branches.len());
            for (mut bits, p) in branches {
                let p1 = models[k].probability(state, &bits).clone();
                if p1.is_one() {
                    bits[k] = true;
                    next.push((bits, p));
                } else if p1.is_zero() {
                    next.push((bits, p));
                } else {
                    let mut on = bits.clone();
                    on[k] = true;
                    next.push((on, &p * &p1));
                    next.push((bits, p * (Rat::one() - p1)));
                }
            }
            branches = next;
        }
        branches.sort_by(|a, b| a.0.cmp(&b.0));
        branches.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += &later.1;
                true
            } else {
                false
            }
        });
        branches
    }

    pub fn reward(&self, state: &[bool], action: usize) -> Result<Rat> {
        match &self.reward {
            TbnReward::Zero => Ok(Rat::zero()),
            TbnReward::Table(t) => Ok(t.get(&(state.to_vec(), action)).cloned().unwrap_or_else(Rat::zero)),
            TbnReward::Circuit(c) => c.materialize(state, action),
        }
    }
}

fn sync_order(models: &[FluentCpt], names: &[String], action: usize) -> Result<Vec<usize>> {
    let n = models.len();
    let mut state = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (k, ref mut next)) = stack.last_mut() {
            let sync: Vec<usize> = models[k]
                .parents
                .iter()
                .filter_map(|p| if let Parent::Next(i) = p { Some(*i) } else { None })
                .collect();
            if *next < sync.len() {
                let j = sync[*next];
                *next += 1;
                match state[j] {
                    0 => {
                        state[j] = 1;
                        stack.push((j, 0));
                    }
                    1 => {
                        return Err(Error::Cycle(format!(
                            "synchronous edges under action {action} loop through fluent {}",
                            names[j]
                        )))
                    }
                    _ => {}
                }
            } else {
                state[k] = 2;
                order.push(k);
                stack.pop();
            }
        }
    }
    Ok(order)
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Gate-type codes emitted by a succinct circuit description.
pub mod gate_type {
    pub const BITS: usize = 3;
    pub const AND: usize = 0;
    pub const OR: usize = 1;
    pub const NOT: usize = 2;
    pub const CONST0: usize = 3;
    pub const CONST1: usize = 4;
    /// The fictitious gate 0 that absorbs every trajectory.
    pub const SINK: usize = 5;
}

/// Succinct circuit-value instance: a circuit `S` that maps
/// `(gate index i, neighbor selector k)` to `(neighbor j, type of j)`.
///
/// Inputs of `S` are `width` bits of `i` (least significant first) followed
/// by two bits of `k`; outputs are `width` bits of `j` followed by the
/// [`gate_type::BITS`] type bits, both least significant first. Gate 0 is
/// the sink; the gate whose value is asked for is gate 1. Selectors 0 and 1
/// address the predecessors, 2 and 3 the successors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccinctCircuitInstance {
    pub circuit: Circuit,
    pub width: usize,
}

impl SuccinctCircuitInstance {
    pub fn new(circuit: Circuit, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidArgument("gate index width must be positive".into()));
        }
        if circuit.n_inputs() != width + 2 {
            return Err(Error::InvalidArgument(format!(
                "succinct circuit has {} inputs, expected {} (index) + 2 (selector)",
                circuit.n_inputs(),
                width
            )));
        }
        if circuit.outputs().len() != width + gate_type::BITS {
            return Err(Error::InvalidArgument(format!(
                "succinct circuit has {} outputs, expected {} (neighbor) + {} (type)",
                circuit.outputs().len(),
                width,
                gate_type::BITS
            )));
        }
        Ok(SuccinctCircuitInstance { circuit, width })
    }

    /// Evaluate `S(i, k) = (j, type of j)`.
    pub fn query(&self, i: usize, k: usize) -> Result<(usize, usize)> {
        let mut ins: Vec<bool> = (0..self.width).map(|b| i >> b & 1 == 1).collect();
        ins.push(k & 1 == 1);
        ins.push(k & 2 == 2);
        let out = self.circuit.eval(&ins)?;
        let j = (0..self.width).fold(0, |acc, b| acc | (out[b] as usize) << b);
        let t = (0..gate_type::BITS).fold(0, |acc, b| acc | (out[self.width + b] as usize) << b);
        Ok((j, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn coin_and_copy() -> Tbn {
        // fluent 0: fair coin; fluent 1: copy of fluent 0 (synchronous)
        let coin = FluentCpt::new(vec![], vec![rat(1, 2)]);
        let copy = FluentCpt::deterministic(vec![Parent::Next(0)], |b| b[0]);
        Tbn::new(vec!["c".into(), "d".into()], vec![vec![coin, copy]], vec![false, false], TbnReward::Zero).unwrap()
    }

    #[test]
    fn successors_follow_synchronous_order() {
        let t = coin_and_copy();
        let succ = t.successors(&[false, false], 0);
        assert_eq!(succ, vec![(vec![false, false], rat(1, 2)), (vec![true, true], rat(1, 2))]);
    }

    #[test]
    fn synchronous_cycle_rejected() {
        let a = FluentCpt::deterministic(vec![Parent::Next(1)], |b| b[0]);
        let b = FluentCpt::deterministic(vec![Parent::Next(0)], |b| b[0]);
        let r = Tbn::new(vec!["a".into(), "b".into()], vec![vec![a, b]], vec![false; 2], TbnReward::Zero);
        assert!(matches!(r, Err(Error::Cycle(_))));
    }

    #[test]
    fn cpt_range_checked() {
        let bad = FluentCpt::new(vec![], vec![rat(3, 2)]);
        let r = Tbn::new(vec!["a".into()], vec![vec![bad]], vec![false], TbnReward::Zero);
        assert!(r.is_err());
    }

    #[test]
    fn row_bit_order() {
        assert_eq!(row_bits(1, 2), vec![false, true]);
        let f = FluentCpt::deterministic(vec![Parent::Current(0), Parent::Current(1)], |b| b[0] && !b[1]);
        assert_eq!(f.cpt, vec![int(0), int(0), int(1), int(0)]);
    }
}
