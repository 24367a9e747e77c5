use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::pomdp::Pomdp;

/// Observation → action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StationaryPolicy {
    act: Vec<usize>,
}

impl StationaryPolicy {
    pub fn new(act: Vec<usize>) -> Self {
        StationaryPolicy { act }
    }

    pub fn constant(n_obs: usize, action: usize) -> Self {
        StationaryPolicy { act: vec![action; n_obs] }
    }

    pub fn action(&self, obs: usize) -> usize {
        self.act[obs]
    }

    pub fn actions(&self) -> &[usize] {
        &self.act
    }

    pub fn n_obs(&self) -> usize {
        self.act.len()
    }

    pub fn check_domain(&self, m: &Pomdp) -> Result<()> {
        if self.act.len() != m.n_obs() {
            return Err(Error::DomainMismatch(format!(
                "stationary policy covers {} observations, model has {}",
                self.act.len(),
                m.n_obs()
            )));
        }
        check_actions(self.act.iter().copied(), m)
    }
}

/// (observation, step) → action for steps `0..horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeDependentPolicy {
    /// `act[t][obs]`
    act: Vec<Vec<usize>>,
}

impl TimeDependentPolicy {
    /// `act[t][obs]` gives the action at step `t`.
    pub fn new(act: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(first) = act.first() {
            if act.iter().any(|row| row.len() != first.len()) {
                return Err(Error::InvalidArgument("time-dependent policy rows differ in length".into()));
            }
        }
        Ok(TimeDependentPolicy { act })
    }

    pub fn from_stationary(p: &StationaryPolicy, horizon: usize) -> Self {
        TimeDependentPolicy { act: vec![p.actions().to_vec(); horizon] }
    }

    pub fn horizon(&self) -> usize {
        self.act.len()
    }

    pub fn action(&self, obs: usize, t: usize) -> usize {
        self.act[t][obs]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.act
    }

    pub fn check_domain(&self, m: &Pomdp) -> Result<()> {
        for row in &self.act {
            if row.len() != m.n_obs() {
                return Err(Error::DomainMismatch(format!(
                    "time-dependent policy covers {} observations, model has {}",
                    row.len(),
                    m.n_obs()
                )));
            }
        }
        check_actions(self.act.iter().flatten().copied(), m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HistoryNode {
    action: Option<usize>,
    children: BTreeMap<usize, usize>,
}

impl HistoryNode {
    fn empty() -> Self {
        HistoryNode { action: None, children: BTreeMap::new() }
    }
}

/// Observation sequence → action, stored as a tree branching on observations.
///
/// Node 0 is the empty history; the action for a sequence of length `k` sits
/// at depth `k`. Only sequences that were inserted are defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryPolicy {
    horizon: usize,
    nodes: Vec<HistoryNode>,
}

impl HistoryPolicy {
    pub fn new(horizon: usize) -> Self {
        HistoryPolicy { horizon, nodes: vec![HistoryNode::empty()] }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn child(&self, node: usize, obs: usize) -> Option<usize> {
        self.nodes[node].children.get(&obs).copied()
    }

    pub fn node_action(&self, node: usize) -> Option<usize> {
        self.nodes[node].action
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn insert(&mut self, seq: &[usize], action: usize) -> Result<()> {
        if seq.is_empty() || seq.len() > self.horizon {
            return Err(Error::InvalidArgument(format!(
                "history of length {} outside 1..={}",
                seq.len(),
                self.horizon
            )));
        }
        let mut node = 0;
        for &o in seq {
            node = match self.nodes[node].children.get(&o) {
                Some(&c) => c,
                None => {
                    let c = self.nodes.len();
                    self.nodes.push(HistoryNode::empty());
                    self.nodes[node].children.insert(o, c);
                    c
                }
            };
        }
        self.nodes[node].action = Some(action);
        Ok(())
    }

    pub fn action(&self, seq: &[usize]) -> Option<usize> {
        let mut node = 0;
        for &o in seq {
            node = self.child(node, o)?;
        }
        self.nodes[node].action
    }

    /// Define the policy on every observation sequence of length `1..=horizon`.
    pub fn full(n_obs: usize, horizon: usize, mut f: impl FnMut(&[usize]) -> usize) -> Self {
        let mut p = HistoryPolicy::new(horizon);
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..horizon {
            let mut next = Vec::with_capacity(frontier.len() * n_obs);
            for seq in &frontier {
                for o in 0..n_obs {
                    let mut s = seq.clone();
                    s.push(o);
                    let a = f(&s);
                    p.insert(&s, a).expect("length within horizon");
                    next.push(s);
                }
            }
            frontier = next;
        }
        p
    }

    /// Define the policy on exactly the observation sequences that `m` can
    /// produce under the policy itself, up to length `horizon`.
    pub fn realizable(m: &Pomdp, horizon: usize, mut f: impl FnMut(&[usize]) -> usize) -> Self {
        let mut p = HistoryPolicy::new(horizon);
        if horizon == 0 {
            return p;
        }
        let s0 = m.initial();
        let mut frontier: Vec<(Vec<usize>, Vec<usize>)> = vec![(vec![m.obs(s0)], vec![s0])];
        for depth in 1..=horizon {
            let mut next = Vec::new();
            for (seq, support) in frontier {
                let a = f(&seq);
                p.insert(&seq, a).expect("length within horizon");
                if depth == horizon {
                    continue;
                }
                let mut by_obs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &s in &support {
                    if a >= m.n_actions() {
                        continue;
                    }
                    for (s2, _) in m.row(s, a) {
                        let v = by_obs.entry(m.obs(*s2)).or_default();
                        if !v.contains(s2) {
                            v.push(*s2);
                        }
                    }
                }
                for (o, sup) in by_obs {
                    let mut s = seq.clone();
                    s.push(o);
                    next.push((s, sup));
                }
            }
            frontier = next;
        }
        p
    }

    pub fn check_domain(&self, m: &Pomdp) -> Result<()> {
        for node in &self.nodes {
            if let Some(a) = node.action {
                if a >= m.n_actions() {
                    return Err(Error::DomainMismatch(format!(
                        "history policy uses action {a}, model has {}",
                        m.n_actions()
                    )));
                }
            }
            if let Some((&o, _)) = node.children.iter().next_back() {
                if o >= m.n_obs() {
                    return Err(Error::DomainMismatch(format!(
                        "history policy branches on observation {o}, model has {}",
                        m.n_obs()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Free finite-memory policy: (observation, memory) → (action, memory').
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMemoryPolicy {
    n_memory: usize,
    initial_memory: usize,
    /// `step[obs][mem]`
    step: Vec<Vec<(usize, usize)>>,
}

impl FiniteMemoryPolicy {
    pub fn new(n_memory: usize, initial_memory: usize, step: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if n_memory == 0 || initial_memory >= n_memory {
            return Err(Error::InvalidArgument(format!("initial memory {initial_memory} not in 0..{n_memory}")));
        }
        for row in &step {
            if row.len() != n_memory {
                return Err(Error::InvalidArgument(format!(
                    "finite-memory row has {} entries, expected {n_memory}",
                    row.len()
                )));
            }
            if let Some(&(_, q)) = row.iter().find(|(_, q)| *q >= n_memory) {
                return Err(Error::InvalidArgument(format!("memory state {q} out of range")));
            }
        }
        Ok(FiniteMemoryPolicy { n_memory, initial_memory, step })
    }

    pub fn from_stationary(p: &StationaryPolicy) -> Self {
        let step = p.actions().iter().map(|&a| vec![(a, 0)]).collect();
        FiniteMemoryPolicy { n_memory: 1, initial_memory: 0, step }
    }

    pub fn n_memory(&self) -> usize {
        self.n_memory
    }

    pub fn initial_memory(&self) -> usize {
        self.initial_memory
    }

    pub fn n_obs(&self) -> usize {
        self.step.len()
    }

    pub fn step(&self, obs: usize, mem: usize) -> (usize, usize) {
        self.step[obs][mem]
    }

    pub fn check_domain(&self, m: &Pomdp) -> Result<()> {
        if self.step.len() != m.n_obs() {
            return Err(Error::DomainMismatch(format!(
                "finite-memory policy covers {} observations, model has {}",
                self.step.len(),
                m.n_obs()
            )));
        }
        check_actions(self.step.iter().flatten().map(|(a, _)| *a), m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    Stationary(StationaryPolicy),
    TimeDependent(TimeDependentPolicy),
    History(HistoryPolicy),
    FiniteMemory(FiniteMemoryPolicy),
}

impl Policy {
    pub fn check_domain(&self, m: &Pomdp) -> Result<()> {
        match self {
            Policy::Stationary(p) => p.check_domain(m),
            Policy::TimeDependent(p) => p.check_domain(m),
            Policy::History(p) => p.check_domain(m),
            Policy::FiniteMemory(p) => p.check_domain(m),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Policy::Stationary(_) => "stationary",
            Policy::TimeDependent(_) => "time-dependent",
            Policy::History(_) => "history-dependent",
            Policy::FiniteMemory(_) => "finite-memory",
        }
    }
}

impl From<StationaryPolicy> for Policy {
    fn from(p: StationaryPolicy) -> Self {
        Policy::Stationary(p)
    }
}

impl From<TimeDependentPolicy> for Policy {
    fn from(p: TimeDependentPolicy) -> Self {
        Policy::TimeDependent(p)
    }
}

impl From<HistoryPolicy> for Policy {
    fn from(p: HistoryPolicy) -> Self {
        Policy::History(p)
    }
}

impl From<FiniteMemoryPolicy> for Policy {
    fn from(p: FiniteMemoryPolicy) -> Self {
        Policy::FiniteMemory(p)
    }
}

fn check_actions(mut actions: impl Iterator<Item = usize>, m: &Pomdp) -> Result<()> {
    match actions.find(|&a| a >= m.n_actions()) {
        Some(a) => Err(Error::DomainMismatch(format!("policy uses action {a}, model has {}", m.n_actions()))),
        None => Ok(()),
    }
}
