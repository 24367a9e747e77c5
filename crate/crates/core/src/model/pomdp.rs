use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Optional human-readable names. Ignored by equality and by the text format
/// (the serializer emits them as comments).
#[derive(Debug, Clone, Default)]
pub struct Labels {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
}

/// A flat POMDP with deterministic observations.
///
/// Transitions are stored sparsely per `(state, action)` as a list of
/// `(successor, probability)` pairs sorted by successor, with no zero entries.
/// A row may be empty: mass that reaches such a row is absorbed.
#[derive(Debug, Clone)]
pub struct Pomdp {
    n_states: usize,
    n_actions: usize,
    n_obs: usize,
    initial: usize,
    obs: Vec<usize>,
    trans: Vec<Vec<Vec<(usize, Rat)>>>,
    reward: Vec<Vec<Rat>>,
    labels: Option<Labels>,
}

impl PartialEq for Pomdp {
    fn eq(&self, other: &Self) -> bool {
        self.n_states == other.n_states
            && self.n_actions == other.n_actions
            && self.n_obs == other.n_obs
            && self.initial == other.initial
            && self.obs == other.obs
            && self.trans == other.trans
            && self.reward == other.reward
    }
}

impl Eq for Pomdp {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservabilityClass {
    FullyObservable,
    Unobservable,
    General,
}

/// One broken invariant, with enough location data to find it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoStates,
    NoActions,
    NoObservations,
    InitialOutOfRange { initial: usize },
    ObservationOutOfRange { state: usize, obs: usize },
    SuccessorOutOfRange { state: usize, action: usize, successor: usize },
    ProbabilityOutOfRange { state: usize, action: usize, successor: usize, p: Rat },
    RowSum { state: usize, action: usize, sum: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "model has no states"),
            Violation::NoActions => write!(f, "model has no actions"),
            Violation::NoObservations => write!(f, "model has no observations"),
            Violation::InitialOutOfRange { initial } => {
                write!(f, "initial state {initial} out of range")
            }
            Violation::ObservationOutOfRange { state, obs } => {
                write!(f, "state {state}: observation {obs} out of range")
            }
            Violation::SuccessorOutOfRange { state, action, successor } => {
                write!(f, "row ({state},{action}): successor {successor} out of range")
            }
            Violation::ProbabilityOutOfRange { state, action, successor, p } => {
                write!(f, "row ({state},{action}): probability {} to {successor} outside [0,1]", rat::fmt(p))
            }
            Violation::RowSum { state, action, sum } => {
                write!(f, "row-sum ({state},{action}) = {}, expected 0 or 1", rat::fmt(sum))
            }
        }
    }
}

impl Pomdp {
    /// A model with every row empty, every reward zero and every state
    /// emitting observation 0.
    pub fn new(n_states: usize, n_actions: usize, n_obs: usize, initial: usize) -> Self {
        Pomdp {
            n_states,
            n_actions,
            n_obs,
            initial,
            obs: vec![0; n_states],
            trans: vec![vec![Vec::new(); n_actions]; n_states],
            reward: vec![vec![Rat::zero(); n_actions]; n_states],
            labels: None,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn obs(&self, s: usize) -> usize {
        self.obs[s]
    }

    pub fn observations(&self) -> &[usize] {
        &self.obs
    }

    pub fn row(&self, s: usize, a: usize) -> &[(usize, Rat)] {
        &self.trans[s][a]
    }

    pub fn reward(&self, s: usize, a: usize) -> &Rat {
        &self.reward[s][a]
    }

    /// `t(s, a, s')`, zero when absent.
    pub fn prob(&self, s: usize, a: usize, s2: usize) -> Rat {
        match self.trans[s][a].binary_search_by_key(&s2, |(t, _)| *t) {
            Ok(i) => self.trans[s][a][i].1.clone(),
            Err(_) => Rat::zero(),
        }
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn set_initial(&mut self, s: usize) {
        self.initial = s;
    }

    pub fn set_obs(&mut self, s: usize, o: usize) {
        self.obs[s] = o;
    }

    /// Set `t(s, a, s')`; a zero probability removes the entry.
    pub fn set_prob(&mut self, s: usize, a: usize, s2: usize, p: Rat) {
        let row = &mut self.trans[s][a];
        match row.binary_search_by_key(&s2, |(t, _)| *t) {
            Ok(i) if p.is_zero() => {
                row.remove(i);
            }
            Ok(i) => row[i].1 = p,
            Err(_) if p.is_zero() => {}
            Err(i) => row.insert(i, (s2, p)),
        }
    }

    /// Add `p` to `t(s, a, s')`.
    pub fn add_prob(&mut self, s: usize, a: usize, s2: usize, p: Rat) {
        let cur = self.prob(s, a, s2);
        self.set_prob(s, a, s2, cur + p);
    }

    /// Deterministic transition under every action.
    pub fn set_forced(&mut self, s: usize, s2: usize) {
        for a in 0..self.n_actions {
            self.trans[s][a] = vec![(s2, Rat::one())];
        }
    }

    pub fn set_reward(&mut self, s: usize, a: usize, r: Rat) {
        self.reward[s][a] = r;
    }

    pub fn set_labels(&mut self, labels: Labels) {
        self.labels = Some(labels);
    }

    pub fn clear_labels(&mut self) {
        self.labels = None;
    }

    pub fn state_label(&self, s: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.states.get(s)).map(String::as_str)
    }

    pub fn obs_label(&self, o: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.observations.get(o)).map(String::as_str)
    }

    /// Apply `f` to every reward.
    pub fn map_rewards(&self, f: impl Fn(&Rat) -> Rat) -> Pomdp {
        let mut out = self.clone();
        for row in &mut out.reward {
            for r in row.iter_mut() {
                *r = f(r);
            }
        }
        out
    }

    pub fn rewards_nonnegative(&self) -> bool {
        self.reward.iter().flatten().all(|r| !r.is_negative())
    }

    /// Largest absolute reward.
    pub fn max_abs_reward(&self) -> Rat {
        self.reward.iter().flatten().map(|r| r.abs()).max().unwrap_or_else(Rat::zero)
    }

    /// States reachable from the initial state over nonzero edges under any
    /// action, as a membership mask.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_states];
        if self.initial >= self.n_states {
            return seen;
        }
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for a in 0..self.n_actions {
                for (s2, _) in &self.trans[s][a] {
                    if !seen[*s2] {
                        seen[*s2] = true;
                        stack.push(*s2);
                    }
                }
            }
        }
        seen
    }

    /// States from which some nonzero reward can be collected under some
    /// sequence of actions.
    pub fn can_reach_reward(&self) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.n_states];
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                for (s2, _) in &self.trans[s][a] {
                    preds[*s2].push(s);
                }
            }
        }
        let mut live: Vec<bool> = (0..self.n_states).map(|s| self.reward[s].iter().any(|r| !r.is_zero())).collect();
        let mut stack: Vec<usize> = (0..self.n_states).filter(|&s| live[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        live
    }

    /// Check every structural invariant. An empty list means the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n_states == 0 {
            out.push(Violation::NoStates);
        }
        if self.n_actions == 0 {
            out.push(Violation::NoActions);
        }
        if self.n_obs == 0 {
            out.push(Violation::NoObservations);
        }
        if self.initial >= self.n_states {
            out.push(Violation::InitialOutOfRange { initial: self.initial });
        }
        for (s, &o) in self.obs.iter().enumerate() {
            if o >= self.n_obs {
                out.push(Violation::ObservationOutOfRange { state: s, obs: o });
            }
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let mut sum = Rat::zero();
                for (s2, p) in &self.trans[s][a] {
                    if *s2 >= self.n_states {
                        out.push(Violation::SuccessorOutOfRange { state: s, action: a, successor: *s2 });
                    }
                    if !rat::in_unit_interval(p) {
                        out.push(Violation::ProbabilityOutOfRange {
                            state: s,
                            action: a,
                            successor: *s2,
                            p: p.clone(),
                        });
                    }
                    sum += p;
                }
                if !sum.is_zero() && !sum.is_one() {
                    out.push(Violation::RowSum { state: s, action: a, sum });
                }
            }
        }
        out
    }

    /// Validate and turn the first violations into an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = v.iter().take(5).map(ToString::to_string).collect();
            Err(Error::InvalidModel(msgs.join("; ")))
        }
    }

    pub fn observability(&self) -> ObservabilityClass {
        classify_observability(self)
    }
}

/// Free-function form of [`Pomdp::validate`].
pub fn validate_pomdp(m: &Pomdp) -> Vec<Violation> {
    m.validate()
}

/// A bijective observation map wins over the single-observation test, so a
/// one-state model is classified as fully observable.
pub fn classify_observability(m: &Pomdp) -> ObservabilityClass {
    if m.n_obs == m.n_states {
        let mut seen = vec![false; m.n_obs];
        let bijective = m.obs.iter().all(|&o| o < m.n_obs && !std::mem::replace(&mut seen[o], true));
        if bijective {
            return ObservabilityClass::FullyObservable;
        }
    }
    if m.n_obs == 1 {
        ObservabilityClass::Unobservable
    } else {
        ObservabilityClass::General
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn chain() -> Pomdp {
        let mut m = Pomdp::new(2, 1, 2, 0);
        m.set_obs(1, 1);
        m.set_prob(0, 0, 1, int(1));
        m.set_prob(1, 0, 1, int(1));
        m.set_reward(0, 0, int(1));
        m
    }

    #[test]
    fn well_formed_chain_is_valid() {
        assert_eq!(validate_pomdp(&chain()), vec![]);
    }

    #[test]
    fn half_row_is_reported() {
        let mut m = chain();
        m.set_prob(0, 0, 1, rat(1, 2));
        assert_eq!(validate_pomdp(&m), vec![Violation::RowSum { state: 0, action: 0, sum: rat(1, 2) }]);
    }

    #[test]
    fn range_violations() {
        let mut m = chain();
        m.set_initial(5);
        m.set_obs(0, 9);
        m.set_prob(1, 0, 1, rat(3, 2));
        m.add_prob(1, 0, 0, rat(-1, 2));
        let v = validate_pomdp(&m);
        assert!(v.contains(&Violation::InitialOutOfRange { initial: 5 }));
        assert!(v.contains(&Violation::ObservationOutOfRange { state: 0, obs: 9 }));
        assert_eq!(v.iter().filter(|x| matches!(x, Violation::ProbabilityOutOfRange { .. })).count(), 2);
        assert!(m.ensure_valid().is_err());
    }

    #[test]
    fn observability_classes() {
        let m = chain();
        assert_eq!(classify_observability(&m), ObservabilityClass::FullyObservable);
        let mut u = Pomdp::new(3, 2, 1, 0);
        u.set_forced(0, 1);
        assert_eq!(classify_observability(&u), ObservabilityClass::Unobservable);
        let mut g = Pomdp::new(3, 2, 2, 0);
        g.set_obs(2, 1);
        assert_eq!(classify_observability(&g), ObservabilityClass::General);
        // two states, two observations, not injective
        let mut h = Pomdp::new(2, 1, 2, 0);
        h.set_obs(1, 0);
        assert_eq!(classify_observability(&h), ObservabilityClass::General);
    }

    #[test]
    fn sparse_rows_stay_sorted() {
        let mut m = Pomdp::new(4, 1, 1, 0);
        m.set_prob(0, 0, 3, rat(1, 4));
        m.set_prob(0, 0, 1, rat(1, 4));
        m.add_prob(0, 0, 2, rat(1, 4));
        m.add_prob(0, 0, 2, rat(1, 4));
        let succ: Vec<usize> = m.row(0, 0).iter().map(|(s, _)| *s).collect();
        assert_eq!(succ, vec![1, 2, 3]);
        assert_eq!(m.prob(0, 0, 2), rat(1, 2));
        m.set_prob(0, 0, 2, int(0));
        assert_eq!(m.row(0, 0).len(), 2);
    }

    #[test]
    fn reachability_and_liveness() {
        let mut m = Pomdp::new(4, 1, 1, 0);
        m.set_forced(0, 1);
        m.set_forced(1, 1);
        m.set_forced(3, 2);
        m.set_reward(2, 0, int(1));
        assert_eq!(m.reachable(), vec![true, true, false, false]);
        assert_eq!(m.can_reach_reward(), vec![false, false, true, true]);
    }
}
