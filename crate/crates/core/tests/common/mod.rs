//! Instances and reference computations shared by the integration tests.
//! Nothing here calls the library's oracles.
#![allow(dead_code)]

use hforge_core::{Circuit, CircuitBuilder, Cnf, Literal, Metric, Pomdp, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// (¬x1 ∨ x3 ∨ x4) ∧ (x1 ∨ ¬x2 ∨ x4)
pub fn example_formula() -> Cnf {
    Cnf::from_dimacs(4, &[&[-1, 3, 4], &[1, -2, 4]]).unwrap()
}

pub fn random_cnf(rng: &mut impl Rng, max_vars: usize, max_clauses: usize) -> Cnf {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(1..=max_clauses);
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let len = rng.random_range(1..=3.min(n));
        let mut vars: Vec<usize> = (0..n).collect();
        let mut clause = Vec::with_capacity(len);
        for _ in 0..len {
            let v = vars.swap_remove(rng.random_range(0..vars.len()));
            clause.push(Literal { var: v, positive: rng.random_bool(0.5) });
        }
        clauses.push(clause);
    }
    Cnf::new(n, clauses).unwrap()
}

/// The four-variable example formula followed by `count` seeded random formulas
/// (at most 4 variables and 4 clauses).
pub fn cnf_corpus(count: usize) -> Vec<Cnf> {
    let mut g = rng(0x5eed_c0de);
    let mut out = vec![example_formula()];
    out.extend((0..count).map(|_| random_cnf(&mut g, 4, 4)));
    out
}

pub fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |x| (0..n).map(|b| x >> b & 1 == 1).collect())
}

pub fn satisfied_count(phi: &Cnf, x: &[bool]) -> usize {
    phi.clauses().iter().filter(|c| c.iter().any(|l| x[l.var] == l.positive)).count()
}

pub fn is_satisfiable(phi: &Cnf) -> bool {
    assignments(phi.n_vars()).any(|x| satisfied_count(phi, &x) == phi.n_clauses())
}

pub fn max_satisfied(phi: &Cnf) -> usize {
    assignments(phi.n_vars()).map(|x| satisfied_count(phi, &x)).max().unwrap()
}

/// Random model with at most `max_states` states; some rows are empty.
pub fn random_pomdp(rng: &mut impl Rng, max_states: usize) -> Pomdp {
    let n = rng.random_range(1..=max_states);
    let a = rng.random_range(1..=2);
    let k = rng.random_range(1..=n.min(3));
    let mut m = Pomdp::new(n, a, k, rng.random_range(0..n));
    for s in 0..n {
        m.set_obs(s, if s < k { s } else { rng.random_range(0..k) });
        for act in 0..a {
            if rng.random_bool(0.1) {
                continue;
            }
            let weights: Vec<i64> =
                (0..n).map(|_| if rng.random_bool(0.6) { rng.random_range(1..=4) } else { 0 }).collect();
            let total: i64 = weights.iter().sum();
            if total == 0 {
                m.set_prob(s, act, rng.random_range(0..n), Rat::one());
            } else {
                for (t, &w) in weights.iter().enumerate() {
                    m.set_prob(s, act, t, r(w, total));
                }
            }
            if rng.random_bool(0.5) {
                m.set_reward(s, act, r(rng.random_range(-3..=6), rng.random_range(1..=3)));
            }
        }
    }
    m
}

/// Sum over every state sequence of its probability times its discounted
/// reward; `act(t, observations so far)` picks the action.
pub fn trajectory_sum(m: &Pomdp, metric: &Metric, act: &dyn Fn(usize, &[usize]) -> usize) -> Rat {
    let (beta, h) = match metric {
        Metric::FiniteTotal { horizon } => (Rat::one(), *horizon),
        Metric::FiniteDiscounted { beta, horizon } => (beta.clone(), *horizon),
        _ => panic!("finite metrics only"),
    };
    #[allow(clippy::too_many_arguments)]
    fn walk(
        m: &Pomdp,
        beta: &Rat,
        h: usize,
        act: &dyn Fn(usize, &[usize]) -> usize,
        s: usize,
        t: usize,
        obs: &mut Vec<usize>,
        prob: Rat,
        weight: Rat,
    ) -> Rat {
        if t == h {
            return Rat::zero();
        }
        obs.push(m.obs(s));
        let a = act(t, obs);
        let mut total = &prob * &weight * m.reward(s, a);
        for s2 in 0..m.n_states() {
            let p = m.prob(s, a, s2);
            if !p.is_zero() {
                total += walk(m, beta, h, act, s2, t + 1, obs, &prob * p, &weight * beta);
            }
        }
        obs.pop();
        total
    }
    walk(m, &beta, h, act, m.initial(), 0, &mut Vec::new(), Rat::one(), Rat::one())
}

/// Expression tree over constants for enumerating small circuits.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(bool),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) => 1,
            Expr::Not(a) => 1 + a.size(),
            Expr::And(a, b) | Expr::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn value(&self) -> bool {
        match self {
            Expr::Const(v) => *v,
            Expr::Not(a) => !a.value(),
            Expr::And(a, b) => a.value() && b.value(),
            Expr::Or(a, b) => a.value() || b.value(),
        }
    }

    fn emit(&self, b: &mut CircuitBuilder) -> usize {
        match self {
            Expr::Const(v) => b.constant(*v),
            Expr::Not(a) => {
                let x = a.emit(b);
                b.not(x)
            }
            Expr::And(l, rr) => {
                let (x, y) = (l.emit(b), rr.emit(b));
                b.and(x, y)
            }
            Expr::Or(l, rr) => {
                let (x, y) = (l.emit(b), rr.emit(b));
                b.or(x, y)
            }
        }
    }

    /// One gate per tree node; the root is the only output.
    pub fn circuit(&self) -> Circuit {
        let mut b = CircuitBuilder::new();
        let o = self.emit(&mut b);
        b.finish(vec![o]).unwrap()
    }
}

/// Every expression of depth at most `depth` with at most `max_gates` nodes.
pub fn expressions(depth: usize, max_gates: usize) -> Vec<Expr> {
    let mut all: Vec<(Expr, usize)> = vec![(Expr::Const(false), 0), (Expr::Const(true), 0)];
    for d in 1..=depth {
        let mut level = Vec::new();
        for (a, da) in &all {
            if *da == d - 1 && a.size() < max_gates {
                level.push(Expr::Not(Box::new(a.clone())));
            }
        }
        for (a, da) in &all {
            for (b, db) in &all {
                if (*da).max(*db) != d - 1 || a.size() + b.size() + 1 > max_gates {
                    continue;
                }
                level.push(Expr::And(Box::new(a.clone()), Box::new(b.clone())));
                level.push(Expr::Or(Box::new(a.clone()), Box::new(b.clone())));
            }
        }
        all.extend(level.into_iter().map(|e| (e, d)));
    }
    all.into_iter().map(|(e, _)| e).collect()
}

/// Random 2TBN: synchronous parents only point to lower-numbered fluents.
pub fn random_tbn(rng: &mut impl Rng) -> hforge_core::Tbn {
    use hforge_core::{FluentCpt, Parent, Tbn, TbnReward};
    let n = rng.random_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
    let actions = rng.random_range(1..=2);
    let mut models = Vec::with_capacity(actions);
    for _ in 0..actions {
        let mut cpts = Vec::with_capacity(n);
        for k in 0..n {
            let mut parents = Vec::new();
            for j in 0..n {
                if rng.random_bool(0.4) {
                    parents.push(Parent::Current(j));
                }
                if j < k && rng.random_bool(0.3) {
                    parents.push(Parent::Next(j));
                }
            }
            let rows = (0..1usize << parents.len()).map(|_| r(rng.random_range(0..=4), 4)).collect();
            cpts.push(FluentCpt::new(parents, rows));
        }
        models.push(cpts);
    }
    let initial = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let mut table = std::collections::BTreeMap::new();
    for _ in 0..rng.random_range(0..4) {
        let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        table.insert((bits, rng.random_range(0..actions)), r(rng.random_range(1..=5), rng.random_range(1..=3)));
    }
    let reward = if table.is_empty() { TbnReward::Zero } else { TbnReward::Table(table) };
    Tbn::new(names, models, initial, reward).unwrap()
}
