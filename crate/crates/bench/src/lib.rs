//! Fixtures shared by the benchmarks.

use hforge_core::{rat, Circuit, CircuitBuilder, Cnf, Pomdp, Quantifier, SsatFormula};

/// The two-clause formula over four variables used throughout the tests.
pub fn example_formula() -> Cnf {
    Cnf::from_dimacs(4, &[&[-1, 3, 4], &[1, -2, 4]]).unwrap()
}

/// Deterministic 3-CNF with `n` variables and `m` clauses, built from a
/// linear congruential walk so the benches need no RNG dependency.
pub fn lcg_cnf(n: usize, m: usize, seed: u64) -> Cnf {
    let mut x = seed;
    let mut next = || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 33) as usize
    };
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let mut clause: Vec<i64> = Vec::new();
        while clause.len() < 3.min(n) {
            let v = (next() % n) as i64 + 1;
            if clause.iter().all(|l| l.abs() != v) {
                clause.push(if next() % 2 == 0 { v } else { -v });
            }
        }
        clauses.push(clause);
    }
    let refs: Vec<&[i64]> = clauses.iter().map(Vec::as_slice).collect();
    Cnf::from_dimacs(n, &refs).unwrap()
}

/// ∃x₁ R x₂ : (x₁ ∨ x₂)
pub fn exists_random() -> SsatFormula {
    let matrix = Cnf::from_dimacs(2, &[&[1, 2]]).unwrap();
    SsatFormula::new(vec![(0, Quantifier::Exists), (1, Quantifier::Random)], matrix).unwrap()
}

/// Balanced OR/AND tree over alternating constants with `depth` levels.
pub fn constant_tree(depth: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut layer: Vec<usize> = (0..1usize << depth).map(|i| b.constant(i % 3 == 0)).collect();
    let mut level = 0;
    while layer.len() > 1 {
        layer = layer.chunks(2).map(|p| if level % 2 == 0 { b.or(p[0], p[1]) } else { b.and(p[0], p[1]) }).collect();
        level += 1;
    }
    b.finish(vec![layer[0]]).unwrap()
}

/// Ring of `n` states, one observation per pair, two actions: stay or move,
/// with reward 1 for moving out of state 0.
pub fn ring(n: usize) -> Pomdp {
    let mut m = Pomdp::new(n, 2, n.div_ceil(2), 0);
    for s in 0..n {
        m.set_obs(s, s / 2);
        m.set_forced(s, s);
        m.set_prob(s, 1, s, rat::rat(1, 2));
        m.add_prob(s, 1, (s + 1) % n, rat::rat(1, 2));
    }
    m.set_reward(0, 1, rat::one());
    m
}
