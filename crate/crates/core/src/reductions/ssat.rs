use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{HistoryPolicy, Labels, Metric, Pomdp, Quantifier, SsatFormula};
use crate::oracles::ssat_game;
use crate::rat::{self, Rat};
use crate::reductions::{Bound, Claim, GadgetModel, GadgetOutput, PolicyClass};

/// Where the pieces of a stochastic-satisfiability gadget live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsatLayout {
    pub formula: SsatFormula,
    pub copies: usize,
    /// Amplification constant the claims were stated for.
    pub c: u32,
    /// Steps one copy needs at most, from its start to its end state.
    pub copy_length: usize,
    /// Start state of every copy.
    pub starts: Vec<usize>,
    /// `stage3_entries[copy][2*var + bit]`: first clause-check state of the
    /// block that stored `x_var = bit`.
    pub stage3_entries: Vec<Vec<usize>>,
    /// Terminal state after the last copy.
    pub end: usize,
    /// Shared penalty box.
    pub cheat: usize,
    pub obs_start: usize,
    pub obs_stage1: usize,
    pub obs_bit: [usize; 2],
    /// `obs_literal[j][p]`: observation of position `p` in clause `j`.
    pub obs_literal: Vec<Vec<usize>>,
    pub obs_end: usize,
    pub obs_cheat: usize,
}

fn build(phi: &SsatFormula, copies: usize, c: u32) -> (Pomdp, SsatLayout) {
    let n = phi.n_vars();
    let cnf = phi.matrix();
    let lits = cnf.n_literals();
    let prefix = phi.prefix();
    let mut clause_offset = Vec::with_capacity(cnf.n_clauses());
    let mut acc = 0;
    for cl in cnf.clauses() {
        clause_offset.push(acc);
        acc += cl.len();
    }
    // per copy: start, 2n stored bits, 4n^2 assignment states, 2n clause walks
    let block = 1 + 2 * n + 4 * n * n + 2 * n * lits;
    let end = copies * block;
    let cheat = end + 1;
    let n_states = cheat + 1;

    let obs_start = 0;
    let obs_stage1 = 1;
    let obs_bit = [2, 3];
    let obs_literal: Vec<Vec<usize>> = cnf
        .clauses()
        .iter()
        .enumerate()
        .map(|(j, cl)| (0..cl.len()).map(|p| 4 + clause_offset[j] + p).collect())
        .collect();
    let obs_end = 4 + lits;
    let obs_cheat = obs_end + 1;
    let mut m = Pomdp::new(n_states, 2, obs_cheat + 1, 0);
    let mut names = vec![String::new(); n_states];

    let half = rat::rat(1, 2);
    let mut starts = Vec::with_capacity(copies);
    let mut entries = Vec::with_capacity(copies);
    for k in 0..copies {
        let base = k * block;
        let start = base;
        let exit = if k + 1 < copies { base + block } else { end };
        let tag = format!("#{}", k + 1);
        let stored = |var: usize, b: usize| base + 1 + 2 * var + b;
        // i counts assigned variables, 1..=n
        let assign =
            |var: usize, b: usize, i: usize, v: usize| base + 1 + 2 * n + ((2 * var + b) * n + (i - 1)) * 2 + v;
        let walk = |var: usize, b: usize, j: usize, p: usize| {
            base + 1 + 2 * n + 4 * n * n + (2 * var + b) * lits + clause_offset[j] + p
        };
        starts.push(start);
        m.set_obs(start, obs_start);
        names[start] = format!("s0{tag}");
        let p0 = rat::rat(1, 2 * n as i64);
        for a in 0..2 {
            for var in 0..n {
                for b in 0..2 {
                    m.set_prob(start, a, stored(var, b), p0.clone());
                }
            }
        }
        // the transition that assigns prefix position `i` (0-based) from `s`
        let assign_next = |m: &mut Pomdp, s: usize, var: usize, b: usize, i: usize| {
            let q = prefix[i].1;
            for a in 0..2 {
                match q {
                    Quantifier::Exists => m.set_prob(s, a, assign(var, b, i + 1, a), Rat::one()),
                    Quantifier::Random => {
                        m.set_prob(s, a, assign(var, b, i + 1, 0), half.clone());
                        m.set_prob(s, a, assign(var, b, i + 1, 1), half.clone());
                    }
                }
            }
        };
        let mut copy_entries = Vec::with_capacity(2 * n);
        for var in 0..n {
            for b in 0..2 {
                let s = stored(var, b);
                m.set_obs(s, obs_stage1);
                names[s] = format!("x{}={b}{tag}", var + 1);
                assign_next(&mut m, s, var, b, 0);
                for i in 1..=n {
                    let assigned = prefix[i - 1].0;
                    for (v, &o) in obs_bit.iter().enumerate() {
                        let s = assign(var, b, i, v);
                        m.set_obs(s, o);
                        names[s] = format!("A(x{}={b}):x{}={v}{tag}", var + 1, assigned + 1);
                        if assigned == var && v != b {
                            m.set_forced(s, exit);
                        } else if i < n {
                            assign_next(&mut m, s, var, b, i);
                        } else {
                            m.set_forced(s, walk(var, b, 0, 0));
                        }
                    }
                }
                copy_entries.push(walk(var, b, 0, 0));
                for (j, clause) in cnf.clauses().iter().enumerate() {
                    for (p, lit) in clause.iter().enumerate() {
                        let s = walk(var, b, j, p);
                        m.set_obs(s, obs_literal[j][p]);
                        names[s] = format!("C(x{}={b}):x{}@C{}{tag}", var + 1, lit.var + 1, j + 1);
                        for a in 0..2 {
                            let (target, reward) = if lit.var == var && a != b {
                                (cheat, Rat::zero())
                            } else if lit.signum() == a {
                                if j + 1 < cnf.n_clauses() {
                                    (walk(var, b, j + 1, 0), Rat::zero())
                                } else {
                                    (exit, rat::int(2))
                                }
                            } else if p + 1 < clause.len() {
                                (walk(var, b, j, p + 1), Rat::zero())
                            } else {
                                (exit, Rat::zero())
                            };
                            m.set_prob(s, a, target, Rat::one());
                            m.set_reward(s, a, reward);
                        }
                    }
                }
            }
        }
        entries.push(copy_entries);
    }
    m.set_obs(end, obs_end);
    m.set_forced(end, end);
    names[end] = "end".into();
    m.set_obs(cheat, obs_cheat);
    m.set_forced(cheat, cheat);
    names[cheat] = "cheat".into();
    let mut observations = vec!["start".to_string(), "stage1".into(), "0".into(), "1".into()];
    for (j, cl) in cnf.clauses().iter().enumerate() {
        observations.extend((0..cl.len()).map(|p| format!("C{}.{}", j + 1, p + 1)));
    }
    observations.extend(["end".to_string(), "cheat".into()]);
    m.set_labels(Labels { states: names, actions: vec!["0".into(), "1".into()], observations });
    let layout = SsatLayout {
        formula: phi.clone(),
        copies,
        c,
        copy_length: n + 2 + lits,
        starts,
        stage3_entries: entries,
        end,
        cheat,
        obs_start,
        obs_stage1,
        obs_bit,
        obs_literal,
        obs_end,
        obs_cheat,
    };
    (m, layout)
}

fn output(phi: &SsatFormula, copies: usize, c: u32, claim: Claim) -> GadgetOutput {
    let (m, layout) = build(phi, copies, c);
    let h = copies * layout.copy_length;
    GadgetOutput {
        model: GadgetModel::Pomdp(m),
        recommended_horizon: h,
        recommended_metric: Metric::total(h),
        claims: vec![claim],
        ssat_layout: Some(layout),
    }
}

/// Three-stage POMDP: a stored random (variable, bit), an observed
/// assignment phase, and a clause walk that pays 2 on a satisfied matrix
/// and diverts answers inconsistent with the stored bit to a penalty box.
/// Consistent policies earn exactly the satisfaction probability of the
/// strategy they play, since half the mass reaches the clause walk.
pub fn ssat_to_pomdp(phi: &SsatFormula) -> GadgetOutput {
    let h = phi.n_vars() + 2 + phi.matrix().n_literals();
    let claim = Claim {
        class: PolicyClass::History,
        metric: Metric::total(h),
        yes: Bound::Gt(rat::rat(1, 2)),
        no: Bound::Le(Rat::one()),
    };
    output(phi, 1, 1, claim)
}

/// Chain `k` copies of an [`ssat_to_pomdp`] gadget: each copy's end state
/// starts the next one and all penalty boxes merge. Claims are stated for
/// error bound `2^-c`: value above `k(1 - 2^-c)` when the satisfaction
/// probability exceeds `1 - 2^-c`, at most `k 2^-c + 2n` when it is below
/// `2^-c`.
pub fn ssat_repeat(g: &GadgetOutput, k: usize, c: u32) -> Result<GadgetOutput> {
    if k < 1 {
        return Err(Error::InvalidArgument("repetition count must be at least 1".into()));
    }
    let layout = g
        .ssat_layout
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("ssat_repeat needs a stochastic-satisfiability gadget".into()))?;
    let phi = &layout.formula;
    let err = Rat::one() / rat::pow2(c as u64);
    let kr = rat::int(k as i64);
    let h = k * layout.copy_length;
    let claim = Claim {
        class: PolicyClass::History,
        metric: Metric::total(h),
        yes: Bound::Gt(&kr * (Rat::one() - &err)),
        no: Bound::Le(&kr * &err + rat::int(2 * phi.n_vars() as i64)),
    };
    Ok(output(phi, k, c, claim))
}

/// Smallest `c` with `2^c > (2 - eps)/(1 - eps)`, then smallest `k` with
/// `2n < k ((1 - eps)(1 - 2^-c) - 2^-c)`.
pub fn choose_ssat_constants(eps: &Rat, n: usize) -> Result<(u32, usize)> {
    if *eps < Rat::zero() || *eps >= Rat::one() {
        return Err(Error::InvalidArgument(format!("eps must lie in [0,1), got {}", rat::fmt(eps))));
    }
    let one = Rat::one();
    let target = (rat::int(2) - eps) / (&one - eps);
    let mut c = 0u32;
    while rat::pow2(c as u64) <= target {
        c += 1;
    }
    let err = &one / rat::pow2(c as u64);
    let margin = (&one - eps) * (&one - &err) - &err;
    let k = rat::least_int_above(&(rat::int(2 * n as i64) / margin));
    let k: usize = k.try_into().map_err(|_| Error::InvalidArgument("repetition count overflows".into()))?;
    Ok((c, k.max(1)))
}

/// Value of the existential choice that maximizes the satisfaction
/// probability, given the values already fixed in prefix order.
fn best_choice(phi: &SsatFormula, fixed: &[bool]) -> bool {
    let mut assignment = vec![false; phi.n_vars()];
    for (d, &v) in fixed.iter().enumerate() {
        assignment[phi.prefix()[d].0] = v;
    }
    let var = phi.prefix()[fixed.len()].0;
    let mut vals = [Rat::zero(), Rat::zero()];
    for (b, slot) in vals.iter_mut().enumerate() {
        assignment[var] = b == 1;
        *slot = ssat_game(phi, fixed.len() + 1, &mut assignment);
    }
    vals[1] > vals[0]
}

/// Choice for an existential variable given the values fixed before it.
pub type ExistsStrategy<'a> = &'a dyn Fn(&[bool]) -> bool;

/// History policy that never cheats: existential variables follow
/// `strategy` (or the optimal strategy when `None`), given the values fixed
/// so far in prefix order, and every clause-walk question is answered with
/// the value observed during the assignment phase of the same copy.
pub fn ssat_consistent_policy(
    m: &Pomdp,
    layout: &SsatLayout,
    horizon: usize,
    strategy: Option<ExistsStrategy<'_>>,
) -> HistoryPolicy {
    let phi = &layout.formula;
    let n = phi.n_vars();
    let mut position = vec![0; n];
    for (d, (var, _)) in phi.prefix().iter().enumerate() {
        position[*var] = d;
    }
    let mut literal_of = std::collections::HashMap::new();
    for (j, row) in layout.obs_literal.iter().enumerate() {
        for (p, &o) in row.iter().enumerate() {
            literal_of.insert(o, phi.matrix().clauses()[j][p]);
        }
    }
    let choose = |fixed: &[bool]| -> usize {
        if fixed.len() >= n || phi.prefix()[fixed.len()].1 == Quantifier::Random {
            return 0;
        }
        let b = match strategy {
            Some(f) => f(fixed),
            None => best_choice(phi, fixed),
        };
        b as usize
    };
    HistoryPolicy::realizable(m, horizon, |seq| {
        let mut fixed: Vec<bool> = Vec::new();
        for &o in seq {
            if o == layout.obs_start {
                fixed.clear();
            } else if o == layout.obs_bit[0] || o == layout.obs_bit[1] {
                fixed.push(o == layout.obs_bit[1]);
            }
        }
        let last = *seq.last().expect("sequences are nonempty");
        if last == layout.obs_stage1 || last == layout.obs_bit[0] || last == layout.obs_bit[1] {
            choose(&fixed)
        } else if let Some(lit) = literal_of.get(&last) {
            fixed.get(position[lit.var]).map_or(0, |&v| v as usize)
        } else {
            0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::finite_horizon_performance;
    use crate::model::{Cnf, Literal, Policy};

    fn exists_random() -> SsatFormula {
        let m = Cnf::new(2, vec![vec![Literal::pos(0), Literal::pos(1)]]).unwrap();
        SsatFormula::new(vec![(0, Quantifier::Exists), (1, Quantifier::Random)], m).unwrap()
    }

    #[test]
    fn stage_one_fans_out_uniformly() {
        let g = ssat_to_pomdp(&exists_random());
        let m = g.pomdp().unwrap();
        assert!(m.validate().is_empty());
        let row = m.row(0, 0);
        assert_eq!(row.len(), 4);
        assert!(row.iter().all(|(_, p)| *p == rat::rat(1, 4)));
    }

    #[test]
    fn consistent_policy_earns_satisfaction_probability() {
        let g = ssat_to_pomdp(&exists_random());
        let m = g.pomdp().unwrap();
        let layout = g.ssat_layout.as_ref().unwrap();
        let pi = ssat_consistent_policy(m, layout, g.recommended_horizon, None);
        let v = finite_horizon_performance(m, &Policy::History(pi), &g.recommended_metric).unwrap();
        assert_eq!(v, Rat::one());
    }

    #[test]
    fn repeat_scales_horizon() {
        let g = ssat_to_pomdp(&exists_random());
        let g3 = ssat_repeat(&g, 3, 2).unwrap();
        assert_eq!(g3.recommended_horizon, 3 * g.recommended_horizon);
        assert!(g3.pomdp().unwrap().validate().is_empty());
        assert!(ssat_repeat(&g, 0, 2).is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(choose_ssat_constants(&rat::rat(1, 2), 4).unwrap(), (2, 65));
        assert_eq!(choose_ssat_constants(&Rat::zero(), 1).unwrap(), (2, 5));
        assert!(choose_ssat_constants(&Rat::one(), 1).is_err());
    }
}
