use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::model::{Circuit, Cnf, Quantifier, SsatFormula};
use crate::rat::{rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatSummary {
    pub satisfiable: bool,
    /// First assignment (counting with variable 0 as the low bit) that
    /// satisfies the most clauses.
    pub best_assignment: Vec<bool>,
    pub max_satisfied: usize,
}

fn check_vars(n: usize, caps: &Caps) -> Result<()> {
    if n > caps.vars as usize {
        return Err(Error::CapExceeded { what: "variables", needed: n.to_string(), cap: caps.vars as u64 });
    }
    Ok(())
}

/// Exhaustive sweep over all `2^n` assignments.
pub fn sat_enumerate(phi: &Cnf, caps: &Caps) -> Result<SatSummary> {
    let n = phi.n_vars();
    check_vars(n, caps)?;
    let mut best = SatSummary { satisfiable: false, best_assignment: vec![false; n], max_satisfied: 0 };
    let mut first = true;
    for code in 0u64..1 << n {
        let assignment: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
        let k = phi.count_satisfied(&assignment);
        if first || k > best.max_satisfied {
            best.max_satisfied = k;
            best.best_assignment = assignment;
            first = false;
        }
        if k == phi.n_clauses() {
            best.satisfiable = true;
            break;
        }
    }
    Ok(best)
}

/// Optimal satisfaction probability of the existential player: maximum over
/// `Exists` variables, average over `Random` ones, in prefix order.
pub fn ssat_value(phi: &SsatFormula, caps: &Caps) -> Result<Rat> {
    check_vars(phi.n_vars(), caps)?;
    let mut assignment = vec![false; phi.n_vars()];
    Ok(ssat_game(phi, 0, &mut assignment))
}

/// Game value from prefix position `depth` with earlier variables fixed in
/// `assignment`.
pub(crate) fn ssat_game(phi: &SsatFormula, depth: usize, assignment: &mut Vec<bool>) -> Rat {
    if depth == phi.prefix().len() {
        return if phi.matrix().satisfied_by(assignment) { Rat::one() } else { Rat::zero() };
    }
    let (var, q) = phi.prefix()[depth];
    let mut vals = [Rat::zero(), Rat::zero()];
    for (b, slot) in vals.iter_mut().enumerate() {
        assignment[var] = b == 1;
        *slot = ssat_game(phi, depth + 1, assignment);
    }
    let [v0, v1] = vals;
    match q {
        Quantifier::Exists => v0.max(v1),
        Quantifier::Random => (v0 + v1) * rat(1, 2),
    }
}

/// Outputs of a closed circuit (no free inputs), in declared order.
pub fn circuit_eval(c: &Circuit) -> Result<Vec<bool>> {
    if c.n_inputs() != 0 {
        return Err(Error::InvalidArgument(format!(
            "circuit has {} free inputs; bind them with CONST gates or use Circuit::eval",
            c.n_inputs()
        )));
    }
    c.eval(&[])
}
