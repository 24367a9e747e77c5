use std::fmt;

use crate::error::{Error, Result};

/// A variable occurrence. `var` is 0-based; `positive` is the signum
/// (true = plain literal, false = negated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, positive: false }
    }

    /// DIMACS form: 1-based, negative for negated.
    pub fn from_dimacs(lit: i64) -> Self {
        Literal { var: lit.unsigned_abs() as usize - 1, positive: lit > 0 }
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    /// Action (0/1) that makes the literal true.
    pub fn signum(self) -> usize {
        self.positive as usize
    }

    pub fn satisfied_by(self, value: bool) -> bool {
        value == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var + 1)
        } else {
            write!(f, "¬x{}", self.var + 1)
        }
    }
}

/// CNF formula with clauses of 1 to 3 literals, each variable at most once
/// per clause, and at least one clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cnf {
    n_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

pub const MAX_CLAUSE_LEN: usize = 3;

impl Cnf {
    pub fn new(n_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::InvalidArgument("formula has no clauses".into()));
        }
        for (j, clause) in clauses.iter().enumerate() {
            if clause.is_empty() || clause.len() > MAX_CLAUSE_LEN {
                return Err(Error::InvalidArgument(format!(
                    "clause {} has {} literals, expected 1..={MAX_CLAUSE_LEN}",
                    j + 1,
                    clause.len()
                )));
            }
            for (i, lit) in clause.iter().enumerate() {
                if lit.var >= n_vars {
                    return Err(Error::InvalidArgument(format!(
                        "clause {} mentions x{} but formula has {n_vars} variables",
                        j + 1,
                        lit.var + 1
                    )));
                }
                if clause[..i].iter().any(|l| l.var == lit.var) {
                    return Err(Error::InvalidArgument(format!("clause {} repeats variable x{}", j + 1, lit.var + 1)));
                }
            }
        }
        Ok(Cnf { n_vars, clauses })
    }

    /// Build from DIMACS-style signed 1-based literals.
    pub fn from_dimacs(n_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        if let Some(&bad) = clauses.iter().flat_map(|c| c.iter()).find(|&&l| l == 0) {
            return Err(Error::InvalidArgument(format!("literal {bad} is not a variable")));
        }
        Cnf::new(n_vars, clauses.iter().map(|c| c.iter().map(|&l| Literal::from_dimacs(l)).collect()).collect())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Total number of literal occurrences.
    pub fn n_literals(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    /// Signum with which `var` appears in clause `j`, if at all.
    pub fn signum_in(&self, var: usize, j: usize) -> Option<usize> {
        self.clauses[j].iter().find(|l| l.var == var).map(|l| l.signum())
    }

    pub fn clause_satisfied(&self, j: usize, assignment: &[bool]) -> bool {
        self.clauses[j].iter().any(|l| l.satisfied_by(assignment[l.var]))
    }

    pub fn count_satisfied(&self, assignment: &[bool]) -> usize {
        (0..self.clauses.len()).filter(|&j| self.clause_satisfied(j, assignment)).count()
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        (0..self.clauses.len()).all(|j| self.clause_satisfied(j, assignment))
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, clause) in self.clauses.iter().enumerate() {
            if j > 0 {
                write!(f, " ∧ ")?;
            }
            write!(f, "(")?;
            for (i, l) in clause.iter().enumerate() {
                if i > 0 {
                    write!(f, " ∨ ")?;
                }
                write!(f, "{l}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Random,
}

/// Stochastic Boolean formula: a quantifier prefix over all variables and a
/// CNF matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SsatFormula {
    prefix: Vec<(usize, Quantifier)>,
    matrix: Cnf,
}

impl SsatFormula {
    /// Every matrix variable must be quantified exactly once.
    pub fn new(prefix: Vec<(usize, Quantifier)>, matrix: Cnf) -> Result<Self> {
        let n = matrix.n_vars();
        let mut seen = vec![false; n];
        for &(v, _) in &prefix {
            if v >= n {
                return Err(Error::InvalidArgument(format!(
                    "quantified variable x{} not in matrix of {n} variables",
                    v + 1
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidArgument(format!("x{} quantified twice", v + 1)));
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("x{} is not quantified", v + 1)));
        }
        Ok(SsatFormula { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(usize, Quantifier)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Cnf {
        &self.matrix
    }

    pub fn n_vars(&self) -> usize {
        self.matrix.n_vars()
    }

    pub fn n_random(&self) -> usize {
        self.prefix.iter().filter(|(_, q)| *q == Quantifier::Random).count()
    }
}

impl fmt::Display for SsatFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, q) in &self.prefix {
            let sym = match q {
                Quantifier::Exists => "∃",
                Quantifier::Random => "R",
            };
            write!(f, "{sym}x{} ", v + 1)?;
        }
        write!(f, ": {}", self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_rules() {
        assert!(Cnf::from_dimacs(3, &[&[1, 2, 3]]).is_ok());
        assert!(Cnf::from_dimacs(1, &[&[1], &[-1]]).is_ok());
        assert!(Cnf::from_dimacs(2, &[&[1, -1]]).is_err());
        assert!(Cnf::from_dimacs(4, &[&[1, 2, 3, 4]]).is_err());
        assert!(Cnf::from_dimacs(2, &[&[]]).is_err());
        assert!(Cnf::from_dimacs(2, &[&[3]]).is_err());
        assert!(Cnf::from_dimacs(2, &[]).is_err());
    }

    #[test]
    fn signum_and_satisfaction() {
        let phi = Cnf::from_dimacs(4, &[&[-1, 3, 4], &[1, -2, 4]]).unwrap();
        assert_eq!(phi.signum_in(0, 0), Some(0));
        assert_eq!(phi.signum_in(0, 1), Some(1));
        assert_eq!(phi.signum_in(2, 1), None);
        assert!(phi.satisfied_by(&[false, false, false, true]));
        assert_eq!(phi.count_satisfied(&[true, true, false, false]), 1);
        assert_eq!(phi.to_string(), "(¬x1 ∨ x3 ∨ x4) ∧ (x1 ∨ ¬x2 ∨ x4)");
    }

    #[test]
    fn quantifier_prefix_must_cover() {
        let m = Cnf::from_dimacs(2, &[&[1, 2]]).unwrap();
        let ok = SsatFormula::new(vec![(0, Quantifier::Exists), (1, Quantifier::Random)], m.clone());
        assert_eq!(ok.unwrap().n_random(), 1);
        assert!(SsatFormula::new(vec![(0, Quantifier::Exists)], m.clone()).is_err());
        assert!(SsatFormula::new(vec![(0, Quantifier::Exists), (0, Quantifier::Random), (1, Quantifier::Random)], m)
            .is_err());
    }
}
