use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Cnf, Literal, Quantifier, SsatFormula, MAX_CLAUSE_LEN};

use super::num;

struct Dimacs {
    n_vars: usize,
    clauses: Vec<Vec<Literal>>,
    prefix: Vec<(usize, Quantifier)>,
    last_line: usize,
}

fn read(text: &str, allow_prefix: bool) -> Result<Dimacs> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut prefix = Vec::new();
    let mut last_line = 0;
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        last_line = ln;
        let mut toks = line.split_whitespace();
        if line.starts_with('p') {
            toks.next();
            if toks.next() != Some("cnf") || header.is_some() {
                return Err(Error::parse(ln, "expected a single header \"p cnf <vars> <clauses>\""));
            }
            let n: usize = num(ln, toks.next(), "variable count")?;
            let m: usize = num(ln, toks.next(), "clause count")?;
            super::no_more(ln, toks)?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::parse(ln, "clause before \"p cnf\" header"));
        };
        if line.starts_with('e') || line.starts_with('r') {
            if !allow_prefix {
                return Err(Error::parse(ln, "quantifier line in a plain CNF"));
            }
            if !clauses.is_empty() {
                return Err(Error::parse(ln, "quantifiers must precede the clauses"));
            }
            let q = if toks.next() == Some("e") { Quantifier::Exists } else { Quantifier::Random };
            let vars: Vec<i64> = toks.map(|t| num(ln, Some(t), "variable")).collect::<Result<_>>()?;
            if vars.last() != Some(&0) {
                return Err(Error::parse(ln, "quantifier line must end with 0"));
            }
            for &v in &vars[..vars.len() - 1] {
                if v < 1 || v as usize > n {
                    return Err(Error::parse(ln, format!("variable {v} out of range 1..={n}")));
                }
                if prefix.iter().any(|&(w, _)| w == v as usize - 1) {
                    return Err(Error::parse(ln, format!("variable {v} quantified twice")));
                }
                prefix.push((v as usize - 1, q));
            }
            continue;
        }
        let lits: Vec<i64> = toks.map(|t| num(ln, Some(t), "literal")).collect::<Result<_>>()?;
        if lits.last() != Some(&0) || lits[..lits.len() - 1].contains(&0) {
            return Err(Error::parse(ln, "clause must be nonzero literals terminated by a single 0"));
        }
        let body = &lits[..lits.len() - 1];
        if body.is_empty() || body.len() > MAX_CLAUSE_LEN {
            return Err(Error::parse(ln, format!("clause has {} literals, expected 1..={MAX_CLAUSE_LEN}", body.len())));
        }
        let mut clause = Vec::with_capacity(body.len());
        for &l in body {
            if l.unsigned_abs() as usize > n {
                return Err(Error::parse(ln, format!("literal {l} out of range for {n} variables")));
            }
            let lit = Literal::from_dimacs(l);
            if clause.iter().any(|c: &Literal| c.var == lit.var) {
                return Err(Error::parse(ln, format!("repeated variable {} in clause", lit.var + 1)));
            }
            clause.push(lit);
        }
        clauses.push(clause);
    }
    let Some((n_vars, m)) = header else {
        return Err(Error::parse(last_line.max(1), "missing \"p cnf\" header"));
    };
    if clauses.len() != m {
        return Err(Error::parse(last_line, format!("header declares {m} clauses, found {}", clauses.len())));
    }
    Ok(Dimacs { n_vars, clauses, prefix, last_line })
}

/// DIMACS CNF with clauses of 1 to 3 distinct variables, one per line.
pub fn parse_cnf(text: &str) -> Result<Cnf> {
    let d = read(text, false)?;
    Cnf::new(d.n_vars, d.clauses).map_err(super::at(d.last_line))
}

/// DIMACS CNF preceded by quantifier lines `e <v> 0` / `r <v> 0` in prefix
/// order.
pub fn parse_ssat(text: &str) -> Result<SsatFormula> {
    let d = read(text, true)?;
    let line = d.last_line;
    let matrix = Cnf::new(d.n_vars, d.clauses).map_err(super::at(line))?;
    SsatFormula::new(d.prefix, matrix).map_err(super::at(line))
}

fn write_clauses(out: &mut String, phi: &Cnf) {
    for clause in phi.clauses() {
        for lit in clause {
            write!(out, "{} ", lit.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
}

pub fn serialize_cnf(phi: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", phi.n_vars(), phi.n_clauses());
    write_clauses(&mut out, phi);
    out
}

pub fn serialize_ssat(phi: &SsatFormula) -> String {
    let m = phi.matrix();
    let mut out = format!("p cnf {} {}\n", m.n_vars(), m.n_clauses());
    for (v, q) in phi.prefix() {
        let sym = if *q == Quantifier::Exists { 'e' } else { 'r' };
        writeln!(out, "{sym} {} 0", v + 1).unwrap();
    }
    write_clauses(&mut out, m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_clause() {
        let phi = parse_cnf("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(phi.n_vars(), 1);
        assert_eq!(phi.clauses(), &[vec![Literal::pos(0)]]);
    }

    #[test]
    fn comments_and_round_trip() {
        let text = "c four variables\np cnf 4 2\n-1 3 4 0\n1 -2 4 0\n";
        let phi = parse_cnf(text).unwrap();
        let built = Cnf::from_dimacs(4, &[&[-1, 3, 4], &[1, -2, 4]]).unwrap();
        assert_eq!(phi, built);
        assert_eq!(parse_cnf(&serialize_cnf(&phi)).unwrap(), phi);
    }

    #[test]
    fn rejections() {
        let e = parse_cnf("p cnf 2 1\n1 -1 0\n").unwrap_err();
        assert!(e.to_string().contains("repeated variable"), "{e}");
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(parse_cnf("p cnf 4 1\n1 2 3 4 0\n").is_err());
        assert!(parse_cnf("p cnf 2 2\n1 2 0\n").is_err());
        assert!(parse_cnf("1 2 0\n").is_err());
        assert!(parse_cnf("p cnf 2 1\n1 x 0\n").is_err());
        assert!(parse_cnf("p cnf 2 1\n1 2\n").is_err());
    }

    #[test]
    fn ssat_prefix() {
        let phi = parse_ssat("p cnf 2 1\ne 1 0\nr 2 0\n1 2 0\n").unwrap();
        assert_eq!(phi.prefix(), &[(0, Quantifier::Exists), (1, Quantifier::Random)]);
        assert_eq!(parse_ssat(&serialize_ssat(&phi)).unwrap(), phi);
        assert!(parse_ssat("p cnf 2 1\ne 1 0\n1 2 0\n").is_err());
        assert!(parse_ssat("p cnf 2 1\ne 1 0\nr 1 0\n1 2 0\n").is_err());
        assert!(parse_cnf("p cnf 2 1\ne 1 0\nr 2 0\n1 2 0\n").is_err());
    }
}
