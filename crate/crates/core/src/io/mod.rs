//! Line-oriented text formats. Every number is an exact rational `p/q` or
//! an integer; indices are 0-based except DIMACS variables.

mod dimacs;
mod netlist;
mod policy;
mod pomdp;
mod tbn;

pub use dimacs::{parse_cnf, parse_ssat, serialize_cnf, serialize_ssat};
pub use netlist::{parse_circuit, parse_succinct, serialize_circuit, serialize_succinct};
pub use policy::{parse_policy, serialize_policy};
pub use pomdp::{parse_pomdp, serialize_pomdp};
pub use tbn::{parse_tbn, serialize_tbn};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

/// Non-blank lines with their 1-based numbers, `#` comments removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))
}

fn ratio(line: usize, tok: Option<&str>) -> Result<Rat> {
    let tok = tok.ok_or_else(|| Error::parse(line, "missing rational"))?;
    rat::parse(tok).map_err(|e| Error::parse(line, e.to_string()))
}

fn no_more<'a>(line: usize, mut toks: impl Iterator<Item = &'a str>) -> Result<()> {
    match toks.next() {
        Some(t) => Err(Error::parse(line, format!("unexpected token {t:?}"))),
        None => Ok(()),
    }
}

/// Attach a line number to a validation error.
fn at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(line, other.to_string()),
    }
}
