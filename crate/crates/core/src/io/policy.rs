use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{FiniteMemoryPolicy, Policy, StationaryPolicy, TimeDependentPolicy};

use super::{content_lines, no_more, num};

/// `S <obs> <action>`, `TD <t> <obs> <action>`, or `FM <obs> <mem> <action>
/// <mem'>` with `FM-init <mem>`. History policies have no text form.
pub fn serialize_policy(p: &Policy) -> Result<String> {
    let mut out = String::new();
    match p {
        Policy::Stationary(s) => {
            for (o, a) in s.actions().iter().enumerate() {
                writeln!(out, "S {o} {a}").unwrap();
            }
        }
        Policy::TimeDependent(td) => {
            for (t, row) in td.table().iter().enumerate() {
                for (o, a) in row.iter().enumerate() {
                    writeln!(out, "TD {t} {o} {a}").unwrap();
                }
            }
        }
        Policy::FiniteMemory(fm) => {
            writeln!(out, "FM-init {}", fm.initial_memory()).unwrap();
            for o in 0..fm.n_obs() {
                for q in 0..fm.n_memory() {
                    let (a, q2) = fm.step(o, q);
                    writeln!(out, "FM {o} {q} {a} {q2}").unwrap();
                }
            }
        }
        Policy::History(_) => {
            return Err(Error::Unsupported("history policies have no file format".into()));
        }
    }
    Ok(out)
}

/// Dense table from sparse `(key, value)` lines; every key in the box must
/// be present exactly once.
fn dense<K: Ord + Copy + std::fmt::Debug, V: Copy>(
    entries: &BTreeMap<K, V>,
    keys: impl Iterator<Item = K>,
    last: usize,
) -> Result<Vec<V>> {
    keys.map(|k| entries.get(&k).copied().ok_or_else(|| Error::parse(last, format!("no entry for {k:?}")))).collect()
}

pub fn parse_policy(text: &str) -> Result<Policy> {
    let mut kind: Option<&str> = None;
    let mut s: BTreeMap<usize, usize> = BTreeMap::new();
    let mut td: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut fm: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    let mut init: Option<usize> = None;
    let mut last = 1;
    for (ln, line) in content_lines(text) {
        last = ln;
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or("");
        let family = if key == "FM-init" { "FM" } else { key };
        if !matches!(family, "S" | "TD" | "FM") {
            return Err(Error::parse(ln, format!("unknown policy line {key:?}")));
        }
        if kind.is_some_and(|k| k != family) {
            return Err(Error::parse(ln, "policy file mixes line kinds"));
        }
        kind = Some(family);
        let dup = match key {
            "S" => {
                let o = num(ln, toks.next(), "observation")?;
                s.insert(o, num(ln, toks.next(), "action")?).is_some()
            }
            "TD" => {
                let t = num(ln, toks.next(), "step")?;
                let o = num(ln, toks.next(), "observation")?;
                td.insert((t, o), num(ln, toks.next(), "action")?).is_some()
            }
            "FM" => {
                let o = num(ln, toks.next(), "observation")?;
                let q = num(ln, toks.next(), "memory")?;
                let a = num(ln, toks.next(), "action")?;
                let q2 = num(ln, toks.next(), "memory")?;
                fm.insert((o, q), (a, q2)).is_some()
            }
            _ => init.replace(num(ln, toks.next(), "memory")?).is_some(),
        };
        if dup {
            return Err(Error::parse(ln, "duplicate policy entry"));
        }
        no_more(ln, toks)?;
    }
    match kind {
        Some("S") => {
            let n = s.keys().next_back().map_or(0, |o| o + 1);
            Ok(Policy::Stationary(StationaryPolicy::new(dense(&s, 0..n, last)?)))
        }
        Some("TD") => {
            let h = td.keys().map(|k| k.0 + 1).max().unwrap_or(0);
            let k = td.keys().map(|k| k.1 + 1).max().unwrap_or(0);
            let table = (0..h).map(|t| dense(&td, (0..k).map(|o| (t, o)), last)).collect::<Result<Vec<_>>>()?;
            Ok(Policy::TimeDependent(TimeDependentPolicy::new(table).map_err(super::at(last))?))
        }
        Some("FM") => {
            let init = init.ok_or_else(|| Error::parse(last, "missing FM-init line"))?;
            let k = fm.keys().map(|k| k.0 + 1).max().unwrap_or(0);
            let mem = fm.keys().map(|k| k.1 + 1).max().unwrap_or(0);
            let step = (0..k).map(|o| dense(&fm, (0..mem).map(|q| (o, q)), last)).collect::<Result<Vec<_>>>()?;
            Ok(Policy::FiniteMemory(FiniteMemoryPolicy::new(mem, init, step).map_err(super::at(last))?))
        }
        _ => Err(Error::parse(last, "empty policy file")),
    }
}
