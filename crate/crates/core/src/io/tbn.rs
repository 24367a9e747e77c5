use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{bits_to_string, FluentCpt, Parent, SuccinctReward, Tbn, TbnReward};
use crate::rat::{self, Rat};

use super::netlist::{parse_netlist_block, write_netlist};
use super::{content_lines, no_more, num, ratio};

fn bits(ln: usize, tok: Option<&str>, len: usize) -> Result<Vec<bool>> {
    let tok = tok.ok_or_else(|| Error::parse(ln, "missing bit string"))?;
    if tok == "-" && len == 0 {
        return Ok(Vec::new());
    }
    let out: Vec<bool> = tok
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::parse(ln, format!("bad bit string {tok:?}"))),
        })
        .collect::<Result<_>>()?;
    if out.len() != len {
        return Err(Error::parse(ln, format!("bit string {tok:?} has {} bits, expected {len}", out.len())));
    }
    Ok(out)
}

fn bit_token(b: &[bool]) -> String {
    if b.is_empty() {
        "-".into()
    } else {
        bits_to_string(b)
    }
}

/// Text form: fluent names, initial assignment, one block per action with a
/// `dep` line and full CPT per fluent, then the reward. Primed parent names
/// are synchronous (next-slice) parents; CPT rows list parent bits in
/// `dep` order.
pub fn serialize_tbn(t: &Tbn) -> String {
    let names = t.fluents();
    let mut out = String::from("TBN v1\n");
    writeln!(out, "fluents {}", names.join(" ")).unwrap();
    writeln!(out, "initial {}", bit_token(t.initial())).unwrap();
    writeln!(out, "actions {}", t.n_actions()).unwrap();
    for a in 0..t.n_actions() {
        writeln!(out, "action {a}").unwrap();
        for (k, name) in names.iter().enumerate() {
            let model = t.model(a, k);
            write!(out, "dep {name}'").unwrap();
            for p in &model.parents {
                match *p {
                    Parent::Current(i) => write!(out, " {}", names[i]).unwrap(),
                    Parent::Next(i) => write!(out, " {}'", names[i]).unwrap(),
                }
            }
            out.push('\n');
            for (row, p) in model.cpt.iter().enumerate() {
                let b = crate::model::tbn::row_bits(row, model.parents.len());
                writeln!(out, "cpt {name}' {} {}", bit_token(&b), rat::fmt(p)).unwrap();
            }
        }
    }
    match t.reward_spec() {
        TbnReward::Zero => {}
        TbnReward::Table(table) => {
            for ((b, a), r) in table {
                writeln!(out, "R {} {a} {}", bit_token(b), rat::fmt(r)).unwrap();
            }
        }
        TbnReward::Circuit(c) => {
            writeln!(out, "reward-circuit {} {} {}", c.state_bits, c.action_bits, c.index_bits).unwrap();
            write_netlist(&mut out, &c.circuit);
            out.push_str("end\n");
        }
    }
    out
}

struct Pending {
    parents: Option<Vec<Parent>>,
    rows: Vec<Option<Rat>>,
}

/// Inverse of [`serialize_tbn`].
pub fn parse_tbn(text: &str) -> Result<Tbn> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "TBN v1")) => {}
        Some((ln, _)) => return Err(Error::parse(ln, "expected header \"TBN v1\"")),
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut fluents: Option<Vec<String>> = None;
    let mut initial: Option<Vec<bool>> = None;
    let mut n_actions: Option<usize> = None;
    let mut blocks: Vec<Vec<Pending>> = Vec::new();
    let mut table: BTreeMap<(Vec<bool>, usize), Rat> = BTreeMap::new();
    let mut circuit: Option<SuccinctReward> = None;
    let mut last = 1;
    while let Some((ln, line)) = lines.next() {
        last = ln;
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or("");
        if key == "fluents" {
            if fluents.is_some() {
                return Err(Error::parse(ln, "fluents declared twice"));
            }
            fluents = Some(toks.map(String::from).collect());
            continue;
        }
        let names = fluents.as_ref().ok_or_else(|| Error::parse(ln, "fluents must be declared first"))?;
        let n = names.len();
        let fluent = |ln: usize, tok: Option<&str>| -> Result<(usize, bool)> {
            let tok = tok.ok_or_else(|| Error::parse(ln, "missing fluent name"))?;
            let (base, primed) = match tok.strip_suffix('\'') {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let i = names
                .iter()
                .position(|f| f == base)
                .ok_or_else(|| Error::parse(ln, format!("unknown fluent {base:?}")))?;
            Ok((i, primed))
        };
        match key {
            "initial" => {
                initial = Some(bits(ln, toks.next(), n)?);
            }
            "actions" => {
                n_actions = Some(num(ln, toks.next(), "action count")?);
            }
            "action" => {
                let a: usize = num(ln, toks.next(), "action")?;
                if a != blocks.len() || n_actions.is_some_and(|na| a >= na) {
                    return Err(Error::parse(ln, format!("action blocks must be numbered 0.. in order, got {a}")));
                }
                blocks.push((0..n).map(|_| Pending { parents: None, rows: Vec::new() }).collect());
            }
            "dep" | "cpt" => {
                let block = blocks.last_mut().ok_or_else(|| Error::parse(ln, format!("{key} outside an action")))?;
                let (k, _) = fluent(ln, toks.next())?;
                let slot = &mut block[k];
                if key == "dep" {
                    if slot.parents.is_some() {
                        return Err(Error::parse(ln, format!("second dep line for {}", names[k])));
                    }
                    let mut parents = Vec::new();
                    for tok in toks.by_ref() {
                        let (i, primed) = fluent(ln, Some(tok))?;
                        parents.push(if primed { Parent::Next(i) } else { Parent::Current(i) });
                    }
                    slot.rows = vec![None; 1 << parents.len()];
                    slot.parents = Some(parents);
                } else {
                    let Some(parents) = &slot.parents else {
                        return Err(Error::parse(ln, format!("cpt for {} before its dep line", names[k])));
                    };
                    let b = bits(ln, toks.next(), parents.len())?;
                    let row = b.iter().fold(0usize, |acc, &x| acc << 1 | x as usize);
                    let p = ratio(ln, toks.next())?;
                    if slot.rows[row].replace(p).is_some() {
                        return Err(Error::parse(ln, format!("duplicate cpt row for {}", names[k])));
                    }
                }
            }
            "R" => {
                let b = bits(ln, toks.next(), n)?;
                let a: usize = num(ln, toks.next(), "action")?;
                let r = ratio(ln, toks.next())?;
                if table.insert((b, a), r).is_some() {
                    return Err(Error::parse(ln, "duplicate reward entry"));
                }
            }
            "reward-circuit" => {
                let sb: usize = num(ln, toks.next(), "state bits")?;
                let ab: usize = num(ln, toks.next(), "action bits")?;
                let ib: usize = num(ln, toks.next(), "index bits")?;
                no_more(ln, toks.by_ref())?;
                let c = parse_netlist_block(&mut lines, "end")?;
                circuit = Some(SuccinctReward::new(c, sb, ab, ib).map_err(super::at(ln))?);
            }
            other => return Err(Error::parse(ln, format!("unknown keyword {other:?}"))),
        }
        no_more(ln, toks)?;
    }
    let fluents = fluents.ok_or_else(|| Error::parse(last, "missing fluents line"))?;
    let initial = initial.ok_or_else(|| Error::parse(last, "missing initial line"))?;
    if let Some(na) = n_actions {
        if blocks.len() != na {
            return Err(Error::parse(last, format!("declared {na} actions, found {} blocks", blocks.len())));
        }
    }
    let mut actions = Vec::with_capacity(blocks.len());
    for (a, block) in blocks.into_iter().enumerate() {
        let mut models = Vec::with_capacity(block.len());
        for (k, p) in block.into_iter().enumerate() {
            let parents =
                p.parents.ok_or_else(|| Error::parse(last, format!("action {a}: no dep line for {}", fluents[k])))?;
            let rows = p
                .rows
                .into_iter()
                .collect::<Option<Vec<Rat>>>()
                .ok_or_else(|| Error::parse(last, format!("action {a}: incomplete cpt for {}", fluents[k])))?;
            models.push(FluentCpt::new(parents, rows));
        }
        actions.push(models);
    }
    let reward = match (circuit, table.is_empty()) {
        (Some(_), false) => return Err(Error::parse(last, "reward table and reward circuit are exclusive")),
        (Some(c), true) => TbnReward::Circuit(c),
        (None, false) => TbnReward::Table(table),
        (None, true) => TbnReward::Zero,
    };
    Tbn::new(fluents, actions, initial, reward).map_err(|e| match e {
        Error::Cycle(_) => e,
        other => Error::parse(last, other.to_string()),
    })
}
