use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{Circuit, Gate, GateKind, SuccinctCircuitInstance};

use super::{content_lines, no_more, num};

struct Decl<'a> {
    line: usize,
    name: &'a str,
    kind: GateKind,
    args: Vec<&'a str>,
}

/// Collects `gate` and `output` lines; any other keyword is returned to
/// the caller through `other`.
struct NetlistReader<'a> {
    decls: Vec<Decl<'a>>,
    outputs: Vec<(usize, &'a str)>,
}

impl<'a> NetlistReader<'a> {
    fn new() -> Self {
        NetlistReader { decls: Vec::new(), outputs: Vec::new() }
    }

    /// Returns false when the line is not part of a netlist.
    fn feed(&mut self, ln: usize, line: &'a str) -> Result<bool> {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("gate") => {
                let name = toks.next().ok_or_else(|| Error::parse(ln, "missing gate id"))?;
                let kind_tok = toks.next().ok_or_else(|| Error::parse(ln, "missing gate kind"))?;
                let mut args: Vec<&str> = toks.collect();
                let kind = match kind_tok {
                    "AND" => GateKind::And,
                    "OR" => GateKind::Or,
                    "NOT" => GateKind::Not,
                    "INPUT" => GateKind::Input,
                    "CONST" => {
                        let v = match args.as_slice() {
                            ["0"] => false,
                            ["1"] => true,
                            _ => return Err(Error::parse(ln, "CONST takes a single 0 or 1")),
                        };
                        args.clear();
                        GateKind::Const(v)
                    }
                    other => return Err(Error::parse(ln, format!("unknown gate kind {other:?}"))),
                };
                if args.len() != kind.arity() {
                    return Err(Error::parse(
                        ln,
                        format!("{kind_tok} takes {} inputs, got {}", kind.arity(), args.len()),
                    ));
                }
                if self.decls.iter().any(|d| d.name == name) {
                    return Err(Error::parse(ln, format!("gate {name:?} declared twice")));
                }
                self.decls.push(Decl { line: ln, name, kind, args });
                Ok(true)
            }
            Some("output") => {
                let name = toks.next().ok_or_else(|| Error::parse(ln, "missing output id"))?;
                no_more(ln, toks)?;
                self.outputs.push((ln, name));
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn finish(self, last_line: usize) -> Result<Circuit> {
        let index: HashMap<&str, usize> = self.decls.iter().enumerate().map(|(i, d)| (d.name, i)).collect();
        let resolve = |ln: usize, name: &str| {
            index.get(name).copied().ok_or_else(|| Error::parse(ln, format!("unknown gate {name:?}")))
        };
        let mut gates = Vec::with_capacity(self.decls.len());
        for d in &self.decls {
            let inputs = d.args.iter().map(|a| resolve(d.line, a)).collect::<Result<_>>()?;
            gates.push(Gate { name: d.name.to_string(), kind: d.kind, inputs });
        }
        let outputs = self.outputs.iter().map(|&(ln, n)| resolve(ln, n)).collect::<Result<_>>()?;
        Circuit::new(gates, outputs).map_err(|e| match e {
            Error::Cycle(_) => e,
            other => Error::parse(last_line, other.to_string()),
        })
    }
}

/// Netlist of `gate <id> AND|OR <a> <b>`, `gate <id> NOT <a>`,
/// `gate <id> CONST 0|1`, `gate <id> INPUT` and `output <id>` lines.
/// References may point forward; cycles are rejected.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut r = NetlistReader::new();
    let mut last = 1;
    for (ln, line) in content_lines(text) {
        last = ln;
        if !r.feed(ln, line)? {
            return Err(Error::parse(ln, format!("expected gate or output, got {line:?}")));
        }
    }
    r.finish(last)
}

pub(crate) fn parse_netlist_block<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    terminator: &str,
) -> Result<Circuit> {
    let mut r = NetlistReader::new();
    let mut last = 1;
    for (ln, line) in lines.by_ref() {
        last = ln;
        if line == terminator {
            return r.finish(ln);
        }
        if !r.feed(ln, line)? {
            return Err(Error::parse(ln, format!("expected gate, output or {terminator:?}, got {line:?}")));
        }
    }
    Err(Error::parse(last, format!("netlist block not closed by {terminator:?}")))
}

pub(crate) fn write_netlist(out: &mut String, c: &Circuit) {
    for g in c.gates() {
        write!(out, "gate {} {}", g.name, g.kind).unwrap();
        for &i in &g.inputs {
            write!(out, " {}", c.gate(i).name).unwrap();
        }
        out.push('\n');
    }
    for &o in c.outputs() {
        writeln!(out, "output {}", c.gate(o).name).unwrap();
    }
}

pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    write_netlist(&mut out, c);
    out
}

/// `SUCCINCT v1`, `width <l>`, then the netlist of `S`.
pub fn parse_succinct(text: &str) -> Result<SuccinctCircuitInstance> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "SUCCINCT v1")) => {}
        Some((ln, _)) => return Err(Error::parse(ln, "expected header \"SUCCINCT v1\"")),
        None => return Err(Error::parse(1, "empty file")),
    }
    let (ln, line) = lines.next().ok_or_else(|| Error::parse(1, "missing width line"))?;
    let mut toks = line.split_whitespace();
    if toks.next() != Some("width") {
        return Err(Error::parse(ln, "expected \"width <l>\""));
    }
    let width: usize = num(ln, toks.next(), "width")?;
    no_more(ln, toks)?;
    let mut r = NetlistReader::new();
    let mut last = ln;
    for (ln, line) in lines {
        last = ln;
        if !r.feed(ln, line)? {
            return Err(Error::parse(ln, format!("expected gate or output, got {line:?}")));
        }
    }
    SuccinctCircuitInstance::new(r.finish(last)?, width).map_err(super::at(last))
}

pub fn serialize_succinct(s: &SuccinctCircuitInstance) -> String {
    let mut out = format!("SUCCINCT v1\nwidth {}\n", s.width);
    write_netlist(&mut out, &s.circuit);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::full_adder;

    #[test]
    fn or_of_constants() {
        let c = parse_circuit("gate a CONST 1\ngate b CONST 0\ngate o OR a b\noutput o\n").unwrap();
        assert_eq!(c.eval(&[]).unwrap(), vec![true]);
    }

    #[test]
    fn forward_references_and_cycles() {
        let c = parse_circuit("gate o NOT a\ngate a CONST 0\noutput o\n").unwrap();
        assert_eq!(c.eval(&[]).unwrap(), vec![true]);
        let e = parse_circuit("gate a NOT a\noutput a\n").unwrap_err();
        assert!(matches!(e, Error::Cycle(_)), "{e}");
    }

    #[test]
    fn rejections() {
        assert!(parse_circuit("gate a AND b\n").is_err());
        assert!(parse_circuit("gate a NOT zz\noutput a\n").is_err());
        assert!(parse_circuit("gate a CONST 2\n").is_err());
        assert!(parse_circuit("gate a XOR b c\n").is_err());
        assert!(parse_circuit("gate a CONST 1\ngate a CONST 0\n").is_err());
    }

    #[test]
    fn adder_round_trip() {
        let c = full_adder();
        let back = parse_circuit(&serialize_circuit(&c)).unwrap();
        assert_eq!(back, c);
    }
}
